//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use srl_core::body::{HumanModel, JointState, LimbModel};

pub type V = [f64; 3];

pub fn oracle_cross(a: V, b: V) -> V {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn oracle_dot(a: V, b: V) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Rotation matrix `cI + s[k]× + (1-c) k kᵀ` applied to `v`.
pub fn oracle_rotate(k: V, angle: f64, v: V) -> V {
    let (c, s) = (angle.cos(), angle.sin());
    let t = 1.0 - c;
    let m = [
        [
            c + t * k[0] * k[0],
            t * k[0] * k[1] - s * k[2],
            t * k[0] * k[2] + s * k[1],
        ],
        [
            t * k[1] * k[0] + s * k[2],
            c + t * k[1] * k[1],
            t * k[1] * k[2] - s * k[0],
        ],
        [
            t * k[2] * k[0] - s * k[1],
            t * k[2] * k[1] + s * k[0],
            c + t * k[2] * k[2],
        ],
    ];
    [
        oracle_dot(m[0], v),
        oracle_dot(m[1], v),
        oracle_dot(m[2], v),
    ]
}

/// Sum over limbs of r × (m g + m a), term by term.
pub fn oracle_moment(limbs: &[LimbModel], states: &[JointState], human: &HumanModel) -> V {
    let g = human.gravity.to_array();
    let p = human.reference_point.to_array();
    let mut total = [0.0; 3];
    for (limb, st) in limbs.iter().zip(states) {
        let k = limb.rotation_axis.to_array();
        let mount = limb.mount_point.to_array();
        let dir = oracle_rotate(k, st.angle, limb.zero_direction.to_array());
        let rho = [
            dir[0] * limb.length,
            dir[1] * limb.length,
            dir[2] * limb.length,
        ];
        let r = [
            mount[0] + rho[0] - p[0],
            mount[1] + rho[1] - p[1],
            mount[2] + rho[2] - p[2],
        ];
        // Tangential α k × ρ; centripetal via ω(ω·ρ) − ρ|ω|².
        let tangential = oracle_cross(k, rho);
        let w = [k[0] * st.velocity, k[1] * st.velocity, k[2] * st.velocity];
        let w_rho = oracle_dot(w, rho);
        let w2 = oracle_dot(w, w);
        let mut force = [0.0; 3];
        for j in 0..3 {
            let a = st.acceleration * tangential[j] + (w[j] * w_rho - rho[j] * w2);
            force[j] = limb.mass * g[j] + limb.mass * a;
        }
        let m = oracle_cross(r, force);
        for j in 0..3 {
            total[j] += m[j];
        }
    }
    total
}

/// Closed-form constant-acceleration step.
pub fn oracle_step(s: JointState, alpha: f64, dt: f64) -> JointState {
    JointState::new(
        s.angle + s.velocity * dt + alpha * dt * dt / 2.0,
        s.velocity + alpha * dt,
        alpha,
    )
}

pub fn oracle_norm(v: V) -> f64 {
    oracle_dot(v, v).sqrt()
}
