//! Constant-acceleration joint profiles, reference trajectories and deviation
//! bookkeeping.

use crate::body::JointState;
use crate::error::{Result, SimError};

/// Joint motion with constant acceleration on `(t_start, t_end]` and zero
/// acceleration elsewhere. Before `t_start` the joint coasts from `theta0`.
///
/// The acceleration reported at time `t` is the one applied over the period
/// ending at `t`, so a state evaluated at `t_start` still reads zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantAccelProfile {
    pub theta0: f64,
    pub omega0: f64,
    pub alpha: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl ConstantAccelProfile {
    pub fn new(theta0: f64, omega0: f64, alpha: f64, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(SimError::invalid("profile", "t_end must exceed t_start"));
        }
        if ![theta0, omega0, alpha, t_start, t_end]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(SimError::invalid("profile", "non-finite parameter"));
        }
        Ok(ConstantAccelProfile {
            theta0,
            omega0,
            alpha,
            t_start,
            t_end,
        })
    }

    /// Zero-acceleration continuation of an initial state.
    pub fn coast(theta0: f64, omega0: f64) -> Self {
        ConstantAccelProfile {
            theta0,
            omega0,
            alpha: 0.0,
            t_start: 0.0,
            t_end: f64::INFINITY,
        }
    }

    /// Closed-form state at time `t`.
    pub fn eval(&self, t: f64) -> JointState {
        if t <= self.t_start {
            return JointState::new(self.theta0 + self.omega0 * t, self.omega0, 0.0);
        }
        let (ramp, coast) = if t <= self.t_end {
            (t - self.t_start, 0.0)
        } else {
            (self.t_end - self.t_start, t - self.t_end)
        };
        let base = self.theta0 + self.omega0 * self.t_start;
        let angle = base + self.omega0 * ramp + 0.5 * self.alpha * ramp * ramp;
        let velocity = self.omega0 + self.alpha * ramp;
        if coast > 0.0 {
            JointState::new(angle + velocity * coast, velocity, 0.0)
        } else {
            JointState::new(angle, velocity, self.alpha)
        }
    }
}

/// Exact constant-acceleration step of length `dt`.
pub fn integrate_constant_alpha(state: &JointState, alpha: f64, dt: f64) -> JointState {
    debug_assert!(dt > 0.0);
    JointState::new(
        state.angle + state.velocity * dt + 0.5 * alpha * dt * dt,
        state.velocity + alpha * dt,
        alpha,
    )
}

/// Profile that sweeps `total_angle` from rest in `duration` seconds under
/// constant acceleration.
pub fn disturbance_profile(total_angle: f64, duration: f64) -> Result<ConstantAccelProfile> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(SimError::invalid(
            "disturbance duration",
            "must be positive",
        ));
    }
    ConstantAccelProfile::new(
        0.0,
        0.0,
        2.0 * total_angle / (duration * duration),
        0.0,
        duration,
    )
}

/// The trajectories each limb follows when no compensation is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    entries: Vec<(u32, ConstantAccelProfile)>,
}

impl ReferenceTrajectory {
    pub fn new(entries: Vec<(u32, ConstantAccelProfile)>) -> Self {
        ReferenceTrajectory { entries }
    }

    pub fn profile(&self, limb_id: u32) -> Result<&ConstantAccelProfile> {
        self.entries
            .iter()
            .find(|(id, _)| *id == limb_id)
            .map(|(_, p)| p)
            .ok_or(SimError::UnknownLimb(limb_id))
    }

    pub fn limb_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|(id, _)| *id)
    }
}

pub fn eval_reference(reference: &ReferenceTrajectory, limb_id: u32, t: f64) -> Result<JointState> {
    Ok(reference.profile(limb_id)?.eval(t))
}

/// Unwrapped angular distance between two states.
pub fn deviation(actual: &JointState, reference: &JointState) -> f64 {
    (actual.angle - reference.angle).abs()
}

/// Worst deviation of each tracked limb from its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub limit: f64,
    pub per_limb: Vec<(u32, f64)>,
    pub violated: bool,
}

impl DeviationReport {
    pub fn new(limit: f64, limb_ids: &[u32]) -> Self {
        DeviationReport {
            limit,
            per_limb: limb_ids.iter().map(|&id| (id, 0.0)).collect(),
            violated: false,
        }
    }

    pub fn record(&mut self, limb_id: u32, dev: f64) {
        if let Some((_, worst)) = self.per_limb.iter_mut().find(|(id, _)| *id == limb_id) {
            if dev > *worst {
                *worst = dev;
            }
            if dev > self.limit {
                self.violated = true;
            }
        }
    }

    pub fn max(&self) -> f64 {
        self.per_limb.iter().map(|(_, d)| *d).fold(0.0, f64::max)
    }
}
