//! Moment that the limbs exert about the wearer's reference point.
//!
//! For each limb `i` with arm `r_i`, mass `m_i` and body-frame COM
//! acceleration `a_i`, the contribution is `r_i × (m_i g + m_i a_i)`. The
//! frame is treated as inertial; trunk motion is not modeled.

use crate::body::{limb_com_acceleration, moment_arm, HumanModel, JointState, LimbModel, Vec3};
use crate::error::{Result, SimError};

/// Moment vector at one instant together with its Euclidean norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSample {
    pub time: f64,
    pub moment: Vec3,
    pub norm: f64,
}

impl MomentSample {
    pub fn new(time: f64, moment: Vec3) -> Self {
        MomentSample {
            time,
            moment,
            norm: moment.norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimbMoment {
    pub limb_id: u32,
    /// `r × m g`, attributable to the COM offset.
    pub gravity_term: Vec3,
    /// `r × m a`, attributable to limb motion.
    pub motion_term: Vec3,
}

impl LimbMoment {
    pub fn total(&self) -> Vec3 {
        self.gravity_term + self.motion_term
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MomentBreakdown {
    pub per_limb: Vec<LimbMoment>,
}

impl MomentBreakdown {
    pub fn total(&self) -> Vec3 {
        self.per_limb.iter().map(LimbMoment::total).sum()
    }
}

/// Gravity and motion contributions of a single limb.
pub fn limb_moment(limb: &LimbModel, state: &JointState, human: &HumanModel) -> LimbMoment {
    let arm = moment_arm(limb, state.angle, human);
    let accel = limb_com_acceleration(limb, state);
    LimbMoment {
        limb_id: limb.id,
        gravity_term: arm.cross(human.gravity * limb.mass),
        motion_term: arm.cross(accel * limb.mass),
    }
}

fn check_lengths(limbs: &[LimbModel], states: &[JointState]) -> Result<()> {
    if limbs.len() != states.len() {
        return Err(SimError::LengthMismatch {
            limbs: limbs.len(),
            states: states.len(),
        });
    }
    if limbs.is_empty() {
        return Err(SimError::invalid("limbs", "at least one limb is required"));
    }
    Ok(())
}

pub fn moment_breakdown(
    limbs: &[LimbModel],
    states: &[JointState],
    human: &HumanModel,
) -> Result<MomentBreakdown> {
    check_lengths(limbs, states)?;
    Ok(MomentBreakdown {
        per_limb: limbs
            .iter()
            .zip(states)
            .map(|(limb, state)| limb_moment(limb, state, human))
            .collect(),
    })
}

/// Total moment about the reference point, summed over all limbs.
pub fn total_moment(
    limbs: &[LimbModel],
    states: &[JointState],
    human: &HumanModel,
    time: f64,
) -> Result<MomentSample> {
    check_lengths(limbs, states)?;
    Ok(MomentSample::new(time, moment_sum(limbs, states, human)))
}

/// Unchecked sum used on the planner's hot path; callers guarantee equal lengths.
pub(crate) fn moment_sum(limbs: &[LimbModel], states: &[JointState], human: &HumanModel) -> Vec3 {
    debug_assert_eq!(limbs.len(), states.len());
    limbs
        .iter()
        .zip(states)
        .map(|(limb, state)| limb_moment(limb, state, human).total())
        .sum()
}
