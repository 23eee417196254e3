//! Sampling-based compensation planner.
//!
//! Each control loop the planner draws `iterations` vectors of joint
//! accelerations for the compensating limbs, holds each vector constant over
//! a short look-ahead, discards those that leave the deviation band around
//! the reference trajectories, and keeps the one with the smallest predicted
//! moment norm. A dense grid search over the same cost is provided as an
//! oracle for the random search.

use rand_core::RngCore;

use crate::body::{HumanModel, JointState, LimbModel, Vec3};
use crate::dynamics::{limb_moment, moment_sum};
use crate::error::{Result, SimError};
use crate::rng::symmetric_f64;
use crate::trajectory::{integrate_constant_alpha, ReferenceTrajectory};

/// Largest grid the oracle will enumerate.
pub const MAX_GRID_POINTS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    /// Sampling bound on each compensating joint acceleration, rad/s².
    pub alpha_max: f64,
    /// Allowed distance from the reference angle, rad.
    pub deviation_limit: f64,
    /// Candidates drawn per control loop.
    pub iterations: usize,
    pub control_dt: f64,
    /// Look-ahead length in control periods.
    pub horizon_steps: usize,
    /// Predicted norm increase (N·m) that engages the planner.
    pub activation_threshold: f64,
    /// When set, a candidate is also rejected if braking at this fraction of
    /// `alpha_max` could no longer keep the limb inside the deviation band.
    pub braking_fraction: Option<f64>,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            alpha_max: 20f64.to_radians(),
            deviation_limit: 20f64.to_radians(),
            iterations: 3000,
            control_dt: 0.01,
            horizon_steps: 10,
            activation_threshold: 0.0,
            braking_fraction: Some(0.5),
            seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, reason: &str| Err(SimError::invalid(what, reason));
        if !(self.alpha_max > 0.0 && self.alpha_max.is_finite()) {
            return bad("alpha_max", "must be positive");
        }
        // A zero band is allowed: it pins every compensating limb to its reference.
        if !(self.deviation_limit >= 0.0) || self.deviation_limit.is_nan() {
            return bad("deviation_limit", "must be non-negative");
        }
        if self.iterations == 0 {
            return bad("iterations", "must be at least 1");
        }
        if !(self.control_dt > 0.0 && self.control_dt.is_finite()) {
            return bad("control_dt", "must be positive");
        }
        if self.horizon_steps == 0 {
            return bad("horizon_steps", "must be at least 1");
        }
        if self.activation_threshold.is_nan() {
            return bad("activation_threshold", "must not be NaN");
        }
        if let Some(f) = self.braking_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad("braking_fraction", "must lie in (0, 1]");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePlan {
    /// One acceleration per compensating limb, in limb order.
    pub alphas: Vec<f64>,
    /// Mean predicted moment norm; `None` when infeasible.
    pub cost: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanDecision {
    pub chosen: CandidatePlan,
    pub activated: bool,
    pub n_feasible: usize,
    pub fallback: bool,
}

/// Draws one candidate: `n` independent uniform values on `[-alpha_max, alpha_max)`.
pub fn sample_candidate<R: RngCore + ?Sized>(rng: &mut R, n: usize, alpha_max: f64) -> Vec<f64> {
    (0..n).map(|_| symmetric_f64(rng, alpha_max)).collect()
}

/// The limbs, wearer and trajectories a planner works against.
#[derive(Debug, Clone)]
pub struct PlanningProblem {
    pub limbs: Vec<LimbModel>,
    pub human: HumanModel,
    pub reference: ReferenceTrajectory,
    pub disturbance_limb: u32,
    pub config: PlannerConfig,
    compensating: Vec<usize>,
}

/// Reference states of every limb at each look-ahead substep, plus the
/// moment of the limbs the planner does not move.
struct Lookahead {
    references: Vec<Vec<JointState>>,
    fixed_moment: Vec<Vec3>,
}

impl PlanningProblem {
    pub fn new(
        limbs: Vec<LimbModel>,
        human: HumanModel,
        reference: ReferenceTrajectory,
        disturbance_limb: u32,
        config: PlannerConfig,
    ) -> Result<Self> {
        config.validate()?;
        if limbs.is_empty() {
            return Err(SimError::invalid("limbs", "at least one limb is required"));
        }
        for limb in &limbs {
            limb.validate()?;
            reference.profile(limb.id)?;
        }
        if !limbs.iter().any(|l| l.id == disturbance_limb) {
            return Err(SimError::UnknownLimb(disturbance_limb));
        }
        let compensating = limbs
            .iter()
            .enumerate()
            .filter(|(_, l)| l.id != disturbance_limb)
            .map(|(i, _)| i)
            .collect();
        Ok(PlanningProblem {
            limbs,
            human,
            reference,
            disturbance_limb,
            config,
            compensating,
        })
    }

    /// Ids of the limbs whose trajectories the planner may modify, in order.
    pub fn compensating_ids(&self) -> Vec<u32> {
        self.compensating
            .iter()
            .map(|&i| self.limbs[i].id)
            .collect()
    }

    pub fn compensating_count(&self) -> usize {
        self.compensating.len()
    }

    fn reference_states(&self, t: f64) -> Vec<JointState> {
        self.limbs
            .iter()
            .map(|l| {
                self.reference
                    .profile(l.id)
                    .expect("checked in new")
                    .eval(t)
            })
            .collect()
    }

    fn lookahead(&self, t: f64) -> Lookahead {
        let dt = self.config.control_dt;
        let references: Vec<Vec<JointState>> = (1..=self.config.horizon_steps)
            .map(|s| self.reference_states(t + s as f64 * dt))
            .collect();
        let fixed_moment = references
            .iter()
            .map(|refs| {
                self.limbs
                    .iter()
                    .zip(refs)
                    .filter(|(l, _)| l.id == self.disturbance_limb)
                    .map(|(l, s)| limb_moment(l, s, &self.human).total())
                    .sum()
            })
            .collect();
        Lookahead {
            references,
            fixed_moment,
        }
    }

    fn check_states(&self, states: &[JointState]) -> Result<()> {
        if states.len() != self.limbs.len() {
            return Err(SimError::LengthMismatch {
                limbs: self.limbs.len(),
                states: states.len(),
            });
        }
        Ok(())
    }

    /// Whether following the reference for one control period would raise
    /// the moment norm by more than the activation threshold.
    pub fn should_activate(&self, states: &[JointState], t: f64) -> Result<bool> {
        self.check_states(states)?;
        let current = moment_sum(&self.limbs, states, &self.human).norm();
        let next_ref = self.reference_states(t + self.config.control_dt);
        let now_ref = self.reference_states(t);
        let predicted: Vec<JointState> = states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if self.limbs[i].id == self.disturbance_limb {
                    next_ref[i]
                } else {
                    integrate_constant_alpha(s, now_ref[i].acceleration, self.config.control_dt)
                }
            })
            .collect();
        let predicted = moment_sum(&self.limbs, &predicted, &self.human).norm();
        Ok(predicted - current > self.config.activation_threshold)
    }

    /// Rolls the candidate forward over the look-ahead and scores it.
    pub fn evaluate_candidate(
        &self,
        alphas: &[f64],
        states: &[JointState],
        t: f64,
    ) -> Result<CandidatePlan> {
        self.check_states(states)?;
        if alphas.len() != self.compensating.len() {
            return Err(SimError::invalid(
                "candidate",
                format!(
                    "{} accelerations for {} compensating limbs",
                    alphas.len(),
                    self.compensating.len()
                ),
            ));
        }
        Ok(self.evaluate(alphas, states, &self.lookahead(t)))
    }

    fn evaluate(&self, alphas: &[f64], states: &[JointState], ahead: &Lookahead) -> CandidatePlan {
        let dt = self.config.control_dt;
        let limit = self.config.deviation_limit;
        let brake = self
            .config
            .braking_fraction
            .map(|f| f * self.config.alpha_max);
        let mut current: Vec<JointState> = self.compensating.iter().map(|&i| states[i]).collect();
        let mut total = 0.0;

        for (refs, fixed) in ahead.references.iter().zip(&ahead.fixed_moment) {
            let mut moment = *fixed;
            for ((&i, &alpha), state) in self.compensating.iter().zip(alphas).zip(&mut current) {
                let next = integrate_constant_alpha(state, alpha, dt);
                let offset = next.angle - refs[i].angle;
                let escapes = offset.abs() > limit
                    || brake.is_some_and(|brake| {
                        let rate = next.velocity - refs[i].velocity;
                        (offset + rate * rate.abs() / (2.0 * brake)).abs() > limit
                    });
                if escapes {
                    return CandidatePlan {
                        alphas: alphas.to_vec(),
                        cost: None,
                        feasible: false,
                    };
                }
                *state = next;
                moment += limb_moment(&self.limbs[i], state, &self.human).total();
            }
            total += moment.norm();
        }

        CandidatePlan {
            alphas: alphas.to_vec(),
            cost: Some(total / ahead.references.len() as f64),
            feasible: true,
        }
    }

    fn reference_alphas(&self, t: f64) -> Vec<f64> {
        let refs = self.reference_states(t);
        self.compensating
            .iter()
            .map(|&i| refs[i].acceleration)
            .collect()
    }

    /// Decision for a loop in which the planner stays idle: the reference
    /// accelerations, scored like any other candidate.
    pub fn passive_step(&self, states: &[JointState], t: f64) -> Result<PlanDecision> {
        self.check_states(states)?;
        Ok(self.passive(states, t, &self.lookahead(t)))
    }

    fn passive(&self, states: &[JointState], t: f64, ahead: &Lookahead) -> PlanDecision {
        let chosen = self.evaluate(&self.reference_alphas(t), states, ahead);
        PlanDecision {
            n_feasible: usize::from(chosen.feasible),
            chosen,
            activated: false,
            fallback: false,
        }
    }

    fn fallback(&self) -> CandidatePlan {
        CandidatePlan {
            alphas: vec![0.0; self.compensating.len()],
            cost: None,
            feasible: false,
        }
    }

    /// One control loop of the random search.
    pub fn plan_step<R: RngCore + ?Sized>(
        &self,
        rng: &mut R,
        states: &[JointState],
        t: f64,
    ) -> Result<PlanDecision> {
        self.plan_step_inner(rng, states, t, None)
    }

    /// Like [`plan_step`](Self::plan_step) but also returns every candidate
    /// evaluated, in draw order.
    pub fn plan_step_traced<R: RngCore + ?Sized>(
        &self,
        rng: &mut R,
        states: &[JointState],
        t: f64,
    ) -> Result<(PlanDecision, Vec<CandidatePlan>)> {
        let mut trace = Vec::with_capacity(self.config.iterations);
        let decision = self.plan_step_inner(rng, states, t, Some(&mut trace))?;
        Ok((decision, trace))
    }

    fn plan_step_inner<R: RngCore + ?Sized>(
        &self,
        rng: &mut R,
        states: &[JointState],
        t: f64,
        trace: Option<&mut Vec<CandidatePlan>>,
    ) -> Result<PlanDecision> {
        let ahead = self.lookahead(t);
        if !self.should_activate(states, t)? {
            return Ok(self.passive(states, t, &ahead));
        }
        Ok(self.search_activated(rng, states, &ahead, trace))
    }

    /// Random search without the activation check.
    pub fn search<R: RngCore + ?Sized>(
        &self,
        rng: &mut R,
        states: &[JointState],
        t: f64,
    ) -> Result<PlanDecision> {
        self.check_states(states)?;
        Ok(self.search_activated(rng, states, &self.lookahead(t), None))
    }

    fn search_activated<R: RngCore + ?Sized>(
        &self,
        rng: &mut R,
        states: &[JointState],
        ahead: &Lookahead,
        mut trace: Option<&mut Vec<CandidatePlan>>,
    ) -> PlanDecision {
        let n = self.compensating.len();
        // Draw the whole stream first so the result never depends on how
        // candidates are scheduled for evaluation.
        let draws: Vec<Vec<f64>> = (0..self.config.iterations)
            .map(|_| sample_candidate(rng, n, self.config.alpha_max))
            .collect();

        let mut best: Option<CandidatePlan> = None;
        let mut n_feasible = 0;
        for alphas in &draws {
            let candidate = self.evaluate(alphas, states, ahead);
            if let Some(cost) = candidate.cost {
                n_feasible += 1;
                if best.as_ref().and_then(|b| b.cost).is_none_or(|b| cost < b) {
                    best = Some(candidate.clone());
                }
            }
            if let Some(trace) = trace.as_deref_mut() {
                trace.push(candidate);
            }
        }
        self.decide(best, n_feasible)
    }

    fn decide(&self, best: Option<CandidatePlan>, n_feasible: usize) -> PlanDecision {
        match best {
            Some(chosen) => PlanDecision {
                chosen,
                activated: true,
                n_feasible,
                fallback: false,
            },
            None => PlanDecision {
                chosen: self.fallback(),
                activated: true,
                n_feasible: 0,
                fallback: true,
            },
        }
    }

    /// Exhaustive search over a uniform grid of `points_per_limb` values per
    /// compensating limb. Ties go to the lowest grid index, with the first
    /// compensating limb varying slowest.
    pub fn grid_search_step(
        &self,
        states: &[JointState],
        t: f64,
        points_per_limb: usize,
    ) -> Result<PlanDecision> {
        self.check_states(states)?;
        if points_per_limb < 2 {
            return Err(SimError::invalid("grid", "need at least 2 points per limb"));
        }
        let n = self.compensating.len();
        let total = (points_per_limb as u128)
            .checked_pow(n as u32)
            .unwrap_or(u128::MAX);
        if total > MAX_GRID_POINTS as u128 {
            return Err(SimError::GridTooLarge {
                points: total,
                limit: MAX_GRID_POINTS,
            });
        }

        let a = self.config.alpha_max;
        let step = 2.0 * a / (points_per_limb - 1) as f64;
        let value = |k: usize| -a + step * k as f64;
        let ahead = self.lookahead(t);
        let mut index = vec![0usize; n];
        let mut alphas = vec![-a; n];
        let mut best: Option<CandidatePlan> = None;
        let mut n_feasible = 0;
        for _ in 0..total {
            let candidate = self.evaluate(&alphas, states, &ahead);
            if let Some(cost) = candidate.cost {
                n_feasible += 1;
                if best.as_ref().and_then(|b| b.cost).is_none_or(|b| cost < b) {
                    best = Some(candidate);
                }
            }
            // Odometer increment, last limb fastest.
            for j in (0..n).rev() {
                index[j] += 1;
                if index[j] < points_per_limb {
                    alphas[j] = value(index[j]);
                    break;
                }
                index[j] = 0;
                alphas[j] = value(0);
            }
        }
        Ok(self.decide(best, n_feasible))
    }
}
