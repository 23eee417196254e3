//! Fixed-step scenario runner.
//!
//! Every control period the engine asks the planner for compensating
//! accelerations (or coasts when compensation is off), advances every joint
//! in closed form, and logs the resulting moment.

use crate::body::{HumanModel, JointState, LimbModel};
use crate::dynamics::{total_moment, MomentSample};
use crate::error::{Result, SimError};
use crate::planner::{PlanDecision, PlannerConfig, PlanningProblem};
use crate::rng::planner_rng;
use crate::trajectory::{
    deviation, integrate_constant_alpha, ConstantAccelProfile, DeviationReport, ReferenceTrajectory,
};

/// Tolerance used when matching the disturbance limb's initial state.
const INITIAL_STATE_TOL: f64 = 1e-12;

/// How long the planner stays engaged once its activation check fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActivationPolicy {
    /// Re-run the activation check every control loop.
    EveryLoop,
    /// Stay engaged for the rest of the run after the first activation.
    #[default]
    Latched,
}

/// Optimizer used in each engaged control loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    #[default]
    Random,
    /// Exhaustive grid with this many points per compensating limb.
    Grid { points_per_limb: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub human: HumanModel,
    pub limbs: Vec<LimbModel>,
    pub disturbance_limb: u32,
    pub disturbance: ConstantAccelProfile,
    /// `(angle rad, velocity rad/s)` per limb, in the order of `limbs`.
    pub initial_states: Vec<(f64, f64)>,
    pub planner: PlannerConfig,
    pub activation: ActivationPolicy,
    pub compensation_enabled: bool,
    pub duration: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.limbs.is_empty() {
            return Err(SimError::invalid("scenario", "no limbs"));
        }
        for (i, limb) in self.limbs.iter().enumerate() {
            limb.validate()?;
            if self.limbs[..i].iter().any(|l| l.id == limb.id) {
                return Err(SimError::invalid(
                    "scenario",
                    format!("duplicate limb id {}", limb.id),
                ));
            }
        }
        if self.initial_states.len() != self.limbs.len() {
            return Err(SimError::LengthMismatch {
                limbs: self.limbs.len(),
                states: self.initial_states.len(),
            });
        }
        if self
            .initial_states
            .iter()
            .any(|(a, w)| !a.is_finite() || !w.is_finite())
        {
            return Err(SimError::invalid("initial states", "non-finite value"));
        }
        let Some(d) = self
            .limbs
            .iter()
            .position(|l| l.id == self.disturbance_limb)
        else {
            return Err(SimError::UnknownLimb(self.disturbance_limb));
        };
        let start = self.disturbance.eval(0.0);
        let (angle, velocity) = self.initial_states[d];
        if (start.angle - angle).abs() > INITIAL_STATE_TOL
            || (start.velocity - velocity).abs() > INITIAL_STATE_TOL
        {
            return Err(SimError::invalid(
                "initial states",
                format!(
                    "disturbance limb {} does not start on its profile",
                    self.disturbance_limb
                ),
            ));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(SimError::invalid("duration", "must be positive"));
        }
        self.planner.validate()
    }

    /// Disturbance profile for the disturbance limb, coasting for the rest.
    pub fn reference(&self) -> ReferenceTrajectory {
        ReferenceTrajectory::new(
            self.limbs
                .iter()
                .zip(&self.initial_states)
                .map(|(limb, &(angle, velocity))| {
                    let profile = if limb.id == self.disturbance_limb {
                        self.disturbance
                    } else {
                        ConstantAccelProfile::coast(angle, velocity)
                    };
                    (limb.id, profile)
                })
                .collect(),
        )
    }

    pub fn planning_problem(&self) -> Result<PlanningProblem> {
        PlanningProblem::new(
            self.limbs.clone(),
            self.human,
            self.reference(),
            self.disturbance_limb,
            self.planner,
        )
    }

    /// Number of control periods needed to cover `duration`.
    pub fn step_count(&self) -> usize {
        // The slack absorbs rounding in durations that are whole multiples of dt.
        ((self.duration / self.planner.control_dt) - 1e-9)
            .ceil()
            .max(1.0) as usize
    }

    fn time_at(&self, k: usize) -> f64 {
        (k as f64 * self.planner.control_dt).min(self.duration)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeStep {
    pub time: f64,
    pub states: Vec<JointState>,
    pub moment: MomentSample,
    /// Whether the planner was engaged for the period ending here.
    pub activated: bool,
    pub fallback: bool,
    pub n_feasible: usize,
    /// Planner cost of the decision that produced this state.
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub limb_ids: Vec<u32>,
    pub steps: Vec<TimeStep>,
}

impl TimeSeries {
    pub fn norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.moment.norm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub label: String,
    pub compensation_enabled: bool,
    pub max_norm: f64,
    pub mean_norm: f64,
    pub deviation: DeviationReport,
    pub fallback_count: usize,
    pub activated_count: usize,
    pub control_steps: usize,
}

/// Runs the scenario to completion with the random-search planner.
pub fn run_scenario(scenario: &Scenario) -> Result<(TimeSeries, RunSummary)> {
    run_scenario_with(scenario, SearchMode::Random)
}

pub fn run_scenario_with(
    scenario: &Scenario,
    mode: SearchMode,
) -> Result<(TimeSeries, RunSummary)> {
    scenario.validate()?;
    let problem = scenario.planning_problem()?;
    let reference = &problem.reference;
    let limbs = &scenario.limbs;
    let human = &scenario.human;
    let disturbance_index = limbs
        .iter()
        .position(|l| l.id == scenario.disturbance_limb)
        .expect("validated");
    let comp_ids = problem.compensating_ids();

    let mut states: Vec<JointState> = limbs
        .iter()
        .map(|l| reference.profile(l.id).map(|p| p.eval(0.0)))
        .collect::<Result<_>>()?;

    let record = |time: f64, states: &[JointState], decision: Option<&PlanDecision>| {
        total_moment(limbs, states, human, time).map(|moment| TimeStep {
            time,
            states: states.to_vec(),
            moment,
            activated: decision.is_some_and(|d| d.activated),
            fallback: decision.is_some_and(|d| d.fallback),
            n_feasible: decision.map_or(0, |d| d.n_feasible),
            cost: decision.and_then(|d| d.chosen.cost),
        })
    };

    let n_steps = scenario.step_count();
    let mut series = Vec::with_capacity(n_steps + 1);
    series.push(record(0.0, &states, None)?);

    let mut rng = planner_rng(scenario.planner.seed);
    let mut engaged = false;
    for k in 0..n_steps {
        let t = scenario.time_at(k);
        let t_next = scenario.time_at(k + 1);
        let dt = t_next - t;

        let decision = if scenario.compensation_enabled {
            let active = engaged || problem.should_activate(&states, t)?;
            let d = match (active, mode) {
                (false, _) => problem.passive_step(&states, t)?,
                (true, SearchMode::Random) => problem.search(&mut rng, &states, t)?,
                (true, SearchMode::Grid { points_per_limb }) => {
                    problem.grid_search_step(&states, t, points_per_limb)?
                }
            };
            if d.activated && scenario.activation == ActivationPolicy::Latched {
                engaged = true;
            }
            Some(d)
        } else {
            None
        };

        let mut alphas = decision.as_ref().map(|d| d.chosen.alphas.iter());
        for (i, limb) in limbs.iter().enumerate() {
            if i == disturbance_index {
                states[i] = scenario.disturbance.eval(t_next);
                continue;
            }
            let alpha = match alphas.as_mut() {
                Some(it) => *it.next().expect("one acceleration per compensating limb"),
                None => reference.profile(limb.id)?.eval(t).acceleration,
            };
            states[i] = integrate_constant_alpha(&states[i], alpha, dt);
        }
        series.push(record(t_next, &states, decision.as_ref())?);
    }

    let mut report = DeviationReport::new(scenario.planner.deviation_limit, &comp_ids);
    for step in &series {
        for (limb, state) in limbs.iter().zip(&step.states) {
            if limb.id != scenario.disturbance_limb {
                let target = reference.profile(limb.id)?.eval(step.time);
                report.record(limb.id, deviation(state, &target));
            }
        }
    }

    let norms: Vec<f64> = series.iter().map(|s| s.moment.norm).collect();
    let summary = RunSummary {
        label: scenario.label.clone(),
        compensation_enabled: scenario.compensation_enabled,
        max_norm: norms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_norm: norms.iter().sum::<f64>() / norms.len() as f64,
        deviation: report,
        fallback_count: series.iter().filter(|s| s.fallback).count(),
        activated_count: series.iter().filter(|s| s.activated).count(),
        control_steps: n_steps,
    };
    Ok((
        TimeSeries {
            limb_ids: limbs.iter().map(|l| l.id).collect(),
            steps: series,
        },
        summary,
    ))
}

/// Absolute and relative change from the uncompensated to the compensated run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionReport {
    pub max_without: f64,
    pub max_with: f64,
    pub mean_without: f64,
    pub mean_with: f64,
    pub max_reduction: f64,
    pub mean_reduction: f64,
    /// Fractions of the uncompensated values; 0 when that value is 0.
    pub max_reduction_ratio: f64,
    pub mean_reduction_ratio: f64,
}

pub fn compare_runs(with_comp: &RunSummary, without_comp: &RunSummary) -> ReductionReport {
    let ratio = |without: f64, with: f64| {
        if without == 0.0 {
            0.0
        } else {
            (without - with) / without
        }
    };
    ReductionReport {
        max_without: without_comp.max_norm,
        max_with: with_comp.max_norm,
        mean_without: without_comp.mean_norm,
        mean_with: with_comp.mean_norm,
        max_reduction: without_comp.max_norm - with_comp.max_norm,
        mean_reduction: without_comp.mean_norm - with_comp.mean_norm,
        max_reduction_ratio: ratio(without_comp.max_norm, with_comp.max_norm),
        mean_reduction_ratio: ratio(without_comp.mean_norm, with_comp.mean_norm),
    }
}

/// Builds one of the four-limb scenarios with limb 2 sweeping 90° in 2.5 s.
/// `initial` holds `(angle, velocity)` in degrees for limbs 1, 3 and 4.
pub fn standard_scenario(
    label: &str,
    initial: [(f64, f64); 3],
    compensation_enabled: bool,
    planner: PlannerConfig,
) -> Scenario {
    let human = HumanModel::default();
    let limbs = LimbModel::default_set(&human, 0.1);
    let duration = 2.5;
    let disturbance = crate::trajectory::disturbance_profile(90f64.to_radians(), duration)
        .expect("positive duration");
    let [a, b, c] = initial.map(|(t, w)| (t.to_radians(), w.to_radians()));
    Scenario {
        label: label.to_string(),
        human,
        limbs,
        disturbance_limb: 2,
        disturbance,
        initial_states: vec![a, (0.0, 0.0), b, c],
        planner,
        activation: ActivationPolicy::default(),
        compensation_enabled,
        duration,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::Vec3;

    const ZERO: [(f64, f64); 3] = [(0.0, 0.0); 3];

    fn config(seed: u64) -> PlannerConfig {
        PlannerConfig {
            seed,
            ..PlannerConfig::default()
        }
    }

    #[test]
    fn single_step_has_two_entries() {
        let mut s = standard_scenario("1-2", ZERO, false, config(0));
        s.duration = 0.01;
        let (series, summary) = run_scenario(&s).unwrap();
        assert_eq!(series.steps.len(), 2);
        assert_eq!(series.steps[1].time, 0.01);
        assert_eq!(summary.control_steps, 1);
    }

    #[test]
    fn default_run_has_250_steps() {
        let s = standard_scenario("1-2", ZERO, false, config(0));
        assert_eq!(s.step_count(), 250);
        let (series, _) = run_scenario(&s).unwrap();
        assert_eq!(series.steps.last().unwrap().time, 2.5);
        for w in series.steps.windows(2) {
            assert!(w[1].time > w[0].time);
        }
    }

    #[test]
    fn uncompensated_start_is_static_gravity_moment() {
        let mut s = standard_scenario("1-2", ZERO, false, config(0));
        // Tilt limb 1 forward so the static moment is not trivially zero.
        s.initial_states[0] = (-30f64.to_radians(), 0.0);
        let (series, _) = run_scenario(&s).unwrap();
        let mg = 8.0 * crate::body::STANDARD_GRAVITY;
        // Limbs 2-4 point sideways, limbs 3 and 4 cancel, limb 1 sits at
        // (0.8 sin 30°, 0.25 + 0.8 cos 30°, 0.25).
        let r1 = Vec3::new(0.4, 0.25 + 0.8 * 30f64.to_radians().cos(), 0.25);
        let r2 = Vec3::new(0.0, -1.05, 0.25);
        let g = Vec3::new(0.0, 0.0, -mg);
        let expected = r1.cross(g) + r2.cross(g);
        let m = series.steps[0].moment;
        assert!((m.moment - expected).norm() < 1e-9);
        assert_eq!(m.norm, m.moment.norm());

        let neutral = run_scenario(&standard_scenario("1-2", ZERO, false, config(0)))
            .unwrap()
            .0;
        assert!(neutral.steps[0].moment.norm < 1e-12);
    }

    #[test]
    fn uncompensated_limbs_stay_put() {
        let s = standard_scenario("1-2", ZERO, false, config(0));
        let (series, summary) = run_scenario(&s).unwrap();
        for step in &series.steps {
            for i in [0, 2, 3] {
                assert_eq!(step.states[i], JointState::default());
            }
        }
        assert_eq!(summary.fallback_count, 0);
        assert_eq!(summary.activated_count, 0);
        assert_eq!(summary.deviation.max(), 0.0);
    }

    #[test]
    fn disturbance_follows_closed_form() {
        let s = standard_scenario(
            "2-1",
            [(40.0, 10.0), (-70.0, -10.0), (-20.0, 20.0)],
            true,
            config(3),
        );
        let (series, _) = run_scenario(&s).unwrap();
        for step in &series.steps {
            let exact = s.disturbance.eval(step.time);
            assert!((step.states[1].angle - exact.angle).abs() <= 1e-12);
        }
        let last = series.steps.last().unwrap();
        assert!((last.states[1].angle.to_degrees() - 90.0).abs() <= 1e-9);
    }

    #[test]
    fn uncompensated_run_ignores_planner_settings() {
        let a = run_scenario(&standard_scenario("1-2", ZERO, false, config(1))).unwrap();
        let b = run_scenario(&standard_scenario(
            "1-2",
            ZERO,
            false,
            PlannerConfig {
                iterations: 7,
                ..config(99)
            },
        ))
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn replay_is_identical() {
        let s = standard_scenario("1-1", ZERO, true, config(42));
        assert_eq!(run_scenario(&s).unwrap(), run_scenario(&s).unwrap());
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let good = standard_scenario("1-1", ZERO, true, config(0));

        let mut s = good.clone();
        s.duration = 0.0;
        assert!(run_scenario(&s).is_err());

        let mut s = good.clone();
        s.disturbance_limb = 9;
        assert_eq!(run_scenario(&s).unwrap_err(), SimError::UnknownLimb(9));

        let mut s = good.clone();
        s.initial_states[1] = (0.3, 0.0);
        assert!(run_scenario(&s).is_err());

        let mut s = good.clone();
        s.initial_states.pop();
        assert!(run_scenario(&s).is_err());

        let mut s = good;
        s.limbs[2].id = 1;
        assert!(run_scenario(&s).is_err());
    }

    #[test]
    fn compare_arithmetic() {
        let (_, base) = run_scenario(&standard_scenario("1-2", ZERO, false, config(0))).unwrap();
        let same = compare_runs(&base, &base);
        assert_eq!(same.max_reduction, 0.0);
        assert_eq!(same.mean_reduction_ratio, 0.0);

        let mut without = base.clone();
        without.max_norm = 100.0;
        let mut with = base.clone();
        with.max_norm = 80.0;
        let r = compare_runs(&with, &without);
        assert!((r.max_reduction_ratio - 0.2).abs() < 1e-15);
        assert_eq!(r.max_reduction, 20.0);

        without.mean_norm = 0.0;
        assert_eq!(compare_runs(&with, &without).mean_reduction_ratio, 0.0);
    }
}
