//! Moment model and compensation planner for a wearable multi-limb robot.
//!
//! Each robotic limb is a point mass on a revolute link fixed to the wearer's
//! trunk. The moment the limbs exert about the wearer's T10 vertebra is
//! computed from gravity and limb acceleration, and a sampling-based planner
//! adjusts the accelerations of the compensating limbs to keep that moment
//! small while they stay close to their original trajectories.

pub mod body;
pub mod dynamics;
pub mod error;
pub mod planner;
pub mod rng;
pub mod sim;
pub mod trajectory;

pub use body::{HumanModel, JointState, LimbModel, Vec3};
pub use dynamics::{total_moment, MomentSample};
pub use error::{Result, SimError};
pub use planner::{CandidatePlan, PlanDecision, PlannerConfig, PlanningProblem};
pub use sim::{compare_runs, run_scenario, RunSummary, Scenario, TimeSeries};
