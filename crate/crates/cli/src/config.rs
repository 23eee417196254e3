//! Scenario files.
//!
//! A scenario is a TOML document. Angles are in degrees and rates in degrees
//! per second; everything is converted to radians here and nowhere else.
//! Unknown keys are rejected. Every optional value that is filled in from a
//! default is recorded so it can be echoed back to the user.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use srl_core::body::{HumanModel, LimbModel, Vec3, STANDARD_GRAVITY};
use srl_core::planner::PlannerConfig;
use srl_core::sim::{ActivationPolicy, Scenario};
use srl_core::trajectory::disturbance_profile;
use srl_core::SimError;
use thiserror::Error;

pub const DEFAULT_MASS_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: cannot read scenario: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}:{column}: malformed scenario: {message}")]
    Syntax {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: unknown key `{key}`")]
    UnknownKey { path: PathBuf, key: String },

    #[error("{path}: invalid value for `{key}`: {reason}")]
    Invalid {
        path: PathBuf,
        key: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Deserialize)]
pub struct ScenarioFile {
    pub label: Option<String>,
    pub compensation: Option<bool>,
    pub duration_s: Option<f64>,
    pub human: Option<HumanSection>,
    pub disturbance: Option<DisturbanceSection>,
    pub planner: Option<PlannerSection>,
    pub limbs: Option<Vec<LimbSection>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct HumanSection {
    pub body_mass_kg: Option<f64>,
    pub thumb_tip_reach_m: Option<f64>,
    pub reference_point_m: Option<[f64; 3]>,
    pub gravity_mps2: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct DisturbanceSection {
    pub limb: Option<u32>,
    pub sweep_deg: Option<f64>,
    pub duration_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct PlannerSection {
    pub alpha_max_degps2: Option<f64>,
    pub deviation_limit_deg: Option<f64>,
    pub iterations: Option<usize>,
    pub control_dt_s: Option<f64>,
    pub horizon_steps: Option<usize>,
    pub activation_threshold_nm: Option<f64>,
    /// `0` turns the braking margin off.
    pub braking_fraction: Option<f64>,
    pub activation: Option<ActivationSetting>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationSetting {
    Latched,
    EveryLoop,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LimbSection {
    pub id: u32,
    pub mount_m: [f64; 3],
    pub axis: [f64; 3],
    pub zero_direction: [f64; 3],
    pub length_m: Option<f64>,
    pub mass_kg: Option<f64>,
    pub mass_fraction: Option<f64>,
    pub initial_angle_deg: Option<f64>,
    pub initial_velocity_degps: Option<f64>,
}

/// One value that came from a default rather than from the file.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedDefault {
    pub key: String,
    pub value: String,
}

impl fmt::Display for AppliedDefault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.key, self.value)
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub scenario: Scenario,
    pub defaults: Vec<AppliedDefault>,
    pub source: PathBuf,
}

impl ResolvedScenario {
    /// Lines listing every default that was filled in, one per value.
    pub fn provenance_banner(&self) -> String {
        let mut out = format!(
            "# scenario {} ({})\n",
            self.scenario.label,
            self.source.display()
        );
        if self.defaults.is_empty() {
            out.push_str("# no defaults applied\n");
        }
        for d in &self.defaults {
            out.push_str(&format!("# default {d}\n"));
        }
        out
    }
}

pub fn parse_scenario(path: &Path) -> Result<ResolvedScenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario_str(&text, path)
}

/// Parses scenario text; `origin` is only used in messages.
pub fn parse_scenario_str(text: &str, origin: &Path) -> Result<ResolvedScenario, ConfigError> {
    let syntax = |err: toml::de::Error| {
        let (line, column) = err
            .span()
            .map(|span| line_col(text, span.start))
            .unwrap_or((0, 0));
        ConfigError::Syntax {
            path: origin.to_path_buf(),
            line,
            column,
            message: err.message().to_string(),
        }
    };

    let mut unknown = Vec::new();
    let file: ScenarioFile = serde_ignored::deserialize(toml::Deserializer::new(text), |p| {
        // Option layers show up as `?` segments.
        let key: Vec<String> = p
            .to_string()
            .split('.')
            .filter(|s| *s != "?")
            .map(String::from)
            .collect();
        unknown.push(key.join("."))
    })
    .map_err(syntax)?;
    if let Some(key) = unknown.into_iter().next() {
        return Err(ConfigError::UnknownKey {
            path: origin.to_path_buf(),
            key,
        });
    }
    Resolver::new(origin).resolve(file)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

struct Resolver<'a> {
    origin: &'a Path,
    defaults: Vec<AppliedDefault>,
}

impl<'a> Resolver<'a> {
    fn new(origin: &'a Path) -> Self {
        Resolver {
            origin,
            defaults: Vec::new(),
        }
    }

    fn or_default<T: fmt::Debug>(&mut self, key: &str, value: Option<T>, default: T) -> T {
        value.unwrap_or_else(|| {
            self.defaults.push(AppliedDefault {
                key: key.to_string(),
                value: format!("{default:?}"),
            });
            default
        })
    }

    fn invalid(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            path: self.origin.to_path_buf(),
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    fn sim_error(&self, key: &str, err: SimError) -> ConfigError {
        self.invalid(key, err.to_string())
    }

    fn resolve(mut self, file: ScenarioFile) -> Result<ResolvedScenario, ConfigError> {
        let default_label = self.origin.file_stem().map_or_else(
            || "scenario".to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
        let label = self.or_default("label", file.label, default_label);
        let compensation = self.or_default("compensation", file.compensation, true);

        let human = self.human(file.human.unwrap_or_default())?;
        let (disturbance_limb, disturbance, sweep_duration) =
            self.disturbance(file.disturbance.unwrap_or_default())?;
        let duration = self.or_default("duration_s", file.duration_s, sweep_duration);
        let (planner, activation) = self.planner(file.planner.unwrap_or_default())?;

        let (limbs, initial_states) = match file.limbs {
            Some(sections) => self.limbs(sections, &human)?,
            None => {
                self.defaults.push(AppliedDefault {
                    key: "limbs".into(),
                    value: format!(
                        "four-limb lateral layout, mass fraction {DEFAULT_MASS_FRACTION}, at rest"
                    ),
                });
                let limbs = LimbModel::default_set(&human, DEFAULT_MASS_FRACTION);
                let states = vec![(0.0, 0.0); limbs.len()];
                (limbs, states)
            }
        };

        let scenario = Scenario {
            label,
            human,
            limbs,
            disturbance_limb,
            disturbance,
            initial_states,
            planner,
            activation,
            compensation_enabled: compensation,
            duration,
        };
        scenario
            .validate()
            .map_err(|e| self.sim_error("scenario", e))?;
        Ok(ResolvedScenario {
            scenario,
            defaults: self.defaults,
            source: self.origin.to_path_buf(),
        })
    }

    fn human(&mut self, h: HumanSection) -> Result<HumanModel, ConfigError> {
        let body_mass = self.or_default(
            "human.body_mass_kg",
            h.body_mass_kg,
            HumanModel::DEFAULT_BODY_MASS,
        );
        let reach = self.or_default(
            "human.thumb_tip_reach_m",
            h.thumb_tip_reach_m,
            HumanModel::DEFAULT_THUMB_TIP_REACH,
        );
        let reference = self.or_default("human.reference_point_m", h.reference_point_m, [0.0; 3]);
        let gravity = self.or_default(
            "human.gravity_mps2",
            h.gravity_mps2,
            [0.0, 0.0, -STANDARD_GRAVITY],
        );
        HumanModel::new(
            body_mass,
            reach,
            Vec3::from_array(reference),
            Vec3::from_array(gravity),
        )
        .map_err(|e| self.sim_error("human", e))
    }

    fn disturbance(
        &mut self,
        d: DisturbanceSection,
    ) -> Result<(u32, srl_core::trajectory::ConstantAccelProfile, f64), ConfigError> {
        let limb = self.or_default("disturbance.limb", d.limb, 2);
        let sweep = self.or_default("disturbance.sweep_deg", d.sweep_deg, 90.0);
        let duration = self.or_default("disturbance.duration_s", d.duration_s, 2.5);
        let profile = disturbance_profile(sweep.to_radians(), duration)
            .map_err(|e| self.sim_error("disturbance.duration_s", e))?;
        Ok((limb, profile, duration))
    }

    fn planner(
        &mut self,
        p: PlannerSection,
    ) -> Result<(PlannerConfig, ActivationPolicy), ConfigError> {
        let base = PlannerConfig::default();
        let alpha_max = self.or_default(
            "planner.alpha_max_degps2",
            p.alpha_max_degps2,
            base.alpha_max.to_degrees().round(),
        );
        let limit = self.or_default(
            "planner.deviation_limit_deg",
            p.deviation_limit_deg,
            base.deviation_limit.to_degrees().round(),
        );
        let iterations = self.or_default("planner.iterations", p.iterations, base.iterations);
        let dt = self.or_default("planner.control_dt_s", p.control_dt_s, base.control_dt);
        let horizon = self.or_default("planner.horizon_steps", p.horizon_steps, base.horizon_steps);
        let threshold = self.or_default(
            "planner.activation_threshold_nm",
            p.activation_threshold_nm,
            base.activation_threshold,
        );
        let braking = self.or_default(
            "planner.braking_fraction",
            p.braking_fraction,
            base.braking_fraction.unwrap_or(0.0),
        );
        let activation = self.or_default(
            "planner.activation",
            p.activation,
            ActivationSetting::Latched,
        );

        if braking < 0.0 {
            return Err(self.invalid("planner.braking_fraction", "must be 0 (off) or in (0, 1]"));
        }
        let config = PlannerConfig {
            alpha_max: alpha_max.to_radians(),
            deviation_limit: limit.to_radians(),
            iterations,
            control_dt: dt,
            horizon_steps: horizon,
            activation_threshold: threshold,
            braking_fraction: (braking > 0.0).then_some(braking),
            seed: 0,
        };
        config
            .validate()
            .map_err(|e| self.sim_error("planner", e))?;
        let activation = match activation {
            ActivationSetting::Latched => ActivationPolicy::Latched,
            ActivationSetting::EveryLoop => ActivationPolicy::EveryLoop,
        };
        Ok((config, activation))
    }

    #[allow(clippy::type_complexity)]
    fn limbs(
        &mut self,
        sections: Vec<LimbSection>,
        human: &HumanModel,
    ) -> Result<(Vec<LimbModel>, Vec<(f64, f64)>), ConfigError> {
        let mut limbs = Vec::with_capacity(sections.len());
        let mut states = Vec::with_capacity(sections.len());
        for s in sections {
            let key = |field: &str| format!("limbs[{}].{field}", s.id);
            let length = self.or_default(&key("length_m"), s.length_m, human.thumb_tip_reach);
            let mass = match (s.mass_kg, s.mass_fraction) {
                (Some(_), Some(_)) => {
                    return Err(
                        self.invalid(&key("mass_kg"), "give mass_kg or mass_fraction, not both")
                    )
                }
                (Some(kg), None) => kg,
                (None, fraction) => {
                    let fraction =
                        self.or_default(&key("mass_fraction"), fraction, DEFAULT_MASS_FRACTION);
                    fraction * human.body_mass
                }
            };
            let angle = self.or_default(&key("initial_angle_deg"), s.initial_angle_deg, 0.0);
            let velocity = self.or_default(
                &key("initial_velocity_degps"),
                s.initial_velocity_degps,
                0.0,
            );
            let limb = LimbModel::new(
                s.id,
                Vec3::from_array(s.mount_m),
                Vec3::from_array(s.axis),
                Vec3::from_array(s.zero_direction),
                length,
                mass,
            )
            .map_err(|e| self.sim_error(&format!("limbs[{}]", s.id), e))?;
            limbs.push(limb);
            states.push((angle.to_radians(), velocity.to_radians()));
        }
        Ok((limbs, states))
    }
}
