//! Subcommand bodies. Each returns the text meant for standard output so the
//! binary stays a thin wrapper.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use srl_core::sim::{compare_runs, run_scenario_with, RunSummary, SearchMode, TimeSeries};

use crate::config::{parse_scenario, parse_scenario_str, ResolvedScenario};
use crate::output::{reduction_block, summary_block, write_csv};

/// Scenario files shipped with the tool, in report order.
pub const BUNDLED: [(&str, &str); 5] = [
    ("case_1_1", include_str!("../scenarios/case_1_1.toml")),
    ("case_1_2", include_str!("../scenarios/case_1_2.toml")),
    ("case_2_1", include_str!("../scenarios/case_2_1.toml")),
    ("case_2_2", include_str!("../scenarios/case_2_2.toml")),
    (
        "oracle_1limb",
        include_str!("../scenarios/oracle_1limb.toml"),
    ),
];

pub fn bundled(name: &str) -> Result<ResolvedScenario> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .with_context(|| format!("no bundled scenario named `{name}`"))?;
    Ok(parse_scenario_str(
        text,
        Path::new(&format!("<bundled>/{name}.toml")),
    )?)
}

fn load(path: &Path, seed: u64) -> Result<ResolvedScenario> {
    let mut resolved = parse_scenario(path)?;
    resolved.scenario.planner.seed = seed;
    Ok(resolved)
}

fn save_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    write_csv(BufWriter::new(file), series)
        .with_context(|| format!("cannot write {}", path.display()))
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
    pub seed: u64,
    pub out: PathBuf,
    pub no_compensation: bool,
    pub oracle: Option<usize>,
}

pub fn cmd_run(args: &RunArgs) -> Result<String> {
    let mut resolved = load(&args.config, args.seed)?;
    if args.no_compensation {
        resolved.scenario.compensation_enabled = false;
    }
    let mode = match args.oracle {
        Some(points_per_limb) => SearchMode::Grid { points_per_limb },
        None => SearchMode::Random,
    };
    let (series, summary) = run_scenario_with(&resolved.scenario, mode)?;
    save_csv(&args.out, &series)?;
    Ok(format!(
        "{}{}",
        resolved.provenance_banner(),
        summary_block(&summary, resolved.scenario.human.body_mass, args.seed)
    ))
}

/// Runs a scenario with and without compensation.
fn compare_pair(resolved: &ResolvedScenario) -> Result<(RunSummary, RunSummary)> {
    let mut with = resolved.scenario.clone();
    with.compensation_enabled = true;
    let mut without = resolved.scenario.clone();
    without.compensation_enabled = false;
    let (_, with) = run_scenario_with(&with, SearchMode::Random)?;
    let (_, without) = run_scenario_with(&without, SearchMode::Random)?;
    Ok((with, without))
}

fn compare_report(resolved: &ResolvedScenario, with: &RunSummary, without: &RunSummary) -> String {
    let s = &resolved.scenario;
    let mass = s.human.body_mass;
    format!(
        "{}{}{}",
        summary_block(with, mass, s.planner.seed),
        summary_block(without, mass, s.planner.seed),
        reduction_block(&s.label, &compare_runs(with, without))
    )
}

pub fn cmd_compare(config: &Path, seed: u64) -> Result<String> {
    let resolved = load(config, seed)?;
    let (with, without) = compare_pair(&resolved)?;
    Ok(format!(
        "{}{}",
        resolved.provenance_banner(),
        compare_report(&resolved, &with, &without)
    ))
}

/// Runs the four bundled cases concurrently, optionally saving each CSV as
/// `<out_dir>/<case>.csv`, and reports the two pairs in case order.
pub fn cmd_compare_all(seed: u64, out_dir: Option<&Path>) -> Result<String> {
    let cases: Vec<ResolvedScenario> = BUNDLED[..4]
        .iter()
        .map(|(name, _)| {
            let mut r = bundled(name)?;
            r.scenario.planner.seed = seed;
            Ok(r)
        })
        .collect::<Result<_>>()?;

    let runs: Vec<Result<(TimeSeries, RunSummary)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cases
            .iter()
            .map(|r| scope.spawn(|| run_scenario_with(&r.scenario, SearchMode::Random)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .expect("scenario thread panicked")
                    .map_err(Into::into)
            })
            .collect()
    });
    let runs: Vec<(TimeSeries, RunSummary)> = runs.into_iter().collect::<Result<_>>()?;

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for ((name, _), (series, _)) in BUNDLED.iter().zip(&runs) {
            save_csv(&dir.join(format!("{name}.csv")), series)?;
        }
    }

    let mut text = String::new();
    for pair in [0, 2] {
        let (with, without) = (&runs[pair].1, &runs[pair + 1].1);
        text.push_str(&compare_report(&cases[pair], with, without));
    }
    Ok(text)
}

#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub report: String,
    pub worst_gap: f64,
    pub passed: bool,
}

pub const ORACLE_TOLERANCE: f64 = 0.02;

/// Runs the bundled one-limb scenario for each seed and, every `stride`
/// engaged steps, re-solves the same state on a dense grid. The gap is
/// `(random − grid) / grid`; it passes when no gap exceeds 2 %.
pub fn cmd_oracle_check(seeds: &[u64], grid_points: usize, stride: usize) -> Result<OracleCheck> {
    anyhow::ensure!(stride > 0, "stride must be positive");
    let base = bundled("oracle_1limb")?;
    let problem = base.scenario.planning_problem()?;
    let mut report = format!(
        "oracle check: {} random candidates vs {grid_points}-point grid\n",
        base.scenario.planner.iterations
    );
    let mut worst = f64::NEG_INFINITY;
    for &seed in seeds {
        let mut scenario = base.scenario.clone();
        scenario.planner.seed = seed;
        let (series, _) = run_scenario_with(&scenario, SearchMode::Random)?;
        let mut seed_worst = f64::NEG_INFINITY;
        let mut checked = 0;
        for k in (0..series.steps.len() - 1).step_by(stride) {
            let (before, after) = (&series.steps[k], &series.steps[k + 1]);
            if !after.activated {
                continue;
            }
            let grid = problem.grid_search_step(&before.states, before.time, grid_points)?;
            let gap = match (after.cost, grid.chosen.cost) {
                (Some(r), Some(g)) => (r - g) / g,
                (None, None) => 0.0,
                (None, Some(_)) => f64::INFINITY,
                (Some(_), None) => f64::NEG_INFINITY,
            };
            seed_worst = seed_worst.max(gap);
            checked += 1;
        }
        anyhow::ensure!(checked > 0, "seed {seed}: planner never engaged");
        report.push_str(&format!(
            "  seed {seed:>3}: {checked} steps, worst gap {:+.4} %\n",
            100.0 * seed_worst
        ));
        worst = worst.max(seed_worst);
    }
    let passed = worst <= ORACLE_TOLERANCE;
    report.push_str(&format!(
        "worst gap {:+.4} % (tolerance {:.1} %): {}\n",
        100.0 * worst,
        100.0 * ORACLE_TOLERANCE,
        if passed { "PASS" } else { "FAIL" }
    ));
    Ok(OracleCheck {
        report,
        worst_gap: worst,
        passed,
    })
}
