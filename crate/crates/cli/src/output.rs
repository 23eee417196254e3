//! CSV time series and plain-text summaries.

use std::fmt::Write as _;
use std::io::{Read, Write};

use srl_core::body::STANDARD_GRAVITY;
use srl_core::sim::{ReductionReport, RunSummary, TimeSeries};

/// Column names for a run with the given limb ids.
pub fn csv_header(limb_ids: &[u32]) -> String {
    let mut cols = vec!["t_s".to_string()];
    cols.extend(limb_ids.iter().map(|id| format!("theta{id}_deg")));
    cols.extend(limb_ids.iter().map(|id| format!("omega{id}_degs")));
    cols.extend(
        [
            "Mx_Nm",
            "My_Nm",
            "Mz_Nm",
            "Mnorm_Nm",
            "activated",
            "fallback",
        ]
        .map(String::from),
    );
    cols.join(",")
}

/// 15 significant digits.
fn num(v: f64) -> String {
    format!("{v:.14e}")
}

pub fn write_csv<W: Write>(out: W, series: &TimeSeries) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(&series.limb_ids).split(','))?;
    for step in &series.steps {
        let m = step.moment.moment;
        let record = std::iter::once(step.time)
            .chain(step.states.iter().map(|s| s.angle.to_degrees()))
            .chain(step.states.iter().map(|s| s.velocity.to_degrees()))
            .chain([m.x, m.y, m.z, step.moment.norm])
            .map(num)
            .chain([flag(step.activated), flag(step.fallback)]);
        w.write_record(record)?;
    }
    w.flush()?;
    Ok(())
}

fn flag(v: bool) -> String {
    u8::from(v).to_string()
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub time: f64,
    pub theta_deg: Vec<f64>,
    pub omega_deg: Vec<f64>,
    pub moment: [f64; 3],
    pub norm: f64,
    pub activated: bool,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub limb_ids: Vec<u32>,
    pub rows: Vec<CsvRow>,
}

/// Reads back a file produced by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<CsvTable, String> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(String::from)
        .collect();
    let limb_ids: Vec<u32> = header
        .iter()
        .filter_map(|c| c.strip_prefix("theta")?.strip_suffix("_deg")?.parse().ok())
        .collect();
    if header.is_empty() || header.join(",") != csv_header(&limb_ids) {
        return Err(format!("unexpected header `{}`", header.join(",")));
    }
    let n = limb_ids.len();
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let f = |k: usize| -> Result<f64, String> {
            record[k].parse().map_err(|e| format!("row {}: {e}", i + 1))
        };
        let flag = |k: usize| -> Result<bool, String> {
            match &record[k] {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(format!("row {}: bad flag `{other}`", i + 1)),
            }
        };
        rows.push(CsvRow {
            time: f(0)?,
            theta_deg: (1..=n).map(f).collect::<Result<_, _>>()?,
            omega_deg: (n + 1..=2 * n).map(f).collect::<Result<_, _>>()?,
            moment: [f(2 * n + 1)?, f(2 * n + 2)?, f(2 * n + 3)?],
            norm: f(2 * n + 4)?,
            activated: flag(2 * n + 5)?,
            fallback: flag(2 * n + 6)?,
        });
    }
    Ok(CsvTable { limb_ids, rows })
}

/// Moment norm as a percentage of body weight times one metre. This is the
/// tool's own normalization; N·m values are authoritative.
pub fn norm_pct_bm(norm: f64, body_mass: f64) -> f64 {
    100.0 * norm / (body_mass * STANDARD_GRAVITY * 1.0)
}

pub fn summary_block(summary: &RunSummary, body_mass: f64, seed: u64) -> String {
    let mut s = String::new();
    let comp = if summary.compensation_enabled {
        "on"
    } else {
        "off"
    };
    let _ = writeln!(
        s,
        "scenario {} (compensation {comp}, seed {seed})",
        summary.label
    );
    let _ = writeln!(s, "  control steps      {}", summary.control_steps);
    let _ = writeln!(
        s,
        "  max |M|            {:.6} N·m ({:.4} %BM)",
        summary.max_norm,
        norm_pct_bm(summary.max_norm, body_mass)
    );
    let _ = writeln!(
        s,
        "  mean |M|           {:.6} N·m ({:.4} %BM)",
        summary.mean_norm,
        norm_pct_bm(summary.mean_norm, body_mass)
    );
    let dev = &summary.deviation;
    let _ = writeln!(
        s,
        "  deviation max      {:.6}° (limit {:.6}°, {})",
        dev.max().to_degrees(),
        dev.limit.to_degrees(),
        if dev.violated { "VIOLATED" } else { "ok" }
    );
    for (id, d) in &dev.per_limb {
        let _ = writeln!(s, "    limb {id}           {:.6}°", d.to_degrees());
    }
    let _ = writeln!(s, "  activated steps    {}", summary.activated_count);
    let _ = writeln!(s, "  fallback steps     {}", summary.fallback_count);
    let _ = writeln!(
        s,
        "  %BM = 100·|M|/(body_mass·9.80665·1 m), a normalization convention of this tool"
    );
    s
}

pub fn reduction_block(label: &str, r: &ReductionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "reduction for {label}");
    let _ = writeln!(
        s,
        "  max  |M|  without {:.6}  with {:.6}  reduction {:.6} N·m ({:.3} %)",
        r.max_without,
        r.max_with,
        r.max_reduction,
        100.0 * r.max_reduction_ratio
    );
    let _ = writeln!(
        s,
        "  mean |M|  without {:.6}  with {:.6}  reduction {:.6} N·m ({:.3} %)",
        r.mean_without,
        r.mean_with,
        r.mean_reduction,
        100.0 * r.mean_reduction_ratio
    );
    let verdict = if r.mean_reduction > 0.0 { ">" } else { "<=" };
    let _ = writeln!(s, "  mean reduction {verdict} 0");
    s
}
