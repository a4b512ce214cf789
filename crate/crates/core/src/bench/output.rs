//! CSV, JSON and SVG artifacts of a suite run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::suite::{ProfileRow, SuiteConfig};
use super::{Measure, RunRecord, TauMode};
use crate::error::{DfolsError, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// `problem,seed,eval_index,f_true,f_noisy`, one row per kept evaluation.
pub fn records_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("problem,seed,eval_index,f_true,f_noisy\n");
    for r in records {
        for p in &r.trace {
            let _ = writeln!(out, "{},{},{},{},{}", r.problem, r.seed, p.eval_index, fmt_f64(p.f_true), fmt_f64(p.f_noisy));
        }
    }
    out
}

/// `alpha,proportion,measure,tau_mode`.
pub fn profiles_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from("alpha,proportion,measure,tau_mode\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.alpha),
            fmt_f64(r.proportion),
            r.measure.as_str(),
            r.tau_mode.as_str()
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub problem: String,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalProportion {
    pub measure: Measure,
    pub tau_mode: TauMode,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: SuiteConfig,
    pub records: usize,
    pub total_evaluations: usize,
    pub failures: Vec<Failure>,
    pub exit_flags: BTreeMap<String, usize>,
    /// Proportion solved at the largest `alpha`.
    pub final_proportions: Vec<FinalProportion>,
    pub cauchy_checks: usize,
    pub cauchy_violations: usize,
    pub cauchy_worst_shortfall: f64,
}

pub fn summary(config: &SuiteConfig, records: &[RunRecord], rows: &[ProfileRow]) -> Summary {
    let mut exit_flags = BTreeMap::new();
    for r in records {
        let key = r.exit_flag.map_or("error", |f| f.as_str()).to_string();
        *exit_flags.entry(key).or_insert(0) += 1;
    }
    let mut final_proportions: Vec<FinalProportion> = Vec::new();
    for r in rows {
        match final_proportions.iter_mut().find(|f| f.measure == r.measure && f.tau_mode == r.tau_mode) {
            Some(f) => f.proportion = r.proportion,
            None => final_proportions.push(FinalProportion {
                measure: r.measure,
                tau_mode: r.tau_mode,
                proportion: r.proportion,
            }),
        }
    }
    let checked: Vec<&RunRecord> = records.iter().filter(|r| r.cauchy.checks > 0).collect();
    Summary {
        config: config.clone(),
        records: records.len(),
        total_evaluations: records.iter().map(|r| r.n_evals).sum(),
        failures: records
            .iter()
            .filter_map(|r| {
                r.error.as_ref().map(|e| Failure { problem: r.problem.clone(), seed: r.seed, error: e.clone() })
            })
            .collect(),
        exit_flags,
        final_proportions,
        cauchy_checks: records.iter().map(|r| r.cauchy.checks).sum(),
        cauchy_violations: records.iter().map(|r| r.cauchy.violations).sum(),
        cauchy_worst_shortfall: checked.iter().map(|r| r.cauchy.worst_shortfall).fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Line chart of the profiles against `log10 alpha`.
pub fn profiles_svg(rows: &[ProfileRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    type Curve = ((Measure, TauMode), Vec<(f64, f64)>);
    let mut curves: Vec<Curve> = Vec::new();
    for r in rows {
        let key = (r.measure, r.tau_mode);
        match curves.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((r.alpha, r.proportion)),
            None => curves.push((key, vec![(r.alpha, r.proportion)])),
        }
    }
    let xs: Vec<f64> = rows.iter().filter(|r| r.alpha > 0.0).map(|r| r.alpha.log10()).collect();
    let (x_lo, x_hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (x_lo, x_hi) = if x_lo < x_hi { (x_lo, x_hi) } else { (x_lo - 1.0, x_lo + 1.0) };
    let sx = |a: f64| PAD + (a.log10() - x_lo) / (x_hi - x_lo) * (W - 2.0 * PAD);
    let sy = |p: f64| H - PAD - p * (H - 2.0 * PAD);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD} {} H{} M{PAD} {} V{PAD}" stroke="black" fill="none"/>"#,
        H - PAD,
        W - PAD,
        H - PAD
    );
    for k in 0..=4 {
        let p = k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" font-size="11" text-anchor="end">{p:.2}</text>"#,
            PAD - 5.0,
            sy(p) + 4.0
        );
    }
    let mut decade = x_lo.ceil() as i32;
    while f64::from(decade) <= x_hi {
        let x = sx(10f64.powi(decade));
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{}" font-size="11" text-anchor="middle">1e{decade}</text>"#,
            H - PAD + 16.0
        );
        decade += 1;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">budget / (n+1)</text>"#,
        W / 2.0,
        H - 10.0
    );
    for (i, ((measure, mode), pts)) in curves.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let mut d = String::new();
        for (j, &(a, p)) in pts.iter().filter(|(a, _)| *a > 0.0).enumerate() {
            let _ = write!(d, "{}{:.2} {:.2} ", if j == 0 { "M" } else { "L" }, sx(a), sy(p));
        }
        let _ = writeln!(svg, r#"<path d="{}" stroke="{colour}" stroke-width="1.5" fill="none"/>"#, d.trim_end());
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{colour}">{} / {}</text>"#,
            PAD + 10.0,
            PAD + 15.0 * (i as f64 + 1.0),
            measure.as_str(),
            mode.as_str()
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `records.csv`, `profiles.csv`, `summary.json` and optionally
/// `profiles.svg` into `dir`.
pub fn write_artifacts(
    dir: &Path,
    config: &SuiteConfig,
    records: &[RunRecord],
    rows: &[ProfileRow],
    svg: bool,
) -> Result<Summary> {
    let io = |e: std::io::Error| DfolsError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join("records.csv"), records_csv(records)).map_err(io)?;
    fs::write(dir.join("profiles.csv"), profiles_csv(rows)).map_err(io)?;
    let s = summary(config, records, rows);
    let json = serde_json::to_string_pretty(&s).map_err(|e| DfolsError::Io(e.to_string()))?;
    fs::write(dir.join("summary.json"), json + "\n").map_err(io)?;
    if svg {
        fs::write(dir.join("profiles.svg"), profiles_svg(rows)).map_err(io)?;
    }
    Ok(s)
}
