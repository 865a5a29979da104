//! Report emission: fit-index tables, trajectory curve samples, ABT tables,
//! and distribution histograms as plot-ready CSV.
//!
//! Human-facing tables round to 6 significant digits; every table with
//! rounding gets a `_raw` twin carrying full `f64` precision. All files go
//! through `io::atomic_write`.

use std::path::{Path, PathBuf};

use crate::abt::{pairwise_distributions, AbtDistribution, AbtResult};
use crate::data::TimeGrid;
use crate::error::Result;
use crate::gbtm::FittedModel;
use crate::io::atomic_write;
use crate::selection::{ScanOutcome, ScanResult};

/// Sample count for plotted trajectory curves.
pub const CURVE_SAMPLES: usize = 200;

/// Format with 6 significant digits, `%.6g` style: decimal notation for
/// moderate exponents, scientific otherwise, trailing zeros stripped.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (_, exp) = sci.split_once('e').expect("{:e} always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-4..6).contains(&exp) {
        let (mantissa, _) = sci.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{}e{}", mantissa, exp);
    }
    let decimals = (5 - exp).max(0) as usize;
    let plain = format!("{:.*}", decimals, x);
    if plain.contains('.') {
        plain
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        plain
    }
}

/// Full-precision decimal (shortest representation that round-trips).
fn fmt_raw(x: f64) -> String {
    format!("{}", x)
}

/// User-facing label for an unordered pair of 0-based group indices.
fn pair_label(a: usize, b: usize) -> String {
    format!("{}-{}", a + 1, b + 1)
}

/// Largest fitted K in the scan (for the ragged APPA columns).
fn max_fitted_k(scan: &ScanResult) -> usize {
    scan.diagnostics().map(|d| d.k).max().unwrap_or(0)
}

fn scan_table(scan: &ScanResult, with_params: bool, fmt: &dyn Fn(f64) -> String) -> Vec<u8> {
    let k_cols = max_fitted_k(scan);
    let mut header = vec!["K".to_string()];
    if with_params {
        header.push("n_params".to_string());
    }
    header.extend(
        ["smallest_group_pct", "bic", "sabic", "appa_model"]
            .iter()
            .map(|s| s.to_string()),
    );
    for g in 1..=k_cols {
        header.push(format!("appa_g{}", g));
    }
    header.push("excluded".to_string());

    let mut out = header.join(",");
    out.push('\n');
    for row in &scan.rows {
        let mut cells = vec![row.k.to_string()];
        match &row.outcome {
            ScanOutcome::Fitted { diagnostics, .. } => {
                if with_params {
                    cells.push(diagnostics.n_params.to_string());
                }
                cells.push(fmt(diagnostics.smallest_group_pct));
                cells.push(fmt(diagnostics.bic));
                cells.push(fmt(diagnostics.sabic));
                cells.push(fmt(diagnostics.appa_model));
                for g in 0..k_cols {
                    cells.push(
                        diagnostics
                            .appa_per_group
                            .get(g)
                            .map_or(String::new(), |&v| fmt(v)),
                    );
                }
                cells.push(diagnostics.excluded_by_size_rule.to_string());
            }
            ScanOutcome::Failed { .. } => {
                let blanks = if with_params { 5 } else { 4 } + k_cols;
                cells.extend(std::iter::repeat_n(String::new(), blanks));
                cells.push("failed".to_string());
            }
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

/// `scan.csv`: K, smallest_group_pct, bic, sabic, appa_model, appa_g1..gK
/// (ragged columns padded empty), excluded. Failed fits keep their K with
/// `failed` in the excluded column. Full precision.
pub fn scan_csv(scan: &ScanResult) -> Vec<u8> {
    scan_table(scan, false, &fmt_raw)
}

/// Fit-indices table: scan columns plus n_params, formatted to
/// 6 significant digits.
pub fn fit_indices_csv(scan: &ScanResult) -> Vec<u8> {
    scan_table(scan, true, &fmt_sig6)
}

/// Full-precision twin of `fit_indices_csv`.
pub fn fit_indices_raw_csv(scan: &ScanResult) -> Vec<u8> {
    scan_table(scan, true, &fmt_raw)
}

/// Curve samples for one model: `group,t,value` with `CURVE_SAMPLES` evenly
/// spaced times per group across the grid span.
pub fn curves_csv(model: &FittedModel) -> Vec<u8> {
    let times = model.grid.times();
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let span = t1 - t0;
    let mut out = String::from("group,t,value\n");
    for g in 0..model.k {
        for j in 0..CURVE_SAMPLES {
            let t = t0 + span * (j as f64 / (CURVE_SAMPLES - 1) as f64);
            out.push_str(&format!(
                "{},{},{}\n",
                g + 1,
                fmt_raw(t),
                fmt_raw(model.curve_value(g, t))
            ));
        }
    }
    out.into_bytes()
}

/// Single ABT table: `interval_start,interval_end,area` plus a final
/// `total` row.
pub fn abt_csv(result: &AbtResult, grid: &TimeGrid) -> Vec<u8> {
    let mut out = String::from("interval_start,interval_end,area\n");
    for (i, area) in result.interval_areas.iter().enumerate() {
        let (t0, t1) = grid.interval(i);
        out.push_str(&format!("{},{},{}\n", fmt_raw(t0), fmt_raw(t1), fmt_raw(*area)));
    }
    out.push_str(&format!("total,,{}\n", fmt_raw(result.total)));
    out.into_bytes()
}

/// Long-form pairwise interval areas: `pair,interval_index,area`
/// (1-based interval indices).
pub fn dist_csv(dist: &AbtDistribution) -> Vec<u8> {
    let mut out = String::from("pair,interval_index,area\n");
    for ((a, b), areas) in dist.pairs.iter().zip(&dist.values) {
        for (i, area) in areas.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", pair_label(*a, *b), i + 1, fmt_raw(*area)));
        }
    }
    out.into_bytes()
}

/// Per-pair distribution summary: `pair,mean,sd,min,max`.
pub fn dist_summary_csv(dist: &AbtDistribution) -> Vec<u8> {
    let mut out = String::from("pair,mean,sd,min,max\n");
    for ((a, b), s) in dist.pairs.iter().zip(&dist.summaries) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            pair_label(*a, *b),
            fmt_raw(s.mean),
            fmt_raw(s.sd),
            fmt_raw(s.min),
            fmt_raw(s.max)
        ));
    }
    out.into_bytes()
}

/// Interval areas of the selected model with interval endpoints:
/// `pair,interval_index,interval_start,interval_end,area`.
pub fn abt_intervals_csv(dist: &AbtDistribution, grid: &TimeGrid) -> Vec<u8> {
    let mut out = String::from("pair,interval_index,interval_start,interval_end,area\n");
    for ((a, b), areas) in dist.pairs.iter().zip(&dist.values) {
        for (i, area) in areas.iter().enumerate() {
            let (t0, t1) = grid.interval(i);
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                pair_label(*a, *b),
                i + 1,
                fmt_raw(t0),
                fmt_raw(t1),
                fmt_raw(*area)
            ));
        }
    }
    out.into_bytes()
}

/// Pair summaries plus totals: `pair,mean,sd,min,max,total`.
pub fn abt_pairs_csv(dist: &AbtDistribution) -> Vec<u8> {
    let mut out = String::from("pair,mean,sd,min,max,total\n");
    for (((a, b), s), areas) in dist.pairs.iter().zip(&dist.summaries).zip(&dist.values) {
        let total: f64 = areas.iter().sum();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            pair_label(*a, *b),
            fmt_raw(s.mean),
            fmt_raw(s.sd),
            fmt_raw(s.min),
            fmt_raw(s.max),
            fmt_raw(total)
        ));
    }
    out.into_bytes()
}

/// Shared-bin histogram: `pair,bin_index,bin_lo,bin_hi,count`
/// (1-based bins).
pub fn abt_histogram_csv(dist: &AbtDistribution) -> Vec<u8> {
    let mut out = String::from("pair,bin_index,bin_lo,bin_hi,count\n");
    for ((a, b), counts) in dist.pairs.iter().zip(&dist.counts) {
        for (i, count) in counts.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                pair_label(*a, *b),
                i + 1,
                fmt_raw(dist.bin_edges[i]),
                fmt_raw(dist.bin_edges[i + 1]),
                count
            ));
        }
    }
    out.into_bytes()
}

/// Everything `write_report` produced.
pub struct ReportBundle {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Emit the full report bundle into `dir`: fit-indices tables, per-model
/// curve samples, and — for the lowest-BIC candidate — ABT interval,
/// summary, and histogram tables. With an empty candidate set the tables
/// still appear and a warning is returned instead of ABT output.
pub fn write_report(dir: &Path, scan: &ScanResult, n_segments: usize) -> Result<ReportBundle> {
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    let emit = |name: &str, bytes: Vec<u8>, files: &mut Vec<PathBuf>| -> Result<()> {
        let path = dir.join(name);
        atomic_write(&path, &bytes)?;
        files.push(path);
        Ok(())
    };

    emit("fit_indices.csv", fit_indices_csv(scan), &mut files)?;
    emit("fit_indices_raw.csv", fit_indices_raw_csv(scan), &mut files)?;

    for row in &scan.rows {
        if let ScanOutcome::Fitted { model, .. } = &row.outcome {
            emit(&format!("curves_K{}.csv", row.k), curves_csv(model), &mut files)?;
        }
    }

    match scan.recommended_by_bic.and_then(|k| scan.model_for(k)) {
        Some((model, _)) if model.k >= 2 => {
            let dist = pairwise_distributions(model, n_segments)?;
            emit(
                "abt_intervals.csv",
                abt_intervals_csv(&dist, &model.grid),
                &mut files,
            )?;
            emit("abt_pairs.csv", abt_pairs_csv(&dist), &mut files)?;
            emit("abt_histogram.csv", abt_histogram_csv(&dist), &mut files)?;
        }
        Some(_) => warnings.push("selected model has a single group; no ABT tables".to_string()),
        None => warnings.push(
            "empty candidate set: every scanned K was excluded or failed; no ABT tables".to_string(),
        ),
    }

    Ok(ReportBundle { files, warnings })
}
