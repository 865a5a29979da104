//! Areas between trajectories (ABT).
//!
//! The ABT between two curves over an interval is the integral of their
//! absolute vertical gap, approximated by the composite trapezoid rule with
//! a fixed number of equal-width segments per grid interval. Curves are
//! either fitted group polynomials or piecewise-linear individual paths.

use crate::data::LongitudinalDataset;
use crate::error::{Error, Result};
use crate::gbtm::FittedModel;

/// Segments per grid interval used throughout unless overridden
/// (1000 segments = 1001 node evaluations).
pub const DEFAULT_SEGMENTS: usize = 1000;

/// What a computed area refers to. Group indices are 0-based here;
/// user-facing output adds 1.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveRef {
    Group { index: usize },
    Individual { id: String },
}

/// Interval-wise and total area between two curves.
#[derive(Debug, Clone, PartialEq)]
pub struct AbtResult {
    pub curve_a: CurveRef,
    pub curve_b: CurveRef,
    /// One area per consecutive grid interval.
    pub interval_areas: Vec<f64>,
    /// Sum of the interval areas.
    pub total: f64,
    pub segments_per_interval: usize,
}

/// Per-pair summary of interval areas.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSummary {
    pub mean: f64,
    /// Sample standard deviation (0 when fewer than two intervals).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

/// Interval-area distributions across all unordered group pairs, with a
/// shared-bin histogram for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct AbtDistribution {
    /// Unordered pairs (a, b) with a < b, lexicographic, 0-based.
    pub pairs: Vec<(usize, usize)>,
    /// Per pair, its interval areas.
    pub values: Vec<Vec<f64>>,
    pub summaries: Vec<PairSummary>,
    /// Shared equal-width bin edges spanning [0, max interval area].
    pub bin_edges: Vec<f64>,
    /// Per pair, counts per bin (each row sums to the interval count).
    pub counts: Vec<Vec<usize>>,
}

/// Composite trapezoid approximation of the absolute gap integral
/// `int |f_a - f_b| dt` over `[t0, t1]` with `n_segments` equal segments.
///
/// Nodes are `t0 + span * (j / n_segments)`, so dyadic node fractions (and
/// the endpoints) are hit exactly.
pub fn trapezoid_area<FA, FB>(
    f_a: FA,
    f_b: FB,
    t0: f64,
    t1: f64,
    n_segments: usize,
) -> Result<f64>
where
    FA: Fn(f64) -> f64,
    FB: Fn(f64) -> f64,
{
    if n_segments == 0 {
        return Err(Error::InvalidQuadrature("need at least one segment".into()));
    }
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidQuadrature(format!(
            "bad interval [{}, {}]",
            t0, t1
        )));
    }
    let span = t1 - t0;
    let h = span / n_segments as f64;
    let mut sum = 0.0;
    for j in 0..=n_segments {
        let t = t0 + span * (j as f64 / n_segments as f64);
        let gap = (f_a(t) - f_b(t)).abs();
        if !gap.is_finite() {
            return Err(Error::NonFiniteCurve { t });
        }
        sum += if j == 0 || j == n_segments {
            0.5 * gap
        } else {
            gap
        };
    }
    Ok(sum * h)
}

fn check_group(model: &FittedModel, g: usize) -> Result<()> {
    if g >= model.k {
        return Err(Error::GroupIndexOutOfRange {
            index: g + 1,
            k: model.k,
        });
    }
    Ok(())
}

/// ABT between two fitted group curves (0-based indices), one trapezoid per
/// grid interval. Comparing a group with itself is allowed and yields zero.
pub fn group_pair_abt(
    model: &FittedModel,
    g_a: usize,
    g_b: usize,
    n_segments: usize,
) -> Result<AbtResult> {
    check_group(model, g_a)?;
    check_group(model, g_b)?;
    let f_a = |t: f64| model.curve_value(g_a, t);
    let f_b = |t: f64| model.curve_value(g_b, t);
    let mut interval_areas = Vec::with_capacity(model.grid.n_intervals());
    for i in 0..model.grid.n_intervals() {
        let (t0, t1) = model.grid.interval(i);
        interval_areas.push(trapezoid_area(f_a, f_b, t0, t1, n_segments)?);
    }
    let total = interval_areas.iter().sum();
    Ok(AbtResult {
        curve_a: CurveRef::Group { index: g_a },
        curve_b: CurveRef::Group { index: g_b },
        interval_areas,
        total,
        segments_per_interval: n_segments,
    })
}

/// ABT between one individual's piecewise-linear observed path and a fitted
/// group curve.
pub fn individual_to_group_abt(
    data: &LongitudinalDataset,
    id: &str,
    model: &FittedModel,
    g: usize,
    n_segments: usize,
) -> Result<AbtResult> {
    if model.grid != *data.grid() {
        return Err(Error::GridMismatch);
    }
    check_group(model, g)?;
    let trajectory = data.trajectory(id)?;
    let f_a = |t: f64| trajectory.eval(t);
    let f_b = |t: f64| model.curve_value(g, t);
    let mut interval_areas = Vec::with_capacity(model.grid.n_intervals());
    for i in 0..model.grid.n_intervals() {
        let (t0, t1) = model.grid.interval(i);
        interval_areas.push(trapezoid_area(&f_a, &f_b, t0, t1, n_segments)?);
    }
    let total = interval_areas.iter().sum();
    Ok(AbtResult {
        curve_a: CurveRef::Individual {
            id: trajectory.id.clone(),
        },
        curve_b: CurveRef::Group { index: g },
        interval_areas,
        total,
        segments_per_interval: n_segments,
    })
}

/// Interval-area distributions for every unordered group pair, plus a
/// histogram over shared equal-width bins spanning [0, global max] with
/// `max(10, ceil(sqrt(value count)))` bins.
pub fn pairwise_distributions(model: &FittedModel, n_segments: usize) -> Result<AbtDistribution> {
    if model.k < 2 {
        return Err(Error::InvalidConfig(
            "pairwise distributions need K >= 2".into(),
        ));
    }
    let mut pairs = Vec::new();
    let mut values = Vec::new();
    for a in 0..model.k {
        for b in (a + 1)..model.k {
            pairs.push((a, b));
            values.push(group_pair_abt(model, a, b, n_segments)?.interval_areas);
        }
    }

    let summaries = values
        .iter()
        .map(|areas| {
            let n = areas.len() as f64;
            let mean = areas.iter().sum::<f64>() / n;
            let sd = if areas.len() < 2 {
                0.0
            } else {
                (areas.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            let min = areas.iter().copied().fold(f64::INFINITY, f64::min);
            let max = areas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            PairSummary { mean, sd, min, max }
        })
        .collect();

    let value_count: usize = values.iter().map(Vec::len).sum();
    let n_bins = ((value_count as f64).sqrt().ceil() as usize).max(10);
    let global_max = values
        .iter()
        .flatten()
        .copied()
        .fold(0.0_f64, f64::max);
    let bin_edges: Vec<f64> = (0..=n_bins)
        .map(|j| global_max * j as f64 / n_bins as f64)
        .collect();
    let width = global_max / n_bins as f64;
    let counts = values
        .iter()
        .map(|areas| {
            let mut row = vec![0usize; n_bins];
            for &v in areas {
                let idx = if width > 0.0 {
                    ((v / width) as usize).min(n_bins - 1)
                } else {
                    0
                };
                row[idx] += 1;
            }
            row
        })
        .collect();

    Ok(AbtDistribution {
        pairs,
        values,
        summaries,
        bin_edges,
        counts,
    })
}
