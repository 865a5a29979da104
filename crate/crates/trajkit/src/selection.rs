//! Model-selection diagnostics (BIC, SABIC, APPA, minimum group size) and
//! the ascending-K model scan with the conventional stopping rule: fit from
//! `k_min` upward and stop after the first K whose smallest modal group
//! falls below 5% of the sample.

use crate::data::LongitudinalDataset;
use crate::error::{Error, Result};
use crate::gbtm::{fit_em, FitConfig, FittedModel, PosteriorMatrix};

/// Modal-size threshold (percent) under which a model is excluded.
pub const MIN_GROUP_PCT: f64 = 5.0;

/// Bayesian information criterion on the individual-level likelihood:
/// `n_params * ln(n) - 2 * log_likelihood` (lower is better). The sample
/// size `n` is the number of individuals, the likelihood's i.i.d. unit.
pub fn bic(log_likelihood: f64, n_params: usize, n: usize) -> f64 {
    n_params as f64 * (n as f64).ln() - 2.0 * log_likelihood
}

/// Sample-size-adjusted BIC: the Sclove form replaces `n` with `(n + 2) / 24`.
pub fn sabic(log_likelihood: f64, n_params: usize, n: usize) -> f64 {
    n_params as f64 * ((n as f64 + 2.0) / 24.0).ln() - 2.0 * log_likelihood
}

/// Free-parameter count of a K-group degree-d model: K polynomial
/// coefficient vectors, K - 1 free mixing proportions, one shared sigma.
pub fn n_params(k: usize, degree: usize) -> usize {
    k * (degree + 1) + (k - 1) + 1
}

/// Average posterior probability of assignment: per group, the mean
/// posterior among its modal members; model level is the minimum across
/// groups. A group with no modal members has no defined APPA.
pub fn appa(post: &PosteriorMatrix) -> Result<(Vec<f64>, f64)> {
    let k = post.k();
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (row, &modal) in post.probs.iter().zip(&post.modal) {
        sums[modal] += row[modal];
        counts[modal] += 1;
    }
    let mut per_group = Vec::with_capacity(k);
    for g in 0..k {
        if counts[g] == 0 {
            // 1-based group index in the error, matching user-facing labels
            return Err(Error::EmptyGroup { group: g + 1 });
        }
        per_group.push(sums[g] / counts[g] as f64);
    }
    let model_level = per_group.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((per_group, model_level))
}

/// Smallest modal group size as a percent of the sample; an empty group
/// yields 0.
pub fn smallest_group_pct(post: &PosteriorMatrix) -> f64 {
    let min_count = post.modal_counts().into_iter().min().unwrap_or(0);
    100.0 * min_count as f64 / post.n() as f64
}

/// Fit indices for one scanned K.
#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    pub k: usize,
    pub n_params: usize,
    pub bic: f64,
    pub sabic: f64,
    pub appa_per_group: Vec<f64>,
    pub appa_model: f64,
    pub smallest_group_pct: f64,
    pub excluded_by_size_rule: bool,
}

/// Per-K scan outcome; a failed fit keeps its error message so the scan can
/// report it without aborting.
#[derive(Debug, Clone)]
pub enum ScanOutcome {
    Fitted {
        diagnostics: FitDiagnostics,
        model: FittedModel,
        posterior: PosteriorMatrix,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub k: usize,
    pub outcome: ScanOutcome,
}

/// Ascending-K scan result.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    /// Ks fitted and not excluded by the 5% rule.
    pub candidate_set: Vec<usize>,
    /// Lowest-BIC candidate, if any candidate exists.
    pub recommended_by_bic: Option<usize>,
}

impl ScanResult {
    pub fn diagnostics(&self) -> impl Iterator<Item = &FitDiagnostics> {
        self.rows.iter().filter_map(|row| match &row.outcome {
            ScanOutcome::Fitted { diagnostics, .. } => Some(diagnostics),
            ScanOutcome::Failed { .. } => None,
        })
    }

    pub fn model_for(&self, k: usize) -> Option<(&FittedModel, &PosteriorMatrix)> {
        self.rows.iter().find_map(|row| match &row.outcome {
            ScanOutcome::Fitted {
                model, posterior, ..
            } if row.k == k => Some((model, posterior)),
            _ => None,
        })
    }
}

/// Diagnostics for one fitted model. Fails only when a modal group is empty
/// — which the scan treats as an excluded (sub-5%) model rather than an
/// error, since an empty group is the size rule's extreme case.
fn diagnose(model: &FittedModel, posterior: &PosteriorMatrix) -> FitDiagnostics {
    let params = n_params(model.k, model.degree);
    let smallest = smallest_group_pct(posterior);
    let (appa_per_group, appa_model) = match appa(posterior) {
        Ok(pair) => pair,
        // empty modal group: report per-group APPA as NaN-free zeros so the
        // row stays printable; the model is excluded anyway
        Err(_) => {
            let mut per_group = vec![0.0; model.k];
            let mut sums = vec![0.0; model.k];
            let mut counts = vec![0usize; model.k];
            for (row, &modal) in posterior.probs.iter().zip(&posterior.modal) {
                sums[modal] += row[modal];
                counts[modal] += 1;
            }
            for g in 0..model.k {
                if counts[g] > 0 {
                    per_group[g] = sums[g] / counts[g] as f64;
                }
            }
            (per_group, 0.0)
        }
    };
    FitDiagnostics {
        k: model.k,
        n_params: params,
        bic: bic(model.log_likelihood, params, model.n_individuals),
        sabic: sabic(model.log_likelihood, params, model.n_individuals),
        appa_per_group,
        appa_model,
        smallest_group_pct: smallest,
        excluded_by_size_rule: smallest < MIN_GROUP_PCT,
    }
}

/// Fit K = k_min, k_min+1, ... and stop after the first K excluded by the
/// 5% rule (that K is still reported). Individual fit failures mark their
/// row and the scan continues.
pub fn scan_models(
    data: &LongitudinalDataset,
    degree: usize,
    config: &FitConfig,
    k_min: usize,
    k_max: usize,
) -> Result<ScanResult> {
    if k_min < 1 || k_max < k_min {
        return Err(Error::InvalidConfig(format!(
            "bad scan range: k_min = {}, k_max = {}",
            k_min, k_max
        )));
    }
    // With too few individuals even the first fit cannot run; surface the
    // precondition instead of emitting an all-failed table.
    if data.n_individuals() <= k_min {
        return Err(Error::TooFewIndividuals {
            n: data.n_individuals(),
            k: k_min,
        });
    }

    let mut rows = Vec::new();
    let mut candidate_set = Vec::new();
    for k in k_min..=k_max {
        match fit_em(data, k, degree, config) {
            Ok((model, posterior)) => {
                let diagnostics = diagnose(&model, &posterior);
                let excluded = diagnostics.excluded_by_size_rule;
                if !excluded {
                    candidate_set.push(k);
                }
                rows.push(ScanRow {
                    k,
                    outcome: ScanOutcome::Fitted {
                        diagnostics,
                        model,
                        posterior,
                    },
                });
                if excluded {
                    break;
                }
            }
            Err(err) => {
                rows.push(ScanRow {
                    k,
                    outcome: ScanOutcome::Failed {
                        error: err.to_string(),
                    },
                });
            }
        }
    }

    let recommended_by_bic = candidate_set
        .iter()
        .copied()
        .min_by(|&a, &b| {
            let bic_of = |k: usize| {
                rows.iter()
                    .find_map(|row| match &row.outcome {
                        ScanOutcome::Fitted { diagnostics, .. } if row.k == k => {
                            Some(diagnostics.bic)
                        }
                        _ => None,
                    })
                    .expect("candidate K always has a fitted row")
            };
            bic_of(a).total_cmp(&bic_of(b))
        });

    Ok(ScanResult {
        rows,
        candidate_set,
        recommended_by_bic,
    })
}
