//! Group-based trajectory model fitting: a finite mixture of polynomial
//! regressions with Gaussian residuals and one shared sigma, estimated by
//! multi-start EM.
//!
//! Group membership is per individual: one latent class explains all of an
//! individual's time points, so responsibilities live at the individual
//! level and the E-step works on whole score vectors.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::data::{LongitudinalDataset, TimeGrid};
use crate::error::{Error, Result};
use crate::poly::{design_row, grid_mean, polyval};

/// Lower bound on the shared residual standard deviation; prevents the
/// likelihood from degenerating on noiseless data.
pub const SIGMA_FLOOR: f64 = 1e-6;

/// Identifier of the random generator family, recorded in run metadata.
/// Reproducibility across implementations of this toolkit requires the same
/// algorithm; bit-equality with other RNGs is not promised.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Default seed for `FitConfig`.
pub const DEFAULT_FIT_SEED: u64 = 20;

/// Stream-id base for simulation substreams. Fit starts use streams
/// `0..n_starts`; per-individual simulation streams start at `1 << 32`, so
/// the two uses of one seed never share a ChaCha stream.
pub(crate) const SIM_STREAM_BASE: u64 = 1 << 32;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// A fitted K-group trajectory model. Groups are sorted by mean fitted value
/// over the grid, ascending, so group 1 is always the lowest trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub grid: TimeGrid,
    pub k: usize,
    pub degree: usize,
    pub mixing_proportions: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
    pub sigma: f64,
    pub log_likelihood: f64,
    pub n_individuals: usize,
    pub converged: bool,
    pub iterations: usize,
    pub seed: u64,
}

impl FittedModel {
    /// Fitted mean value of group `g` (0-based) at time `t`.
    pub fn curve_value(&self, g: usize, t: f64) -> f64 {
        polyval(&self.coefficients[g], t)
    }

    /// Grid-mean fitted value per group (the labeling key).
    pub fn group_means(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|c| grid_mean(c, self.grid.times()))
            .collect()
    }
}

/// Posterior membership probabilities with modal assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    pub ids: Vec<String>,
    /// N rows of K probabilities, each row summing to 1.
    pub probs: Vec<Vec<f64>>,
    /// Row-wise argmax, ties broken toward the lowest group index (0-based).
    pub modal: Vec<usize>,
}

impl PosteriorMatrix {
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn k(&self) -> usize {
        self.probs.first().map_or(0, Vec::len)
    }

    /// Modal member count per group.
    pub fn modal_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.k()];
        for &m in &self.modal {
            counts[m] += 1;
        }
        counts
    }
}

/// EM fitting configuration.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub n_starts: usize,
    pub max_iterations: usize,
    /// Convergence threshold on the relative log-likelihood improvement.
    pub rel_tol: f64,
    pub sigma_floor: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n_starts: 10,
            max_iterations: 500,
            rel_tol: 1e-8,
            sigma_floor: SIGMA_FLOOR,
            seed: DEFAULT_FIT_SEED,
        }
    }
}

/// Result of `fit_em` plus per-start diagnostics for tests and tooling.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: FittedModel,
    pub posterior: PosteriorMatrix,
    /// Per-start log-likelihood trace; `None` marks a failed start.
    pub ll_traces: Vec<Option<Vec<f64>>>,
    /// Index of the winning start (highest final log-likelihood; ties go to
    /// the earliest start).
    pub best_start: usize,
}

/// Mixture log-likelihood of a model on a dataset:
/// sum_i log sum_k pi_k prod_t Normal(y_it; beta_k . x_t, sigma).
pub fn log_likelihood(model: &FittedModel, data: &LongitudinalDataset) -> Result<f64> {
    check_grid(model, data)?;
    let log_joint = log_joint_matrix(data, &model.mixing_proportions, &model.coefficients, model.sigma);
    let mut total = 0.0;
    for row in log_joint.chunks(model.k) {
        total += log_sum_exp(row).0;
    }
    Ok(total)
}

/// Posterior membership probabilities, computed in log space with a
/// row-maximum shift to avoid underflow.
pub fn posterior_probabilities(
    model: &FittedModel,
    data: &LongitudinalDataset,
) -> Result<PosteriorMatrix> {
    check_grid(model, data)?;
    let log_joint = log_joint_matrix(data, &model.mixing_proportions, &model.coefficients, model.sigma);
    let mut probs = Vec::with_capacity(data.n_individuals());
    for row in log_joint.chunks(model.k) {
        probs.push(normalize_log_row(row));
    }
    let modal = probs.iter().map(|row| argmax(row)).collect();
    Ok(PosteriorMatrix {
        ids: data.individuals().iter().map(|ind| ind.id.clone()).collect(),
        probs,
        modal,
    })
}

/// Initial responsibilities for one start: an independent uniform draw from
/// the K-simplex per individual (normalized Exp(1) variates), on ChaCha
/// stream `start_index` of `seed`.
pub fn initial_responsibilities(
    n: usize,
    k: usize,
    seed: u64,
    start_index: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start_index);
    (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
            let sum: f64 = row.iter().sum();
            for value in &mut row {
                *value /= sum;
            }
            row
        })
        .collect()
}

/// Fit a K-group model with multi-start EM; returns the best start's model
/// and its posterior matrix.
pub fn fit_em(
    data: &LongitudinalDataset,
    k: usize,
    degree: usize,
    config: &FitConfig,
) -> Result<(FittedModel, PosteriorMatrix)> {
    fit_em_detailed(data, k, degree, config).map(|r| (r.model, r.posterior))
}

/// `fit_em` with per-start traces kept; the extra detail backs the EM
/// monotonicity checks in the test suite.
pub fn fit_em_detailed(
    data: &LongitudinalDataset,
    k: usize,
    degree: usize,
    config: &FitConfig,
) -> Result<FitReport> {
    if k == 0 {
        return Err(Error::InvalidGroupCount);
    }
    let n = data.n_individuals();
    if n <= k {
        return Err(Error::TooFewIndividuals { n, k });
    }
    if config.n_starts == 0 || config.rel_tol <= 0.0 || config.max_iterations == 0 {
        return Err(Error::InvalidConfig(
            "need n_starts >= 1, max_iterations >= 1, rel_tol > 0".into(),
        ));
    }

    let problem = Problem::new(data, degree)?;
    let mut best: Option<(usize, StartFit)> = None;
    let mut traces: Vec<Option<Vec<f64>>> = Vec::with_capacity(config.n_starts);
    for start in 0..config.n_starts {
        let init = initial_responsibilities(n, k, config.seed, start as u64);
        match run_start(&problem, k, init, config) {
            Some(fit) => {
                traces.push(Some(fit.ll_trace.clone()));
                let better = match &best {
                    Some((_, incumbent)) => fit.log_likelihood > incumbent.log_likelihood,
                    None => true,
                };
                if better {
                    best = Some((start, fit));
                }
            }
            None => traces.push(None),
        }
    }

    let (best_start, fit) = best.ok_or(Error::DegenerateFit {
        n_starts: config.n_starts,
    })?;
    let (model, posterior) = finalize(data, degree, config.seed, fit);
    Ok(FitReport {
        model,
        posterior,
        ll_traces: traces,
        best_start,
    })
}

fn check_grid(model: &FittedModel, data: &LongitudinalDataset) -> Result<()> {
    if model.grid != *data.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Immutable per-fit quantities: stacked scores, design rows, and the grid
/// Gram matrix sum_t x_t x_t^T.
struct Problem<'d> {
    data: &'d LongitudinalDataset,
    n: usize,
    t_len: usize,
    /// n x t_len scores, row-major.
    y: Vec<f64>,
    /// t_len design rows of length degree + 1.
    x_rows: Vec<Vec<f64>>,
    gram: DMatrix<f64>,
}

impl<'d> Problem<'d> {
    fn new(data: &'d LongitudinalDataset, degree: usize) -> Result<Self> {
        let t_len = data.grid().len();
        let p = degree + 1;
        let mut x_rows = Vec::with_capacity(t_len);
        let mut gram = DMatrix::zeros(p, p);
        for &t in data.grid().times() {
            let row = design_row(t, degree)?;
            for a in 0..p {
                for b in 0..p {
                    gram[(a, b)] += row[a] * row[b];
                }
            }
            x_rows.push(row);
        }
        let mut y = Vec::with_capacity(data.n_individuals() * t_len);
        for ind in data.individuals() {
            y.extend_from_slice(&ind.scores);
        }
        Ok(Problem {
            data,
            n: data.n_individuals(),
            t_len,
            y,
            x_rows,
            gram,
        })
    }
}

/// One converged (or iteration-capped) EM start.
struct StartFit {
    mixing: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
    sigma: f64,
    log_likelihood: f64,
    responsibilities: Vec<Vec<f64>>,
    iterations: usize,
    converged: bool,
    ll_trace: Vec<f64>,
}

/// Run EM from one responsibility initialization. Returns `None` when the
/// start collapses: a group's effective weight vanishes, the weighted normal
/// equations lose rank, or the log-likelihood goes non-finite.
fn run_start(
    problem: &Problem,
    k: usize,
    mut resp: Vec<Vec<f64>>,
    config: &FitConfig,
) -> Option<StartFit> {
    let (n, t_len, p) = (problem.n, problem.t_len, problem.gram.nrows());
    let mut mixing = vec![0.0; k];
    let mut coeffs = vec![vec![0.0; p]; k];
    let mut sigma = 0.0;
    let mut ll_prev = f64::NEG_INFINITY;
    let mut ll = f64::NEG_INFINITY;
    let mut ll_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        iterations += 1;

        // M-step: mixing proportions, weighted least squares per group,
        // pooled residual variance.
        for g in 0..k {
            let weight: f64 = resp.iter().map(|row| row[g]).sum();
            if !(weight > 0.0) || !weight.is_finite() {
                return None;
            }
            mixing[g] = weight / n as f64;

            // Responsibility weights are constant within an individual, so
            // the stacked WLS normal equations reduce to
            // (weight * gram) beta = sum_t x_t (sum_i r_ig y_it).
            let mut rhs = DVector::zeros(p);
            for t in 0..t_len {
                let col_sum: f64 = (0..n).map(|i| resp[i][g] * problem.y[i * t_len + t]).sum();
                for a in 0..p {
                    rhs[a] += problem.x_rows[t][a] * col_sum;
                }
            }
            let lhs = &problem.gram * weight;
            let beta = Cholesky::new(lhs)?.solve(&rhs);
            for a in 0..p {
                coeffs[g][a] = beta[a];
            }
        }

        let mu = group_curves(&coeffs, problem);
        let mut weighted_ssq = 0.0;
        for i in 0..n {
            for g in 0..k {
                let mut ssq = 0.0;
                for t in 0..t_len {
                    let r = problem.y[i * t_len + t] - mu[g * t_len + t];
                    ssq += r * r;
                }
                weighted_ssq += resp[i][g] * ssq;
            }
        }
        let variance = (weighted_ssq / (n * t_len) as f64).max(config.sigma_floor.powi(2));
        sigma = variance.sqrt();

        // E-step: responsibilities and the observed-data log-likelihood.
        ll = 0.0;
        let log_const: Vec<f64> = (0..k)
            .map(|g| mixing[g].ln() - 0.5 * t_len as f64 * (LN_2PI + 2.0 * sigma.ln()))
            .collect();
        let inv_two_var = 1.0 / (2.0 * sigma * sigma);
        let mut log_row = vec![0.0; k];
        for i in 0..n {
            for g in 0..k {
                let mut ssq = 0.0;
                for t in 0..t_len {
                    let r = problem.y[i * t_len + t] - mu[g * t_len + t];
                    ssq += r * r;
                }
                log_row[g] = log_const[g] - ssq * inv_two_var;
            }
            let (log_norm, shifted) = log_sum_exp_shifted(&log_row);
            for g in 0..k {
                resp[i][g] = shifted[g];
            }
            ll += log_norm;
        }
        if !ll.is_finite() {
            return None;
        }
        ll_trace.push(ll);

        if (ll - ll_prev).abs() < config.rel_tol * ll_prev.abs().max(1.0) {
            converged = true;
            break;
        }
        ll_prev = ll;
    }

    Some(StartFit {
        mixing,
        coeffs,
        sigma,
        log_likelihood: ll,
        responsibilities: resp,
        iterations,
        converged,
        ll_trace,
    })
}

/// K x t_len fitted group means on the grid, row-major.
fn group_curves(coeffs: &[Vec<f64>], problem: &Problem) -> Vec<f64> {
    let mut mu = Vec::with_capacity(coeffs.len() * problem.t_len);
    for c in coeffs {
        for &t in problem.data.grid().times() {
            mu.push(polyval(c, t));
        }
    }
    mu
}

/// Relabel the winning start by ascending grid-mean fitted value and package
/// the model plus posterior matrix.
fn finalize(
    data: &LongitudinalDataset,
    degree: usize,
    seed: u64,
    fit: StartFit,
) -> (FittedModel, PosteriorMatrix) {
    let times = data.grid().times();
    let mut order: Vec<usize> = (0..fit.mixing.len()).collect();
    let means: Vec<f64> = fit.coeffs.iter().map(|c| grid_mean(c, times)).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));

    let model = FittedModel {
        grid: data.grid().clone(),
        k: fit.mixing.len(),
        degree,
        mixing_proportions: order.iter().map(|&g| fit.mixing[g]).collect(),
        coefficients: order.iter().map(|&g| fit.coeffs[g].clone()).collect(),
        sigma: fit.sigma,
        log_likelihood: fit.log_likelihood,
        n_individuals: data.n_individuals(),
        converged: fit.converged,
        iterations: fit.iterations,
        seed,
    };

    let probs: Vec<Vec<f64>> = fit
        .responsibilities
        .iter()
        .map(|row| order.iter().map(|&g| row[g]).collect())
        .collect();
    let modal = probs.iter().map(|row| argmax(row)).collect();
    let posterior = PosteriorMatrix {
        ids: data.individuals().iter().map(|ind| ind.id.clone()).collect(),
        probs,
        modal,
    };
    (model, posterior)
}

/// Flat n x K matrix of log(pi_k) + log density of individual i under group
/// k, row-major.
fn log_joint_matrix(
    data: &LongitudinalDataset,
    mixing: &[f64],
    coeffs: &[Vec<f64>],
    sigma: f64,
) -> Vec<f64> {
    let times = data.grid().times();
    let t_len = times.len();
    let k = mixing.len();
    let mu: Vec<f64> = coeffs
        .iter()
        .flat_map(|c| times.iter().map(|&t| polyval(c, t)))
        .collect();
    let log_const: Vec<f64> = (0..k)
        .map(|g| mixing[g].ln() - 0.5 * t_len as f64 * (LN_2PI + 2.0 * sigma.ln()))
        .collect();
    let inv_two_var = 1.0 / (2.0 * sigma * sigma);
    let mut out = Vec::with_capacity(data.n_individuals() * k);
    for ind in data.individuals() {
        for g in 0..k {
            let mut ssq = 0.0;
            for t in 0..t_len {
                let r = ind.scores[t] - mu[g * t_len + t];
                ssq += r * r;
            }
            out.push(log_const[g] - ssq * inv_two_var);
        }
    }
    out
}

/// log(sum(exp(row))) via the max-shift trick; also returns the shift.
fn log_sum_exp(row: &[f64]) -> (f64, f64) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = row.iter().map(|&v| (v - max).exp()).sum();
    (max + sum.ln(), max)
}

/// Normalized exponentials of a log row (softmax) plus the log normalizer.
fn log_sum_exp_shifted(row: &[f64]) -> (f64, Vec<f64>) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut shifted: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = shifted.iter().sum();
    for value in &mut shifted {
        *value /= sum;
    }
    (max + sum.ln(), shifted)
}

fn normalize_log_row(row: &[f64]) -> Vec<f64> {
    log_sum_exp_shifted(row).1
}

/// Index of the row maximum; ties break toward the lowest index.
fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Individual;
    use approx::assert_relative_eq;

    fn tiny_dataset(scores: Vec<Vec<f64>>, times: Vec<f64>) -> LongitudinalDataset {
        let individuals = scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| Individual {
                id: format!("{:02}", i + 1),
                scores: s,
            })
            .collect();
        LongitudinalDataset::new(TimeGrid::new(times).unwrap(), individuals, (-100.0, 100.0))
            .unwrap()
    }

    fn constant_model(k: usize, values: &[f64], mixing: &[f64], sigma: f64, grid: TimeGrid) -> FittedModel {
        FittedModel {
            grid,
            k,
            degree: 0,
            mixing_proportions: mixing.to_vec(),
            coefficients: values.iter().map(|&v| vec![v]).collect(),
            sigma,
            log_likelihood: 0.0,
            n_individuals: 0,
            converged: true,
            iterations: 1,
            seed: 0,
        }
    }

    #[test]
    fn log_likelihood_standard_normal_case() {
        // K=1, sigma=1, beta=(0), scores (0,0): 2 * log(1/sqrt(2pi))
        let data = tiny_dataset(vec![vec![0.0, 0.0]], vec![0.0, 2.0]);
        let model = constant_model(1, &[0.0], &[1.0], 1.0, data.grid().clone());
        let ll = log_likelihood(&model, &data).unwrap();
        assert_relative_eq!(ll, -LN_2PI, max_relative = 1e-12);
    }

    #[test]
    fn log_likelihood_survives_zero_density_group() {
        // One group sits 1000 sigma away; its density underflows to zero but
        // the mixture stays finite through the other group.
        let data = tiny_dataset(vec![vec![0.0, 0.0]], vec![0.0, 2.0]);
        let model = constant_model(
            2,
            &[0.0, 1000.0],
            &[0.5, 0.5],
            1.0,
            data.grid().clone(),
        );
        assert!(log_likelihood(&model, &data).unwrap().is_finite());
    }

    #[test]
    fn posterior_k1_is_unity() {
        let data = tiny_dataset(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![0.0, 2.0]);
        let model = constant_model(1, &[2.0], &[1.0], 1.0, data.grid().clone());
        let post = posterior_probabilities(&model, &data).unwrap();
        assert_eq!(post.probs, vec![vec![1.0], vec![1.0]]);
        assert_eq!(post.modal, vec![0, 0]);
    }

    #[test]
    fn posterior_equidistant_ties_to_group_one() {
        // Individual at 10, groups at 2 and 18 with equal mixing: symmetric.
        let data = tiny_dataset(vec![vec![10.0, 10.0]], vec![0.0, 2.0]);
        let model = constant_model(2, &[2.0, 18.0], &[0.5, 0.5], 1.0, data.grid().clone());
        let post = posterior_probabilities(&model, &data).unwrap();
        assert_relative_eq!(post.probs[0][0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(post.probs[0][1], 0.5, max_relative = 1e-12);
        assert_eq!(post.modal, vec![0]);
    }

    #[test]
    fn posterior_well_separated_is_near_one() {
        let data = tiny_dataset(vec![vec![2.0, 2.0]], vec![0.0, 2.0]);
        let model = constant_model(2, &[2.0, 18.0], &[0.5, 0.5], 1.0, data.grid().clone());
        let post = posterior_probabilities(&model, &data).unwrap();
        assert!(post.probs[0][0] > 1.0 - 1e-12);
    }

    #[test]
    fn posterior_grid_mismatch_is_rejected() {
        let data = tiny_dataset(vec![vec![0.0, 0.0]], vec![0.0, 2.0]);
        let model = constant_model(
            1,
            &[0.0],
            &[1.0],
            1.0,
            TimeGrid::new(vec![0.0, 3.0]).unwrap(),
        );
        assert!(matches!(
            posterior_probabilities(&model, &data),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn initial_responsibilities_are_simplex_rows() {
        let resp = initial_responsibilities(50, 4, 9, 3);
        assert_eq!(resp.len(), 50);
        for row in &resp {
            assert_eq!(row.len(), 4);
            assert!(row.iter().all(|&v| v > 0.0));
            assert_relative_eq!(row.iter().sum::<f64>(), 1.0, max_relative = 1e-12);
        }
        // different starts draw from different substreams
        assert_ne!(resp, initial_responsibilities(50, 4, 9, 4));
        // same (seed, start) reproduces exactly
        assert_eq!(resp, initial_responsibilities(50, 4, 9, 3));
    }

    #[test]
    fn fit_k1_degree0_zero_variance_hits_sigma_floor() {
        let data = tiny_dataset(
            vec![vec![7.0, 7.0], vec![7.0, 7.0], vec![7.0, 7.0]],
            vec![0.0, 2.0],
        );
        let (model, _) = fit_em(&data, 1, 0, &FitConfig::default()).unwrap();
        assert_relative_eq!(model.coefficients[0][0], 7.0, max_relative = 1e-12);
        assert_eq!(model.sigma, SIGMA_FLOOR);
        assert!(model.log_likelihood.is_finite());
    }

    #[test]
    fn fit_k1_degree1_recovers_noiseless_line() {
        let times = vec![0.0, 2.0, 4.0, 6.0];
        let scores: Vec<Vec<f64>> = (0..5)
            .map(|_| times.iter().map(|&t| 2.0 * t).collect())
            .collect();
        let data = tiny_dataset(scores, times);
        let (model, _) = fit_em(&data, 1, 1, &FitConfig::default()).unwrap();
        assert_relative_eq!(model.coefficients[0][0], 0.0, epsilon = 1e-9);
        assert_relative_eq!(model.coefficients[0][1], 2.0, epsilon = 1e-9);
    }

    #[test]
    fn fit_rejects_n_not_greater_than_k() {
        let data = tiny_dataset(vec![vec![1.0, 1.0], vec![2.0, 2.0]], vec![0.0, 2.0]);
        assert!(matches!(
            fit_em(&data, 2, 0, &FitConfig::default()),
            Err(Error::TooFewIndividuals { n: 2, k: 2 })
        ));
    }

    #[test]
    fn fit_is_deterministic() {
        let times = vec![0.0, 2.0, 4.0];
        let scores: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let base = if i % 2 == 0 { 3.0 } else { 15.0 };
                times.iter().map(|&t| base + 0.1 * t + 0.01 * i as f64).collect()
            })
            .collect();
        let data = tiny_dataset(scores, times);
        let cfg = FitConfig {
            n_starts: 3,
            ..FitConfig::default()
        };
        let (m1, p1) = fit_em(&data, 2, 1, &cfg).unwrap();
        let (m2, p2) = fit_em(&data, 2, 1, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(p1, p2);
        assert_eq!(m1.sigma.to_bits(), m2.sigma.to_bits());
    }

    #[test]
    fn groups_are_labeled_ascending() {
        let times = vec![0.0, 2.0, 4.0];
        let scores: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let base = if i < 15 { 16.0 } else { 3.0 };
                times
                    .iter()
                    .map(|&t| base + 0.2 * ((i * 7 % 5) as f64 - 2.0) + 0.01 * t)
                    .collect()
            })
            .collect();
        let data = tiny_dataset(scores, times);
        let (model, post) = fit_em(&data, 2, 1, &FitConfig::default()).unwrap();
        let means = model.group_means();
        assert!(means[0] < means[1]);
        // the low group was generated second, so ids 16..30 must be modal 0
        assert_eq!(post.modal.iter().filter(|&&m| m == 0).count(), 15);
    }

    #[test]
    fn em_log_likelihood_is_monotone_per_start() {
        let times = vec![0.0, 2.0, 4.0];
        let scores: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let base = if i % 3 == 0 { 4.0 } else { 12.0 };
                times
                    .iter()
                    .map(|&t| base + ((i * 13 % 7) as f64) * 0.3 - 0.9 + 0.05 * t)
                    .collect()
            })
            .collect();
        let data = tiny_dataset(scores, times);
        let report = fit_em_detailed(&data, 2, 1, &FitConfig::default()).unwrap();
        for trace in report.ll_traces.iter().flatten() {
            for pair in trace.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-9,
                    "log-likelihood decreased: {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }
}
