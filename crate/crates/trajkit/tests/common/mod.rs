//! Independent oracles for the integration suites: deliberately plain
//! implementations (power sums, density products, dense root bracketing)
//! that share no code path with the crate internals they check.

#![allow(dead_code)]

/// Naive power-sum polynomial evaluation (not Horner).
pub fn eval_poly(coeffs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (j, c) in coeffs.iter().enumerate() {
        acc += c * t.powi(j as i32);
    }
    acc
}

/// Coefficients of the antiderivative, constant term zero.
pub fn antiderivative(coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    for (j, c) in coeffs.iter().enumerate() {
        out.push(c / (j as f64 + 1.0));
    }
    out
}

/// a - b, padded to the longer length.
pub fn poly_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len().max(b.len()))
        .map(|j| a.get(j).unwrap_or(&0.0) - b.get(j).unwrap_or(&0.0))
        .collect()
}

/// Exact integral of the signed polynomial over [t0, t1].
fn signed_integral(poly: &[f64], t0: f64, t1: f64) -> f64 {
    let anti = antiderivative(poly);
    eval_poly(&anti, t1) - eval_poly(&anti, t0)
}

/// Sign-change roots of `poly` inside (t0, t1), located by dense sampling
/// and bisection. Tangential (non-flipping) roots are irrelevant for |p|.
fn sign_change_roots(poly: &[f64], t0: f64, t1: f64) -> Vec<f64> {
    const SAMPLES: usize = 4096;
    let h = (t1 - t0) / SAMPLES as f64;
    let mut roots = Vec::new();
    let mut prev_t = t0;
    let mut prev_v = eval_poly(poly, t0);
    for i in 1..=SAMPLES {
        let t = t0 + h * i as f64;
        let v = eval_poly(poly, t);
        if prev_v == 0.0 {
            if prev_t > t0 {
                roots.push(prev_t);
            }
        } else if v != 0.0 && prev_v.signum() != v.signum() {
            let (mut lo, mut hi, mut f_lo) = (prev_t, t, prev_v);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let f_mid = eval_poly(poly, mid);
                if f_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if f_lo.signum() == f_mid.signum() {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * (t1 - t0) {
                    break;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_t = t;
        prev_v = v;
    }
    roots
}

/// Symbolic ∫|a(t) − b(t)| dt over [t0, t1]: split the range at
/// sign-change roots of the gap, integrate each piece exactly via the
/// antiderivative, and sum absolute piece integrals.
pub fn abs_gap_integral(a: &[f64], b: &[f64], t0: f64, t1: f64) -> f64 {
    let gap = poly_sub(a, b);
    let mut cuts = vec![t0];
    cuts.extend(sign_change_roots(&gap, t0, t1));
    cuts.push(t1);
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        total += signed_integral(&gap, pair[0], pair[1]).abs();
    }
    total
}

pub fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Per-individual, per-group joint density pi_k * prod_t phi(y_t), by
/// plain products (no log-space tricks).
pub fn joint_matrix_oracle(
    scores: &[Vec<f64>],
    times: &[f64],
    mixing: &[f64],
    coefficients: &[Vec<f64>],
    sigma: f64,
) -> Vec<Vec<f64>> {
    scores
        .iter()
        .map(|row| {
            mixing
                .iter()
                .zip(coefficients)
                .map(|(&pi, beta)| {
                    let mut density = pi;
                    for (&t, &y) in times.iter().zip(row) {
                        density *= normal_pdf(y, eval_poly(beta, t), sigma);
                    }
                    density
                })
                .collect()
        })
        .collect()
}

pub fn ll_oracle(
    scores: &[Vec<f64>],
    times: &[f64],
    mixing: &[f64],
    coefficients: &[Vec<f64>],
    sigma: f64,
) -> f64 {
    joint_matrix_oracle(scores, times, mixing, coefficients, sigma)
        .iter()
        .map(|row| row.iter().sum::<f64>().ln())
        .sum()
}

pub fn posterior_oracle(
    scores: &[Vec<f64>],
    times: &[f64],
    mixing: &[f64],
    coefficients: &[Vec<f64>],
    sigma: f64,
) -> Vec<Vec<f64>> {
    joint_matrix_oracle(scores, times, mixing, coefficients, sigma)
        .into_iter()
        .map(|row| {
            let norm: f64 = row.iter().sum();
            row.into_iter().map(|v| v / norm).collect()
        })
        .collect()
}

pub fn bic_oracle(log_likelihood: f64, n_params: usize, n: usize) -> f64 {
    n_params as f64 * (n as f64).ln() - 2.0 * log_likelihood
}

pub fn sabic_oracle(log_likelihood: f64, n_params: usize, n: usize) -> f64 {
    n_params as f64 * ((n as f64 + 2.0) / 24.0).ln() - 2.0 * log_likelihood
}

/// Modal assignment per row, ties toward the lowest index.
pub fn modal_oracle(posteriors: &[Vec<f64>]) -> Vec<usize> {
    posteriors
        .iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// (per-group APPA, model APPA = minimum across groups).
pub fn appa_oracle(posteriors: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let k = posteriors[0].len();
    let modal = modal_oracle(posteriors);
    let per_group: Vec<f64> = (0..k)
        .map(|g| {
            let members: Vec<f64> = posteriors
                .iter()
                .zip(&modal)
                .filter(|(_, &m)| m == g)
                .map(|(row, _)| row[g])
                .collect();
            members.iter().sum::<f64>() / members.len() as f64
        })
        .collect();
    let model = per_group.iter().cloned().fold(f64::INFINITY, f64::min);
    (per_group, model)
}

pub fn smallest_pct_oracle(posteriors: &[Vec<f64>]) -> f64 {
    let k = posteriors[0].len();
    let modal = modal_oracle(posteriors);
    let min_count = (0..k)
        .map(|g| modal.iter().filter(|&&m| m == g).count())
        .min()
        .unwrap();
    100.0 * min_count as f64 / posteriors.len() as f64
}
