//! Scenario-driven longitudinal dataset generation.
//!
//! A scenario is a list of latent trajectory groups (polynomial mean curve,
//! mixing proportion, noise level). Each individual draws a group from the
//! seeded categorical distribution, then observes mean + Gaussian noise at
//! every grid time, clamped to the score bounds.

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Individual, LongitudinalDataset, TimeGrid, DEFAULT_BOUNDS};
use crate::error::{Error, Result};
use crate::gbtm::SIM_STREAM_BASE;
use crate::poly::polyval;

/// Default seed baked into `default_scenario`.
pub const DEFAULT_SCENARIO_SEED: u64 = 10;

/// One latent trajectory group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub label: String,
    /// Mixing proportion in (0, 1]; proportions sum to 1 across groups.
    pub proportion: f64,
    /// Polynomial mean curve, ascending power order, degree <= 3.
    pub mean_curve: Vec<f64>,
    pub noise_sd: f64,
}

/// Generative description of a longitudinal dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub grid: Vec<f64>,
    pub n_individuals: usize,
    pub groups: Vec<GroupSpec>,
    #[serde(default = "default_bounds")]
    pub bounds: (f64, f64),
    pub seed: u64,
    #[serde(default)]
    pub round_to_integer: bool,
}

fn default_bounds() -> (f64, f64) {
    DEFAULT_BOUNDS
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidScenario(msg));
        TimeGrid::new(self.grid.clone())?;
        if self.n_individuals == 0 {
            return fail("n_individuals must be >= 1".into());
        }
        if self.groups.is_empty() {
            return fail("need at least one group".into());
        }
        for group in &self.groups {
            if !(group.proportion > 0.0 && group.proportion <= 1.0) {
                return fail(format!(
                    "group {} proportion {} outside (0, 1]",
                    group.label, group.proportion
                ));
            }
            if group.mean_curve.is_empty() || group.mean_curve.len() > 4 {
                return fail(format!(
                    "group {} mean curve needs 1..=4 coefficients",
                    group.label
                ));
            }
            if group.mean_curve.iter().any(|c| !c.is_finite()) {
                return fail(format!("group {} has non-finite coefficients", group.label));
            }
            if !(group.noise_sd >= 0.0) || !group.noise_sd.is_finite() {
                return fail(format!("group {} noise_sd must be >= 0", group.label));
            }
        }
        let total: f64 = self.groups.iter().map(|g| g.proportion).sum();
        if (total - 1.0).abs() > 1e-9 {
            return fail(format!("proportions sum to {}", total));
        }
        if self.bounds.0 >= self.bounds.1 {
            return fail(format!(
                "bounds ({}, {}) are not an interval",
                self.bounds.0, self.bounds.1
            ));
        }
        Ok(())
    }
}

/// Generate a dataset plus its true labels (id -> group label, sorted by id).
///
/// Individual `i` draws from ChaCha stream `SIM_STREAM_BASE + i` of the
/// scenario seed: first the group (one uniform against the cumulative
/// proportions), then one standard-normal deviate per grid time.
pub fn generate_dataset(spec: &ScenarioSpec) -> Result<(LongitudinalDataset, Vec<(String, String)>)> {
    spec.validate()?;
    let grid = TimeGrid::new(spec.grid.clone())?;
    let width = spec.n_individuals.to_string().len();
    let mut cumulative = Vec::with_capacity(spec.groups.len());
    let mut acc = 0.0;
    for group in &spec.groups {
        acc += group.proportion;
        cumulative.push(acc);
    }

    let mut individuals = Vec::with_capacity(spec.n_individuals);
    let mut labels = Vec::with_capacity(spec.n_individuals);
    for i in 0..spec.n_individuals {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(SIM_STREAM_BASE + i as u64);

        let draw: f64 = rng.random();
        let group_idx = cumulative
            .iter()
            .position(|&c| draw < c)
            .unwrap_or(spec.groups.len() - 1);
        let group = &spec.groups[group_idx];

        let id = format!("{:0width$}", i + 1, width = width);
        let scores = grid
            .times()
            .iter()
            .map(|&t| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let mut y = polyval(&group.mean_curve, t) + group.noise_sd * noise;
                y = y.clamp(spec.bounds.0, spec.bounds.1);
                if spec.round_to_integer {
                    y = y.round().clamp(spec.bounds.0, spec.bounds.1);
                }
                y
            })
            .collect();
        individuals.push(Individual { id: id.clone(), scores });
        labels.push((id, group.label.clone()));
    }
    labels.sort();
    let dataset = LongitudinalDataset::new(grid, individuals, spec.bounds)?;
    Ok((dataset, labels))
}

/// The built-in five-group sleep-quality scenario: two nearly parallel low
/// ("good sleep") trajectories, an improving cubic, a worsening quadratic,
/// and a small noisy poor-stable group, on weeks 0..16, N = 1000.
pub fn default_scenario() -> ScenarioSpec {
    let group = |label: &str, proportion: f64, mean_curve: Vec<f64>, noise_sd: f64| GroupSpec {
        label: label.to_string(),
        proportion,
        mean_curve,
        noise_sd,
    };
    ScenarioSpec {
        grid: TimeGrid::default_weeks().times().to_vec(),
        n_individuals: 1000,
        groups: vec![
            group("good_stable", 0.300, vec![4.6, 0.025], 1.0),
            group("good_shifted", 0.145, vec![6.1, 0.025], 1.0),
            group("improving", 0.230, vec![15.0, -1.4, 0.08, -0.0016], 1.1),
            group("worsening", 0.240, vec![6.0, 0.85, -0.018], 1.1),
            group("poor_stable", 0.085, vec![15.8, 0.05, -0.004], 1.3),
        ],
        bounds: DEFAULT_BOUNDS,
        seed: DEFAULT_SCENARIO_SEED,
        round_to_integer: false,
    }
}
