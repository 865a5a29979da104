//! Core domain types: measurement grid, longitudinal datasets, and
//! individual trajectories.

use crate::error::{Error, Result};

/// Default score bounds (PSQI-like total score range).
pub const DEFAULT_BOUNDS: (f64, f64) = (0.0, 21.0);

/// Shared measurement time grid (strictly increasing, at least two points).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 time points, got {}",
                times.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("times must be strictly increasing".into()));
        }
        Ok(TimeGrid { times })
    }

    /// Default grid: weeks 0, 2, ..., 16 (9 points, 8 intervals).
    pub fn default_weeks() -> Self {
        TimeGrid::new((0..=8).map(|i| (2 * i) as f64).collect()).expect("static grid is valid")
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: length >= 2
    }

    /// Number of consecutive-time intervals (length - 1).
    pub fn n_intervals(&self) -> usize {
        self.times.len() - 1
    }

    /// Interval endpoints `(times[i], times[i+1])`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.times[i], self.times[i + 1])
    }
}

/// One individual's observations, aligned to the dataset grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub id: String,
    pub scores: Vec<f64>,
}

/// Per-individual score vectors on a shared grid, with score bounds used for
/// validation (fitting does not censor).
#[derive(Debug, Clone, PartialEq)]
pub struct LongitudinalDataset {
    grid: TimeGrid,
    individuals: Vec<Individual>,
    bounds: (f64, f64),
}

impl LongitudinalDataset {
    /// Build a dataset, validating every invariant. Individuals are stored
    /// sorted by id so construction order never leaks into downstream
    /// results.
    pub fn new(
        grid: TimeGrid,
        mut individuals: Vec<Individual>,
        bounds: (f64, f64),
    ) -> Result<Self> {
        if bounds.0 >= bounds.1 {
            return Err(Error::InvalidDataset(format!(
                "bounds ({}, {}) are not an interval",
                bounds.0, bounds.1
            )));
        }
        individuals.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in individuals.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::InvalidDataset(format!("duplicate id: {}", pair[0].id)));
            }
        }
        for ind in &individuals {
            if ind.scores.len() != grid.len() {
                return Err(Error::InvalidDataset(format!(
                    "id {} has {} scores for {} grid points",
                    ind.id,
                    ind.scores.len(),
                    grid.len()
                )));
            }
            for (&t, &score) in grid.times().iter().zip(&ind.scores) {
                if !score.is_finite() {
                    return Err(Error::InvalidDataset(format!(
                        "non-finite score for id {} at time {}",
                        ind.id, t
                    )));
                }
                if score < bounds.0 || score > bounds.1 {
                    return Err(Error::ScoreOutOfRange {
                        id: ind.id.clone(),
                        time: t,
                        score,
                        lo: bounds.0,
                        hi: bounds.1,
                    });
                }
            }
        }
        Ok(LongitudinalDataset {
            grid,
            individuals,
            bounds,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn n_individuals(&self) -> usize {
        self.individuals.len()
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn find(&self, id: &str) -> Option<&Individual> {
        // individuals are sorted by id
        self.individuals
            .binary_search_by(|ind| ind.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.individuals[i])
    }

    /// The piecewise-linear individual trajectory for one id.
    pub fn trajectory(&self, id: &str) -> Result<IndividualTrajectory> {
        let ind = self
            .find(id)
            .ok_or_else(|| Error::UnknownId(id.to_string()))?;
        Ok(IndividualTrajectory {
            id: ind.id.clone(),
            points: self
                .grid
                .times()
                .iter()
                .copied()
                .zip(ind.scores.iter().copied())
                .collect(),
        })
    }
}

/// An individual's observed path, interpreted as the piecewise-linear
/// interpolant through its (time, score) points.
#[derive(Debug, Clone, PartialEq)]
pub struct IndividualTrajectory {
    pub id: String,
    pub points: Vec<(f64, f64)>,
}

impl IndividualTrajectory {
    /// Evaluate the interpolant. Outside the observed span the nearest
    /// endpoint value is used; ABT only ever evaluates within the span.
    pub fn eval(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        if t >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        // partition_point finds the first knot strictly right of t
        let hi = pts.partition_point(|&(x, _)| x <= t);
        let (t0, y0) = pts[hi - 1];
        let (t1, y1) = pts[hi];
        y0 + (y1 - y0) * ((t - t0) / (t1 - t0))
    }
}
