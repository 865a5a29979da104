//! Dataset and model persistence, plus the atomic-write helper used by all
//! report emission.
//!
//! Datasets travel as long-format CSV (`id,time,score`). Models travel as a
//! single JSON document; every real number is written with 17 significant
//! digits so a save/load round trip reproduces each `f64` bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{Individual, LongitudinalDataset, TimeGrid, DEFAULT_BOUNDS};
use crate::error::{Error, Result};
use crate::gbtm::{FittedModel, SIGMA_FLOOR};
use crate::poly::{grid_mean, MAX_DEGREE};

/// Schema version written to and required from model files.
pub const MODEL_SCHEMA_VERSION: u64 = 1;

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Write `bytes` to `path` atomically: write a sibling `<name>.tmp`, then
/// rename over the target. No reader ever observes a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(|e| io_error(&tmp, e))?;
    file.write_all(bytes).map_err(|e| io_error(&tmp, e))?;
    file.sync_all().map_err(|e| io_error(&tmp, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

/// Load a long-format CSV (`id,time,score`) into a validated dataset.
///
/// The grid is inferred as the sorted distinct times, so row order is
/// irrelevant; every id must cover every grid time exactly once.
pub fn load_dataset(path: &Path, bounds: Option<(f64, f64)>) -> Result<LongitudinalDataset> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| parse_error(path, e.to_string()))?;
    let expected = ["id", "time", "score"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(parse_error(
            path,
            format!("expected header id,time,score, got {:?}", headers),
        ));
    }

    let mut rows: Vec<(String, f64, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(path, e.to_string()))?;
        if record.len() != 3 {
            return Err(parse_error(
                path,
                format!("expected 3 fields, got {}", record.len()),
            ));
        }
        let id = record[0].to_string();
        let time: f64 = record[1]
            .parse()
            .map_err(|_| parse_error(path, format!("bad time {:?} for id {}", &record[1], id)))?;
        let score: f64 = record[2]
            .parse()
            .map_err(|_| parse_error(path, format!("bad score {:?} for id {}", &record[2], id)))?;
        if !time.is_finite() {
            return Err(parse_error(path, format!("non-finite time for id {}", id)));
        }
        if !score.is_finite() {
            return Err(parse_error(
                path,
                format!("non-finite score for id {} at time {}", id, time),
            ));
        }
        rows.push((id, time, score));
    }

    let mut times: Vec<f64> = rows.iter().map(|r| r.1).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let grid = TimeGrid::new(times)?;

    // Assemble complete panels; BTreeMap keeps id handling deterministic.
    let mut panels: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    for (id, time, score) in rows {
        let slot = grid
            .times()
            .binary_search_by(|t| t.total_cmp(&time))
            .expect("time came from the grid");
        let panel = panels
            .entry(id.clone())
            .or_insert_with(|| vec![None; grid.len()]);
        if panel[slot].is_some() {
            return Err(Error::DuplicateCell { id, time });
        }
        panel[slot] = Some(score);
    }

    let mut individuals = Vec::with_capacity(panels.len());
    for (id, panel) in panels {
        let mut scores = Vec::with_capacity(panel.len());
        for slot in panel {
            match slot {
                Some(score) => scores.push(score),
                None => return Err(Error::IncompletePanel { id }),
            }
        }
        individuals.push(Individual { id, scores });
    }

    LongitudinalDataset::new(grid, individuals, bounds.unwrap_or(DEFAULT_BOUNDS))
}

/// Serialize a dataset to long-format CSV bytes (canonical row order:
/// individuals by id, times ascending within each individual).
pub fn dataset_to_csv(dataset: &LongitudinalDataset) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["id", "time", "score"]).expect("vec write");
    for ind in dataset.individuals() {
        for (&t, &y) in dataset.grid().times().iter().zip(&ind.scores) {
            writer
                .write_record([ind.id.as_str(), &t.to_string(), &y.to_string()])
                .expect("vec write");
        }
    }
    writer.into_inner().expect("vec writer never errors")
}

/// Write a dataset as long-format CSV (atomic).
pub fn save_dataset(dataset: &LongitudinalDataset, path: &Path) -> Result<()> {
    atomic_write(path, &dataset_to_csv(dataset))
}

/// On-disk model schema. Field names are part of the file format.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u64,
    grid: Vec<f64>,
    #[serde(rename = "K")]
    k: usize,
    degree: usize,
    mixing_proportions: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
    sigma: f64,
    log_likelihood: f64,
    n_individuals: usize,
    converged: bool,
    iterations: usize,
    seed: u64,
}

/// JSON formatter that prints every `f64` with 17 significant digits
/// (`{:.16e}`), enough to reproduce the exact bit pattern on reload.
struct Sig17Formatter;

impl serde_json::ser::Formatter for Sig17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{:.16e}", value)
    }
}

/// Check every `FittedModel` invariant; used on both save and load so a
/// malformed file can never enter the pipeline.
pub fn validate_model(model: &FittedModel) -> Result<()> {
    let fail = |msg: String| Err(Error::MalformedModel(msg));
    if model.k == 0 {
        return fail("K must be >= 1".into());
    }
    if model.degree > MAX_DEGREE {
        return fail(format!("degree {} exceeds {}", model.degree, MAX_DEGREE));
    }
    if model.mixing_proportions.len() != model.k {
        return fail(format!(
            "{} mixing proportions for K = {}",
            model.mixing_proportions.len(),
            model.k
        ));
    }
    if model.coefficients.len() != model.k {
        return fail(format!(
            "{} coefficient vectors for K = {}",
            model.coefficients.len(),
            model.k
        ));
    }
    for (g, coeffs) in model.coefficients.iter().enumerate() {
        if coeffs.len() != model.degree + 1 {
            return fail(format!(
                "group {} has {} coefficients for degree {}",
                g + 1,
                coeffs.len(),
                model.degree
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return fail(format!("group {} has non-finite coefficients", g + 1));
        }
    }
    let pi_sum: f64 = model.mixing_proportions.iter().sum();
    if (pi_sum - 1.0).abs() > 1e-9 {
        return fail(format!("mixing proportions sum to {}", pi_sum));
    }
    if model.mixing_proportions.iter().any(|&p| !(p > 0.0)) {
        return fail("every mixing proportion must be > 0".into());
    }
    if !model.sigma.is_finite() || model.sigma < SIGMA_FLOOR {
        return fail(format!("sigma {} below floor {}", model.sigma, SIGMA_FLOOR));
    }
    if !model.log_likelihood.is_finite() {
        return fail("non-finite log-likelihood".into());
    }
    // Stable labeling convention: groups ascend by grid-mean fitted value.
    let means: Vec<f64> = model
        .coefficients
        .iter()
        .map(|c| grid_mean(c, model.grid.times()))
        .collect();
    if means.windows(2).any(|w| w[1] < w[0] - 1e-9) {
        return fail("groups not sorted by ascending grid-mean value".into());
    }
    Ok(())
}

/// Write a model as JSON (atomic, 17-significant-digit reals).
pub fn save_model(model: &FittedModel, path: &Path) -> Result<()> {
    validate_model(model)?;
    let file = ModelFile {
        schema_version: MODEL_SCHEMA_VERSION,
        grid: model.grid.times().to_vec(),
        k: model.k,
        degree: model.degree,
        mixing_proportions: model.mixing_proportions.clone(),
        coefficients: model.coefficients.clone(),
        sigma: model.sigma,
        log_likelihood: model.log_likelihood,
        n_individuals: model.n_individuals,
        converged: model.converged,
        iterations: model.iterations,
        seed: model.seed,
    };
    let mut bytes = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut bytes, Sig17Formatter);
    file.serialize(&mut ser)
        .map_err(|e| Error::MalformedModel(e.to_string()))?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

/// Read a model back, checking schema version and every model invariant.
pub fn load_model(path: &Path) -> Result<FittedModel> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| parse_error(path, e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::MalformedModel("missing schema_version".into()))?;
    if version != MODEL_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: version,
            expected: MODEL_SCHEMA_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| Error::MalformedModel(e.to_string()))?;
    let model = FittedModel {
        grid: TimeGrid::new(file.grid)?,
        k: file.k,
        degree: file.degree,
        mixing_proportions: file.mixing_proportions,
        coefficients: file.coefficients,
        sigma: file.sigma,
        log_likelihood: file.log_likelihood,
        n_individuals: file.n_individuals,
        converged: file.converged,
        iterations: file.iterations,
        seed: file.seed,
    };
    validate_model(&model)?;
    Ok(model)
}
