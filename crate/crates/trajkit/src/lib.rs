//! Group-based trajectory modeling (GBTM) toolkit.
//!
//! Fits finite mixtures of polynomial regressions to longitudinal score data,
//! evaluates candidate group counts with conventional criteria (BIC, SABIC,
//! APPA, the 5% minimum-size rule), and quantifies trajectory heterogeneity
//! with areas between trajectories (ABT): total, interval-specific,
//! individual-to-group, and pairwise-distribution forms.

pub mod abt;
pub mod data;
pub mod error;
pub mod gbtm;
pub mod io;
pub mod poly;
pub mod report;
pub mod selection;
pub mod simulate;

pub use error::{Error, Result};
