//! Decision-level fusion of binary verification classifiers.
//!
//! Each classifier's training scores give an empirical reliability for
//! deciding "genuine" or "imposter" at any test score. [`fusion`] combines
//! those reliability ratios across classifiers (MDRR) and provides the
//! voting and sum baselines; [`metrics`] scores the outcome with
//! FAR/FRR/EER/HTER; [`synth`] generates reproducible benchmarks.

pub mod cli;
pub mod error;
mod exact;
pub mod fusion;
pub mod io;
pub mod metrics;
pub mod model;
pub mod reliability;
pub mod synth;

pub use error::{Error, Result};
pub use fusion::{Calibration, CalibrationSettings, FusionConfig, FusedDecision, Strategy};
pub use metrics::{ConfusionCounts, EvaluationReport, RocPoint, StrategyReport};
pub use model::{ClassifierRegistry, Dataset, Label, ScoreSample};
pub use reliability::{ReliabilityModel, ReliabilityPair};
pub use synth::SynthSpec;
