//! Experiment harness for the subvote learners: synthetic distributions
//! (including an adversarial universe that makes the perceptron grind),
//! error-versus-sample-size sweeps with structured output, and a
//! training-cost benchmark comparing subsampled boosting against bagging.

pub mod perceptron_bench;
pub mod sweep;
pub mod universe;

use subvote_core::analysis::AnalysisError;
use subvote_core::boost::BoostError;
use subvote_core::erm::ErmError;
use subvote_core::learner::LearnError;

/// Errors surfaced by the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("bad experiment parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error(transparent)]
    Erm(#[from] ErmError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("spec parse error: {0}")]
    Toml(#[from] toml::de::Error),
}
