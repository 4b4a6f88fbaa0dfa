//! Versioned JSON model descriptors.
//!
//! A descriptor records everything needed to reproduce and reuse a
//! training run: the resolved configuration, the cost ledger, and one
//! [`HypothesisParams`] entry per ensemble voter. Descriptors contain no
//! wall-clock data, so identical runs serialize byte for byte.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use subvote_core::boost::{BoostConfig, ScaleProfile};
use subvote_core::erm::{Hypothesis, HypothesisParams, LinearHypothesis, ThresholdHypothesis};
use subvote_core::learner::TrainReport;
use subvote_core::ledger::CostLedger;
use subvote_core::vote::Ensemble;

pub const FORMAT_VERSION: u32 = 1;

/// Serialized form of one trained model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub format_version: u32,
    pub learner: String,
    /// Human-readable id of the training distribution.
    pub distribution: String,
    pub m: usize,
    pub m_effective: usize,
    pub delta: f64,
    pub d: usize,
    pub seed: u64,
    /// Scale profile of the boosting runs; absent for the baselines.
    pub scale: Option<ScaleProfile>,
    pub boost: Option<BoostConfig>,
    pub voters_l: usize,
    pub fallback_count: usize,
    pub cache_hits: usize,
    pub ledger: CostLedger,
    pub voters: Vec<HypothesisParams>,
}

impl ModelDescriptor {
    pub fn from_report(
        learner: &str,
        distribution: String,
        delta: f64,
        d: usize,
        report: &TrainReport,
    ) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            learner: learner.to_string(),
            distribution,
            m: report.m,
            m_effective: report.m_effective,
            delta,
            d,
            seed: report.seed,
            scale: report.boost.as_ref().map(|b| b.scale.clone()),
            boost: report.boost.clone(),
            voters_l: report.voters_l,
            fallback_count: report.fallback_count,
            cache_hits: report.cache_hits,
            ledger: report.ledger,
            voters: report
                .ensemble
                .voters()
                .iter()
                .map(|v| v.params())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("plain data serializes");
        text.push('\n');
        text
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let descriptor: Self = serde_json::from_str(&text)
            .map_err(|e| format!("cannot parse {}: {e}", path.display()))?;
        if descriptor.format_version != FORMAT_VERSION {
            return Err(format!(
                "unsupported descriptor version {} (this build reads {FORMAT_VERSION})",
                descriptor.format_version
            ));
        }
        Ok(descriptor)
    }

    /// Rebuilds the ensemble from the stored parameters. Only thresholds
    /// and linear separators are self-contained; finite-class indices and
    /// opaque voters cannot be reconstructed and are refused.
    pub fn reconstruct(&self) -> Result<Ensemble, String> {
        let mut voters: Vec<Arc<dyn Hypothesis>> = Vec::with_capacity(self.voters.len());
        for (i, params) in self.voters.iter().enumerate() {
            let voter: Arc<dyn Hypothesis> = match params {
                HypothesisParams::Threshold { sign, boundary } => Arc::new(ThresholdHypothesis {
                    sign: *sign,
                    boundary: *boundary,
                }),
                HypothesisParams::LinearSeparator { weights } => Arc::new(LinearHypothesis {
                    weights: weights.clone(),
                }),
                HypothesisParams::FiniteIndex { index } => {
                    return Err(format!(
                        "voter {i} is index {index} into a finite class; the class itself \
                         is not stored, so this model cannot be evaluated"
                    ));
                }
                HypothesisParams::Opaque { note } => {
                    return Err(format!(
                        "voter {i} is opaque ({note}) and cannot be reconstructed \
                         from its description"
                    ));
                }
            };
            voters.push(voter);
        }
        if voters.is_empty() {
            return Err("descriptor lists no voters".into());
        }
        Ok(Ensemble::new(voters))
    }

    /// The point shape the voters consume: "scalar", "vector", or an
    /// error for mixed ensembles.
    pub fn point_kind(&self) -> Result<&'static str, String> {
        let mut kind = None;
        for params in &self.voters {
            let this = match params {
                HypothesisParams::Threshold { .. } => "scalar",
                HypothesisParams::LinearSeparator { .. } => "vector",
                HypothesisParams::FiniteIndex { .. } | HypothesisParams::Opaque { .. } => continue,
            };
            match kind {
                None => kind = Some(this),
                Some(k) if k == this => {}
                Some(k) => return Err(format!("mixed voter shapes: {k} and {this}")),
            }
        }
        kind.ok_or_else(|| "no reconstructible voters".into())
    }
}
