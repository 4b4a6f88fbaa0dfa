//! Operation-cost accounting.
//!
//! Training and inference complexity is measured in abstract operation
//! counts rather than wall time. Every API that trains an oracle, queries a
//! hypothesis, or draws randomness threads a [`CostLedger`] and bumps the
//! matching counter; comparisons between learners then reduce to comparing
//! ledgers. Counters only ever increase.

use serde::{Deserialize, Serialize};

/// Monotone operation counters for one run. Merging is additive, so a
/// ledger can be split across phases and recombined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    /// Number of ERM oracle training calls.
    pub erm_train_calls: u64,
    /// Total examples across all ERM training calls.
    pub erm_train_examples: u64,
    /// Number of single-hypothesis predictions.
    pub inference_calls: u64,
    /// Number of random draws (sample indices, selector coordinates,
    /// voter picks, bootstrap picks).
    pub sampler_draws: u64,
    /// Coarse arithmetic work: one unit per inner-loop step of weight
    /// maintenance, cumulative rebuilds, search probes, and scan checks.
    pub arithmetic_ops: u64,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds every counter of `other` into `self`.
    pub fn merge(&mut self, other: &CostLedger) {
        self.erm_train_calls += other.erm_train_calls;
        self.erm_train_examples += other.erm_train_examples;
        self.inference_calls += other.inference_calls;
        self.sampler_draws += other.sampler_draws;
        self.arithmetic_ops += other.arithmetic_ops;
    }

    /// The merged ledger of `self` and `other`.
    pub fn merged(&self, other: &CostLedger) -> CostLedger {
        let mut out = *self;
        out.merge(other);
        out
    }

    /// True if every counter of `self` is at most the matching counter of
    /// `other`.
    pub fn dominated_by(&self, other: &CostLedger) -> bool {
        self.erm_train_calls <= other.erm_train_calls
            && self.erm_train_examples <= other.erm_train_examples
            && self.inference_calls <= other.inference_calls
            && self.sampler_draws <= other.sampler_draws
            && self.arithmetic_ops <= other.arithmetic_ops
    }
}
