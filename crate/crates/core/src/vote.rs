//! Majority votes, voter ensembles, and margin bookkeeping.
//!
//! Two aggregate classifiers appear throughout: a [`MajorityVote`] is the
//! unweighted committee a boosting run produces (its size is the boosting
//! target `t`), and an [`Ensemble`] is the flat list of voters the
//! voter-sampling learner assembles, one drawn voter per sampled row. Both
//! predict by sign of the voter sum with ties going to `Plus`, the
//! crate-wide sign rule.
//!
//! Margins are computed in integer vote counts and only converted to `f64`
//! at the edge, so margin-loss accounting is exact.

use std::sync::Arc;

use crate::data::{Label, LabeledExample, Point, TrainingSequence};
use crate::erm::Hypothesis;
use crate::ledger::CostLedger;

/// An unweighted committee of `t >= 1` voters.
#[derive(Clone, Debug)]
pub struct MajorityVote {
    voters: Vec<Arc<dyn Hypothesis>>,
}

impl MajorityVote {
    /// # Panics
    /// Panics on an empty voter list.
    pub fn new(voters: Vec<Arc<dyn Hypothesis>>) -> Self {
        assert!(!voters.is_empty(), "a majority vote needs at least one voter");
        Self { voters }
    }

    /// Committee size `t`.
    pub fn t(&self) -> usize {
        self.voters.len()
    }

    pub fn voters(&self) -> &[Arc<dyn Hypothesis>] {
        &self.voters
    }

    /// The committee's label for `point`: sign of the voter sum, ties to
    /// `Plus`. Costs `t` inferences.
    pub fn classify(&self, point: &Point, ledger: &mut CostLedger) -> Label {
        let mut sum: i64 = 0;
        for voter in &self.voters {
            sum += voter.predict(point, ledger).to_i8() as i64;
        }
        Label::from_sign(sum as f64)
    }
}

/// A flat voter list predicting by sign of the voter sum, ties to `Plus`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    voters: Vec<Arc<dyn Hypothesis>>,
}

impl Ensemble {
    /// # Panics
    /// Panics on an empty voter list.
    pub fn new(voters: Vec<Arc<dyn Hypothesis>>) -> Self {
        assert!(!voters.is_empty(), "an ensemble needs at least one voter");
        Self { voters }
    }

    /// Ensemble size `l`.
    pub fn len(&self) -> usize {
        self.voters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn voters(&self) -> &[Arc<dyn Hypothesis>] {
        &self.voters
    }
}

/// The signed margin of `vote` on one labeled example: with `a` of the `t`
/// voters correct, the margin is `(2a - t) / t`, in `[-1, 1]`. Costs `t`
/// inferences.
pub fn vote_margin(
    vote: &MajorityVote,
    example: &LabeledExample,
    ledger: &mut CostLedger,
) -> f64 {
    let t = vote.t() as i64;
    let mut correct: i64 = 0;
    for voter in vote.voters() {
        if voter.predict(&example.point, ledger) == example.label {
            correct += 1;
        }
    }
    (2 * correct - t) as f64 / t as f64
}

/// An exact empirical margin loss: the fraction of examples whose margin is
/// at most `theta`, kept as an integer ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MarginLoss {
    /// Number of examples with margin `<= theta`.
    pub violations: u64,
    /// Number of examples measured.
    pub total: u64,
}

impl MarginLoss {
    pub fn as_f64(&self) -> f64 {
        self.violations as f64 / self.total as f64
    }

    /// Whether the loss is below `1 / total`. Since the loss is a multiple
    /// of `1 / total`, this holds exactly when there are no violations.
    pub fn below_one_over_total(&self) -> bool {
        self.violations == 0
    }
}

/// Exact test for `margin <= theta` given `correct` of `t` voters right:
/// `(2 correct - t) / t <= theta`, evaluated in integers.
pub fn margin_at_most(correct: i64, t: i64, theta: f64) -> bool {
    let (num, den) = dyadic_ratio(theta);
    (2 * correct as i128 - t as i128) * den <= num * t as i128
}

/// `theta` as an exact integer ratio. Every finite `f64` is dyadic, so the
/// decomposition is lossless.
fn dyadic_ratio(theta: f64) -> (i128, i128) {
    assert!(
        theta.is_finite() && theta.abs() <= 1.0,
        "theta must be a finite value in [-1, 1]"
    );
    let mut num = theta;
    let mut den: i128 = 1;
    while num.fract() != 0.0 {
        num *= 2.0;
        den *= 2;
    }
    (num as i128, den)
}

/// The empirical `theta`-margin loss of `vote` over `sample`: the fraction
/// of examples with margin at most `theta` (boundary counts as a
/// violation). Costs `t * |sample|` inferences.
///
/// The comparison `margin <= theta` is exact: with `a` correct voters out
/// of `t` and `theta = num / den`, it is evaluated as
/// `(2a - t) * den <= num * t` in integers. No rounding is involved.
///
/// # Panics
/// Panics on an empty sample or a `theta` outside `[-1, 1]`.
pub fn empirical_margin_loss(
    vote: &MajorityVote,
    sample: &TrainingSequence,
    theta: f64,
    ledger: &mut CostLedger,
) -> MarginLoss {
    assert!(!sample.is_empty(), "margin loss over an empty sample");
    let (num, den) = dyadic_ratio(theta);
    let t = vote.t() as i128;
    let mut violations: u64 = 0;
    for ex in sample.iter() {
        let mut correct: i128 = 0;
        for voter in vote.voters() {
            if voter.predict(&ex.point, ledger) == ex.label {
                correct += 1;
            }
        }
        if (2 * correct - t) * den <= num * t {
            violations += 1;
        }
    }
    MarginLoss {
        violations,
        total: sample.len() as u64,
    }
}

/// The ensemble's label for `point`: sign of the voter sum, ties to `Plus`.
/// Costs exactly `l` inferences, one per voter.
pub fn predict_ensemble(ensemble: &Ensemble, point: &Point, ledger: &mut CostLedger) -> Label {
    let mut sum: i64 = 0;
    for voter in ensemble.voters() {
        sum += voter.predict(point, ledger).to_i8() as i64;
    }
    Label::from_sign(sum as f64)
}
