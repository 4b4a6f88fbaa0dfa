//! Empirical risk minimization oracles and the hypotheses they produce.
//!
//! An [`ErmOracle`] is a black box that, given a realizable sample, returns
//! a hypothesis consistent with every example in it. The boosting and
//! subsampling machinery treats the oracle opaquely and only relies on two
//! contract points: consistency on realizable input, and determinism (the
//! same sample always yields the same hypothesis). Determinism is what makes
//! caching boosted committees per row sound.
//!
//! Three reference oracles are provided: thresholds on the line, first
//! consistent member of an explicit finite class, and the perceptron for
//! linearly separable data with a known margin floor.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Label, Point, TrainingSequence};
use crate::ledger::CostLedger;

/// Errors an oracle can raise.
#[derive(Debug, Error)]
pub enum ErmError {
    /// No hypothesis in the class is consistent with the sample.
    #[error("sample is not realizable: {0}")]
    NotRealizable(String),
    /// The training procedure exhausted its iteration budget.
    #[error("no convergence within budget: {updates} updates over {passes} passes")]
    NonConvergence { updates: u64, passes: u64 },
    /// The sample violates the oracle's input conventions.
    #[error("malformed sample: {0}")]
    Malformed(String),
}

/// A serializable description of a trained hypothesis. `Opaque` marks
/// hypotheses that cannot be reconstructed from their description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HypothesisParams {
    /// `x -> sign * sgn(x - boundary)` on scalar points, with `sgn(0) = +1`.
    Threshold { sign: i8, boundary: f64 },
    /// Member `index` of an explicit finite class.
    FiniteIndex { index: usize },
    /// `x -> sgn(<weights, x>)` on vector points.
    LinearSeparator { weights: Vec<f64> },
    /// Not reconstructible; carries a human-readable note.
    Opaque { note: String },
}

/// A trained classifier. Total on its point variant: every call returns a
/// label.
pub trait Hypothesis: Send + Sync {
    /// The raw prediction, with no cost accounting. Implementations must be
    /// pure functions of the point.
    fn classify(&self, point: &Point) -> Label;

    /// A serializable description of this hypothesis.
    fn params(&self) -> HypothesisParams;

    /// The prediction as an accounted inference: bumps `inference_calls`
    /// by exactly one, then classifies.
    fn predict(&self, point: &Point, ledger: &mut CostLedger) -> Label {
        ledger.inference_calls += 1;
        self.classify(point)
    }
}

impl std::fmt::Debug for dyn Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hypothesis({:?})", self.params())
    }
}

/// A deterministic consistent-hypothesis finder.
pub trait ErmOracle: Send + Sync {
    /// Oracle name for reports.
    fn name(&self) -> &str;

    /// Finds a consistent hypothesis, charging any internal work to
    /// `ledger`. Implementations do not account the call itself; use
    /// [`ErmOracle::train`].
    fn fit(
        &self,
        sample: &TrainingSequence,
        ledger: &mut CostLedger,
    ) -> Result<Arc<dyn Hypothesis>, ErmError>;

    /// The accounted entry point: bumps `erm_train_calls` by one and
    /// `erm_train_examples` by the sample length, then fits.
    fn train(
        &self,
        sample: &TrainingSequence,
        ledger: &mut CostLedger,
    ) -> Result<Arc<dyn Hypothesis>, ErmError> {
        ledger.erm_train_calls += 1;
        ledger.erm_train_examples += sample.len() as u64;
        self.fit(sample, ledger)
    }
}

/// Threshold hypothesis `x -> sign * sgn(x - boundary)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdHypothesis {
    pub sign: i8,
    pub boundary: f64,
}

impl Hypothesis for ThresholdHypothesis {
    fn classify(&self, point: &Point) -> Label {
        let x = match point {
            Point::Scalar(x) => *x,
            other => panic!("threshold hypothesis expects scalar points, got {other:?}"),
        };
        let base = Label::from_sign(x - self.boundary);
        if self.sign >= 0 {
            base
        } else {
            base.flip()
        }
    }

    fn params(&self) -> HypothesisParams {
        HypothesisParams::Threshold {
            sign: self.sign,
            boundary: self.boundary,
        }
    }
}

/// ERM for signed thresholds on the line.
///
/// Conventions, all deterministic:
/// * orientation `sign = +1` (positives to the right) is preferred whenever
///   it is feasible, so all-one-label samples get `+1`;
/// * the boundary is the midpoint of the two inner extremes, or one unit
///   outside the data when a single label is present;
/// * the empty sample yields `sign = +1, boundary = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ThresholdErm;

impl ThresholdErm {
    pub fn new() -> Self {
        Self
    }
}

impl ErmOracle for ThresholdErm {
    fn name(&self) -> &str {
        "threshold"
    }

    fn fit(
        &self,
        sample: &TrainingSequence,
        ledger: &mut CostLedger,
    ) -> Result<Arc<dyn Hypothesis>, ErmError> {
        ledger.arithmetic_ops += sample.len() as u64;
        let mut min_pos = f64::INFINITY;
        let mut max_pos = f64::NEG_INFINITY;
        let mut min_neg = f64::INFINITY;
        let mut max_neg = f64::NEG_INFINITY;
        for ex in sample.iter() {
            let x = match &ex.point {
                Point::Scalar(x) => *x,
                other => {
                    return Err(ErmError::Malformed(format!(
                        "threshold oracle expects scalar points, got {other:?}"
                    )))
                }
            };
            if !x.is_finite() {
                return Err(ErmError::Malformed(format!("non-finite point {x}")));
            }
            match ex.label {
                Label::Plus => {
                    min_pos = min_pos.min(x);
                    max_pos = max_pos.max(x);
                }
                Label::Minus => {
                    min_neg = min_neg.min(x);
                    max_neg = max_neg.max(x);
                }
            }
        }
        let has_pos = min_pos.is_finite();
        let has_neg = min_neg.is_finite();
        let hypothesis = match (has_pos, has_neg) {
            (false, false) => ThresholdHypothesis {
                sign: 1,
                boundary: 0.0,
            },
            (true, false) => ThresholdHypothesis {
                sign: 1,
                boundary: min_pos - 1.0,
            },
            (false, true) => ThresholdHypothesis {
                sign: 1,
                boundary: max_neg + 1.0,
            },
            (true, true) => {
                // sgn(0) = +1 puts the boundary point on the positive side,
                // so feasibility needs strict separation.
                if max_neg < min_pos {
                    ThresholdHypothesis {
                        sign: 1,
                        boundary: 0.5 * (max_neg + min_pos),
                    }
                } else if max_pos < min_neg {
                    ThresholdHypothesis {
                        sign: -1,
                        boundary: 0.5 * (max_pos + min_neg),
                    }
                } else {
                    return Err(ErmError::NotRealizable(format!(
                        "labels interleave: positives span [{min_pos}, {max_pos}], \
                         negatives span [{min_neg}, {max_neg}]"
                    )));
                }
            }
        };
        Ok(Arc::new(hypothesis))
    }
}

/// ERM over an explicit finite hypothesis class, scanned in construction
/// order. Returns the first member consistent with the whole sample, so
/// training cost grows linearly with the position of that member.
pub struct FiniteClassErm {
    hypotheses: Vec<Arc<dyn Hypothesis>>,
}

impl FiniteClassErm {
    /// # Panics
    /// Panics if the class is empty.
    pub fn new(hypotheses: Vec<Arc<dyn Hypothesis>>) -> Self {
        assert!(!hypotheses.is_empty(), "finite class must be nonempty");
        Self { hypotheses }
    }

    pub fn class_size(&self) -> usize {
        self.hypotheses.len()
    }
}

impl ErmOracle for FiniteClassErm {
    fn name(&self) -> &str {
        "finite-class"
    }

    fn fit(
        &self,
        sample: &TrainingSequence,
        ledger: &mut CostLedger,
    ) -> Result<Arc<dyn Hypothesis>, ErmError> {
        for h in &self.hypotheses {
            // Full projection per candidate: consistency checks are charged
            // as arithmetic, never as inference.
            ledger.arithmetic_ops += sample.len() as u64;
            let consistent = sample.iter().all(|ex| h.classify(&ex.point) == ex.label);
            if consistent {
                return Ok(Arc::clone(h));
            }
        }
        Err(ErmError::NotRealizable(format!(
            "no member of the {}-element class is consistent",
            self.hypotheses.len()
        )))
    }
}

/// Linear hypothesis `x -> sgn(<weights, x>)` on vector points.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearHypothesis {
    pub weights: Vec<f64>,
}

impl Hypothesis for LinearHypothesis {
    fn classify(&self, point: &Point) -> Label {
        let v = match point {
            Point::Vector(v) => v,
            other => panic!("linear hypothesis expects vector points, got {other:?}"),
        };
        assert_eq!(v.len(), self.weights.len(), "dimension mismatch");
        let dot: f64 = self.weights.iter().zip(v.iter()).map(|(w, x)| w * x).sum();
        Label::from_sign(dot)
    }

    fn params(&self) -> HypothesisParams {
        HypothesisParams::LinearSeparator {
            weights: self.weights.clone(),
        }
    }
}

/// Full statistics of one perceptron training run.
#[derive(Clone, Debug, Serialize)]
pub struct PerceptronRun {
    pub updates: u64,
    pub passes: u64,
    pub examples_scanned: u64,
    pub weights: Vec<f64>,
}

/// The classic perceptron as an ERM oracle for linearly separable vector
/// data.
///
/// Input conventions: every point is a vector whose last coordinate is
/// exactly 1 (the bias term). Weights start at zero; an update fires on
/// every example with `y * <w, x> <= 0`, so the zero vector updates
/// immediately. Passes repeat in sample order until one pass is clean.
///
/// The caller supplies `margin_floor`, a lower bound on the separation
/// margin of any sample this oracle will see. The pass budget is
/// `10 * ceil(max_norm_sq / margin_floor^2)`; by the classic mistake bound
/// a separable sample converges well inside it, and exceeding it reports
/// [`ErmError::NonConvergence`] instead of looping forever.
#[derive(Clone, Copy, Debug)]
pub struct PerceptronErm {
    margin_floor: f64,
}

impl PerceptronErm {
    /// # Panics
    /// Panics unless `margin_floor` is finite and positive.
    pub fn new(margin_floor: f64) -> Self {
        assert!(
            margin_floor.is_finite() && margin_floor > 0.0,
            "margin floor must be positive"
        );
        Self { margin_floor }
    }

    /// The pass budget for a sample with maximum squared norm
    /// `max_norm_sq`.
    pub fn pass_budget(&self, max_norm_sq: f64) -> u64 {
        10 * (max_norm_sq / (self.margin_floor * self.margin_floor)).ceil() as u64
    }

    /// Trains and returns the full run record (updates, passes, scans,
    /// final weights). `fit` and the helpers below are thin wrappers.
    pub fn train_full(
        &self,
        sample: &TrainingSequence,
        ledger: &mut CostLedger,
    ) -> Result<PerceptronRun, ErmError> {
        if sample.is_empty() {
            return Err(ErmError::Malformed("perceptron needs a nonempty sample".into()));
        }
        let dim = match &sample.get(0).point {
            Point::Vector(v) => v.len(),
            other => {
                return Err(ErmError::Malformed(format!(
                    "perceptron expects vector points, got {other:?}"
                )))
            }
        };
        let mut max_norm_sq: f64 = 0.0;
        for ex in sample.iter() {
            let v = match &ex.point {
                Point::Vector(v) => v,
                other => {
                    return Err(ErmError::Malformed(format!(
                        "perceptron expects vector points, got {other:?}"
                    )))
                }
            };
            if v.len() != dim {
                return Err(ErmError::Malformed(format!(
                    "mixed dimensions: {} and {dim}",
                    v.len()
                )));
            }
            if v[dim - 1] != 1.0 {
                return Err(ErmError::Malformed(format!(
                    "last coordinate must be the constant bias 1, got {}",
                    v[dim - 1]
                )));
            }
            max_norm_sq = max_norm_sq.max(v.iter().map(|x| x * x).sum());
        }
        let budget = self.pass_budget(max_norm_sq);
        let mut weights = vec![0.0_f64; dim];
        let mut updates: u64 = 0;
        let mut passes: u64 = 0;
        let mut scanned: u64 = 0;
        loop {
            if passes >= budget {
                ledger.arithmetic_ops += scanned;
                return Err(ErmError::NonConvergence { updates, passes });
            }
            passes += 1;
            let mut clean = true;
            for ex in sample.iter() {
                scanned += 1;
                let v = match &ex.point {
                    Point::Vector(v) => v,
                    _ => unreachable!("validated above"),
                };
                let y = ex.label.to_f64();
                let dot: f64 = weights.iter().zip(v.iter()).map(|(w, x)| w * x).sum();
                if y * dot <= 0.0 {
                    for (w, x) in weights.iter_mut().zip(v.iter()) {
                        *w += y * x;
                    }
                    updates += 1;
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        ledger.arithmetic_ops += scanned;
        Ok(PerceptronRun {
            updates,
            passes,
            examples_scanned: scanned,
            weights,
        })
    }
}

impl ErmOracle for PerceptronErm {
    fn name(&self) -> &str {
        "perceptron"
    }

    fn fit(
        &self,
        sample: &TrainingSequence,
        ledger: &mut CostLedger,
    ) -> Result<Arc<dyn Hypothesis>, ErmError> {
        let run = self.train_full(sample, ledger)?;
        Ok(Arc::new(LinearHypothesis {
            weights: run.weights,
        }))
    }
}

/// Number of updates the perceptron makes before converging on `sample`.
pub fn perceptron_update_count(
    erm: &PerceptronErm,
    sample: &TrainingSequence,
    ledger: &mut CostLedger,
) -> Result<u64, ErmError> {
    Ok(erm.train_full(sample, ledger)?.updates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabeledExample;

    fn scalar_seq(pts: &[(f64, Label)]) -> TrainingSequence {
        TrainingSequence::from_examples(
            pts.iter().map(|&(x, y)| LabeledExample::scalar(x, y)).collect(),
        )
    }

    fn vec_seq(rows: &[(&[f64], Label)]) -> TrainingSequence {
        TrainingSequence::from_examples(
            rows.iter()
                .map(|&(v, y)| LabeledExample::new(Point::Vector(v.to_vec()), y))
                .collect(),
        )
    }

    #[test]
    fn threshold_midpoint_positive_orientation() {
        let s = scalar_seq(&[
            (0.0, Label::Minus),
            (2.0, Label::Minus),
            (5.0, Label::Plus),
            (9.0, Label::Plus),
        ]);
        let mut ledger = CostLedger::new();
        let h = ThresholdErm::new().train(&s, &mut ledger).unwrap();
        match h.params() {
            HypothesisParams::Threshold { sign, boundary } => {
                assert_eq!(sign, 1);
                assert_eq!(boundary, 3.5);
            }
            other => panic!("unexpected params {other:?}"),
        }
        assert!(s.iter().all(|ex| h.classify(&ex.point) == ex.label));
        assert_eq!(ledger.erm_train_calls, 1);
        assert_eq!(ledger.erm_train_examples, 4);
    }

    #[test]
    fn threshold_negative_orientation() {
        let s = scalar_seq(&[(0.0, Label::Plus), (4.0, Label::Minus)]);
        let h = ThresholdErm::new().train(&s, &mut CostLedger::new()).unwrap();
        match h.params() {
            HypothesisParams::Threshold { sign, boundary } => {
                assert_eq!(sign, -1);
                assert_eq!(boundary, 2.0);
            }
            other => panic!("unexpected params {other:?}"),
        }
        assert!(s.iter().all(|ex| h.classify(&ex.point) == ex.label));
    }

    #[test]
    fn threshold_single_label_conventions() {
        let all_plus = scalar_seq(&[(1.0, Label::Plus), (3.0, Label::Plus)]);
        let h = ThresholdErm::new().train(&all_plus, &mut CostLedger::new()).unwrap();
        assert_eq!(
            h.params(),
            HypothesisParams::Threshold { sign: 1, boundary: 0.0 }
        );
        let all_minus = scalar_seq(&[(1.0, Label::Minus), (3.0, Label::Minus)]);
        let h = ThresholdErm::new().train(&all_minus, &mut CostLedger::new()).unwrap();
        assert_eq!(
            h.params(),
            HypothesisParams::Threshold { sign: 1, boundary: 4.0 }
        );
    }

    #[test]
    fn threshold_rejects_interleaved_labels() {
        let s = scalar_seq(&[
            (0.0, Label::Minus),
            (1.0, Label::Plus),
            (2.0, Label::Minus),
        ]);
        let err = ThresholdErm::new().train(&s, &mut CostLedger::new()).unwrap_err();
        assert!(matches!(err, ErmError::NotRealizable(_)));
    }

    #[test]
    fn threshold_rejects_duplicate_point_conflicting_labels() {
        let s = scalar_seq(&[(1.0, Label::Minus), (1.0, Label::Plus)]);
        assert!(ThresholdErm::new().train(&s, &mut CostLedger::new()).is_err());
    }

    #[test]
    fn finite_class_returns_first_consistent_and_charges_scan() {
        let class: Vec<Arc<dyn Hypothesis>> = vec![
            Arc::new(ThresholdHypothesis { sign: 1, boundary: 10.0 }),
            Arc::new(ThresholdHypothesis { sign: 1, boundary: 5.0 }),
            Arc::new(ThresholdHypothesis { sign: 1, boundary: 5.5 }),
        ];
        let erm = FiniteClassErm::new(class);
        let s = scalar_seq(&[(4.0, Label::Minus), (6.0, Label::Plus)]);
        let mut ledger = CostLedger::new();
        let h = erm.train(&s, &mut ledger).unwrap();
        assert_eq!(
            h.params(),
            HypothesisParams::Threshold { sign: 1, boundary: 5.0 }
        );
        // Two candidates scanned, two examples each.
        assert_eq!(ledger.arithmetic_ops, 4);
        assert_eq!(ledger.inference_calls, 0);
    }

    #[test]
    fn perceptron_learns_separable_sample() {
        let s = vec_seq(&[
            (&[0.0, 1.0], Label::Minus),
            (&[1.0, 1.0], Label::Minus),
            (&[4.0, 1.0], Label::Plus),
            (&[5.0, 1.0], Label::Plus),
        ]);
        let erm = PerceptronErm::new(0.1);
        let mut ledger = CostLedger::new();
        let run = erm.train_full(&s, &mut ledger).unwrap();
        assert!(run.updates >= 1);
        let h = LinearHypothesis { weights: run.weights };
        assert!(s.iter().all(|ex| h.classify(&ex.point) == ex.label));
        assert_eq!(ledger.arithmetic_ops, run.examples_scanned);
    }

    #[test]
    fn perceptron_rejects_missing_bias() {
        let s = vec_seq(&[(&[1.0, 0.5], Label::Plus)]);
        let err = PerceptronErm::new(0.1).train(&s, &mut CostLedger::new()).unwrap_err();
        assert!(matches!(err, ErmError::Malformed(_)));
    }

    #[test]
    fn perceptron_nonconvergence_on_inseparable_sample() {
        // Same point, both labels: no separator exists.
        let s = vec_seq(&[
            (&[1.0, 1.0], Label::Plus),
            (&[1.0, 1.0], Label::Minus),
        ]);
        let err = PerceptronErm::new(0.5).train(&s, &mut CostLedger::new()).unwrap_err();
        assert!(matches!(err, ErmError::NonConvergence { .. }));
    }

    #[test]
    fn predict_accounts_one_inference() {
        let h = ThresholdHypothesis { sign: 1, boundary: 0.0 };
        let mut ledger = CostLedger::new();
        let y = h.predict(&Point::Scalar(1.0), &mut ledger);
        assert_eq!(y, Label::Plus);
        assert_eq!(ledger.inference_calls, 1);
    }

    #[test]
    fn oracles_are_deterministic_on_a_probe() {
        let s = scalar_seq(&[
            (-2.0, Label::Minus),
            (-1.0, Label::Minus),
            (3.0, Label::Plus),
        ]);
        let a = ThresholdErm::new().train(&s, &mut CostLedger::new()).unwrap();
        let b = ThresholdErm::new().train(&s, &mut CostLedger::new()).unwrap();
        assert_eq!(a.params(), b.params());
    }
}
