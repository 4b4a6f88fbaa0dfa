//! Exact error evaluation and generalization-bound calculators.
//!
//! Experiments in this workspace avoid held-out test sets: the data
//! distribution is an explicit [`FiniteUniverse`], so the true error of any
//! classifier is a finite weighted sum computed exactly. The bound
//! evaluators are plain formulas, kept separate from the learners so
//! comparisons between measured error and predicted error stay honest.

use rand::Rng;
use thiserror::Error;

use crate::data::{Label, LabeledExample, Point, TrainingSequence};
use crate::vote::MajorityVote;

/// Errors raised by the analysis APIs.
#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid universe: {0}")]
    BadUniverse(String),
    #[error("computation too large: {0}")]
    TooLarge(String),
}

/// A finite labeled distribution: points, their probabilities, and the
/// target concept's label for each point.
#[derive(Clone, Debug)]
pub struct FiniteUniverse {
    points: Vec<Point>,
    probs: Vec<f64>,
    labels: Vec<Label>,
    cumulative: Vec<f64>,
}

impl FiniteUniverse {
    /// Probabilities must be nonnegative and sum to 1 within 1e-12.
    pub fn new(
        points: Vec<Point>,
        probs: Vec<f64>,
        labels: Vec<Label>,
    ) -> Result<Self, AnalysisError> {
        if points.is_empty() {
            return Err(AnalysisError::BadUniverse("universe is empty".into()));
        }
        if points.len() != probs.len() || points.len() != labels.len() {
            return Err(AnalysisError::BadUniverse(format!(
                "length mismatch: {} points, {} probs, {} labels",
                points.len(),
                probs.len(),
                labels.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(AnalysisError::BadUniverse(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(AnalysisError::BadUniverse(format!(
                "probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            points,
            probs,
            labels,
            cumulative,
        })
    }

    /// A uniform grid of `n` scalar points in (0, 1), labeled by sign of
    /// `x - boundary`. With an irrational boundary no grid point is ever
    /// exactly on it.
    pub fn threshold_grid(n: usize, boundary: f64) -> Result<Self, AnalysisError> {
        if n == 0 {
            return Err(AnalysisError::BadUniverse("grid needs at least one point".into()));
        }
        let mut points = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            points.push(Point::Scalar(x));
            labels.push(Label::from_sign(x - boundary));
        }
        Self::new(points, vec![1.0 / n as f64; n], labels)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// The labeled example at universe position `i`.
    pub fn example(&self, i: usize) -> LabeledExample {
        LabeledExample::new(self.points[i].clone(), self.labels[i])
    }

    /// Draws `m` i.i.d. examples, consuming exactly `m` uniform draws.
    pub fn sample<R: Rng>(&self, m: usize, rng: &mut R) -> TrainingSequence {
        let examples = (0..m)
            .map(|_| {
                let u = rng.gen::<f64>();
                let i = self
                    .cumulative
                    .partition_point(|&c| c <= u)
                    .min(self.len() - 1);
                self.example(i)
            })
            .collect();
        TrainingSequence::from_examples(examples)
    }
}

/// The exact true error of `predict` under the universe: the probability
/// mass of points it mislabels.
pub fn exact_error<F>(universe: &FiniteUniverse, mut predict: F) -> f64
where
    F: FnMut(&Point) -> Label,
{
    universe
        .points
        .iter()
        .zip(&universe.probs)
        .zip(&universe.labels)
        .filter(|((pt, _), &label)| predict(pt) != label)
        .map(|((_, &p), _)| p)
        .sum()
}

/// Classic uniform-convergence error bound for consistent learners:
/// `2 (d log2(2 e m / d) + log2(2 / delta)) / m`.
pub fn uniform_convergence_bound(d: usize, m: usize, delta: f64) -> f64 {
    let d = d as f64;
    let m = m as f64;
    2.0 * (d * (2.0 * std::f64::consts::E * m / d).log2() + (2.0 / delta).log2()) / m
}

/// Margin-based generalization bound for voting classifiers: a voter
/// committee whose empirical `xi * gamma`-margin loss is zero has true
/// error at most
/// `c * sqrt(2 d / (((xi - 1) gamma)^2 m)) + sqrt(2 ln(2 / delta) / m)`.
/// The ramp between margins `gamma` and `xi * gamma` has Lipschitz
/// constant `1 / ((xi - 1) gamma)`, which is why it enters squared.
pub fn ramp_generalization_bound(
    d: usize,
    m: usize,
    delta: f64,
    gamma: f64,
    xi: f64,
    c: f64,
) -> f64 {
    let slope = (xi - 1.0) * gamma;
    let slack = c * (2.0 * d as f64 / (slope * slope * m as f64)).sqrt();
    let conf = (2.0 * (2.0 / delta).ln() / m as f64).sqrt();
    slack + conf
}

/// Exact probability mass of points on which fewer than 3/4 of the row
/// committees reach a 3/4 majority of correct voters. This is the quantity
/// a majority-of-majorities argument would need to control, evaluated by
/// brute force; committees are capped at 125 (depth-3 enumeration).
pub fn exact_majority_of_majorities_failure(
    universe: &FiniteUniverse,
    committees: &[MajorityVote],
) -> Result<f64, AnalysisError> {
    if committees.is_empty() {
        return Err(AnalysisError::BadUniverse("no committees given".into()));
    }
    if committees.len() > 125 {
        return Err(AnalysisError::TooLarge(format!(
            "{} committees exceed the 125-committee cap",
            committees.len()
        )));
    }
    let rows = committees.len();
    let mut mass = 0.0;
    for ((pt, &p), &label) in universe
        .points
        .iter()
        .zip(&universe.probs)
        .zip(&universe.labels)
    {
        let mut good_rows = 0usize;
        for committee in committees {
            let t = committee.t();
            let correct = committee
                .voters()
                .iter()
                .filter(|v| v.classify(pt) == label)
                .count();
            // At least 3/4 of the committee correct.
            if 4 * correct >= 3 * t {
                good_rows += 1;
            }
        }
        if 4 * good_rows < 3 * rows {
            mass += p;
        }
    }
    Ok(mass)
}
