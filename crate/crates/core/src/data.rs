//! Labeled examples and shared views over a training sequence.
//!
//! A [`TrainingSequence`] is an ordered view into an immutable backing store
//! of examples. Views are cheap to clone and compose: subsampling schemes
//! produce thousands of overlapping rows over one store without copying a
//! single example. Positions within a view are 0-based; `store_indices`
//! exposes the view's positions in the backing store, which is what the
//! subsampling identities are stated in.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A domain point. Hypothesis classes fix which variant they accept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Point {
    /// A point on the real line, for threshold classes.
    Scalar(f64),
    /// A point in R^n, for linear classes. Conventionally the last
    /// coordinate is a constant 1 bias term.
    Vector(Vec<f64>),
    /// An index into some finite universe.
    Index(usize),
}

/// A binary label. The crate-wide tie rule is `sign(0) = +1`, applied
/// everywhere a real-valued score is converted to a label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Minus,
    Plus,
}

impl Label {
    /// Label of a real score: nonnegative scores (including exact zero)
    /// map to `Plus`.
    pub fn from_sign(score: f64) -> Self {
        if score >= 0.0 {
            Label::Plus
        } else {
            Label::Minus
        }
    }

    /// The label as +1.0 or -1.0.
    pub fn to_f64(self) -> f64 {
        match self {
            Label::Plus => 1.0,
            Label::Minus => -1.0,
        }
    }

    /// The label as +1 or -1.
    pub fn to_i8(self) -> i8 {
        match self {
            Label::Plus => 1,
            Label::Minus => -1,
        }
    }

    /// The opposite label.
    pub fn flip(self) -> Self {
        match self {
            Label::Plus => Label::Minus,
            Label::Minus => Label::Plus,
        }
    }
}

impl From<Label> for i8 {
    fn from(label: Label) -> i8 {
        label.to_i8()
    }
}

impl TryFrom<i8> for Label {
    type Error = String;

    fn try_from(value: i8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Label::Plus),
            -1 => Ok(Label::Minus),
            other => Err(format!("label must be +1 or -1, got {other}")),
        }
    }
}

/// A point together with its binary label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub point: Point,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(point: Point, label: Label) -> Self {
        Self { point, label }
    }

    /// Convenience constructor for scalar points.
    pub fn scalar(x: f64, label: Label) -> Self {
        Self::new(Point::Scalar(x), label)
    }
}

/// An ordered, possibly repeating view into a shared store of examples.
///
/// Cloning is O(1). `view` composes: a view of a view indexes through both
/// levels, so row extraction on a truncated sequence addresses the original
/// store correctly.
#[derive(Clone, Debug)]
pub struct TrainingSequence {
    store: Arc<[LabeledExample]>,
    indices: Arc<[usize]>,
}

impl TrainingSequence {
    /// A sequence backed by a fresh store, viewing it in order.
    pub fn from_examples(examples: Vec<LabeledExample>) -> Self {
        let store: Arc<[LabeledExample]> = examples.into();
        let indices: Arc<[usize]> = (0..store.len()).collect();
        Self { store, indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The example at view position `i` (0-based).
    ///
    /// # Panics
    /// Panics if `i >= self.len()`.
    pub fn get(&self, i: usize) -> &LabeledExample {
        &self.store[self.indices[i]]
    }

    /// Iterates the examples in view order.
    pub fn iter(&self) -> impl Iterator<Item = &LabeledExample> + '_ {
        self.indices.iter().map(move |&ix| &self.store[ix])
    }

    /// The backing-store index of each view position.
    pub fn store_indices(&self) -> &[usize] {
        &self.indices
    }

    /// The shared backing store.
    pub fn store(&self) -> &Arc<[LabeledExample]> {
        &self.store
    }

    /// A sub-view selecting `positions` (0-based, repeats allowed) of this
    /// view, in the given order.
    ///
    /// # Panics
    /// Panics if any position is out of bounds.
    pub fn view(&self, positions: &[usize]) -> Self {
        let indices: Arc<[usize]> = positions.iter().map(|&p| self.indices[p]).collect();
        Self {
            store: Arc::clone(&self.store),
            indices,
        }
    }

    /// The view of the first `len` positions.
    ///
    /// # Panics
    /// Panics if `len > self.len()`.
    pub fn prefix_view(&self, len: usize) -> Self {
        assert!(len <= self.len(), "prefix longer than sequence");
        let indices: Arc<[usize]> = self.indices[..len].into();
        Self {
            store: Arc::clone(&self.store),
            indices,
        }
    }

    /// The view of positions `start..end` (half-open).
    ///
    /// # Panics
    /// Panics if the range is out of bounds.
    pub fn range_view(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len(), "range out of bounds");
        let indices: Arc<[usize]> = self.indices[start..end].into();
        Self {
            store: Arc::clone(&self.store),
            indices,
        }
    }

    /// An empty view over the same store.
    pub fn empty_view(&self) -> Self {
        Self {
            store: Arc::clone(&self.store),
            indices: Arc::from([]),
        }
    }

    /// This view followed by `other`. Both must share a backing store;
    /// concatenation never copies examples.
    ///
    /// # Panics
    /// Panics if the stores differ.
    pub fn concat(&self, other: &TrainingSequence) -> Self {
        assert!(
            Arc::ptr_eq(&self.store, &other.store),
            "concat requires views over the same store"
        );
        let indices: Arc<[usize]> = self
            .indices
            .iter()
            .chain(other.indices.iter())
            .copied()
            .collect();
        Self {
            store: Arc::clone(&self.store),
            indices,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(n: usize) -> TrainingSequence {
        TrainingSequence::from_examples(
            (0..n)
                .map(|i| LabeledExample::scalar(i as f64, Label::Plus))
                .collect(),
        )
    }

    #[test]
    fn identity_view_indices() {
        let s = seq(5);
        assert_eq!(s.store_indices(), &[0, 1, 2, 3, 4]);
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn view_composes() {
        let s = seq(10);
        let odd = s.view(&[1, 3, 5, 7, 9]);
        let inner = odd.view(&[0, 2, 4]);
        assert_eq!(inner.store_indices(), &[1, 5, 9]);
        assert_eq!(inner.get(1).point, Point::Scalar(5.0));
    }

    #[test]
    fn view_allows_repeats() {
        let s = seq(3);
        let v = s.view(&[2, 2, 0]);
        assert_eq!(v.store_indices(), &[2, 2, 0]);
    }

    #[test]
    fn concat_preserves_order() {
        let s = seq(6);
        let a = s.view(&[0, 2]);
        let b = s.view(&[5]);
        let ab = a.concat(&b);
        assert_eq!(ab.store_indices(), &[0, 2, 5]);
    }

    #[test]
    #[should_panic(expected = "same store")]
    fn concat_rejects_foreign_store() {
        let a = seq(2);
        let b = seq(2);
        let _ = a.concat(&b);
    }

    #[test]
    fn label_sign_rule() {
        assert_eq!(Label::from_sign(0.0), Label::Plus);
        assert_eq!(Label::from_sign(1e-300), Label::Plus);
        assert_eq!(Label::from_sign(-1e-300), Label::Minus);
    }

    #[test]
    fn label_serializes_as_integer() {
        let j = serde_json::to_string(&Label::Minus).unwrap();
        assert_eq!(j, "-1");
        let back: Label = serde_json::from_str("1").unwrap();
        assert_eq!(back, Label::Plus);
        assert!(serde_json::from_str::<Label>("0").is_err());
    }
}
