//! Recursive subsampling of a training sequence into overlapping rows.
//!
//! The 6-way scheme maps a sequence `S` of length `m = 6^k` onto `5^k`
//! rows, each of length `(6^k + 4) / 5`, roughly `m / 5`. The recursion
//! splits `S` into six equal blocks `S_0, ..., S_5` and, for each `i` in
//! `1..=5`, recurses on `(S_0, S_i + T)` with the new block prepended to
//! the carried tail `T`; a sequence shorter than six stops the recursion
//! and emits `S + T` as a row.
//!
//! A row is addressed by a selector `w` in `{1..5}^k`, one coordinate per
//! recursion level. Unwinding the recursion gives the row in closed form:
//! position 1 of `S`, then for `j = k, k-1, ..., 1` the 1-based block
//! `[6^(k-j) * w_j + 1, 6^(k-j) * (w_j + 1)]`. Innermost blocks come first
//! because each level prepends in front of the tail accumulated so far.
//! [`extract_row`] materializes a row in O(row length) directly from this
//! form; [`enumerate_rows_recursive`] runs the recursion literally and is
//! the oracle the closed form is checked against.
//!
//! A 3-of-4 variant ([`enumerate_rows_hanneke`]) splits into four blocks,
//! recurses on the three complements, and stops at length three, giving
//! `3^k` rows of length `(2m + 1) / 3` for `m = 4^k`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::TrainingSequence;

/// Largest recursion depth the explicit enumerations will materialize.
/// 5^6 rows of 9331 indices each is the practical ceiling.
pub const MAX_ENUMERATION_DEPTH: usize = 6;

/// Shape violations raised by the subsampling APIs.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShapeError {
    #[error("sequence length {len} is not 6^{k}")]
    NotPowerOfSix { len: usize, k: usize },
    #[error("sequence length {len} is not a power of 4")]
    NotPowerOfFour { len: usize },
    #[error("selector coordinate {coord} is outside 1..=5")]
    BadSelector { coord: u8 },
    #[error("depth {k} exceeds the enumeration ceiling {max}")]
    DepthTooLarge { k: usize, max: usize },
}

/// A row address: depth `k` and one coordinate per level, each in `1..=5`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowSelector {
    coords: Vec<u8>,
}

impl RowSelector {
    /// Validates that every coordinate lies in `1..=5`.
    pub fn new(coords: Vec<u8>) -> Result<Self, ShapeError> {
        if let Some(&bad) = coords.iter().find(|&&c| !(1..=5).contains(&c)) {
            return Err(ShapeError::BadSelector { coord: bad });
        }
        Ok(Self { coords })
    }

    pub fn k(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u8] {
        &self.coords
    }

    /// The row's 0-based position in enumeration order:
    /// `sum_j (w_j - 1) * 5^(k - j)`. The first coordinate varies slowest.
    pub fn position(&self) -> usize {
        self.coords
            .iter()
            .fold(0usize, |acc, &c| acc * 5 + (c as usize - 1))
    }

    /// A uniform selector of depth `k`, consuming `k` draws from `rng`.
    pub fn sample<R: Rng>(k: usize, rng: &mut R) -> Self {
        let coords = (0..k).map(|_| rng.gen_range(1..=5u8)).collect();
        Self { coords }
    }
}

/// The 1-based closed index intervals making up one row: the `[1, 1]`
/// prefix, then one interval per level in row order (innermost level
/// first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowRanges {
    pub prefix: (usize, usize),
    pub segments: Vec<(usize, usize)>,
}

impl RowRanges {
    /// Total number of indices covered.
    pub fn len(&self) -> usize {
        let seg: usize = self.segments.iter().map(|(lo, hi)| hi - lo + 1).sum();
        seg + (self.prefix.1 - self.prefix.0 + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Number of rows at depth `k` in the 6-way scheme.
pub fn row_count(k: usize) -> usize {
    5usize.pow(k as u32)
}

/// Row length at depth `k`: `(6^k + 4) / 5`.
pub fn row_len(k: usize) -> usize {
    (6usize.pow(k as u32) + 4) / 5
}

/// Depth of the largest power of six no larger than `len`, with the power
/// itself. `len` must be at least 1.
pub fn largest_power_of_six_at_most(len: usize) -> (usize, usize) {
    assert!(len >= 1, "sequence must be nonempty");
    let mut k = 0;
    let mut pow = 1usize;
    while pow * 6 <= len {
        pow *= 6;
        k += 1;
    }
    (k, pow)
}

fn check_power_of_six(len: usize, k: usize) -> Result<(), ShapeError> {
    let expected = 6usize.checked_pow(k as u32);
    if expected != Some(len) {
        return Err(ShapeError::NotPowerOfSix { len, k });
    }
    Ok(())
}

/// The closed-form index intervals of the row addressed by `selector` in a
/// sequence of length `6^k`. O(k) time and space.
pub fn row_ranges(selector: &RowSelector, len: usize) -> Result<RowRanges, ShapeError> {
    let k = selector.k();
    check_power_of_six(len, k)?;
    let mut segments = Vec::with_capacity(k);
    // Row order is innermost first: j = k down to 1, block width 6^(k-j).
    for j in (1..=k).rev() {
        let width = 6usize.pow((k - j) as u32);
        let w = selector.coords()[j - 1] as usize;
        segments.push((width * w + 1, width * (w + 1)));
    }
    Ok(RowRanges {
        prefix: (1, 1),
        segments,
    })
}

/// Materializes the row addressed by `selector` as a view of `sample`,
/// which must have length exactly `6^k`. O(row length).
pub fn extract_row(
    sample: &TrainingSequence,
    selector: &RowSelector,
) -> Result<TrainingSequence, ShapeError> {
    let ranges = row_ranges(selector, sample.len())?;
    let mut positions = Vec::with_capacity(ranges.len());
    positions.push(ranges.prefix.0 - 1);
    for (lo, hi) in &ranges.segments {
        positions.extend((lo - 1)..*hi);
    }
    Ok(sample.view(&positions))
}

/// Splits `sample` into `parts` equal contiguous views. Length must be
/// divisible by `parts`.
fn split_equal(sample: &TrainingSequence, parts: usize) -> Vec<TrainingSequence> {
    let len = sample.len();
    debug_assert_eq!(len % parts, 0);
    let width = len / parts;
    (0..parts)
        .map(|i| sample.range_view(i * width, (i + 1) * width))
        .collect()
}

/// Runs the 6-way recursion literally and returns all `5^k` rows in
/// recursion order (first level's branch varies slowest). This is the
/// oracle [`extract_row`] is validated against; prefer `extract_row` for
/// anything performance-sensitive.
pub fn enumerate_rows_recursive(
    sample: &TrainingSequence,
) -> Result<Vec<TrainingSequence>, ShapeError> {
    let (k, pow) = largest_power_of_six_at_most(sample.len().max(1));
    check_power_of_six(sample.len(), k)?;
    debug_assert_eq!(pow, sample.len());
    if k > MAX_ENUMERATION_DEPTH {
        return Err(ShapeError::DepthTooLarge {
            k,
            max: MAX_ENUMERATION_DEPTH,
        });
    }
    let mut rows = Vec::with_capacity(row_count(k));
    recurse_six(sample, &sample.empty_view(), &mut rows);
    Ok(rows)
}

fn recurse_six(s: &TrainingSequence, t: &TrainingSequence, rows: &mut Vec<TrainingSequence>) {
    if s.len() < 6 {
        rows.push(s.concat(t));
        return;
    }
    let blocks = split_equal(s, 6);
    for i in 1..=5 {
        // The new block goes in front of the tail carried so far.
        recurse_six(&blocks[0], &blocks[i].concat(t), rows);
    }
}

/// Runs the 3-of-4 recursion and returns all `3^k` rows in recursion order,
/// for `|sample| = 4^k` (lengths 1, 2, 3 give the single row `sample`).
/// Each row leaves out one quarter per level and has length `(2m + 1) / 3`.
pub fn enumerate_rows_hanneke(
    sample: &TrainingSequence,
) -> Result<Vec<TrainingSequence>, ShapeError> {
    let len = sample.len();
    let mut k = 0usize;
    let mut pow = 1usize;
    while pow * 4 <= len {
        pow *= 4;
        k += 1;
    }
    if pow != len && len > 3 {
        return Err(ShapeError::NotPowerOfFour { len });
    }
    if k > MAX_ENUMERATION_DEPTH {
        return Err(ShapeError::DepthTooLarge {
            k,
            max: MAX_ENUMERATION_DEPTH,
        });
    }
    let mut rows = Vec::with_capacity(3usize.pow(k as u32));
    recurse_four(sample, &sample.empty_view(), &mut rows);
    Ok(rows)
}

fn recurse_four(s: &TrainingSequence, t: &TrainingSequence, rows: &mut Vec<TrainingSequence>) {
    if s.len() <= 3 {
        rows.push(s.concat(t));
        return;
    }
    let blocks = split_equal(s, 4);
    // Each branch keeps S_0 and carries the two blocks complementary to
    // the dropped one, in ascending index order, ahead of the tail.
    let complements = [[2, 3], [1, 3], [1, 2]];
    for comp in complements {
        let carried = blocks[comp[0]].concat(&blocks[comp[1]]).concat(t);
        recurse_four(&blocks[0], &carried, rows);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Label, LabeledExample};

    fn seq(n: usize) -> TrainingSequence {
        TrainingSequence::from_examples(
            (0..n)
                .map(|i| LabeledExample::scalar(i as f64, Label::Plus))
                .collect(),
        )
    }

    fn sel(coords: &[u8]) -> RowSelector {
        RowSelector::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn selector_validates_coordinates() {
        assert!(RowSelector::new(vec![1, 5, 3]).is_ok());
        assert_eq!(
            RowSelector::new(vec![1, 6]).unwrap_err(),
            ShapeError::BadSelector { coord: 6 }
        );
        assert_eq!(
            RowSelector::new(vec![0]).unwrap_err(),
            ShapeError::BadSelector { coord: 0 }
        );
    }

    #[test]
    fn depth_one_rows() {
        let s = seq(6);
        let rows = enumerate_rows_recursive(&s).unwrap();
        let expected: Vec<Vec<usize>> =
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![0, 4], vec![0, 5]];
        let got: Vec<Vec<usize>> = rows.iter().map(|r| r.store_indices().to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn depth_two_known_rows() {
        // Store positions are 0-based; the frozen rows below are hand
        // traces of the recursion on a length-36 sequence.
        let s = seq(36);
        assert_eq!(
            extract_row(&s, &sel(&[1, 1])).unwrap().store_indices(),
            &[0, 1, 6, 7, 8, 9, 10, 11]
        );
        assert_eq!(
            extract_row(&s, &sel(&[5, 5])).unwrap().store_indices(),
            &[0, 5, 30, 31, 32, 33, 34, 35]
        );
        assert_eq!(
            extract_row(&s, &sel(&[3, 2])).unwrap().store_indices(),
            &[0, 2, 18, 19, 20, 21, 22, 23]
        );
    }

    #[test]
    fn extract_row_matches_recursion_at_every_position() {
        for k in 1..=3usize {
            let s = seq(6usize.pow(k as u32));
            let rows = enumerate_rows_recursive(&s).unwrap();
            assert_eq!(rows.len(), row_count(k));
            for pos in 0..row_count(k) {
                // Decode pos back into selector coordinates, first
                // coordinate slowest.
                let mut coords = vec![1u8; k];
                let mut rem = pos;
                for j in (0..k).rev() {
                    coords[j] = (rem % 5) as u8 + 1;
                    rem /= 5;
                }
                let selector = RowSelector::new(coords).unwrap();
                assert_eq!(selector.position(), pos);
                let direct = extract_row(&s, &selector).unwrap();
                assert_eq!(direct.store_indices(), rows[pos].store_indices());
                assert_eq!(direct.len(), row_len(k));
            }
        }
    }

    #[test]
    fn row_ranges_are_one_based_closed() {
        let ranges = row_ranges(&sel(&[5, 5]), 36).unwrap();
        assert_eq!(ranges.prefix, (1, 1));
        assert_eq!(ranges.segments, vec![(6, 6), (31, 36)]);
        assert_eq!(ranges.len(), 8);
    }

    #[test]
    fn every_row_contains_the_first_element() {
        let s = seq(216);
        for row in enumerate_rows_recursive(&s).unwrap() {
            assert_eq!(row.store_indices()[0], 0);
        }
    }

    #[test]
    fn segments_beyond_prefix_are_disjoint() {
        let ranges = row_ranges(&sel(&[2, 4, 1]), 216).unwrap();
        let mut covered: Vec<usize> = vec![ranges.prefix.0];
        for (lo, hi) in &ranges.segments {
            covered.extend(*lo..=*hi);
        }
        let mut dedup = covered.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), covered.len());
    }

    #[test]
    fn rejects_non_power_lengths() {
        let s = seq(10);
        assert!(matches!(
            enumerate_rows_recursive(&s),
            Err(ShapeError::NotPowerOfSix { len: 10, .. })
        ));
        assert!(extract_row(&seq(36), &sel(&[1])).is_err());
    }

    #[test]
    fn position_is_a_bijection_onto_the_row_index() {
        let mut seen = vec![false; 125];
        for a in 1..=5u8 {
            for b in 1..=5u8 {
                for c in 1..=5u8 {
                    let p = sel(&[a, b, c]).position();
                    assert!(!seen[p]);
                    seen[p] = true;
                }
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn hanneke_m4_gives_three_rows_of_three() {
        let s = seq(4);
        let rows = enumerate_rows_hanneke(&s).unwrap();
        let got: Vec<Vec<usize>> = rows.iter().map(|r| r.store_indices().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]]);
    }

    #[test]
    fn hanneke_row_count_and_len() {
        let s = seq(16);
        let rows = enumerate_rows_hanneke(&s).unwrap();
        assert_eq!(rows.len(), 9);
        for row in &rows {
            assert_eq!(row.len(), 11);
            assert_eq!(row.store_indices()[0], 0);
        }
    }

    #[test]
    fn hanneke_small_sequences_pass_through() {
        for n in 1..=3usize {
            let rows = enumerate_rows_hanneke(&seq(n)).unwrap();
            assert_eq!(rows.len(), 1);
            assert_eq!(rows[0].len(), n);
        }
        assert!(matches!(
            enumerate_rows_hanneke(&seq(8)),
            Err(ShapeError::NotPowerOfFour { len: 8 })
        ));
    }

    #[test]
    fn truncation_helper_finds_largest_power() {
        assert_eq!(largest_power_of_six_at_most(1), (0, 1));
        assert_eq!(largest_power_of_six_at_most(5), (0, 1));
        assert_eq!(largest_power_of_six_at_most(6), (1, 6));
        assert_eq!(largest_power_of_six_at_most(200), (2, 36));
        assert_eq!(largest_power_of_six_at_most(216), (3, 216));
        assert_eq!(largest_power_of_six_at_most(217), (3, 216));
    }
}
