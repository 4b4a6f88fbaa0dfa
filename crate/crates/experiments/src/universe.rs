//! An adversarial linearly separable universe for perceptron training.
//!
//! The universe over `R^3` (last coordinate is the bias 1) consists of
//! `m - 1` negatives `x_i = (0, 1 - i/m^4, 1)` and one positive
//! `x_m = (sqrt(1/m), 1, 1)` carrying probability `min(1/2, 250/m)`, the
//! rest split uniformly. It is separable with margin at least
//! `sqrt(1/(64 m))`, yet bootstraps that see few copies of the positive
//! force the perceptron through at least `4m - 4` updates, which is what
//! makes bagging on it quadratically expensive while boosted subsample
//! calls stay cheap.
//!
//! The second coordinates collapse in double precision once `1/m^4`
//! drops below the spacing of floats near 1, so construction is capped at
//! `m <= 10^4`; the benchmark regime `m = 2200` sits comfortably inside.

use subvote_core::analysis::FiniteUniverse;
use subvote_core::data::{Label, Point, TrainingSequence};
use subvote_core::rng::{stream_rng, STREAM_DATASET};

use crate::ExperimentError;

/// Smallest universe the probability claims make sense for.
pub const MIN_UNIVERSE_M: usize = 10;
/// Largest universe before the negative coordinates collapse in f64.
pub const MAX_UNIVERSE_M: usize = 10_000;

/// Mass placed on the single positive point.
pub fn positive_mass(m: usize) -> f64 {
    (250.0 / m as f64).min(0.5)
}

/// Guaranteed separation margin `sqrt(1/(64 m))`.
pub fn margin_floor(m: usize) -> f64 {
    (1.0 / (64.0 * m as f64)).sqrt()
}

/// Update count forced on the perceptron by an adversarial bootstrap.
pub fn update_floor(m: usize) -> u64 {
    4 * m as u64 - 4
}

/// Mistake-bound cap `max ||x||^2 / margin_floor^2 = 4 * 64 m`.
pub fn novikoff_cap(m: usize) -> u64 {
    256 * m as u64
}

/// The universe together with the parameter it was built from.
#[derive(Clone, Debug)]
pub struct AdversarialPerceptronUniverse {
    m: usize,
    universe: FiniteUniverse,
}

impl AdversarialPerceptronUniverse {
    /// Builds and verifies the universe.
    ///
    /// Verification recomputes the separating witness
    /// `w = (1, -sqrt(1/(2m)), 0)` and checks that every point has
    /// normalized margin at least [`margin_floor`], that every negative
    /// has raw inner product below `-sqrt(1/(4m))`, and that every
    /// squared norm is at most 4.
    pub fn new(m: usize) -> Result<Self, ExperimentError> {
        if !(MIN_UNIVERSE_M..=MAX_UNIVERSE_M).contains(&m) {
            return Err(ExperimentError::BadParams(format!(
                "universe size must lie in [{MIN_UNIVERSE_M}, {MAX_UNIVERSE_M}], got {m}"
            )));
        }
        let mf = m as f64;
        let m4 = mf * mf * mf * mf;
        let mut points = Vec::with_capacity(m);
        let mut labels = Vec::with_capacity(m);
        for i in 1..m {
            points.push(Point::Vector(vec![0.0, 1.0 - i as f64 / m4, 1.0]));
            labels.push(Label::Minus);
        }
        points.push(Point::Vector(vec![(1.0 / mf).sqrt(), 1.0, 1.0]));
        labels.push(Label::Plus);

        let p = positive_mass(m);
        let mut probs = vec![(1.0 - p) / (m - 1) as f64; m - 1];
        probs.push(p);

        let witness = [1.0, -(1.0 / (2.0 * mf)).sqrt(), 0.0];
        let witness_norm = (1.0 + 1.0 / (2.0 * mf)).sqrt();
        let floor = margin_floor(m);
        let raw_negative_cap = -(1.0 / (4.0 * mf)).sqrt();
        for (point, label) in points.iter().zip(&labels) {
            let v = match point {
                Point::Vector(v) => v,
                _ => unreachable!(),
            };
            let norm_sq: f64 = v.iter().map(|x| x * x).sum();
            if norm_sq > 4.0 {
                return Err(ExperimentError::BadParams(format!(
                    "squared norm {norm_sq} exceeds 4"
                )));
            }
            let dot: f64 = witness.iter().zip(v.iter()).map(|(w, x)| w * x).sum();
            if *label == Label::Minus && dot >= raw_negative_cap {
                return Err(ExperimentError::BadParams(format!(
                    "negative point has witness inner product {dot}, expected below {raw_negative_cap}"
                )));
            }
            let margin = label.to_f64() * dot / witness_norm;
            if margin < floor {
                return Err(ExperimentError::BadParams(format!(
                    "witness margin {margin} falls below the floor {floor}"
                )));
            }
        }

        let universe = FiniteUniverse::new(points, probs, labels)?;
        Ok(Self { m, universe })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn universe(&self) -> &FiniteUniverse {
        &self.universe
    }

    pub fn into_universe(self) -> FiniteUniverse {
        self.universe
    }
}

/// Builds the verified universe and returns it bare.
pub fn build_adversarial_universe(m: usize) -> Result<FiniteUniverse, ExperimentError> {
    Ok(AdversarialPerceptronUniverse::new(m)?.into_universe())
}

/// Draws `m` labeled examples i.i.d. from `universe`, deterministically
/// in `seed`. The draw stream depends only on the seed, so datasets of
/// different lengths under one seed share a prefix.
pub fn sample_dataset(universe: &FiniteUniverse, m: usize, seed: u64) -> TrainingSequence {
    let mut rng = stream_rng(seed, STREAM_DATASET);
    universe.sample(m, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(point: &Point) -> &[f64] {
        match point {
            Point::Vector(v) => v,
            other => panic!("expected vector point, got {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_sizes() {
        assert!(AdversarialPerceptronUniverse::new(9).is_err());
        assert!(AdversarialPerceptronUniverse::new(10_001).is_err());
        assert!(AdversarialPerceptronUniverse::new(10).is_ok());
        assert!(AdversarialPerceptronUniverse::new(10_000).is_ok());
    }

    #[test]
    fn positive_mass_is_capped_then_250_over_m() {
        assert_eq!(positive_mass(100), 0.5);
        assert_eq!(positive_mass(500), 0.5);
        assert_eq!(positive_mass(2200), 250.0 / 2200.0);
        let u = AdversarialPerceptronUniverse::new(2200).unwrap();
        assert_eq!(u.universe().probs()[2199], 250.0 / 2200.0);
        assert_eq!(u.universe().labels()[2199], Label::Plus);
    }

    #[test]
    fn inner_product_with_positive_is_two_minus_i_over_m4() {
        for m in [50usize, 2200] {
            let u = AdversarialPerceptronUniverse::new(m).unwrap();
            let points = u.universe().points();
            let xm = coords(&points[m - 1]);
            let m4 = (m as f64).powi(4);
            for i in [1usize, m / 2, m - 1] {
                let xi = coords(&points[i - 1]);
                let dot: f64 = xi.iter().zip(xm.iter()).map(|(a, b)| a * b).sum();
                assert!(
                    (dot - (2.0 - i as f64 / m4)).abs() <= 1e-12,
                    "m {m} i {i}: {dot}"
                );
            }
        }
    }

    #[test]
    fn norms_and_witness_margins_hold_across_sizes() {
        for m in [10usize, 500, 2200, 10_000] {
            let u = AdversarialPerceptronUniverse::new(m).unwrap();
            let witness = [1.0, -(1.0 / (2.0 * m as f64)).sqrt(), 0.0];
            let witness_norm = (1.0 + 1.0 / (2.0 * m as f64)).sqrt();
            let floor = margin_floor(m);
            for (point, label) in u.universe().points().iter().zip(u.universe().labels()) {
                let v = coords(point);
                assert!(v.iter().map(|x| x * x).sum::<f64>() <= 4.0);
                let dot: f64 = witness.iter().zip(v.iter()).map(|(w, x)| w * x).sum();
                assert!(label.to_f64() * dot / witness_norm >= floor);
            }
        }
    }

    #[test]
    fn update_floor_and_cap_match_the_benchmark_regime() {
        assert_eq!(update_floor(2200), 8796);
        assert_eq!(novikoff_cap(2200), 563_200);
    }

    #[test]
    fn datasets_are_seed_deterministic_and_seed_sensitive() {
        let universe = build_adversarial_universe(2200).unwrap();
        let a = sample_dataset(&universe, 300, 7);
        let b = sample_dataset(&universe, 300, 7);
        assert_eq!(a.len(), 300);
        assert!(a.iter().eq(b.iter()));
        let c = sample_dataset(&universe, 300, 8);
        assert!(!a.iter().eq(c.iter()));
    }

    #[test]
    fn positive_counts_concentrate_around_250() {
        let universe = build_adversarial_universe(2200).unwrap();
        let slack = 3.0 * 250.0_f64.sqrt();
        for seed in 0..30u64 {
            let data = sample_dataset(&universe, 2200, seed);
            let count = data.iter().filter(|ex| ex.label == Label::Plus).count() as f64;
            assert!(
                (count - 250.0).abs() <= slack,
                "seed {seed}: {count} positives"
            );
        }
    }

    #[test]
    fn point_mass_universe_samples_copies() {
        let universe = FiniteUniverse::new(
            vec![Point::Scalar(2.5)],
            vec![1.0],
            vec![Label::Plus],
        )
        .unwrap();
        let data = sample_dataset(&universe, 12, 3);
        assert_eq!(data.len(), 12);
        assert!(data
            .iter()
            .all(|ex| ex.point == Point::Scalar(2.5) && ex.label == Label::Plus));
    }
}
