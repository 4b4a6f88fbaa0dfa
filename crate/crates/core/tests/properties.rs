//! Property tests over randomized inputs for the sampling and margin
//! primitives.

use proptest::prelude::*;
use std::sync::Arc;

use subvote_core::boost::{inverse_cdf, WeightState};
use subvote_core::data::{Label, LabeledExample, TrainingSequence};
use subvote_core::erm::{Hypothesis, ThresholdHypothesis};
use subvote_core::ledger::CostLedger;
use subvote_core::vote::{empirical_margin_loss, vote_margin, MajorityVote};

fn linear_scan(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

proptest! {
    #[test]
    fn inverse_cdf_matches_linear_scan(
        raw in prop::collection::vec(0.0_f64..10.0, 1..80),
        us in prop::collection::vec(0.0_f64..1.0, 1..40),
    ) {
        // Build a genuine distribution, allowing zero-mass entries.
        let total: f64 = raw.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        let mut cumulative = Vec::with_capacity(raw.len());
        let mut acc = 0.0;
        for &w in &raw {
            acc += w / total;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        for &u in &us {
            prop_assert_eq!(inverse_cdf(&cumulative, u), linear_scan(&cumulative, u));
        }
        // u = 0 lands on the first positive-mass entry.
        let first = inverse_cdf(&cumulative, 0.0);
        prop_assert!(cumulative[first] > 0.0);
        prop_assert!(first == 0 || cumulative[first - 1] == 0.0);
    }

    #[test]
    fn reweight_keeps_a_distribution(
        m in 1usize..60,
        flags in prop::collection::vec(any::<bool>(), 60),
        up in 1.0_f64..3.0,
        down in 0.1_f64..1.0,
    ) {
        let mut state = WeightState::uniform(m);
        let wrong = &flags[..m];
        let z = state.reweight(wrong, up, down);
        prop_assert!(z > 0.0);
        let total: f64 = state.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        let c = state.cumulative();
        prop_assert_eq!(*c.last().unwrap(), 1.0);
        for pair in c.windows(2) {
            prop_assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn margins_lie_on_the_lattice(
        t in 1usize..=6,
        correct_mask in prop::collection::vec(any::<bool>(), 6),
        x in -100.0_f64..100.0,
    ) {
        // Voter i is correct iff its flag is set: boundary below x for a
        // Plus-labeled example, above otherwise.
        let example = LabeledExample::scalar(x, Label::Plus);
        let voters: Vec<Arc<dyn Hypothesis>> = correct_mask[..t]
            .iter()
            .map(|&ok| {
                let boundary = if ok { x - 1.0 } else { x + 1.0 };
                Arc::new(ThresholdHypothesis { sign: 1, boundary }) as Arc<dyn Hypothesis>
            })
            .collect();
        let vote = MajorityVote::new(voters);
        let margin = vote_margin(&vote, &example, &mut CostLedger::new());
        let a = correct_mask[..t].iter().filter(|&&ok| ok).count() as i64;
        prop_assert_eq!(margin, (2 * a - t as i64) as f64 / t as f64);
    }

    #[test]
    fn loss_below_one_over_m_iff_no_violations(
        boundaries in prop::collection::vec(-5.0_f64..5.0, 1..7),
        xs in prop::collection::vec(-10.0_f64..10.0, 1..30),
        theta in prop::sample::select(vec![0.0_f64, 0.25, 0.5, 0.75]),
    ) {
        let vote = MajorityVote::new(
            boundaries
                .iter()
                .map(|&b| Arc::new(ThresholdHypothesis { sign: 1, boundary: b }) as Arc<dyn Hypothesis>)
                .collect(),
        );
        let sample = TrainingSequence::from_examples(
            xs.iter().map(|&x| LabeledExample::scalar(x, Label::from_sign(x))).collect(),
        );
        let loss = empirical_margin_loss(&vote, &sample, theta, &mut CostLedger::new());
        prop_assert_eq!(loss.total, xs.len() as u64);
        prop_assert_eq!(loss.below_one_over_total(), loss.violations == 0);
        prop_assert_eq!(
            loss.as_f64() < 1.0 / xs.len() as f64,
            loss.violations == 0
        );
    }
}
