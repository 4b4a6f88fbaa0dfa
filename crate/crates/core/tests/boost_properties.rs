//! Deterministic end-to-end properties of the boosting pass: the exact
//! per-prefix margin-loss contraction, the weight-product identity, and
//! fallback frequency at canonical sizes.

use num_bigint::BigUint;

use subvote_core::boost::{
    adaboost_sample, prefix_margin_violations, BoostConfig, RandomString, ScaleProfile,
};
use subvote_core::data::{Label, LabeledExample, TrainingSequence};
use subvote_core::erm::ThresholdErm;
use subvote_core::ledger::CostLedger;

fn threshold_sample(m: usize) -> TrainingSequence {
    TrainingSequence::from_examples(
        (0..m)
            .map(|i| {
                let x = i as f64 - (m / 2) as f64 + 0.5;
                LabeledExample::scalar(x, Label::from_sign(x))
            })
            .collect(),
    )
}

fn small_config() -> BoostConfig {
    BoostConfig {
        theta: 0.75,
        gamma: 0.45,
        sample_size_s: 55,
        rounds_n: 150,
        target_t: 76,
        early_stop: false,
        scale: ScaleProfile::desk(),
    }
}

/// After `j` appended rounds the exact violation count obeys
/// `viol_j / m <= (24/25)^j`, checked in integer arithmetic.
#[test]
fn prefix_margin_loss_contracts_at_24_over_25() {
    let m = 44;
    let sample = threshold_sample(m);
    let config = small_config();
    let erm = ThresholdErm::new();
    for seed in 0..10u64 {
        let string = RandomString::new(seed, config.sample_size_s, config.rounds_n);
        let mut ledger = CostLedger::new();
        let out = adaboost_sample(&sample, &erm, &config, &string, true, &mut ledger).unwrap();
        assert!(!out.fell_back, "seed {seed} unexpectedly fell back");
        let violations = prefix_margin_violations(&out.vote, &sample, config.theta, &mut ledger);
        assert_eq!(violations.len(), config.target_t);
        let mut pow24 = BigUint::from(1u32);
        let mut pow25 = BigUint::from(1u32);
        let big_m = BigUint::from(m as u64);
        for (idx, &viol) in violations.iter().enumerate() {
            pow24 *= 24u32;
            pow25 *= 25u32;
            assert!(
                BigUint::from(viol) * &pow25 <= &big_m * &pow24,
                "seed {seed}: prefix {} breaks the bound with {viol} violations",
                idx + 1
            );
        }
    }
}

/// `sum_x exp(-y f(x)) / m` equals the product of the accepted rounds'
/// normalizers, where `f` sums `alpha h_q` over every accepted round.
#[test]
fn weight_product_identity_across_seeds() {
    let m = 44;
    let sample = threshold_sample(m);
    let config = small_config();
    let alpha = config.alpha();
    let erm = ThresholdErm::new();
    for seed in 20..30u64 {
        let string = RandomString::new(seed, config.sample_size_s, config.rounds_n);
        let mut ledger = CostLedger::new();
        let out = adaboost_sample(&sample, &erm, &config, &string, true, &mut ledger).unwrap();
        let trajectory = out.trajectory.as_ref().unwrap();
        let z_product: f64 = trajectory
            .rounds
            .iter()
            .filter(|r| r.accepted)
            .map(|r| r.z)
            .product();
        let mut exp_loss = 0.0;
        for i in 0..m {
            let mut signed = 0i64;
            for mask in &trajectory.accepted_wrong_masks {
                signed += if mask[i] { -1 } else { 1 };
            }
            exp_loss += (-alpha * signed as f64).exp();
        }
        exp_loss /= m as f64;
        assert!(
            (exp_loss - z_product).abs() <= 1e-9 * z_product.max(1e-300),
            "seed {seed}: exp loss {exp_loss} vs normalizer product {z_product}"
        );
    }
}

/// At canonical sizes the fallback path never fires: 500 seeded runs on a
/// separable scalar sample all certify.
#[test]
fn no_fallbacks_at_canonical_sizes() {
    let m = 36;
    let sample = threshold_sample(m);
    let config = BoostConfig::derive(1, 0.1, m, m, &ScaleProfile::paper()).unwrap();
    assert_eq!(
        (config.sample_size_s, config.rounds_n, config.target_t),
        (550, 9564, 717)
    );
    let erm = ThresholdErm::new();
    let mut fallbacks = 0usize;
    for seed in 0..500u64 {
        let string = RandomString::new(seed, config.sample_size_s, config.rounds_n);
        let mut ledger = CostLedger::new();
        let out = adaboost_sample(&sample, &erm, &config, &string, false, &mut ledger).unwrap();
        if out.fell_back {
            fallbacks += 1;
        } else {
            assert_eq!(out.margin_violations, Some(0), "seed {seed}");
        }
    }
    assert_eq!(fallbacks, 0);
}
