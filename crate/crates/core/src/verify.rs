//! Runnable property suites.
//!
//! Each suite re-checks a module's load-bearing invariants at interactive
//! cost, independent of the cargo test harness, so a deployed binary can
//! vouch for itself (`verify` subcommand in the CLI). Checks return
//! `Err(reason)` instead of panicking; the caller decides how to render
//! results.

use std::sync::Arc;

use rand::Rng;

use crate::analysis::{
    exact_error, ramp_generalization_bound, uniform_convergence_bound, FiniteUniverse,
};
use crate::boost::{
    adaboost_sample, alpha_for, inverse_cdf, margin_loss_base, BoostConfig, RandomString,
    ScaleProfile, WeightState,
};
use crate::data::{Label, LabeledExample, Point, TrainingSequence};
use crate::erm::{ErmOracle, Hypothesis, PerceptronErm, ThresholdErm, ThresholdHypothesis};
use crate::learner::{train_optimal, LearnerConfig};
use crate::ledger::CostLedger;
use crate::rng::{stream_rng, STREAM_DATASET, STREAM_LEARNER};
use crate::subsample::{enumerate_rows_recursive, extract_row, row_count, row_len, RowSelector};
use crate::vote::{empirical_margin_loss, predict_ensemble, vote_margin, MajorityVote};

/// Outcome of one named check.
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: Result<(), String>,
}

/// Outcome of one suite.
pub struct SuiteResult {
    pub suite: &'static str,
    pub checks: Vec<CheckResult>,
}

impl SuiteResult {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.outcome.is_ok()).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

/// The suites [`run_suite`] knows, in execution order.
pub fn suite_names() -> &'static [&'static str] {
    &["core", "erm", "subsample", "boost", "learner", "analysis"]
}

/// Runs every suite.
pub fn run_all() -> Vec<SuiteResult> {
    suite_names()
        .iter()
        .map(|name| run_suite(name).expect("listed suite must exist"))
        .collect()
}

/// Runs one suite by name; `None` for unknown names.
pub fn run_suite(name: &str) -> Option<SuiteResult> {
    let checks = match name {
        "core" => core_checks(),
        "erm" => erm_checks(),
        "subsample" => subsample_checks(),
        "boost" => boost_checks(),
        "learner" => learner_checks(),
        "analysis" => analysis_checks(),
        _ => return None,
    };
    Some(SuiteResult {
        suite: suite_names().iter().find(|&&n| n == name).copied()?,
        checks,
    })
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(), String>) -> CheckResult {
    CheckResult { name, outcome: f() }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn threshold_sample(m: usize) -> TrainingSequence {
    TrainingSequence::from_examples(
        (0..m)
            .map(|i| {
                let x = i as f64 - m as f64 / 2.0 + 0.5;
                LabeledExample::scalar(x, Label::from_sign(x))
            })
            .collect(),
    )
}

fn committee(boundaries: &[f64]) -> MajorityVote {
    MajorityVote::new(
        boundaries
            .iter()
            .map(|&b| Arc::new(ThresholdHypothesis { sign: 1, boundary: b }) as Arc<dyn Hypothesis>)
            .collect(),
    )
}

fn core_checks() -> Vec<CheckResult> {
    vec![
        check("margin values lie on (2a - t)/t for t <= 6", || {
            for t in 1..=6usize {
                for a in 0..=t {
                    let mut bs = vec![0.0; a];
                    bs.extend(std::iter::repeat(10.0).take(t - a));
                    let vote = committee(&bs);
                    let ex = LabeledExample::scalar(5.0, Label::Plus);
                    let got = vote_margin(&vote, &ex, &mut CostLedger::new());
                    let want = (2 * a as i64 - t as i64) as f64 / t as f64;
                    ensure(got == want, format!("t {t} a {a}: {got} != {want}"))?;
                }
            }
            Ok(())
        }),
        check("boundary margin counts as a violation", || {
            let mut bs = vec![0.0; 7];
            bs.push(10.0);
            let vote = committee(&bs);
            let s = TrainingSequence::from_examples(vec![LabeledExample::scalar(5.0, Label::Plus)]);
            let loss = empirical_margin_loss(&vote, &s, 0.75, &mut CostLedger::new());
            ensure(loss.violations == 1, "margin exactly 3/4 must count")
        }),
        check("loss below 1/m iff zero violations", || {
            let vote = committee(&[0.0, 1.0, 2.0]);
            let s = threshold_sample(10);
            let loss = empirical_margin_loss(&vote, &s, 0.75, &mut CostLedger::new());
            ensure(
                loss.below_one_over_total() == (loss.violations == 0),
                "threshold semantics",
            )
        }),
        check("ledger merge is additive and commutative", || {
            let mut rng = stream_rng(1, 0);
            for _ in 0..50 {
                let mut roll = || CostLedger {
                    erm_train_calls: rng.gen_range(0..100),
                    erm_train_examples: rng.gen_range(0..100),
                    inference_calls: rng.gen_range(0..100),
                    sampler_draws: rng.gen_range(0..100),
                    arithmetic_ops: rng.gen_range(0..100),
                };
                let (a, b) = (roll(), roll());
                ensure(a.merged(&b) == b.merged(&a), "commutativity")?;
                ensure(
                    a.merged(&b).erm_train_calls == a.erm_train_calls + b.erm_train_calls,
                    "additivity",
                )?;
            }
            Ok(())
        }),
        check("ensemble ties resolve to plus", || {
            let vote = committee(&[0.0, 10.0]);
            let label = vote.classify(&Point::Scalar(5.0), &mut CostLedger::new());
            ensure(label == Label::Plus, "tie must be Plus")
        }),
    ]
}

fn erm_checks() -> Vec<CheckResult> {
    vec![
        check("threshold ERM consistent on 200 realizable samples", || {
            let mut rng = stream_rng(7, STREAM_DATASET);
            let erm = ThresholdErm::new();
            for trial in 0..200 {
                let b = rng.gen_range(-5.0..5.0);
                let flip: bool = rng.gen();
                let examples: Vec<LabeledExample> = (0..20)
                    .map(|_| {
                        let x: f64 = rng.gen_range(-10.0..10.0);
                        let base = Label::from_sign(x - b);
                        LabeledExample::scalar(x, if flip { base.flip() } else { base })
                    })
                    .collect();
                let s = TrainingSequence::from_examples(examples);
                let h = erm
                    .train(&s, &mut CostLedger::new())
                    .map_err(|e| format!("trial {trial}: {e}"))?;
                for ex in s.iter() {
                    ensure(
                        h.classify(&ex.point) == ex.label,
                        format!("trial {trial}: inconsistent on {:?}", ex.point),
                    )?;
                }
            }
            Ok(())
        }),
        check("oracle determinism on a fixed probe", || {
            let s = threshold_sample(30);
            let a = ThresholdErm::new().train(&s, &mut CostLedger::new());
            let b = ThresholdErm::new().train(&s, &mut CostLedger::new());
            match (a, b) {
                (Ok(ha), Ok(hb)) => ensure(ha.params() == hb.params(), "params differ"),
                _ => Err("training failed".into()),
            }
        }),
        check("finite-class cost grows with scan position", || {
            use crate::erm::FiniteClassErm;
            let class: Vec<Arc<dyn Hypothesis>> = (0..10)
                .map(|i| {
                    Arc::new(ThresholdHypothesis {
                        sign: 1,
                        boundary: 9.0 - i as f64,
                    }) as Arc<dyn Hypothesis>
                })
                .collect();
            let erm = FiniteClassErm::new(class);
            let mut previous = 0u64;
            // Samples forcing acceptance at deeper scan positions.
            for pos in [0usize, 4, 9] {
                let b = 9.0 - pos as f64;
                let s = TrainingSequence::from_examples(vec![
                    LabeledExample::scalar(b - 0.5, Label::Minus),
                    LabeledExample::scalar(b + 0.5, Label::Plus),
                ]);
                let mut ledger = CostLedger::new();
                erm.train(&s, &mut ledger).map_err(|e| e.to_string())?;
                ensure(
                    ledger.arithmetic_ops >= previous,
                    format!("cost fell at position {pos}"),
                )?;
                previous = ledger.arithmetic_ops;
            }
            Ok(())
        }),
        check("perceptron respects the mistake bound", || {
            // Witness (1, 0): margin 2, max norm^2 = 10, so at most 2
            // updates.
            let s = TrainingSequence::from_examples(vec![
                LabeledExample::new(Point::Vector(vec![-3.0, 1.0]), Label::Minus),
                LabeledExample::new(Point::Vector(vec![-2.0, 1.0]), Label::Minus),
                LabeledExample::new(Point::Vector(vec![2.0, 1.0]), Label::Plus),
                LabeledExample::new(Point::Vector(vec![3.0, 1.0]), Label::Plus),
            ]);
            let erm = PerceptronErm::new(2.0 / 10.0_f64.sqrt());
            let run = erm
                .train_full(&s, &mut CostLedger::new())
                .map_err(|e| e.to_string())?;
            ensure(
                run.updates <= (10.0 / (2.0 / 10.0_f64.sqrt()).powi(2)).ceil() as u64,
                format!("updates {} exceed the bound", run.updates),
            )
        }),
    ]
}

fn subsample_checks() -> Vec<CheckResult> {
    vec![
        check("closed form matches the recursion for k <= 3", || {
            for k in 1..=3usize {
                let s = threshold_sample(6usize.pow(k as u32));
                let rows = enumerate_rows_recursive(&s).map_err(|e| e.to_string())?;
                ensure(rows.len() == row_count(k), format!("row count at k {k}"))?;
                for pos in 0..rows.len() {
                    let mut coords = vec![1u8; k];
                    let mut rem = pos;
                    for j in (0..k).rev() {
                        coords[j] = (rem % 5) as u8 + 1;
                        rem /= 5;
                    }
                    let sel = RowSelector::new(coords).map_err(|e| e.to_string())?;
                    let direct = extract_row(&s, &sel).map_err(|e| e.to_string())?;
                    ensure(
                        direct.store_indices() == rows[pos].store_indices(),
                        format!("row mismatch at k {k} pos {pos}"),
                    )?;
                    ensure(direct.len() == row_len(k), format!("row len at k {k}"))?;
                }
            }
            Ok(())
        }),
        check("every row contains the first element", || {
            let s = threshold_sample(216);
            for row in enumerate_rows_recursive(&s).map_err(|e| e.to_string())? {
                ensure(row.store_indices()[0] == 0, "missing prefix element")?;
            }
            Ok(())
        }),
        check("selector position is a bijection at k = 3", || {
            let mut seen = vec![false; 125];
            for a in 1..=5u8 {
                for b in 1..=5u8 {
                    for c in 1..=5u8 {
                        let p = RowSelector::new(vec![a, b, c])
                            .map_err(|e| e.to_string())?
                            .position();
                        ensure(!seen[p], format!("position {p} repeated"))?;
                        seen[p] = true;
                    }
                }
            }
            ensure(seen.iter().all(|&x| x), "positions not exhaustive")
        }),
    ]
}

fn boost_checks() -> Vec<CheckResult> {
    vec![
        check("inverse cdf equals the linear scan on random inputs", || {
            let mut rng = stream_rng(5, STREAM_DATASET);
            for m in [2usize, 7, 64, 500] {
                let mut state = WeightState::uniform(m);
                // Random reweights to roughen the distribution.
                for _ in 0..3 {
                    let wrong: Vec<bool> = (0..m).map(|_| rng.gen()).collect();
                    state.reweight(&wrong, 1.6, 0.6);
                }
                let c = state.cumulative();
                for _ in 0..1000 {
                    let u: f64 = rng.gen();
                    let fast = inverse_cdf(c, u);
                    let slow = c.iter().position(|&ci| u < ci).unwrap_or(m - 1);
                    ensure(fast == slow, format!("m {m} u {u}: {fast} != {slow}"))?;
                }
            }
            Ok(())
        }),
        check("alpha and contraction base match closed forms", || {
            ensure(
                (alpha_for(0.75, 0.45) - 0.5 * (19.0_f64 / 7.0).ln()).abs() < 1e-15,
                "alpha",
            )?;
            let base = margin_loss_base(0.75, 0.45).map_err(|e| e.to_string())?;
            ensure((base - 0.958_315_708_683_451_1).abs() < 1e-12, "base value")?;
            ensure(base <= 0.96, "base must contract at least 24/25")
        }),
        check("boosting certifies a zero-violation margin", || {
            let sample = threshold_sample(44);
            let config = BoostConfig {
                theta: 0.75,
                gamma: 0.45,
                sample_size_s: 55,
                rounds_n: 150,
                target_t: 76,
                early_stop: false,
                scale: ScaleProfile::desk(),
            };
            let string = RandomString::new(9, config.sample_size_s, config.rounds_n);
            let out = adaboost_sample(
                &sample,
                &ThresholdErm::new(),
                &config,
                &string,
                false,
                &mut CostLedger::new(),
            )
            .map_err(|e| e.to_string())?;
            ensure(!out.fell_back, "run fell back")?;
            ensure(out.margin_violations == Some(0), "violations must be zero")
        }),
        check("each round draws exactly s indices", || {
            let sample = threshold_sample(36);
            let config = BoostConfig {
                theta: 0.75,
                gamma: 0.45,
                sample_size_s: 20,
                rounds_n: 30,
                target_t: 10,
                early_stop: false,
                scale: ScaleProfile::desk(),
            };
            let string = RandomString::new(2, config.sample_size_s, config.rounds_n);
            let mut ledger = CostLedger::new();
            adaboost_sample(
                &sample,
                &ThresholdErm::new(),
                &config,
                &string,
                false,
                &mut ledger,
            )
            .map_err(|e| e.to_string())?;
            ensure(
                ledger.sampler_draws == 30 * 20,
                format!("draws {}", ledger.sampler_draws),
            )
        }),
    ]
}

fn learner_checks() -> Vec<CheckResult> {
    vec![
        check("row draws are uniform (chi-square at k = 2)", || {
            let mut rng = stream_rng(123, STREAM_LEARNER);
            let n = 5000usize;
            let mut counts = [0u64; 25];
            for _ in 0..n {
                counts[RowSelector::sample(2, &mut rng).position()] += 1;
            }
            let expected = n as f64 / 25.0;
            let chi2: f64 = counts
                .iter()
                .map(|&c| {
                    let diff = c as f64 - expected;
                    diff * diff / expected
                })
                .sum();
            // 0.999 quantile of chi-square with 24 degrees of freedom.
            ensure(chi2 < 51.179, format!("chi-square statistic {chi2:.2}"))
        }),
        check("canonical ensemble size matches frozen values", || {
            let c = LearnerConfig::new(0.1, 1, 0);
            ensure(c.canonical_voters(1296) == 2943, "l at m 1296")?;
            ensure(c.canonical_voters(216) == 2306, "l at m 216")?;
            ensure(c.canonical_voters(7776) == 3580, "l at m 7776")
        }),
        check("row cache preserves predictions", || {
            let sample = threshold_sample(36);
            let mut on = LearnerConfig::new(0.1, 1, 11).with_scale(ScaleProfile::desk());
            on.voters_l = Some(50);
            let mut off = on.clone();
            off.cache_rows = false;
            let erm = ThresholdErm::new();
            let a = train_optimal(&sample, &erm, &on).map_err(|e| e.to_string())?;
            let b = train_optimal(&sample, &erm, &off).map_err(|e| e.to_string())?;
            ensure(a.cache_hits > 0, "cache never hit")?;
            for i in -40..=40 {
                let p = Point::Scalar(i as f64 / 2.0);
                let la = predict_ensemble(&a.ensemble, &p, &mut CostLedger::new());
                let lb = predict_ensemble(&b.ensemble, &p, &mut CostLedger::new());
                ensure(la == lb, format!("prediction differs at {p:?}"))?;
            }
            Ok(())
        }),
        check("one ensemble prediction costs exactly l inferences", || {
            let sample = threshold_sample(36);
            let mut config = LearnerConfig::new(0.1, 1, 4).with_scale(ScaleProfile::desk());
            config.voters_l = Some(17);
            let report =
                train_optimal(&sample, &ThresholdErm::new(), &config).map_err(|e| e.to_string())?;
            let mut ledger = CostLedger::new();
            predict_ensemble(&report.ensemble, &Point::Scalar(0.3), &mut ledger);
            ensure(
                ledger.inference_calls == 17,
                format!("inferences {}", ledger.inference_calls),
            )
        }),
    ]
}

fn analysis_checks() -> Vec<CheckResult> {
    vec![
        check("bound evaluators match frozen values", || {
            ensure(
                (uniform_convergence_bound(1, 100, 0.05) - 0.288_169_586_511_021).abs() < 1e-12,
                "uniform convergence",
            )?;
            let ramp = ramp_generalization_bound(1, 1000, 0.1, 0.5, 1.5, 1.0);
            ensure(
                (ramp - 0.256_289_989_404_082_15).abs() < 1e-12,
                "ramp bound",
            )
        }),
        check("bounds are monotone in m and delta", || {
            ensure(
                uniform_convergence_bound(1, 2000, 0.1) < uniform_convergence_bound(1, 500, 0.1),
                "uc in m",
            )?;
            ensure(
                uniform_convergence_bound(1, 500, 0.2) < uniform_convergence_bound(1, 500, 0.1),
                "uc in delta",
            )?;
            ensure(
                ramp_generalization_bound(1, 2000, 0.1, 0.5, 1.5, 1.0)
                    < ramp_generalization_bound(1, 500, 0.1, 0.5, 1.5, 1.0),
                "ramp in m",
            )
        }),
        check("exact error sums the mislabeled mass", || {
            let universe = FiniteUniverse::new(
                vec![Point::Scalar(0.1), Point::Scalar(0.5), Point::Scalar(0.9)],
                vec![0.2, 0.3, 0.5],
                vec![Label::Minus, Label::Minus, Label::Plus],
            )
            .map_err(|e| e.to_string())?;
            let h = ThresholdHypothesis { sign: 1, boundary: 0.3 };
            let err = exact_error(&universe, |p| h.classify(p));
            ensure((err - 0.3).abs() < 1e-15, format!("error {err}"))
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for suite in run_all() {
            assert!(
                suite.all_passed(),
                "suite {} failed: {:?}",
                suite.suite,
                suite
                    .checks
                    .iter()
                    .filter_map(|c| c.outcome.as_ref().err())
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn unknown_suite_is_none() {
        assert!(run_suite("nope").is_none());
        assert_eq!(suite_names().len(), run_all().len());
    }
}
