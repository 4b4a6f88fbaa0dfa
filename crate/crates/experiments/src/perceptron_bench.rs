//! Training-cost benchmark on the adversarial universe.
//!
//! Bagging trains `ceil(18 ln(2m/delta))` perceptrons on bootstraps of
//! `0.02 m` examples; bootstraps that catch only a few copies of the
//! positive point force at least `4m - 4` updates each, so a bagging run
//! costs on the order of `m^2` unit operations. The boosted baseline
//! trains perceptrons on `550 d`-sized draws whose update counts stay
//! under the mistake-bound cap `256 m`. The report quantifies both.
//!
//! Unit operations for the quadratic claim are proxied by updates plus
//! examples scanned, since pass scans dominate the perceptron's real
//! cost; the report states the proxy alongside the numbers.

use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use subvote_core::boost::{adaboost_sample, BoostConfig, RandomString, ScaleProfile};
use subvote_core::erm::{
    ErmError, ErmOracle, Hypothesis, LinearHypothesis, PerceptronErm, PerceptronRun,
};
use subvote_core::data::TrainingSequence;
use subvote_core::ledger::CostLedger;
use subvote_core::learner::train_bagging;

use crate::universe::{
    build_adversarial_universe, margin_floor, novikoff_cap, sample_dataset, update_floor,
};
use crate::ExperimentError;

/// Confidence used to size the bagging vote.
pub const BENCH_DELTA: f64 = 0.1;
/// Bootstrap fraction of the bagging baseline.
pub const BENCH_FRAC: f64 = 0.02;
/// VC dimension of planes with bias, sizing the boosted draws at `550 d`.
pub const BENCH_D: usize = 4;
/// Round budget of the boosted run.
pub const BENCH_ROUNDS: usize = 60;
/// Committee target of the boosted run.
pub const BENCH_TARGET: usize = 40;
/// Denominator `c` in the quadratic cost threshold `m^2 / c`.
pub const QUADRATIC_C: u64 = 4;

/// An ERM oracle that trains the perceptron and keeps every run record.
pub struct RecordingPerceptron {
    inner: PerceptronErm,
    runs: Mutex<Vec<PerceptronRun>>,
}

impl RecordingPerceptron {
    pub fn new(margin_floor: f64) -> Self {
        Self {
            inner: PerceptronErm::new(margin_floor),
            runs: Mutex::new(Vec::new()),
        }
    }

    /// Drains the recorded runs in call order.
    pub fn take_runs(&self) -> Vec<PerceptronRun> {
        std::mem::take(&mut *self.runs.lock().unwrap())
    }
}

impl ErmOracle for RecordingPerceptron {
    fn name(&self) -> &str {
        "perceptron-recording"
    }

    fn fit(
        &self,
        sample: &TrainingSequence,
        ledger: &mut CostLedger,
    ) -> Result<Arc<dyn Hypothesis>, ErmError> {
        let run = self.inner.train_full(sample, ledger)?;
        let hypothesis: Arc<dyn Hypothesis> = Arc::new(LinearHypothesis {
            weights: run.weights.clone(),
        });
        self.runs.lock().unwrap().push(run);
        Ok(hypothesis)
    }
}

/// The boosted run's configuration: canonical margins, `550 d` draws.
pub fn bench_boost_config() -> BoostConfig {
    BoostConfig {
        theta: 0.75,
        gamma: 0.45,
        sample_size_s: 550 * BENCH_D,
        rounds_n: BENCH_ROUNDS,
        target_t: BENCH_TARGET,
        early_stop: false,
        scale: ScaleProfile {
            name: "bench".into(),
            s_mult: 1.0,
            n_mult: 1.0,
            t_mult: 1.0,
        },
    }
}

/// Measurements from one trial (one dataset draw).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Updates of the first bagging bootstrap's perceptron run.
    pub first_bootstrap_updates: u64,
    /// Bagging calls whose updates reached the `4m - 4` floor.
    pub bootstraps_at_floor: usize,
    pub bagging_calls: usize,
    pub bagging_total_updates: u64,
    pub bagging_total_passes: u64,
    pub bagging_total_scans: u64,
    /// Updates + scans, the unit-operation proxy.
    pub bagging_cost_proxy: u64,
    /// Per-call updates inside the boosted run, in call order.
    pub boosted_call_updates: Vec<u64>,
    pub boosted_total_scans: u64,
    /// Whether the boosted run replaced its committee by the fallback.
    pub fell_back: bool,
}

/// Aggregate benchmark report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostReport {
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub delta: f64,
    pub bagging_frac: f64,
    /// `4m - 4`.
    pub update_floor: u64,
    /// `256 m`.
    pub novikoff_cap: u64,
    /// `m^2 / c` with the chosen `c`.
    pub quadratic_threshold: u64,
    pub quadratic_c: u64,
    /// States what "unit operations" means in this report.
    pub cost_proxy: String,
    pub records: Vec<TrialRecord>,
    /// Ledgers merged additively over all trials.
    pub bagging_ledger: CostLedger,
    pub boosted_ledger: CostLedger,
    /// Fraction of trials whose first bootstrap hit the update floor.
    pub first_bootstrap_floor_fraction: f64,
    /// Fraction of trials whose bagging cost proxy reached `m^2 / c`.
    pub quadratic_fraction: f64,
    /// Median over trials of the bagging trial-total updates.
    pub median_bagging_updates: f64,
    /// Median over all boosted ERM calls of per-call updates.
    pub median_boosted_call_updates: f64,
    /// The former over the latter.
    pub update_ratio: f64,
    pub all_boosted_within_cap: bool,
    pub wall_ms: u64,
}

fn median(values: &mut [u64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] + values[n / 2]) as f64 / 2.0
    }
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs the benchmark: `trials` independent datasets of `m` draws, a full
/// bagging run and a full boosted run on each.
pub fn run_perceptron_complexity(
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<CostReport, ExperimentError> {
    if m < 2200 {
        return Err(ExperimentError::BadParams(format!(
            "the benchmark regime needs m >= 2200, got {m}"
        )));
    }
    if trials == 0 {
        return Err(ExperimentError::BadParams("need at least one trial".into()));
    }
    let started = Instant::now();
    let universe = build_adversarial_universe(m)?;
    let floor = update_floor(m);
    let cap = novikoff_cap(m);
    let config = bench_boost_config();

    let mut records = Vec::with_capacity(trials);
    let mut bagging_ledger = CostLedger::new();
    let mut boosted_ledger = CostLedger::new();
    for trial in 0..trials {
        let ts = trial_seed(seed, trial);
        let sample = sample_dataset(&universe, m, ts);

        let recorder = RecordingPerceptron::new(margin_floor(m));
        let report = train_bagging(&sample, &recorder, BENCH_DELTA, BENCH_FRAC, ts)?;
        bagging_ledger.merge(&report.ledger);
        let bagging_runs = recorder.take_runs();
        let first_bootstrap_updates = bagging_runs[0].updates;
        let bootstraps_at_floor =
            bagging_runs.iter().filter(|r| r.updates >= floor).count();
        let bagging_total_updates: u64 = bagging_runs.iter().map(|r| r.updates).sum();
        let bagging_total_passes: u64 = bagging_runs.iter().map(|r| r.passes).sum();
        let bagging_total_scans: u64 =
            bagging_runs.iter().map(|r| r.examples_scanned).sum();

        let boost_recorder = RecordingPerceptron::new(margin_floor(m));
        let mut ledger = CostLedger::new();
        let string = RandomString::new(ts, config.sample_size_s, config.rounds_n);
        let outcome =
            adaboost_sample(&sample, &boost_recorder, &config, &string, false, &mut ledger)?;
        boosted_ledger.merge(&ledger);
        let boosted_runs = boost_recorder.take_runs();

        records.push(TrialRecord {
            trial,
            first_bootstrap_updates,
            bootstraps_at_floor,
            bagging_calls: bagging_runs.len(),
            bagging_total_updates,
            bagging_total_passes,
            bagging_total_scans,
            bagging_cost_proxy: bagging_total_updates + bagging_total_scans,
            boosted_call_updates: boosted_runs.iter().map(|r| r.updates).collect(),
            boosted_total_scans: boosted_runs.iter().map(|r| r.examples_scanned).sum(),
            fell_back: outcome.fell_back,
        });
    }

    let quadratic_threshold = (m as u64) * (m as u64) / QUADRATIC_C;
    let first_hits = records
        .iter()
        .filter(|r| r.first_bootstrap_updates >= floor)
        .count();
    let quadratic_hits = records
        .iter()
        .filter(|r| r.bagging_cost_proxy >= quadratic_threshold)
        .count();
    let mut bagging_totals: Vec<u64> =
        records.iter().map(|r| r.bagging_total_updates).collect();
    let mut boosted_calls: Vec<u64> = records
        .iter()
        .flat_map(|r| r.boosted_call_updates.iter().copied())
        .collect();
    let median_bagging_updates = median(&mut bagging_totals);
    let median_boosted_call_updates = median(&mut boosted_calls);
    let all_boosted_within_cap = records
        .iter()
        .all(|r| r.boosted_call_updates.iter().all(|&u| u <= cap));

    Ok(CostReport {
        m,
        trials,
        seed,
        delta: BENCH_DELTA,
        bagging_frac: BENCH_FRAC,
        update_floor: floor,
        novikoff_cap: cap,
        quadratic_threshold,
        quadratic_c: QUADRATIC_C,
        cost_proxy: "unit operations = perceptron updates + examples scanned".into(),
        records,
        bagging_ledger,
        boosted_ledger,
        first_bootstrap_floor_fraction: first_hits as f64 / trials as f64,
        quadratic_fraction: quadratic_hits as f64 / trials as f64,
        median_bagging_updates,
        median_boosted_call_updates,
        update_ratio: median_bagging_updates / median_boosted_call_updates,
        all_boosted_within_cap,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}
