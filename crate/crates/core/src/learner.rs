//! Training entry points: the voter-sampling learner and three baselines.
//!
//! [`train_optimal`] is the headline learner. Given a sequence of length
//! `m`, it truncates to the largest `6^k` prefix, draws one shared random
//! string for boosting, and assembles an ensemble of `l` voters: each
//! voter comes from boosting the ERM oracle over one uniformly selected
//! subsample row and picking one committee member uniformly. Distinct
//! draws of the same row would rerun an identical boosting pass, so a
//! per-row cache (sound because oracles are deterministic and the string
//! is shared) is on by default.
//!
//! Baselines: [`train_hanneke`] trains the oracle once per 3-of-4
//! recursion row, [`train_bagging`] trains it on independent bootstrap
//! resamples, [`train_plain_erm`] trains it once on the full sequence.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boost::{adaboost_sample, BoostConfig, BoostError, RandomString, ScaleProfile};
use crate::data::TrainingSequence;
use crate::erm::{ErmError, ErmOracle};
use crate::ledger::CostLedger;
use crate::rng::{stream_rng, STREAM_BOOTSTRAP, STREAM_LEARNER};
use crate::subsample::{
    enumerate_rows_hanneke, extract_row, largest_power_of_six_at_most, row_len, RowSelector,
    ShapeError,
};
use crate::vote::{Ensemble, MajorityVote};

/// Errors raised by the training entry points.
#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid learner configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error(transparent)]
    Erm(#[from] ErmError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// Configuration of the voter-sampling learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Confidence parameter in (0, 1).
    pub delta: f64,
    /// VC dimension of the oracle's hypothesis class.
    pub d: usize,
    /// Master seed; every random choice of a run derives from it.
    pub seed: u64,
    /// Ensemble size. `None` selects the canonical
    /// `ceil((3200 / 9) ln(m / (delta (d + ln(1 / delta)))))`.
    pub voters_l: Option<usize>,
    /// Resource scaling for the boosting runs.
    pub scale: ScaleProfile,
    /// Forwarded to [`BoostConfig::early_stop`].
    pub early_stop: bool,
    /// Reuse boosted committees across repeated row draws. Sound because
    /// oracles are deterministic and all runs share one random string.
    pub cache_rows: bool,
}

impl LearnerConfig {
    pub fn new(delta: f64, d: usize, seed: u64) -> Self {
        Self {
            delta,
            d,
            seed,
            voters_l: None,
            scale: ScaleProfile::paper(),
            early_stop: false,
            cache_rows: true,
        }
    }

    pub fn with_scale(mut self, scale: ScaleProfile) -> Self {
        self.scale = scale;
        self
    }

    /// The canonical ensemble size for a sequence of length `m`.
    pub fn canonical_voters(&self, m: usize) -> usize {
        let inner = m as f64 / (self.delta * (self.d as f64 + (1.0 / self.delta).ln()));
        ((3200.0 / 9.0) * inner.ln()).ceil().max(1.0) as usize
    }

    fn validate(&self) -> Result<(), LearnError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(LearnError::BadConfig(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.d == 0 {
            return Err(LearnError::BadConfig("d must be at least 1".into()));
        }
        Ok(())
    }
}

/// One ensemble-voter draw in a [`TrainReport`].
#[derive(Clone, Debug, Serialize)]
pub struct RowBranch {
    /// Row selector drawn for this voter.
    pub w: Vec<u8>,
    /// Committee position drawn for this voter (0-based).
    pub z: usize,
    /// Whether the row's boosting run was answered from the cache.
    pub cache_hit: bool,
    /// Whether that run fell back to full-row ERM.
    pub fell_back: bool,
    /// Accepted rounds of that run.
    pub accepted_rounds: usize,
}

/// Everything a training run produced.
pub struct TrainReport {
    pub ensemble: Ensemble,
    pub ledger: CostLedger,
    /// Boosting runs that fell back to full-sample ERM. Cache hits on a
    /// fallen-back row do not recount.
    pub fallback_count: usize,
    /// Voter draws answered from the row cache.
    pub cache_hits: usize,
    /// Per-voter draw log; empty for the baselines.
    pub rows: Vec<RowBranch>,
    /// Input length and the prefix actually used.
    pub m: usize,
    pub m_effective: usize,
    /// Recursion depth and row length (optimal learner only).
    pub k: usize,
    pub row_size: usize,
    /// Ensemble size.
    pub voters_l: usize,
    /// Derived boosting configuration (optimal learner only).
    pub boost: Option<BoostConfig>,
    pub seed: u64,
}

/// Trains the voter-sampling learner.
///
/// The sequence is truncated to its largest `6^k` prefix (`m_effective`).
/// One random string sized for the top-level sequence is shared by every
/// boosting run; committee targets are sized for the row length. Ledger
/// shape: each voter costs `k + 1` sampler draws for its row and committee
/// pick, plus one boosting run on a cache miss.
pub fn train_optimal(
    sample: &TrainingSequence,
    erm: &dyn ErmOracle,
    config: &LearnerConfig,
) -> Result<TrainReport, LearnError> {
    config.validate()?;
    if sample.is_empty() {
        return Err(LearnError::BadConfig("cannot train on an empty sequence".into()));
    }
    let m = sample.len();
    let (k, m_effective) = largest_power_of_six_at_most(m);
    let effective = sample.prefix_view(m_effective);
    let row_size = row_len(k);
    let voters_l = config
        .voters_l
        .unwrap_or_else(|| config.canonical_voters(m_effective));
    if voters_l == 0 {
        return Err(LearnError::BadConfig("ensemble size must be positive".into()));
    }

    let mut boost =
        BoostConfig::derive(config.d, config.delta, m_effective, row_size, &config.scale)?;
    boost.early_stop = config.early_stop;
    let string = RandomString::new(config.seed, boost.sample_size_s, boost.rounds_n);

    let mut ledger = CostLedger::new();
    let mut rng = stream_rng(config.seed, STREAM_LEARNER);
    let mut cache: HashMap<Vec<u8>, (MajorityVote, bool, usize)> = HashMap::new();
    let mut voters = Vec::with_capacity(voters_l);
    let mut rows = Vec::with_capacity(voters_l);
    let mut fallback_count = 0usize;
    let mut cache_hits = 0usize;

    for _ in 0..voters_l {
        let selector = RowSelector::sample(k, &mut rng);
        // The committee pick is drawn before the cache is consulted, so
        // the draw stream is identical with the cache on or off.
        let z = rng.gen_range(0..boost.target_t);
        ledger.sampler_draws += k as u64 + 1;

        let cached = if config.cache_rows {
            cache.get(selector.coords()).cloned()
        } else {
            None
        };
        let cache_hit = cached.is_some();
        let (vote, fell_back, accepted_rounds) = match cached {
            Some(entry) => entry,
            None => {
                let row = extract_row(&effective, &selector)?;
                let outcome = adaboost_sample(&row, erm, &boost, &string, false, &mut ledger)?;
                if outcome.fell_back {
                    fallback_count += 1;
                }
                let entry = (outcome.vote, outcome.fell_back, outcome.accepted_rounds);
                if config.cache_rows {
                    cache.insert(selector.coords().to_vec(), entry.clone());
                }
                entry
            }
        };
        if cache_hit {
            cache_hits += 1;
        }
        voters.push(vote.voters()[z].clone());
        rows.push(RowBranch {
            w: selector.coords().to_vec(),
            z,
            cache_hit,
            fell_back,
            accepted_rounds,
        });
    }

    Ok(TrainReport {
        ensemble: Ensemble::new(voters),
        ledger,
        fallback_count,
        cache_hits,
        rows,
        m,
        m_effective,
        k,
        row_size,
        voters_l,
        boost: Some(boost),
        seed: config.seed,
    })
}

/// Trains one oracle call per 3-of-4 recursion row and returns the row
/// hypotheses as an ensemble (`3^k` voters for `|sample| = 4^k`).
pub fn train_hanneke(
    sample: &TrainingSequence,
    erm: &dyn ErmOracle,
    seed: u64,
) -> Result<TrainReport, LearnError> {
    let m = sample.len();
    if m == 0 {
        return Err(LearnError::BadConfig("cannot train on an empty sequence".into()));
    }
    // Largest 4^k prefix, mirroring the 6-way truncation policy.
    let mut m_effective = 1usize;
    while m_effective * 4 <= m {
        m_effective *= 4;
    }
    let effective = sample.prefix_view(m_effective);
    let mut ledger = CostLedger::new();
    let mut voters = Vec::new();
    let rows = enumerate_rows_hanneke(&effective)?;
    let row_size = rows.first().map_or(0, TrainingSequence::len);
    for row in &rows {
        voters.push(erm.train(row, &mut ledger)?);
    }
    let voters_l = voters.len();
    Ok(TrainReport {
        ensemble: Ensemble::new(voters),
        ledger,
        fallback_count: 0,
        cache_hits: 0,
        rows: Vec::new(),
        m,
        m_effective,
        k: 0,
        row_size,
        voters_l,
        boost: None,
        seed,
    })
}

/// Trains `ceil(18 ln(2m / delta))` oracle calls on independent bootstrap
/// resamples of size `ceil(frac * m)` and returns them as an ensemble.
/// `frac` must lie in `[0.02, 1]`.
pub fn train_bagging(
    sample: &TrainingSequence,
    erm: &dyn ErmOracle,
    delta: f64,
    frac: f64,
    seed: u64,
) -> Result<TrainReport, LearnError> {
    let m = sample.len();
    if m == 0 {
        return Err(LearnError::BadConfig("cannot train on an empty sequence".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LearnError::BadConfig(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(0.02..=1.0).contains(&frac) {
        return Err(LearnError::BadConfig(format!(
            "bootstrap fraction must lie in [0.02, 1], got {frac}"
        )));
    }
    let n_votes = (18.0 * (2.0 * m as f64 / delta).ln()).ceil() as usize;
    let size = (frac * m as f64).ceil() as usize;
    let mut rng = stream_rng(seed, STREAM_BOOTSTRAP);
    let mut ledger = CostLedger::new();
    let mut voters = Vec::with_capacity(n_votes);
    let mut positions = vec![0usize; size];
    for _ in 0..n_votes {
        for p in positions.iter_mut() {
            *p = rng.gen_range(0..m);
        }
        ledger.sampler_draws += size as u64;
        let bootstrap = sample.view(&positions);
        voters.push(erm.train(&bootstrap, &mut ledger)?);
    }
    let voters_l = voters.len();
    Ok(TrainReport {
        ensemble: Ensemble::new(voters),
        ledger,
        fallback_count: 0,
        cache_hits: 0,
        rows: Vec::new(),
        m,
        m_effective: m,
        k: 0,
        row_size: size,
        voters_l,
        boost: None,
        seed,
    })
}

/// Trains the oracle once on the full sequence; the ensemble has a single
/// voter.
pub fn train_plain_erm(
    sample: &TrainingSequence,
    erm: &dyn ErmOracle,
    seed: u64,
) -> Result<TrainReport, LearnError> {
    let m = sample.len();
    if m == 0 {
        return Err(LearnError::BadConfig("cannot train on an empty sequence".into()));
    }
    let mut ledger = CostLedger::new();
    let voter = erm.train(sample, &mut ledger)?;
    Ok(TrainReport {
        ensemble: Ensemble::new(vec![voter]),
        ledger,
        fallback_count: 0,
        cache_hits: 0,
        rows: Vec::new(),
        m,
        m_effective: m,
        k: 0,
        row_size: m,
        voters_l: 1,
        boost: None,
        seed,
    })
}
