//! Subsampled boosting with exact margin certification.
//!
//! One boosting run receives a sample of length `m`, an ERM oracle, and a
//! pre-drawn random string of `n` blocks of `s` unit draws. Each round
//! converts its block into `s` sample indices through the inverse CDF of
//! the current weighting, trains the oracle on that small draw only, and
//! measures the trained voter's weighted error exactly over all `m`
//! examples. Rounds whose error is at most `1/2 - gamma` are accepted:
//! they reweight with a fixed step `alpha` and, while fewer than `t`
//! voters have been collected, contribute their voter to the committee.
//! Rejected rounds change nothing at all.
//!
//! A run succeeds when `t` voters were collected and the committee's
//! empirical `theta`-margin loss over the full sample is below `1/m`,
//! which for a loss with denominator `m` means exactly zero violations.
//! Otherwise the run falls back to training the oracle once on the full
//! sample and returns that hypothesis cloned `t` times, so the caller
//! always receives a `t`-voter committee.
//!
//! The fixed step gives a deterministic certificate: after `j` accepted
//! rounds the empirical margin loss is at most `base^j`, where
//! [`margin_loss_base`] is below 24/25 at the canonical `theta = 3/4`,
//! `gamma = 9/20`. The certificate is checked, not assumed: see
//! [`prefix_margin_violations`].

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::TrainingSequence;
use crate::erm::{ErmError, ErmOracle, Hypothesis};
use crate::ledger::CostLedger;
use crate::rng::{stream_rng, STREAM_RANDOM_STRING};
use crate::vote::{empirical_margin_loss, margin_at_most, MajorityVote};

/// Errors raised by the boosting APIs.
#[derive(Debug, Error)]
pub enum BoostError {
    #[error("invalid boosting parameters: {0}")]
    BadParams(String),
    #[error("random string mismatch: {0}")]
    StringMismatch(String),
    #[error("random string exhausted: needed {needed} blocks, have {available}")]
    StreamExhausted { needed: usize, available: usize },
    #[error(transparent)]
    Erm(#[from] ErmError),
}

/// Multipliers applied to the canonical resource formulas. The paper-scale
/// profile is the identity; the desk profile shrinks subsample size, round
/// budget, and committee size to amounts a laptop-scale experiment can
/// afford while keeping the certification machinery intact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleProfile {
    pub name: String,
    /// Multiplier on the subsample size `550 d`.
    pub s_mult: f64,
    /// Multiplier on the round budget `6 ceil(200 ln(8m/delta))`.
    pub n_mult: f64,
    /// Multiplier on the committee target `200 ln m`.
    pub t_mult: f64,
}

impl ScaleProfile {
    /// Canonical resource amounts, unscaled.
    pub fn paper() -> Self {
        Self {
            name: "paper".into(),
            s_mult: 1.0,
            n_mult: 1.0,
            t_mult: 1.0,
        }
    }

    /// Reduced amounts for interactive experiments. The committee target
    /// stays large enough that the per-round contraction still drives the
    /// certified margin loss below `1/m` in the common case.
    pub fn desk() -> Self {
        Self {
            name: "desk".into(),
            s_mult: 0.1,
            n_mult: 0.02,
            t_mult: 0.1,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "paper" => Some(Self::paper()),
            "desk" => Some(Self::desk()),
            _ => None,
        }
    }
}

/// Resource parameters of one boosting run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    /// Margin level certified over the sample. Canonical: 3/4.
    pub theta: f64,
    /// Weighted-error edge demanded of accepted rounds. Canonical: 9/20.
    pub gamma: f64,
    /// Examples drawn per round.
    pub sample_size_s: usize,
    /// Rounds run (equals the number of blocks consumed from the string).
    pub rounds_n: usize,
    /// Committee size collected before certification.
    pub target_t: usize,
    /// Stop drawing once `target_t` voters are collected instead of
    /// running all `rounds_n` rounds. Off by default: the reference
    /// procedure consumes its whole string, and later accepted rounds
    /// still reweight even though they no longer contribute voters.
    pub early_stop: bool,
    /// The profile the sizes were derived under, echoed into reports.
    pub scale: ScaleProfile,
}

impl BoostConfig {
    /// Derives the canonical sizes for VC dimension `d` and confidence
    /// `delta`, scaled by `scale`.
    ///
    /// `m_top` sizes the round budget (it is the length of the sequence
    /// the enclosing learner saw and determines how much random string one
    /// run may consume); `m_vote` sizes the committee target and is the
    /// length of the sample the run actually boosts over. A standalone run
    /// passes the same `m` for both.
    pub fn derive(
        d: usize,
        delta: f64,
        m_top: usize,
        m_vote: usize,
        scale: &ScaleProfile,
    ) -> Result<Self, BoostError> {
        if d == 0 {
            return Err(BoostError::BadParams("d must be at least 1".into()));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(BoostError::BadParams(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        if m_top == 0 || m_vote == 0 {
            return Err(BoostError::BadParams("sample sizes must be positive".into()));
        }
        let s = (scale.s_mult * 550.0 * d as f64).ceil().max(1.0) as usize;
        let inner = (200.0 * (8.0 * m_top as f64 / delta).ln()).ceil();
        let n = (scale.n_mult * 6.0 * inner).ceil().max(1.0) as usize;
        let t = (scale.t_mult * 200.0 * (m_vote as f64).ln()).ceil().max(1.0) as usize;
        let config = Self {
            theta: 0.75,
            gamma: 0.45,
            sample_size_s: s,
            rounds_n: n,
            target_t: t,
            early_stop: false,
            scale: scale.clone(),
        };
        config.validate()?;
        Ok(config)
    }

    /// The fixed reweighting step, positive exactly when `theta < 2 gamma`.
    pub fn alpha(&self) -> f64 {
        alpha_for(self.theta, self.gamma)
    }

    pub fn validate(&self) -> Result<(), BoostError> {
        if !(self.theta > 0.0 && self.theta < 2.0 * self.gamma && 2.0 * self.gamma < 1.0) {
            return Err(BoostError::BadParams(format!(
                "need 0 < theta < 2 gamma < 1, got theta {} gamma {}",
                self.theta, self.gamma
            )));
        }
        if self.sample_size_s == 0 {
            return Err(BoostError::BadParams("sample_size_s must be positive".into()));
        }
        if self.target_t == 0 {
            return Err(BoostError::BadParams("target_t must be positive".into()));
        }
        if self.rounds_n < self.target_t {
            return Err(BoostError::BadParams(format!(
                "round budget {} cannot reach committee target {}",
                self.rounds_n, self.target_t
            )));
        }
        Ok(())
    }
}

/// `1/2 ln((1 + 2 gamma) / (1 - 2 gamma)) - 1/2 ln((1 + theta) / (1 - theta))`.
pub fn alpha_for(theta: f64, gamma: f64) -> f64 {
    0.5 * ((1.0 + 2.0 * gamma) / (1.0 - 2.0 * gamma)).ln()
        - 0.5 * ((1.0 + theta) / (1.0 - theta)).ln()
}

/// Per-accepted-round contraction factor of the certified margin loss:
/// `e^((theta - 1) alpha) (1/2 + gamma) + e^((theta + 1) alpha) (1/2 - gamma)`.
///
/// Requires `0 < theta < 2 gamma < 1`; at the canonical constants the value
/// is below 24/25.
pub fn margin_loss_base(theta: f64, gamma: f64) -> Result<f64, BoostError> {
    if !(theta > 0.0 && theta < 2.0 * gamma && 2.0 * gamma < 1.0) {
        return Err(BoostError::BadParams(format!(
            "need 0 < theta < 2 gamma < 1, got theta {theta} gamma {gamma}"
        )));
    }
    let alpha = alpha_for(theta, gamma);
    Ok(((theta - 1.0) * alpha).exp() * (0.5 + gamma)
        + ((theta + 1.0) * alpha).exp() * (0.5 - gamma))
}

/// Certified bound on the empirical `theta`-margin loss after `j` accepted
/// rounds: `margin_loss_base^j`.
pub fn margin_loss_bound(theta: f64, gamma: f64, j: u32) -> Result<f64, BoostError> {
    Ok(margin_loss_base(theta, gamma)?.powi(j as i32))
}

/// Probability that a full run still lacks an accepted round budget, as
/// `(83/100)^n`. Underflows to zero for large `n`; use
/// [`round_success_tail_ln`] when the magnitude matters.
pub fn round_success_tail(n: u64) -> f64 {
    round_success_tail_ln(n).exp()
}

/// Natural log of [`round_success_tail`]: `n ln(83/100)`.
pub fn round_success_tail_ln(n: u64) -> f64 {
    n as f64 * (0.83_f64).ln()
}

/// The boosting weight distribution and its cumulative form.
#[derive(Clone, Debug)]
pub struct WeightState {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    last_z: f64,
}

impl WeightState {
    /// The uniform distribution over `m` points.
    ///
    /// # Panics
    /// Panics if `m` is zero.
    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "weight state over an empty sample");
        let w = 1.0 / m as f64;
        let mut state = Self {
            weights: vec![w; m],
            cumulative: vec![0.0; m],
            last_z: 1.0,
        };
        state.rebuild_cumulative();
        state
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nondecreasing, ends at exactly 1.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Normalizer of the most recent reweight, 1 before any reweight.
    pub fn last_z(&self) -> f64 {
        self.last_z
    }

    /// Total weight on the flagged positions.
    pub fn weighted_error(&self, wrong: &[bool]) -> f64 {
        self.weights
            .iter()
            .zip(wrong)
            .filter(|(_, &bad)| bad)
            .map(|(w, _)| w)
            .sum()
    }

    /// Applies the multiplier `up` to flagged positions and `down` to the
    /// rest, renormalizes, and returns the normalizer
    /// `Z = sum_j D_j * mult_j`.
    pub fn reweight(&mut self, wrong: &[bool], up: f64, down: f64) -> f64 {
        assert_eq!(wrong.len(), self.weights.len());
        let mut z = 0.0;
        for (w, &bad) in self.weights.iter_mut().zip(wrong) {
            let mult = if bad { up } else { down };
            *w *= mult;
            z += *w;
        }
        let inv = 1.0 / z;
        for w in &mut self.weights {
            *w *= inv;
        }
        self.rebuild_cumulative();
        self.last_z = z;
        z
    }

    fn rebuild_cumulative(&mut self) {
        let mut acc = 0.0;
        let total: f64 = self.weights.iter().sum();
        let inv = 1.0 / total;
        for (c, w) in self.cumulative.iter_mut().zip(&self.weights) {
            acc += w;
            *c = acc * inv;
        }
        // Pin the top so every u in [0, 1) lands inside.
        *self.cumulative.last_mut().unwrap() = 1.0;
    }
}

/// The unique 0-based index `l` with `C[l-1] <= u < C[l]` (reading
/// `C[-1] = 0`), found by binary search. Draws `u >= C[last]` clamp to the
/// last index; with the top pinned to 1 that only happens on degenerate
/// input.
///
/// # Panics
/// Panics on an empty cumulative vector.
pub fn inverse_cdf(cumulative: &[f64], u: f64) -> usize {
    assert!(!cumulative.is_empty(), "inverse cdf of an empty distribution");
    cumulative
        .partition_point(|&c| c <= u)
        .min(cumulative.len() - 1)
}

/// A lazily generated random string: `n_blocks` blocks of `block_len`
/// draws, each uniform in `[0, 1)`. The whole string is a pure function of
/// the seed, so re-iterating yields the identical sequence and runs that
/// share a string literally share its draws.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomString {
    pub seed: u64,
    pub block_len: usize,
    pub n_blocks: usize,
}

impl RandomString {
    pub fn new(seed: u64, block_len: usize, n_blocks: usize) -> Self {
        Self {
            seed,
            block_len,
            n_blocks,
        }
    }

    /// Iterates the blocks from the beginning.
    pub fn blocks(&self) -> Blocks {
        Blocks {
            rng: stream_rng(self.seed, STREAM_RANDOM_STRING),
            block_len: self.block_len,
            remaining: self.n_blocks,
        }
    }
}

/// Iterator over a [`RandomString`]'s blocks.
pub struct Blocks {
    rng: ChaCha8Rng,
    block_len: usize,
    remaining: usize,
}

impl Iterator for Blocks {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some((0..self.block_len).map(|_| self.rng.gen::<f64>()).collect())
    }
}

/// What happened in one round.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RoundRecord {
    /// Weighted error of the round's trained voter over the full sample.
    pub weighted_error: f64,
    /// Whether the error cleared `1/2 - gamma` (boundary clears).
    pub accepted: bool,
    /// Whether the voter joined the committee (first `t` accepted rounds).
    pub appended: bool,
    /// Reweighting normalizer; 1 for rejected rounds, which leave the
    /// weights untouched.
    pub z: f64,
}

/// Optional per-round telemetry of a boosting run.
#[derive(Clone, Debug, Default)]
pub struct BoostTrajectory {
    pub rounds: Vec<RoundRecord>,
    /// For each accepted round in order, which sample positions its voter
    /// got wrong. Rejected rounds contribute nothing here.
    pub accepted_wrong_masks: Vec<Vec<bool>>,
}

/// Result of one boosting run: always a `t`-voter committee.
#[derive(Debug)]
pub struct BoostOutcome {
    pub vote: MajorityVote,
    /// True when the committee is `t` clones of a full-sample ERM
    /// hypothesis instead of `t` certified boosted voters.
    pub fell_back: bool,
    /// Accepted rounds over the whole run (may exceed `t`).
    pub accepted_rounds: usize,
    /// Rounds executed; equals `rounds_n` unless early stop is on.
    pub rounds_run: usize,
    /// Margin violations found by certification, if it ran (it runs only
    /// when `t` voters were collected).
    pub margin_violations: Option<u64>,
    pub trajectory: Option<BoostTrajectory>,
}

/// Runs one boosting pass over `sample`.
///
/// Ledger accounting per round: `s` sampler draws, one accounted ERM call
/// on exactly `s` examples, `m` accounted inferences for the exact weighted
/// error, and coarse arithmetic for search probes and weight maintenance.
/// Certification adds `t * m` inferences; a fallback adds one ERM call on
/// `m` examples.
pub fn adaboost_sample(
    sample: &TrainingSequence,
    erm: &dyn ErmOracle,
    config: &BoostConfig,
    string: &RandomString,
    collect_trajectory: bool,
    ledger: &mut CostLedger,
) -> Result<BoostOutcome, BoostError> {
    config.validate()?;
    let m = sample.len();
    if m == 0 {
        return Err(BoostError::BadParams("cannot boost an empty sample".into()));
    }
    if string.block_len != config.sample_size_s {
        return Err(BoostError::StringMismatch(format!(
            "block length {} differs from sample_size_s {}",
            string.block_len, config.sample_size_s
        )));
    }
    if string.n_blocks < config.rounds_n {
        return Err(BoostError::StreamExhausted {
            needed: config.rounds_n,
            available: string.n_blocks,
        });
    }

    let s = config.sample_size_s;
    let t = config.target_t;
    let alpha = config.alpha();
    // The only two multipliers reweighting ever needs.
    let up = alpha.exp();
    let down = (-alpha).exp();
    let probe_cost = (usize::BITS - m.leading_zeros()) as u64;

    let mut state = WeightState::uniform(m);
    let mut voters: Vec<Arc<dyn Hypothesis>> = Vec::with_capacity(t);
    let mut accepted_rounds = 0usize;
    let mut rounds_run = 0usize;
    let mut trajectory = collect_trajectory.then(BoostTrajectory::default);

    let mut positions = vec![0usize; s];
    for block in string.blocks().take(config.rounds_n) {
        rounds_run += 1;
        for (pos, &u) in positions.iter_mut().zip(&block) {
            *pos = inverse_cdf(state.cumulative(), u);
        }
        ledger.sampler_draws += s as u64;
        ledger.arithmetic_ops += s as u64 * probe_cost;

        let draw = sample.view(&positions);
        let voter = erm.train(&draw, ledger)?;

        let mut wrong = vec![false; m];
        let mut weighted_error = 0.0;
        for (j, ex) in sample.iter().enumerate() {
            if voter.predict(&ex.point, ledger) != ex.label {
                wrong[j] = true;
                weighted_error += state.weights()[j];
            }
        }
        ledger.arithmetic_ops += m as u64;

        let accepted = weighted_error <= 0.5 - config.gamma;
        if accepted {
            accepted_rounds += 1;
            let appended = accepted_rounds <= t;
            if appended {
                voters.push(voter);
            }
            // Accepted rounds past the target still reweight; the
            // committee is already full, so they cannot change the output,
            // but the reference procedure performs them.
            let z = state.reweight(&wrong, up, down);
            ledger.arithmetic_ops += 3 * m as u64;
            if let Some(tr) = trajectory.as_mut() {
                tr.rounds.push(RoundRecord {
                    weighted_error,
                    accepted: true,
                    appended,
                    z,
                });
                tr.accepted_wrong_masks.push(wrong);
            }
        } else if let Some(tr) = trajectory.as_mut() {
            // Rejected: zero step, weights bitwise unchanged.
            tr.rounds.push(RoundRecord {
                weighted_error,
                accepted: false,
                appended: false,
                z: 1.0,
            });
        }

        if config.early_stop && accepted_rounds >= t {
            break;
        }
    }

    if accepted_rounds >= t {
        debug_assert_eq!(voters.len(), t);
        let vote = MajorityVote::new(voters);
        let loss = empirical_margin_loss(&vote, sample, config.theta, ledger);
        if loss.below_one_over_total() {
            return Ok(BoostOutcome {
                vote,
                fell_back: false,
                accepted_rounds,
                rounds_run,
                margin_violations: Some(loss.violations),
                trajectory,
            });
        }
        let fallback = erm.train(sample, ledger)?;
        return Ok(BoostOutcome {
            vote: MajorityVote::new(vec![fallback; t]),
            fell_back: true,
            accepted_rounds,
            rounds_run,
            margin_violations: Some(loss.violations),
            trajectory,
        });
    }

    let fallback = erm.train(sample, ledger)?;
    Ok(BoostOutcome {
        vote: MajorityVote::new(vec![fallback; t]),
        fell_back: true,
        accepted_rounds,
        rounds_run,
        margin_violations: None,
        trajectory,
    })
}

/// For each committee prefix `f_j = majority(h_1..h_j)`, the number of
/// sample examples whose prefix margin is at most `theta`, computed
/// incrementally in O(t m) with the same exact integer comparison as
/// [`empirical_margin_loss`]. Entry `j - 1` corresponds to prefix length
/// `j`. Costs `t * m` inferences.
pub fn prefix_margin_violations(
    vote: &MajorityVote,
    sample: &TrainingSequence,
    theta: f64,
    ledger: &mut CostLedger,
) -> Vec<u64> {
    let m = sample.len();
    let t = vote.t();
    let mut correct = vec![0i64; m];
    let mut out = Vec::with_capacity(t);
    for (j, voter) in vote.voters().iter().enumerate() {
        let prefix_len = (j + 1) as i64;
        let mut violations = 0u64;
        for (cnt, ex) in correct.iter_mut().zip(sample.iter()) {
            if voter.predict(&ex.point, ledger) == ex.label {
                *cnt += 1;
            }
            if margin_at_most(*cnt, prefix_len, theta) {
                violations += 1;
            }
        }
        out.push(violations);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Label, LabeledExample};
    use crate::erm::ThresholdErm;

    const CANON_ALPHA: f64 = 0.499_264_415_055_563_74;
    const CANON_BASE: f64 = 0.958_315_708_683_451_1;

    fn threshold_sample(m: usize) -> TrainingSequence {
        // Negatives below 0, positives above: x_i = i - (m/2) + 0.5.
        TrainingSequence::from_examples(
            (0..m)
                .map(|i| {
                    let x = i as f64 - m as f64 / 2.0 + 0.5;
                    LabeledExample::scalar(x, Label::from_sign(x))
                })
                .collect(),
        )
    }

    /// Sizes calibrated so threshold boosting on a few dozen points
    /// certifies without fallback: per-round loss factor is about 0.94 and
    /// 0.94^76 is well below 1/44.
    fn small_config() -> BoostConfig {
        let config = BoostConfig {
            theta: 0.75,
            gamma: 0.45,
            sample_size_s: 55,
            rounds_n: 150,
            target_t: 76,
            early_stop: false,
            scale: ScaleProfile::desk(),
        };
        config.validate().unwrap();
        config
    }

    #[test]
    fn alpha_matches_closed_form() {
        let alpha = alpha_for(0.75, 0.45);
        assert!((alpha - 0.5 * (19.0_f64 / 7.0).ln()).abs() < 1e-15);
        assert!((alpha - CANON_ALPHA).abs() < 1e-15);
    }

    #[test]
    fn base_matches_frozen_value_and_is_contractive() {
        let base = margin_loss_base(0.75, 0.45).unwrap();
        assert!((base - CANON_BASE).abs() < 1e-15);
        assert!(base < 24.0 / 25.0);
        assert!(margin_loss_base(0.9, 0.45).is_err());
        assert!(margin_loss_bound(0.75, 0.45, 2).unwrap() > 0.0);
    }

    #[test]
    fn derive_reproduces_canonical_sizes() {
        let paper = ScaleProfile::paper();
        let c36 = BoostConfig::derive(1, 0.1, 36, 36, &paper).unwrap();
        assert_eq!(c36.sample_size_s, 550);
        assert_eq!(c36.rounds_n, 9564);
        assert_eq!(c36.target_t, 717);
        let c216 = BoostConfig::derive(1, 0.1, 216, 216, &paper).unwrap();
        assert_eq!(c216.rounds_n, 11712);
        assert_eq!(c216.target_t, 1076);
        let desk = ScaleProfile::desk();
        let d = BoostConfig::derive(1, 0.1, 7776, 1556, &desk).unwrap();
        assert_eq!(d.sample_size_s, 55);
        assert_eq!(d.rounds_n, 321);
        assert_eq!(d.target_t, 147);
    }

    #[test]
    fn inverse_cdf_agrees_with_linear_scan() {
        let c = [0.1, 0.1, 0.4, 0.9, 1.0];
        let scan = |u: f64| {
            c.iter()
                .position(|&ci| u < ci)
                .unwrap_or(c.len() - 1)
        };
        for &u in &[0.0, 0.05, 0.1, 0.3999, 0.4, 0.89, 0.9, 0.999, 1.0] {
            assert_eq!(inverse_cdf(&c, u), scan(u), "u = {u}");
        }
    }

    #[test]
    fn inverse_cdf_skips_zero_weight_entries() {
        // Entry 1 has zero mass: C repeats. No draw may land on it.
        let c = [0.5, 0.5, 1.0];
        assert_eq!(inverse_cdf(&c, 0.5), 2);
        assert_eq!(inverse_cdf(&c, 0.499999), 0);
    }

    #[test]
    fn random_string_is_replayable() {
        let s = RandomString::new(42, 7, 5);
        let a: Vec<Vec<f64>> = s.blocks().collect();
        let b: Vec<Vec<f64>> = s.blocks().collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|blk| blk.len() == 7));
        assert!(a.iter().flatten().all(|&u| (0.0..1.0).contains(&u)));
        let other = RandomString::new(43, 7, 5);
        assert_ne!(a, other.blocks().collect::<Vec<_>>());
    }

    #[test]
    fn reweight_reports_normalizer_and_keeps_distribution() {
        let mut st = WeightState::uniform(4);
        let wrong = [true, false, false, true];
        let z = st.reweight(&wrong, 2.0, 0.5);
        assert!((z - (0.25 * 2.0 * 2.0 + 0.25 * 0.5 * 2.0)).abs() < 1e-15);
        let total: f64 = st.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(*st.cumulative().last().unwrap(), 1.0);
        assert_eq!(st.last_z(), z);
    }

    #[test]
    fn boost_certifies_zero_margin_violations_on_thresholds() {
        let sample = threshold_sample(44);
        let config = small_config();
        let string = RandomString::new(9, config.sample_size_s, config.rounds_n);
        let mut ledger = CostLedger::new();
        let out = adaboost_sample(
            &sample,
            &ThresholdErm::new(),
            &config,
            &string,
            false,
            &mut ledger,
        )
        .unwrap();
        assert!(!out.fell_back);
        assert_eq!(out.margin_violations, Some(0));
        assert_eq!(out.vote.t(), config.target_t);
        assert_eq!(out.rounds_run, config.rounds_n);
        assert!(out.accepted_rounds >= config.target_t);
    }

    #[test]
    fn rejected_rounds_leave_weights_bitwise_unchanged() {
        // An oracle that ignores its input and always returns the same bad
        // voter: every round is rejected, so the run must fall back and
        // the weights never move.
        use crate::erm::ThresholdHypothesis;
        struct Stubborn;
        impl ErmOracle for Stubborn {
            fn name(&self) -> &str {
                "stubborn"
            }
            fn fit(
                &self,
                sample: &TrainingSequence,
                _ledger: &mut CostLedger,
            ) -> Result<Arc<dyn Hypothesis>, ErmError> {
                let _ = sample;
                Ok(Arc::new(ThresholdHypothesis {
                    sign: -1,
                    boundary: 0.0,
                }))
            }
        }
        let sample = threshold_sample(24);
        let mut config = small_config();
        config.sample_size_s = 12;
        config.rounds_n = 30;
        config.target_t = 5;
        let string = RandomString::new(3, config.sample_size_s, config.rounds_n);
        let mut ledger = CostLedger::new();
        let out =
            adaboost_sample(&sample, &Stubborn, &config, &string, true, &mut ledger).unwrap();
        assert!(out.fell_back);
        assert_eq!(out.accepted_rounds, 0);
        assert_eq!(out.margin_violations, None);
        let tr = out.trajectory.unwrap();
        assert_eq!(tr.rounds.len(), 30);
        assert!(tr.rounds.iter().all(|r| !r.accepted && r.z == 1.0));
        assert!(tr.accepted_wrong_masks.is_empty());
        // Fallback committee is t clones of the full-sample hypothesis.
        assert_eq!(out.vote.t(), 5);
    }

    #[test]
    fn each_round_draws_exactly_s_and_trains_on_s() {
        let sample = threshold_sample(36);
        let mut config = small_config();
        config.early_stop = false;
        let string = RandomString::new(5, config.sample_size_s, config.rounds_n);
        let mut ledger = CostLedger::new();
        let out = adaboost_sample(
            &sample,
            &ThresholdErm::new(),
            &config,
            &string,
            false,
            &mut ledger,
        )
        .unwrap();
        let n = config.rounds_n as u64;
        let s = config.sample_size_s as u64;
        assert_eq!(ledger.sampler_draws, n * s);
        let expected_examples = if out.fell_back {
            n * s + sample.len() as u64
        } else {
            n * s
        };
        assert_eq!(ledger.erm_train_examples, expected_examples);
        assert_eq!(
            ledger.erm_train_calls,
            n + if out.fell_back { 1 } else { 0 }
        );
    }

    #[test]
    fn early_stop_halts_after_target() {
        let sample = threshold_sample(36);
        let mut config = small_config();
        config.early_stop = true;
        let string = RandomString::new(5, config.sample_size_s, config.rounds_n);
        let out = adaboost_sample(
            &sample,
            &ThresholdErm::new(),
            &config,
            &string,
            false,
            &mut CostLedger::new(),
        )
        .unwrap();
        assert_eq!(out.accepted_rounds, config.target_t);
        assert!(out.rounds_run < config.rounds_n);
    }

    #[test]
    fn string_shape_is_enforced() {
        let sample = threshold_sample(12);
        let config = small_config();
        let short = RandomString::new(1, config.sample_size_s, config.rounds_n - 1);
        let err = adaboost_sample(
            &sample,
            &ThresholdErm::new(),
            &config,
            &short,
            false,
            &mut CostLedger::new(),
        )
        .unwrap_err();
        assert!(matches!(err, BoostError::StreamExhausted { .. }));
        let misshapen = RandomString::new(1, config.sample_size_s + 1, config.rounds_n);
        let err = adaboost_sample(
            &sample,
            &ThresholdErm::new(),
            &config,
            &misshapen,
            false,
            &mut CostLedger::new(),
        )
        .unwrap_err();
        assert!(matches!(err, BoostError::StringMismatch(_)));
    }

    #[test]
    fn identical_inputs_give_identical_outcomes() {
        let sample = threshold_sample(36);
        let config = small_config();
        let string = RandomString::new(11, config.sample_size_s, config.rounds_n);
        let run = || {
            let mut ledger = CostLedger::new();
            let out = adaboost_sample(
                &sample,
                &ThresholdErm::new(),
                &config,
                &string,
                false,
                &mut ledger,
            )
            .unwrap();
            let params: Vec<_> = out.vote.voters().iter().map(|v| v.params()).collect();
            (params, ledger)
        };
        let (pa, la) = run();
        let (pb, lb) = run();
        assert_eq!(pa, pb);
        assert_eq!(la, lb);
    }

    #[test]
    fn weight_product_identity_holds() {
        // (1/m) sum_x exp(-y F(x)) equals the product of accepted-round
        // normalizers, where F sums alpha * h over accepted rounds.
        let sample = threshold_sample(30);
        let mut config = small_config();
        config.sample_size_s = 20;
        config.rounds_n = 40;
        config.target_t = 10;
        let string = RandomString::new(21, config.sample_size_s, config.rounds_n);
        let out = adaboost_sample(
            &sample,
            &ThresholdErm::new(),
            &config,
            &string,
            true,
            &mut CostLedger::new(),
        )
        .unwrap();
        let tr = out.trajectory.unwrap();
        let alpha = config.alpha();
        let m = sample.len();
        let mut exponents = vec![0.0_f64; m];
        let mut z_product = 1.0_f64;
        for (record, mask) in tr
            .rounds
            .iter()
            .filter(|r| r.accepted)
            .zip(&tr.accepted_wrong_masks)
        {
            z_product *= record.z;
            for (e, &bad) in exponents.iter_mut().zip(mask) {
                // exp(-y alpha h(x)) is exp(+alpha) when wrong.
                *e += if bad { alpha } else { -alpha };
            }
        }
        let lhs: f64 = exponents.iter().map(|e| e.exp()).sum::<f64>() / m as f64;
        assert!(
            ((lhs - z_product) / z_product).abs() < 1e-9,
            "lhs {lhs} vs product {z_product}"
        );
    }

    #[test]
    fn prefix_violations_match_direct_recomputation() {
        let sample = threshold_sample(30);
        let mut config = small_config();
        config.sample_size_s = 20;
        config.rounds_n = 40;
        config.target_t = 8;
        let string = RandomString::new(2, config.sample_size_s, config.rounds_n);
        let out = adaboost_sample(
            &sample,
            &ThresholdErm::new(),
            &config,
            &string,
            false,
            &mut CostLedger::new(),
        )
        .unwrap();
        let fast =
            prefix_margin_violations(&out.vote, &sample, config.theta, &mut CostLedger::new());
        assert_eq!(fast.len(), out.vote.t());
        for j in 1..=out.vote.t() {
            let prefix = MajorityVote::new(out.vote.voters()[..j].to_vec());
            let direct =
                empirical_margin_loss(&prefix, &sample, config.theta, &mut CostLedger::new());
            assert_eq!(fast[j - 1], direct.violations, "prefix {j}");
        }
        // Without fallback the returned committee is the certified one, so
        // the last prefix count is the certification count. A fallback
        // replaces the committee, so only a nonzero count is implied.
        if out.fell_back {
            assert!(matches!(out.margin_violations, None | Some(1..)));
        } else {
            assert_eq!(Some(*fast.last().unwrap()), out.margin_violations);
        }
    }
}
