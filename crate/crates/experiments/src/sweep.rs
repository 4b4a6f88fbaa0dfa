//! Error-versus-sample-size sweeps over synthetic distributions.
//!
//! A sweep is described by a [`SweepSpec`] (usually loaded from a TOML
//! file, with CLI overrides applied on top) and produces one
//! [`SweepRow`] per (learner, m, seed) cell. Rows carry the exact
//! distribution error of the trained predictor plus the training-cost
//! ledger; they are emitted as CSV with a fixed header and as a JSON
//! mirror. Everything except `wall_ms` is a pure function of the spec,
//! so re-running a sweep reproduces the rows byte for byte once that
//! column is stripped.
//!
//! TOML schema:
//!
//! ```toml
//! ms = [216, 1296]
//! delta = 0.1
//! seeds = [0, 1, 2]
//! learners = ["optimal", "plain-erm"]
//! scale = "desk"
//! bagging_frac = 0.02       # optional, default 0.02
//! output = "rows.csv"       # optional; JSON mirror lands next to it
//!
//! [distribution]
//! kind = "threshold-grid"   # or "constant-plus" / "adversarial-perceptron"
//! points = 50000
//! boundary = 0.7071067811865476
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use subvote_core::analysis::{exact_error, FiniteUniverse};
use subvote_core::boost::ScaleProfile;
use subvote_core::data::{Label, Point};
use subvote_core::erm::{ErmOracle, PerceptronErm, ThresholdErm};
use subvote_core::learner::{
    train_bagging, train_hanneke, train_optimal, train_plain_erm, LearnerConfig, TrainReport,
};
use subvote_core::ledger::CostLedger;
use subvote_core::vote::predict_ensemble;

use crate::universe::{build_adversarial_universe, margin_floor, sample_dataset};
use crate::ExperimentError;

/// Column order of the CSV output.
pub const CSV_HEADER: &str =
    "learner,m,delta,seed,error,erm_train_calls,erm_train_examples,inference_calls,fallbacks,wall_ms";

/// Version tag carried by the JSON mirror.
pub const SCHEMA_VERSION: u32 = 1;

/// The distribution a sweep trains and evaluates against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionSpec {
    /// Uniform scalar grid `(i + 1/2) / points`, labels by sign of
    /// `x - boundary`. Threshold class, VC dimension 1.
    ThresholdGrid { points: usize, boundary: f64 },
    /// Uniform scalar grid with every label positive. Degenerate but
    /// realizable by thresholds; VC dimension 1.
    ConstantPlus { points: usize },
    /// The adversarial perceptron universe on `universe_m` points.
    /// Linear class in the plane with bias, VC dimension 4.
    AdversarialPerceptron { universe_m: usize },
}

impl DistributionSpec {
    pub fn id(&self) -> String {
        match self {
            Self::ThresholdGrid { points, boundary } => {
                format!("threshold-grid({points}, boundary {boundary})")
            }
            Self::ConstantPlus { points } => format!("constant-plus({points})"),
            Self::AdversarialPerceptron { universe_m } => {
                format!("adversarial-perceptron({universe_m})")
            }
        }
    }

    pub fn build(&self) -> Result<FiniteUniverse, ExperimentError> {
        match self {
            Self::ThresholdGrid { points, boundary } => {
                Ok(FiniteUniverse::threshold_grid(*points, *boundary)?)
            }
            Self::ConstantPlus { points } => {
                if *points == 0 {
                    return Err(ExperimentError::BadParams(
                        "constant-plus needs at least one point".into(),
                    ));
                }
                let n = *points;
                Ok(FiniteUniverse::new(
                    (0..n).map(|i| Point::Scalar((i as f64 + 0.5) / n as f64)).collect(),
                    vec![1.0 / n as f64; n],
                    vec![Label::Plus; n],
                )?)
            }
            Self::AdversarialPerceptron { universe_m } => {
                build_adversarial_universe(*universe_m)
            }
        }
    }

    /// The matching ERM oracle and the VC dimension fed to the learner.
    pub fn oracle(&self) -> (Arc<dyn ErmOracle>, usize) {
        match self {
            Self::ThresholdGrid { .. } | Self::ConstantPlus { .. } => {
                (Arc::new(ThresholdErm::new()), 1)
            }
            Self::AdversarialPerceptron { universe_m } => {
                (Arc::new(PerceptronErm::new(margin_floor(*universe_m))), 4)
            }
        }
    }
}

/// Learners a sweep can dispatch to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    /// Voter-sampling learner over boosted subsample rows.
    Optimal,
    /// Three-call majority over the 3-of-4 recursion rows.
    Hanneke,
    /// Bootstrap aggregation at `bagging_frac`.
    Bagging,
    /// One oracle call on the whole sequence.
    PlainErm,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::Hanneke => "hanneke",
            Self::Bagging => "bagging",
            Self::PlainErm => "plain-erm",
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "optimal" => Some(Self::Optimal),
            "hanneke" => Some(Self::Hanneke),
            "bagging" => Some(Self::Bagging),
            "plain-erm" => Some(Self::PlainErm),
            _ => None,
        }
    }

    /// Sample sizes the learner accepts without truncation. Sweeps insist
    /// on these so a row's `m` is exactly what was trained on.
    fn shape_compatible(self, m: usize) -> bool {
        match self {
            Self::Optimal => is_power_of(m, 6),
            Self::Hanneke => is_power_of(m, 4),
            Self::Bagging | Self::PlainErm => m >= 1,
        }
    }
}

fn is_power_of(mut m: usize, base: usize) -> bool {
    if m == 0 {
        return false;
    }
    while m % base == 0 {
        m /= base;
    }
    m == 1
}

fn default_bagging_frac() -> f64 {
    0.02
}

/// Full description of one sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub distribution: DistributionSpec,
    /// Sample-size ladder; every entry must be shape-compatible with
    /// every requested learner.
    pub ms: Vec<usize>,
    pub delta: f64,
    pub seeds: Vec<u64>,
    pub learners: Vec<LearnerKind>,
    /// Scale profile name, resolved via [`ScaleProfile::by_name`].
    pub scale: String,
    /// Bootstrap fraction for the bagging baseline.
    #[serde(default = "default_bagging_frac")]
    pub bagging_frac: f64,
    /// CSV destination; the JSON mirror replaces the extension.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.ms.is_empty() {
            return Err(ExperimentError::BadParams("sweep needs at least one m".into()));
        }
        if self.seeds.is_empty() {
            return Err(ExperimentError::BadParams("sweep needs at least one seed".into()));
        }
        if self.learners.is_empty() {
            return Err(ExperimentError::BadParams("sweep needs at least one learner".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ExperimentError::BadParams(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(0.02..=1.0).contains(&self.bagging_frac) {
            return Err(ExperimentError::BadParams(format!(
                "bagging_frac must lie in [0.02, 1], got {}",
                self.bagging_frac
            )));
        }
        if self.scale_profile().is_none() {
            return Err(ExperimentError::BadParams(format!(
                "unknown scale profile {:?}",
                self.scale
            )));
        }
        for &learner in &self.learners {
            for &m in &self.ms {
                if !learner.shape_compatible(m) {
                    return Err(ExperimentError::BadParams(format!(
                        "m = {m} is not shape-compatible with the {} learner",
                        learner.name()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn scale_profile(&self) -> Option<ScaleProfile> {
        ScaleProfile::by_name(&self.scale)
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// One (learner, m, seed) result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub learner: String,
    pub m: usize,
    pub delta: f64,
    pub seed: u64,
    /// Exact error of the trained predictor under the distribution.
    pub error: f64,
    pub erm_train_calls: u64,
    pub erm_train_examples: u64,
    pub inference_calls: u64,
    pub fallbacks: u64,
    /// Wall time of training plus exact evaluation. The one column that
    /// is not reproducible; determinism comparisons strip it.
    pub wall_ms: u64,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.learner,
            self.m,
            self.delta,
            self.seed,
            self.error,
            self.erm_train_calls,
            self.erm_train_examples,
            self.inference_calls,
            self.fallbacks,
            self.wall_ms
        )
    }
}

fn run_cell(
    spec: &SweepSpec,
    universe: &FiniteUniverse,
    erm: &dyn ErmOracle,
    d: usize,
    learner: LearnerKind,
    m: usize,
    seed: u64,
) -> Result<SweepRow, ExperimentError> {
    // The dataset is a function of (m, seed) alone so learners compare on
    // identical draws.
    let sample = sample_dataset(universe, m, seed);
    let started = Instant::now();
    let scale = spec.scale_profile().expect("validated");
    let report: TrainReport = match learner {
        LearnerKind::Optimal => {
            let config = LearnerConfig::new(spec.delta, d, seed).with_scale(scale);
            train_optimal(&sample, erm, &config)?
        }
        LearnerKind::Hanneke => train_hanneke(&sample, erm, seed)?,
        LearnerKind::Bagging => {
            train_bagging(&sample, erm, spec.delta, spec.bagging_frac, seed)?
        }
        LearnerKind::PlainErm => train_plain_erm(&sample, erm, seed)?,
    };
    // Evaluation cost stays out of the row's ledger, which records the
    // training run alone.
    let mut scratch = CostLedger::new();
    let error = exact_error(universe, |point| {
        predict_ensemble(&report.ensemble, point, &mut scratch)
    });
    Ok(SweepRow {
        learner: learner.name().to_string(),
        m,
        delta: spec.delta,
        seed,
        error,
        erm_train_calls: report.ledger.erm_train_calls,
        erm_train_examples: report.ledger.erm_train_examples,
        inference_calls: report.ledger.inference_calls,
        fallbacks: report.fallback_count as u64,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

/// Runs the whole sweep in (learner, m, seed) order.
pub fn run_error_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, ExperimentError> {
    spec.validate()?;
    let universe = spec.distribution.build()?;
    let (erm, d) = spec.distribution.oracle();
    let mut rows =
        Vec::with_capacity(spec.learners.len() * spec.ms.len() * spec.seeds.len());
    for &learner in &spec.learners {
        for &m in &spec.ms {
            for &seed in &spec.seeds {
                rows.push(run_cell(spec, &universe, erm.as_ref(), d, learner, m, seed)?);
            }
        }
    }
    Ok(rows)
}

/// Renders rows as CSV with the pinned header.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

/// JSON mirror of the CSV rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub schema_version: u32,
    pub rows: Vec<SweepRow>,
}

pub fn rows_to_json(rows: &[SweepRow]) -> String {
    let doc = SweepDocument {
        schema_version: SCHEMA_VERSION,
        rows: rows.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    text.push('\n');
    text
}

/// Writes the CSV to `path` and the JSON mirror next to it with a `.json`
/// extension. Returns the mirror path.
pub fn write_outputs(rows: &[SweepRow], path: &Path) -> Result<PathBuf, ExperimentError> {
    let mut csv = std::fs::File::create(path)?;
    csv.write_all(rows_to_csv(rows).as_bytes())?;
    let mirror = path.with_extension("json");
    let mut json = std::fs::File::create(&mirror)?;
    json.write_all(rows_to_json(rows).as_bytes())?;
    Ok(mirror)
}

/// Strips the trailing `wall_ms` column from a CSV line.
pub fn strip_wall_ms(line: &str) -> &str {
    match line.rfind(',') {
        Some(idx) => &line[..idx],
        None => line,
    }
}
