//! `subvote`: train, evaluate, and benchmark the subsampled-boosting
//! learner and its baselines from the command line.
//!
//! Every run prints its effective configuration as a single
//! machine-parseable `config {json}` line before doing any work. Exit
//! codes: 0 success, 1 runtime failure, 2 usage error.

mod model;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use subvote_core::analysis::{
    exact_error, ramp_generalization_bound, uniform_convergence_bound,
};
use subvote_core::boost::{
    margin_loss_base, margin_loss_bound, round_success_tail, ScaleProfile,
};
use subvote_core::learner::{
    train_bagging, train_hanneke, train_optimal, train_plain_erm, LearnerConfig, TrainReport,
};
use subvote_core::ledger::CostLedger;
use subvote_core::subsample::largest_power_of_six_at_most;
use subvote_core::verify::{run_all, run_suite, suite_names, SuiteResult};
use subvote_core::vote::predict_ensemble;
use subvote_experiments::perceptron_bench::run_perceptron_complexity;
use subvote_experiments::sweep::{
    rows_to_csv, run_error_sweep, write_outputs, DistributionSpec, LearnerKind, SweepSpec,
};
use subvote_experiments::universe::sample_dataset;
use subvote_experiments::ExperimentError;

use model::ModelDescriptor;

#[derive(Parser)]
#[command(
    name = "subvote",
    version,
    about = "Optimal-sample-complexity PAC learning via subsampled boosting and voter sampling"
)]
struct Cli {
    /// Upper bound on worker threads. Execution is currently serial, so
    /// any bound of at least 1 is honored trivially.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a learner on a sampled dataset and write a model descriptor.
    Train(TrainArgs),
    /// Evaluate a stored model descriptor against a distribution.
    Eval(EvalArgs),
    /// Run an error-versus-m sweep and emit CSV rows plus a JSON mirror.
    Sweep(SweepArgs),
    /// Compare bagging and boosted perceptron training costs.
    PerceptronBench(BenchArgs),
    /// Run the built-in invariant suites.
    Verify(VerifyArgs),
    /// Evaluate the analytic bounds.
    Bounds(BoundsArgs),
}

/// Flags selecting a synthetic distribution.
#[derive(Args, Clone)]
struct DistributionArgs {
    /// Distribution: threshold | constant-plus | adversarial.
    #[arg(long, default_value = "threshold")]
    distribution: String,
    /// Grid size for the scalar distributions.
    #[arg(long, default_value_t = 50_000)]
    points: usize,
    /// Boundary of the threshold grid.
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    boundary: f64,
    /// Universe size for the adversarial distribution.
    #[arg(long, default_value_t = 2200)]
    universe_m: usize,
}

impl DistributionArgs {
    fn to_spec(&self) -> Result<DistributionSpec, CliError> {
        match self.distribution.as_str() {
            "threshold" => Ok(DistributionSpec::ThresholdGrid {
                points: self.points,
                boundary: self.boundary,
            }),
            "constant-plus" => Ok(DistributionSpec::ConstantPlus {
                points: self.points,
            }),
            "adversarial" => Ok(DistributionSpec::AdversarialPerceptron {
                universe_m: self.universe_m,
            }),
            other => Err(CliError::Usage(format!(
                "unknown distribution {other:?}; expected threshold, constant-plus, or adversarial"
            ))),
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Learner: optimal | hanneke | bagging | plain-erm.
    #[arg(long, default_value = "optimal")]
    learner: String,
    #[command(flatten)]
    dist: DistributionArgs,
    /// Training sequence length.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// VC dimension; defaults to the distribution's class (1 for the
    /// scalar distributions, 4 for the adversarial one).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scale profile: paper | desk.
    #[arg(long, default_value = "desk")]
    scale: String,
    /// Bootstrap fraction for the bagging learner.
    #[arg(long, default_value_t = 0.02)]
    bagging_frac: f64,
    /// Model destination; defaults to
    /// `$SUBVOTE_OUT_DIR/model-<learner>-m<m>-seed<seed>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Model descriptor written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    dist: DistributionArgs,
    /// Also evaluate empirically on a fresh dataset of this length.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep spec; flags below override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Distribution override (with --points/--boundary/--universe-m).
    #[arg(long)]
    distribution: Option<String>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    boundary: Option<f64>,
    #[arg(long)]
    universe_m: Option<usize>,
    /// Sample-size ladder.
    #[arg(long, value_delimiter = ',')]
    ms: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    delta: Option<f64>,
    /// Learners: optimal | hanneke | bagging | plain-erm.
    #[arg(long, value_delimiter = ',')]
    learners: Option<Vec<String>>,
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    bagging_frac: Option<f64>,
    /// CSV destination; the JSON mirror lands next to it. Without it the
    /// CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 2200)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the full JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run a single suite: core | erm | subsample | boost | learner | analysis.
    #[arg(long)]
    suite: Option<String>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Which bound: margin | uc | ramp | tail.
    #[arg(long)]
    which: String,
    /// Margin level (margin).
    #[arg(long, default_value_t = 0.75)]
    theta: f64,
    /// Boosting edge (margin, ramp).
    #[arg(long, default_value_t = 0.45)]
    gamma: f64,
    /// Committee size (margin).
    #[arg(long, default_value_t = 100)]
    t: u32,
    /// VC dimension (uc, ramp).
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Sample size (uc, ramp); defaults to 550 d.
    #[arg(long)]
    m: Option<usize>,
    /// Confidence (uc, ramp).
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Round count (tail).
    #[arg(long, default_value_t = 12)]
    n: u64,
    /// Margin stretch factor (ramp).
    #[arg(long, default_value_t = 5.0 / 3.0)]
    xi: f64,
    /// Leading constant (ramp).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

/// Exit-code-bearing error: 2 for usage problems, 1 for runtime failures.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Runtime(m) => m,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(err: ExperimentError) -> Self {
        match err {
            ExperimentError::BadParams(m) => Self::Usage(m),
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<subvote_core::learner::LearnError> for CliError {
    fn from(err: subvote_core::learner::LearnError) -> Self {
        Self::Runtime(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::Runtime(err.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        std::process::exit(2);
    }
    let result = match cli.command {
        Command::Train(args) => cmd_train(args, cli.jobs),
        Command::Eval(args) => cmd_eval(args, cli.jobs),
        Command::Sweep(args) => cmd_sweep(args, cli.jobs),
        Command::PerceptronBench(args) => cmd_bench(args, cli.jobs),
        Command::Verify(args) => cmd_verify(args, cli.jobs),
        Command::Bounds(args) => cmd_bounds(args, cli.jobs),
    };
    if let Err(err) = result {
        eprintln!("error: {}", err.message());
        std::process::exit(err.code());
    }
}

fn print_config(command: &str, jobs: usize, fields: serde_json::Value) {
    let mut config = json!({ "command": command, "jobs": jobs });
    if let (Some(base), Some(extra)) = (config.as_object_mut(), fields.as_object()) {
        for (key, value) in extra {
            base.insert(key.clone(), value.clone());
        }
    }
    println!("config {config}");
}

fn check_delta(delta: f64) -> Result<(), CliError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "delta must lie in (0, 1), got {delta}"
        )))
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os("SUBVOTE_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Warns when the learner will only use a prefix of the dataset.
fn warn_truncation(learner: LearnerKind, m: usize) -> usize {
    let m_effective = match learner {
        LearnerKind::Optimal => largest_power_of_six_at_most(m).1,
        LearnerKind::Hanneke => {
            let mut eff = 1usize;
            while eff * 4 <= m {
                eff *= 4;
            }
            eff
        }
        LearnerKind::Bagging | LearnerKind::PlainErm => m,
    };
    if m_effective != m {
        eprintln!(
            "warning: m = {m} is not a valid shape for the {} learner; \
             training on the prefix of length {m_effective}",
            learner.name()
        );
    }
    m_effective
}

fn cmd_train(args: TrainArgs, jobs: usize) -> Result<(), CliError> {
    let learner = LearnerKind::by_name(&args.learner).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown learner {:?}; expected optimal, hanneke, bagging, or plain-erm",
            args.learner
        ))
    })?;
    let dist = args.dist.to_spec()?;
    let scale = ScaleProfile::by_name(&args.scale)
        .ok_or_else(|| CliError::Usage(format!("unknown scale profile {:?}", args.scale)))?;
    check_delta(args.delta)?;
    if args.m == 0 {
        return Err(CliError::Usage("m must be at least 1".into()));
    }
    if learner == LearnerKind::Bagging && !(0.02..=1.0).contains(&args.bagging_frac) {
        return Err(CliError::Usage(format!(
            "bagging_frac must lie in [0.02, 1], got {}",
            args.bagging_frac
        )));
    }
    let (default_oracle, default_d) = dist.oracle();
    let d = args.d.unwrap_or(default_d);
    if d == 0 {
        return Err(CliError::Usage("d must be at least 1".into()));
    }
    let out = args.out.clone().unwrap_or_else(|| {
        default_out_dir().join(format!(
            "model-{}-m{}-seed{}.json",
            learner.name(),
            args.m,
            args.seed
        ))
    });
    print_config(
        "train",
        jobs,
        json!({
            "learner": learner.name(),
            "distribution": dist.id(),
            "m": args.m,
            "delta": args.delta,
            "d": d,
            "seed": args.seed,
            "scale": scale.name,
            "bagging_frac": args.bagging_frac,
            "out": out.display().to_string(),
        }),
    );

    warn_truncation(learner, args.m);
    let universe = dist.build()?;
    let sample = sample_dataset(&universe, args.m, args.seed);
    let report: TrainReport = match learner {
        LearnerKind::Optimal => {
            let config = LearnerConfig::new(args.delta, d, args.seed).with_scale(scale);
            train_optimal(&sample, default_oracle.as_ref(), &config)?
        }
        LearnerKind::Hanneke => train_hanneke(&sample, default_oracle.as_ref(), args.seed)?,
        LearnerKind::Bagging => train_bagging(
            &sample,
            default_oracle.as_ref(),
            args.delta,
            args.bagging_frac,
            args.seed,
        )?,
        LearnerKind::PlainErm => train_plain_erm(&sample, default_oracle.as_ref(), args.seed)?,
    };

    let descriptor =
        ModelDescriptor::from_report(learner.name(), dist.id(), args.delta, d, &report);
    descriptor.save(&out)?;
    println!("model {}", out.display());
    println!("m_effective {}", report.m_effective);
    println!("voters {}", descriptor.voters.len());
    println!("fallbacks {}", report.fallback_count);
    println!("cache_hits {}", report.cache_hits);
    println!(
        "ledger {}",
        serde_json::to_string(&report.ledger).expect("plain data serializes")
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs, jobs: usize) -> Result<(), CliError> {
    let dist = args.dist.to_spec()?;
    print_config(
        "eval",
        jobs,
        json!({
            "model": args.model.display().to_string(),
            "distribution": dist.id(),
            "m": args.m,
            "seed": args.seed,
        }),
    );
    let descriptor = ModelDescriptor::load(&args.model).map_err(CliError::Runtime)?;
    let ensemble = descriptor.reconstruct().map_err(CliError::Runtime)?;
    let kind = descriptor.point_kind().map_err(CliError::Runtime)?;
    let expected = match dist {
        DistributionSpec::ThresholdGrid { .. } | DistributionSpec::ConstantPlus { .. } => "scalar",
        DistributionSpec::AdversarialPerceptron { .. } => "vector",
    };
    if kind != expected {
        return Err(CliError::Runtime(format!(
            "model voters consume {kind} points but the distribution yields {expected} points"
        )));
    }
    let universe = dist.build()?;
    let mut scratch = CostLedger::new();
    let error = exact_error(&universe, |point| {
        predict_ensemble(&ensemble, point, &mut scratch)
    });
    println!("voters {}", ensemble.len());
    println!("exact_error {error}");
    if let Some(m) = args.m {
        if m == 0 {
            return Err(CliError::Usage("m must be at least 1".into()));
        }
        let sample = sample_dataset(&universe, m, args.seed);
        let mut ledger = CostLedger::new();
        let wrong = sample
            .iter()
            .filter(|ex| predict_ensemble(&ensemble, &ex.point, &mut ledger) != ex.label)
            .count();
        println!("empirical_error {}", wrong as f64 / m as f64);
        println!("inference_calls {}", ledger.inference_calls);
    }
    Ok(())
}

fn default_sweep_spec() -> SweepSpec {
    SweepSpec {
        distribution: DistributionSpec::ThresholdGrid {
            points: 50_000,
            boundary: std::f64::consts::FRAC_1_SQRT_2,
        },
        ms: vec![216],
        delta: 0.1,
        seeds: (0..5).collect(),
        learners: vec![LearnerKind::Optimal],
        scale: "desk".into(),
        bagging_frac: 0.02,
        output: None,
    }
}

fn cmd_sweep(args: SweepArgs, jobs: usize) -> Result<(), CliError> {
    let mut spec = match &args.spec {
        Some(path) => SweepSpec::load(path).map_err(|e| match e {
            ExperimentError::Io(err) => {
                CliError::Runtime(format!("cannot read {}: {err}", path.display()))
            }
            other => CliError::Usage(other.to_string()),
        })?,
        None => default_sweep_spec(),
    };
    if let Some(name) = &args.distribution {
        let dist_args = DistributionArgs {
            distribution: name.clone(),
            points: args.points.unwrap_or(50_000),
            boundary: args.boundary.unwrap_or(std::f64::consts::FRAC_1_SQRT_2),
            universe_m: args.universe_m.unwrap_or(2200),
        };
        spec.distribution = dist_args.to_spec()?;
    } else {
        if let Some(points) = args.points {
            match &mut spec.distribution {
                DistributionSpec::ThresholdGrid { points: p, .. }
                | DistributionSpec::ConstantPlus { points: p } => *p = points,
                DistributionSpec::AdversarialPerceptron { .. } => {
                    return Err(CliError::Usage(
                        "--points does not apply to the adversarial distribution".into(),
                    ))
                }
            }
        }
        if let Some(boundary) = args.boundary {
            match &mut spec.distribution {
                DistributionSpec::ThresholdGrid { boundary: b, .. } => *b = boundary,
                _ => {
                    return Err(CliError::Usage(
                        "--boundary only applies to the threshold grid".into(),
                    ))
                }
            }
        }
        if let Some(universe_m) = args.universe_m {
            match &mut spec.distribution {
                DistributionSpec::AdversarialPerceptron { universe_m: u } => *u = universe_m,
                _ => {
                    return Err(CliError::Usage(
                        "--universe-m only applies to the adversarial distribution".into(),
                    ))
                }
            }
        }
    }
    if let Some(ms) = args.ms {
        spec.ms = ms;
    }
    if let Some(seeds) = args.seeds {
        spec.seeds = seeds;
    }
    if let Some(delta) = args.delta {
        spec.delta = delta;
    }
    if let Some(names) = args.learners {
        let mut learners = Vec::with_capacity(names.len());
        for name in &names {
            learners.push(LearnerKind::by_name(name).ok_or_else(|| {
                CliError::Usage(format!("unknown learner {name:?}"))
            })?);
        }
        spec.learners = learners;
    }
    if let Some(scale) = args.scale {
        spec.scale = scale;
    }
    if let Some(frac) = args.bagging_frac {
        spec.bagging_frac = frac;
    }
    if let Some(out) = args.out {
        spec.output = Some(out);
    }
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    print_config(
        "sweep",
        jobs,
        serde_json::to_value(&spec).expect("plain data serializes"),
    );
    let rows = run_error_sweep(&spec)?;
    match &spec.output {
        Some(path) => {
            let mirror = write_outputs(&rows, path)?;
            println!("rows {}", rows.len());
            println!("wrote {}", path.display());
            println!("wrote {}", mirror.display());
        }
        None => print!("{}", rows_to_csv(&rows)),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs, jobs: usize) -> Result<(), CliError> {
    if args.m < 2200 {
        return Err(CliError::Usage(format!(
            "the benchmark regime needs m >= 2200, got {}",
            args.m
        )));
    }
    if args.trials == 0 {
        return Err(CliError::Usage("need at least one trial".into()));
    }
    print_config(
        "perceptron-bench",
        jobs,
        json!({
            "m": args.m,
            "trials": args.trials,
            "seed": args.seed,
            "out": args.out.as_ref().map(|p| p.display().to_string()),
        }),
    );
    let report = run_perceptron_complexity(args.m, args.trials, args.seed)?;
    println!("cost_proxy {}", report.cost_proxy);
    println!("update_floor {}", report.update_floor);
    println!("novikoff_cap {}", report.novikoff_cap);
    println!("quadratic_threshold {}", report.quadratic_threshold);
    println!(
        "first_bootstrap_floor_fraction {}",
        report.first_bootstrap_floor_fraction
    );
    println!("quadratic_fraction {}", report.quadratic_fraction);
    println!("median_bagging_updates {}", report.median_bagging_updates);
    println!(
        "median_boosted_call_updates {}",
        report.median_boosted_call_updates
    );
    println!("update_ratio {}", report.update_ratio);
    println!("all_boosted_within_cap {}", report.all_boosted_within_cap);
    if let Some(path) = &args.out {
        let mut text = serde_json::to_string_pretty(&report).expect("plain data serializes");
        text.push('\n');
        std::fs::write(path, text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_suite(suite: &SuiteResult) {
    if suite.all_passed() {
        println!("PASS {} ({} checks)", suite.suite, suite.passed());
    } else {
        let failing: Vec<&str> = suite
            .checks
            .iter()
            .filter(|c| c.outcome.is_err())
            .map(|c| c.name)
            .collect();
        println!(
            "FAIL {} ({}/{} checks failed: {})",
            suite.suite,
            suite.failed(),
            suite.checks.len(),
            failing.join(", ")
        );
        for check in &suite.checks {
            if let Err(message) = &check.outcome {
                println!("  {}: {message}", check.name);
            }
        }
    }
}

fn cmd_verify(args: VerifyArgs, jobs: usize) -> Result<(), CliError> {
    print_config("verify", jobs, json!({ "suite": args.suite }));
    let suites = match &args.suite {
        Some(name) => vec![run_suite(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown suite {name:?}; expected one of {}",
                suite_names().join(", ")
            ))
        })?],
        None => run_all(),
    };
    for suite in &suites {
        print_suite(suite);
    }
    let failing: Vec<&str> = suites
        .iter()
        .filter(|s| !s.all_passed())
        .map(|s| s.suite)
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "failing suites: {}",
            failing.join(", ")
        )))
    }
}

fn cmd_bounds(args: BoundsArgs, jobs: usize) -> Result<(), CliError> {
    let m = args.m.unwrap_or(550 * args.d);
    print_config(
        "bounds",
        jobs,
        json!({
            "which": args.which,
            "theta": args.theta,
            "gamma": args.gamma,
            "t": args.t,
            "d": args.d,
            "m": m,
            "delta": args.delta,
            "n": args.n,
            "xi": args.xi,
            "c": args.c,
        }),
    );
    match args.which.as_str() {
        "margin" => {
            let base = margin_loss_base(args.theta, args.gamma)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let bound = margin_loss_bound(args.theta, args.gamma, args.t)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            println!("margin_base {base}");
            println!("margin_bound {bound}");
        }
        "uc" => {
            check_delta(args.delta)?;
            if args.d == 0 || m == 0 {
                return Err(CliError::Usage("d and m must be at least 1".into()));
            }
            println!("uc {}", uniform_convergence_bound(args.d, m, args.delta));
        }
        "ramp" => {
            check_delta(args.delta)?;
            if args.d == 0 || m == 0 {
                return Err(CliError::Usage("d and m must be at least 1".into()));
            }
            if !(args.xi > 1.0) || !(args.gamma > 0.0) || !(args.c > 0.0) {
                return Err(CliError::Usage(
                    "ramp needs xi > 1, gamma > 0, and c > 0".into(),
                ));
            }
            println!(
                "ramp {}",
                ramp_generalization_bound(args.d, m, args.delta, args.gamma, args.xi, args.c)
            );
        }
        "tail" => println!("tail {}", round_success_tail(args.n)),
        other => {
            return Err(CliError::Usage(format!(
                "unknown bound {other:?}; expected margin, uc, ramp, or tail"
            )));
        }
    }
    Ok(())
}
