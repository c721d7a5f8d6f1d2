//! Command-line front end for the shift-audit toolkit.
//!
//! Four commands: `audit` runs the controlled experiment described by a
//! config file, `sweep` repeats it along a declared axis, `theory` tabulates
//! the closed-form overfitting model against simulation, and
//! `validate-config` checks a config without running anything. Exit codes:
//! 0 success, 1 runtime failure, 2 configuration or usage error.

mod config;
mod emit;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shift_audit::audit::run_audit;
use shift_audit::seed;
use shift_audit::sweeps::run_sweep;
use shift_audit::theory::{
    attack_accuracy_closed_form, closeness_probability, simulate_theory_attack_detailed,
    theory_curve, ClosenessMethod, QueryDist, TheoryParams,
};

use config::{load_experiment, seed_from_env, ConfigError, Experiment};

#[derive(Parser)]
#[command(
    name = "shift-audit",
    about = "Black-box audits for training-distribution shifts",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Where to write artifacts; overrides the config's [output] dir.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Cap on worker threads; overrides the config's setting.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one controlled audit and write report.json, scores.csv and
    /// summary.txt.
    Audit(RunArgs),
    /// Run the configured sweep and write sweep.csv, sweep.json and
    /// runs.jsonl.
    Sweep(RunArgs),
    /// Tabulate the overfitting model's closeness curve and check the
    /// closed-form accuracy against simulation.
    Theory(TheoryArgs),
    /// Parse and validate a config, reporting what it describes.
    ValidateConfig {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct TheoryArgs {
    /// Closeness radius.
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    /// Training points per model.
    #[arg(long, default_value_t = 1000)]
    n_train: usize,
    /// Comma-separated tau grid.
    #[arg(long, value_delimiter = ',', default_values_t = default_tau_grid())]
    tau_grid: Vec<f64>,
    /// Simulated game rounds per tau.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Accuracy near the training set.
    #[arg(long, default_value_t = 0.9)]
    pi_tr: f64,
    /// Accuracy away from it.
    #[arg(long, default_value_t = 0.6)]
    pi_te: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Where to write curve.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn default_tau_grid() -> Vec<f64> {
    (0..9).map(|i| i as f64 * 0.5).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Audit(args) => cmd_audit(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Theory(args) => cmd_theory(&args),
        Command::ValidateConfig { config } => cmd_validate(&config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum CmdError {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e.0)
    }
}

impl From<shift_audit::Error> for CmdError {
    fn from(e: shift_audit::Error) -> Self {
        CmdError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Runtime(format!("i/o failure: {e}"))
    }
}

type CmdResult = Result<(), CmdError>;

fn load(args: &RunArgs) -> Result<Experiment, CmdError> {
    let seed_override = seed_from_env()?;
    let exp = load_experiment(&args.config, seed_override)?;
    let workers = args.workers.or(exp.workers);
    if let Some(n) = workers {
        if n == 0 {
            return Err(CmdError::Config("workers must be at least 1".to_string()));
        }
        // The global pool can only be sized once per process; a second
        // sizing attempt would mean the CLI dispatched twice.
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CmdError::Runtime(format!("worker pool: {e}")))?;
    }
    Ok(exp)
}

fn out_dir<'a>(args: &'a RunArgs, exp: &'a Experiment) -> &'a Path {
    args.out_dir.as_deref().unwrap_or(&exp.out_dir)
}

fn cmd_audit(args: &RunArgs) -> CmdResult {
    let exp = load(args)?;
    let report = run_audit(&exp.audit)?;
    let dir = out_dir(args, &exp);
    emit::write_file(dir, "report.json", &emit::report_json(&report))?;
    emit::write_file(dir, "scores.csv", &emit::scores_csv(&report))?;
    emit::write_file(dir, "summary.txt", &emit::summary_txt(&report))?;
    print!("{}", emit::summary_txt(&report));
    Ok(())
}

fn cmd_sweep(args: &RunArgs) -> CmdResult {
    let exp = load(args)?;
    let spec = exp.sweep_spec().ok_or_else(|| {
        CmdError::Config(format!(
            "config `{}` has no [sweep] table",
            args.config.display()
        ))
    })?;
    let outcome = run_sweep(&spec)?;
    let dir = out_dir(args, &exp);
    emit::write_file(dir, "sweep.csv", &emit::sweep_csv(&outcome))?;
    emit::write_file(dir, "sweep.json", &emit::sweep_json(&outcome))?;
    emit::write_file(dir, "runs.jsonl", &emit::sweep_runs_jsonl(&outcome))?;
    let failures = outcome.cells.iter().filter(|c| c.error.is_some()).count();
    println!(
        "sweep finished: {} cells, {} failed",
        outcome.cells.len(),
        failures
    );
    if failures > 0 {
        eprintln!("warning: {failures} cell(s) recorded errors; see sweep.csv");
    }
    Ok(())
}

fn cmd_theory(args: &TheoryArgs) -> CmdResult {
    let usage = |msg: String| Err(CmdError::Config(msg));
    if !(args.epsilon > 0.0) {
        return usage(format!("--epsilon must be positive, got {}", args.epsilon));
    }
    if args.n_train == 0 {
        return usage("--n-train must be at least 1".to_string());
    }
    if args.trials == 0 {
        return usage("--trials must be at least 1".to_string());
    }
    if args.tau_grid.is_empty() {
        return usage("--tau-grid needs at least one value".to_string());
    }
    if args.tau_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return usage("--tau-grid values must be finite and non-negative".to_string());
    }
    let probs = [("--pi-tr", args.pi_tr), ("--pi-te", args.pi_te)];
    for (name, v) in probs {
        if !(0.0..=1.0).contains(&v) {
            return usage(format!("{name} must lie in [0, 1], got {v}"));
        }
    }
    if args.pi_tr <= args.pi_te {
        return usage(format!(
            "--pi-tr must exceed --pi-te (overfitting premise), got {} <= {}",
            args.pi_tr, args.pi_te
        ));
    }

    let rows = theory_curve(args.epsilon, args.n_train, &args.tau_grid, args.seed);
    emit::write_file(&args.out_dir, "curve.csv", &emit::theory_csv(&rows))?;

    // Play the simulated game per grid value and compare its win rate with
    // the closed form evaluated on the very training sets the simulation
    // realized.
    let mut max_dev = 0.0f64;
    for (i, &tau) in args.tau_grid.iter().enumerate() {
        let params = TheoryParams {
            tau,
            epsilon: args.epsilon,
            n_train: args.n_train,
            pi_tr: args.pi_tr,
            pi_te: args.pi_te,
        };
        let sim = simulate_theory_attack_detailed(
            &params,
            QueryDist::Full,
            args.trials,
            seed::derive(args.seed, "theory-check", i as u64),
        );
        let f_t = closeness_probability(
            &sim.target_set,
            QueryDist::Full,
            tau,
            args.epsilon,
            ClosenessMethod::ExactIntervalUnion,
        )
        .f_value;
        let f_s = closeness_probability(
            &sim.shadow_set,
            QueryDist::Full,
            tau,
            args.epsilon,
            ClosenessMethod::ExactIntervalUnion,
        )
        .f_value;
        let closed = attack_accuracy_closed_form(&params, f_t, f_s);
        max_dev = max_dev.max((sim.win_rate - closed).abs());
    }
    let mc_band = 3.0 * (0.25 / args.trials as f64).sqrt();
    println!(
        "max |simulation - closed form| = {max_dev} over {} tau values ({} trials each; 3 MC standard errors = {mc_band})",
        args.tau_grid.len(),
        args.trials
    );
    Ok(())
}

fn cmd_validate(config: &Path) -> CmdResult {
    let seed_override = seed_from_env()?;
    let exp = load_experiment(config, seed_override)?;
    println!(
        "config ok: statistic {:?}, learner {}, n_total {}, {} control + {} shifted runs{}",
        exp.audit.statistic,
        exp.audit.learner.name(),
        exp.audit.n_total,
        exp.audit.n_control_runs,
        exp.audit.n_shifted_runs,
        match &exp.sweep {
            Some(s) => format!(", sweep over {:?} ({} cells)", s.axis, s.grid.len()),
            None => String::new(),
        }
    );
    Ok(())
}
