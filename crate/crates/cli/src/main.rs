//! `rctomo`: run tomography-robustness ensembles and write CSV reports.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numeric or I/O failure,
//! 3 a `--check` gate failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rctomo_core::experiment::checks::median_rel_error;
use rctomo_core::experiment::report;
use rctomo_core::experiment::{
    plateau_estimate, run_control_check, run_distribution_check, run_haar_scaling,
    run_reconstruct_demo, run_time_trace, ExperimentConfig, ExperimentKind, UnitaryMode,
};
use rctomo_core::Error;

#[derive(Parser, Debug)]
#[command(name = "rctomo", version, about = "Condition-number statistics of random-control quantum-state tomography")]
struct Cli {
    /// JSON file overriding the experiment defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for all random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; without it the main table goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Lift the desk-scale dimension caps.
    #[arg(long, global = true)]
    large: bool,
    /// Time traces: sample all unitaries from one trajectory.
    #[arg(long, global = true)]
    trajectory: bool,
    /// Time traces: also write an SVG plot (needs --out).
    #[arg(long, global = true)]
    svg: bool,
    /// Exit with status 3 if the experiment's gate fails.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean ln κ of Haar ensembles against the large-d law.
    HaarScaling,
    /// Ensemble-mean ln κ as a function of control time.
    TimeTrace {
        #[arg(long, value_enum, default_value_t = SystemArg::Multilevel)]
        system: SystemArg,
    },
    /// KS tests of tomography-matrix entries against reference densities.
    DistCheck,
    /// Lie-algebra rank test of the control systems.
    ControlCheck,
    /// Reconstruction error under measurement noise.
    Reconstruct,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SystemArg {
    Multilevel,
    Ising,
}

enum Failure {
    Config(String),
    Run(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Run(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

fn run_err(e: Error) -> Failure {
    Failure::Run(e.to_string())
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let kind = match &cli.command {
        Command::HaarScaling => ExperimentKind::HaarScaling,
        Command::TimeTrace { system: SystemArg::Multilevel } => ExperimentKind::TimeTraceMultilevel,
        Command::TimeTrace { system: SystemArg::Ising } => ExperimentKind::TimeTraceIsing,
        Command::DistCheck => ExperimentKind::DistributionCheck,
        Command::ControlCheck => ExperimentKind::ControllabilityCheck,
        Command::Reconstruct => ExperimentKind::ReconstructDemo,
    };
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(kind, &text).map_err(|e| Failure::Config(e.to_string()))?
        }
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.large {
        cfg.large = true;
    }
    if cli.trajectory {
        if !cfg.experiment.is_time_trace() {
            return Err(Failure::Config("--trajectory applies to time-trace only".into()));
        }
        cfg.mode = UnitaryMode::Trajectory;
    }
    if cli.out.is_some() {
        cfg.out_dir = cli.out.clone();
    }
    if cli.svg && (!cfg.experiment.is_time_trace() || cfg.out_dir.is_none()) {
        return Err(Failure::Config("--svg needs time-trace and --out".into()));
    }
    if cli.threads == Some(0) {
        return Err(Failure::Config("--threads must be at least 1".into()));
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

/// Main table to `<out>/<name>` or stdout; extra files only with an output
/// directory.
struct Sink<'a> {
    dir: Option<&'a Path>,
}

impl Sink<'_> {
    fn main(&self, name: &str, body: &str) -> Result<(), Failure> {
        match self.dir {
            Some(dir) => self.write(dir, name, body),
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }

    fn extra(&self, name: &str, body: &str) -> Result<(), Failure> {
        match self.dir {
            Some(dir) => self.write(dir, name, body),
            None => Ok(()),
        }
    }

    fn write(&self, dir: &Path, name: &str, body: &str) -> Result<(), Failure> {
        fs::create_dir_all(dir)
            .and_then(|_| fs::write(dir.join(name), body))
            .map_err(|e| Failure::Run(format!("cannot write {}: {e}", dir.join(name).display())))
    }
}

fn execute(cli: &Cli, cfg: &ExperimentConfig) -> Result<(), Failure> {
    let sink = Sink {
        dir: cfg.out_dir.as_deref(),
    };
    let mut problems = Vec::new();
    match cfg.experiment {
        ExperimentKind::HaarScaling => {
            let rows = run_haar_scaling(cfg).map_err(run_err)?;
            sink.main("haar_scaling.csv", &report::haar_scaling_csv(&rows))?;
            for r in rows.iter().filter(|r| r.d >= 8) {
                if !(r.deviation().abs() <= 0.10) {
                    problems.push(format!("{} d={}: deviation {}", r.basis.as_str(), r.d, r.deviation()));
                }
            }
        }
        ExperimentKind::TimeTraceMultilevel | ExperimentKind::TimeTraceIsing => {
            let results = run_time_trace(cfg).map_err(run_err)?;
            let plateaus: Vec<_> = results.iter().map(plateau_estimate).collect();
            sink.main("time_trace.csv", &report::time_trace_csv(&results))?;
            sink.extra("plateau.csv", &report::plateau_csv(&results, &plateaus))?;
            sink.extra("trial_seeds.csv", &report::trial_seeds_csv(&results))?;
            if cli.svg {
                sink.extra("time_trace.svg", &report::time_trace_svg(&results))?;
            }
            for (r, p) in results.iter().zip(&plateaus) {
                if let Err(e) = p {
                    problems.push(format!("{} size {}: {e}", r.system, r.size));
                }
            }
            // t_p ∝ d: successive plateau times must scale with the dimension
            // to within 25 %.
            let found: Vec<(usize, f64)> = results
                .iter()
                .zip(&plateaus)
                .filter_map(|(r, p)| p.as_ref().ok().map(|p| (r.dim, p.t_p)))
                .collect();
            for w in found.windows(2) {
                let ratio = (w[1].1 / w[0].1) / (w[1].0 as f64 / w[0].0 as f64);
                if !(0.75..=1.25).contains(&ratio) {
                    problems.push(format!(
                        "t_p(d={})/t_p(d={}) = {} is not proportional to d",
                        w[1].0,
                        w[0].0,
                        w[1].1 / w[0].1
                    ));
                }
            }
        }
        ExperimentKind::DistributionCheck => {
            let rows = run_distribution_check(cfg).map_err(run_err)?;
            sink.main("dist_check.csv", &report::distribution_csv(&rows))?;
            for r in rows.iter().filter(|r| !r.as_expected()) {
                problems.push(format!("{}: statistic {} vs critical {}", r.test, r.statistic, r.critical_value));
            }
        }
        ExperimentKind::ControllabilityCheck => {
            let rows = run_control_check(cfg).map_err(run_err)?;
            sink.main("control_check.csv", &report::control_csv(&rows))?;
            for r in rows.iter().filter(|r| !r.full()) {
                problems.push(format!("{} size {}: dimension {} of {}", r.system, r.size, r.dimension, r.target()));
            }
        }
        ExperimentKind::ReconstructDemo => {
            let trials = run_reconstruct_demo(cfg).map_err(run_err)?;
            sink.main("reconstruct.csv", &report::reconstruct_csv(&trials))?;
            let violations = trials.iter().filter(|t| !t.within_bound()).count();
            if violations > 0 {
                problems.push(format!("{violations} trials exceed the κ bound"));
            }
            if let Some(e) = median_rel_error(&trials, 0.0) {
                let worst = trials.iter().filter(|t| t.sigma == 0.0).map(|t| t.rel_error).fold(0.0, f64::max);
                if worst > 1e-8 {
                    problems.push(format!("noiseless error {worst} (median {e})"));
                }
            }
        }
    }
    if cli.check && !problems.is_empty() {
        return Err(Failure::Check(problems.join("; ")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = load_config(&cli).and_then(|cfg| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.threads {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| Failure::Run(format!("cannot start worker pool: {e}")))?;
        pool.install(|| execute(&cli, &cfg))
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (label, msg) = match &f {
                Failure::Config(m) => ("configuration error", m),
                Failure::Run(m) => ("error", m),
                Failure::Check(m) => ("check failed", m),
            };
            eprintln!("rctomo: {label}: {msg}");
            ExitCode::from(f.code())
        }
    }
}
