use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rankgrad_bench::output::{write_checks, write_grid, write_noise, write_outcome};
use rankgrad_bench::variance_check::format_report;
use rankgrad_bench::{
    default_sigmas, mk_grid_study, noise_sweep, preset, run_experiment, variance_checks,
    BenchError, ExperimentOutcome, ExperimentSpec, VarianceCheckConfig, PRESETS,
};

/// Benchmarks for zeroth-order optimization from ranking feedback.
#[derive(Parser)]
#[command(name = "rankgrad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment over all seeds.
    Run(ExperimentArgs),
    /// Run one experiment per (m, k) pair.
    Grid {
        #[command(flatten)]
        common: ExperimentArgs,
        /// Pairs as `m:k`, comma separated; defaults to the spec's grid.
        #[arg(long, value_delimiter = ',', value_parser = parse_mk)]
        mk: Vec<(usize, usize)>,
    },
    /// Run one experiment per oracle noise level.
    NoiseSweep {
        #[command(flatten)]
        common: ExperimentArgs,
        /// Noise standard deviations; defaults to the spec's `sigmas`, then
        /// to `0,0.01,0.1`.
        #[arg(long, value_delimiter = ',')]
        sigmas: Vec<f64>,
    },
    /// Monte Carlo checks of the estimator's moment bounds.
    VarianceCheck {
        /// Dimensions for the M1/M2 caps.
        #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
        dims: Vec<usize>,
        /// Samples per M1/M2 estimate.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in experiment presets.
    Presets,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name; see `rankgrad presets`.
    #[arg(long)]
    preset: Option<String>,
    /// Seeds, e.g. `0,1,2` or `0..10`.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<Seeds>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Oracle query budget per run.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.parse().map_err(|e| format!("{part}: {e}"))?;
                let b: u64 = b.parse().map_err(|e| format!("{part}: {e}"))?;
                out.extend(a..b);
            }
            None => out.push(part.parse().map_err(|e| format!("{part}: {e}"))?),
        }
    }
    Ok(Seeds(out))
}

fn parse_mk(s: &str) -> Result<(usize, usize), String> {
    let (m, k) = s
        .split_once(':')
        .ok_or_else(|| format!("expected m:k, got {s:?}"))?;
    Ok((
        m.trim().parse().map_err(|e| format!("{s}: {e}"))?,
        k.trim().parse().map_err(|e| format!("{s}: {e}"))?,
    ))
}

impl ExperimentArgs {
    fn spec(&self) -> Result<ExperimentSpec, BenchError> {
        let mut spec = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentSpec::load(path)?,
            (None, Some(name)) => preset(name)
                .ok_or_else(|| BenchError::Invalid(format!("unknown preset {name:?}")))?,
            (None, None) => unreachable!("clap requires one of --config/--preset"),
        };
        if let Some(Seeds(s)) = &self.seeds {
            spec.seeds = s.clone();
        }
        if self.budget.is_some() {
            spec.budget = self.budget;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Prints warnings and violations; returns whether the outcome is clean.
fn report(label: &str, outcome: &ExperimentOutcome) -> bool {
    for w in outcome.warnings() {
        eprintln!("warning: {label}: {w}");
    }
    for v in &outcome.violations {
        eprintln!(
            "invariant violated: {label}: seed {}: {}",
            v.seed, v.message
        );
    }
    let last = outcome.aggregate.last();
    println!(
        "{label}: queries={} mean_f={} std_f={} seeds={}",
        last.queries, last.mean, last.std, last.n_seeds
    );
    outcome.violations.is_empty()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, BenchError> {
    match cli.command {
        Command::Run(args) => {
            let spec = args.spec()?;
            let outcome = run_experiment(&spec)?;
            write_outcome(&args.out, &outcome)?;
            Ok(report(&spec.name, &outcome))
        }
        Command::Grid { common, mk } => {
            let spec = common.spec()?;
            let combos = if mk.is_empty() { spec.grid.clone() } else { mk };
            if combos.is_empty() {
                return Err(BenchError::Invalid(
                    "no (m, k) pairs: pass --mk or set `grid` in the spec".into(),
                ));
            }
            let study = mk_grid_study(&spec, &combos)?;
            write_grid(&common.out, &study)?;
            let mut ok = true;
            for row in &study.rows {
                let label = format!(
                    "m={} k={} predicted_variance={}",
                    row.m, row.k, row.predicted_variance
                );
                ok &= report(&label, &row.outcome);
            }
            Ok(ok)
        }
        Command::NoiseSweep { common, sigmas } => {
            let spec = common.spec()?;
            let sigmas = match (sigmas.is_empty(), spec.sigmas.is_empty()) {
                (false, _) => sigmas,
                (true, false) => spec.sigmas.clone(),
                (true, true) => default_sigmas(),
            };
            let levels = noise_sweep(&spec, &sigmas)?;
            write_noise(&common.out, &levels)?;
            let mut ok = true;
            for level in &levels {
                ok &= report(&format!("sigma={}", level.sigma), &level.outcome);
            }
            Ok(ok)
        }
        Command::VarianceCheck {
            dims,
            samples,
            seed,
            out,
        } => {
            let mut cfg = VarianceCheckConfig {
                dims,
                seed,
                ..Default::default()
            };
            if let Some(n) = samples {
                cfg.metric_samples = n;
            }
            let checks = variance_checks(&cfg)?;
            print!("{}", format_report(&checks));
            if let Some(dir) = out {
                write_checks(&dir, &checks)?;
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Presets => {
            for (name, _) in PRESETS {
                let spec = preset(name).expect("preset");
                println!(
                    "{name:<22} {} {} d={}",
                    spec.algorithm, spec.function, spec.dim
                );
            }
            Ok(true)
        }
    }
}
