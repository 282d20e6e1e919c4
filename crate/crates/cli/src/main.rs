//! `wavechain`: build a wave system, run analyses, write `report.json`,
//! `trace.csv` and `profile.csv`.
//!
//! Exit status: 0 on success, 1 on bad input, 2 when a checked bound is
//! violated numerically.

// `!(x > 0.0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod analysis;
mod config;
mod error;
mod registry;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{parse_analyses, parse_param, Analysis, Bijection, ExperimentConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "wavechain", version, about = "Exact analysis of Markov chains transported along a bijection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured analyses (default: spectral, stability, merging, bounds).
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Comma-separated analyses.
        #[arg(long)]
        analyses: Option<String>,
        #[command(flatten)]
        merge: MergeArgs,
    },
    /// Relative-sup (or other) merging time and its trace.
    MergeTime {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        merge: MergeArgs,
    },
    /// Invariant measure of the reduced kernel, optionally against a simulation.
    WaveProfile {
        #[command(flatten)]
        common: Common,
        /// Simulated samples (0 skips the simulation).
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        burn_in: Option<u64>,
        /// Recording stride; defaults to the order of the bijection.
        #[arg(long)]
        stride: Option<u64>,
    },
    /// Endpoint histogram of simulated paths against the exact distribution.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        start: Option<usize>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Stability ratios of a circle model under many bijections.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Number of random bijections.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Merging times across sizes with a log-log fit.
    Scaling {
        #[command(flatten)]
        common: Common,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Merging threshold of the sweep.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        max_steps: Option<u64>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment document; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Zoo name or path to a kernel document.
    #[arg(long)]
    model: Option<String>,
    /// Model parameter, repeatable.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// identity, shift:<s>, random:<seed>, a JSON file, or a vector like [1,2,0].
    #[arg(long)]
    bijection: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Merging threshold.
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct MergeArgs {
    /// tv, relative-sup or chi-square.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    max_steps: Option<u64>,
    /// Largest n in the wave-bound dominance check.
    #[arg(long)]
    bound_horizon: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(m) = &self.model {
            cfg.model = m.clone();
        }
        for p in &self.params {
            let (k, v) = parse_param(p)?;
            cfg.params.insert(k, v);
        }
        if let Some(b) = &self.bijection {
            cfg.bijection = Some(b.parse::<Bijection>()?);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        Ok(cfg)
    }
}

impl MergeArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(m) = &self.metric {
            cfg.metric = m.clone();
        }
        if let Some(s) = self.max_steps {
            cfg.max_steps = s;
        }
        if let Some(h) = self.bound_horizon {
            cfg.bound_horizon = h;
        }
    }
}

fn configure(command: Command) -> Result<ExperimentConfig, CliError> {
    let mut cfg;
    match command {
        Command::Analyze { common, analyses, merge } => {
            cfg = common.resolve()?;
            if let Some(a) = analyses {
                cfg.analyses = parse_analyses(&a)?;
            }
            merge.apply(&mut cfg);
        }
        Command::MergeTime { common, merge } => {
            cfg = common.resolve()?;
            cfg.analyses = vec![Analysis::Merging];
            merge.apply(&mut cfg);
        }
        Command::WaveProfile { common, samples, burn_in, stride } => {
            cfg = common.resolve()?;
            cfg.analyses = vec![Analysis::WaveProfile];
            cfg.samples = samples.unwrap_or(cfg.samples);
            cfg.burn_in = burn_in.unwrap_or(cfg.burn_in);
            cfg.stride = stride.or(cfg.stride);
        }
        Command::Simulate { common, start, steps, trials } => {
            cfg = common.resolve()?;
            cfg.analyses = vec![Analysis::Simulate];
            cfg.start = start.unwrap_or(cfg.start);
            cfg.steps = steps.unwrap_or(cfg.steps);
            cfg.trials = trials.unwrap_or(cfg.trials);
        }
        Command::Scan { common, count } => {
            cfg = common.resolve()?;
            cfg.analyses = vec![Analysis::ScanPermutations];
            cfg.count = count.unwrap_or(cfg.count);
        }
        Command::Scaling { common, sizes, eta, max_steps } => {
            cfg = common.resolve()?;
            cfg.analyses = vec![Analysis::Scaling];
            cfg.sizes = sizes.unwrap_or(cfg.sizes);
            cfg.eta = eta.unwrap_or(cfg.eta);
            cfg.max_steps = max_steps.unwrap_or(cfg.max_steps);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn execute(command: Command) -> Result<ExitCode, CliError> {
    let cfg = configure(command)?;
    let outcome = analysis::run(&cfg)?;
    std::fs::create_dir_all(&cfg.output).map_err(|source| CliError::Io {
        path: cfg.output.clone(),
        source,
    })?;
    let report = json!({
        "config": cfg,
        "results": outcome.results,
        "violations": outcome.violations,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write(&cfg.output, "report.json", &text)?;
    write(&cfg.output, "trace.csv", outcome.trace_csv.as_deref().unwrap_or("n,distance\n"))?;
    write(&cfg.output, "profile.csv", outcome.profile_csv.as_deref().unwrap_or("state,mass\n"))?;
    for v in &outcome.violations {
        eprintln!("violated {}: {} ({})", v.check, v.inequality, v.detail);
    }
    println!(
        "wrote {}/report.json ({} analyses, {} violations)",
        cfg.output.display(),
        cfg.analyses.len(),
        outcome.violations.len()
    );
    Ok(if outcome.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    // Usage errors are input errors (1); status 2 is reserved for violated bounds.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
