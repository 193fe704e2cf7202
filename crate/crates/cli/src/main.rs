//! `qfisher` command-line front end.
//!
//! Exit status: 0 when every verdict passes, 1 on a failed verdict, 2 on a
//! usage error, 3 on a numerical error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod density;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{read_kv_file, UsageError};

#[derive(Parser, Debug)]
#[command(name = "qfisher", version, about = "Generalized q-entropies, Fisher information and q-Gaussians")]
struct Cli {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Entropies and Fisher informations of a density.
    Info(Flags),
    /// Evolve the doubly nonlinear diffusion and check the de Bruijn identity.
    Diffuse(Flags),
    /// Cramér-Rao bounds for a registered parametric model.
    Crbound(Flags),
    /// Stam ratio of a density, optionally against perturbed q-Gaussians.
    Stam(Flags),
    /// Minimality of q-Gaussian Fisher information under a constraint.
    Minimize(Flags),
    /// q-Cramér-Rao product of a density.
    Qcr(Flags),
    /// Run the acceptance suite and print its summary.
    Reproduce(Flags),
}

/// Typed shortcuts for common keys plus generic `--set key=value`.
#[derive(Args, Debug, Clone, Default)]
struct Flags {
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    perturbations: Option<usize>,
    /// Output format: json, csv (diffuse) or text (reproduce).
    #[arg(long)]
    format: Option<String>,
    /// Extra `key=value` settings; may be repeated.
    #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Info(_) => "info",
            Command::Diffuse(_) => "diffuse",
            Command::Crbound(_) => "crbound",
            Command::Stam(_) => "stam",
            Command::Minimize(_) => "minimize",
            Command::Qcr(_) => "qcr",
            Command::Reproduce(_) => "reproduce",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Info(f)
            | Command::Diffuse(f)
            | Command::Crbound(f)
            | Command::Stam(f)
            | Command::Minimize(f)
            | Command::Qcr(f)
            | Command::Reproduce(f) => f,
        }
    }
}

impl Flags {
    fn overrides(&self) -> Result<BTreeMap<String, String>, UsageError> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("q", self.q.map(|v| v.to_string()));
        put("alpha", self.alpha.map(|v| v.to_string()));
        put("beta", self.beta.map(|v| v.to_string()));
        put("m", self.m.map(|v| v.to_string()));
        put("n", self.n.map(|v| v.to_string()));
        put("gamma", self.gamma.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("trials", self.trials.map(|v| v.to_string()));
        put("t_end", self.t_end.map(|v| v.to_string()));
        put("points", self.points.map(|v| v.to_string()));
        put("perturbations", self.perturbations.map(|v| v.to_string()));
        put("format", self.format.clone());
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| UsageError::new(s.clone(), "expected --set key=value"))?;
            m.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(m)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("QFISHER_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => {
                qfisher::numerics::par::init_global_threads(t);
            }
            _ => {
                eprintln!("error: QFISHER_THREADS must be a positive integer, got `{v}`");
                return ExitCode::from(2);
            }
        }
    }
    let outcome = (|| {
        let file = match &cli.config {
            Some(p) => read_kv_file(p)?,
            None => BTreeMap::new(),
        };
        let overrides = cli.command.flags().overrides()?;
        Ok::<_, commands::CliError>((file, overrides))
    })()
    .and_then(|(file, overrides)| commands::run(cli.command.name(), file, overrides));
    match outcome {
        Ok(report) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &report.body).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{}", report.body);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("verdict: FAIL");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
