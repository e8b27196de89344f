use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mec_relay::expcli::{run_diversity, run_fig2, run_fig3, run_point, ExperimentConfig};

#[derive(Parser)]
#[command(name = "mec-relay", version, about = "Outage experiments for relay-assisted edge computing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage versus relay (or source) SNR.
    Fig2(Common),
    /// Outage versus number of relays for two CPU-frequency populations.
    Fig3(Common),
    /// Fitted diversity order of each scheme.
    Diversity(Common),
    /// Monte Carlo and analytic outage at one operating point.
    Point(Common),
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// lbrs, cors, cpors or all.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    quad_inner_tol: Option<f64>,
    #[arg(long)]
    quad_outer_tol: Option<f64>,
    /// Override any config key, e.g. `--set relays=6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = &self.scheme {
            cfg.set("scheme", s)?;
        }
        if let Some(t) = self.quad_inner_tol {
            cfg.quad_inner_tol = t;
        }
        if let Some(t) = self.quad_outer_tol {
            cfg.quad_outer_tol = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

type Runner = fn(&ExperimentConfig, &mut dyn Write) -> Result<()>;

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (common, run): (&Common, Runner) = match &cli.command {
        Command::Fig2(c) => (c, |cfg, w| Ok(run_fig2(cfg)?.write_to(w)?)),
        Command::Fig3(c) => (c, |cfg, w| Ok(run_fig3(cfg)?.write_to(w)?)),
        Command::Diversity(c) => (c, |cfg, w| Ok(run_diversity(cfg)?.write_to(w)?)),
        Command::Point(c) => (c, |cfg, w| Ok(run_point(cfg)?.write_to(w)?)),
    };
    let cfg = common.resolve()?;
    let mut out = common.sink()?;
    run(&cfg, &mut out)?;
    out.flush()?;
    Ok(())
}
