//! Command-line front end.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::io::{Pipeline, Preset, RunConfig};
use crate::run::{run_pipeline, validate, validate_base};
use crate::units::{from_si, Unit};

#[derive(Debug, Parser)]
#[command(name = "swapgate", version, about = "Two-atom sqrt-SWAP gate simulations in optical tweezers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for scans and FFT rows.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Fixed time step in seconds.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Grid points per axis.
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    /// Optimizer start-simplex seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary fast gate, calibrating the interaction scale if unset.
    FastGate,
    /// Tight-binding gate along a cosine separation trajectory.
    Adiabatic,
    /// Gate in a scale-invariant driven trap.
    Sta,
    /// Fidelity against the interaction scale.
    ScanGamma,
    /// Calibrated fidelity against the initial packet width.
    ScanSqueezing,
    /// Search drive exponents.
    OptimizeDriving,
    /// Invariant checks; uses a 128^2 reference setup without --config.
    Validate,
    /// Run a built-in experiment.
    Preset {
        /// fig1, fig2, fig3, fig4, adiabatic-baseline or sta-paper.
        name: String,
        /// Print the resolved config instead of running.
        #[arg(long)]
        print: bool,
    },
}

impl Cli {
    fn apply_overrides(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(n) = self.grid_n {
            cfg.grid.n = n;
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::Config("--dt must be positive".into()));
            }
            cfg.protocol.dt_us = Some(from_si(dt, Unit::Microsecond));
        }
        if let Some(s) = self.seed {
            cfg.protocol.optimizer.rng_seed = Some(s);
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        cfg.check()
    }

    fn load(&self) -> Result<RunConfig> {
        let path = self.config.as_ref().ok_or_else(|| Error::Config("this command needs --config <path>".into()))?;
        let mut cfg = RunConfig::load(path)?;
        self.apply_overrides(&mut cfg)?;
        Ok(cfg)
    }
}

/// What a successful run prints.
pub struct Outcome {
    pub lines: Vec<String>,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::warn!("thread pool already initialised; ignoring --threads");
        }
    }
    let pipeline = match &cli.command {
        Command::FastGate => Pipeline::FastGate,
        Command::Adiabatic => Pipeline::Adiabatic,
        Command::Sta => Pipeline::Sta,
        Command::ScanGamma => Pipeline::ScanGamma,
        Command::ScanSqueezing => Pipeline::ScanSqueezing,
        Command::OptimizeDriving => Pipeline::OptimizeDriving,
        Command::Validate => {
            let cfg = match &cli.config {
                Some(_) => cli.load()?,
                None => {
                    let mut c = validate_base();
                    c.output.dir = PathBuf::from("out/validate");
                    cli.apply_overrides(&mut c)?;
                    c
                }
            };
            let (lines, failed) = validate(&cfg, &cfg.output.dir)?;
            for l in &lines {
                println!("{l}");
            }
            if failed > 0 {
                return Err(Error::Precision(format!("{failed} invariant check(s) failed")));
            }
            return Ok(Outcome { lines: vec!["all invariant checks passed".into()] });
        }
        Command::Preset { name, print } => {
            if cli.config.is_some() {
                return Err(Error::Config("preset does not take --config".into()));
            }
            let preset: Preset = name.parse()?;
            let mut cfg = preset.config();
            cli.apply_overrides(&mut cfg)?;
            if *print {
                return Ok(Outcome { lines: vec![cfg.resolved()?.to_toml_string()?] });
            }
            let lines = run_pipeline(preset.pipeline(), &cfg, &cfg.output.dir)?;
            return Ok(Outcome { lines });
        }
    };
    let cfg = cli.load()?;
    let lines = run_pipeline(pipeline, &cfg, &cfg.output.dir)?;
    Ok(Outcome { lines })
}
