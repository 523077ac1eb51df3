use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hyperprandtl::harness::{
    cmd_report, cmd_run, cmd_sweep, cmd_verify, schema, ExperimentKind, Fault, RunConfig,
    VerifyOptions,
};

/// Hyperbolic Prandtl and scaled Navier-Stokes simulator.
#[derive(Parser)]
#[command(name = "hyperprandtl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the property suite and print a JSON report.
    Verify {
        /// Corrupt one cut-off sample to confirm the suite fails.
        #[arg(long)]
        inject_fault: bool,
        /// Use the smallest supported grid.
        #[arg(long)]
        tiny: bool,
    },
    /// Run a single prandtl or hns experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run an eps sweep against the Prandtl reference.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write summary and plot files for a run or sweep directory.
    Report { dir: PathBuf },
    /// Print the default config, or the documented schema.
    Config {
        #[arg(long)]
        schema: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify { inject_fault, tiny } => {
            let mut opts = if tiny { VerifyOptions::tiny() } else { VerifyOptions::default() };
            if inject_fault {
                opts.fault = Some(Fault::CorruptPhi);
            }
            let report = cmd_verify(&opts)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            for name in report.failures() {
                eprintln!("FAILED: {name}");
            }
            Ok(report.passed)
        }
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if cfg.experiment.kind == ExperimentKind::Sweep {
                anyhow::bail!("config describes a sweep; use the sweep command");
            }
            let out = cmd_run(&cfg)?;
            let meta = &out.metadata;
            println!("{}", out.directory.display());
            if let Some(reason) = &meta.abort_reason {
                eprintln!("run aborted at t = {}: {reason}", meta.t_reached);
            }
            Ok(meta.success)
        }
        Command::Sweep { config } => {
            let cfg = RunConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let res = cmd_sweep(&cfg)?;
            for m in &res.members {
                println!("eps {:>10.4e}  sup L2 error {:.6e}", m.eps, m.sup_l2_error);
            }
            match res.slope {
                Some(s) => println!("slope {s:.4}"),
                None => println!("slope skipped"),
            }
            println!("{}", res.directory.display());
            Ok(true)
        }
        Command::Report { dir } => {
            for f in cmd_report(&dir)? {
                println!("{}", f.display());
            }
            Ok(true)
        }
        Command::Config { schema: with_schema } => {
            if with_schema {
                println!("{}", serde_json::to_string_pretty(&schema())?);
            } else {
                println!("{}", RunConfig::default().to_json());
            }
            Ok(true)
        }
    }
}
