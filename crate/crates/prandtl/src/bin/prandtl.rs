//! Thin command-line front end; all functionality lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use prandtl::config::ScenarioConfig;
use prandtl::runner::{self, output_root, run_dir_name};
use prandtl::verify::verify_all;

#[derive(Parser)]
#[command(name = "prandtl", about = "One-equation URANS runs, sweeps, and verification checks", version)]
struct Cli {
    /// Output root directory (default: $PRANDTL_OUT or the working directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario end to end and write stats, snapshots, checkpoints,
    /// and a manifest.
    Run { config: PathBuf },
    /// Run the verification battery for a configuration; exit 0 only if all
    /// asserted checks pass.
    Verify { config: PathBuf },
    /// Compare two completed runs by their manifests.
    Compare { manifest_a: PathBuf, manifest_b: PathBuf },
    /// Run one simulation per parameter value.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn main_inner() -> Result<bool> {
    let cli = Cli::parse();
    let root = output_root(cli.out.as_deref());

    match cli.command {
        Command::Run { config } => {
            let cfg = ScenarioConfig::from_file(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let dir = root.join(run_dir_name(&cfg));
            let result = runner::run(&cfg, Some(&dir))?;
            println!(
                "run {} finished: {} steps in {:.2}s, outputs in {}",
                result.manifest.run_name,
                result.manifest.diagnostics.steps,
                result.manifest.diagnostics.wall_seconds,
                dir.display()
            );
            Ok(true)
        }
        Command::Verify { config } => {
            let cfg = ScenarioConfig::from_file(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let dir = root.join(format!("{}-verify", run_dir_name(&cfg)));
            let (reports, overall) = verify_all(&cfg, Some(&dir))?;
            for r in &reports {
                let status = if r.pass {
                    "PASS"
                } else if !r.asserted {
                    "INFO"
                } else {
                    "FAIL"
                };
                println!("[{status}] {}", r.condition);
            }
            println!(
                "verification {}: report in {}",
                if overall { "passed" } else { "FAILED" },
                dir.display()
            );
            Ok(overall)
        }
        Command::Compare { manifest_a, manifest_b } => {
            let dir = root.join("comparison");
            let cmp = runner::compare_manifests(&manifest_a, &manifest_b, &dir)?;
            for (name, diff) in &cmp.avg_diff {
                match diff {
                    Some(d) => println!("{name}: time-averaged difference {d:.6e}"),
                    None => println!("{name}: undefined"),
                }
            }
            println!("comparison written to {}", dir.display());
            Ok(true)
        }
        Command::Sweep { config, param, values } => {
            let cfg = ScenarioConfig::from_file(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let (param, values) = if values.is_empty() {
                let spec = cfg
                    .sweep
                    .clone()
                    .context("no --values given and the config has no sweep block")?;
                (spec.param, spec.values)
            } else {
                (param, values)
            };
            let results = runner::sweep(&cfg, &param, &values, Some(&root))?;
            for r in &results {
                println!(
                    "{}: {} steps, {:.2}s",
                    r.manifest.run_name, r.manifest.diagnostics.steps, r.manifest.diagnostics.wall_seconds
                );
            }
            println!("sweep summary in {}", root.join("sweep_summary.csv").display());
            Ok(true)
        }
    }
}
