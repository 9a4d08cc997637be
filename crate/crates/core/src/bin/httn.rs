//! Command-line runner for configured experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use httn::experiment::{compare, reference, run, ExperimentConfig, Reference, RunOptions, SweepTrace};
use httn::Error;

#[derive(Parser)]
#[command(name = "httn", version, about = "Classical and hybrid tree tensor network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every realization of a config and write traces plus summary.json.
    Run {
        config: PathBuf,
        /// Base seed; realization r uses seed + r.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realizations: Option<usize>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Exact ground energy of the configured model, as JSON.
    Reference {
        config: PathBuf,
        /// Also write reference.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Per-sweep absolute errors of traces against a reference file, as CSV.
    Compare {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        reference: PathBuf,
    },
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let report = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{report}");
    ExitCode::from(code)
}

fn execute(cmd: Command) -> httn::Result<ExitCode> {
    match cmd {
        Command::Run {
            config,
            seed,
            realizations,
            out_dir,
            workers,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            let hash = cfg.hash();
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = realizations {
                cfg.realizations = r;
            }
            cfg.validate()?;
            let (summary, _) = run(
                &cfg,
                &hash,
                &RunOptions {
                    out_dir: Some(out_dir),
                    workers,
                },
            )?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            let failed: Vec<u64> = summary.realizations.iter().filter(|r| !r.complete).map(|r| r.seed).collect();
            if failed.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(fail("realization", &format!("failed seeds: {failed:?}"), 3))
            }
        }
        Command::Reference { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let r = reference(&cfg, &cfg.hash())?;
            let json = serde_json::to_string_pretty(&r)?;
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir)?;
                httn::experiment::write_atomic(&dir.join("reference.json"), json.as_bytes())?;
            }
            println!("{json}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { traces, reference } => {
            let r: Reference = serde_json::from_str(&std::fs::read_to_string(&reference)?)?;
            let mut named = Vec::with_capacity(traces.len());
            for p in &traces {
                let t = SweepTrace::read(p)?;
                let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                named.push((name, t));
            }
            print!("{}", compare(&named, &r)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let code = match e {
                Error::Config(_) | Error::Json(_) => 2,
                _ => 1,
            };
            fail(e.kind(), &e.to_string(), code)
        }
    }
}
