//! `fofdm` — layered ACO-FOFDM BER simulator.
//!
//! Subcommands: `run` sweeps one configured system and writes a CSV curve,
//! `compare` measures the dB gain of one configuration over another at a
//! target BER, `selftest` runs the built-in verification suites.

mod selftest;

use clap::{Parser, Subcommand};
use fofdm_core::harness::{gain_at_ber, run_sweep};
use fofdm_core::{config, Error, SweepConfig};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fofdm", about = "Layered ACO-FOFDM BER simulation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one sweep from a config file and write the BER curve as CSV.
    Run {
        /// Sweep configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config file's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker thread count (defaults to the logical CPU count).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Measure the dB gain of config A over config B at a target BER.
    Compare {
        /// Two sweep configuration files: A then B.
        #[arg(long, num_args = 1, action = clap::ArgAction::Append, required = true)]
        config: Vec<PathBuf>,
        /// Target BER at which the gain is read.
        #[arg(long, default_value_t = 1e-3)]
        target_ber: f64,
        /// Optional path for the text report (stdout always gets a copy).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override both config files' master seeds.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker thread count.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the built-in property suites and print one PASS/FAIL line each.
    Selftest {
        /// Worker thread count.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn setup_threads(threads: Option<usize>) -> Result<(), String> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<SweepConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut cfg =
        config::parse_sweep_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => {
            setup_threads(threads)?;
            let cfg = load_config(&config, seed)?;
            let curve = run_sweep(&cfg).map_err(|e| e.to_string())?;
            let csv = curve.to_csv();
            match out {
                Some(path) => {
                    fs::write(&path, csv).map_err(|e| format!("{}: {e}", path.display()))?
                }
                None => print!("{csv}"),
            }
            for row in &curve.rows {
                if row.capped {
                    eprintln!(
                        "note: point {:.4} dB hit max_bits with {} errors; BER is an upper bound",
                        row.ebn0_db, row.errors
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            config,
            target_ber,
            out,
            seed,
            threads,
        } => {
            if config.len() != 2 {
                return Err("compare needs exactly two --config files".into());
            }
            setup_threads(threads)?;
            let cfg_a = load_config(&config[0], seed)?;
            let cfg_b = load_config(&config[1], seed)?;
            let curve_a = run_sweep(&cfg_a).map_err(|e| e.to_string())?;
            let curve_b = run_sweep(&cfg_b).map_err(|e| e.to_string())?;
            let cross = |curve, label: &Path| {
                fofdm_core::harness::crossing_at(curve, target_ber).map_err(|e| match e {
                    Error::TargetNotBracketed(_) => format!(
                        "{}: curve does not bracket BER {target_ber:e}; widen `points`",
                        label.display()
                    ),
                    other => other.to_string(),
                })
            };
            let xa = cross(&curve_a, &config[0])?;
            let xb = cross(&curve_b, &config[1])?;
            let gain = gain_at_ber(&curve_a, &curve_b, target_ber).map_err(|e| e.to_string())?;
            let mut report = String::new();
            report.push_str(&format!(
                "target BER          : {target_ber:e}\n\
                 A ({}) crosses at  : {xa:.3} dB ({})\n\
                 B ({}) crosses at  : {xb:.3} dB ({})\n\
                 gain of A over B    : {gain:.3} dB\n",
                config[0].display(),
                cfg_a.system.label(),
                config[1].display(),
                cfg_b.system.label(),
            ));
            print!("{report}");
            if let Some(path) = out {
                fs::write(&path, report).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { threads } => {
            setup_threads(threads)?;
            let ok = selftest::run_all();
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
