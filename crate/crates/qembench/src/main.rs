//! Benchmark CLI: enumerate the noise-robustness experiment grid, run the
//! training configurations with repetitions, persist results, and emit the
//! summary table and figures.
//!
//! Exit codes: 0 success, 1 config error, 2 partial failures present,
//! 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qem_core::data::{load_iris, prepare};

use qembench::config::BenchConfig;
use qembench::{fetch, grid, plot, records, runner, summary};

#[derive(Parser)]
#[command(name = "qembench", version, about = "Noise-robustness benchmark for a hybrid quantum classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment grid described by a config file.
    Run {
        /// JSON config file; `{}` reproduces the default benchmark grid.
        #[arg(long)]
        config: PathBuf,
        /// Worker threads for grid execution.
        #[arg(long, default_value_t = 2)]
        parallel: usize,
        /// Skip (configuration, repetition) pairs already in the store.
        #[arg(long)]
        resume: bool,
        /// Output directory for results.ndjson / results.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Aggregate recorded results into the interval summary table.
    Summarize {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Draw accuracy-vs-noise figures from recorded results.
    Plot {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Emit per-figure CSV data instead of SVG drawings.
        #[arg(long)]
        data_only: bool,
    },
    /// Parse and validate a config file, reporting the grid size.
    ValidateConfig { config: PathBuf },
    /// Download the canonical dataset and verify its checksum.
    FetchData {
        #[arg(long, default_value = "data/iris.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            parallel,
            resume,
            out,
        } => {
            let bench = match BenchConfig::load(&config) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("config error: {e:#}");
                    return Ok(ExitCode::from(1));
                }
            };
            let dataset = load_iris(&bench.dataset)
                .map_err(|e| anyhow::anyhow!("dataset: {e}"))?;
            let split = prepare(&dataset, bench.base_seed, bench.reduction);
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("split_manifest.json"), split.manifest_json())?;
            std::fs::write(out.join("config.json"), serde_json::to_string_pretty(&bench)?)?;

            let runs = grid::expand_grid(&bench);
            let existing = if resume {
                records::load_records(&out)?
            } else if out.join(records::RESULTS_NDJSON).exists() {
                eprintln!(
                    "error: {} already exists; pass --resume to continue it",
                    out.join(records::RESULTS_NDJSON).display()
                );
                return Ok(ExitCode::from(1));
            } else {
                Vec::new()
            };
            let (all_records, any_failures) =
                runner::run_grid(&runs, &bench, &split, &out, parallel, existing)?;
            let ordered = records::sorted(all_records);
            records::write_csv(&out, &ordered)?;
            summary::write_summary(&out, &summary::summarize(&ordered))?;
            eprintln!(
                "done: {} records, results in {}",
                ordered.len(),
                out.display()
            );
            Ok(if any_failures {
                eprintln!("warning: some runs failed; see status column");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Summarize { out } => {
            let ordered = records::sorted(records::load_records(&out)?);
            if ordered.is_empty() {
                eprintln!("no records found in {}", out.display());
                return Ok(ExitCode::from(1));
            }
            let table = summary::summarize(&ordered);
            summary::write_summary(&out, &table)?;
            print!("{}", summary::render_text(&table));
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { out, data_only } => {
            let ordered = records::sorted(records::load_records(&out)?);
            if ordered.is_empty() {
                eprintln!("no records found in {}", out.display());
                return Ok(ExitCode::from(1));
            }
            let written = plot::plot(&ordered, &out, data_only)?;
            for f in written {
                eprintln!("wrote {}", out.join(f).display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateConfig { config } => match BenchConfig::load(&config) {
            Ok(bench) => {
                let runs = grid::expand_grid(&bench);
                println!(
                    "valid: {} configurations, {} runs ({} repetitions each)",
                    grid::config_count(&runs),
                    runs.len(),
                    bench.repetitions
                );
                Ok(ExitCode::SUCCESS)
            }
            Err(e) => {
                eprintln!("config error: {e:#}");
                Ok(ExitCode::from(1))
            }
        },
        Command::FetchData { out } => {
            fetch::fetch_data(&out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
