use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aqmflow::error::{CliError, ConfigError, Origin, Result};
use aqmflow::output::{convergence_cell, opt_sig6, sig6, text_table};
use aqmflow::presets::PRESETS;
use aqmflow::report::{op_report, render_op, render_stability, stability_rows, write_stability_csv};
use aqmflow::run::{run_models, thread_pool, write_outputs};
use aqmflow::sweep::{sweep, write_sweep_csv, Axis};
use aqmflow::{ConfigLoader, ExperimentConfig};

/// Fluid-model simulation of TCP/AQM congestion dynamics.
#[derive(Parser)]
#[command(name = "aqmflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every configured model and write one CSV each plus metrics.csv.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print operating points, rho inversions and the congestion level.
    Op {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        measured_p0: Option<String>,
    },
    /// Print the Routh stability report of the linearised PI loop.
    Stability {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        measured_p0: Option<String>,
        /// Print CSV instead of the aligned table.
        #[arg(long)]
        csv: bool,
        /// Also write stability.csv into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vary one parameter and tabulate operating points and run metrics.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// n_flows, capacity (Mb/s) or prop_delay (s).
        #[arg(long)]
        axis: Axis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Skip the simulations; report operating points only.
        #[arg(long)]
        op_only: bool,
        /// Write sweep.csv into this directory instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct Source {
    /// Experiment file (flat `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a built-in preset (replaces a `preset` key in the file).
    #[arg(long)]
    preset: Option<String>,
    /// Override a key, e.g. `--set n_flows=800`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Source {
    fn loader(&self) -> Result<ConfigLoader> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path).map_err(|e| {
                ConfigError::new(Origin::Flag("--config"), format!("{}: {e}", path.display()))
            })?,
            None => String::new(),
        };
        let mut loader = ConfigLoader::new(&text).map_err(|mut e| {
            if let Some(path) = &self.config {
                e.message = format!("{} ({})", e.message, path.display());
            }
            e
        })?;
        if let Some(name) = &self.preset {
            loader = loader.preset(name)?;
        }
        for kv in &self.overrides {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                ConfigError::new(Origin::Flag("--set"), format!("expected KEY=VALUE, got `{kv}`"))
            })?;
            loader = loader.set(k.trim(), v, "--set")?;
        }
        Ok(loader)
    }
}

fn with_flag(loader: ConfigLoader, key: &str, value: Option<&String>, flag: &'static str) -> Result<ConfigLoader> {
    Ok(match value {
        Some(v) => loader.set(key, v, flag)?,
        None => loader,
    })
}

fn print_metrics(cfg: &ExperimentConfig, runs: &[aqmflow::run::ModelRun]) {
    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|r| {
            vec![
                r.entry.label(),
                sig6(r.metrics.settled_q),
                sig6(r.metrics.settled_p),
                convergence_cell(&r.metrics),
                opt_sig6(r.metrics.bound_gap),
            ]
        })
        .collect();
    println!(
        "{} s at dt = {} ({}), aqm = {}",
        cfg.duration,
        cfg.dt,
        cfg.preset.unwrap_or("custom"),
        cfg.aqm.name()
    );
    print!(
        "{}",
        text_table(&["model", "settled_q", "settled_p", "convergence_time", "bound_gap"], &rows)
    );
}

fn create(path: &PathBuf) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { source, out } => {
            let out = out.map(|p| p.to_string_lossy().into_owned());
            let cfg = with_flag(source.loader()?, "output.dir", out.as_ref(), "--out")?.build()?;
            let runs = run_models(&cfg, &thread_pool()?)?;
            let written = write_outputs(&cfg.output.dir, &runs)?;
            print_metrics(&cfg, &runs);
            for path in written {
                println!("wrote {}", path.display());
            }
        }
        Command::Op { source, measured_p0 } => {
            let cfg = with_flag(source.loader()?, "measured_p0", measured_p0.as_ref(), "--measured-p0")?.build()?;
            let report = op_report(&cfg)?;
            print!("{}", render_op(&cfg, &report));
        }
        Command::Stability {
            source,
            measured_p0,
            csv,
            out,
        } => {
            let cfg = with_flag(source.loader()?, "measured_p0", measured_p0.as_ref(), "--measured-p0")?.build()?;
            let rows = stability_rows(&cfg)?;
            if csv {
                write_stability_csv(io::stdout().lock(), &rows)?;
            } else {
                print!("{}", render_stability(&rows));
            }
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
                let path = dir.join("stability.csv");
                write_stability_csv(create(&path)?, &rows)?;
            }
        }
        Command::Sweep {
            source,
            axis,
            values,
            op_only,
            out,
        } => {
            let loader = source.loader()?;
            let rows = sweep(&loader, axis, &values, !op_only, &thread_pool()?)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
                    let path = dir.join("sweep.csv");
                    write_sweep_csv(create(&path)?, axis, &rows)?;
                    println!("wrote {}", path.display());
                }
                None => write_sweep_csv(io::stdout().lock(), axis, &rows)?,
            }
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("aqmflow: {failed} of {} sweep rows failed", rows.len());
            }
        }
        Command::Presets => {
            let rows: Vec<Vec<String>> = PRESETS
                .iter()
                .map(|p| vec![p.name.to_string(), p.description.to_string()])
                .collect();
            print!("{}", text_table(&["preset", "description"], &rows));
        }
    }
    io::stdout().flush().map_err(|e| CliError::io("stdout", e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aqmflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
