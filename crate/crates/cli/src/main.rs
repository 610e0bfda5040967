use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wirearr_cli::{
    cmd_evaluate, cmd_oracle, cmd_render, cmd_run, load_config, CliError, CliResult, RunOverrides, WaypointSelection,
};

#[derive(Parser)]
#[command(name = "wirearr", version, about = "Wire arrangement optimization for tendon-driven joints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimization and write the result bundle.
    Run {
        /// Config file or preset name.
        #[arg(long)]
        config: String,
        /// Output directory; defaults to the config's `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
    },
    /// Evaluate one design and print the scores as JSON.
    Evaluate {
        design: PathBuf,
        #[arg(long)]
        config: String,
    },
    /// Dense-grid crossing check of one design against the detector.
    Oracle {
        design: PathBuf,
        #[arg(long)]
        config: String,
        /// Grid points per trajectory segment.
        #[arg(long, default_value_t = 10_001)]
        samples: usize,
    },
    /// Render side, top and torque views of one design.
    Render {
        design: PathBuf,
        #[arg(long)]
        config: String,
        /// `all` or a 1-based waypoint number.
        #[arg(long, default_value = "all")]
        waypoint: WaypointSelection,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_json(value: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.into()))?;
    println!("{text}");
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            population,
            generations,
        } => {
            let overrides = RunOverrides {
                seed,
                population,
                generations,
            };
            let cfg = load_config(&config, &overrides)?;
            let (bundle, written) = cmd_run(&cfg, out.as_deref())?;
            let best = &bundle.design_1;
            println!(
                "{}: {} evaluations, {} archive entries, design_1 e_cross={} log_e_torque={}",
                cfg.name,
                bundle.samples.len(),
                bundle.archive.len(),
                best.e_cross.unwrap_or(0),
                best.log_e_torque.unwrap_or(f64::NAN)
            );
            for p in written {
                println!("  {}", p.display());
            }
            Ok(())
        }
        Command::Evaluate { design, config } => {
            let cfg = load_config(&config, &RunOverrides::default())?;
            print_json(&cmd_evaluate(&cfg, &design)?)
        }
        Command::Oracle { design, config, samples } => {
            let cfg = load_config(&config, &RunOverrides::default())?;
            print_json(&cmd_oracle(&cfg, &design, samples)?)
        }
        Command::Render {
            design,
            config,
            waypoint,
            out,
        } => {
            let cfg = load_config(&config, &RunOverrides::default())?;
            for p in cmd_render(&cfg, &design, waypoint, out.as_deref())? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { wirearr_cli::EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
