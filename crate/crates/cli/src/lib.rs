//! Command-line front end for wirearr experiments: config loading, optimization runs,
//! single-design evaluation, the dense-grid crossing oracle and SVG rendering.

pub mod bundle;
pub mod config;
pub mod evaluate;
pub mod oracle;
pub mod presets;
pub mod render;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use wirearr::mechanism::DesignParams;
use wirearr::objectives::Evaluator;

use bundle::{DesignRecord, ResultBundle};
use config::ExperimentConfig;
use evaluate::EvaluationReport;
use oracle::OracleReport;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

/// A failed command: either bad input (exit 2) or a failure while running (exit 3).
#[derive(Debug)]
pub enum CliError {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn config(e: impl Into<anyhow::Error>) -> Self {
        CliError::Config(e.into())
    }

    fn runtime(e: impl Into<anyhow::Error>) -> Self {
        CliError::Runtime(e.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (CliError::Config(e) | CliError::Runtime(e)) = self;
        write!(f, "{e:#}")
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub population: Option<usize>,
    pub generations: Option<usize>,
}

/// Loads `target` (a file path or preset name) and applies command-line overrides.
pub fn load_config(target: &str, overrides: &RunOverrides) -> CliResult<ExperimentConfig> {
    let mut cfg = config::load(target).map_err(CliError::config)?;
    if let Some(seed) = overrides.seed {
        cfg.ga.seed = seed;
    }
    if let Some(p) = overrides.population {
        cfg.ga.population_size = p;
    }
    if let Some(g) = overrides.generations {
        cfg.ga.generations = g;
    }
    cfg.ga
        .validate()
        .map_err(|e| CliError::config(anyhow::anyhow!("{target}: {e}")))?;
    Ok(cfg)
}

pub fn cmd_run(cfg: &ExperimentConfig, out: Option<&Path>) -> CliResult<(ResultBundle, Vec<PathBuf>)> {
    let dir = out.map_or_else(|| cfg.output_dir.clone(), Path::to_path_buf);
    let bundle = bundle::run_experiment(cfg).map_err(CliError::runtime)?;
    let written = bundle::write_bundle(cfg, &bundle, &dir).map_err(CliError::runtime)?;
    Ok((bundle, written))
}

fn load_design(cfg: &ExperimentConfig, path: &Path) -> CliResult<DesignParams> {
    let record = DesignRecord::load(path).map_err(CliError::runtime)?;
    record
        .design(cfg)
        .with_context(|| format!("{} does not fit the configured mechanism", path.display()))
        .map_err(CliError::config)
}

fn evaluator(cfg: &ExperimentConfig) -> CliResult<Evaluator> {
    Evaluator::new(cfg.mechanism.clone(), cfg.trajectory.clone(), cfg.settings.clone()).map_err(CliError::config)
}

pub fn cmd_evaluate(cfg: &ExperimentConfig, design_path: &Path) -> CliResult<EvaluationReport> {
    let design = load_design(cfg, design_path)?;
    let ev = evaluator(cfg)?;
    let evaluation = ev.evaluate(&design);
    Ok(EvaluationReport::new(&ev, &design, &evaluation))
}

pub fn cmd_oracle(cfg: &ExperimentConfig, design_path: &Path, samples: usize) -> CliResult<OracleReport> {
    if samples < 2 {
        return Err(CliError::config(anyhow::anyhow!("--samples must be at least 2, got {samples}")));
    }
    let design = load_design(cfg, design_path)?;
    Ok(oracle::oracle_report(
        &cfg.mechanism,
        &design,
        &cfg.trajectory,
        cfg.settings.epsilon,
        samples,
    ))
}

/// Which waypoints to render.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaypointSelection {
    All,
    /// 1-based.
    One(usize),
}

impl std::str::FromStr for WaypointSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(WaypointSelection::All);
        }
        match s.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(WaypointSelection::One(i)),
            _ => Err(format!("expected `all` or a waypoint number starting at 1, got `{s}`")),
        }
    }
}

pub fn cmd_render(
    cfg: &ExperimentConfig,
    design_path: &Path,
    which: WaypointSelection,
    out: Option<&Path>,
) -> CliResult<Vec<PathBuf>> {
    let design = load_design(cfg, design_path)?;
    let count = cfg.trajectory.waypoints.len();
    let numbers: Vec<usize> = match which {
        WaypointSelection::All => (1..=count).collect(),
        WaypointSelection::One(i) if i <= count => vec![i],
        WaypointSelection::One(i) => {
            return Err(CliError::config(anyhow::anyhow!(
                "waypoint {i} out of range, the trajectory has {count}"
            )))
        }
    };
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => design_path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(CliError::runtime)?;
    let stem = design_path
        .file_stem()
        .map_or_else(|| "design".to_string(), |s| s.to_string_lossy().into_owned());
    let mut written = Vec::new();
    for n in numbers {
        let svg = render::waypoint_view(cfg, &design, &cfg.trajectory.waypoints[n - 1], n).map_err(CliError::runtime)?;
        let path = dir.join(format!("{stem}_wp{n}.svg"));
        fs::write(&path, svg)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(CliError::runtime)?;
        written.push(path);
    }
    Ok(written)
}
