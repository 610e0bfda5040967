//! Experiment config files: TOML on disk (or a built-in preset), validated into the
//! library types. Angles are degrees in the file and radians everywhere after loading.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use wirearr::mechanism::{ConfigError as MechError, JointAngles, MechanismConfig};
use wirearr::moo::GaConfig;
use wirearr::objectives::{EvaluationSettings, Trajectory, DEFAULT_EPSILON, DEFAULT_R_MIN};
use wirearr::torque_space::TensionBounds;

use crate::presets;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFileError {
    pub origin: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.origin, line, self.message),
            None => write!(f, "{}: {}", self.origin, self.message),
        }
    }
}

impl std::error::Error for ConfigFileError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mechanism: RawMechanism,
    tension: RawTension,
    trajectory: RawTrajectory,
    #[serde(default)]
    thresholds: RawThresholds,
    #[serde(default)]
    ga: RawGa,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMechanism {
    disc_radius: f64,
    link_length: f64,
    dofs: usize,
    wires: usize,
    points_per_wire: usize,
    #[serde(default)]
    link_clearance: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTension {
    f_min: f64,
    f_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrajectory {
    waypoints_deg: Vec<Vec<f64>>,
    #[serde(default)]
    close_loop: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_r_min")]
    r_min: f64,
    #[serde(default)]
    sphere_center: Option<Vec<f64>>,
}

impl Default for RawThresholds {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            r_min: DEFAULT_R_MIN,
            sphere_center: None,
        }
    }
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_r_min() -> f64 {
    DEFAULT_R_MIN
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGa {
    population: Option<usize>,
    generations: Option<usize>,
    seed: Option<u64>,
    crossover_prob: Option<f64>,
    crossover_eta: Option<f64>,
    mutation_prob: Option<f64>,
    mutation_eta: Option<f64>,
    parallel: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub mechanism: MechanismConfig,
    pub settings: EvaluationSettings,
    pub trajectory: Trajectory,
    pub waypoints_deg: Vec<Vec<f64>>,
    pub ga: GaConfig,
    pub output_dir: PathBuf,
}

/// Line (1-based) of `key = ...` inside `[section]`, or of the section header itself.
fn locate(source: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current != section {
            continue;
        }
        if let Some(k) = key {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim() == k {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

struct Checker<'a> {
    origin: &'a str,
    source: &'a str,
}

impl Checker<'_> {
    fn fail(&self, section: &str, key: &str, message: impl fmt::Display) -> ConfigFileError {
        ConfigFileError {
            origin: self.origin.to_string(),
            line: locate(self.source, section, Some(key)),
            message: format!("[{section}] {key}: {message}"),
        }
    }
}

fn mechanism_key(e: &MechError) -> &'static str {
    match e {
        MechError::DiscRadius(_) => "disc_radius",
        MechError::LinkLength(_) => "link_length",
        MechError::LinkClearance(_) => "link_clearance",
        MechError::PointsPerWire(_) => "points_per_wire",
        MechError::Joints(_) => "dofs",
        _ => "wires",
    }
}

/// Parses and validates config text. `origin` names the source in error messages.
pub fn parse(source: &str, origin: &str, name: &str) -> Result<ExperimentConfig, ConfigFileError> {
    let raw: RawConfig = toml::from_str(source).map_err(|e| ConfigFileError {
        origin: origin.to_string(),
        line: e.span().map(|s| source[..s.start].matches('\n').count() + 1),
        message: e.message().trim().to_string(),
    })?;
    let c = Checker { origin, source };

    let m = &raw.mechanism;
    if !matches!(m.dofs, 2 | 3) {
        return Err(c.fail("mechanism", "dofs", format!("must be 2 or 3, got {}", m.dofs)));
    }
    let mechanism = MechanismConfig::new(
        m.disc_radius,
        m.link_length,
        MechanismConfig::standard_joints(m.dofs),
        m.wires,
        m.points_per_wire,
        m.link_clearance,
    )
    .map_err(|e| c.fail("mechanism", mechanism_key(&e), &e))?;
    if m.wires > wirearr::torque_space::MAX_WIRES {
        return Err(c.fail(
            "mechanism",
            "wires",
            MechError::TooManyWires(m.wires),
        ));
    }

    let bounds = TensionBounds::new(raw.tension.f_min, raw.tension.f_max).map_err(|e| c.fail("tension", "f_min", e))?;

    let t = &raw.trajectory;
    if let Some((i, w)) = t.waypoints_deg.iter().enumerate().find(|(_, w)| w.len() != m.dofs) {
        return Err(c.fail(
            "trajectory",
            "waypoints_deg",
            format!("waypoint {} has {} angles, expected {}", i + 1, w.len(), m.dofs),
        ));
    }
    let trajectory = Trajectory::new(
        t.waypoints_deg.iter().map(|w| JointAngles::from_degrees(w)).collect(),
        t.close_loop,
    )
    .map_err(|e| c.fail("trajectory", "waypoints_deg", e))?;

    let th = &raw.thresholds;
    if !(th.epsilon > 0.0 && th.epsilon.is_finite()) {
        return Err(c.fail("thresholds", "epsilon", "must be positive"));
    }
    if !(th.r_min > 0.0 && th.r_min.is_finite()) {
        return Err(c.fail("thresholds", "r_min", "must be positive"));
    }
    if let Some(center) = &th.sphere_center {
        if center.len() != m.dofs || center.iter().any(|x| !x.is_finite()) {
            return Err(c.fail(
                "thresholds",
                "sphere_center",
                format!("needs {} finite torque components", m.dofs),
            ));
        }
    }
    let settings = EvaluationSettings {
        bounds,
        epsilon: th.epsilon,
        r_min: th.r_min,
        sphere_center: th.sphere_center.clone(),
    };

    let defaults = GaConfig::default();
    let g = &raw.ga;
    let ga = GaConfig {
        population_size: g.population.unwrap_or(defaults.population_size),
        generations: g.generations.unwrap_or(defaults.generations),
        crossover_prob: g.crossover_prob.unwrap_or(defaults.crossover_prob),
        crossover_eta: g.crossover_eta.unwrap_or(defaults.crossover_eta),
        mutation_prob: g.mutation_prob.or(defaults.mutation_prob),
        mutation_eta: g.mutation_eta.unwrap_or(defaults.mutation_eta),
        seed: g.seed.unwrap_or(defaults.seed),
        parallel: g.parallel.unwrap_or(defaults.parallel),
    };
    check_ga(&ga, &c)?;

    Ok(ExperimentConfig {
        name: name.to_string(),
        mechanism,
        settings,
        trajectory,
        waypoints_deg: t.waypoints_deg.clone(),
        ga,
        output_dir: raw
            .output
            .dir
            .unwrap_or_else(|| PathBuf::from("results").join(name)),
    })
}

fn check_ga(ga: &GaConfig, c: &Checker<'_>) -> Result<(), ConfigFileError> {
    if ga.population_size < 4 || !ga.population_size.is_multiple_of(2) {
        return Err(c.fail("ga", "population", "must be even and at least 4"));
    }
    if ga.generations == 0 {
        return Err(c.fail("ga", "generations", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&ga.crossover_prob) {
        return Err(c.fail("ga", "crossover_prob", "must lie in [0, 1]"));
    }
    if ga.mutation_prob.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
        return Err(c.fail("ga", "mutation_prob", "must lie in [0, 1]"));
    }
    if !(ga.crossover_eta > 0.0) {
        return Err(c.fail("ga", "crossover_eta", "must be positive"));
    }
    if !(ga.mutation_eta > 0.0) {
        return Err(c.fail("ga", "mutation_eta", "must be positive"));
    }
    Ok(())
}

/// Loads a config file, or a built-in preset when `target` names one and no such file exists.
pub fn load(target: &str) -> Result<ExperimentConfig, ConfigFileError> {
    let path = Path::new(target);
    if path.is_file() {
        let source = std::fs::read_to_string(path).map_err(|e| ConfigFileError {
            origin: target.to_string(),
            line: None,
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "experiment".to_string());
        return parse(&source, target, &name);
    }
    if let Some(source) = presets::get(target) {
        return parse(source, &format!("preset:{target}"), target);
    }
    Err(ConfigFileError {
        origin: target.to_string(),
        line: None,
        message: format!("no such file, and no preset of that name (presets: {})", presets::names().join(", ")),
    })
}
