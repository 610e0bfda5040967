//! Optimization runs and the files they leave behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use wirearr::mechanism::{decode_genome, ConfigError, DesignParams, Genome};
use wirearr::moo::{evolve, Objectives, Sample};
use wirearr::objectives::{Evaluation, Evaluator};

use crate::config::ExperimentConfig;
use crate::render;

/// A single design with its scores, as stored in `design_*.json` and `pareto.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<usize>,
    /// Raw optimizer genome in `[-1, 1]`; takes precedence over `points` when loading.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genome: Option<Vec<f64>>,
    /// Disc coordinates `[p_x, p_y]` per wire, base disc first.
    pub points: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_cross: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_e_torque: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_torque: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_segment_crossings: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_waypoint_radius: Option<Vec<f64>>,
}

impl DesignRecord {
    pub fn from_sample(sample: &Sample<Evaluation>, design: &DesignParams, label: Option<&str>) -> Self {
        let e = &sample.payload;
        Self {
            label: label.map(str::to_string),
            trial: Some(sample.trial),
            generation: Some(sample.generation),
            genome: Some(sample.genome.clone()),
            points: design.points.clone(),
            e_cross: Some(e.e_cross),
            log_e_torque: Some(e.log_e_torque),
            e_torque: e.e_torque(),
            per_segment_crossings: Some(e.per_segment_crossings.clone()),
            per_waypoint_radius: Some(e.per_waypoint_radius.clone()),
        }
    }

    pub fn from_points(design: &DesignParams) -> Self {
        Self {
            label: None,
            trial: None,
            generation: None,
            genome: None,
            points: design.points.clone(),
            e_cross: None,
            log_e_torque: None,
            e_torque: None,
            per_segment_crossings: None,
            per_waypoint_radius: None,
        }
    }

    /// The design for `cfg`: decoded from the genome when present, else the stored points.
    pub fn design(&self, cfg: &ExperimentConfig) -> Result<DesignParams, ConfigError> {
        match &self.genome {
            Some(g) => decode_genome(&Genome(g.clone()), &cfg.mechanism),
            None => DesignParams::new(self.points.clone(), &cfg.mechanism),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoFile {
    pub experiment: String,
    pub seed: u64,
    pub population: usize,
    pub generations: usize,
    pub evaluations: usize,
    pub entries: Vec<DesignRecord>,
}

#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub samples: Vec<Sample<Evaluation>>,
    /// Archive entries, fewest crossings first, then largest torque.
    pub archive: Vec<Sample<Evaluation>>,
    pub design_1: DesignRecord,
    pub design_2: DesignRecord,
}

pub fn objectives(e: &Evaluation) -> Objectives {
    [e.e_cross as f64, -e.log_e_torque]
}

/// Runs the optimizer described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultBundle> {
    let evaluator = Evaluator::new(cfg.mechanism.clone(), cfg.trajectory.clone(), cfg.settings.clone())?;
    let run = evolve(
        |g: &[f64]| {
            evaluator
                .evaluate_genome(&Genome(g.to_vec()))
                .map(|(_, e)| (objectives(&e), e))
        },
        cfg.mechanism.genome_length(),
        &cfg.ga,
    )?;

    let mut archive = run.archive.entries;
    archive.sort_by(|a, b| {
        a.payload
            .e_cross
            .cmp(&b.payload.e_cross)
            .then(b.payload.log_e_torque.total_cmp(&a.payload.log_e_torque))
            .then(a.trial.cmp(&b.trial))
    });
    let first = archive.first().context("optimizer produced an empty archive")?;
    let top = archive
        .iter()
        .max_by(|a, b| {
            a.payload
                .log_e_torque
                .total_cmp(&b.payload.log_e_torque)
                .then(b.trial.cmp(&a.trial))
        })
        .expect("archive is non-empty");
    let record = |s: &Sample<Evaluation>, label: &str| -> Result<DesignRecord> {
        let design = decode_genome(&Genome(s.genome.clone()), &cfg.mechanism)?;
        Ok(DesignRecord::from_sample(s, &design, Some(label)))
    };
    let design_1 = record(first, "design_1")?;
    let design_2 = record(top, "design_2")?;
    Ok(ResultBundle {
        samples: run.samples,
        archive,
        design_1,
        design_2,
    })
}

pub fn samples_csv(samples: &[Sample<Evaluation>]) -> String {
    let d = samples.first().map_or(0, |s| s.genome.len());
    let mut out = String::from("trial,e_cross,log_e_torque");
    for i in 0..d {
        write!(out, ",g{i}").unwrap();
    }
    out.push('\n');
    for s in samples {
        write!(out, "{},{},{}", s.trial, s.payload.e_cross, s.payload.log_e_torque).unwrap();
        for g in &s.genome {
            write!(out, ",{g}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn write(path: PathBuf, contents: &str) -> Result<()> {
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Writes the full bundle into `dir` and returns the paths written.
pub fn write_bundle(cfg: &ExperimentConfig, bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let mut put = |name: &str, contents: &str| -> Result<()> {
        let path = dir.join(name);
        write(path.clone(), contents)?;
        written.push(path);
        Ok(())
    };

    put("samples.csv", &samples_csv(&bundle.samples))?;

    let entries = bundle
        .archive
        .iter()
        .map(|s| {
            let design = decode_genome(&Genome(s.genome.clone()), &cfg.mechanism)?;
            Ok(DesignRecord::from_sample(s, &design, None))
        })
        .collect::<Result<Vec<_>>>()?;
    let pareto = ParetoFile {
        experiment: cfg.name.clone(),
        seed: cfg.ga.seed,
        population: cfg.ga.population_size,
        generations: cfg.ga.generations,
        evaluations: bundle.samples.len(),
        entries,
    };
    put("pareto.json", &(serde_json::to_string_pretty(&pareto)? + "\n"))?;
    put("design_1.json", &(serde_json::to_string_pretty(&bundle.design_1)? + "\n"))?;
    put("design_2.json", &(serde_json::to_string_pretty(&bundle.design_2)? + "\n"))?;
    put("pareto_scatter.svg", &render::pareto_scatter(&bundle.samples, &bundle.archive, cfg.ga.generations))?;

    for (stem, rec) in [("design_1", &bundle.design_1), ("design_2", &bundle.design_2)] {
        let design = rec.design(cfg)?;
        for (i, q) in cfg.trajectory.waypoints.iter().enumerate() {
            let svg = render::waypoint_view(cfg, &design, q, i + 1)?;
            put(&format!("{stem}_wp{}.svg", i + 1), &svg)?;
        }
    }
    Ok(written)
}
