//! Elitist non-dominated sorting GA over box-bounded genomes in `[-1, 1]^d`.
//!
//! Both objectives are minimized. Evaluations are collected in population order so a
//! parallel run reproduces a sequential one exactly for the same seed.

use std::cmp::Ordering;
use std::error::Error as StdError;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub type Objectives = [f64; 2];

const LOWER: f64 = -1.0;
const UPPER: f64 = 1.0;

/// `a` is no worse in every objective and strictly better in at least one.
pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub crossover_eta: f64,
    /// Per-gene mutation probability; `None` uses `1 / d`.
    pub mutation_prob: Option<f64>,
    pub mutation_eta: f64,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 600,
            crossover_prob: 0.9,
            crossover_eta: 20.0,
            mutation_prob: None,
            mutation_eta: 20.0,
            seed: 0,
            parallel: true,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), MooError> {
        let bad = |what: &str| Err(MooError::Config(what.to_string()));
        if self.population_size < 4 || !self.population_size.is_multiple_of(2) {
            return bad("population size must be even and at least 4");
        }
        if self.generations < 1 {
            return bad("at least one generation is required");
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad("crossover probability must lie in [0, 1]");
        }
        if let Some(p) = self.mutation_prob {
            if !(0.0..=1.0).contains(&p) {
                return bad("mutation probability must lie in [0, 1]");
            }
        }
        if !(self.crossover_eta > 0.0 && self.mutation_eta > 0.0) {
            return bad("distribution indices must be positive");
        }
        Ok(())
    }

    pub fn total_evaluations(&self) -> usize {
        self.population_size * self.generations
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MooError {
    #[error("invalid GA settings: {0}")]
    Config(String),
    #[error("genome length must be positive")]
    EmptyGenome,
    #[error("evaluation of trial {trial} failed: {source}")]
    Evaluation {
        trial: usize,
        #[source]
        source: Box<dyn StdError + Send + Sync>,
    },
}

/// Fronts of mutually non-dominated indices; front 0 is the best. Indices within a front
/// are ascending.
pub fn non_dominated_sort(objs: &[Objectives]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&objs[i], &objs[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&objs[j], &objs[i]) {
                dominating[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of one front.
///
/// Fronts of at most two members are all boundary. Within an objective, every member at
/// the minimum or maximum value is a boundary member, and interior members use the gap
/// between the nearest distinct values on either side, so the result does not depend on
/// the order of the input.
pub fn crowding_distance(front: &[Objectives]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut dist = vec![0.0; n];
    for m in 0..2 {
        let mut values: Vec<f64> = front.iter().map(|o| o[m]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let (lo, hi) = (values[0], values[values.len() - 1]);
        let range = hi - lo;
        if !(range > 0.0) {
            continue;
        }
        for (i, o) in front.iter().enumerate() {
            let v = o[m];
            if v == lo || v == hi {
                dist[i] = f64::INFINITY;
                continue;
            }
            let pos = values.partition_point(|&x| x < v);
            dist[i] += (values[pos + 1] - values[pos - 1]) / range;
        }
    }
    dist
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Individual {
    pub genome: Vec<f64>,
    pub objectives: Objectives,
    pub rank: usize,
    pub crowding: f64,
    pub trial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample<T> {
    pub trial: usize,
    pub generation: usize,
    pub genome: Vec<f64>,
    pub objectives: Objectives,
    pub payload: T,
}

/// Non-dominated subset of everything offered to it, in insertion order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoArchive<T> {
    pub entries: Vec<Sample<T>>,
}

impl<T> Default for ParetoArchive<T> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<T: Clone> ParetoArchive<T> {
    /// Adds `sample` unless an entry dominates or equals it; evicts entries it dominates.
    pub fn insert(&mut self, sample: &Sample<T>) -> bool {
        let o = &sample.objectives;
        if self
            .entries
            .iter()
            .any(|e| e.objectives == *o || dominates(&e.objectives, o))
        {
            return false;
        }
        self.entries.retain(|e| !dominates(o, &e.objectives));
        self.entries.push(sample.clone());
        true
    }
}

/// Best value of each objective in the surviving population after each generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationBest {
    pub generation: usize,
    pub best: Objectives,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionResult<T> {
    pub samples: Vec<Sample<T>>,
    pub archive: ParetoArchive<T>,
    pub population: Vec<Individual>,
    pub history: Vec<GenerationBest>,
}

fn assign_ranks(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let objs: Vec<Objectives> = pop.iter().map(|p| p.objectives).collect();
    let fronts = non_dominated_sort(&objs);
    for (r, front) in fronts.iter().enumerate() {
        let fo: Vec<Objectives> = front.iter().map(|&i| objs[i]).collect();
        for (&i, c) in front.iter().zip(crowding_distance(&fo)) {
            pop[i].rank = r;
            pop[i].crowding = c;
        }
    }
    fronts
}

fn better(a: &Individual, b: &Individual) -> bool {
    a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding)
}

fn tournament<'a>(pop: &'a [Individual], rng: &mut ChaCha8Rng) -> &'a Individual {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    if better(b, a) {
        b
    } else {
        a
    }
}

fn sbx_spread(rand: f64, beta: f64, eta: f64) -> f64 {
    let alpha = 2.0 - beta.powf(-(eta + 1.0));
    if rand <= 1.0 / alpha {
        (rand * alpha).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 - rand * alpha)).powf(1.0 / (eta + 1.0))
    }
}

/// Bounded simulated binary crossover.
fn sbx(p1: &[f64], p2: &[f64], eta: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for i in 0..p1.len() {
        if rng.random::<f64>() > 0.5 || (p1[i] - p2[i]).abs() <= 1e-14 {
            continue;
        }
        let (y1, y2) = if p1[i] < p2[i] { (p1[i], p2[i]) } else { (p2[i], p1[i]) };
        let r: f64 = rng.random();
        let bq1 = sbx_spread(r, 1.0 + 2.0 * (y1 - LOWER) / (y2 - y1), eta);
        let bq2 = sbx_spread(r, 1.0 + 2.0 * (UPPER - y2) / (y2 - y1), eta);
        let a = (0.5 * (y1 + y2 - bq1 * (y2 - y1))).clamp(LOWER, UPPER);
        let b = (0.5 * (y1 + y2 + bq2 * (y2 - y1))).clamp(LOWER, UPPER);
        if rng.random::<f64>() < 0.5 {
            (c1[i], c2[i]) = (b, a);
        } else {
            (c1[i], c2[i]) = (a, b);
        }
    }
    (c1, c2)
}

/// Bounded polynomial mutation.
fn mutate(x: &mut [f64], prob: f64, eta: f64, rng: &mut ChaCha8Rng) {
    let span = UPPER - LOWER;
    let pow = 1.0 / (eta + 1.0);
    for y in x.iter_mut() {
        if rng.random::<f64>() >= prob {
            continue;
        }
        let d1 = (*y - LOWER) / span;
        let d2 = (UPPER - *y) / span;
        let r: f64 = rng.random();
        let dq = if r < 0.5 {
            let v = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(eta + 1.0);
            v.powf(pow) - 1.0
        } else {
            let v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(pow)
        };
        *y = (*y + dq * span).clamp(LOWER, UPPER);
    }
}

type Problem<'a, T> = dyn Fn(&[f64]) -> Result<(Objectives, T), Box<dyn StdError + Send + Sync>> + Sync + 'a;

fn evaluate_batch<T: Send>(
    problem: &Problem<'_, T>,
    genomes: &[Vec<f64>],
    first_trial: usize,
    parallel: bool,
) -> Result<Vec<(Objectives, T)>, MooError> {
    let results: Vec<_> = if parallel {
        genomes.par_iter().map(|g| problem(g)).collect()
    } else {
        genomes.iter().map(|g| problem(g)).collect()
    };
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|source| MooError::Evaluation {
                trial: first_trial + i,
                source,
            })
        })
        .collect()
}

/// Runs the GA for `ga.generations` generations of `ga.population_size` evaluations each;
/// the random initial population is generation 1.
pub fn evolve<T, F, E>(problem: F, genome_length: usize, ga: &GaConfig) -> Result<EvolutionResult<T>, MooError>
where
    T: Send + Clone,
    F: Fn(&[f64]) -> Result<(Objectives, T), E> + Sync,
    E: Into<Box<dyn StdError + Send + Sync>>,
{
    ga.validate()?;
    if genome_length == 0 {
        return Err(MooError::EmptyGenome);
    }
    let problem = move |g: &[f64]| problem(g).map_err(Into::into);
    let problem: &Problem<'_, T> = &problem;
    let n = ga.population_size;
    let pm = ga.mutation_prob.unwrap_or(1.0 / genome_length as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(ga.seed);

    let mut samples: Vec<Sample<T>> = Vec::with_capacity(ga.total_evaluations());
    let mut archive = ParetoArchive::default();
    let mut history = Vec::with_capacity(ga.generations);

    let mut log = |genomes: Vec<Vec<f64>>, generation: usize, samples: &mut Vec<Sample<T>>| -> Result<Vec<Individual>, MooError> {
        let first = samples.len();
        let results = evaluate_batch(problem, &genomes, first, ga.parallel)?;
        let mut out = Vec::with_capacity(genomes.len());
        for (i, (genome, (objectives, payload))) in genomes.into_iter().zip(results).enumerate() {
            let s = Sample {
                trial: first + i,
                generation,
                genome: genome.clone(),
                objectives,
                payload,
            };
            archive.insert(&s);
            samples.push(s);
            out.push(Individual {
                genome,
                objectives,
                rank: 0,
                crowding: 0.0,
                trial: first + i,
            });
        }
        Ok(out)
    };

    let init: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..genome_length).map(|_| rng.random_range(LOWER..=UPPER)).collect())
        .collect();
    let mut pop = log(init, 1, &mut samples)?;
    assign_ranks(&mut pop);
    history.push(GenerationBest {
        generation: 1,
        best: population_best(&pop),
    });

    for generation in 2..=ga.generations {
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let p1 = tournament(&pop, &mut rng);
            let p2 = tournament(&pop, &mut rng);
            let (mut c1, mut c2) = if rng.random::<f64>() < ga.crossover_prob {
                sbx(&p1.genome, &p2.genome, ga.crossover_eta, &mut rng)
            } else {
                (p1.genome.clone(), p2.genome.clone())
            };
            mutate(&mut c1, pm, ga.mutation_eta, &mut rng);
            mutate(&mut c2, pm, ga.mutation_eta, &mut rng);
            children.push(c1);
            if children.len() < n {
                children.push(c2);
            }
        }
        let offspring = log(children, generation, &mut samples)?;

        let mut merged = pop;
        merged.extend(offspring);
        let fronts = assign_ranks(&mut merged);
        let mut keep: Vec<usize> = Vec::with_capacity(n);
        for front in fronts {
            if keep.len() + front.len() <= n {
                keep.extend(front);
                continue;
            }
            let mut last = front;
            last.sort_by(|&a, &b| {
                merged[b]
                    .crowding
                    .partial_cmp(&merged[a].crowding)
                    .unwrap_or(Ordering::Equal)
            });
            last.truncate(n - keep.len());
            keep.extend(last);
            break;
        }
        let mut slots: Vec<Option<Individual>> = merged.into_iter().map(Some).collect();
        pop = keep.into_iter().map(|i| slots[i].take().expect("index kept once")).collect();
        history.push(GenerationBest {
            generation,
            best: population_best(&pop),
        });
    }

    Ok(EvolutionResult {
        samples,
        archive,
        population: pop,
        history,
    })
}

fn population_best(pop: &[Individual]) -> Objectives {
    let mut best = [f64::INFINITY; 2];
    for p in pop {
        for m in 0..2 {
            best[m] = best[m].min(p.objectives[m]);
        }
    }
    best
}
