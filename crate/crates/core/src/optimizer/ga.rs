use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fitness::{Evaluator, FitnessRecord};
use super::genome::{Chromosome, SearchSpace};
use super::operators::{crossover, mutate, rank_cmp, replace, tournament_select};
use super::{GaConfig, ProblemSpec};
use crate::error::Result;
use crate::scenario::Scenario;

const INIT_STREAM: u64 = 0;
const SELECTION_STREAM: u64 = 1;
const CROSSOVER_STREAM: u64 = 2;
const MUTATION_STREAM: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub generation: usize,
    /// Best feasible objective seen so far; 0 until a feasible chromosome appears.
    pub best_objective: f64,
    /// Feasible members of the current population.
    pub feasible_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub best: Chromosome,
    /// `feasible == false` when no feasible chromosome was ever found.
    pub record: FitnessRecord,
    /// Generation 0 (initial population) through `N_Gen`.
    pub trace: Vec<TracePoint>,
    pub evaluations: usize,
}

fn evaluate_all(ev: &Evaluator, batch: &[Chromosome]) -> Result<Vec<FitnessRecord>> {
    batch.par_iter().map(|c| ev.evaluate(c)).collect()
}

fn trace_point(generation: usize, best: &FitnessRecord, fitness: &[FitnessRecord]) -> TracePoint {
    TracePoint {
        generation,
        best_objective: if best.feasible { best.objective } else { 0.0 },
        feasible_count: fitness.iter().filter(|f| f.feasible).count(),
    }
}

/// Solve `spec` on the scenario's frozen snapshot over continuous genes.
pub fn run_ga(scenario: &Scenario, spec: &ProblemSpec, config: &GaConfig) -> Result<GaResult> {
    run_ga_in(scenario, spec, config, SearchSpace::Continuous)
}

/// As [`run_ga`], with real genes confined to `space`.
pub fn run_ga_in(scenario: &Scenario, spec: &ProblemSpec, config: &GaConfig, space: SearchSpace) -> Result<GaResult> {
    config.validate()?;
    let ev = Evaluator::with_space(scenario, spec, space)?;
    run_with(&ev, config)
}

/// Steady-state loop. Each generation breeds `pairs` offspring pairs from the
/// current population (tournament, crossover, mutation), scores them in
/// parallel, and places each pair over the two worst non-elite members.
/// Offspring that duplicate a current member are dropped when
/// `reject_duplicates` is set; the mutation step shrinks as `mutation_decay` asks.
pub(crate) fn run_with(ev: &Evaluator, config: &GaConfig) -> Result<GaResult> {
    let layout = ev.layout();
    let pm = config.mutation_prob_for(layout.gene_count());
    let seed = config.rng_seed;
    let mut init_rng = stream(seed, INIT_STREAM);
    let mut select_rng = stream(seed, SELECTION_STREAM);
    let mut cross_rng = stream(seed, CROSSOVER_STREAM);
    let mut mutate_rng = stream(seed, MUTATION_STREAM);

    let mut population: Vec<Chromosome> = (0..config.population).map(|_| layout.random(&mut init_rng)).collect();
    let mut fitness = evaluate_all(ev, &population)?;
    let mut evaluations = population.len();

    let mut best_idx = 0;
    for i in 1..fitness.len() {
        if rank_cmp(&fitness[i], &fitness[best_idx]) == Ordering::Greater {
            best_idx = i;
        }
    }
    let mut best = population[best_idx].clone();
    let mut best_record = fitness[best_idx].clone();
    let mut trace = Vec::with_capacity(config.generations + 1);
    trace.push(trace_point(0, &best_record, &fitness));

    for generation in 1..=config.generations {
        let progress = (generation - 1) as f64 / config.generations as f64;
        let sigma = config.mutation_sigma * (1.0 - progress).powf(config.mutation_decay);
        let mut children = Vec::with_capacity(2 * config.pairs());
        for _ in 0..config.pairs() {
            let (i, j) = tournament_select(&fitness, config.tournament_size, &mut select_rng);
            let (mut a, mut b) = crossover(&population[i], &population[j], layout, config.crossover_prob, &mut cross_rng)?;
            mutate(&mut a, layout, pm, sigma, &mut mutate_rng);
            mutate(&mut b, layout, pm, sigma, &mut mutate_rng);
            children.push(a);
            children.push(b);
        }
        let records = evaluate_all(ev, &children)?;
        evaluations += children.len();
        for (c, f) in children.iter().zip(&records) {
            if rank_cmp(f, &best_record) == Ordering::Greater {
                best = c.clone();
                best_record = f.clone();
            }
        }
        let mut kept: Vec<(Chromosome, FitnessRecord)> = Vec::with_capacity(children.len());
        for (c, f) in children.into_iter().zip(records) {
            if config.reject_duplicates && (population.contains(&c) || kept.iter().any(|(k, _)| *k == c)) {
                continue;
            }
            kept.push((c, f));
        }
        let mut placed = kept.into_iter();
        loop {
            let pair: Vec<_> = placed.by_ref().take(2).collect();
            if pair.is_empty() {
                break;
            }
            replace(&mut population, &mut fitness, pair, config.elite_count);
        }
        trace.push(trace_point(generation, &best_record, &fitness));
    }

    Ok(GaResult {
        best,
        record: best_record,
        trace,
        evaluations,
    })
}
