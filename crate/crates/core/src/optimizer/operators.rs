use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::fitness::FitnessRecord;
use super::genome::{Chromosome, GenomeLayout, SearchSpace};
use crate::error::{Error, Result};

/// Quality order, `Greater` meaning `a` is better. Feasible beats infeasible;
/// feasible records compare by objective; infeasible ones by total violation
/// (smaller wins), then objective.
pub fn rank_cmp(a: &FitnessRecord, b: &FitnessRecord) -> Ordering {
    match (a.feasible, b.feasible) {
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (true, true) => a.objective.total_cmp(&b.objective),
        (false, false) => b
            .total_violation()
            .total_cmp(&a.total_violation())
            .then(a.objective.total_cmp(&b.objective)),
    }
}

fn tournament<R: Rng + ?Sized>(fitness: &[FitnessRecord], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let i = rng.random_range(0..fitness.len());
        if rank_cmp(&fitness[i], &fitness[best]) == Ordering::Greater {
            best = i;
        }
    }
    best
}

/// Indices of two parents, each the winner of `size` uniform draws.
pub fn tournament_select<R: Rng + ?Sized>(fitness: &[FitnessRecord], size: usize, rng: &mut R) -> (usize, usize) {
    assert!(!fitness.is_empty(), "tournament over an empty population");
    let size = size.max(1);
    (tournament(fitness, size, rng), tournament(fitness, size, rng))
}

fn swap_tail<T, R: Rng + ?Sized>(a: &mut [T], b: &mut [T], rng: &mut R) {
    if a.len() >= 2 {
        let locus = rng.random_range(1..a.len());
        a[locus..].swap_with_slice(&mut b[locus..]);
    }
}

/// With probability `pc`, single-point crossover inside each gene segment;
/// otherwise the offspring are clones. Grid-restricted power segments are
/// exchanged whole so offspring stay on the grid.
pub fn crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    layout: &GenomeLayout,
    pc: f64,
    rng: &mut R,
) -> Result<(Chromosome, Chromosome)> {
    if a.assoc.len() != b.assoc.len()
        || a.omega.len() != b.omega.len()
        || a.gamma.len() != b.gamma.len()
        || a.power.len() != b.power.len()
    {
        return Err(Error::MalformedGenome("parents have different shapes".into()));
    }
    let (mut x, mut y) = (a.clone(), b.clone());
    if rng.random::<f64>() < pc {
        swap_tail(&mut x.assoc, &mut y.assoc, rng);
        swap_tail(&mut x.omega, &mut y.omega, rng);
        swap_tail(&mut x.gamma, &mut y.gamma, rng);
        match layout.space {
            SearchSpace::Continuous => swap_tail(&mut x.power, &mut y.power, rng),
            SearchSpace::Grid(_) => {
                if rng.random::<bool>() {
                    std::mem::swap(&mut x.power, &mut y.power);
                }
            }
        }
    }
    Ok((x, y))
}

/// Per-gene mutation with probability `pm`. Association genes are redrawn
/// uniformly; real genes take a Gaussian step of `sigma` times their range and
/// are clipped back into bounds (on a grid they are redrawn from the grid).
pub fn mutate<R: Rng + ?Sized>(c: &mut Chromosome, layout: &GenomeLayout, pm: f64, sigma: f64, rng: &mut R) {
    for g in c.assoc.iter_mut() {
        if rng.random::<f64>() < pm {
            *g = rng.random_range(0..layout.num_users);
        }
    }
    match &layout.space {
        SearchSpace::Continuous => {
            let angle_step = Normal::new(0.0, sigma * 2.0 * FRAC_PI_2).expect("non-negative sigma");
            for g in c.omega.iter_mut().chain(c.gamma.iter_mut()) {
                if rng.random::<f64>() < pm {
                    *g = (*g + angle_step.sample(rng)).clamp(-FRAC_PI_2, FRAC_PI_2);
                }
            }
            let (lo, hi) = layout.power_bounds();
            let power_step = Normal::new(0.0, sigma * (hi - lo)).expect("non-negative sigma");
            for g in c.power.iter_mut() {
                if rng.random::<f64>() < pm {
                    *g = (*g + power_step.sample(rng)).clamp(lo, hi);
                }
            }
        }
        SearchSpace::Grid(grid) => {
            for g in c.omega.iter_mut().chain(c.gamma.iter_mut()) {
                if rng.random::<f64>() < pm {
                    *g = grid.angles[rng.random_range(0..grid.angles.len())];
                }
            }
            if !c.power.is_empty() && rng.random::<f64>() < pm {
                c.power = grid.powers[rng.random_range(0..grid.powers.len())].clone();
            }
        }
    }
}

/// Place evaluated offspring over the worst members, never touching the
/// `elite_count` best. Worst means infeasible with the largest violation
/// first, then the lowest objective among feasible members.
pub fn replace(
    population: &mut [Chromosome],
    fitness: &mut [FitnessRecord],
    offspring: Vec<(Chromosome, FitnessRecord)>,
    elite_count: usize,
) {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&i, &j| rank_cmp(&fitness[i], &fitness[j]).then(i.cmp(&j)));
    let evictable = population.len().saturating_sub(elite_count);
    for (slot, (c, f)) in order.into_iter().take(evictable).zip(offspring) {
        population[slot] = c;
        fitness[slot] = f;
    }
}
