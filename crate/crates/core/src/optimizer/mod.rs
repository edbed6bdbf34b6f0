//! Max-Min secrecy problems P1-P4 and the steady-state genetic algorithm that solves them.

mod fitness;
mod ga;
mod genome;
mod operators;
mod oracle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rates::{RsmaOptions, Scheme};

pub use fitness::{evaluate, Allocation, Decoded, Evaluator, FitnessRecord};
pub use ga::{run_ga, run_ga_in, GaResult, TracePoint};
pub use genome::{Chromosome, GenomeLayout, PowerGenes, SearchSpace, NOMA_EPSILON_FLOOR};
pub use operators::{crossover, mutate, rank_cmp, replace, tournament_select};
pub use oracle::{brute_force_oracle, GridSpec, OracleResult, ORACLE_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProblemId {
    P1,
    P2,
    P3,
    P4,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] = [ProblemId::P1, ProblemId::P2, ProblemId::P3, ProblemId::P4];

    pub fn scheme(self) -> Scheme {
        match self {
            ProblemId::P1 | ProblemId::P3 => Scheme::Rsma,
            ProblemId::P2 | ProblemId::P4 => Scheme::Noma,
        }
    }

    pub fn objective(self) -> Objective {
        match self {
            ProblemId::P1 | ProblemId::P2 => Objective::MinSecrecyRate,
            ProblemId::P3 | ProblemId::P4 => Objective::MinSecrecyEnergyEfficiency,
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P1" => Ok(ProblemId::P1),
            "P2" => Ok(ProblemId::P2),
            "P3" => Ok(ProblemId::P3),
            "P4" => Ok(ProblemId::P4),
            _ => Err(invalid("problem", format!("`{s}` is not one of P1, P2, P3, P4"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    /// bits/s
    MinSecrecyRate,
    /// bits/joule
    MinSecrecyEnergyEfficiency,
}

/// Which problem to solve and how its power variables are exposed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub scheme: Scheme,
    pub objective: Objective,
    /// Freeze the NOMA power coefficient instead of optimizing it.
    pub fixed_epsilon: Option<f64>,
    pub rsma: RsmaOptions,
}

impl ProblemSpec {
    pub fn new(id: ProblemId) -> Self {
        Self {
            id,
            scheme: id.scheme(),
            objective: id.objective(),
            fixed_epsilon: None,
            rsma: RsmaOptions::default(),
        }
    }

    /// NOMA problem with `ε` frozen, leaving only association and tilts to optimize.
    pub fn fixed_power(id: ProblemId, epsilon: f64) -> Result<Self> {
        if id.scheme() != Scheme::Noma {
            return Err(invalid("problem", format!("{id} is not a NOMA problem")));
        }
        crate::rates::noma_coefficients(epsilon, 1)?;
        Ok(Self {
            fixed_epsilon: Some(epsilon),
            ..Self::new(id)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.scheme != self.id.scheme() || self.objective != self.id.objective() {
            return Err(invalid("problem", format!("{} pairs with {} only", self.id, self.id.scheme())));
        }
        if self.fixed_epsilon.is_some() && self.scheme != Scheme::Noma {
            return Err(invalid("problem", "a fixed power coefficient applies to NOMA only"));
        }
        Ok(())
    }

    /// Label used in result tables, e.g. `P2` or `P2-fixed`.
    pub fn label(&self) -> String {
        match self.fixed_epsilon {
            Some(_) => format!("{}-fixed", self.id),
            None => self.id.to_string(),
        }
    }
}

impl From<ProblemId> for ProblemSpec {
    fn from(id: ProblemId) -> Self {
        Self::new(id)
    }
}

/// Genetic-algorithm settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    /// Population size `J`.
    pub population: usize,
    /// Generations `N_Gen`.
    pub generations: usize,
    pub crossover_prob: f64,
    /// Per-gene mutation probability; `None` means `1 / gene count`.
    pub mutation_prob: Option<f64>,
    /// Gaussian step as a fraction of each real gene's range.
    pub mutation_sigma: f64,
    /// Step shrink exponent `b`: generation `g` of `N` uses `sigma·(1 - g/N)^b`. 0 keeps it fixed.
    pub mutation_decay: f64,
    /// Drop offspring identical to a current member instead of inserting them.
    pub reject_duplicates: bool,
    pub tournament_size: usize,
    /// Best members that replacement never evicts.
    pub elite_count: usize,
    /// Offspring pairs bred per generation; `None` means `J / 2`.
    pub pairs_per_generation: Option<usize>,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 150,
            generations: 100,
            crossover_prob: 0.9,
            mutation_prob: None,
            mutation_sigma: 0.2,
            mutation_decay: 2.0,
            reject_duplicates: true,
            tournament_size: 3,
            elite_count: 2,
            pairs_per_generation: None,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(invalid("population", "need at least 2 chromosomes"));
        }
        for (name, p) in [
            ("crossover_prob", Some(self.crossover_prob)),
            ("mutation_prob", self.mutation_prob),
        ] {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(name, "must lie in [0, 1]"));
                }
            }
        }
        if !(self.mutation_sigma.is_finite() && self.mutation_sigma >= 0.0) {
            return Err(invalid("mutation_sigma", "must be non-negative"));
        }
        if !(self.mutation_decay.is_finite() && self.mutation_decay >= 0.0) {
            return Err(invalid("mutation_decay", "must be non-negative"));
        }
        if self.tournament_size == 0 {
            return Err(invalid("tournament_size", "must be at least 1"));
        }
        if self.elite_count + 2 > self.population {
            return Err(invalid("elite_count", "must leave room for two offspring"));
        }
        if self.pairs_per_generation == Some(0) {
            return Err(invalid("pairs_per_generation", "must be at least 1"));
        }
        Ok(())
    }

    pub fn pairs(&self) -> usize {
        self.pairs_per_generation.unwrap_or((self.population / 2).max(1))
    }

    pub fn mutation_prob_for(&self, gene_count: usize) -> f64 {
        self.mutation_prob.unwrap_or(1.0 / gene_count.max(1) as f64)
    }
}
