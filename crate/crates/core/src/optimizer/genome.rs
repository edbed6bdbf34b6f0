use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::oracle::GridSpec;
use super::ProblemSpec;
use crate::error::{Error, Result};
use crate::rates::Scheme;
use crate::scenario::Scenario;

/// Smallest admissible NOMA coefficient gene; `ε = 0.5` itself is excluded.
pub const NOMA_EPSILON_FLOOR: f64 = 0.5 + 1e-9;

/// One candidate solution. Association genes are 0-based user indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub assoc: Vec<usize>,
    pub omega: Vec<f64>,
    pub gamma: Vec<f64>,
    /// RSMA: `[P0, P_1, .., P_U]`; NOMA: `[ε]`; frozen NOMA: empty.
    pub power: Vec<f64>,
}

impl Chromosome {
    pub fn gene_count(&self) -> usize {
        self.assoc.len() + self.omega.len() + self.gamma.len() + self.power.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PowerGenes {
    Rsma { tx_power: f64 },
    Noma,
    Fixed { epsilon: f64 },
}

/// Where real-valued genes may live.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum SearchSpace {
    #[default]
    Continuous,
    /// Angles restricted to a grid and power genes to a list of whole
    /// power vectors; used to compare against the exhaustive oracle.
    Grid(GridSpec),
}

/// Shape and bounds of the genome for one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GenomeLayout {
    pub num_elements: usize,
    pub num_users: usize,
    pub power: PowerGenes,
    pub space: SearchSpace,
}

impl GenomeLayout {
    pub fn new(scenario: &Scenario, spec: &ProblemSpec) -> Self {
        let power = match (spec.scheme, spec.fixed_epsilon) {
            (Scheme::Rsma, _) => PowerGenes::Rsma {
                tx_power: scenario.params.tx_power,
            },
            (Scheme::Noma, None) => PowerGenes::Noma,
            (Scheme::Noma, Some(epsilon)) => PowerGenes::Fixed { epsilon },
        };
        Self {
            num_elements: scenario.num_elements(),
            num_users: scenario.num_users(),
            power,
            space: SearchSpace::Continuous,
        }
    }

    pub fn with_space(mut self, space: SearchSpace) -> Result<Self> {
        if let SearchSpace::Grid(grid) = &space {
            if grid.angles.is_empty() || grid.powers.is_empty() {
                return Err(Error::MalformedGenome("grid needs at least one angle and one power point".into()));
            }
            if grid.angles.iter().any(|a| a.abs() > FRAC_PI_2) {
                return Err(Error::MalformedGenome("grid angle outside [-90°, 90°]".into()));
            }
            for p in &grid.powers {
                self.check_power(p)?;
            }
        }
        self.space = space;
        Ok(self)
    }

    pub fn power_len(&self) -> usize {
        match self.power {
            PowerGenes::Rsma { .. } => self.num_users + 1,
            PowerGenes::Noma => 1,
            PowerGenes::Fixed { .. } => 0,
        }
    }

    /// Genes actually stored: one integer per element, two tilts per element, power genes.
    pub fn gene_count(&self) -> usize {
        3 * self.num_elements + self.power_len()
    }

    /// Decision-variable count with the association written as `U·K` binaries.
    pub fn decision_variable_count(&self) -> usize {
        self.num_users * self.num_elements + 2 * self.num_elements + self.power_len()
    }

    /// Inclusive bounds of every power gene.
    pub fn power_bounds(&self) -> (f64, f64) {
        match self.power {
            PowerGenes::Rsma { tx_power } => (0.0, tx_power),
            PowerGenes::Noma | PowerGenes::Fixed { .. } => (NOMA_EPSILON_FLOOR, 1.0),
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Chromosome {
        let k = self.num_elements;
        let assoc = (0..k).map(|_| rng.random_range(0..self.num_users)).collect();
        match &self.space {
            SearchSpace::Continuous => {
                let mut angle = || rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
                let omega = (0..k).map(|_| angle()).collect();
                let gamma = (0..k).map(|_| angle()).collect();
                let (lo, hi) = self.power_bounds();
                let power = (0..self.power_len()).map(|_| rng.random_range(lo..=hi)).collect();
                Chromosome {
                    assoc,
                    omega,
                    gamma,
                    power,
                }
            }
            SearchSpace::Grid(grid) => {
                let mut angle = || grid.angles[rng.random_range(0..grid.angles.len())];
                let omega = (0..k).map(|_| angle()).collect();
                let gamma = (0..k).map(|_| angle()).collect();
                let power = grid.powers[rng.random_range(0..grid.powers.len())].clone();
                Chromosome {
                    assoc,
                    omega,
                    gamma,
                    power,
                }
            }
        }
    }

    fn check_power(&self, power: &[f64]) -> Result<()> {
        if power.len() != self.power_len() {
            return Err(Error::MalformedGenome(format!(
                "{} power genes, expected {}",
                power.len(),
                self.power_len()
            )));
        }
        let (lo, hi) = self.power_bounds();
        if power.iter().any(|p| !(lo..=hi).contains(p)) {
            return Err(Error::MalformedGenome(format!("power gene outside [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Structural validity: shapes, user indices and gene bounds.
    pub fn check(&self, c: &Chromosome) -> Result<()> {
        let k = self.num_elements;
        if c.assoc.len() != k || c.omega.len() != k || c.gamma.len() != k {
            return Err(Error::MalformedGenome(format!(
                "segments of length {}/{}/{}, expected {k}",
                c.assoc.len(),
                c.omega.len(),
                c.gamma.len()
            )));
        }
        if let Some(u) = c.assoc.iter().find(|&&u| u >= self.num_users) {
            return Err(Error::MalformedGenome(format!("association gene {} exceeds U = {}", u + 1, self.num_users)));
        }
        if c.omega.iter().chain(&c.gamma).any(|a| !(a.abs() <= FRAC_PI_2)) {
            return Err(Error::MalformedGenome("tilt angle outside [-90°, 90°]".into()));
        }
        self.check_power(&c.power)
    }
}
