use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fitness::{Evaluator, FitnessRecord};
use super::genome::{Chromosome, GenomeLayout, PowerGenes, SearchSpace, NOMA_EPSILON_FLOOR};
use super::operators::rank_cmp;
use super::ProblemSpec;
use crate::error::{invalid, Error, Result};
use crate::scenario::Scenario;

/// Largest enumeration the oracle will attempt.
pub const ORACLE_BUDGET: f64 = 1e8;

/// Discretization of the real-valued genes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Tilt values (radians) shared by `ω` and `γ`.
    pub angles: Vec<f64>,
    /// Complete power-gene vectors.
    pub powers: Vec<Vec<f64>>,
}

impl GridSpec {
    /// `angle_points` tilts evenly spanning [-90°, 90°] and `power_points`
    /// power vectors: RSMA moves the common share from 0 to all of `P_S` with
    /// the rest split evenly over private streams; NOMA steps `ε` up to 1.
    pub fn uniform(scenario: &Scenario, spec: &ProblemSpec, angle_points: usize, power_points: usize) -> Result<Self> {
        if angle_points == 0 || power_points == 0 {
            return Err(invalid("grid", "needs at least one point per axis"));
        }
        let angles = if angle_points == 1 {
            vec![0.0]
        } else {
            (0..angle_points)
                .map(|i| -FRAC_PI_2 + 2.0 * FRAC_PI_2 * i as f64 / (angle_points - 1) as f64)
                .collect()
        };
        let layout = GenomeLayout::new(scenario, spec);
        let u = layout.num_users as f64;
        let powers = match layout.power {
            PowerGenes::Rsma { tx_power } => (0..power_points)
                .map(|i| {
                    let share = if power_points == 1 { 0.0 } else { i as f64 / (power_points - 1) as f64 };
                    let mut v = vec![share * tx_power];
                    v.extend(std::iter::repeat_n((1.0 - share) * tx_power / u, layout.num_users));
                    v
                })
                .collect(),
            PowerGenes::Noma => (0..power_points)
                .map(|i| vec![(0.5 + 0.5 * (i + 1) as f64 / power_points as f64).max(NOMA_EPSILON_FLOOR)])
                .collect(),
            PowerGenes::Fixed { .. } => vec![Vec::new()],
        };
        Ok(Self { angles, powers })
    }

    /// Number of grid configurations for `K` elements and `U` users.
    pub fn size(&self, num_elements: usize, num_users: usize) -> f64 {
        (num_users as f64).powi(num_elements as i32)
            * (self.angles.len() as f64).powi(2 * num_elements as i32)
            * self.powers.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best: Chromosome,
    pub record: FitnessRecord,
    pub evaluations: u64,
}

fn chromosome_at(mut index: u64, grid: &GridSpec, k: usize, u: usize) -> Chromosome {
    let mut digit = |base: usize| {
        let d = (index % base as u64) as usize;
        index /= base as u64;
        d
    };
    let power = grid.powers[digit(grid.powers.len())].clone();
    let omega = (0..k).map(|_| grid.angles[digit(grid.angles.len())]).collect();
    let gamma = (0..k).map(|_| grid.angles[digit(grid.angles.len())]).collect();
    let assoc = (0..k).map(|_| digit(u)).collect();
    Chromosome {
        assoc,
        omega,
        gamma,
        power,
    }
}

/// Exhaustive search over every association and grid point. Among equally
/// ranked configurations the one enumerated first wins.
pub fn brute_force_oracle(scenario: &Scenario, spec: &ProblemSpec, grid: &GridSpec) -> Result<OracleResult> {
    let (k, u) = (scenario.num_elements(), scenario.num_users());
    let required = grid.size(k, u);
    if required > ORACLE_BUDGET {
        return Err(Error::BudgetExceeded {
            required,
            limit: ORACLE_BUDGET,
        });
    }
    let ev = Evaluator::with_space(scenario, spec, SearchSpace::Grid(grid.clone()))?;
    let total = required as u64;
    let (index, record) = (0..total)
        .into_par_iter()
        .map(|i| Ok((i, ev.evaluate(&chromosome_at(i, grid, k, u))?)))
        .try_reduce_with(|a: (u64, FitnessRecord), b: (u64, FitnessRecord)| {
            Ok(match rank_cmp(&a.1, &b.1) {
                Ordering::Greater => a,
                Ordering::Less => b,
                Ordering::Equal if a.0 <= b.0 => a,
                Ordering::Equal => b,
            })
        })
        .expect("grid is never empty")?;
    Ok(OracleResult {
        best: chromosome_at(index, grid, k, u),
        record,
        evaluations: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::ProblemId;
    use crate::scenario::{build_default_scenario, Overrides, ParamValue};

    fn tiny(k: usize, u: usize) -> Scenario {
        let o: Overrides = [("K", k as f64), ("U", u as f64)]
            .into_iter()
            .map(|(n, v)| (n.to_string(), ParamValue::Number(v)))
            .collect();
        build_default_scenario(&o, 2).unwrap()
    }

    #[test]
    fn single_point_grid() {
        let s = tiny(1, 1);
        let spec = ProblemSpec::new(ProblemId::P1);
        let grid = GridSpec::uniform(&s, &spec, 1, 1).unwrap();
        let r = brute_force_oracle(&s, &spec, &grid).unwrap();
        assert_eq!(r.evaluations, 1);
        assert_eq!(r.record, Evaluator::new(&s, &spec).unwrap().evaluate(&r.best).unwrap());
    }

    #[test]
    fn zero_power_point_gives_nonnegative_optimum() {
        let s = tiny(2, 2);
        let spec = ProblemSpec::new(ProblemId::P1);
        let mut grid = GridSpec::uniform(&s, &spec, 3, 2).unwrap();
        grid.powers.push(vec![0.0; 3]);
        let r = brute_force_oracle(&s, &spec, &grid).unwrap();
        assert!(r.record.objective >= 0.0);
        assert_eq!(r.evaluations, 4 * 81 * 3);
    }

    #[test]
    fn oversized_grid_is_refused() {
        let s = tiny(6, 2);
        let spec = ProblemSpec::new(ProblemId::P2);
        let grid = GridSpec::uniform(&s, &spec, 5, 5).unwrap();
        assert!(matches!(brute_force_oracle(&s, &spec, &grid), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn enumeration_covers_every_configuration() {
        let s = tiny(2, 2);
        let spec = ProblemSpec::new(ProblemId::P2);
        let grid = GridSpec::uniform(&s, &spec, 2, 2).unwrap();
        let n = grid.size(2, 2) as u64;
        let mut seen: Vec<_> = (0..n).map(|i| format!("{:?}", chromosome_at(i, &grid, 2, 2))).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len() as u64, n);
    }

    #[test]
    fn oracle_beats_every_sampled_grid_point() {
        let s = tiny(2, 2);
        let spec = ProblemSpec::new(ProblemId::P2);
        let grid = GridSpec::uniform(&s, &spec, 3, 3).unwrap();
        let r = brute_force_oracle(&s, &spec, &grid).unwrap();
        let ev = Evaluator::new(&s, &spec).unwrap();
        for i in (0..grid.size(2, 2) as u64).step_by(7) {
            let f = ev.evaluate(&chromosome_at(i, &grid, 2, 2)).unwrap();
            assert_ne!(rank_cmp(&f, &r.record), Ordering::Greater);
        }
    }

    #[test]
    fn uniform_grid_values() {
        let s = tiny(2, 2);
        let g = GridSpec::uniform(&s, &ProblemSpec::new(ProblemId::P1), 5, 5).unwrap();
        assert_eq!(g.angles.len(), 5);
        assert!((g.angles[1] + FRAC_PI_2 / 2.0).abs() < 1e-15);
        assert_eq!(g.powers[0], vec![0.0, 2.5, 2.5]);
        assert_eq!(g.powers[4], vec![5.0, 0.0, 0.0]);
        let g = GridSpec::uniform(&s, &ProblemSpec::new(ProblemId::P2), 5, 5).unwrap();
        let eps: Vec<f64> = g.powers.iter().map(|p| p[0]).collect();
        for (a, b) in eps.iter().zip([0.6, 0.7, 0.8, 0.9, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
