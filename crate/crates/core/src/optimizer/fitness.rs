use serde::{Deserialize, Serialize};

use super::genome::{Chromosome, GenomeLayout, PowerGenes, SearchSpace};
use super::{Objective, ProblemSpec};
use crate::channel::{ChannelModel, RisElementPose};
use crate::error::Result;
use crate::rates::{
    noma_report, rsma_report, total_power, AssociationMatrix, NomaPowerAllocation, RateReport, RsmaPowerAllocation,
};
use crate::scenario::{LinkBudget, Scenario};

/// Objective value plus the per-user minimum-rate shortfalls (bits/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub objective: f64,
    pub feasible: bool,
    pub violations: Vec<f64>,
}

impl FitnessRecord {
    pub fn new(objective: f64, violations: Vec<f64>) -> Self {
        Self {
            objective,
            feasible: violations.iter().all(|&v| v == 0.0),
            violations,
        }
    }

    pub fn total_violation(&self) -> f64 {
        self.violations.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Allocation {
    Rsma(RsmaPowerAllocation),
    Noma(NomaPowerAllocation),
}

/// Physical configuration a chromosome stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub association: AssociationMatrix,
    pub poses: Vec<RisElementPose>,
    pub allocation: Allocation,
}

/// Scores chromosomes of one problem on one frozen scenario.
#[derive(Debug, Clone)]
pub struct Evaluator {
    spec: ProblemSpec,
    layout: GenomeLayout,
    model: ChannelModel,
    link: LinkBudget,
    p_total: f64,
    min_rate: f64,
}

impl Evaluator {
    pub fn new(scenario: &Scenario, spec: &ProblemSpec) -> Result<Self> {
        Self::with_space(scenario, spec, SearchSpace::Continuous)
    }

    pub fn with_space(scenario: &Scenario, spec: &ProblemSpec, space: SearchSpace) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec: *spec,
            layout: GenomeLayout::new(scenario, spec).with_space(space)?,
            model: ChannelModel::new(scenario)?,
            link: scenario.params.link(),
            p_total: total_power(&scenario.params),
            min_rate: scenario.params.min_rate,
        })
    }

    pub fn layout(&self) -> &GenomeLayout {
        &self.layout
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn total_power(&self) -> f64 {
        self.p_total
    }

    pub fn channel_model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn decode(&self, c: &Chromosome) -> Result<Decoded> {
        self.layout.check(c)?;
        let association = AssociationMatrix::new(c.assoc.clone(), self.layout.num_users)?;
        let poses = self.model.poses(&c.omega, &c.gamma);
        let allocation = match self.layout.power {
            PowerGenes::Rsma { tx_power } => {
                let sum: f64 = c.power.iter().sum();
                let scale = if sum > tx_power { tx_power / sum } else { 1.0 };
                Allocation::Rsma(RsmaPowerAllocation::new(
                    c.power[0] * scale,
                    c.power[1..].iter().map(|p| p * scale).collect(),
                    tx_power,
                )?)
            }
            PowerGenes::Noma => Allocation::Noma(NomaPowerAllocation::new(c.power[0], self.layout.num_users)?),
            PowerGenes::Fixed { epsilon } => {
                Allocation::Noma(NomaPowerAllocation::new(epsilon, self.layout.num_users)?)
            }
        };
        Ok(Decoded {
            association,
            poses,
            allocation,
        })
    }

    /// Full rate breakdown for a chromosome, SEE included.
    pub fn report(&self, c: &Chromosome) -> Result<RateReport> {
        let d = self.decode(c)?;
        let channels = self.model.assemble(&c.omega, &c.gamma)?;
        let report = match &d.allocation {
            Allocation::Rsma(a) => rsma_report(&self.link, &channels, &d.association, a, self.spec.rsma)?,
            Allocation::Noma(a) => noma_report(&self.link, &channels, &d.association, &a.coefficients)?,
        };
        report.with_total_power(self.p_total)
    }

    pub fn evaluate(&self, c: &Chromosome) -> Result<FitnessRecord> {
        let report = self.report(c)?;
        let objective = match self.spec.objective {
            Objective::MinSecrecyRate => report.min_secrecy_rate,
            Objective::MinSecrecyEnergyEfficiency => report.see.unwrap_or(0.0),
        };
        let violations = report
            .per_user_rates
            .iter()
            .map(|r| (self.min_rate - r.total).max(0.0))
            .collect();
        Ok(FitnessRecord::new(objective, violations))
    }
}

/// One-shot evaluation; builds the channel cache each call.
pub fn evaluate(c: &Chromosome, scenario: &Scenario, spec: &ProblemSpec) -> Result<FitnessRecord> {
    Evaluator::new(scenario, spec)?.evaluate(c)
}
