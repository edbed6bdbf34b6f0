//! Parameter sweeps, the fixed-power NOMA baseline, convergence summaries and
//! decision-variable tables.
//!
//! Every run in a sweep shares one frozen scenario snapshot per swept value
//! (device orientations drawn from `scenario_seed`); replications differ only
//! in the GA seed, so each row is reproducible from `(value, problem, seed)`.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::optimizer::{
    run_ga, Allocation, Chromosome, Evaluator, GaResult, GenomeLayout, PowerGenes, ProblemId, ProblemSpec, TracePoint,
};
use crate::rates::Scheme;
use crate::scenario::{build_default_scenario, Overrides, ParamValue, Scenario, KNOWN_KEYS};

/// Power coefficient of the fixed-allocation NOMA baseline.
pub const BASELINE_EPSILON: f64 = 0.6;

/// Scenario seed used when a sweep does not name one.
pub const DEFAULT_SCENARIO_SEED: u64 = 1;

/// Column order of every results CSV.
pub const RESULT_COLUMNS: [&str; 7] = ["param", "value", "scheme", "problem", "seed", "objective", "runtime_s"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    /// Seeds `0..n`.
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::Count(10)
    }
}

/// One swept parameter over a list of values, for a set of problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Override key, e.g. `P_S` or `K` (same units as scenario files).
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub fixed: Overrides,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default = "default_scenario_seed")]
    pub scenario_seed: u64,
    pub problems: Vec<ProblemId>,
}

fn default_scenario_seed() -> u64 {
    DEFAULT_SCENARIO_SEED
}

impl SweepSpec {
    pub fn new(parameter: &str, values: Vec<f64>, problems: Vec<ProblemId>) -> Self {
        Self {
            parameter: parameter.to_string(),
            values,
            fixed: Overrides::new(),
            seeds: Seeds::default(),
            scenario_seed: DEFAULT_SCENARIO_SEED,
            problems,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !KNOWN_KEYS.contains(&self.parameter.as_str()) {
            return Err(Error::UnknownParameter(self.parameter.clone()));
        }
        if self.values.is_empty() {
            return Err(invalid("values", "sweep needs at least one value"));
        }
        if self.seeds.to_vec().is_empty() {
            return Err(invalid("seeds", "need at least one replication"));
        }
        if self.problems.is_empty() {
            return Err(invalid("problems", "name at least one problem"));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// One GA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub scheme: Scheme,
    /// Problem label, e.g. `P1` or `P2-fixed`.
    pub problem: String,
    pub seed: u64,
    /// Best feasible objective, or 0 when the run found nothing feasible.
    pub objective: f64,
    pub feasible: bool,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Median and quartiles of one `(value, problem)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub value: f64,
    pub problem: String,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub runs: usize,
    pub feasible_runs: usize,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

impl SweepResult {
    /// Objectives of one cell, in seed order.
    pub fn objectives(&self, value: f64, problem: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.value == value && r.problem == problem)
            .map(|r| r.objective)
            .collect()
    }

    pub fn median(&self, value: f64, problem: &str) -> f64 {
        median(&self.objectives(value, problem))
    }

    /// Cells in first-appearance order.
    pub fn summary(&self) -> Vec<CellSummary> {
        let mut cells: Vec<(f64, String)> = Vec::new();
        for r in &self.rows {
            if !cells.iter().any(|(v, p)| *v == r.value && *p == r.problem) {
                cells.push((r.value, r.problem.clone()));
            }
        }
        cells
            .into_iter()
            .map(|(value, problem)| {
                let rows: Vec<&SweepRow> =
                    self.rows.iter().filter(|r| r.value == value && r.problem == problem).collect();
                let mut obj: Vec<f64> = rows.iter().map(|r| r.objective).collect();
                obj.sort_by(f64::total_cmp);
                CellSummary {
                    value,
                    median: quantile(&obj, 0.5),
                    q1: quantile(&obj, 0.25),
                    q3: quantile(&obj, 0.75),
                    runs: rows.len(),
                    feasible_runs: rows.iter().filter(|r| r.feasible).count(),
                    problem,
                }
            })
            .collect()
    }

    /// `(seed, a, b)` objectives of two problems run on the same seeds.
    pub fn paired(&self, value: f64, a: &str, b: &str) -> Vec<(u64, f64, f64)> {
        let mut out = Vec::new();
        for ra in self.rows.iter().filter(|r| r.value == value && r.problem == a) {
            if let Some(rb) = self
                .rows
                .iter()
                .find(|r| r.value == value && r.problem == b && r.seed == ra.seed)
            {
                out.push((ra.seed, ra.objective, rb.objective));
            }
        }
        out
    }

    /// Results CSV (header plus one row per run). `runtime_s` is written as 0
    /// when `timing` is false so reruns are byte-identical.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut s = RESULT_COLUMNS.join(",");
        s.push('\n');
        for r in &self.rows {
            let runtime = if timing { r.runtime_s } else { 0.0 };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.param, r.value, r.scheme, r.problem, r.seed, r.objective, runtime
            );
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("value,problem,median,q1,q3,runs,feasible_runs\n");
        for c in self.summary() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                c.value, c.problem, c.median, c.q1, c.q3, c.runs, c.feasible_runs
            );
        }
        s
    }
}

struct Task<'a> {
    param: &'a str,
    value: f64,
    scenario: &'a Scenario,
    spec: ProblemSpec,
    seed: u64,
}

fn run_task(t: &Task) -> Result<(SweepRow, GaResult)> {
    let mut config = t.scenario.params.ga.clone();
    config.rng_seed = t.seed;
    let start = Instant::now();
    let result = run_ga(t.scenario, &t.spec, &config)?;
    let runtime_s = start.elapsed().as_secs_f64();
    let row = SweepRow {
        param: t.param.to_string(),
        value: t.value,
        scheme: t.spec.scheme,
        problem: t.spec.label(),
        seed: t.seed,
        objective: if result.record.feasible { result.record.objective } else { 0.0 },
        feasible: result.record.feasible,
        runtime_s,
    };
    Ok((row, result))
}

fn run_tasks(tasks: &[Task]) -> Result<Vec<(SweepRow, GaResult)>> {
    tasks.par_iter().map(run_task).collect()
}

/// Run every `(value, problem, seed)` combination on top of `base` overrides.
pub fn sweep(base: &Overrides, spec: &SweepSpec) -> Result<SweepResult> {
    Ok(SweepResult {
        rows: sweep_with_traces(base, spec)?.into_iter().map(|(r, _)| r).collect(),
    })
}

/// As [`sweep`], also returning each run's full GA result.
pub fn sweep_with_traces(base: &Overrides, spec: &SweepSpec) -> Result<Vec<(SweepRow, GaResult)>> {
    spec.validate()?;
    let scenarios = spec
        .values
        .iter()
        .map(|&v| {
            let mut o = base.clone();
            o.extend(spec.fixed.clone());
            o.insert(spec.parameter.clone(), ParamValue::Number(v));
            build_default_scenario(&o, spec.scenario_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let seeds = spec.seeds.to_vec();
    let mut tasks = Vec::new();
    for (scenario, &value) in scenarios.iter().zip(&spec.values) {
        for &id in &spec.problems {
            for &seed in &seeds {
                tasks.push(Task {
                    param: &spec.parameter,
                    value,
                    scenario,
                    spec: ProblemSpec::new(id),
                    seed,
                });
            }
        }
    }
    run_tasks(&tasks)
}

/// Full NOMA problem against the same problem with `ε` frozen at 0.6, on identical seeds.
pub fn fixed_power_baseline(scenario: &Scenario, problem: ProblemId, seeds: &[u64]) -> Result<SweepResult> {
    let fixed = ProblemSpec::fixed_power(problem, BASELINE_EPSILON)?;
    let mut tasks = Vec::new();
    for spec in [ProblemSpec::new(problem), fixed] {
        for &seed in seeds {
            tasks.push(Task {
                param: "epsilon",
                value: BASELINE_EPSILON,
                scenario,
                spec,
                seed,
            });
        }
    }
    Ok(SweepResult {
        rows: run_tasks(&tasks)?.into_iter().map(|(r, _)| r).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    /// Last generation whose best objective rose by more than 1% over the previous one.
    pub last_improvement: usize,
    /// Less than 1% cumulative improvement over the final 20 generations.
    pub plateau: bool,
    pub final_objective: f64,
    pub generations: usize,
}

/// Relative tolerance used by [`convergence_report`].
pub const CONVERGENCE_TOLERANCE: f64 = 0.01;
/// Window, in generations, that must be flat for a plateau.
pub const PLATEAU_WINDOW: usize = 20;

fn relative_gain(from: f64, to: f64) -> f64 {
    if to <= from {
        0.0
    } else if from.abs() == 0.0 {
        f64::INFINITY
    } else {
        (to - from) / from.abs()
    }
}

pub fn convergence_report(trace: &[TracePoint]) -> Result<ConvergenceSummary> {
    let last = trace.last().ok_or_else(|| invalid("trace", "empty convergence trace"))?;
    let best: Vec<f64> = trace.iter().map(|p| p.best_objective).collect();
    let last_improvement = (1..best.len())
        .rev()
        .find(|&i| relative_gain(best[i - 1], best[i]) > CONVERGENCE_TOLERANCE)
        .unwrap_or(0);
    let window_start = best.len().saturating_sub(PLATEAU_WINDOW + 1);
    Ok(ConvergenceSummary {
        last_improvement: trace[last_improvement].generation,
        plateau: relative_gain(best[window_start], best[best.len() - 1]) < CONVERGENCE_TOLERANCE,
        final_objective: last.best_objective,
        generations: last.generation,
    })
}

pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut s = String::from("generation,best_objective,feasible_count\n");
    for p in trace {
        let _ = writeln!(s, "{},{},{}", p.generation, p.best_objective, p.feasible_count);
    }
    s
}

/// One RIS element in a decision-variable table; user and element numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementSetting {
    pub k: usize,
    pub user: usize,
    pub omega_deg: f64,
    pub gamma_deg: f64,
}

/// Optimized decision variables in the layout of a results table: per-element
/// association and tilts, then the power allocation as labelled entries
/// (`P0`, `P1`.. in watts for RSMA; `epsilon`, `c1`.. for NOMA).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTable {
    pub elements: Vec<ElementSetting>,
    pub power: Vec<(String, f64)>,
}

pub fn decision_variable_dump(best: &Chromosome, evaluator: &Evaluator) -> Result<DecisionTable> {
    let decoded = evaluator.decode(best)?;
    let elements = best
        .assoc
        .iter()
        .zip(best.omega.iter().zip(&best.gamma))
        .enumerate()
        .map(|(k, (&u, (&w, &g)))| ElementSetting {
            k: k + 1,
            user: u + 1,
            omega_deg: w.to_degrees(),
            gamma_deg: g.to_degrees(),
        })
        .collect();
    let power = match decoded.allocation {
        Allocation::Rsma(a) => std::iter::once(("P0".to_string(), a.common))
            .chain(a.private.iter().enumerate().map(|(u, &p)| (format!("P{}", u + 1), p)))
            .collect(),
        Allocation::Noma(a) => std::iter::once(("epsilon".to_string(), a.epsilon))
            .chain(a.coefficients.iter().enumerate().map(|(u, &c)| (format!("c{}", u + 1), c)))
            .collect(),
    };
    Ok(DecisionTable { elements, power })
}

impl DecisionTable {
    /// Two CSV blocks separated by a blank line: elements, then power entries.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,user,omega_deg,gamma_deg\n");
        for e in &self.elements {
            let _ = writeln!(s, "{},{},{},{}", e.k, e.user, e.omega_deg, e.gamma_deg);
        }
        s.push_str("\nentry,value\n");
        for (name, v) in &self.power {
            let _ = writeln!(s, "{name},{v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("decision table: {what}"));
        let (elements_block, power_block) = text.split_once("\n\n").ok_or_else(|| bad("missing power block"))?;
        let mut lines = elements_block.lines();
        if lines.next() != Some("k,user,omega_deg,gamma_deg") {
            return Err(bad("unexpected element header"));
        }
        let mut elements = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            let int = |s: &str| s.parse::<usize>().map_err(|_| bad(line));
            elements.push(ElementSetting {
                k: int(f[0])?,
                user: int(f[1])?,
                omega_deg: num(f[2])?,
                gamma_deg: num(f[3])?,
            });
        }
        let mut lines = power_block.lines();
        if lines.next() != Some("entry,value") {
            return Err(bad("unexpected power header"));
        }
        let mut power = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let (name, v) = line.split_once(',').ok_or_else(|| bad(line))?;
            power.push((name.to_string(), v.parse::<f64>().map_err(|_| bad(line))?));
        }
        Ok(Self { elements, power })
    }

    /// Chromosome reproducing this table under `layout`.
    pub fn to_chromosome(&self, layout: &GenomeLayout) -> Result<Chromosome> {
        let mut elements = self.elements.clone();
        elements.sort_by_key(|e| e.k);
        if elements.iter().enumerate().any(|(i, e)| e.k != i + 1) || elements.len() != layout.num_elements {
            return Err(Error::MalformedGenome("element numbers must run 1..K".into()));
        }
        if elements.iter().any(|e| e.user == 0) {
            return Err(Error::MalformedGenome("users are numbered from 1".into()));
        }
        let entry = |name: &str| {
            self.power
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, v)| v)
                .ok_or_else(|| Error::MalformedGenome(format!("missing power entry {name}")))
        };
        let power = match layout.power {
            PowerGenes::Rsma { .. } => (0..=layout.num_users)
                .map(|u| entry(&format!("P{u}")))
                .collect::<Result<Vec<_>>>()?,
            PowerGenes::Noma => vec![entry("epsilon")?],
            PowerGenes::Fixed { .. } => Vec::new(),
        };
        let c = Chromosome {
            assoc: elements.iter().map(|e| e.user - 1).collect(),
            omega: elements.iter().map(|e| e.omega_deg.to_radians().clamp(-FRAC_PI_2, FRAC_PI_2)).collect(),
            gamma: elements.iter().map(|e| e.gamma_deg.to_radians().clamp(-FRAC_PI_2, FRAC_PI_2)).collect(),
            power,
        };
        layout.check(&c)?;
        Ok(c)
    }
}
