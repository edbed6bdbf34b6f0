//! Argument parsing and artifact writing for the `rvs` binary.
//!
//! Every verb writes `manifest.json` plus CSV files into `--out`. The manifest
//! hash covers the resolved inputs (not paths), and each CSV starts with a
//! `# manifest <sha256>` line, so two runs from the same inputs produce
//! identical files when timing is off.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rvs_core::experiments::{
    convergence_report, decision_variable_dump, fixed_power_baseline, sweep_with_traces, trace_csv, DecisionTable,
    Seeds, SweepResult, SweepRow, SweepSpec, DEFAULT_SCENARIO_SEED,
};
use rvs_core::optimizer::{run_ga_in, GaResult, SearchSpace};
use rvs_core::scenario::{desk_overrides, load_overrides, paper_overrides};
use rvs_core::{
    brute_force_oracle, build_default_scenario, run_ga, ChannelModel, Evaluator, GridSpec, Overrides, ProblemId,
    ProblemSpec, Scenario,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INFEASIBLE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    /// Optimize one problem on one scenario.
    Run,
    /// Sweep one parameter over values, problems and seeds (needs a sweep file).
    Sweep,
    /// Full NOMA against the fixed ε = 0.6 allocation on paired seeds.
    Baseline,
    /// Exhaustive grid search, with the grid-restricted GA alongside.
    Oracle,
    /// Write the per-element channel gains of a scenario.
    DumpChannels,
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verb::Run => "run",
            Verb::Sweep => "sweep",
            Verb::Baseline => "baseline",
            Verb::Oracle => "oracle",
            Verb::DumpChannels => "dump-channels",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// K = 30, U = 2.
    #[default]
    Desk,
    /// K = 100, U = 4.
    Paper,
}

impl Scale {
    pub fn overrides(self) -> Overrides {
        match self {
            Scale::Desk => desk_overrides(),
            Scale::Paper => paper_overrides(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rvs", version, about = "Secrecy optimization for RIS-aided VLC downlinks")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// P1 (RSMA rate), P2 (NOMA rate), P3 (RSMA SEE), P4 (NOMA SEE).
    #[arg(long, global = true)]
    problem: Option<ProblemId>,
    /// Scenario file (TOML); for `sweep`, the sweep file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// GA seed (`run`, `oracle`) or first replication seed (`sweep`, `baseline`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Scale::Desk)]
    scale: Scale,
    /// Orientation snapshot seed.
    #[arg(long, global = true)]
    scenario_seed: Option<u64>,
    /// Replications for `baseline`.
    #[arg(long, global = true)]
    seeds: Option<u64>,
    /// Angle and power grid points for `oracle`.
    #[arg(long, global = true, default_value_t = 5)]
    grid_points: usize,
    /// Decision-variable table whose tilts `dump-channels` should use.
    #[arg(long, global = true)]
    decisions: Option<PathBuf>,
    /// Write runtime_s as 0 so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliCommand {
    pub verb: Verb,
    pub problem: Option<ProblemId>,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub scale: Scale,
    pub scenario_seed: Option<u64>,
    pub seeds: Option<u64>,
    pub grid_points: usize,
    pub decisions: Option<PathBuf>,
    pub timing: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or inputs; exit code 2.
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Core(rvs_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rvs_core::Error> for CliError {
    fn from(e: rvs_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Core(_) => EXIT_INFEASIBLE,
        }
    }
}

/// Parse `argv` (program name first). Clap errors carry their own exit code
/// (2 for usage errors, 0 for `--help`).
pub fn parse_args<I, T>(argv: I) -> Result<CliCommand, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(CliCommand {
        verb: cli.verb,
        problem: cli.problem,
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        scale: cli.scale,
        scenario_seed: cli.scenario_seed,
        seeds: cli.seeds,
        grid_points: cli.grid_points,
        decisions: cli.decisions,
        timing: !cli.no_timing,
    })
}

impl CliCommand {
    pub fn validate(&self) -> Result<(), CliError> {
        for p in self.config.iter().chain(&self.decisions) {
            if !p.is_file() {
                return Err(CliError::Usage(format!("{}: no such file", p.display())));
            }
        }
        if self.verb == Verb::Sweep && self.config.is_none() {
            return Err(CliError::Usage("sweep needs --config pointing at a sweep file".into()));
        }
        if self.verb == Verb::Sweep && self.problem.is_some() {
            return Err(CliError::Usage("sweep takes its problems from the sweep file".into()));
        }
        if self.grid_points == 0 {
            return Err(CliError::Usage("--grid-points must be at least 1".into()));
        }
        if self.seeds == Some(0) {
            return Err(CliError::Usage("--seeds must be at least 1".into()));
        }
        if self.out.exists() && !self.out.is_dir() {
            return Err(CliError::Usage(format!("{}: not a directory", self.out.display())));
        }
        Ok(())
    }

    fn problem_or(&self, default: ProblemId) -> ProblemId {
        self.problem.unwrap_or(default)
    }

    fn scenario_seed(&self) -> u64 {
        self.scenario_seed.unwrap_or(DEFAULT_SCENARIO_SEED)
    }

    /// Scale defaults with the scenario file on top.
    fn overrides(&self) -> Result<Overrides, CliError> {
        let mut o = self.scale.overrides();
        if self.verb != Verb::Sweep {
            if let Some(path) = &self.config {
                o.extend(load_overrides(path).map_err(|e| CliError::Usage(e.to_string()))?);
            }
        }
        Ok(o)
    }

    fn scenario(&self) -> Result<Scenario, CliError> {
        build_default_scenario(&self.overrides()?, self.scenario_seed()).map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Inputs covered by the manifest hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestInputs {
    pub tool_version: String,
    pub verb: Verb,
    pub problem: Option<ProblemId>,
    pub seed: Option<u64>,
    pub scale: Scale,
    pub scenario_seed: u64,
    pub seeds: Option<u64>,
    pub grid_points: usize,
    pub timing: bool,
    pub overrides: Overrides,
    pub sweep: Option<SweepSpec>,
    pub decisions: Option<DecisionTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub sha256: String,
    pub inputs: ManifestInputs,
    pub command: CliCommand,
    pub files: Vec<String>,
}

impl ManifestInputs {
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("manifest inputs serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

struct Output {
    dir: PathBuf,
    hash: String,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path, hash: String) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let text = format!("# manifest {}\n{body}", self.hash);
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, inputs: ManifestInputs, command: &CliCommand) -> Result<(), CliError> {
        self.files.insert(0, "manifest.json".into());
        let manifest = Manifest {
            sha256: self.hash,
            inputs,
            command: command.clone(),
            files: self.files,
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })
    }
}

/// Drop the `# manifest` line (and any other comment lines) from a CSV file.
pub fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn replication_seeds(cmd: &CliCommand, count: u64) -> Vec<u64> {
    let first = cmd.seed.unwrap_or(0);
    (first..first + count).collect()
}

fn row_for(param: &str, value: f64, spec: &ProblemSpec, seed: u64, ga: &GaResult, runtime_s: f64) -> SweepRow {
    SweepRow {
        param: param.into(),
        value,
        scheme: spec.scheme,
        problem: spec.label(),
        seed,
        objective: if ga.record.feasible { ga.record.objective } else { 0.0 },
        feasible: ga.record.feasible,
        runtime_s,
    }
}

fn traces_csv(runs: &[(SweepRow, GaResult)]) -> String {
    let mut s = String::from("value,problem,seed,generation,best_objective,feasible_count\n");
    for (row, ga) in runs {
        for t in &ga.trace {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.value, row.problem, row.seed, t.generation, t.best_objective, t.feasible_count
            ));
        }
    }
    s
}

/// Exit status for a finished command: 1 when nothing feasible came out.
fn status(any_feasible: bool) -> u8 {
    if any_feasible {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

fn inputs(cmd: &CliCommand, overrides: Overrides, sweep: Option<SweepSpec>) -> Result<ManifestInputs, CliError> {
    let decisions = match &cmd.decisions {
        Some(p) => Some(DecisionTable::parse(&strip_comments(&read(p)?)).map_err(|e| CliError::Usage(e.to_string()))?),
        None => None,
    };
    Ok(ManifestInputs {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        verb: cmd.verb,
        problem: cmd.problem,
        seed: cmd.seed,
        scale: cmd.scale,
        scenario_seed: cmd.scenario_seed(),
        seeds: cmd.seeds,
        grid_points: cmd.grid_points,
        timing: cmd.timing,
        overrides,
        sweep,
        decisions,
    })
}

fn run(cmd: &CliCommand) -> Result<u8, CliError> {
    let scenario = cmd.scenario()?;
    let spec = ProblemSpec::new(cmd.problem_or(ProblemId::P1));
    let mut config = scenario.params.ga.clone();
    if let Some(seed) = cmd.seed {
        config.rng_seed = seed;
    }
    let manifest = inputs(cmd, cmd.overrides()?, None)?;
    let mut out = Output::new(&cmd.out, manifest.hash())?;

    let start = std::time::Instant::now();
    let ga = run_ga(&scenario, &spec, &config)?;
    let runtime = if cmd.timing { start.elapsed().as_secs_f64() } else { 0.0 };
    let row = row_for("seed", config.rng_seed as f64, &spec, config.rng_seed, &ga, runtime);
    let result = SweepResult { rows: vec![row] };
    out.write("results.csv", &result.to_csv(cmd.timing))?;
    out.write("convergence.csv", &trace_csv(&ga.trace))?;
    let ev = Evaluator::new(&scenario, &spec)?;
    out.write("decision_variables.csv", &decision_variable_dump(&ga.best, &ev)?.to_csv())?;
    out.finish(manifest, cmd)?;

    let conv = convergence_report(&ga.trace)?;
    println!(
        "{} {}: best objective {:.6e} ({}), last >1% gain at generation {}, plateau {}",
        spec.label(),
        spec.scheme,
        ga.record.objective,
        if ga.record.feasible { "feasible" } else { "infeasible" },
        conv.last_improvement,
        conv.plateau
    );
    Ok(status(ga.record.feasible))
}

fn sweep(cmd: &CliCommand) -> Result<u8, CliError> {
    let path = cmd.config.as_ref().expect("validated");
    let mut spec = SweepSpec::load(path).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(s) = cmd.scenario_seed {
        spec.scenario_seed = s;
    }
    if let Some(first) = cmd.seed {
        let n = spec.seeds.to_vec().len() as u64;
        spec.seeds = Seeds::List((first..first + n).collect());
    }
    let base = cmd.overrides()?;
    let manifest = inputs(cmd, base.clone(), Some(spec.clone()))?;
    let mut out = Output::new(&cmd.out, manifest.hash())?;
    let runs = sweep_with_traces(&base, &spec)?;
    let result = SweepResult {
        rows: runs.iter().map(|(r, _)| r.clone()).collect(),
    };
    out.write("results.csv", &result.to_csv(cmd.timing))?;
    out.write("convergence.csv", &traces_csv(&runs))?;
    out.write("summary.csv", &result.summary_csv())?;
    out.finish(manifest, cmd)?;
    println!("{} runs; summary:", result.rows.len());
    print!("{}", result.summary_csv());
    Ok(status(result.rows.iter().any(|r| r.feasible)))
}

fn baseline(cmd: &CliCommand) -> Result<u8, CliError> {
    let problem = cmd.problem_or(ProblemId::P2);
    if problem.scheme() != rvs_core::Scheme::Noma {
        return Err(CliError::Usage("baseline needs a NOMA problem (P2 or P4)".into()));
    }
    let scenario = cmd.scenario()?;
    let seeds = replication_seeds(cmd, cmd.seeds.unwrap_or(10));
    let manifest = inputs(cmd, cmd.overrides()?, None)?;
    let mut out = Output::new(&cmd.out, manifest.hash())?;
    let result = fixed_power_baseline(&scenario, problem, &seeds)?;
    out.write("results.csv", &result.to_csv(cmd.timing))?;
    let full = problem.to_string();
    let fixed = format!("{problem}-fixed");
    let mut paired = String::from("seed,full,fixed\n");
    for (seed, a, b) in result.paired(0.6, &full, &fixed) {
        paired.push_str(&format!("{seed},{a},{b}\n"));
    }
    out.write("paired.csv", &paired)?;
    out.write("summary.csv", &result.summary_csv())?;
    out.finish(manifest, cmd)?;
    println!(
        "median {full} {:.6e}, median {fixed} {:.6e}",
        result.median(0.6, &full),
        result.median(0.6, &fixed)
    );
    Ok(status(result.rows.iter().any(|r| r.feasible)))
}

fn oracle(cmd: &CliCommand) -> Result<u8, CliError> {
    let scenario = cmd.scenario()?;
    let spec = ProblemSpec::new(cmd.problem_or(ProblemId::P1));
    let grid = GridSpec::uniform(&scenario, &spec, cmd.grid_points, cmd.grid_points)?;
    let manifest = inputs(cmd, cmd.overrides()?, None)?;
    let mut out = Output::new(&cmd.out, manifest.hash())?;

    let start = std::time::Instant::now();
    let best = brute_force_oracle(&scenario, &spec, &grid)?;
    let oracle_time = if cmd.timing { start.elapsed().as_secs_f64() } else { 0.0 };
    let mut config = scenario.params.ga.clone();
    if let Some(seed) = cmd.seed {
        config.rng_seed = seed;
    }
    let start = std::time::Instant::now();
    let ga = run_ga_in(&scenario, &spec, &config, SearchSpace::Grid(grid))?;
    let ga_time = if cmd.timing { start.elapsed().as_secs_f64() } else { 0.0 };

    let points = cmd.grid_points as f64;
    let mut oracle_row = row_for("grid_points", points, &spec, 0, &ga, oracle_time);
    oracle_row.problem = format!("{}-oracle", spec.label());
    oracle_row.objective = if best.record.feasible { best.record.objective } else { 0.0 };
    oracle_row.feasible = best.record.feasible;
    let ga_row = row_for("grid_points", points, &spec, config.rng_seed, &ga, ga_time);
    let result = SweepResult {
        rows: vec![oracle_row, ga_row],
    };
    out.write("results.csv", &result.to_csv(cmd.timing))?;
    out.write("convergence.csv", &trace_csv(&ga.trace))?;
    let ev = Evaluator::new(&scenario, &spec)?;
    out.write("decision_variables.csv", &decision_variable_dump(&best.best, &ev)?.to_csv())?;
    out.finish(manifest, cmd)?;
    println!(
        "oracle {:.6e} over {} points; grid GA {:.6e}",
        best.record.objective, best.evaluations, ga.record.objective
    );
    Ok(status(best.record.feasible))
}

fn dump_channels(cmd: &CliCommand) -> Result<u8, CliError> {
    let scenario = cmd.scenario()?;
    let manifest = inputs(cmd, cmd.overrides()?, None)?;
    let k = scenario.num_elements();
    let (omega, gamma) = match &manifest.decisions {
        Some(t) => {
            let mut e = t.elements.clone();
            e.sort_by_key(|e| e.k);
            if e.len() != k {
                return Err(CliError::Usage(format!("decision table has {} elements, scenario has {k}", e.len())));
            }
            (
                e.iter().map(|e| e.omega_deg.to_radians()).collect(),
                e.iter().map(|e| e.gamma_deg.to_radians()).collect(),
            )
        }
        None => (vec![0.0; k], vec![0.0; k]),
    };
    let mut out = Output::new(&cmd.out, manifest.hash())?;
    let model = ChannelModel::new(&scenario)?;
    let ch = model.assemble(&omega, &gamma)?;

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["k".to_string(), "x".into(), "y".into(), "z".into(), "omega_deg".into(), "gamma_deg".into()];
    header.extend((1..=scenario.num_users()).map(|u| format!("h_u{u}")));
    header.push("h_eve".into());
    let csv_err = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for (e, p) in model.element_positions().iter().enumerate() {
        let mut rec = vec![
            (e + 1).to_string(),
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
            omega[e].to_degrees().to_string(),
            gamma[e].to_degrees().to_string(),
        ];
        rec.extend(ch.users.iter().map(|h| h[e].to_string()));
        rec.push(ch.eve[e].to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?).expect("utf-8");
    out.write("channels.csv", &body)?;
    out.finish(manifest, cmd)?;
    println!("{k} elements × {} users written", scenario.num_users());
    Ok(EXIT_OK)
}

/// Run a parsed command; returns the process exit code.
pub fn execute(cmd: &CliCommand) -> Result<u8, CliError> {
    cmd.validate()?;
    match cmd.verb {
        Verb::Run => run(cmd),
        Verb::Sweep => sweep(cmd),
        Verb::Baseline => baseline(cmd),
        Verb::Oracle => oracle(cmd),
        Verb::DumpChannels => dump_channels(cmd),
    }
}
