use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rvs_cli::{parse_args, strip_comments, CliCommand, Manifest, Scale, Verb};
use tempfile::TempDir;

fn rvs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rvs"))
        .args(args)
        .env("RVS_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "K = 6\nU = 2\npopulation = 30\ngenerations = 20\n";

fn records(path: &Path) -> Vec<csv::StringRecord> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&rvs(&[])), 2);
    assert_eq!(code(&rvs(&["frobnicate"])), 2);
    assert_eq!(code(&rvs(&["run", "--problem", "P9"])), 2);
    assert_eq!(code(&rvs(&["run", "--config", "/definitely/not/here.toml"])), 2);
    assert_eq!(code(&rvs(&["sweep"])), 2);
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.toml", "bogus_key = 3\n");
    assert_eq!(code(&rvs(&["run", "--config", &bad])), 2);
    assert_eq!(code(&rvs(&["baseline", "--problem", "P1"])), 2);
    assert_eq!(code(&rvs(&["--help"])), 0);
}

#[test]
fn run_writes_artifacts_tagged_with_the_manifest_hash() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL);
    let out = dir.path().join("out");
    let o = rvs(&["run", "--problem", "P2", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.sha256, manifest.inputs.hash());
    assert_eq!(manifest.sha256.len(), 64);
    assert_eq!(manifest.inputs.seed, Some(4));
    for name in ["results.csv", "convergence.csv", "decision_variables.csv"] {
        let text = fs::read_to_string(out.join(name)).unwrap();
        assert_eq!(text.lines().next().unwrap(), format!("# manifest {}", manifest.sha256), "{name}");
        assert!(manifest.files.iter().any(|f| f == name));
    }
    let rows = records(&out.join("results.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!((&rows[0][2], &rows[0][3], &rows[0][4]), ("NOMA", "P2", "4"));
    assert_eq!(records(&out.join("convergence.csv")).len(), 21);
    // six elements, the power header, then epsilon, c1 and c2
    assert_eq!(records(&out.join("decision_variables.csv")).len(), 6 + 1 + 3);
}

#[test]
fn reruns_without_timing_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = rvs(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--no-timing"]);
        assert_eq!(code(&o), 0);
        out
    };
    let (a, b) = (run("a"), run("b"));
    for name in ["results.csv", "convergence.csv", "decision_variables.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    // the manifest differs only in the recorded --out path
    let ma: Manifest = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    let mb: Manifest = serde_json::from_slice(&fs::read(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!((ma.sha256, ma.inputs), (mb.sha256, mb.inputs));
}

#[test]
fn different_inputs_change_the_hash() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL);
    let hash = |extra: &[&str], name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["dump-channels", "--config", &cfg, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(code(&rvs(&args)), 0);
        let m: Manifest = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
        m.sha256
    };
    let base = hash(&[], "a");
    assert_eq!(base, hash(&[], "b"));
    assert_ne!(base, hash(&["--scenario-seed", "9"], "c"));
}

#[test]
fn sweep_rows_cover_values_problems_and_seeds() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "sweep.toml",
        "parameter = \"P_S\"\nvalues = [1.0, 4.0]\nproblems = [\"P1\", \"P3\", \"P4\"]\nseeds = 2\n\
         [fixed]\nK = 4\npopulation = 20\ngenerations = 8\n",
    );
    let out = dir.path().join("out");
    let o = rvs(&["sweep", "--config", &spec, "--out", out.to_str().unwrap(), "--seed", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = records(&out.join("results.csv"));
    assert_eq!(rows.len(), 2 * 3 * 2);
    let mut seeds: Vec<&str> = rows.iter().map(|r| r.get(4).unwrap()).collect();
    seeds.sort();
    seeds.dedup();
    assert_eq!(seeds, ["10", "11"]);
    assert_eq!(records(&out.join("summary.csv")).len(), 2 * 3);
    assert_eq!(records(&out.join("convergence.csv")).len(), 12 * 9);
}

#[test]
fn oracle_refuses_oversized_grids_and_matches_on_small_ones() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("big");
    let o = rvs(&["oracle", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));

    let cfg = write(dir.path(), "k2.toml", "K = 2\nU = 2\n");
    let out = dir.path().join("small");
    let o = rvs(&["oracle", "--config", &cfg, "--grid-points", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows = records(&out.join("results.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][3], "P1-oracle");
    let oracle: f64 = rows[0][5].parse().unwrap();
    let ga: f64 = rows[1][5].parse().unwrap();
    assert!(ga <= oracle * (1.0 + 1e-12) && oracle > 0.0);
}

#[test]
fn infeasible_runs_exit_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.toml", &format!("{SMALL}R_min = 1e12\n"));
    let out = dir.path().join("out");
    assert_eq!(code(&rvs(&["run", "--config", &cfg, "--out", out.to_str().unwrap()])), 1);
    let rows = records(&out.join("results.csv"));
    assert_eq!(&rows[0][5], "0");
}

#[test]
fn channel_dump_uses_decision_tilts() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL);
    let run_out = dir.path().join("run");
    assert_eq!(code(&rvs(&["run", "--config", &cfg, "--out", run_out.to_str().unwrap()])), 0);
    let decisions = run_out.join("decision_variables.csv");
    let out = dir.path().join("ch");
    let o = rvs(&[
        "dump-channels",
        "--config",
        &cfg,
        "--decisions",
        decisions.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = records(&out.join("channels.csv"));
    assert_eq!(rows.len(), 6);
    let table = rvs_core::experiments::DecisionTable::parse(&strip_comments(&fs::read_to_string(&decisions).unwrap()))
        .unwrap();
    for (row, e) in rows.iter().zip(&table.elements) {
        let omega: f64 = row[4].parse().unwrap();
        assert!((omega - e.omega_deg).abs() < 1e-9);
    }
    // a table for a different panel is rejected
    let other = write(dir.path(), "k4.toml", "K = 4\nU = 2\n");
    let o = rvs(&["dump-channels", "--config", &other, "--decisions", decisions.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn command_round_trips_through_json() {
    let cmd = parse_args([
        "rvs",
        "baseline",
        "--problem",
        "P4",
        "--seeds",
        "7",
        "--scale",
        "paper",
        "--no-timing",
        "--out",
        "x/y",
    ])
    .unwrap();
    assert_eq!((cmd.verb, cmd.scale, cmd.seeds, cmd.timing), (Verb::Baseline, Scale::Paper, Some(7), false));
    let json = serde_json::to_string(&cmd).unwrap();
    let back: CliCommand = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cmd);
    // flags are accepted before the verb too
    let early = parse_args(["rvs", "--seed", "3", "run"]).unwrap();
    assert_eq!((early.verb, early.seed), (Verb::Run, Some(3)));
}
