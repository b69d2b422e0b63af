use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use collective_stopping::{BeliefGrid, Game, SamplingRegion};
use collective_stopping_cli::config::parse_config;
use collective_stopping_cli::output::parse_region_json;
use serde_json::Value;

const GAME: &str = r#"{
  "version": 1,
  "prior": 0.5,
  "grid": {"n": 96, "delta": 0.001},
  "process": {"type": "diffusion", "sigma": 1.0},
  "players": [
    {"u": {"type": "pwl", "points": [[0, 1], [0.5, 0.2], [1, 1]]}, "c": {"type": "const", "value": 0.05}},
    {"u": {"type": "pwl", "points": [[0, 0.8], [0.6, 0.1], [1, 1.2]]}, "c": {"type": "const", "value": 0.05}}
  ],
  "rule": {"type": "unanimity"},
  "simulation": {"n_paths": 2000, "dt": 0.001, "seed": 9},
  "compare": {"axis": "rules", "rules": [{"type": "unanimity"}, {"type": "unilateral"}]}
}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_collective-stopping"));
    cmd.env("COLLECTIVE_STOPPING_THREADS", "1");
    cmd
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unilateral = GAME.replace(r#""type": "unanimity"}"#, r#""type": "unilateral"}"#);
    let cfg = write_config(dir.path(), "g.json", &unilateral);
    let ok = run(&["check", "--config", &cfg, "--region", "0.3,0.7"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(stdout_json(&ok)["pass"], true);

    let dear = write_config(dir.path(), "dear.json", &unilateral.replace(r#""value": 0.05"#, r#""value": 2.0"#));
    let fail = run(&["check", "--config", &dear, "--region", "0.3,0.7"]);
    assert_eq!(fail.status.code(), Some(2));
    assert_eq!(stdout_json(&fail)["pass"], false);
}

#[test]
fn input_errors_exit_one_with_a_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", &GAME.replace(r#""sigma": 1.0"#, r#""sigma": "one""#));
    let out = run(&["check", "--config", &bad, "--region", "0.3,0.7"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/process"), "{}", String::from_utf8_lossy(&out.stderr));

    let missing = run(&["check", "--config", "/nonexistent/g.json", "--region", "0.3,0.7"]);
    assert_eq!(missing.status.code(), Some(1));
    let bad_region = run(&["check", "--config", &bad, "--region", "0.7,0.3"]);
    assert_eq!(bad_region.status.code(), Some(1));
}

#[test]
fn enumerate_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", GAME);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = run(&["enumerate", "--config", &cfg, "--out", out.to_str().unwrap(), "--svg"]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    }
    for name in ["regions.csv", "closures.csv", "regions.json", "closures.svg"] {
        let x = std::fs::read(a.join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let closures = std::fs::read_to_string(a.join("closures.csv")).unwrap();
    assert_eq!(closures.lines().next().unwrap(), "p,u1,phi1,net1,V1,u2,phi2,net2,V2,in_region");
    assert!(std::fs::read_to_string(a.join("regions.csv")).unwrap().starts_with("id,lo,hi,max_violation\n"));
    assert!(std::fs::read_to_string(a.join("closures.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn emitted_regions_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", GAME);
    let out = dir.path().join("out");
    let res = run(&["enumerate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));

    let game = Game::new(&parse_config(GAME).unwrap().game_spec().unwrap()).unwrap();
    let grid: Arc<BeliefGrid> = game.grid().clone();
    let listed: Vec<Value> = serde_json::from_str(&std::fs::read_to_string(out.join("regions.json")).unwrap()).unwrap();
    assert!(!listed.is_empty());
    for r in &listed {
        let text = r.to_string();
        let region: SamplingRegion = parse_region_json(&text, grid.clone()).unwrap();
        assert_eq!(collective_stopping_cli::output::region_json(&region), text);
        assert!(collective_stopping::certify(&game, &region).unwrap().pass);
    }
}

#[test]
fn symmetric_war() {
    let out = run(&["war", "--c1", "0.1", "--c2", "0.1", "--sigma", "1", "--n", "256"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let g = v["solution"]["g_star"].as_f64().unwrap();
    let big_g = v["solution"]["big_g_star"].as_f64().unwrap();
    let cell = v["cell"].as_f64().unwrap();
    assert!((g - (1.0 - big_g)).abs() <= cell * (1.0 + 1e-9), "{g} {big_g}");
}

#[test]
fn simulation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", GAME);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = run(&["simulate", "--config", &cfg, "--region", "0.3,0.7", "--out", out.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    }
    for name in ["simulation.json", "histogram.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn committee_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let committee = r#"{"version": 1, "grid": {"n": 128, "delta": 0.001}, "process": {"type": "diffusion", "sigma": 1.0},
        "players": [
            {"u": {"type": "committee", "v": 0.5, "piv": 2}, "c": {"type": "const", "value": 0.1}},
            {"u": {"type": "committee", "v": 1.0, "piv": 2}, "c": {"type": "const", "value": 0.1}},
            {"u": {"type": "committee", "v": 2.0, "piv": 2}, "c": {"type": "const", "value": 0.1}}],
        "rule": {"type": "quota", "q": 2}}"#;
    let cfg = write_config(dir.path(), "c.json", committee);
    let out = run(&["committee", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["pivotal"]["lower"], 2);
    assert_eq!(v["w_piv"], 0.5);

    let cfg = write_config(dir.path(), "g.json", GAME);
    let out = run(&["compare", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["violations"], 0);
}

#[test]
fn poisson_command() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"version": 1, "prior": 0.6, "grid": {"n": 257, "delta": 0.001}, "process": {"type": "poisson", "lambda": 1.0},
        "players": [{"u": {"type": "pwl", "points": [[0, 0.6], [0.6, 0.6], [1, 1]]}, "c": {"type": "const", "value": 0.05}}],
        "rule": {"type": "unilateral"}}"#;
    let cfg = write_config(dir.path(), "p.json", text);
    let out = run(&["poisson", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let lower = stdout_json(&out)["solution"]["lower"].as_f64().unwrap();
    assert!(lower < 0.6);
    // diffusion-only commands reject Poisson games as input errors
    assert_eq!(run(&["enumerate", "--config", &cfg]).status.code(), Some(1));
}
