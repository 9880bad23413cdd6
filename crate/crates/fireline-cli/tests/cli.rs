use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fireline"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn bundled(dir: &TempDir, name: &str, seed: &str) -> PathBuf {
    let o = run(&["scene", name, "--seed", seed]);
    assert!(o.status.success());
    write(dir, &format!("{name}.scene"), &stdout(&o))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_corner_and_empty() {
    let dir = TempDir::new().unwrap();
    let corner = bundled(&dir, "corner", "0");
    let o = run(&["solve", s(&corner), "--probe", "3,0"]);
    assert_eq!(o.status.code(), Some(0));
    let t: f64 = stdout(&o).trim().parse().unwrap();
    assert!((t - (5f64.sqrt() - 1.0 + 2f64.sqrt())).abs() < 1e-12, "{t}");

    let empty = bundled(&dir, "empty", "0");
    let o = run(&["solve", s(&empty), "--probe", "3,0", "--probe", "-0.5,0"]);
    assert_eq!(stdout(&o), "2\n0\n");

    let o = run(&["solve", s(&corner), "--grid", "--json", "--probe", "3,0"]);
    let t = json(&o)["probes"][0]["t"].as_f64().unwrap();
    assert!((t - 2.6503).abs() < 3.0 * 0.02 * 1.09, "{t}");
}

#[test]
fn bad_scene_exits_two_with_line() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.scene", "version 1\n[discs]\n0 0 1\n[params]\nsigma = 2.5\nwind = 3\n");
    let o = run(&["solve", s(&bad), "--probe", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 6") && err.contains("unknown key wind"), "{err}");

    let o = run(&["solve", s(&dir.path().join("missing.scene"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", s(&bad), "--probe", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_cases() {
    let dir = TempDir::new().unwrap();
    let o = run(&["verify", s(&bundled(&dir, "empty", "0"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["admissible"], true);

    let o = run(&["verify", s(&bundled(&dir, "fast-circle", "0"))]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["admissible"], false);
    // the 1.5 ring is met at t = 0.5, when only 1.25 could have been built
    let first = v["violation_times"][0].as_f64().unwrap();
    assert!((first - 0.5).abs() < 1e-3, "{first}");

    let o = run(&["verify", s(&bundled(&dir, "spiral", "0"))]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn cost_cases() {
    let dir = TempDir::new().unwrap();
    let o = run(&["cost", s(&bundled(&dir, "circle", "0"))]);
    let v = json(&o);
    let per = v["barrier_length"].as_f64().unwrap();
    let want = 9.0 * std::f64::consts::PI + per;
    let band = v["area_error_band"].as_f64().unwrap() + 0.01;
    assert!((v["cost"].as_f64().unwrap() - want).abs() <= band, "{v}");

    let o = run(&["cost", s(&bundled(&dir, "empty", "0"))]);
    let v = json(&o);
    assert_eq!(v["bounded"], false);
    assert_eq!(v["cost"], "inf");

    let v = json(&run(&["cost", s(&bundled(&dir, "spiral", "0"))]));
    assert_eq!(v["bounded"], true);
}

#[test]
fn detour_cases() {
    let dir = TempDir::new().unwrap();
    let wall = write(&dir, "wall.scene", "version 1\n[discs]\n-1 0 0.02\n[segments]\n0 -0.05 0 0.05\n[params]\nsigma = 2\n");
    let csv = dir.path().join("path.csv");
    let o = run(&["detour", s(&wall), "--from", "-1,0", "--to", "1,0", "--eps", "0.2", "--unchecked", "--csv", s(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["length"].as_f64().unwrap() <= 2.0 + 9.0 * 0.2 * 0.1);
    assert_eq!(v["legs_visible"], true);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("t,x\n"));

    // the wall is too dense for the stated hypotheses
    let o = run(&["detour", s(&wall), "--from", "-1,0", "--to", "1,0", "--eps", "0.2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["ok"], false);

    let empty = bundled(&dir, "empty", "0");
    let v = json(&run(&["detour", s(&empty), "--from", "2,0", "--to", "4,0"]));
    assert!((v["length"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn prune_dust_demo() {
    let dir = TempDir::new().unwrap();
    let dust = bundled(&dir, "dust", "3");
    let out = dir.path().join("pruned.scene");
    let fig = dir.path().join("box.svg");
    let o = run(&["--seed", "3", "prune", s(&dust), "--out", s(&out), "--svg", s(&fig)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&o);
    let removed = v["removed_length"].as_f64().unwrap();
    assert!(removed > 0.0);
    assert!(v["certificate"]["delta_j"].as_f64().unwrap() < 0.0);
    assert!(std::fs::read_to_string(&fig).unwrap().contains("fill-opacity"));

    let before = std::fs::read_to_string(&dust).unwrap();
    let after = std::fs::read_to_string(&out).unwrap();
    assert!(after.lines().count() > 10 && after.lines().count() <= before.lines().count() + v["segments_cut"].as_u64().unwrap() as usize);

    // same seed, same report
    let again = run(&["--seed", "3", "prune", s(&dust)]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn prune_without_barrier_in_box_is_a_no_op() {
    let dir = TempDir::new().unwrap();
    let o = run(&["prune", s(&bundled(&dir, "corner", "0"))]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["removed_length"], 0.0);
    assert_eq!(v["certificate"]["passed"], true);
}

#[test]
fn prune_failure_is_structured() {
    let dir = TempDir::new().unwrap();
    let o = run(&["prune", s(&bundled(&dir, "dust", "1")), "--eps", "0.001"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["ok"], false);
    assert_eq!(v["kind"], "NoAnchor");
}

#[test]
fn lemmas_suites() {
    let o = run(&["lemmas"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let o = run(&["lemmas", "--slack", "-0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));

    let o = run(&["lemmas", "empty", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = json(&o);
    assert!(rows.as_array().unwrap().iter().all(|r| r["passed"] == true));

    assert_eq!(run(&["lemmas", "nonsense"]).status.code(), Some(2));
}

#[test]
fn lemmas_on_a_scene_file() {
    let dir = TempDir::new().unwrap();
    let o = run(&["lemmas", s(&bundled(&dir, "radial", "0"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("touch-interval"));
}

#[test]
fn figures_and_fields() {
    let dir = TempDir::new().unwrap();
    let corner = bundled(&dir, "corner", "0");
    let (svg, csv) = (dir.path().join("f.svg"), dir.path().join("f.csv"));
    let o = bin()
        .args(["solve", s(&corner), "--svg", s(&svg), "--csv", s(&csv), "--levels", "3"])
        .env("FIRELINE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.matches("<path").count() >= 3);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("# origin_x="));

    let o = bin().args(["solve", s(&corner)]).env("FIRELINE_THREADS", "none").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scene_output_round_trips() {
    let dir = TempDir::new().unwrap();
    let a = bundled(&dir, "spiral", "0");
    let o = run(&["scene", "spiral"]);
    assert_eq!(std::fs::read_to_string(&a).unwrap(), stdout(&o));
    assert_eq!(run(&["scene", "nowhere"]).status.code(), Some(2));
}
