use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dks")).args(args).output().expect("binary runs")
}

fn dks_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dks")).args(args).env(key, value).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Two triangles with SNAP-style sparse ids.
const TWO_TRIANGLES: &str = "# two triangles\n10 20\n20 30\n30 10\n40 50\n50 60\n60 40\n";

#[test]
fn solve_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "triangle.txt", "0 1\n1 2\n2 0\n");
    let o = dks(&["solve", "--graph", &g, "--k", "2"]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("normalized density: 1\n"));
}

#[test]
fn solve_reports_original_ids_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tt.txt", TWO_TRIANGLES);
    for solver in ["fw", "param", "greedy", "rank1"] {
        let o = dks(&["solve", "--graph", &g, "--k", "3", "--solver", solver, "--output", "json"]);
        assert_eq!(code(&o), 0, "{solver}: {o:?}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["normalized_density"], 1.0, "{solver}");
        let ids: Vec<u64> = v["vertices"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
        assert!(ids == [10, 20, 30] || ids == [40, 50, 60], "{solver}: {ids:?}");
    }
}

#[test]
fn json_output_is_reproducible_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tt.txt", TWO_TRIANGLES);
    let run = || {
        let o = dks(&["solve", "--graph", &g, "--k", "3", "--solver", "param", "--output", "json"]);
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_s");
        v
    };
    assert_eq!(run(), run());
}

#[test]
fn solve_option2_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tt.txt", TWO_TRIANGLES);
    let o = dks(&["solve", "--graph", &g, "--k", "3", "--step-rule", "option2", "--max-iters", "50", "--gap-tol", "1e-6"]);
    assert_eq!(code(&o), 0, "{o:?}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tt.txt", TWO_TRIANGLES);
    assert_eq!(code(&dks(&["solve", "--graph", &g, "--k", "0"])), 2);
    assert_eq!(code(&dks(&["solve", "--graph", &g, "--k", "7"])), 2);
    assert_eq!(code(&dks(&["solve", "--graph", &g, "--k", "2", "--solver", "nope"])), 2);
    assert_eq!(code(&dks(&["solve", "--graph", &g, "--k", "2", "--lambda", "-1"])), 2);
    assert_eq!(code(&dks(&["solve", "--graph", &g, "--k", "2", "--lr", "0"])), 2);
    assert_eq!(code(&dks(&["solve", "--k", "2"])), 2);
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&dks(&["solve", "--graph", missing.to_str().unwrap(), "--k", "2"])), 3);
    let bad = write(dir.path(), "bad.txt", "1 2\n3 x\n");
    let o = dks(&["solve", "--graph", &bad, "--k", "2"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    // rank1 needs k >= 1, greedy k >= 2
    assert_eq!(code(&dks(&["solve", "--graph", &g, "--k", "1", "--solver", "greedy"])), 2);
}

#[test]
fn diagnostics_are_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tt.txt", TWO_TRIANGLES);
    for args in [
        vec!["solve", "--graph", g.as_str(), "--k", "0"],
        vec!["solve", "--graph", g.as_str(), "--k", "2", "--solver", "nope"],
        vec!["bogus"],
    ] {
        let o = dks(&args);
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err:?}");
    }
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tt.txt", TWO_TRIANGLES);
    let out = dir.path().join("r.csv");
    let o = dks(&["sweep", "--graph", &g, "--k-list", "2,3,4", "--solvers", "fw,greedy,rank1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{o:?}");
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 9);
    assert!(text.lines().next().unwrap().contains("upper_bound"));
    for line in text.lines().skip(1) {
        assert!(line.starts_with("tt,6,6,"), "{line}");
    }
}

#[test]
fn sweep_json_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tt.txt", TWO_TRIANGLES);
    let out = dir.path().join("r.json");
    let args = ["sweep", "--graph", &g, "--k-list", "2,3", "--solvers", "fw,param", "--out", out.to_str().unwrap(), "--format", "json"];
    assert_eq!(code(&dks_env(&args, "DKS_JOBS", "2")), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert_eq!(code(&dks_env(&args, "DKS_JOBS", "many")), 2);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--jobs", "1"]);
    assert_eq!(code(&dks_env(&with_flag, "DKS_JOBS", "many")), 0);
}

#[test]
fn sweep_argument_errors() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tt.txt", TWO_TRIANGLES);
    let out = dir.path().join("r.csv");
    let out = out.to_str().unwrap();
    let o = dks(&["sweep", "--graph", &g, "--k-list", "2,9", "--solvers", "fw", "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("k=9"));
    assert_eq!(code(&dks(&["sweep", "--graph", &g, "--k-list", "2", "--solvers", "fw,magic", "--out", out])), 2);
    assert_eq!(code(&dks(&["sweep", "--graph", &g, "--k-list", "3,2", "--solvers", "fw", "--out", out])), 2);
    let unwritable = dir.path().join("no/such/dir/r.csv");
    assert_eq!(code(&dks(&["sweep", "--graph", &g, "--k-list", "2", "--solvers", "fw", "--out", unwritable.to_str().unwrap()])), 3);
}

#[test]
fn score_external_selection() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tt.txt", TWO_TRIANGLES);
    let sel = write(dir.path(), "sel.txt", "40\n50\n60\n");
    let o = dks(&["score", "--graph", &g, "--selection", &sel, "--output", "json"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["normalized_density"], 1.0);
    assert_eq!(v[0]["objective"], 9.0);
    let bad = write(dir.path(), "bad.txt", "40\n99\n");
    assert_eq!(code(&dks(&["score", "--graph", &g, "--selection", &bad])), 3);
}

#[test]
fn verify_suites() {
    let o = dks(&["verify", "--suite", "motzkin", "--max-n", "6"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS motzkin"));

    let o = dks(&["verify", "--suite", "rounding", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let o = dks(&["verify", "--suite", "tightness", "--max-n", "6"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("PASS tightness"));
    assert!(text.contains("PASS gap") && text.contains("smallest relaxed − integral gap"));

    let o = dks(&["verify", "--suite", "landscape"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    assert_eq!(code(&dks(&["verify", "--max-n", "40"])), 2);
}
