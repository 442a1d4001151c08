use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(name)
}

fn forkwait(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forkwait"))
        .args(args)
        .env_remove("FORKWAIT_FUEL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(name: &str) -> String {
    corpus(name).display().to_string()
}

#[test]
fn eq_on_equal_and_unequal_terms() {
    let o = forkwait(&["eq", &path("stopped_sibling.term"), &path("stopped_sibling_nf.term")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("equal\n"));

    let o = forkwait(&[
        "eq",
        &path("parallel_left.term"),
        &path("parallel_right.term"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("not equal"));
}

#[test]
fn exhaustive_run_of_the_two_thread_example() {
    let o = forkwait(&[
        "run",
        &path("child_prints_first.prog"),
        "--policy",
        "exhaustive",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("schedules: 2\n"), "{out}");
    assert!(out.contains("determinate: yes\n"));
    assert!(
        out.contains("order: \n") || out.ends_with("order: "),
        "{out}"
    );
}

#[test]
fn normalize_stop_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("stop.term");
    std::fs::write(&f, "stop\n").unwrap();
    let o = forkwait(&["normalize", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "wait(0, stop)\n");
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = [
        "run",
        &path("nshape.prog"),
        "--policy",
        "random",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let a = forkwait(&args);
    let b = forkwait(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["observation"]["vertices"].as_array().unwrap().len(), 4);

    let o = forkwait(&["run", &path("nshape.prog"), "--policy", "random"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fuel_from_flag_and_environment() {
    let o = forkwait(&["run", &path("nshape.prog"), "--fuel", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fuel"));
    let o = Command::new(env!("CARGO_BIN_EXE_forkwait"))
        .args(["explore", &path("nshape.prog")])
        .env("FORKWAIT_FUEL", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn adequacy_report() {
    let o = forkwait(&["adequacy", &path("series.prog")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "ok");
    assert_eq!(v["policy"], "lowest");
    assert!(v["program"].as_str().unwrap().ends_with("series.prog"));
    assert!(v["observed"]["order"].is_array() && v["denoted"]["order"].is_array());

    let o = forkwait(&["adequacy", &path("nshape.prog"), "--policy", "exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn denote_prints_a_term_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.prog");
    std::fs::write(&f, "print[s]()").unwrap();
    let o = forkwait(&["denote", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "vars x:0;\nfork(a. wait(a, x), act[s])\n");
}

#[test]
fn check_and_export() {
    let o = forkwait(&["check", &path("child_waits_first.prog")]);
    assert_eq!(stdout(&o), "ok: program of type 0\n");
    let o = forkwait(&["check", &path("open_hole.term")]);
    assert_eq!(stdout(&o), "ok: term with variables x:1 over a1\n");

    let o = forkwait(&["export", &path("open_hole.term"), "--format", "json"]);
    let stored = std::fs::read_to_string(corpus("open_hole.json")).unwrap();
    assert_eq!(stdout(&o), stored);
    let o = forkwait(&["export", &path("open_hole.json"), "--format", "dot"]);
    assert!(stdout(&o).starts_with("digraph"));
}

#[test]
fn errors_have_locations_and_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.prog");
    std::fs::write(&f, "let x = fork() in\nwait(x)").unwrap();
    let o = forkwait(&["check", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));

    std::fs::write(&f, "let x =\n in stop()").unwrap();
    let o = forkwait(&["check", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("bad.prog:2:2:"),
        "{:?}",
        o
    );

    let o = forkwait(&["check", "missing.prog"]);
    assert_eq!(o.status.code(), Some(2));
    let o = forkwait(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
