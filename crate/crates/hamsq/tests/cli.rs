//! End-to-end checks of the installed binary: flag parsing, exit codes,
//! stream layout, and determinism of emitted CSV.

use hamsq::graph::{Graph, GraphBuilder};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hamsq");

fn run<I, S>(args: I, envs: &[(&str, &str)]) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_graph(path: &Path, g: &Graph) {
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).unwrap();
    fs::write(path, buf).unwrap();
}

fn cycle_graph(n: usize) -> Graph {
    let mut b = GraphBuilder::new(n);
    for i in 0..n {
        b.add_edge(i as u32, ((i + 1) % n) as u32);
    }
    b.freeze()
}

#[test]
fn run_emits_deterministic_csv_across_invocations_and_workers() {
    let args = |workers: &str| {
        vec![
            "run".to_string(),
            "--host".into(),
            "complete:n=12".into(),
            "--K".into(),
            "3.5".into(),
            "--trials".into(),
            "3".into(),
            "--workers".into(),
            workers.to_string(),
        ]
    };
    let a = run(args("1"), &[]);
    let b = run(args("1"), &[]);
    let c = run(args("0"), &[]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a), stdout(&c));
    assert!(stdout(&a).starts_with("# hamsq-csv-v1"));
    assert!(stderr(&a).contains("rate=1.000"), "{}", stderr(&a));
}

#[test]
fn seed_env_var_mirrors_the_flag() {
    let base = [
        "run",
        "--host",
        "complete:n=12",
        "--K",
        "3.5",
        "--trials",
        "2",
        "--workers",
        "1",
    ];
    let flag = run(base.iter().chain(&["--seed", "99"]), &[]);
    let env = run(base.iter(), &[("HAMSQ_SEED", "99")]);
    let default = run(base.iter(), &[]);
    assert_eq!(stdout(&flag), stdout(&env));
    assert_ne!(stdout(&flag), stdout(&default));
}

#[test]
fn run_writes_csv_file_and_prints_summary_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results.csv");
    let o = run(
        [
            "run",
            "--host",
            "complete:n=12",
            "--K",
            "3.5",
            "--trials",
            "2",
            "--workers",
            "1",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("n=12 K=3.5 trials=2"));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# hamsq-csv-v1"));
    assert_eq!(csv.lines().count(), 2 + 2);
}

#[test]
fn run_rejects_invalid_cell_with_exit_2() {
    let o = run(
        [
            "run",
            "--host",
            "complete:n=12",
            "--K",
            "50",
            "--trials",
            "1",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("n=12") && err.contains("K=50"), "{err}");
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let k6 = dir.path().join("k6.txt");
    let c6 = dir.path().join("c6.txt");
    let wit = dir.path().join("k6.wit");
    write_graph(&k6, &Graph::complete(6));
    write_graph(&c6, &cycle_graph(6));

    let o = run(
        [
            "oracle",
            "--graph",
            k6.to_str().unwrap(),
            "--out",
            wit.to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), fs::read_to_string(&wit).unwrap().trim());

    let valid = run(
        ["verify", "--graph", k6.to_str().unwrap(), "--witness", wit.to_str().unwrap()],
        &[],
    );
    assert_eq!(valid.status.code(), Some(0));
    assert_eq!(stdout(&valid).trim(), "valid");

    let invalid = run(
        ["verify", "--graph", c6.to_str().unwrap(), "--witness", wit.to_str().unwrap()],
        &[],
    );
    assert_eq!(invalid.status.code(), Some(1));
    assert_eq!(stdout(&invalid).trim(), "invalid");

    let garbled = dir.path().join("bad.wit");
    fs::write(&garbled, "zero one two\n").unwrap();
    let malformed = run(
        ["verify", "--graph", k6.to_str().unwrap(), "--witness", garbled.to_str().unwrap()],
        &[],
    );
    assert_eq!(malformed.status.code(), Some(2));

    let missing = run(
        ["verify", "--graph", "/nonexistent.txt", "--witness", wit.to_str().unwrap()],
        &[],
    );
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn oracle_reports_none_when_no_witness_exists() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = dir.path().join("c6.txt");
    write_graph(&c6, &cycle_graph(6));
    let o = run(["oracle", "--graph", c6.to_str().unwrap()], &[]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "none");
}

#[test]
fn oracle_rejects_oversized_graph_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("k20.txt");
    write_graph(&big, &Graph::complete(20));
    let o = run(["oracle", "--graph", big.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kst_check_reports_and_exits_clean() {
    let o = run(
        ["kst-check", "--s", "3", "--t", "9", "--exhaustive"],
        &[],
    );
    assert!(o.status.success());
    let line = stdout(&o);
    assert!(line.contains("max_power_cross=12"), "{line}");
    assert!(line.contains("bound=12"), "{line}");
    assert!(line.contains("violations=0"), "{line}");
}

#[test]
fn trace_dir_receives_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("traces");
    let o = run(
        [
            "run",
            "--host",
            "complete:n=13",
            "--K",
            "3.5",
            "--trials",
            "2",
            "--workers",
            "1",
            "--trace",
            traces.to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let count = fs::read_dir(&traces).unwrap().count();
    assert_eq!(count, 2);
}
