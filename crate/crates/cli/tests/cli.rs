use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn resgraph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resgraph"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = resgraph(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    resgraph(dir, args).status.code().expect("exit code")
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).expect("valid json")
}

fn edge_lines(text: &str) -> usize {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .count()
}

#[test]
fn grid_has_expected_edges() {
    let dir = TempDir::new().unwrap();
    let text = ok(dir.path(), &["generate", "grid", "8", "8"]);
    assert!(text.starts_with("n 64\n"));
    assert_eq!(edge_lines(&text), 112);
}

#[test]
fn triangle_resistances() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("tri.txt"), "n 3\n0 1 1\n0 2 1\n1 2 1\n").unwrap();
    let text = ok(dir.path(), &["measure", "--graph", "tri.txt", "--f", "1"]);
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 3);
    for r in values {
        assert!((r - 2.0 / 3.0).abs() < 1e-12, "{r}");
    }
}

#[test]
fn exact_recovers_full_grid() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["generate", "grid", "8", "8", "--out", "g.txt"]);
    ok(
        d,
        &["measure", "--graph", "g.txt", "--f", "1", "--out", "m.txt"],
    );
    let metrics = json(&ok(
        d,
        &[
            "learn",
            "--measurements",
            "m.txt",
            "--solver",
            "exact",
            "--truth",
            "g.txt",
            "--out-graph",
            "h.txt",
        ],
    ));
    assert_eq!(metrics["edges_learned"], 100.0);
    assert!(metrics["generalization_error"].as_f64().unwrap() < 1e-12);
    assert_eq!(
        edge_lines(&fs::read_to_string(d.join("h.txt")).unwrap()),
        112
    );
}

#[test]
fn learn_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["generate", "grid", "4", "4", "--out", "g.txt"]);
    ok(
        d,
        &[
            "measure", "--graph", "g.txt", "--f", "0.5", "--sigma2", "0.1", "--seed", "4", "--out",
            "m.txt",
        ],
    );
    let run = |name: &str| {
        ok(
            d,
            &[
                "learn",
                "--measurements",
                "m.txt",
                "--truth",
                "g.txt",
                "--max-iters",
                "50",
                "--seed",
                "2",
                "--out-metrics",
                name,
            ],
        );
        let mut v = json(&fs::read_to_string(d.join(name)).unwrap());
        assert!(v["runtime_seconds"].as_f64().unwrap() >= 0.0);
        v["runtime_seconds"] = Value::Null;
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
    ok(
        d,
        &[
            "measure", "--graph", "g.txt", "--f", "0.5", "--sigma2", "0.1", "--seed", "4", "--out",
            "m2.txt",
        ],
    );
    assert_eq!(
        fs::read(d.join("m.txt")).unwrap(),
        fs::read(d.join("m2.txt")).unwrap()
    );
}

#[test]
fn exit_codes_classify_failures() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(d, &["generate", "hypercube", "3"]), 1);
    assert_eq!(code(d, &["learn"]), 1);
    ok(d, &["generate", "grid", "3", "3", "--out", "g.txt"]);
    assert_eq!(code(d, &["measure", "--graph", "g.txt", "--f", "0"]), 1);
    assert_eq!(code(d, &["measure", "--graph", "missing.txt"]), 1);

    // a 4-cycle is not a tree
    fs::write(d.join("cycle.txt"), "n 4\n0 1 1\n1 2 1\n2 3 1\n0 3 1\n").unwrap();
    ok(d, &["measure", "--graph", "cycle.txt", "--out", "c.txt"]);
    assert_eq!(
        code(d, &["learn", "--measurements", "c.txt", "--solver", "tree"]),
        2
    );

    ok(
        d,
        &[
            "measure", "--graph", "g.txt", "--f", "0.5", "--out", "half.txt",
        ],
    );
    assert_eq!(
        code(
            d,
            &["learn", "--measurements", "half.txt", "--solver", "exact"]
        ),
        2
    );
    assert_eq!(
        code(
            d,
            &["learn", "--measurements", "half.txt", "--solver", "cd"]
        ),
        0
    );
    assert_eq!(
        code(
            d,
            &[
                "learn",
                "--measurements",
                "half.txt",
                "--solver",
                "cd",
                "--block-size",
                "0"
            ]
        ),
        1
    );
}

#[test]
fn tree_solver_recovers_trees() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &["generate", "tree", "12", "--seed", "5", "--out", "t.txt"],
    );
    ok(
        d,
        &["measure", "--graph", "t.txt", "--f", "1", "--out", "m.txt"],
    );
    let metrics = json(&ok(
        d,
        &[
            "learn",
            "--measurements",
            "m.txt",
            "--solver",
            "tree",
            "--truth",
            "t.txt",
        ],
    ));
    assert_eq!(metrics["edges_learned"], 100.0);
}

#[test]
fn ppr_round_trip() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "generate", "knn", "20", "4", "--seed", "3", "--out", "g.txt",
        ],
    );
    ok(
        d,
        &[
            "measure", "--graph", "g.txt", "--alpha", "0.15", "--out", "p.txt",
        ],
    );
    assert_eq!(
        code(d, &["learn", "--measurements", "p.txt", "--solver", "ppr"]),
        1
    );
    let metrics = json(&ok(
        d,
        &[
            "learn",
            "--measurements",
            "p.txt",
            "--solver",
            "ppr",
            "--alpha",
            "0.15",
            "--truth",
            "g.txt",
        ],
    ));
    assert_eq!(metrics["edges_learned"], 100.0);
    assert!(metrics["generalization_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn config_file_yields_to_flags() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["generate", "grid", "3", "3", "--out", "g.txt"]);
    ok(
        d,
        &[
            "measure", "--graph", "g.txt", "--f", "0.5", "--out", "m.txt",
        ],
    );
    fs::write(
        d.join("run.cfg"),
        "solver = cd\nblock-size = 4\nmax-iters = 30\n",
    )
    .unwrap();
    let metrics = json(&ok(
        d,
        &[
            "learn",
            "--measurements",
            "m.txt",
            "--config",
            "run.cfg",
            "--block-size",
            "6",
        ],
    ));
    let settings = &metrics["settings"];
    assert_eq!(settings["solver"], "cd");
    assert_eq!(settings["block_size"], 6);
    assert_eq!(settings["max_iters"], 30);
}

#[test]
fn convex_writes_feasibility_report() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["generate", "grid", "3", "3", "--out", "g.txt"]);
    ok(
        d,
        &[
            "measure", "--graph", "g.txt", "--f", "0.5", "--out", "m.txt",
        ],
    );
    let metrics = json(&ok(
        d,
        &[
            "learn",
            "--measurements",
            "m.txt",
            "--solver",
            "convex",
            "--out-report",
            "r.csv",
        ],
    ));
    assert_eq!(metrics["feasible"], true);
    let report = fs::read_to_string(d.join("r.csv")).unwrap();
    assert!(report.starts_with("u,v,rbar,r,slack\n"));
    assert_eq!(report.lines().count(), 1 + 18);
}

#[test]
fn experiment_aggregates_repetitions() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let single = ok(
        d,
        &[
            "experiment",
            "--generate",
            "grid 3 3",
            "--f",
            "0.5,1",
            "--reps",
            "1",
            "--max-iters",
            "20",
        ],
    );
    let header: Vec<&str> = single.lines().next().unwrap().split(',').collect();
    let std_col = header.iter().position(|h| *h == "objective_std").unwrap();
    let rows: Vec<&str> = single.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), header.len());
        assert_eq!(cells[std_col], "");
    }

    ok(
        d,
        &[
            "experiment",
            "--generate",
            "grid 3 3",
            "--f",
            "0.5",
            "--sigma2",
            "0,0.1",
            "--reps",
            "3",
            "--max-iters",
            "20",
            "--out",
            "agg.csv",
            "--out-runs",
            "runs.csv",
        ],
    );
    let agg = fs::read_to_string(d.join("agg.csv")).unwrap();
    assert_eq!(agg.lines().count(), 1 + 2);
    assert!(agg
        .lines()
        .skip(1)
        .all(|r| !r.split(',').nth(std_col).unwrap().is_empty()));
    assert_eq!(
        fs::read_to_string(d.join("runs.csv"))
            .unwrap()
            .lines()
            .count(),
        1 + 6
    );
}
