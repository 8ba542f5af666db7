use std::path::Path;
use std::process::{Command, Output};

use bimatch::formats::read_edge_list;

fn bimatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bimatch"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_writes_every_half_edge_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for out in [&a, &b] {
        let args = [
            "gen",
            "--dist-plus",
            "dirac:3",
            "--dist-minus",
            "dirac:3",
            "--n",
            "100",
            "--seed",
            "7",
        ];
        stdout(&bimatch(&[&args[..], &["--out", path_str(out)]].concat()));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let graph = read_edge_list(text.as_bytes()).unwrap();
    let slots: u32 = graph.edges().iter().map(|e| e.2).sum();
    assert_eq!(slots, 300);
}

#[test]
fn impossible_conditioning_exits_with_domain_error() {
    let out = bimatch(&[
        "gen",
        "--dist-plus",
        "dirac:2",
        "--dist-minus",
        "dirac:3",
        "--n",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unwritable_output_exits_with_io_error() {
    let out = bimatch(&[
        "gen",
        "--dist",
        "dirac:1",
        "--n",
        "3",
        "--out",
        "/nonexistent/dir/g.txt",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn perfect_matching_file_is_fully_covered() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("diag.txt");
    let edges: String = (0..20).map(|i| format!("{i} {i} 1\n")).collect();
    std::fs::write(&file, format!("n=20\n{edges}")).unwrap();
    for algo in ["greedy", "minres"] {
        let csv = stdout(&bimatch(&[
            "match",
            "--graph",
            path_str(&file),
            "--algo",
            algo,
            "--reps",
            "5",
        ]));
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 5);
        for row in rows {
            assert_eq!(row.split(',').nth(2), Some("1"));
        }
    }
}

#[test]
fn malformed_graph_file_exits_with_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    std::fs::write(&file, "n=2\n0 7 1\n").unwrap();
    let out = bimatch(&["match", "--graph", path_str(&file), "--algo", "greedy"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_graph_file_exits_with_io_error() {
    let out = bimatch(&[
        "match",
        "--graph",
        "/nonexistent/graph.txt",
        "--algo",
        "greedy",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_and_json_hold_the_same_records() {
    let common = [
        "match",
        "--joint",
        "--dist",
        "poisson:2",
        "--n",
        "300",
        "--algo",
        "minres",
        "--reps",
        "6",
        "--seed",
        "3",
    ];
    let csv = stdout(&bimatch(&[&common[..], &["--format", "csv"]].concat()));
    let json = stdout(&bimatch(&[&common[..], &["--format", "json"]].concat()));
    let records: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), records.len());
    for (row, rec) in rows.iter().zip(&records) {
        assert_eq!(
            row[1].parse::<u64>().unwrap(),
            rec["seed"].as_u64().unwrap()
        );
        assert_eq!(
            row[2].parse::<f64>().unwrap(),
            rec["coverage"].as_f64().unwrap()
        );
        assert_eq!(
            row[3].parse::<u64>().unwrap(),
            rec["matched_count"].as_u64().unwrap()
        );
        assert_eq!(
            row[4].parse::<u64>().unwrap(),
            rec["isolated_count"].as_u64().unwrap()
        );
        assert!(rec.get("trajectory").is_none());
    }
}

#[test]
fn trajectory_flag_adds_snapshots() {
    let json = stdout(&bimatch(&[
        "match",
        "--dist",
        "dirac:3",
        "--n",
        "50",
        "--algo",
        "greedy",
        "--format",
        "json",
        "--trajectory",
    ]));
    let records: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    let snaps = records[0]["trajectory"].as_array().unwrap();
    assert_eq!(snaps.first().unwrap()["t"], 0);
    assert_eq!(snaps.last().unwrap()["t"], 50);
    assert!(snaps[0]["plus"]["masses"].is_array());
}

#[test]
fn match_output_is_independent_of_thread_count() {
    let common = [
        "match", "--dist", "dirac:3", "--n", "400", "--algo", "greedy", "--reps", "8", "--seed",
        "9",
    ];
    let one = stdout(&bimatch(&[&common[..], &["--threads", "1"]].concat()));
    let four = stdout(&bimatch(&[&common[..], &["--threads", "4"]].concat()));
    assert_eq!(one, four);
}

#[test]
fn zero_threads_is_rejected() {
    let out = bimatch(&[
        "match",
        "--dist",
        "dirac:3",
        "--n",
        "10",
        "--algo",
        "greedy",
        "--threads",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn joint_minres_matches_the_published_mean() {
    let csv = stdout(&bimatch(&[
        "match", "--joint", "--dist", "dirac:3", "--algo", "minres", "--n", "5000", "--reps", "50",
    ]));
    let cov: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    let stats = bimatch::Stats::of(&cov);
    // Published: 0.9385 with standard deviation 0.0025 over 50 runs.
    let se = ((stats.std_dev.powi(2) + 0.0025f64.powi(2)) / 50.0).sqrt();
    assert!((stats.mean - 0.9385).abs() <= 3.0 * se, "{stats:?}");
}

#[test]
fn ode_writes_summary_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("ode");
    let json = stdout(&bimatch(&[
        "ode",
        "--algo",
        "minres",
        "--dist",
        "dirac:3",
        "--out",
        path_str(&out_dir),
    ]));
    let summary: serde_json::Value = serde_json::from_str(&json).unwrap();
    for key in [
        "kernel",
        "initial_spec",
        "h",
        "epsilon",
        "coverage_estimate",
        "mass_identity_residual",
    ] {
        assert!(summary.get(key).is_some(), "{key}");
    }
    assert!((summary["coverage_estimate"].as_f64().unwrap() - 0.9378).abs() <= 1e-3);
    assert_eq!(
        std::fs::read_to_string(out_dir.join("summary.json")).unwrap(),
        json
    );
    let traj = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("s,plus_0,plus_1,plus_2,plus_3,minus_0,minus_1,minus_2,minus_3\n"));
}

#[test]
fn degenerate_ode_input_exits_with_domain_error() {
    let out = bimatch(&[
        "ode",
        "--algo",
        "greedy",
        "--dist",
        "dirac:0",
        "--h",
        "0.01",
        "--epsilon",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn missing_spec_file_exits_with_io_error() {
    let out = bimatch(&["experiment", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = bimatch(&["experiment", "--spec", "not_bundled.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bundled_triangular_spec_writes_four_groups() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&bimatch(&[
        "experiment",
        "--spec",
        "karp_triangular.json",
        "--out",
        path_str(dir.path()),
    ]));
    let csv = std::fs::read_to_string(dir.path().join("karp_triangular.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# spec={"));
    assert_eq!(
        lines.next(),
        Some("construction,criterion,replication,coverage")
    );
    let mut groups: Vec<(String, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    assert_eq!(groups.len(), 4 * 50);
    groups.dedup();
    assert_eq!(groups.len(), 4);
    let summary = std::fs::read_to_string(dir.path().join("karp_triangular.summary.json")).unwrap();
    assert!(summary.starts_with("# spec={"));
}
