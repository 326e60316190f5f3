use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dcorgraph::pipeline::{format_matrix_csv, read_csv};
use dcorgraph::random_graphs::{
    derive_seed, recovery_experiment, rng_for, ErdosRenyiSpec, LinearDataSpec,
};
use dcorgraph::RidgeConfig;
use ndarray::Array2;
use rand::Rng;
use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcorgraph"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn dcorgraph")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn edge_lines(path: &Path) -> usize {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count()
}

fn write_random_csv(path: &Path, rows: usize, cols: usize, seed: u64, low: f64, high: f64) {
    let mut rng = rng_for(seed, 0);
    let m = Array2::from_shape_simple_fn((rows, cols), || rng.random_range(low..high));
    let header: Vec<String> = (0..cols).map(|j| format!("S{j}")).collect();
    fs::write(path, format_matrix_csv(&m, Some(&header))).unwrap();
}

#[test]
fn estimate_with_edge_count_on_returns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_random_csv(&d.join("prices.csv"), 300, 20, 1, 10.0, 11.0);
    ok(
        d,
        &[
            "transform",
            "--input",
            "prices.csv",
            "--header",
            "--output-dir",
            "t",
        ],
    );
    ok(
        d,
        &[
            "estimate",
            "--input",
            "t/returns.csv",
            "--header",
            "--edges",
            "27",
            "--output-dir",
            "e",
        ],
    );
    assert_eq!(edge_lines(&d.join("e/graph.edges")), 27);
    let s = json(&d.join("e/summary.json"));
    assert_eq!(s["result"]["edge_count"], 27);
    assert_eq!(s["result"]["p"], 20);
    assert_eq!(s["result"]["n"], 299);
    assert!(s["version"].is_string());
    let dot = fs::read_to_string(d.join("e/graph.dot")).unwrap();
    assert!(dot.starts_with("graph G {") && dot.contains("label=\"S0\""));
    let dcor = read_csv(d.join("e/dcor.csv"), true, b',').unwrap();
    assert_eq!(dcor.values.dim(), (20, 20));
}

#[test]
fn estimate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "--nodes",
            "12",
            "--avg-degree",
            "2",
            "--samples",
            "200",
            "--seed",
            "3",
            "--output-dir",
            "s",
        ],
    );
    for out in ["a", "b"] {
        ok(
            d,
            &[
                "estimate",
                "--input",
                "s/data_seed3.csv",
                "--header",
                "--tp",
                "0.1",
                "--output-dir",
                out,
            ],
        );
    }
    for f in [
        "dcor.csv",
        "partial.csv",
        "graph.edges",
        "graph.dot",
        "summary.json",
    ] {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn constant_column_warns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut rng = rng_for(4, 0);
    let m = Array2::from_shape_fn(
        (60, 4),
        |(_, c)| if c == 2 { 5.0 } else { rng.random::<f64>() },
    );
    fs::write(d.join("x.csv"), format_matrix_csv(&m, None)).unwrap();
    ok(
        d,
        &[
            "estimate",
            "--input",
            "x.csv",
            "--edges",
            "2",
            "--output-dir",
            "o",
        ],
    );
    let s = json(&d.join("o/summary.json"));
    let w = s["warnings"].as_array().unwrap();
    assert_eq!(w.len(), 1);
    assert!(w[0].as_str().unwrap().contains("column 2 is constant"));
    assert!(s["result"]["ridge_applied"].is_number());
}

#[test]
fn duplicate_columns_use_ridge_or_fail_numerically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut rng = rng_for(5, 0);
    let base: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
    let m = Array2::from_shape_fn((50, 3), |(r, c)| {
        if c == 2 {
            base[r] * 0.5 + rng.random::<f64>()
        } else {
            base[r]
        }
    });
    fs::write(d.join("dup.csv"), format_matrix_csv(&m, None)).unwrap();
    ok(
        d,
        &[
            "estimate",
            "--input",
            "dup.csv",
            "--tp",
            "0.1",
            "--output-dir",
            "o",
        ],
    );
    let s = json(&d.join("o/summary.json"));
    assert!(s["result"]["ridge_applied"].as_f64().unwrap() > 0.0);
    assert!(s["warnings"][0].as_str().unwrap().contains("ridge"));

    let out = run(
        d,
        &[
            "estimate",
            "--input",
            "dup.csv",
            "--tp",
            "0.1",
            "--ridge-step",
            "1e-30",
            "--ridge-max",
            "1e-20",
            "--output-dir",
            "o2",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error[numerical]:") && err.trim_end().lines().count() == 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.csv"), "1,2\n3,4,5\n").unwrap();
    let out = run(
        d,
        &[
            "estimate",
            "--input",
            "bad.csv",
            "--tp",
            "0.1",
            "--output-dir",
            "o",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
    // no threshold mode
    let out = run(d, &["estimate", "--input", "bad.csv", "--output-dir", "o"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(
        d,
        &[
            "simulate",
            "--nodes",
            "5",
            "--avg-degree",
            "9",
            "--samples",
            "10",
            "--seed",
            "1",
            "--output-dir",
            "o",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let out = run(
        d,
        &[
            "simulate",
            "--nodes",
            "5",
            "--avg-degree",
            "1",
            "--samples",
            "10",
            "--output-dir",
            "o",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_reproducible_and_calibrated() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a", "b"] {
        ok(
            d,
            &[
                "simulate",
                "--nodes",
                "50",
                "--avg-degree",
                "3",
                "--samples",
                "400",
                "--seed",
                "17",
                "--output-dir",
                out,
            ],
        );
    }
    for f in ["truth_seed17.edges", "data_seed17.csv", "simulate.json"] {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("b").join(f)).unwrap()
        );
    }
    let data = read_csv(d.join("a/data_seed17.csv"), true, b',').unwrap();
    assert_eq!(data.values.dim(), (400, 50));

    let mut total = 0;
    for seed in 0..10u64 {
        let s = seed.to_string();
        ok(
            d,
            &[
                "simulate",
                "--nodes",
                "200",
                "--avg-degree",
                "4",
                "--samples",
                "3",
                "--seed",
                &s,
                "--output-dir",
                "big",
            ],
        );
        total += edge_lines(&d.join(format!("big/truth_seed{seed}.edges")));
    }
    let mean = total as f64 / 10.0;
    assert!((mean - 400.0).abs() < 40.0, "mean {mean}");
}

#[test]
fn eval_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.edges"), "# nodes: 8\n0 1\n2 3\n4 5\n").unwrap();
    fs::write(d.join("b.edges"), "# nodes: 8\n0 2\n1 3\n5 6\n6 7\n").unwrap();
    fs::write(d.join("c.edges"), "# nodes: 9\n0 1\n").unwrap();
    ok(
        d,
        &[
            "eval",
            "--truth",
            "a.edges",
            "--estimated",
            "a.edges",
            "--output-dir",
            "self",
        ],
    );
    assert_eq!(json(&d.join("self/eval.json"))["result"]["hamming"], 0);
    ok(
        d,
        &[
            "eval",
            "--truth",
            "a.edges",
            "--estimated",
            "b.edges",
            "--output-dir",
            "ab",
        ],
    );
    let r = json(&d.join("ab/eval.json"));
    assert_eq!(r["result"]["hamming"], 7);
    assert_eq!(r["result"]["disagreements"].as_array().unwrap().len(), 7);
    let out = run(
        d,
        &[
            "eval",
            "--truth",
            "a.edges",
            "--estimated",
            "c.edges",
            "--output-dir",
            "ac",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_pipeline_matches_library_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (p, c, n, seed) = (15usize, 2.0, 300usize, 21u64);
    ok(
        d,
        &[
            "simulate",
            "--nodes",
            "15",
            "--avg-degree",
            "2",
            "--samples",
            "300",
            "--seed",
            "21",
            "--output-dir",
            "s",
        ],
    );
    let k = json(&d.join("s/simulate.json"))["result"]["edges"]
        .as_u64()
        .unwrap()
        .to_string();
    ok(
        d,
        &[
            "estimate",
            "--input",
            "s/data_seed21.csv",
            "--header",
            "--edges",
            &k,
            "--output-dir",
            "e",
        ],
    );
    ok(
        d,
        &[
            "eval",
            "--truth",
            "s/truth_seed21.edges",
            "--estimated",
            "e/graph.edges",
            "--output-dir",
            "v",
        ],
    );
    let cli_hamming = json(&d.join("v/eval.json"))["result"]["hamming"]
        .as_u64()
        .unwrap();

    let er = ErdosRenyiSpec::new(p, c, seed).unwrap();
    let data = LinearDataSpec::new(n, derive_seed(seed, &[1]));
    let lib = recovery_experiment(&er, &data, RidgeConfig::default()).unwrap();
    assert_eq!(cli_hamming, lib.hamming as u64);
}

#[test]
fn dcor_matrix_threshold_zero_is_complete() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_random_csv(&d.join("x.csv"), 80, 6, 8, -1.0, 1.0);
    ok(
        d,
        &[
            "estimate",
            "--input",
            "x.csv",
            "--header",
            "--tp",
            "0",
            "--threshold-matrix",
            "dcor",
            "--output-dir",
            "o",
        ],
    );
    assert_eq!(edge_lines(&d.join("o/graph.edges")), 15);
}

#[test]
fn path_mode_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_random_csv(&d.join("x.csv"), 80, 6, 9, -1.0, 1.0);
    ok(
        d,
        &[
            "estimate",
            "--input",
            "x.csv",
            "--header",
            "--thresholds",
            "auto",
            "--output-dir",
            "auto",
        ],
    );
    let table = fs::read_to_string(d.join("auto/path.csv")).unwrap();
    assert_eq!(table.lines().count(), 41);
    assert!(d.join("auto/path_039.edges").exists());
    ok(
        d,
        &[
            "estimate",
            "--input",
            "x.csv",
            "--header",
            "--thresholds",
            "0.3,0.1,0",
            "--output-dir",
            "list",
        ],
    );
    let s = json(&d.join("list/summary.json"));
    let counts: Vec<u64> = s["result"]["path"]["edge_counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(counts[2], 15);
    let out = run(
        d,
        &[
            "estimate",
            "--input",
            "x.csv",
            "--header",
            "--thresholds",
            "0.1,0.3",
            "--output-dir",
            "bad",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_det_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a", "b"] {
        ok(
            d,
            &[
                "bench-det",
                "--dims",
                "2-100",
                "--samples",
                "50",
                "--reps",
                "3",
                "--seed",
                "7",
                "--output-dir",
                out,
            ],
        );
    }
    let a = fs::read_to_string(d.join("a/det.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(d.join("b/det.csv")).unwrap());
    assert_eq!(a.lines().count(), 100);
    for line in a.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let p: usize = f[1].parse().unwrap();
        assert_eq!(f[6], "0", "dcor singular at p = {p}");
        if p > 50 {
            assert_eq!(f[3], "-inf");
            assert_eq!(f[5], "3");
        }
    }
    ok(
        d,
        &[
            "bench-det",
            "--dims",
            "2",
            "--samples",
            "30",
            "--reps",
            "1",
            "--seed",
            "7",
            "--output-dir",
            "one",
        ],
    );
    assert_eq!(
        fs::read_to_string(d.join("one/det.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
    ok(
        d,
        &[
            "bench-det",
            "--dims",
            "2,3",
            "--samples",
            "30",
            "--reps",
            "2",
            "--seed",
            "7",
            "--distribution",
            "all",
            "--output-dir",
            "all",
        ],
    );
    assert_eq!(
        fs::read_to_string(d.join("all/det.csv"))
            .unwrap()
            .lines()
            .count(),
        7
    );
}

#[test]
fn transform_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("flat.csv"), "a,b\n5,1\n5,2\n5,4\n").unwrap();
    let out = run(
        d,
        &[
            "transform",
            "--input",
            "flat.csv",
            "--header",
            "--output-dir",
            "o",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[data]:"));

    fs::write(d.join("neg.csv"), "1,2\n-1,3\n").unwrap();
    let out = run(d, &["transform", "--input", "neg.csv", "--output-dir", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2, column 1"));

    // both columns have log returns proportional to (1, 2, 1)
    fs::write(d.join("geo.csv"), "1,2\n2,1\n8,0.25\n16,0.125\n").unwrap();
    ok(d, &["transform", "--input", "geo.csv", "--output-dir", "g"]);
    let t = read_csv(d.join("g/returns.csv"), true, b',').unwrap();
    assert_eq!(t.values.dim(), (3, 2));
    let h = 1.0 / 3.0_f64.sqrt();
    for (r, w) in [-1.0, 2.0, -1.0].iter().enumerate() {
        assert!((t.values[[r, 0]] - w * h).abs() < 1e-12);
        assert!((t.values[[r, 1]] + w * h).abs() < 1e-12);
    }

    write_random_csv(&d.join("wide.csv"), 1258, 452, 3, 5.0, 50.0);
    ok(
        d,
        &[
            "transform",
            "--input",
            "wide.csv",
            "--header",
            "--output-dir",
            "w",
        ],
    );
    let t = read_csv(d.join("w/returns.csv"), true, b',').unwrap();
    assert_eq!(t.values.dim(), (1257, 452));

    ok(
        d,
        &[
            "transform",
            "--input",
            "wide.csv",
            "--header",
            "--select",
            "0..20",
            "--output-dir",
            "w20",
        ],
    );
    let t = read_csv(d.join("w20/returns.csv"), true, b',').unwrap();
    assert_eq!(t.values.dim(), (1257, 20));
}
