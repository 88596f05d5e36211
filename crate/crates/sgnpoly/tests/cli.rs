use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sgnpoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgnpoly")).args(args).env_remove("SGNPOLY_THREADS").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a single JSON document")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn triangle_reports() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write(dir.path(), "k3.txt", "# triangle\n0 1\n1 2\n2 0\n");
    let v = json(&sgnpoly(&["test", "--edges", &edges, "--alpha", "0.05", "--tests", "sgnt,sgnq"]));
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    let t = &reports[0];
    assert_eq!(t["test"], "SgnT");
    assert!((t["statistic"].as_f64().unwrap() - 2.0 / 9.0).abs() < 1e-12);
    assert_eq!(t["reject"], false);
    let keys: Vec<&str> = t.as_object().unwrap().keys().map(String::as_str).collect();
    for key in ["test", "statistic", "nuisance", "z", "p_value", "alpha", "reject"] {
        assert!(keys.contains(&key), "missing {key}");
    }
    assert_eq!(reports[1]["test"], "SgnQ");
}

#[test]
fn one_based_edges_and_cycle_test() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write(dir.path(), "k4.txt", "1 2\n1 3\n1 4\n2 3\n2 4\n4 5\n3 3\n");
    let out = sgnpoly(&["test", "--edges", &edges, "--index", "1", "--tests", "cycle3"]);
    let v = json(&out);
    assert_eq!(v[0]["test"], "SignedCycle3");
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 self-loops"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = write(dir.path(), "k3.txt", "0 1\n1 2\n2 0\n");
    let bad = write(dir.path(), "bad.txt", "0 1\n1 two\n");
    let isolated = write(dir.path(), "empty.txt", "# nothing\n");

    assert_eq!(sgnpoly(&[]).status.code(), Some(2));
    assert_eq!(sgnpoly(&["test"]).status.code(), Some(2));
    assert_eq!(sgnpoly(&["test", "--edges", &k3, "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(sgnpoly(&["test", "--edges", &k3, "--tests", "ez"]).status.code(), Some(2));
    assert_eq!(sgnpoly(&["simulate", "--preset", "exp7"]).status.code(), Some(2));

    let out = sgnpoly(&["test", "--edges", &bad]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert!(out.stdout.is_empty());
    assert_eq!(sgnpoly(&["test", "--edges", &isolated, "--n", "4"]).status.code(), Some(3));
    assert_eq!(sgnpoly(&["test", "--edges", "/nonexistent/edges.txt"]).status.code(), Some(3));

    let help = sgnpoly(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("oracle-check"));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let plot = dir.path().join("plot.csv");
    let args = |out: &Path, threads: &str| {
        let out = out.to_str().unwrap().to_string();
        let threads = threads.to_string();
        move || {
            sgnpoly(&[
                "simulate",
                "--preset",
                "fig2-null",
                "--n",
                "500",
                "--seed",
                "7",
                "--reps",
                "30",
                "--threads",
                &threads,
                "--out",
                &out,
            ])
        }
    };
    assert!(args(&a, "1")().status.success());
    assert!(args(&b, "3")().status.success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("sweep_beta,sweep_b,test,type1,type2,sum,reps,skipped\n"));
    assert_eq!(text.lines().count(), 4);

    let out = sgnpoly(&[
        "simulate",
        "--preset",
        "exp1a",
        "--n",
        "200",
        "--reps",
        "10",
        "--points",
        "2",
        "--tests",
        "sgnq,sgnt",
        "--plot-data",
        plot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].contains(",sgnq,") && rows[1].contains(",sgnt,"));
    let sorted = fs::read_to_string(&plot).unwrap();
    let tests: Vec<&str> = sorted.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(tests, ["sgnq", "sgnq", "sgnt", "sgnt"]);
}

#[test]
fn oracle_check_passes() {
    let out = sgnpoly(&["oracle-check", "--trials", "100"]);
    let v = json(&out);
    assert_eq!(v["trials"], 100);
    assert_eq!(v["mismatches"].as_array().unwrap().len(), 0);
}

#[test]
fn scale_modes() {
    let dir = tempfile::tempdir().unwrap();
    let sink = write(dir.path(), "s.json", r#"{"mode": "sinkhorn", "A": [[1, 0], [0, 1]], "h": [0.5, 0.5]}"#);
    let v = json(&sgnpoly(&["scale", "--config", &sink]));
    for d in v["d"].as_array().unwrap() {
        assert!((d.as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }
    assert_eq!(v["converged"], true);

    let dp = write(dir.path(), "d.json", r#"{"mode": "dirichlet-p", "alpha": [1, 2, 1], "q": 0.9}"#);
    let v = json(&sgnpoly(&["scale", "--config", &dp]));
    assert_eq!(v["P"].as_array().unwrap().len(), 3);
    assert_eq!(v["P"][1][1], 1.0);

    let lf = write(
        dir.path(),
        "lf.json",
        r#"{"mode": "least-favorable", "construction": "dcbm", "n": 40, "P": [[1, 0.5], [0.5, 1]],
            "theta_law": {"kind": "uniform", "low": 2, "high": 3, "target_norm": 2},
            "mem_law": {"point_masses": [0.5, 0.5]}, "seed": 3}"#,
    );
    let v = json(&sgnpoly(&["scale", "--config", &lf]));
    assert_eq!(v["construction"], "dcbm");
    assert!(v["null_params"].is_object() && v["alt_params"].is_object());

    let chi = write(
        dir.path(),
        "chi.json",
        r#"{"mode": "chi-square", "construction": "matched-theta", "reps": 50, "n": 60, "P": [[1, 0.8], [0.8, 1]],
            "theta_law": {"kind": "uniform", "low": 2, "high": 3, "target_norm": 2},
            "mem_law": {"point_masses": [0.5, 0.5]}, "seed": 1}"#,
    );
    let v = json(&sgnpoly(&["scale", "--config", &chi]));
    assert_eq!(v["reps"], 50);
    assert!(v["estimate"].as_f64().unwrap().is_finite());

    let broken = write(dir.path(), "b.json", r#"{"mode": "sinkhorn", "A": [[1, 0]], "h": [1]}"#);
    assert_eq!(sgnpoly(&["scale", "--config", &broken]).status.code(), Some(3));
    let unknown = write(dir.path(), "u.json", r#"{"mode": "magic"}"#);
    assert_eq!(sgnpoly(&["scale", "--config", &unknown]).status.code(), Some(3));
}

#[test]
fn phase_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.json",
        r#"{"n": 400, "K": 2, "P": [[1, 0.2], [0.2, 1]],
            "theta_law": {"kind": "uniform", "low": 2, "high": 3, "target_norm": 12},
            "mem_law": {"point_masses": [0.5, 0.5]}, "seed": 5}"#,
    );
    let v = json(&sgnpoly(&["phase", "--config", &cfg]));
    assert_eq!(v["region"], "possibility");
    assert!(v["x"].as_f64().unwrap() > 0.0 && v["y"].as_f64().unwrap() < 1.0);

    let strict = write(
        dir.path(),
        "q.json",
        r#"{"n": 400, "P": [[1, 0.2], [0.2, 1]], "thresholds": {"lo": 100, "hi": 200},
            "theta_law": {"kind": "uniform", "low": 2, "high": 3, "target_norm": 12},
            "mem_law": {"point_masses": [0.5, 0.5]}, "seed": 5}"#,
    );
    assert_eq!(json(&sgnpoly(&["phase", "--config", &strict]))["region"], "impossibility");
}
