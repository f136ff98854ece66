//! End-to-end tests of the binary: exit codes, determinism, and pipe
//! composability of the file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prony2d"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prony2d-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn gen_polygon_is_deterministic_and_rectilinear() {
    let out1 = tmp("det1.json");
    let out2 = tmp("det2.json");
    for out in [&out1, &out2] {
        let r = run(&[
            "gen-polygon",
            "--rectilinear",
            "--max-vertices",
            "8",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(
        read(&out1),
        read(&out2),
        "identical seeds must give identical bytes"
    );

    let parsed: serde_json::Value = serde_json::from_str(&read(&out1)).unwrap();
    let vertices = parsed["vertices"].as_array().unwrap();
    assert!(vertices.len() >= 4 && vertices.len() <= 8);
    assert_eq!(
        vertices.len() % 2,
        0,
        "axis-parallel polygons have even vertex count"
    );
    // every edge axis-parallel
    let pts: Vec<(f64, f64)> = vertices
        .iter()
        .map(|v| (v[0].as_f64().unwrap(), v[1].as_f64().unwrap()))
        .collect();
    for i in 0..pts.len() {
        let a = pts[i];
        let b = pts[(i + 1) % pts.len()];
        assert!(
            (a.0 - b.0).abs() < 1e-12 || (a.1 - b.1).abs() < 1e-12,
            "edge {i} is not axis-parallel"
        );
    }
}

#[test]
fn sample_then_recover_round_trips() {
    let poly = tmp("rt-poly.json");
    let samples = tmp("rt-samples.json");
    let recovered = tmp("rt-rec.json");
    let report = tmp("rt-report.json");
    assert!(run(&[
        "gen-polygon",
        "--rectilinear",
        "--max-vertices",
        "10",
        "--seed",
        "33",
        "--out",
        poly.to_str().unwrap(),
    ])
    .status
    .success());
    assert!(run(&[
        "sample",
        "--polygon",
        poly.to_str().unwrap(),
        "--set",
        "polygon:2,10",
        "--out",
        samples.to_str().unwrap(),
    ])
    .status
    .success());
    let r = run(&[
        "recover",
        "--samples",
        samples.to_str().unwrap(),
        "--slopes",
        "axis",
        "--bound",
        "10",
        "--out",
        recovered.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let truth: serde_json::Value = serde_json::from_str(&read(&poly)).unwrap();
    let got: serde_json::Value = serde_json::from_str(&read(&recovered)).unwrap();
    let tv = truth["vertices"].as_array().unwrap();
    let gv = got["vertices"].as_array().unwrap();
    assert_eq!(tv.len(), gv.len());
    // cyclic alignment
    let pts = |arr: &Vec<serde_json::Value>| -> Vec<(f64, f64)> {
        arr.iter()
            .map(|v| (v[0].as_f64().unwrap(), v[1].as_f64().unwrap()))
            .collect()
    };
    let (t, g) = (pts(tv), pts(gv));
    let n = t.len();
    let best = (0..n)
        .map(|s| {
            (0..n)
                .map(|i| {
                    let a = t[i];
                    let b = g[(i + s) % n];
                    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-6, "vertex error {best}");

    let rep: serde_json::Value = serde_json::from_str(&read(&report)).unwrap();
    assert!(rep["verification_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn recover_rejects_truncated_samples() {
    let poly = tmp("tr-poly.json");
    let samples = tmp("tr-samples.json");
    assert!(run(&[
        "gen-polygon",
        "--rectilinear",
        "--max-vertices",
        "6",
        "--seed",
        "5",
        "--out",
        poly.to_str().unwrap(),
    ])
    .status
    .success());
    assert!(run(&[
        "sample",
        "--polygon",
        poly.to_str().unwrap(),
        "--set",
        "polygon:2,6",
        "--out",
        samples.to_str().unwrap(),
    ])
    .status
    .success());
    // drop some points of the declared set
    let mut parsed: serde_json::Value = serde_json::from_str(&read(&samples)).unwrap();
    let points = parsed["points"].as_array().unwrap().clone();
    let values = parsed["values"].as_array().unwrap().clone();
    parsed["points"] = points[5..].to_vec().into();
    parsed["values"] = values[5..].to_vec().into();
    std::fs::write(&samples, serde_json::to_string(&parsed).unwrap()).unwrap();

    let r = run(&[
        "recover",
        "--samples",
        samples.to_str().unwrap(),
        "--slopes",
        "axis",
        "--bound",
        "6",
    ]);
    assert_eq!(r.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&r.stderr);
    assert!(
        stderr.contains("missing-sample-points"),
        "summary should name the error: {stderr}"
    );
}

#[test]
fn usage_errors_exit_two() {
    let r = run(&["no-such-command"]);
    assert_eq!(r.status.code(), Some(2));
    let r = run(&["sample", "--polygon", "x.json", "--set", "bogus:1"]);
    assert_eq!(r.status.code(), Some(1)); // domain-level set-spec failure
    let r = run(&["gen-polygon", "--rectilinear", "--max-vertices"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn verify_uniqueness_reports_verdict() {
    let p1 = tmp("vu-a.json");
    let p2 = tmp("vu-b.json");
    let rep = tmp("vu-report.json");
    for (seed, path) in [(1u32, &p1), (2, &p2)] {
        assert!(run(&[
            "gen-polygon",
            "--rectilinear",
            "--max-vertices",
            "8",
            "--seed",
            &seed.to_string(),
            "--out",
            path.to_str().unwrap(),
        ])
        .status
        .success());
    }
    let r = run(&[
        "verify-uniqueness",
        "--p1",
        p1.to_str().unwrap(),
        "--p2",
        p2.to_str().unwrap(),
        "--k",
        "2",
        "--bound",
        "8",
        "--mode",
        "known",
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&read(&rep)).unwrap();
    assert_eq!(parsed["verdict"], "distinct-confirmed");
    assert!(parsed["max_abs_diff"].as_f64().unwrap() > 1e-9);
}

#[test]
fn oracle_check_and_plot_run() {
    let poly = tmp("oc-poly.json");
    assert!(run(&[
        "gen-polygon",
        "--rectilinear",
        "--max-vertices",
        "10",
        "--seed",
        "9",
        "--out",
        poly.to_str().unwrap(),
    ])
    .status
    .success());
    let r = run(&[
        "oracle-check",
        "--polygon",
        poly.to_str().unwrap(),
        "--trials",
        "40",
    ]);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("max relative discrepancy"));

    let svg = tmp("oc-plot.svg");
    let r = run(&[
        "plot",
        "--polygon",
        poly.to_str().unwrap(),
        "--set",
        "polygon:2,6",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let body = read(&svg);
    assert!(body.starts_with("<svg") && body.trim_end().ends_with("</svg>"));
    assert!(body.contains("<path"));
    assert!(body.contains("<circle"));
}

#[test]
fn sample_accepts_csv_set() {
    let poly = tmp("csv-poly.json");
    let csv = tmp("csv-set.csv");
    let samples = tmp("csv-samples.json");
    assert!(run(&[
        "gen-polygon",
        "--rectilinear",
        "--max-vertices",
        "6",
        "--seed",
        "3",
        "--out",
        poly.to_str().unwrap(),
    ])
    .status
    .success());
    std::fs::write(&csv, "0,0\n1,0\n0,1\n2,2\n").unwrap();
    let r = run(&[
        "sample",
        "--polygon",
        poly.to_str().unwrap(),
        "--set",
        &format!("csv:{}", csv.display()),
        "--out",
        samples.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&read(&samples)).unwrap();
    assert_eq!(parsed["points"].as_array().unwrap().len(), 4);
}
