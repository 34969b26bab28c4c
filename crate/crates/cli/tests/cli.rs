use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn h1geom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_h1geom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn crofton_unit_ball() {
    let out = h1geom(&[
        "crofton",
        "--body",
        "unit-ball",
        "--n",
        "1000000",
        "--seed",
        "42",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "h1geom.report/1");
    assert_eq!(v["parameters"]["seed"], 42);
    let row = &v["rows"][0];
    let value = row["value"].as_f64().unwrap();
    assert!((value - 21.9657).abs() < 0.1);
    assert!(row["reference"]["source"]
        .as_str()
        .unwrap()
        .contains("measures::p_area"));
    let (lo, hi) = (
        row["ci"][0].as_f64().unwrap(),
        row["ci"][1].as_f64().unwrap(),
    );
    let reference = row["reference"]["value"].as_f64().unwrap();
    assert!(lo <= reference && reference <= hi);
}

#[test]
fn same_seed_same_report() {
    let args = [
        "kinematic",
        "--ell",
        "0.5",
        "--n",
        "200000",
        "--seed",
        "9",
        "--stratify",
    ];
    let a = h1geom(&args);
    let b = h1geom(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(without_timing(json(&a)), without_timing(json(&b)));
    let text = |o: &Output| {
        String::from_utf8(o.stdout.clone())
            .unwrap()
            .lines()
            .filter(|l| !l.contains("wall_time_s"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(text(&a), text(&b));
    let c = h1geom(&[
        "kinematic",
        "--ell",
        "0.5",
        "--n",
        "200000",
        "--seed",
        "10",
        "--stratify",
    ]);
    assert_ne!(text(&a), text(&c));
}

#[test]
fn sweep_csv_rows_fit_the_p_area_slope() {
    let out = h1geom(&["sweep", "--ell-list", "0,0.5,1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(&out.stdout[..]);
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header[..6],
        ["command", "quantity", "module", "body", "ell", "value"]
    );
    let rows: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[4].parse().unwrap(), r[5].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 3);
    let n = rows.len() as f64;
    let mx = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let my = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let slope = rows.iter().map(|r| (r.0 - mx) * (r.1 - my)).sum::<f64>()
        / rows.iter().map(|r| (r.0 - mx).powi(2)).sum::<f64>();
    assert!((slope / 21.966498 - 1.0).abs() < 0.02, "slope {slope}");
}

#[test]
fn volume_of_box_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let body = dir.path().join("box.toml");
    fs::write(&body, "kind = \"box\"\nmin = [0, 0, 0]\nmax = [1, 1, 1]\n").unwrap();
    let report = dir.path().join("out.json");
    let out = h1geom(&[
        "volume",
        "--body",
        body.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["rows"][0]["value"], 1.0);
    assert_eq!(v["rows"][0]["method"], "exact");
}

#[test]
fn p_area_oracle_names_both_routines() {
    let out = h1geom(&[
        "p-area",
        "--oracle",
        "--resolution",
        "128",
        "--tol",
        "0.005",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let row = &json(&out)["rows"][0];
    assert_eq!(row["module"], "measures::p_area_triangulation_oracle");
    assert_eq!(row["method"], "triangulation-oracle");
    assert_eq!(row["reference"]["source"], "measures::p_area");
}

#[test]
fn experiment_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "n_samples = 50000\nseed = 5\nell = 0.25\nformat = \"csv\"\n\
         [inner]\nkind = \"ball\"\ncenter = [0, 0, 0]\nradius = 0.5\n\
         [outer]\nkind = \"ball\"\ncenter = [0, 0, 0]\nradius = 1\n",
    )
    .unwrap();
    let out = h1geom(&[
        "containment",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "6",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "containment");
    assert_eq!(row[3], "ball in ball");
    assert_eq!(row[4], "0.25");
    assert_eq!(row[10], "6");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(
        &bad,
        "kind = \"ball\"\ncenter = [0, 0, 0]\nradius = 1\nextra = 2\n",
    )
    .unwrap();
    let code = |args: &[&str]| h1geom(args).status.code();
    assert_eq!(code(&["crofton", "--body", bad.to_str().unwrap()]), Some(2));
    assert_eq!(code(&["crofton", "--body", "no-such-file.toml"]), Some(2));
    assert_eq!(code(&["kinematic"]), Some(2));
    assert_eq!(code(&["kinematic", "--ell", "-1"]), Some(2));
    assert_eq!(code(&["invariance", "--motion", "1,2"]), Some(2));
    assert_eq!(code(&["crofton", "--n", "0"]), Some(2));
    assert_eq!(code(&["crofton", "--format", "xml"]), Some(2));
    assert_eq!(
        code(&[
            "containment",
            "--inner",
            "unit-cube",
            "--outer",
            "unit-ball"
        ]),
        Some(3)
    );
    assert_eq!(code(&["crofton", "--n", "1000", "--tol", "1e-9"]), Some(4));
    assert_eq!(
        code(&["p-area", "--body", "unit-cube", "--tol", "1e-14"]),
        Some(4)
    );
}

#[test]
fn kinematic_flags_clamping() {
    let out = h1geom(&["kinematic", "--ell", "1.5", "--n", "100000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let clamped = &v["rows"][1];
    assert!(clamped["reference"].is_null());
    assert!(clamped["note"]
        .as_str()
        .unwrap()
        .contains("shorter than ell"));
    assert!(!v["rows"][2]["reference"].is_null());
}
