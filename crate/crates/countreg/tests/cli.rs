//! End-to-end tests of the countreg binary: exit codes, report files,
//! determinism, and plot-data consistency.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn countreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_countreg"))
        .args(args)
        .output()
        .expect("failed to launch countreg")
}

fn simulate_into(dir: &Path, seed: u64) -> std::path::PathBuf {
    let out = dir.join(format!("sim{seed}"));
    let status = countreg(&[
        "simulate",
        "--m",
        "41",
        "--seed",
        &seed.to_string(),
        "--beta",
        "intercept=1.0,violations=0.2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "simulate failed: {status:?}");
    out.join("dataset.csv")
}

fn read_json(path: &Path) -> Value {
    let raw = std::fs::read_to_string(path).unwrap();
    serde_json::from_str(&raw).unwrap()
}

#[test]
fn simulate_is_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = simulate_into(dir.path(), 7);
    let b = {
        let out = dir.path().join("again");
        let status = countreg(&[
            "simulate",
            "--m",
            "41",
            "--seed",
            "7",
            "--beta",
            "intercept=1.0,violations=0.2",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success());
        out.join("dataset.csv")
    };
    let c = simulate_into(dir.path(), 8);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    // header row matches the canonical schema
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with(
        "org_id,domestic_com,domestic_edu,domestic_gov,domestic_net,domestic_org,\
         foreign_com,foreign_net,foreign_org,violations,hosts,rosg,seib,intrusions"
    ));
}

#[test]
fn fit_writes_report_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = simulate_into(dir.path(), 11);
    let out = dir.path().join("fit");
    for _ in 0..2 {
        let status = countreg(&[
            "fit",
            "--input",
            input.to_str().unwrap(),
            "--family",
            "nb2",
            "--gamma",
            "0.5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success(), "{status:?}");
    }
    let report_path = out.join("fit_report.json");
    let first = std::fs::read(&report_path).unwrap();
    // rerun into a fresh directory and demand byte-identical output
    let out2 = dir.path().join("fit2");
    let status = countreg(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "nb2",
        "--gamma",
        "0.5",
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert_eq!(first, std::fs::read(out2.join("fit_report.json")).unwrap());

    let report = read_json(&report_path);
    assert_eq!(report["kind"], "glm_fit");
    assert_eq!(report["family"], "nb2");
    assert_eq!(report["m"], 41);
    assert_eq!(report["coefficients"].as_array().unwrap().len(), 14);
    assert_eq!(report["model_df"], 13);
    // m - (coefficients + gamma) - 1
    assert_eq!(report["residual_df"], 41 - 15 - 1);
    assert_eq!(report["observed"].as_array().unwrap().len(), 41);
    let dev = report["deviance"].as_f64().unwrap();
    let df = report["residual_df"].as_f64().unwrap();
    let phi = report["dispersion"].as_f64().unwrap();
    assert!((phi - dev / df).abs() < 1e-12);
    let bic = report["bic"].as_f64().unwrap();
    assert!((bic - (dev - df * 41f64.ln())).abs() < 1e-9);
}

#[test]
fn csv_mirror_matches_json() {
    let dir = TempDir::new().unwrap();
    let input = simulate_into(dir.path(), 13);
    let out = dir.path().join("fit");
    let status = countreg(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "poisson",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let report = read_json(&out.join("fit_report.json"));
    let csv_text = std::fs::read_to_string(out.join("fit_report.csv")).unwrap();
    let mut checked = 0;
    for line in csv_text.lines().skip(1) {
        let (field, raw) = line.split_once(',').unwrap();
        match field {
            "deviance" => {
                assert_eq!(raw.parse::<f64>().unwrap(), report["deviance"].as_f64().unwrap());
                checked += 1;
            }
            "coefficients[0].coefficient" => {
                assert_eq!(
                    raw.parse::<f64>().unwrap(),
                    report["coefficients"][0]["coefficient"].as_f64().unwrap()
                );
                checked += 1;
            }
            _ => {}
        }
    }
    assert_eq!(checked, 2, "expected fields missing from the CSV mirror");
}

#[test]
fn linear_and_pc_fits() {
    let dir = TempDir::new().unwrap();
    let input = simulate_into(dir.path(), 17);
    for family in ["linear", "pc"] {
        let out = dir.path().join(family);
        let status = countreg(&[
            "fit",
            "--input",
            input.to_str().unwrap(),
            "--family",
            family,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success(), "{family}: {status:?}");
        let report = read_json(&out.join("fit_report.json"));
        assert_eq!(report["kind"], "linear_fit");
        assert_eq!(report["family"], family);
        assert!(report["condition_number"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn jackknife_then_plotdata() {
    let dir = TempDir::new().unwrap();
    let input = simulate_into(dir.path(), 19);
    let out = dir.path().join("jk");
    let status = countreg(&[
        "jackknife",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "poisson",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");
    let report = read_json(&out.join("jackknife_report.json"));
    assert_eq!(report["kind"], "jackknife");
    assert_eq!(report["folds"].as_array().unwrap().len(), 41);

    let status = countreg(&["plotdata", "--out", out.to_str().unwrap(), "--bins", "8"]);
    assert!(status.status.success(), "{status:?}");

    let predictions = std::fs::read_to_string(out.join("predictions.tsv")).unwrap();
    let lines: Vec<&str> = predictions.lines().collect();
    assert_eq!(lines[0], "observed\tpredicted");
    assert_eq!(lines.len(), 42);
    // rows must match the report arrays exactly
    let observed = report["observed"].as_array().unwrap();
    let predicted = report["predicted"].as_array().unwrap();
    for (i, line) in lines[1..].iter().enumerate() {
        let (o, p) = line.split_once('\t').unwrap();
        assert_eq!(o.parse::<f64>().unwrap(), observed[i].as_f64().unwrap());
        assert_eq!(p.parse::<f64>().unwrap(), predicted[i].as_f64().unwrap());
    }

    let residuals = std::fs::read_to_string(out.join("residuals.tsv")).unwrap();
    assert_eq!(residuals.lines().count(), 42);

    let hist = std::fs::read_to_string(out.join("deviance_hist.tsv")).unwrap();
    let total: usize = hist
        .lines()
        .skip(1)
        .map(|l| l.rsplit('\t').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 41);

    let meta = read_json(&out.join("plot_metadata.json"));
    assert_eq!(meta["residual_reference_lines"], serde_json::json!([-2.0, 2.0]));
    assert_eq!(meta["bins"], 8);
}

#[test]
fn sweep_and_cases_reports() {
    let dir = TempDir::new().unwrap();
    let input = simulate_into(dir.path(), 23);
    let out = dir.path().join("sweep");
    let status = countreg(&[
        "sweep",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "nb2",
        "--grid",
        "0.1,0.5,1.0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");
    let report = read_json(&out.join("sweep_report.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
    assert_eq!(report["rows"][1]["gamma"], 0.5);

    let out = dir.path().join("cases");
    let status = countreg(&[
        "cases",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "nb2",
        "--gamma",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");
    let report = read_json(&out.join("cases_report.json"));
    let blocks = report["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 1);
    let reports = blocks[0]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 6);
    let dfs: Vec<i64> = reports
        .iter()
        .map(|r| r["residual_df"].as_i64().unwrap())
        .collect();
    assert_eq!(dfs, vec![25, 26, 27, 26, 26, 29]);
    assert_eq!(blocks[0]["comparison"].as_array().unwrap().len(), 6);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let input = simulate_into(dir.path(), 29);
    let out = dir.path().join("out");

    // missing input file -> 3
    let status = countreg(&[
        "fit",
        "--input",
        dir.path().join("missing.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(3), "{status:?}");

    // nb2 without gamma -> usage error 1
    let status = countreg(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "nb2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(1), "{status:?}");

    // corrupted header -> schema error 1, and the message names the column
    let bad = dir.path().join("bad.csv");
    let text = std::fs::read_to_string(&input).unwrap();
    std::fs::write(&bad, text.replacen("violations", "violatons", 1)).unwrap();
    let status = countreg(&[
        "fit",
        "--input",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(1), "{status:?}");
    let stderr = String::from_utf8_lossy(&status.stderr);
    assert!(stderr.contains("violations"), "stderr: {stderr}");

    // unreadable numeric field -> 1 with the row called out
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[1] = lines[1].replacen(',', ",x", 1);
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let status = countreg(&[
        "fit",
        "--input",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(1), "{status:?}");

    // plotdata with no prior report -> 1
    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let status = countreg(&["plotdata", "--out", empty.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(1), "{status:?}");
}
