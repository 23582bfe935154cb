use std::process::{Command, Output};

use serde_json::Value;

fn lmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmax")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn spec_args(spec: &Value) -> Vec<String> {
    match spec["kind"].as_str().unwrap() {
        "constant" => vec!["--p".into(), spec["p"].to_string()],
        "perturbed" => vec![
            "--family".into(),
            "perturbed".into(),
            "--sign".into(),
            spec["sign"].as_str().unwrap().into(),
            "--K".into(),
            spec["K"].to_string(),
            "--B".into(),
            spec["B"].to_string(),
        ],
        other => panic!("unknown kind {other}"),
    }
}

#[test]
fn dist_symmetric() {
    let text = stdout(&lmax(&["dist", "--p", "0.5", "--n-max", "3", "--format", "csv"]));
    let rows = csv_rows(&text);
    assert!(text.starts_with("n,pmf,log_pmf,cumulative\n"));
    let pmf: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    for (n, v) in pmf.iter().enumerate() {
        let n = n as f64 + 1.0;
        assert!((v - 1.0 / (n * (n + 1.0))).abs() < 1e-15);
    }
}

#[test]
fn dist_perturbed_first_bin() {
    let text = stdout(&lmax(&[
        "dist", "--family", "perturbed", "--sign", "plus", "--K", "1", "--B", "1", "--n-max", "1",
    ]));
    let pmf: f64 = csv_rows(&text)[0][1].parse().unwrap();
    assert!((pmf - 0.25).abs() < 1e-15);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["dist", "--p", "1.5", "--n-max", "3"][..],
        &["dist", "--n-max", "3"],
        &["dist", "--p", "0.5", "--K", "1", "--n-max", "3"],
        &["dist", "--family", "perturbed", "--sign", "plus", "--K", "0", "--B", "1", "--n-max", "3"],
        &["hit", "--p", "0.5", "--a", "3", "--k", "1", "--b", "5"],
        &["simulate", "--p", "0.5", "--excursions", "0"],
        &["frobnicate"],
    ] {
        let out = lmax(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn table_budget_exits_1() {
    let out = Command::new(env!("CARGO_BIN_EXE_lmax"))
        .args(["dist", "--p", "0.5", "--n-max", "100"])
        .env("LMAX_MAX_TABLE", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn negative_b_is_accepted() {
    let text = stdout(&lmax(&[
        "classify", "--family", "perturbed", "--sign", "plus", "--K", "1", "--B", "-2", "--n-max", "1000",
    ]));
    assert!(text.lines().nth(1).unwrap().starts_with("positive_recurrent,criterion,"));
}

#[test]
fn boundary_warning() {
    let out = lmax(&["classify", "--family", "perturbed", "--sign", "minus", "--K", "2", "--B", "1", "--n-max", "100"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("boundary"));
    assert!(stdout(&out).contains("null_recurrent"));
}

#[test]
fn csv_and_json_agree() {
    let cases: [&[&str]; 4] = [
        &["dist", "--family", "perturbed", "--sign", "minus", "--K", "2", "--B", "0.3", "--n-max", "50"],
        &["hit", "--p", "0.4", "--a", "0", "--k", "4", "--b", "9"],
        &["asympt", "--family", "perturbed", "--sign", "plus", "--K", "1", "--B", "0.5", "--n-lo", "10", "--n-hi", "1000"],
        &["simulate", "--p", "0.5", "--excursions", "500", "--seed", "9", "--cap-height", "20"],
    ];
    for args in cases {
        let csv = stdout(&lmax(&[args, &["--format", "csv"]].concat()));
        let json: Value = serde_json::from_str(&stdout(&lmax(&[args, &["--format", "json"]].concat()))).unwrap();
        let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        let rows = json["rows"].as_array().unwrap();
        let csv_rows = csv_rows(&csv);
        assert_eq!(rows.len(), csv_rows.len());
        for (row, cells) in rows.iter().zip(&csv_rows) {
            for (col, cell) in header.iter().zip(cells) {
                let v = &row[*col];
                let rendered = v.as_str().map_or_else(|| v.to_string(), str::to_owned);
                assert_eq!(&rendered, cell, "{args:?} column {col}");
            }
        }
    }
}

#[test]
fn json_meta_reproduces_output() {
    let first = stdout(&lmax(&[
        "dist", "--family", "perturbed", "--sign", "minus", "--K", "3", "--B", "-0.7", "--n-max", "40", "--format", "json",
    ]));
    let doc: Value = serde_json::from_str(&first).unwrap();
    let meta = &doc["meta"];
    let mut args = vec!["dist".to_owned()];
    args.extend(spec_args(&meta["spec"]));
    args.extend(["--n-max".into(), meta["n_max"].to_string(), "--format".into(), "json".into()]);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_eq!(stdout(&lmax(&args)), first);
}

#[test]
fn generated_seed_is_reported() {
    let base = ["simulate", "--p", "0.5", "--excursions", "300", "--cap-height", "10", "--format", "json"];
    let first = stdout(&lmax(&base));
    let doc: Value = serde_json::from_str(&first).unwrap();
    let seed = doc["meta"]["seed"].as_u64().unwrap().to_string();
    let again = stdout(&lmax(&[&base[..], &["--seed", &seed]].concat()));
    assert_eq!(again, first);
    assert!(doc["meta"].get("workers").is_none());
}

#[test]
fn return_reports_bracket() {
    let doc: Value = serde_json::from_str(&stdout(&lmax(&["return", "--p", "0.75", "--n-max", "2000", "--format", "json"]))).unwrap();
    let row = &doc["rows"][0];
    let (lo, hi) = (row["lower"].as_f64().unwrap(), row["upper"].as_f64().unwrap());
    assert!(lo <= hi);
    assert!((row["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn compare_flags_nothing_for_matching_law() {
    let doc: Value = serde_json::from_str(&stdout(&lmax(&[
        "compare", "--p", "0.5", "--excursions", "20000", "--seed", "5", "--cap-height", "30", "--format", "json",
    ])))
    .unwrap();
    assert_eq!(doc["meta"]["passed"], true);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 29);
}
