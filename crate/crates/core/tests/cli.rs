use std::fs;
use std::path::Path;

use dyadic_transport::cli::{self, EXIT_BUDGET, EXIT_CHECK, EXIT_OK, EXIT_PARSE, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dyadic-transport").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

fn partition_file(dir: &Path, d: &str, n: &str) -> String {
    let path = dir.join(format!("p{d}_{n}.json"));
    let path = path.to_str().unwrap().to_string();
    let (code, out, err) = run(&["partition", "--d", d, "--n", n, "--out", &path]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.is_empty());
    assert!(err.contains("PASS radius"));
    path
}

#[test]
fn gen_prints_exact_and_float_coordinates() {
    let (code, out, _) = run(&["gen", "--d", "2", "--n", "5"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,x1,x2,f1,f2");
    assert_eq!(lines[2], "2,1/2,0/1,0.500000000000,0");
    assert_eq!(lines[5], "5,1/4,0/1,0.250000000000,0");

    let (code, out, _) = run(&["gen", "--d", "3", "--n", "9", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 9);
    assert_eq!(doc["rows"][8][1], "1/4");
}

#[test]
fn invalid_flags_exit_2() {
    for args in [
        &["gen", "--d", "1", "--n", "3"][..],
        &["gen", "--d", "17", "--n", "3"],
        &["gen", "--d", "2", "--n", "0"],
        &["gen", "--d", "2"],
        &["bounds", "--d", "2", "--n", "10", "--p", "0.5"],
        &["bounds", "--d", "2", "--n", "10", "--constant", "-1"],
        &["oracle", "--d", "2", "--n", "4", "--grid", "0"],
        &["obstruction", "--n-max", "0"],
        &["frobnicate"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("partition"));
}

#[test]
fn partition_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    for (d, n) in [("2", "1"), ("2", "300"), ("3", "700")] {
        let path = partition_file(dir.path(), d, n);
        let (code, out, _) = run(&["verify", &path]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.contains("mode: Oblivious"));
        assert_eq!(out.matches("PASS").count(), 6);
    }
    let path = partition_file(dir.path(), "2", "300");
    let (code, out, _) = run(&["verify", &path, "--constant", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("info FAIL radius"));
}

#[test]
fn large_files_verify_in_tree_mode_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let path = partition_file(dir.path(), "2", "2500");
    let (code, out, _) = run(&["verify", &path]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("mode: Tree"));
    let (code, out, _) = run(&["verify", &path, "--oblivious"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("mode: Oblivious"));
}

#[test]
fn tampered_file_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = partition_file(dir.path(), "2", "100");
    let mut doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let cells = doc["cells"].as_array_mut().unwrap();
    let (lo, hi) = (cells[6]["lo"].clone(), cells[6]["hi"].clone());
    cells[7]["lo"] = lo;
    cells[7]["hi"] = hi;
    fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let (code, out, err) = run(&["verify", &path]);
    assert_eq!(code, EXIT_CHECK);
    assert!(out.contains("FAIL disjoint"));
    assert!(err.contains("witness: cells 7 and 8"), "{err}");
}

#[test]
fn unreadable_files_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"format\": ").unwrap();
    assert_eq!(run(&["verify", bad.to_str().unwrap()]).0, EXIT_PARSE);
    fs::write(&bad, "{\"format\":\"other\",\"version\":1,\"d\":2,\"n\":1,\"level\":0,\"fallback\":true,\"cells\":[]}")
        .unwrap();
    assert_eq!(run(&["verify", bad.to_str().unwrap()]).0, EXIT_PARSE);
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["verify", missing.to_str().unwrap()]).0, EXIT_PARSE);
}

#[test]
fn bounds_and_oracle_rows() {
    let (code, out, _) = run(&["bounds", "--d", "2", "--n", "100"]);
    assert_eq!(code, EXIT_OK);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row[0], "100");
    let (value, lower, upper): (f64, f64, f64) = (
        row[1].parse().unwrap(),
        row[2].parse().unwrap(),
        row[3].parse().unwrap(),
    );
    assert!(lower <= value && value <= upper);
    assert_eq!(row[3], "0.848528137424");
    assert_eq!(row[2], "0.0564189583548");
    assert!(row[4].is_empty() && row[5].is_empty());

    let (_, out, _) = run(&[
        "bounds",
        "--d",
        "2",
        "--n",
        "100",
        "--p",
        "2",
        "--constant",
        "11/2",
    ]);
    let row = &csv_rows(&out)[0];
    assert!(row[2].is_empty());
    assert_eq!(row[3], "0.777817459305");

    let (code, out, _) = run(&["oracle", "--d", "2", "--n", "16", "--grid", "20"]);
    assert_eq!(code, EXIT_OK);
    let row = &csv_rows(&out)[0];
    let (oracle, error): (f64, f64) = (row[4].parse().unwrap(), row[5].parse().unwrap());
    assert!((error - 2f64.sqrt() / 40.0).abs() < 1e-11);
    assert!(oracle - error <= row[1].parse::<f64>().unwrap());

    let (code, _, err) = run(&["oracle", "--d", "2", "--n", "1000", "--grid", "50"]);
    assert_eq!(code, EXIT_BUDGET);
    assert!(err.contains("budget"));
}

#[test]
fn obstruction_and_rates_tables() {
    let (code, out, _) = run(&["obstruction", "--n-max", "8"]);
    assert_eq!(code, EXIT_OK);
    let rows = csv_rows(&out);
    let values: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(values[..4], ["1/2", "1/2", "3/4", "1/2"]);
    assert_eq!(rows[7][0], "8");
    assert_eq!(rows[7][1], "1/2");
    assert_eq!(rows[2][3], "3/4");

    let (code, out, _) = run(&["rates", "--d", "2", "--n-max", "100"]);
    assert_eq!(code, EXIT_OK);
    let rows = csv_rows(&out);
    let ns: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ns, ["1", "2", "4", "8", "16", "32", "64"]);
    for r in &rows {
        assert_eq!(r[3], "8.48528137424");
        assert!(r[1].parse::<f64>().unwrap() <= 8.48528137424);
    }
}

#[test]
fn output_flag_writes_tables_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gen.csv");
    let (code, out, _) = run(&[
        "gen",
        "--d",
        "2",
        "--n",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert_eq!(fs::read_to_string(path).unwrap().lines().count(), 4);
}
