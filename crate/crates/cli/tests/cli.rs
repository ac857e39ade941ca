//! End-to-end runs of the `bme` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bme")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&read(p)).unwrap()
}

fn manifest_outputs(dir: &Path) -> Vec<String> {
    json(&dir.join("manifest.json"))["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn run_haar_single_shot_grid() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = bme(&["run-haar", "--d", "2,4", "--n-shots", "1", "--I", "50", "--L", "2000", "--seed", "3", "--svg", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let summary = json(&out.join("summary.json"));
    let cells = summary["cells"].as_array().unwrap();
    for (cell, want) in cells.iter().zip([5.0 / 9.0, 7.0 / 25.0]) {
        let mean = cell["mean"].as_f64().unwrap();
        assert!((mean - want).abs() < 0.03, "{mean} vs {want}");
        assert_eq!(cell["histogram"]["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum::<u64>(), 50);
    }

    let outputs = manifest_outputs(&out);
    for f in ["run_d2_N1.csv", "run_d4_N1.csv", "summary.json", "figure.csv", "figure.svg"] {
        assert!(outputs.iter().any(|o| o == f), "{f} not in manifest");
        assert!(out.join(f).exists(), "{f} not written");
    }
    let cell = read(&out.join("run_d2_N1.csv"));
    let mut lines = cell.lines();
    assert_eq!(lines.next().unwrap(), "stream_index,avg_fidelity,n_outcomes,wall_ms");
    assert_eq!(lines.count(), 50);
    assert!(cell.lines().skip(1).all(|l| l.ends_with(",1,0")));
    assert!(read(&out.join("figure.csv")).starts_with("d,N,mean_fidelity,std\n2,1,"));
    assert!(read(&out.join("figure.svg")).starts_with("<svg"));
}

#[test]
fn rerun_from_manifest_is_identical() {
    let tmp = TempDir::new().unwrap();
    let first = tmp.path().join("a");
    let second = tmp.path().join("b");
    let o = bme(&["run-haar", "--d", "3", "--n-shots", "1,3", "--I", "6", "--L", "200", "--ensemble", "ginibre", "--seed", "11", "--out", &out_arg(&first)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = first.join("manifest.json");
    let o = bme(&["run-haar", "--config", manifest.to_str().unwrap(), "--out", &out_arg(&second)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in manifest_outputs(&first) {
        assert_eq!(fs::read(first.join(&f)).unwrap(), fs::read(second.join(&f)).unwrap(), "{f} differs");
    }
    assert_eq!(json(&manifest)["config"], json(&second.join("manifest.json"))["config"]);
}

#[test]
fn config_file_with_flag_override() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"d": [2], "N": [2], "L": 100, "I": 4, "seed": 5, "ensemble": "mixed-rank"}"#).unwrap();
    let out = tmp.path().join("o");
    let o = bme(&["run-haar", "--config", cfg.to_str().unwrap(), "--I", "3", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["I"], 3);
    assert_eq!(m["config"]["L"], 100);
    assert_eq!(m["config"]["ensemble"], "mixed-rank");
    assert_eq!(read(&out.join("run_d2_N2.csv")).lines().count(), 4);
}

#[test]
fn missing_or_bad_config_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("never");
    let o = bme(&["run-haar", "--config", "/nonexistent/cfg.json", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());

    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"dims": [2]}"#).unwrap();
    assert_eq!(code(&bme(&["run-haar", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&out)])), 2);
    assert_eq!(code(&bme(&["run-haar", "--L", "0", "--out", &out_arg(&out)])), 2);
    assert_eq!(code(&bme(&["run-haar", "--d", "x", "--out", &out_arg(&out)])), 2);
    assert!(!out.exists());
}

#[test]
fn compare_designs_table() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("cmp");
    let args = ["compare-designs", "--n-shots", "1,4", "--L", "200", "--I", "4", "--seed", "9", "--svg", "--out", &out_arg(&out)];
    let o = bme(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = read(&out.join("compare.csv"));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "source,N,mean,std");
    assert_eq!(lines.len(), 1 + 4 * 2);
    assert!(lines[1].starts_with("pauli,1,"));
    // One measurement: every source gives the same ensemble-averaged value
    // up to sampling noise.
    let n1: Vec<f64> = lines[1..].iter().filter(|l| l.split(',').nth(1) == Some("1")).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(n1.iter().all(|m| (m - n1[0]).abs() < 0.05));

    let again = tmp.path().join("cmp2");
    let mut args2 = args.to_vec();
    let last = args2.len() - 1;
    let again_arg = out_arg(&again);
    args2[last] = &again_arg;
    assert_eq!(code(&bme(&args2)), 0);
    assert_eq!(fs::read(out.join("compare.csv")).unwrap(), fs::read(again.join("compare.csv")).unwrap());

    assert_eq!(code(&bme(&["compare-designs", "--bogus"])), 2);
    assert_eq!(code(&bme(&["compare-designs", "--d", "3", "--out", &out_arg(&tmp.path().join("x"))])), 2);
}

#[test]
fn pgm_verify_passes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("v");
    let o = bme(&["pgm", "--verify", "--corpus", "100", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("verify.json"));
    assert_eq!(report["ensembles"], 100);
    assert!(report["worst"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn pgm_scatter_on_orthonormal_ensemble() {
    let tmp = TempDir::new().unwrap();
    let ens = tmp.path().join("basis.json");
    fs::write(
        &ens,
        r#"{"kind": "custom", "d": 2, "L": 2,
            "states": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]],
            "prior": [0.5, 0.5]}"#,
    )
    .unwrap();
    let out = tmp.path().join("s");
    let o = bme(&["pgm", "--ensemble-file", ens.to_str().unwrap(), "--trials", "40", "--svg", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("scatter.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "trial,outcome,f_naive,f_bayes");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r.ends_with(",1,1")), "{rows:?}");
    assert!(out.join("scatter.svg").exists());
}

#[test]
fn pgm_scatter_generated_ensemble() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("g");
    let o = bme(&["pgm", "--d", "2", "--L", "100", "--trials", "200", "--seed", "4", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("pgm_summary.json"));
    assert!(s["margin"].as_f64().unwrap() > 0.0);
    assert_eq!(code(&bme(&["pgm", "--L", "10", "--rho0", "10", "--out", &out_arg(&tmp.path().join("r"))])), 2);
}

#[test]
fn corrupted_ensemble_file_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let ens = tmp.path().join("bad.json");
    fs::write(&ens, r#"{"kind": "custom", "d": 2, "L": 1, "states": [[[1,0]]], "prior": [1.0]"#).unwrap();
    assert_eq!(code(&bme(&["pgm", "--ensemble-file", ens.to_str().unwrap(), "--out", &out_arg(&tmp.path().join("o"))])), 2);
    // Well-formed JSON describing a matrix with trace 2.
    fs::write(
        &ens,
        r#"{"kind": "custom", "d": 1, "L": 1, "states": [[[[2,0]]]], "prior": [1.0]}"#,
    )
    .unwrap();
    assert_eq!(code(&bme(&["pgm", "--ensemble-file", ens.to_str().unwrap(), "--out", &out_arg(&tmp.path().join("o"))])), 2);
}

#[test]
fn bounds_table() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("b");
    let o = bme(&["bounds", "--d", "2", "--n-shots", "1,2", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0);
    let csv = read(&out.join("bounds.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d,N,multi_shot_infidelity_bound,single_shot_pure_infidelity");
    assert_eq!(lines[1], "2,1,0.444444444444,0.444444444444");
    assert_eq!(lines[2], "2,2,0.583333333333,0.444444444444");
    assert!(String::from_utf8_lossy(&o.stdout).contains("0.583333333333"));
    let never = tmp.path().join("n");
    assert_eq!(code(&bme(&["bounds", "--n-shots", "0", "--out", &out_arg(&never)])), 2);
    assert_eq!(code(&bme(&["bounds", "--d", "1", "--out", &out_arg(&never)])), 2);
    assert!(!never.exists());
}

#[test]
fn histogram_rebins_a_cell() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("run");
    let o = bme(&["run-haar", "--d", "2", "--n-shots", "2", "--I", "30", "--L", "100", "--out", &out_arg(&run)]);
    assert_eq!(code(&o), 0);
    let cell = run.join("run_d2_N2.csv");
    let out = tmp.path().join("h");
    let o = bme(&["histogram", cell.to_str().unwrap(), "--bins", "7", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out.join("histogram.csv"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "bin_lo,bin_hi,count");
    assert_eq!(lines.len(), 8);
    let total: u64 = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 30);

    let out2 = tmp.path().join("h2");
    assert_eq!(code(&bme(&["histogram", cell.to_str().unwrap(), "--bins", "7", "--out", &out_arg(&out2)])), 0);
    assert_eq!(read(&out2.join("histogram.csv")), text);

    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert_eq!(code(&bme(&["histogram", empty.to_str().unwrap(), "--out", &out_arg(&tmp.path().join("e"))])), 2);
    let nocol = tmp.path().join("nocol.csv");
    fs::write(&nocol, "stream_index,value\n0,0.5\n").unwrap();
    assert_eq!(code(&bme(&["histogram", nocol.to_str().unwrap(), "--out", &out_arg(&tmp.path().join("e"))])), 2);
}

#[test]
fn generated_ensemble_feeds_pgm() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("ens");
    let o = bme(&["gen-ensemble", "--d", "3", "--L", "25", "--ensemble", "mixed-rank", "--seed", "8", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let file = out.join("ensemble.json");
    let e = json(&file);
    assert_eq!(e["d"], 3);
    assert_eq!(e["L"], 25);
    assert_eq!(e["kind"], "mixed-rank");
    let scatter = tmp.path().join("sc");
    let o = bme(&["pgm", "--ensemble-file", file.to_str().unwrap(), "--trials", "50", "--out", &out_arg(&scatter)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&scatter.join("pgm_summary.json"))["L"], 25);
}
