use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fresco_cli::input::{parse_csv, write_csv, Series};
use serde_json::Value;

fn fresco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fresco"))
        .args(args)
        .env_remove("FRESCO_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn dist_of_two_series() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "pair.csv", "a,0,5\nb,1,3\n");
    let v = json(&fresco(&["dist", "--input", p.to_str().unwrap()]));
    assert_eq!(v["distance"], 2.0);
}

#[test]
fn signature_of_one_series() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "one.csv", "x,0,1,0.5,2\n");
    let v = json(&fresco(&["signature", "--delta", "0.3", "--input", p.to_str().unwrap()]));
    assert_eq!(v["signature"], serde_json::json!([0.0, 2.0]));
}

#[test]
fn simplify_reports_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "one.json", r#"[{"id": "t", "values": [0, 10, 4, 9]}]"#);
    let v = json(&fresco(&["simplify", "--ell", "2", "--input", p.to_str().unwrap()]));
    assert_eq!(v["simplified"], serde_json::json!([0.0, 9.0]));
    assert_eq!(v["error"], 3.0);
}

#[test]
fn long_format_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "long.csv", "id,t,value\na,2,5\nb,1,1\na,1,0\nb,2,3\n");
    let v = json(&fresco(&["dist", "--input", p.to_str().unwrap()]));
    assert_eq!(v["distance"], 2.0);
}

fn planted(dir: &Path, k: &str, seed: &str) -> PathBuf {
    let p = dir.join("planted.csv");
    let out = fresco(&[
        "gen-fixtures", "--kind", "planted", "--k", k, "--ell", "2", "--n", "20", "--m", "30", "--radius", "1",
        "--separation", "10", "--seed", seed, "--output", p.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    p
}

#[test]
fn planted_center_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = planted(dir.path(), "1", "3");
    let v = json(&fresco(&[
        "cluster", "--objective", "center", "--k", "1", "--ell", "2", "--epsilon", "0.25", "--input",
        p.to_str().unwrap(), "--seed", "7",
    ]));
    assert!(v["cost"].as_f64().unwrap() <= 1.25);
    assert_eq!(v["algorithm"], "refine_center");
    assert_eq!(v["objective"], "center");
    assert_eq!(v["assignment"].as_object().unwrap().len(), 20);
    assert_eq!(v["centers"].as_array().unwrap().len(), 1);
    for key in ["k", "ell", "epsilon", "lambda", "seed", "guarantee_factor", "runtime_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

fn without_runtime(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("runtime_ms");
    v
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = planted(dir.path(), "2", "11");
    let args = |threads: &'static str| {
        vec![
            "cluster", "--objective", "median", "--k", "2", "--ell", "2", "--epsilon", "0.5", "--seed", "5",
            "--repeats", "2", "--threads", threads, "--input",
        ]
    };
    let mut a = args("1");
    a.push(p.to_str().unwrap());
    let mut b = args("2");
    b.push(p.to_str().unwrap());
    let first = json(&fresco(&a));
    assert_eq!(without_runtime(first.clone()), without_runtime(json(&fresco(&a))));
    assert_eq!(without_runtime(first), without_runtime(json(&fresco(&b))));
}

#[test]
fn median_modes() {
    let dir = tempfile::tempdir().unwrap();
    let p = planted(dir.path(), "1", "4");
    let path = p.to_str().unwrap();
    let c = json(&fresco(&["cluster", "--objective", "median", "--mode", "constant", "--input", path]));
    assert_eq!(c["algorithm"], "constant_factor_median");
    assert_eq!(c["guarantee_factor"], 8.0);
    let r = json(&fresco(&["cluster", "--objective", "median", "--epsilon", "0.5", "--input", path]));
    assert_eq!(r["algorithm"], "one_median");
    assert!(r["cost"].as_f64().unwrap() <= c["cost"].as_f64().unwrap() + 1e-9);
    assert!(r["cost"].as_f64().unwrap() <= 30.0);
}

#[test]
fn fixture_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [["planted", "--k", "2"], ["doubling", "--d", "3"], ["doubling-bounded", "--ell", "6"]] {
        let p = dir.path().join(format!("{}.csv", kind[0]));
        let mut args = vec!["gen-fixtures", "--kind"];
        args.extend(kind);
        args.extend(["--output", p.to_str().unwrap()]);
        assert!(fresco(&args).status.success());
        let bytes = std::fs::read(&p).unwrap();
        let series: Vec<Series> = parse_csv(std::str::from_utf8(&bytes).unwrap())
            .unwrap()
            .into_iter()
            .map(|(id, v)| Series { id, curve: fresco::Curve::new(&v).unwrap() })
            .collect();
        let mut again = Vec::new();
        write_csv(&mut again, &series).unwrap();
        assert_eq!(bytes, again, "{}", kind[0]);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "a,0,5\nb,1,oops\n");
    let out = fresco(&["dist", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("row 2") && msg.lines().count() == 1, "{msg}");

    let out = fresco(&["dist", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus"));

    let out = fresco(&["dist", "--input", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let p = planted(dir.path(), "2", "9");
    let out = fresco(&[
        "cluster", "--k", "2", "--ell", "2", "--epsilon", "0.01", "--max-candidates", "1", "--input",
        p.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let out = fresco(&["cluster", "--k", "50", "--input", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "pair.json", r#"[{"id":"a","values":[0,5]},{"id":"b","values":[1,3]}]"#);
    let o = dir.path().join("out.json");
    let out = fresco(&["dist", "--input", p.to_str().unwrap(), "--output", o.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(o).unwrap()).unwrap();
    assert_eq!(v["distance"], 2.0);
}
