use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn cubic(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubic")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn results(v: &Value) -> &Vec<Value> {
    v["results"].as_array().unwrap()
}

const ZN_SHIFT: &str = r#"{"atoms": 3, "weights": ["1/3", "1/3", "1/3"], "levels": [{"generators": [[1, 2, 0]]}]}"#;
const IDENTITY_KERNEL: &str = r#"{"group": {"cyclic_orders": [2]}, "table": [["1", "0"], ["0", "1"]]}"#;

#[test]
fn gowers_schema() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "f.json", r#"{"values": ["1", "0", "0", "0", "0"]}"#);
    let out = cubic(&["gowers", "--group", "5", "--function", "f.json", "--degree", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["command"], "gowers");
    let values = &results(&v)[0]["values"];
    assert_eq!(values["u_norm_pow"], "1/125");
    let norm: f64 = values["u_norm"].to_string().parse().unwrap();
    assert!((norm - 125f64.powf(-0.25)).abs() < 1e-15);
}

#[test]
fn complex_function_entries() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "f.json", r#"{"values": [["0", "1"], ["0", "-1"]]}"#);
    let out = cubic(&["gowers", "--group", "2", "--function", "f.json", "--degree", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(results(&report(&out))[0]["values"]["u_norm_pow"], "0/1");
}

#[test]
fn zn_shift_passes_both_axiom_systems() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "zn_shift.json", ZN_SHIFT);
    let out = cubic(&["verify-axioms", "--system", "zn_shift.json", "--nmax", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert!(results(&v).iter().all(|c| c["verdict"] == "pass"));
    assert!(results(&v).iter().any(|c| c["params"]["axioms"] == "v1"));
    assert!(results(&v).iter().any(|c| c["params"]["axioms"] == "v2"));
}

#[test]
fn diagonal_first_level_fails_ergodicity() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "still.json", r#"{"atoms": 2, "weights": ["1/2", "1/2"], "levels": []}"#);
    let out = cubic(&["verify-axioms", "--system", "still.json", "--nmax", "2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let v = report(&out);
    let failed: Vec<&Value> = results(&v).iter().filter(|c| c["verdict"] == "fail").collect();
    assert!(failed[0]["witness"].as_str().unwrap().contains("ergodicity"));
}

#[test]
fn malformed_specs_exit_two_with_field() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "a.json", r#"{"atoms": 2, "weights": ["1/2", "half"], "levels": []}"#);
    let out = cubic(&["verify-axioms", "--system", "a.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weights[1]"));

    write(dir.path(), "b.json", "{\"atoms\": 2,\n \"weights\": [\"1/2\", \"1/2\"]\n}");
    let out = cubic(&["verify-axioms", "--system", "b.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    write(dir.path(), "c.json", r#"{"atoms": 2, "weights": ["1/2", "1/2"], "levels": [{"generators": [[0, 0]]}]}"#);
    let out = cubic(&["verify-axioms", "--system", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("levels[0].generators[0]"));

    let out = cubic(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn caps_and_unsafe() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "f.json", &format!(r#"{{"values": [{}]}}"#, vec!["\"1\""; 17].join(",")));
    let out = cubic(&["gowers", "--group", "17", "--function", "f.json", "--degree", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--unsafe"));
    let out = cubic(&["gowers", "--group", "17", "--function", "f.json", "--degree", "1", "--unsafe"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(results(&report(&out))[0]["values"]["u_norm_pow"], "1/1");
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "zn_shift.json", ZN_SHIFT);
    let a = cubic(&["verify-derived", "--system", "zn_shift.json", "--nmax", "2"], dir.path());
    let b = cubic(&["verify-derived", "--system", "zn_shift.json", "--nmax", "2"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(report(&a).get("timing").is_none());
    let t = cubic(&["verify-derived", "--system", "zn_shift.json", "--nmax", "1", "--timing"], dir.path());
    assert!(report(&t)["timing"]["seconds"].is_number());
}

#[test]
fn report_file_output() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "zn_shift.json", ZN_SHIFT);
    let out = cubic(&["factor", "--system", "zn_shift.json", "--degree", "2", "--output", "r.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(results(&v)[0]["values"]["num_blocks"], 3);
}

#[test]
fn density_matches_gowers() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "f.json", r#"{"values": ["1", "0", "1/2"]}"#);
    let d = cubic(&["density", "--group", "3", "--function", "f.json", "--k", "2"], dir.path());
    let g = cubic(&["gowers", "--group", "3", "--function", "f.json", "--degree", "2"], dir.path());
    assert_eq!(results(&report(&d))[0]["values"]["density"], results(&report(&g))[0]["values"]["u_norm_pow"]);
}

#[test]
fn convergence_over_a_sequence() {
    let dir = TempDir::new().unwrap();
    let entry = r#"{"group": {"cyclic_orders": [2]}, "values": ["1", "0"]}"#;
    write(dir.path(), "s.json", &format!(r#"{{"sequence": [{e}, {e}, {e}]}}"#, e = entry));
    let out = cubic(&["density", "--sequence", "s.json", "--k", "1", "--eps", "0"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let alt = r#"{"group": {"cyclic_orders": [2]}, "values": ["1", "1"]}"#;
    write(dir.path(), "t.json", &format!(r#"{{"sequence": [{e}, {a}, {e}, {a}]}}"#, e = entry, a = alt));
    let out = cubic(&["density", "--sequence", "t.json", "--k", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn idempotence_accepts_squares_and_rejects_perturbation() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "p.json", r#"{"weights": ["1/4", "1/4", "1/4", "1/4"], "blocks": [[0, 1], [2, 3]]}"#);
    let out = cubic(&["idempotence", "--partition", "p.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(results(&report(&out))[0]["values"]["factor"], serde_json::json!([[0, 1], [2, 3]]));
    write(
        dir.path(),
        "c.json",
        r#"{"weights": ["1/2", "1/2"], "entries": [[[0, 0], "3/8"], [[1, 1], "3/8"], [[0, 1], "1/8"], [[1, 0], "1/8"]]}"#,
    );
    assert_eq!(cubic(&["idempotence", "--coupling", "c.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn sample_then_test_round_trip() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "k.json", IDENTITY_KERNEL);
    let out = cubic(&["sample-zeta", "--kernel", "k.json", "--window", "2", "--samples", "20000", "--seed", "0", "--batch", "b.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert!(csv.starts_with("sample_id,vertex,symbol\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 20000);
    let out = cubic(&["test-exchangeable", "--batch", "b.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(results(&v).iter().filter(|c| c["check_id"] == "face_independence_chi2").count(), 14);
    let exact = cubic(&["test-exchangeable", "--kernel", "k.json", "--window", "2"], dir.path());
    assert_eq!(exact.status.code(), Some(0));
}

#[test]
fn sampling_ignores_thread_count() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "k.json", IDENTITY_KERNEL);
    for (threads, name) in [("1", "one.csv"), ("3", "three.csv")] {
        let out = Command::new(env!("CARGO_BIN_EXE_cubic"))
            .args(["sample-zeta", "--kernel", "k.json", "--window", "2", "--samples", "9000", "--seed", "5", "--batch", name])
            .env("CUBIC_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(dir.path().join("one.csv")).unwrap(), std::fs::read(dir.path().join("three.csv")).unwrap());
}

#[test]
fn bad_batch_rows_report_line() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "b.csv", "sample_id,vertex,symbol\n0,0,1\n0,1,x\n");
    let out = cubic(&["test-exchangeable", "--batch", "b.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn undersized_batch_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "k.json", IDENTITY_KERNEL);
    cubic(&["sample-zeta", "--kernel", "k.json", "--window", "1", "--samples", "10", "--batch", "b.csv"], dir.path());
    let out = cubic(&["test-exchangeable", "--batch", "b.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("minimum"));
}

#[test]
fn host_kra_levels_and_seminorm() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "zn_shift.json", ZN_SHIFT);
    write(dir.path(), "f.json", r#"{"values": ["1", "0", "0"]}"#);
    let out = cubic(&["host-kra", "--system", "zn_shift.json", "--nmax", "2", "--function", "f.json", "--degree", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    let levels: Vec<&Value> = results(&v).iter().filter(|c| c["check_id"] == "host_kra_level").collect();
    assert_eq!(levels[2]["values"]["support_size"], 27);
    let hk = results(&v).iter().find(|c| c["check_id"] == "hk_seminorm").unwrap();
    assert_eq!(hk["values"]["u_norm_pow"], "1/27");
}

#[test]
fn convolution_of_indicators() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "c.json", r#"{"functions": [{"values": ["1", "0"]}, {"values": ["1", "0"]}, {"values": ["1", "0"]}]}"#);
    let out = cubic(&["convolve", "--group", "2", "--functions", "c.json", "--degree", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(results(&report(&out))[0]["values"]["values"], serde_json::json!(["1/4", "0/1"]));
}
