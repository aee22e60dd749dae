use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_rainskit");

const PHI2: &str = r#"{"dims":[2,2],"matrix":[
 [[0.5,0],[0,0],[0,0],[0.5,0]],
 [[0,0],[0,0],[0,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0]],
 [[0.5,0],[0,0],[0,0],[0.5,0]]]}"#;

/// |0⟩⟨0| ⊗ |+⟩⟨+|
const PRODUCT: &str = r#"{"dims":[2,2],"matrix":[
 [[0.5,0],[0.5,0],[0,0],[0,0]],
 [[0.5,0],[0.5,0],[0,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0]]]}"#;

const IDENTITY: &str = r#"{"kind":"kraus","dim_in":2,"dim_out":2,"data":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;

/// Pauli Kraus operators scaled by 1/2.
const FULLY_DEPOLARIZING: &str = r#"{"kind":"kraus","dim_in":2,"dim_out":2,"data":[
 [[[0.5,0],[0,0]],[[0,0],[0.5,0]]],
 [[[0,0],[0.5,0]],[[0.5,0],[0,0]]],
 [[[0,0],[0,-0.5]],[[0,0.5],[0,0]]],
 [[[0.5,0],[0,0]],[[0,0],[-0.5,0]]]]}"#;

const FULLY_DEPOLARIZING_CHOI: &str = r#"{"kind":"choi","dim_in":2,"dim_out":2,"data":[
 [[0.5,0],[0,0],[0,0],[0,0]],
 [[0,0],[0.5,0],[0,0],[0,0]],
 [[0,0],[0,0],[0.5,0],[0,0]],
 [[0,0],[0,0],[0,0],[0.5,0]]]}"#;

/// Every input goes to the flag state |2⟩.
const ERASURE_ONE: &str = r#"{"kind":"kraus","dim_in":2,"dim_out":3,"data":[
 [[[0,0],[0,0]],[[0,0],[0,0]],[[1,0],[0,0]]],
 [[[0,0],[0,0]],[[0,0],[0,0]],[[0,0],[1,0]]]]}"#;

struct Scratch {
    dir: TempDir,
}

impl Scratch {
    fn new() -> Self {
        Scratch { dir: TempDir::new().unwrap() }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

fn run(args: &[&str]) -> Output {
    run_env(args, None)
}

fn run_env(args: &[&str], tol: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("RAINSKIT_TOL").env("RUST_LOG", "off");
    if let Some(t) = tol {
        cmd.env("RAINSKIT_TOL", t);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn log2_value(args: &[&str]) -> f64 {
    json(&run(args))["log2_value"].as_f64().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# rainskit-csv v1"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn maximally_entangled_state() {
    let s = Scratch::new();
    let f = s.file("phi.json", PHI2);
    assert!((log2_value(&["state-rains", p(&f)]) - 1.0).abs() < 1e-6);
    assert!((log2_value(&["state-emax", p(&f)]) - 1.0).abs() < 1e-6);
    let doc = json(&run(&["state-rains", p(&f)]));
    let [lo, hi] = [0, 1].map(|i| doc["certificate_interval"][i].as_f64().unwrap());
    let value = doc["value"].as_f64().unwrap();
    assert!(lo <= value && value <= hi && hi - lo < 1e-6);
}

#[test]
fn product_state_is_zero() {
    let s = Scratch::new();
    let f = s.file("prod.json", PRODUCT);
    assert!(log2_value(&["state-rains", p(&f)]).abs() < 1e-6);
    assert!(log2_value(&["state-emax", "--mode", "exact", p(&f)]).abs() < 1e-6);
}

#[test]
fn truncated_input_exits_one_with_position() {
    let s = Scratch::new();
    let f = s.file("bad.json", &PHI2[..60]);
    let out = run(&["state-rains", p(&f)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json: line 3, column 3: EOF"), "{err}");
}

#[test]
fn malformed_shapes_exit_one() {
    let s = Scratch::new();
    let f = s.file("c.json", r#"{"kind":"kraus","dim_in":2,"dim_out":2,"data":[[[[1,0]]]]}"#);
    assert_eq!(run(&["channel-rains", p(&f)]).status.code(), Some(1));
    let f = s.file("s.json", r#"{"dims":[3],"matrix":[[[1,0]]]}"#);
    assert_eq!(run(&["state-rains", p(&f)]).status.code(), Some(1));
    assert_eq!(run(&["state-rains", "/nonexistent/state.json"]).status.code(), Some(1));
}

#[test]
fn identity_channel() {
    let s = Scratch::new();
    let f = s.file("id.json", IDENTITY);
    assert!((log2_value(&["channel-rains", p(&f)]) - 1.0).abs() < 1e-6);
    assert!((log2_value(&["channel-emax", p(&f)]) - 1.0).abs() < 1e-6);
    assert!((log2_value(&["qtheta", p(&f)]) - 1.0).abs() < 1e-6);
}

#[test]
fn useless_channels_are_zero() {
    let s = Scratch::new();
    for (name, text) in [
        ("dep.json", FULLY_DEPOLARIZING),
        ("dep_choi.json", FULLY_DEPOLARIZING_CHOI),
        ("erasure.json", ERASURE_ONE),
    ] {
        let f = s.file(name, text);
        for cmd in ["channel-rains", "qtheta", "channel-emax"] {
            let v = log2_value(&[cmd, p(&f)]);
            assert!(v.abs() < 1e-6, "{cmd} {name}: {v}");
        }
    }
}

#[test]
fn erasure_sweep() {
    let out = run(&["--format", "csv", "sweep", "--family", "erasure", "--grid", "0,0.5,1"]);
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["family", "param", "r_max", "e_max", "q_theta", "converse_fidelity_ceiling"]);
    let r: Vec<f64> = rows[1..].iter().map(|row| row[2].parse().unwrap()).collect();
    assert!((r[0] - 1.0).abs() < 1e-6);
    assert!(r[1] > 0.0 && r[1] < 1.0);
    assert!(r[2].abs() < 1e-6);
    // Qubit erasure: log₂(2 − p).
    assert!((r[1] - 1.5f64.log2()).abs() < 1e-6);
    assert!(r.windows(2).all(|w| w[1] <= w[0] + 1e-6));
}

#[test]
fn depolarizing_endpoints_and_dephasing_ordering() {
    let rows = csv_rows(&run(&["--format", "csv", "sweep", "--family", "depolarizing", "--grid", "0,1"]));
    assert!((rows[1][2].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
    assert!(rows[2][2].parse::<f64>().unwrap().abs() < 1e-6);
    let rows = csv_rows(&run(&["--format", "csv", "sweep", "--family", "dephasing"]));
    assert_eq!(rows.len(), 12);
    for row in &rows[1..] {
        assert!(row[2].parse::<f64>().unwrap() <= 1.0 + 1e-6);
    }
}

#[test]
fn sweep_input_errors() {
    assert_eq!(run(&["sweep", "--family", "teleporter"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--family", "dephasing", "--dim", "3"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--family", "erasure", "--grid", "1.5"]).status.code(), Some(1));
}

#[test]
fn outside_exact_gate_leaves_e_max_empty() {
    let rows = csv_rows(&run(&["--format", "csv", "sweep", "--family", "depolarizing", "--dim", "3", "--grid", "1"]));
    assert_eq!(rows[1][3], "");
    assert!(rows[1][2].parse::<f64>().unwrap().abs() < 1e-6);
}

#[test]
fn converse_examples() {
    let c = json(&run(&["converse", "--n", "1", "--m", "2", "--epsilon", "0", "--r-max", "1"]));
    assert_eq!(c["bound_holds"], true);
    assert_eq!(c["fidelity_ceiling"].as_f64(), Some(1.0));
    // M = 2¹² over 10 uses is a qubit rate of 1.2.
    let c = json(&run(&["converse", "--n", "10", "--m", "4096", "--epsilon", "0", "--r-max", "1"]));
    assert!((c["qubit_rate"].as_f64().unwrap() - 1.2).abs() < 1e-12);
    assert!((c["fidelity_ceiling"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(c["bound_holds"], false);
    let c = json(&run(&["converse", "--n", "4", "--m", "32", "--epsilon", "0.5", "--r-max", "1"]));
    assert_eq!(c["bound_holds"], true);
    assert_eq!(run(&["converse", "--n", "1", "--m", "2", "--epsilon", "1", "--r-max", "1"]).status.code(), Some(1));
}

#[test]
fn converse_from_channel_file() {
    let s = Scratch::new();
    let f = s.file("id.json", IDENTITY);
    let c = json(&run(&["converse", "--n", "1", "--m", "2", "--epsilon", "0", "--channel", p(&f)]));
    assert!((c["r_max"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(c["bound_holds"], true);
}

#[test]
fn protocol_transcripts() {
    let s = Scratch::new();
    let f = s.file("id.json", IDENTITY);
    let t = json(&run(&["protocol", "--channel", p(&f), "--kind", "teleportation"]));
    assert!((t["r_final"].as_f64().unwrap() - 1.0).abs() < 1e-5);
    assert_eq!(t["passed"], true);
    let r = json(&run(&["--seed", "3", "protocol", "--channel", p(&f), "--rounds", "2"]));
    assert_eq!(r["passed"], true);
    assert!(r["r_final"].as_f64().unwrap() <= 2.0 * r["r_channel"].as_f64().unwrap() + 1e-5);
    let d = json(&run(&["protocol", "--channel", p(&f), "--kind", "degenerate", "--rounds", "3"]));
    assert!(d["r_final"].as_f64().unwrap().abs() < 1e-6);
    assert_eq!(run(&["protocol", "--channel", p(&f), "--rounds", "5"]).status.code(), Some(1));
}

#[test]
fn amortization_campaign_passes() {
    let out = run(&["--seed", "11", "verify-amortization", "--trials", "6"]);
    let doc = json(&out);
    assert_eq!(doc["summary"]["passed"].as_u64(), Some(6));
    assert_eq!(doc["instances"].as_array().unwrap().len(), 6);
    for (k, inst) in doc["instances"].as_array().unwrap().iter().enumerate() {
        assert_eq!(inst["instance"].as_u64(), Some(k as u64));
        assert!(inst["margin"].as_f64().unwrap() >= -1e-6 * inst["scale"].as_f64().unwrap());
    }
    // B′ trivial: the channel quantity bounds the output state quantity.
    let doc = json(&run(&["verify-amortization", "--trials", "1", "--dims", "2,2,1,2"]));
    assert!(doc["instances"][0]["margin"].as_f64().unwrap() >= -1e-6);
}

#[test]
fn amortization_desk_gate() {
    assert_eq!(run(&["verify-amortization", "--dims", "3,3,3,3"]).status.code(), Some(1));
    assert_eq!(run(&["verify-amortization", "--dims", "2,2"]).status.code(), Some(1));
    assert_eq!(run(&["verify-amortization", "--trials", "0"]).status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let s = Scratch::new();
    let out = s.dir.path().join("a.json");
    let args = ["--seed", "5", "--out", p(&out), "verify-amortization", "--trials", "4"];
    assert!(run(&args).status.success());
    let first = std::fs::read(&out).unwrap();
    assert!(run(&args).status.success());
    assert_eq!(first, std::fs::read(&out).unwrap());
    let sweep = ["--format", "csv", "sweep", "--family", "amplitude-damping"];
    assert_eq!(run(&sweep).stdout, run(&sweep).stdout);
}

#[test]
fn tolerance_from_env_and_flag() {
    let s = Scratch::new();
    let f = s.file("phi.json", PHI2);
    assert_eq!(run_env(&["state-rains", p(&f)], Some("1e-3")).status.code(), Some(1));
    assert!(run_env(&["--tol", "1e-8", "state-rains", p(&f)], Some("1e-3")).status.success());
    assert!(run_env(&["state-rains", p(&f)], Some("1e-7")).status.success());
    assert_eq!(run(&["--tol", "1e-13", "state-rains", p(&f)]).status.code(), Some(1));
}

#[test]
fn reads_stdin() {
    use std::io::Write;
    let mut child = Command::new(BIN)
        .args(["channel-rains", "-"])
        .env_remove("RAINSKIT_TOL")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(IDENTITY.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!((json(&out)["log2_value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}
