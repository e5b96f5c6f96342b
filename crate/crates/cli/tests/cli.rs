use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parabolic")).args(args).current_dir(fixture("")).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let o = run(&all);
    serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

const SUBCOMMANDS: [&str; 8] = ["lattice", "kernel", "closure", "walls", "nef", "classify", "orbit", "dichotomy"];

#[test]
fn help_matches_snapshot() {
    let mut got = stdout(&run(&["--help"]));
    for s in SUBCOMMANDS {
        got.push_str(&format!("\n==== {s} ====\n"));
        got.push_str(&stdout(&run(&[s, "--help"])));
    }
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots/help.txt");
    if std::env::var_os("PARABOLIC_BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    assert_eq!(got, std::fs::read_to_string(&path).unwrap());
}

#[test]
fn unknown_flags_are_rejected() {
    let o = run(&["lattice", "info", "K3", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lattice_info_k3() {
    let o = run(&["lattice", "info", "K3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("rank: 22\n"));
    assert!(text.contains("signature: (3,19)\n"));
    let v = json(&["lattice", "info", "K3"]);
    assert_eq!(v["signature"], serde_json::json!([3, 19]));
}

#[test]
fn kernel_of_sqrt2_class_has_dimension_two() {
    let v = json(&["kernel", "--lattice", "U2.json", "--vector", "u_sqrt2.json"]);
    assert_eq!(v["dim"], 2);
    assert_eq!(v["basis"], serde_json::json!([["1", "0", "0", "0"], ["0", "0", "1", "0"]]));
}

#[test]
fn leaf_density_examples() {
    assert_eq!(json(&["kernel", "--leaf", "leaf_dense.json"])["dense"], true);
    assert_eq!(json(&["kernel", "--leaf", "leaf_closed.json"])["dense"], false);
}

#[test]
fn classify_rational_class_is_inconclusive() {
    let o = run(&["classify", "--setup", "setup_k3_rational.json", "--class", "u_k3_rational.json"]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["classify", "--setup", "setup_k3_rational.json", "--class", "u_k3_bad.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_isometry_and_feed_eigenvector_back() {
    let v = json(&["classify", "--lattice", "UA1.json", "--matrix", "loxodromic.json"]);
    assert_eq!(v["kind"], "loxodromic");
    assert_eq!(v["certificate"]["exact_zero"], true);
    let dir = std::env::temp_dir().join(format!("parabolic-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let eta = dir.join("eta.json");
    std::fs::write(&eta, serde_json::to_string(&v["eta"]).unwrap()).unwrap();
    let k = json(&["kernel", "--lattice", "UA1.json", "--vector", eta.to_str().unwrap()]);
    // η spans a real quadratic direction; its rational kernel is a line.
    assert_eq!(k["dim"], 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn walls_agree_with_oracle_and_round_trip_center() {
    let v = json(&["walls", "--lattice", "UA1.json", "--center", "h110.json", "--bound", "2", "--oracle"]);
    assert_eq!(v["oracle"]["agrees"], true);
    assert_eq!(v["bound"], 2);
    assert_eq!(v["walls"].as_array().unwrap().len(), 6);
    let dir = std::env::temp_dir().join(format!("parabolic-walls-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let c = dir.join("center.json");
    std::fs::write(&c, serde_json::to_string(&v["center"]).unwrap()).unwrap();
    let w = json(&["walls", "--lattice", "UA1.json", "--center", c.to_str().unwrap(), "--bound", "2"]);
    assert_eq!(w["walls"], v["walls"]);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn nef_verdicts() {
    let base = ["nef", "--lattice", "UA1.json", "--ref", "h_ref.json", "--bound", "2", "--class"];
    let mut a = base.to_vec();
    a.push("h_class.json");
    assert_eq!(json(&a)["verdict"]["verdict"], "Nef");
    let mut b = base.to_vec();
    b.push("h_not_nef.json");
    assert_eq!(json(&b)["verdict"]["verdict"], "NotNef");
}

#[test]
fn reports_are_byte_deterministic() {
    let orbit = [
        "--format",
        "json",
        "--seed",
        "2024",
        "orbit",
        "--lattice",
        "UA1.json",
        "--gens",
        "gens.json",
        "--start",
        "eta.json",
        "--target",
        "target.json",
        "--steps",
        "2000",
    ];
    let a = run(&orbit);
    let b = run(&orbit);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.ends_with(b"\n"));
    let cls = [
        "--format",
        "json",
        "classify",
        "--setup",
        "setup_k3_rational.json",
        "--class",
        "u_k3_rational.json",
        "--certificate",
    ];
    assert_eq!(run(&cls).stdout, run(&cls).stdout);
}

#[test]
fn dichotomy_reports_both_traces() {
    let v = json(&[
        "--seed",
        "2024",
        "dichotomy",
        "--lattice",
        "UA1.json",
        "--gens",
        "gens.json",
        "--rational",
        "rational_start.json",
        "--irrational",
        "eta.json",
        "--target",
        "target.json",
        "--steps",
        "1000",
    ]);
    let ri: f64 = v["irrational"]["min_projective_distance"].as_str().unwrap().parse().unwrap();
    let rr: f64 = v["rational"]["min_projective_distance"].as_str().unwrap().parse().unwrap();
    assert!(ri < 1e-2 && rr > ri);
}

#[test]
fn closure_of_rational_class_is_abelian() {
    let out = std::env::temp_dir().join(format!("parabolic-basis-{}.json", std::process::id()));
    let v = json(&[
        "closure",
        "--lattice",
        "K3",
        "--plane",
        "plane_k3_rational.json",
        "--class",
        "u_k3_rational.json",
        "--emit-basis",
        out.to_str().unwrap(),
    ]);
    assert_eq!(v["verdict"], serde_json::json!({"kind": "Proper", "dim": 18}));
    let basis: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(basis["rows"].as_array().unwrap().len(), 18);
    assert_eq!(basis["d"], 22);
    std::fs::remove_file(&out).unwrap();
}
