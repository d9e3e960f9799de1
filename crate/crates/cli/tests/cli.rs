use std::f64::consts::SQRT_2;
use std::path::Path;
use std::process::{Command, Output};

use qcspectra::bounds::{exponents, infimum_over_q, Beta};
use qcspectra::plot::{count_cusps, read_boundary};
use serde_json::Value;

fn qcspectra(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcspectra"))
        .args(args)
        .arg("--quiet")
        .env("QCSPECTRA_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn catalog_lists_five_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcspectra(dir.path(), &["catalog", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&dir.path().join("catalog.json"));
    let maps = doc["result"]["maps"].as_array().unwrap();
    let kinds: Vec<&str> = maps.iter().map(|m| m["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["identity", "epicycloid", "ellipse-shear", "rose-petal", "linear-shear"]);
    assert!(maps.iter().all(|m| m["K_formula"].is_string() && m["area_formula"].is_string()));
    let csv = std::fs::read_to_string(dir.path().join("catalog.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn rose_petal_bound_matches_application_display() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcspectra(dir.path(), &["bound", "--domain", "rose-petal", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&dir.path().join("bound.json"))["result"];
    let e = exponents(3.0, Beta::Infinite).unwrap();
    // the display's bracket omits the 2^p carried by q_bracket
    let bracket = infimum_over_q(3.0, e.r, e.q_star).unwrap().value / 8.0;
    let expected = bracket * (2.0 * SQRT_2).powi(3);
    let rhs = r["rhs"].as_f64().unwrap();
    assert!((rhs - expected).abs() < 1e-12 * expected);
    assert!((r["mu_lower"].as_f64().unwrap() * rhs - 1.0).abs() < 1e-14);
    assert_eq!(r["variant"], "measure-preserving-inf");
}

#[test]
fn verify_disc_passes_at_rings_64() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcspectra(dir.path(), &["verify", "--domain", "identity", "--p", "4", "--rings", "64"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&dir.path().join("verify.json"))["result"];
    assert_eq!(r["status"], "pass");
    assert_eq!(r["convex"]["holds"], true);
    assert_eq!(r["numeric"]["trace_monotone"], true);
}

#[test]
fn from_json_reproduces_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let first = qcspectra(
        dir.path(),
        &["verify", "--domain", "ellipse-shear:a=1", "--p", "3", "--rings", "12", "--variant", "quasidisc"],
    );
    assert_eq!(first.status.code(), Some(0));
    let saved = dir.path().join("verify.json");
    let again = qcspectra(dir.path(), &["--from-json", saved.to_str().unwrap(), "--name", "again"]);
    assert_eq!(again.status.code(), Some(0));
    let (a, b) = (json(&saved), json(&dir.path().join("again.json")));
    assert_eq!(serde_json::to_string(&a["result"]).unwrap(), serde_json::to_string(&b["result"]).unwrap());
    let ln = a["result"]["slack_ratio"]["ln"].as_f64().unwrap();
    assert!(ln > 1000.0);
}

#[test]
fn toml_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "command = \"eigen\"\ndomain = \"epicycloid:A=2,B=1,n=3\"\np = 3.0\nrings = 6\n\n[output]\nname = \"epi\"\n",
    )
    .unwrap();
    let out = qcspectra(dir.path(), &["--config", cfg.to_str().unwrap(), "eigen", "--rings", "8", "--mesh", "--csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&dir.path().join("epi.json"));
    assert_eq!(doc["config"]["rings"], 8);
    assert!(doc["result"]["mu"].as_f64().unwrap() > 0.0);
    for f in ["epi.mesh.txt", "epi.field.txt", "epi.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("epi.csv")).unwrap();
    assert!(csv.starts_with("x,y,u\n"));
}

#[test]
fn svg_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcspectra(dir.path(), &["norm", "--domain", "epicycloid:A=1,B=0,n=4", "--beta", "2", "--svg"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("norm.svg")).unwrap();
    assert_eq!(count_cusps(&read_boundary(&svg).unwrap()), 3);
    let again = qcspectra(dir.path(), &["norm", "--domain", "epicycloid:A=1,B=0,n=4", "--beta", "2", "--svg", "--name", "b"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(svg, std::fs::read_to_string(dir.path().join("b.svg")).unwrap());
    let r = &json(&dir.path().join("norm.json"))["result"];
    assert!(r["quadrature"]["relative_change"].as_f64().unwrap() < 1e-10);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| qcspectra(dir.path(), args).status.code();
    assert_eq!(code(&["bound", "--domain", "disc", "--p", "3"]), Some(2));
    assert_eq!(code(&["bound", "--domain", "identity", "--p", "2"]), Some(2));
    assert_eq!(code(&["eigen", "--domain", "identity"]), Some(2));
    assert_eq!(code(&["quasidisc", "--p", "4"]), Some(2));
    assert_eq!(code(&[]), Some(2));
    assert_eq!(
        code(&["eigen", "--domain", "identity", "--p", "3", "--rings", "6", "--max-iter", "1", "--starts", "1"]),
        Some(3)
    );
    // an understated K makes the bound too strong for an elongated ellipse
    assert_eq!(
        code(&["verify", "--domain", "ellipse-shear:a=4", "--p", "4", "--K", "1", "--rings", "12"]),
        Some(1)
    );
    let out = qcspectra(dir.path(), &["norm", "--domain", "identity"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}
