//! End-to-end runs of the binary against the bundled operator files, diffed
//! byte-for-byte against the expected artifacts committed under ops/expected/.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use tempfile::TempDir;

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liouville"))
}

fn diff_dim_report(name: &str) {
    let root = workspace_root();
    let dir = TempDir::new().unwrap();
    let status = bin()
        .arg("dim")
        .arg("--op")
        .arg(root.join(format!("ops/{name}.json")))
        .args(["--N-max", "4", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success(), "dim on {name} failed");
    let got = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let want = fs::read_to_string(root.join(format!("ops/expected/{name}/report.json"))).unwrap();
    assert_eq!(got, want, "report.json drifted for {name}");
}

#[test]
fn dim_z1_laplacian_matches_expected() {
    diff_dim_report("z1_laplacian");
}

#[test]
fn dim_z2_laplacian_matches_expected() {
    diff_dim_report("z2_laplacian");
}

#[test]
fn dim_cos_band_matches_expected() {
    diff_dim_report("cos_band");
}

#[test]
fn dim_biharmonic_chain_matches_expected() {
    diff_dim_report("biharmonic_chain");
}

#[test]
fn dim_ssh_dimer_matches_expected() {
    diff_dim_report("ssh_dimer");
}

#[test]
fn dim_drifted_walk_matches_expected() {
    diff_dim_report("drifted_walk");
}

#[test]
fn classify_drifted_walk_matches_expected() {
    let root = workspace_root();
    let dir = TempDir::new().unwrap();
    let status = bin()
        .arg("classify")
        .arg("--op")
        .arg(root.join("ops/drifted_walk.json"))
        .args(["--N-max", "4", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let got = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let want =
        fs::read_to_string(root.join("ops/expected/drifted_walk_classify/report.json")).unwrap();
    assert_eq!(got, want, "classify report drifted");
}

#[test]
fn bands_emits_the_requested_row_count() {
    let root = workspace_root();
    let dir = TempDir::new().unwrap();
    let status = bin()
        .arg("bands")
        .arg("--op")
        .arg(root.join("ops/z1_laplacian.json"))
        .args(["--path", "0;3.141592653589793", "--samples", "17", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# seed=0"));
    assert!(lines.next().unwrap().starts_with("t,"));
    assert_eq!(lines.count(), 17, "two waypoints at 17 samples per segment");
}

#[test]
fn seed_flag_is_recorded_in_the_artifact() {
    let root = workspace_root();
    let dir = TempDir::new().unwrap();
    let status = bin()
        .arg("fermi")
        .arg("--op")
        .arg(root.join("ops/z1_laplacian.json"))
        .args(["--seed", "7", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["command"], "fermi");
}

#[test]
fn malformed_operator_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ this is not json").unwrap();
    let status =
        bin().arg("validate").arg("--op").arg(&bad).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn classify_without_positive_structure_exits_two() {
    let root = workspace_root();
    let dir = TempDir::new().unwrap();
    let status = bin()
        .arg("classify")
        .arg("--op")
        .arg(root.join("ops/cos_band.json"))
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn midband_dim_request_exits_three() {
    let root = workspace_root();
    let dir = TempDir::new().unwrap();
    let output = bin()
        .arg("dim")
        .arg("--op")
        .arg(root.join("ops/z2_laplacian.json"))
        .args(["--shift", "2.0", "--grid", "24", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["verdict"], "hypotheses_fail");
}

#[test]
fn empty_fermi_set_gives_the_zero_table() {
    let root = workspace_root();
    let dir = TempDir::new().unwrap();
    let status = bin()
        .arg("dim")
        .arg("--op")
        .arg(root.join("ops/z1_laplacian.json"))
        .args(["--shift", "-5.0", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["verdict"], "vacuous");
    assert_eq!(report["report"]["d"], serde_json::json!([0, 0, 0, 0, 0]));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let root = workspace_root();
    let mut artifacts = Vec::new();
    for _ in 0..2 {
        let dir = TempDir::new().unwrap();
        let status = bin()
            .arg("local")
            .arg("--op")
            .arg(root.join("ops/ssh_dimer.json"))
            .arg("--out")
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
        artifacts.push(fs::read(dir.path().join("report.json")).unwrap());
    }
    assert_eq!(artifacts[0], artifacts[1]);
}
