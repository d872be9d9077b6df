//! End-to-end runs of the `vbchain` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TWO_STATE: &str = "VBK1\n2\n0.6666666666666666 0.3333333333333333\n0.7 0.3\n0.6 0.4\n";
const IDENTITY: &str = "VBK1\n3\n0.2 0.3 0.5\n1 0 0\n0 1 0\n0 0 1\n";

fn vbchain(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vbchain"))
        .current_dir(dir)
        .env_remove("VBCHAIN_SEED")
        .args(args)
        .output()
        .expect("spawn vbchain")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("two.vbk"), TWO_STATE).unwrap();
    fs::write(dir.path().join("identity.vbk"), IDENTITY).unwrap();
    fs::write(dir.path().join("h2.txt"), "1 -2\n").unwrap();
    dir
}

/// Column `name` of the first data row.
fn field(csv: &str, name: &str) -> String {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header
        .iter()
        .position(|h| *h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    row[i].to_string()
}

#[test]
fn analyze_two_state() {
    let dir = workspace();
    let out = stdout(&vbchain(dir.path(), &["analyze", "two.vbk"]));
    assert!(out.starts_with("n,Lambda,lambda_min,K_bound,variance_bounding,"));
    let lambda: f64 = field(&out, "Lambda").parse().unwrap();
    assert!((lambda - 0.1).abs() < 1e-12, "{out}");
    let lmin: f64 = field(&out, "lambda_min").parse().unwrap();
    assert!((lmin - 0.1).abs() < 1e-12, "{out}");
    let k: f64 = field(&out, "K_bound").parse().unwrap();
    assert!((k - 2.0 / 0.9).abs() < 1e-12, "{out}");
    assert_eq!(field(&out, "variance_bounding"), "true");
}

#[test]
fn analyze_identity_is_not_variance_bounding() {
    let dir = workspace();
    let out = stdout(&vbchain(dir.path(), &["analyze", "identity.vbk"]));
    assert_eq!(field(&out, "Lambda"), "1");
    assert_eq!(field(&out, "K_bound"), "inf");
    assert_eq!(field(&out, "variance_bounding"), "false");
    assert_eq!(field(&out, "reducible"), "true");
}

#[test]
fn exit_codes() {
    let dir = workspace();
    let usage = vbchain(dir.path(), &["analyze"]);
    assert_eq!(usage.status.code(), Some(2));
    let unknown = vbchain(dir.path(), &["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));

    let missing = vbchain(dir.path(), &["analyze", "nope.vbk"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.vbk"));

    fs::write(dir.path().join("bad.vbk"), "VBK1\n2\n0.5 0.5\n0.9 0.1\n0.5 0.5\n").unwrap();
    let bad = vbchain(dir.path(), &["analyze", "bad.vbk"]);
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8(bad.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(bad.stdout.is_empty());

    fs::write(dir.path().join("trail.vbk"), format!("{TWO_STATE}0.1\n")).unwrap();
    assert_eq!(vbchain(dir.path(), &["analyze", "trail.vbk"]).status.code(), Some(1));
}

#[test]
fn tolerance_override() {
    let dir = workspace();
    // stationary law off by 1e-7: reversible only at a looser tolerance
    fs::write(
        dir.path().join("loose.vbk"),
        "VBK1\n2\n0.6666667666666666 0.3333332333333333\n0.7 0.3\n0.6 0.4\n",
    )
    .unwrap();
    assert_eq!(vbchain(dir.path(), &["analyze", "loose.vbk"]).status.code(), Some(1));
    let ok = vbchain(dir.path(), &["--tol", "1e-6", "analyze", "loose.vbk"]);
    assert_eq!(field(&stdout(&ok), "n"), "2");
    assert_eq!(
        vbchain(dir.path(), &["--tol", "-1", "analyze", "two.vbk"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn variance_report() {
    let dir = workspace();
    let out = stdout(&vbchain(
        dir.path(),
        &["variance", "two.vbk", "h2.txt", "--horizons", "1,1e3"],
    ));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,var");
    assert!(lines[1].starts_with("1,"));
    assert!(lines[2].starts_with("1000,"));
    assert_eq!(lines[3], "var_pi,v_exact,ratio,K_bound");
    // single mean-zero eigenvalue 0.1, so v = var_pi * 1.1 / 0.9
    let summary: Vec<f64> = lines[4].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((summary[0] - 2.0).abs() < 1e-12);
    assert!((summary[2] - 1.1 / 0.9).abs() < 1e-12);
}

#[test]
fn example9_files_and_ordering() {
    let dir = workspace();
    let out = vbchain(dir.path(), &["example9", "--N", "25", "--out-prefix", "pair"]);
    stdout(&out);
    for f in ["pair_p1.vbk", "pair_p2.vbk", "pair_compare.csv"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let csv = fs::read_to_string(dir.path().join("pair_compare.csv")).unwrap();
    assert_eq!(field(&csv, "N"), "25");
    assert_eq!(field(&csv, "dominates"), "true");

    let cmp = stdout(&vbchain(
        dir.path(),
        &["compare", "pair_p1.vbk", "pair_p2.vbk", "--functionals", "5"],
    ));
    assert_eq!(field(&cmp, "dominates"), "true");
    let a = stdout(&vbchain(dir.path(), &["analyze", "pair_p1.vbk"]));
    assert_eq!(field(&a, "near_periodic"), "true");
}

#[test]
fn mh_build_writes_a_reversible_kernel() {
    let dir = workspace();
    fs::write(dir.path().join("t.txt"), "1 2 3\n").unwrap();
    fs::write(dir.path().join("q.vbq"), "VBQ1\n3\n0 0.5 0.5\n0.5 0 0.5\n0.5 0.5 0\n").unwrap();
    let out = stdout(&vbchain(dir.path(), &["mh-build", "t.txt", "q.vbq", "-o", "m.vbk"]));
    assert_eq!(field(&out, "n"), "3");
    let residual: f64 = field(&out, "db_residual").parse().unwrap();
    assert!(residual <= 1e-12);
    let a = stdout(&vbchain(dir.path(), &["analyze", "m.vbk"]));
    assert_eq!(field(&a, "variance_bounding"), "true");
}

#[test]
fn simulate_is_reproducible_and_reads_env_seed() {
    let dir = workspace();
    let args = ["simulate", "two.vbk", "--n", "500", "--seed", "7"];
    let a = stdout(&vbchain(dir.path(), &args));
    let b = stdout(&vbchain(dir.path(), &args));
    assert_eq!(a, b);
    assert!(a.starts_with("# "));
    assert_eq!(a.lines().count(), 1 + 1 + 500);

    let env = Command::new(env!("CARGO_BIN_EXE_vbchain"))
        .current_dir(dir.path())
        .env("VBCHAIN_SEED", "7")
        .args(["simulate", "two.vbk", "--n", "500"])
        .output()
        .unwrap();
    assert_eq!(stdout(&env), a);
    let other = stdout(&vbchain(
        dir.path(),
        &["simulate", "two.vbk", "--n", "500", "--seed", "8"],
    ));
    assert_ne!(other, a);

    let trace: PathBuf = dir.path().join("trace.csv");
    stdout(&vbchain(
        dir.path(),
        &[
            "simulate",
            "--example9",
            "p2",
            "--n",
            "100",
            "--start",
            "-3",
            "--out",
            "trace.csv",
        ],
    ));
    let text = fs::read_to_string(trace).unwrap();
    assert!(text.lines().nth(2).unwrap().ends_with(",-3"), "{text}");
}

#[test]
fn clt_report_is_reproducible() {
    let dir = workspace();
    let args = [
        "clt",
        "two.vbk",
        "h2.txt",
        "--n",
        "2000",
        "--replicates",
        "60",
        "--seed",
        "3",
    ];
    let a = stdout(&vbchain(dir.path(), &args));
    assert_eq!(a, stdout(&vbchain(dir.path(), &args)));
    let z: f64 = field(&a, "z_score").parse().unwrap();
    assert!(z.abs() < 4.0, "{a}");
    assert_eq!(field(&a, "diverging"), "false");
}

#[test]
fn rejection_probe_and_increment_density() {
    let dir = workspace();
    let out = stdout(&vbchain(
        dir.path(),
        &["probe-rejection", "--b", "3", "--x", "1,1e4", "--samples", "2000"],
    ));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x,rejection,se");
    assert_eq!(lines.len(), 3);
    let far: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!(far > 0.9, "{out}");

    let out = stdout(&vbchain(
        dir.path(),
        &["increment-density", "--a", "0.5", "--x", "100", "--grid", "-1:1:0.5"],
    ));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "w,density,limit_density");
    assert_eq!(lines.len(), 6);
}

#[test]
fn umid_mala_passes() {
    let dir = workspace();
    let out = stdout(&vbchain(dir.path(), &["check-umid", "--case", "mala", "--delta", "1"]));
    assert!(out.starts_with("check,grid,verdict,witness,value\n"));
    let verdicts: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert!(!verdicts.is_empty());
    assert!(verdicts.iter().all(|v| *v == "true"), "{out}");
}
