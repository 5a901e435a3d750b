//! End-to-end checks of the binary surface: output formats, exit codes,
//! CSV schemas.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bowenlab"))
}

fn model(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.pop();
    p.pop();
    p.push("models");
    p.push(name);
    p.to_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn root_prints_nine_decimals() {
    let out = bin()
        .args(["root", "--model", &model("diag23.json"), "--family", "sub", "--tol", "1e-9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out), "alpha0 = 2.000000000\n");
    let out = bin()
        .args(["root", "--model", &model("goldenmean.json"), "--family", "super"])
        .output()
        .unwrap();
    assert_eq!(stdout(&out), "s_star = 0.694241914\n");
}

#[test]
fn entropy_and_lyapunov_formats() {
    let out = bin().args(["entropy", "--model", &model("doubling.json")]).output().unwrap();
    assert_eq!(stdout(&out), "h_top = 0.693147181\n");
    let out = bin().args(["lyapunov", "--model", &model("diag23.json")]).output().unwrap();
    assert_eq!(stdout(&out), "lambda_1 = 1.09861229\nlambda_2 = 0.693147181\n");
    let out = bin()
        .args(["lyapunov", "--model", &model("shear23.json"), "--measure", "lebesgue"])
        .output()
        .unwrap();
    assert_eq!(stdout(&out), "lambda_1 = 1.09861229\nlambda_2 = 0.693147181\n");
}

#[test]
fn avoid_emits_the_documented_schema() {
    let out = bin()
        .args(["avoid", "--model", &model("doubling.json"), "--target", "0", "--depths", "2:4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(
        lines[0],
        "depth,n_states,h_top,lyap_1,s_star,alpha0,eps_n,thmA_bound,thmB_bound"
    );
    assert!(lines[1].starts_with("2,2,0.481211825,0.693147181,0.694241914,0.694241914,"));
    assert!(!text.contains('\r'));
}

#[test]
fn avoid_writes_csv_files_and_checks_theorems() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    let out = bin()
        .args([
            "avoid",
            "--model",
            &model("diag23.json"),
            "--target",
            "0,0",
            "--depths",
            "2:4",
            "--theorem",
            "both",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("depth,n_states,h_top,lyap_1,lyap_2,s_star,"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn pressure_single_and_grid() {
    let out = bin()
        .args([
            "pressure",
            "--model",
            &model("diag23.json"),
            "--family",
            "sub",
            "--s",
            "1.5",
        ])
        .output()
        .unwrap();
    assert_eq!(stdout(&out), "pressure = 0.549306144\n");
    let out = bin()
        .args([
            "pressure",
            "--model",
            &model("doubling.json"),
            "--family",
            "sub",
            "--s-grid",
            "0:1:5",
        ])
        .output()
        .unwrap();
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,pressure_sub,pressure_super");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("1.00000000,0.000000000,0.000000000"));
}

#[test]
fn boxdim_runs_on_affine_models() {
    let out = bin().args(["boxdim", "--model", &model("cantor3.json")]).output().unwrap();
    let text = stdout(&out);
    assert!(text.starts_with("boxdim = 0.63"), "{text}");
}

#[test]
fn selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 11);
}

#[test]
fn failure_exit_codes() {
    // unknown flag -> usage, exit 1
    let out = bin().args(["root", "--nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // missing model file -> exit 1
    let out = bin()
        .args(["entropy", "--model", "/definitely/not/here.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // --s and --s-grid together -> exit 1
    let out = bin()
        .args([
            "pressure",
            "--model",
            &model("doubling.json"),
            "--family",
            "sub",
            "--s",
            "1",
            "--s-grid",
            "0:1:3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // help exits 0
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn avoid_accepts_symbolic_targets() {
    // The golden fixed point sits on a cell boundary; its periodic block
    // names it exactly. Depth 2 forbids 11, leaving the alternating orbit.
    let out = bin()
        .args([
            "avoid",
            "--model",
            &model("goldenmean.json"),
            "--itinerary",
            "1",
            "--depths",
            "2:4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("2,"));
    assert!(rows[1].contains("0.000000000,NaN"), "degenerate row: {}", rows[1]);
    assert!(rows[3].starts_with("4,"));

    // Exactly one target form.
    let out = bin()
        .args([
            "avoid",
            "--model",
            &model("goldenmean.json"),
            "--target",
            "0.5",
            "--itinerary",
            "1",
            "--depths",
            "2:3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin()
        .args(["avoid", "--model", &model("goldenmean.json"), "--depths", "2:3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn avoid_handles_sampled_models() {
    let out = bin()
        .args([
            "avoid",
            "--model",
            &model("perturbed005.json"),
            "--target",
            "0",
            "--depths",
            "2:4",
            "--theorem",
            "a",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    for line in text.lines().skip(1) {
        assert!(!line.contains("NaN"), "unexpected degenerate row: {line}");
    }
}
