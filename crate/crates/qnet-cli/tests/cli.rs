//! End-to-end tests of the qnet binary against the shipped netlists.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn netlist(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../netlists")
        .join(name)
}

fn qnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn gain_on_identity_network() {
    let path = netlist("identity.qn");
    let out = qnet(&["gain", "-i", path.to_str().unwrap(), "--points", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "omega,g_1_1_are,g_1_1_aim,g_1_1_bre,g_1_1_bim");
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(&fields[1..], &["1", "0", "0", "0"]);
    }
}

#[test]
fn gain_on_feedback_loop() {
    let path = netlist("feedback_loop.qn");
    let out = qnet(&["gain", "-i", path.to_str().unwrap(), "--points", "3"]);
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1], "4");
    }
}

#[test]
fn gain_output_is_deterministic() {
    let path = netlist("splitter_feedback.qn");
    let args = ["gain", "-i", path.to_str().unwrap(), "--points", "50"];
    let a = qnet(&args);
    let b = qnet(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn splitter_feedback_gain_is_all_pass_per_row() {
    let path = netlist("splitter_feedback.qn");
    let out = qnet(&[
        "gain", "-i", path.to_str().unwrap(), "--points", "100", "--wmin", "0.1", "--wmax", "10",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 101);
    for line in &lines[1..] {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let magnitude = (f[1] * f[1] + f[2] * f[2] + f[3] * f[3] + f[4] * f[4]).sqrt();
        assert!((magnitude - 1.0).abs() < 1e-9, "|G| = {magnitude} at omega = {}", f[0]);
    }
}

#[test]
fn bad_sweep_flags_exit_4() {
    let path = netlist("identity.qn");
    let out = qnet(&["gain", "-i", path.to_str().unwrap(), "--wmin", "0", "--scale", "log"]);
    assert_eq!(out.status.code(), Some(4));
    let out = qnet(&["gain", "-i", path.to_str().unwrap(), "--points", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let out = qnet(&["gain", "-i", path.to_str().unwrap(), "--wmin", "5", "--wmax", "2"]);
    assert_eq!(out.status.code(), Some(4));
    let out = qnet(&["gain", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn parse_errors_exit_2_with_code_and_span() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.qn");
    std::fs::write(&path, "node a width 1\narc a -> b gain [d(1,0,0,0)]\n").unwrap();
    let out = qnet(&["gain", "-i", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("error[unresolved]"), "stderr: {err}");
    assert!(err.contains("line 2"), "stderr: {err}");
}

#[test]
fn check_unitarity_passes_and_fails() {
    let eq = netlist("twobath_eq.qn");
    let out = qnet(&["check-unitarity", "-i", eq.to_str().unwrap(), "--tol", "1e-9"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS"));

    let neq = netlist("twobath_neq.qn");
    let out = qnet(&["check-unitarity", "-i", neq.to_str().unwrap(), "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));

    let id = netlist("identity.qn");
    let out = qnet(&["check-unitarity", "-i", id.to_str().unwrap(), "--tol", "1e-12"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("max defect 0.000000e0"));
}

#[test]
fn classify_active_cavity() {
    let path = netlist("active.qn");
    let out = qnet(&["classify", "-i", path.to_str().unwrap(), "--system", "amp"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("squeezed"), "table: {text}");
    let line = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = line.split(',').collect();
    let a: f64 = fields[1].parse().unwrap();
    let c: f64 = fields[2].parse().unwrap();
    assert!(a.abs() < 1e-10);
    assert!((c - 0.64).abs() < 1e-10);
}

#[test]
fn riegle_vs_solve_on_two_bath() {
    let path = netlist("two_bath.qn");
    let out = qnet(&[
        "riegle-vs-solve", "-i", path.to_str().unwrap(), "--samples", "100", "--seed", "42",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let dev: f64 = text
        .split("max deviation ")
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(dev < 1e-9, "deviation {dev}");
    // deterministic given the seed
    let again = qnet(&[
        "riegle-vs-solve", "-i", path.to_str().unwrap(), "--samples", "100", "--seed", "42",
    ]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn simulate_emits_state_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sim.csv");
    let path = netlist("cavity.qn");
    let out = qnet(&[
        "simulate",
        "-i",
        path.to_str().unwrap(),
        "--system",
        "cav",
        "--dt",
        "0.002",
        "--T",
        "40",
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,x1_are,x1_aim,x1_bre,x1_bim,win1_are,win1_aim,win1_bre,win1_bim,wout1_are,wout1_aim,wout1_bre,wout1_bim"
    );
    assert_eq!(lines.count(), 20_001);
}

/// The spectrum of a simulated run must reproduce the swept gain: the two
/// subcommands cross-check each other.
#[test]
fn simulate_spectrum_matches_gain_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let sim_csv = dir.path().join("sim.csv");
    let gain_csv = dir.path().join("gain.csv");
    let path = netlist("cavity.qn");
    let out = qnet(&[
        "simulate",
        "-i",
        path.to_str().unwrap(),
        "--system",
        "cav",
        "--dt",
        "0.002",
        "--T",
        "80",
        "--pulse-center",
        "8",
        "-o",
        sim_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = qnet(&[
        "gain",
        "-i",
        path.to_str().unwrap(),
        "--wmin",
        "0.5",
        "--wmax",
        "4",
        "--points",
        "4",
        "--scale",
        "linear",
        "-o",
        gain_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    // columns: t, x1 (4), win1 (4), wout1 (4)
    let sim: Vec<Vec<f64>> = std::fs::read_to_string(&sim_csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let dt = sim[1][0] - sim[0][0];
    let transform = |col_re: usize, col_im: usize, w: f64| -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, row) in sim.iter().enumerate() {
            let weight = if i == 0 || i == sim.len() - 1 { 0.5 } else { 1.0 };
            let phase = -w * row[0];
            let (s, c) = phase.sin_cos();
            re += weight * (row[col_re] * c - row[col_im] * s) * dt;
            im += weight * (row[col_re] * s + row[col_im] * c) * dt;
        }
        (re, im)
    };
    for line in std::fs::read_to_string(&gain_csv).unwrap().lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let w = f[0];
        let (in_re, in_im) = transform(5, 6, w);
        let (out_re, out_im) = transform(9, 10, w);
        let den = in_re * in_re + in_im * in_im;
        let ratio_re = (out_re * in_re + out_im * in_im) / den;
        let ratio_im = (out_im * in_re - out_re * in_im) / den;
        let err = ((ratio_re - f[1]).powi(2) + (ratio_im - f[2]).powi(2)).sqrt();
        assert!(err < 1e-3, "spectrum vs sweep differ by {err} at omega = {w}");
    }
}
