//! End-to-end tests of the `sddsim` binary: exit codes, artifact shapes,
//! and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sddsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sddsim"))
        .args(args)
        .output()
        .expect("binary invocation")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_trajectory_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "short.cfg",
        "[integration]\nhorizon = 1.0\n\n[output]\ncoefficients = true\n",
    );
    let out_dir = dir.path().join("artifacts");
    let out = sddsim(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));

    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,norm_l2,norm_h1,eta,f_norm,g_1,"));
    assert!(header.ends_with(",g_16"));
    // 64 steps per unit horizon plus the initial node
    assert_eq!(lines.clone().count(), 65);

    // norms must be consistent with the coefficients they sit next to
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 5 + 16);
        let norm: f64 = cols[5..].iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(
            (norm - cols[1]).abs() <= 1e-12 * (1.0 + cols[1]),
            "norm column disagrees with coefficients: {line}"
        );
    }

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("run.json")).unwrap()).unwrap();
    assert_eq!(meta["nodes"], serde_json::json!(65));
    assert!(meta["config"]
        .as_str()
        .unwrap()
        .contains("coefficients = true"));
}

#[test]
fn config_errors_exit_one_and_cite_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "[delay]\nwrongkey = 1\n");
    let out = sddsim(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("wrongkey"), "{err}");

    let cfg = write_cfg(
        dir.path(),
        "support.cfg",
        "[delay]\nlaw = constant\neta0 = 0.95\neps0 = 0.125\n",
    );
    let out = sddsim(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("kernel-support"), "{}", stderr_of(&out));

    // bad usage is also a validation failure, not a crash or an I/O error
    let out = sddsim(&["run", "whatever.cfg", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn override_violating_grid_invariant_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "ok.cfg", "");
    let out = sddsim(&["run", cfg.to_str().unwrap(), "--dt", "0.015"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("integer multiple"), "{}", stderr_of(&out));
}

#[test]
fn missing_config_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = sddsim(&["run", dir.path().join("absent.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unwritable_output_directory_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "short.cfg", "[integration]\nhorizon = 0.5\n");
    let blocker = dir.path().join("blocked");
    std::fs::write(&blocker, "a file, not a directory").unwrap();
    let out = sddsim(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
}

#[test]
fn strict_check_failure_exits_two_and_lenient_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    // a perturbation far outside the linear-response regime destabilizes
    // the fitted exponent ladder, so the check fails honestly
    let cfg = write_cfg(dir.path(), "pair.cfg", "[integration]\nhorizon = 4.0\n");
    let out_dir = dir.path().join("arts");
    let strict = sddsim(&[
        "pair",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--delta",
        "4.0",
        "--strict",
    ]);
    assert_eq!(strict.status.code(), Some(2), "{}", stderr_of(&strict));

    let lenient = sddsim(&[
        "pair",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--delta",
        "4.0",
    ]);
    assert_eq!(lenient.status.code(), Some(0), "{}", stderr_of(&lenient));

    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("pair_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["all_passed"], serde_json::json!(false));
}

#[test]
fn verify_passes_on_the_reference_scenario() {
    let dir = tempfile::tempdir().unwrap();
    // horizon 6 keeps the dissipativity window while staying quick
    let cfg = write_cfg(dir.path(), "ref.cfg", "[integration]\nhorizon = 6.0\n");
    let out_dir = dir.path().join("arts");
    let out = sddsim(&[
        "verify",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--strict",
        "--plot-data",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));

    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("verify_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["all_passed"], serde_json::json!(true));
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 7);
    let names: Vec<&str> = checks
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for expected in [
        "energy-growth",
        "dissipativity",
        "continuous-dependence",
        "kernel-averaging",
        "distributed-to-discrete-limit",
        "rhs-uniform-bound",
        "kernel-hypotheses",
    ] {
        assert!(names.contains(&expected), "missing check {expected}");
    }
    assert!(report["config"].as_str().unwrap().contains("[delay]"));
    for artifact in ["divergence_1.csv", "averaging_errors.csv", "sweep_n.csv"] {
        assert!(out_dir.join(artifact).exists(), "missing {artifact}");
    }
}

#[test]
fn sweep_n_rejects_degenerate_range_and_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "ref.cfg", "[integration]\nhorizon = 2.0\n");
    let out = sddsim(&["sweep-n", cfg.to_str().unwrap(), "--n-max", "1"]);
    assert_eq!(out.status.code(), Some(1));

    let out_dir = dir.path().join("arts");
    let out = sddsim(&[
        "sweep-n",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--n-max",
        "3",
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = std::fs::read_to_string(out_dir.join("sweep_n.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "epsilon,error");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    // widths halve and deviations shrink with them
    for w in rows.windows(2) {
        assert!((w[1][0] - w[0][0] / 2.0).abs() < 1e-15);
        assert!(w[1][1] < w[0][1]);
    }
}

#[test]
fn attractor_reports_absorption_and_attraction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "ref.cfg", "");
    let out_dir = dir.path().join("arts");
    let out = sddsim(&[
        "attractor",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--ensemble",
        "2",
        "--seed",
        "11",
        "--strict",
        "--plot-data",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));

    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("attractor_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["all_passed"], serde_json::json!(true));
    let names: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, vec!["absorbing-ball", "attraction-surrogate"]);

    let tails = std::fs::read_to_string(out_dir.join("absorbing_tails.csv")).unwrap();
    assert!(tails.starts_with("label,order,kernel_index,amplitude,tail_norm,entry_time\n"));
    assert_eq!(tails.lines().count(), 3);
    let distances = std::fs::read_to_string(out_dir.join("attraction_distances.csv")).unwrap();
    assert!(distances.starts_with("shift,member_1,member_2\n"));
}

#[test]
fn artifacts_are_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "ref.cfg", "[integration]\nhorizon = 6.0\n");
    let mut snapshots: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for tag in ["a", "b"] {
        let out_dir = dir.path().join(tag);
        let out = sddsim(&[
            "verify",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "42",
            "--plot-data",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().into_string().unwrap(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0].len(), snapshots[1].len());
    for (a, b) in snapshots[0].iter().zip(&snapshots[1]) {
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1, "artifact {} differs between reruns", a.0);
    }
}

/// Final coefficient vector of a trajectory CSV written with
/// `coefficients = true`.
fn final_coeffs(csv_path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(csv_path).unwrap();
    let last = text.lines().last().unwrap();
    last.split(',').skip(5).map(|c| c.parse().unwrap()).collect()
}

fn l2_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn halving_dt_roughly_halves_the_terminal_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "conv.cfg",
        "[integration]\nhorizon = 1.0\n\n[output]\ncoefficients = true\n",
    );
    let mut finals = Vec::new();
    for (tag, dt) in [
        ("h", "0.015625"),
        ("h2", "0.0078125"),
        ("ref", "0.000244140625"),
    ] {
        let out_dir = dir.path().join(tag);
        let out = sddsim(&[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--dt",
            dt,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
        finals.push(final_coeffs(&out_dir.join("trajectory.csv")));
    }
    let e1 = l2_gap(&finals[0], &finals[2]);
    let e2 = l2_gap(&finals[1], &finals[2]);
    let ratio = e2 / e1;
    assert!(
        (ratio - 0.5).abs() <= 0.125,
        "terminal error ratio {ratio} not within 0.5 ± 0.125 (e1 = {e1:.3e}, e2 = {e2:.3e})"
    );
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(sddsim(&["--help"]).status.code(), Some(0));
    assert_eq!(sddsim(&["--version"]).status.code(), Some(0));
    assert_eq!(sddsim(&["run", "--help"]).status.code(), Some(0));
}
