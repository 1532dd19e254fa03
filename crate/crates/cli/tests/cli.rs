//! Exit-code contract and end-to-end behavior of the binary.

use std::process::{Command, Output};

fn gqmet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gqmet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(gqmet(&["--help"]).status.code(), Some(0));
    assert_eq!(gqmet(&["--version"]).status.code(), Some(0));
    assert_eq!(gqmet(&["qfi", "--help"]).status.code(), Some(0));
}

#[test]
fn invalid_arguments_exit_one() {
    assert_eq!(gqmet(&[]).status.code(), Some(1));
    assert_eq!(gqmet(&["qfi"]).status.code(), Some(1));
    assert_eq!(gqmet(&["figure", "--id", "fig9"]).status.code(), Some(1));
    assert_eq!(
        gqmet(&["qfi", "--channel", "attenuator", "--estimate", "rg"]).status.code(),
        Some(1)
    );
    // sigma-q without sigma-p
    assert_eq!(
        gqmet(&["qfi", "--channel", "attenuator", "--estimate", "phi", "--sigma-q", "1.2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        gqmet(&["fit", "--input", "/nonexistent/points.csv"]).status.code(),
        Some(1)
    );
    // negative-temperature probe
    assert_eq!(
        gqmet(&["qfi", "--channel", "attenuator", "--estimate", "phi", "--beta", "-1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn probe_bound_violation_exits_two() {
    let out = gqmet(&[
        "qfi", "--channel", "attenuator", "--estimate", "phi", "--sigma-q", "2", "--sigma-p", "2",
        "--nbar", "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = gqmet(&["coherence", "--nbar", "0", "--sigma-q", "1.5", "--sigma-p", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_env_exits_one() {
    let out = Command::new(env!("CARGO_BIN_EXE_gqmet"))
        .env("GQMET_THREADS", "many")
        .args(["table1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn qfi_reference_output() {
    let out = gqmet(&[
        "qfi", "--channel", "attenuator", "--estimate", "phi", "--phi", "0.7853981633974483",
        "--mbar", "0.5", "--beta", "1", "--omega", "1", "--sigma-q", "1", "--sigma-p", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("qfi_closed   = 0.008061088035483697"), "{text}");
    assert!(text.contains("qfi_generic"));
    assert!(text.contains("qfi_bures"));
    assert!(text.contains("max_rel_dev"));
}

#[test]
fn table1_reports_the_mismatch_row() {
    let out = gqmet(&["table1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("MISMATCH"));
    assert!(text.contains("amplifier_rg"));
}

#[test]
fn sweep_honors_config_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("scan.conf");
    std::fs::write(
        &conf,
        "channel = attenuator\nestimate = phi\nscan = phi\nstart = 0\nstop = 1.0\ncount = 4\nmbar = 0.5\n# trailing comment\n",
    )
    .unwrap();
    let out_csv = dir.path().join("scan.csv");
    let out = gqmet(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--count",
        "3",
        "--outputs",
        "closed,eigenprod",
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_csv).unwrap();
    // flag overrode the config count; provenance echoes the resolved values
    assert!(text.contains("# count = 3"));
    assert!(text.contains("# channel = attenuator"));
    assert!(text.contains("phi,qfi_closed,eigen_product,valid"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn figure_fig4_writes_matrix_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = gqmet(&["figure", "--id", "fig4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("fig4_a.csv")).unwrap();
    assert!(text.contains("sigma_q"));
    assert!(text.contains("nan"));
}

#[test]
fn oracle_coherence_check_runs() {
    let out = gqmet(&[
        "oracle", "--check", "coherence", "--sigma-q", "1.2", "--sigma-p", "0.8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("closed form"));
    assert!(text.contains("fock thermal-ref"));
}

#[test]
fn oracle_probe_cov_check_runs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("oracle.csv");
    let out = gqmet(&[
        "oracle", "--check", "probe-cov", "--grid-n", "1024", "--sigma-q", "1.2", "--sigma-p",
        "0.8", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("diverged      = true"));
    let saved = std::fs::read_to_string(&csv).unwrap();
    assert!(saved.contains("sigma11"));
}

#[test]
fn fit_round_trips_figure_output() {
    let dir = tempfile::tempdir().unwrap();
    gqmet(&["figure", "--id", "fig6", "--out", dir.path().to_str().unwrap()]);
    let out = gqmet(&[
        "fit",
        "--input",
        dir.path().join("fig6_a.csv").to_str().unwrap(),
        "--x-col",
        "epsilon",
        "--y-col",
        "qfi_mbar",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("alpha        = 0.299883"), "{text}");
    // column that does not exist
    let bad = gqmet(&[
        "fit",
        "--input",
        dir.path().join("fig6_a.csv").to_str().unwrap(),
        "--y-col",
        "missing",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}
