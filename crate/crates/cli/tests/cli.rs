use std::path::Path;
use std::process::{Command, Output};

fn hapslink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hapslink"))
        .args(args)
        .env_remove("HAPSLINK_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn capacity_sweep_has_header_and_121_rows() {
    let out = hapslink(&["sweep-capacity"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 122);
    assert_eq!(
        lines[0],
        "x_m,rs_half_bps_hz,rs_opt_bps_hz,alpha_opt,rs_half_degradation,ris_n10000_bps_hz,ris_n30000_bps_hz,ris_n50000_bps_hz"
    );
    assert!(lines[1].starts_with("0.00000000e0,"));
}

#[test]
fn grid_flag_overrides_step() {
    let out = hapslink(&["sweep-ee", "--grid", "10000"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 8);
}

#[test]
fn sequential_and_parallel_outputs_are_identical() {
    for cmd in ["sweep-capacity", "sweep-ee", "sweep-latency"] {
        let a = hapslink(&[cmd]);
        let b = hapslink(&[cmd, "--sequential"]);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn replay_reproduces_frozen_decisions() {
    let expected = std::fs::read_to_string(golden("golden_decisions.csv")).unwrap();
    for _ in 0..2 {
        let out = hapslink(&["replay", &golden("golden_trace.csv")]);
        assert!(out.status.success());
        assert_eq!(stdout(&out), expected);
    }
}

#[test]
fn config_from_environment_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.toml");
    std::fs::write(
        &config,
        "[sweep]\nvariable = \"size_bits\"\nstart = 0.0\nstop = 4.0e6\nstep = 1.0e6\n\n[smbs]\nsweep_cpu_hz = [2.0e9]\n",
    )
    .unwrap();
    let csv = dir.path().join("latency.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_hapslink"))
        .args([
            "sweep-latency",
            "--out",
            csv.to_str().unwrap(),
            "--emit-gnuplot",
        ])
        .env("HAPSLINK_CONFIG", &config)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("size_bits,smbs_fh_2e9_s,rs_s,ris_s")
    );
    assert_eq!(text.lines().count(), 6);
    let script = std::fs::read_to_string(dir.path().join("latency.gp")).unwrap();
    assert!(script.contains("'latency.csv' using 1:4"));
}

#[test]
fn invalid_input_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[ris]\nbeta = 1.5\n").unwrap();
    let out = hapslink(&["sweep-capacity", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ris.beta"));

    assert_eq!(hapslink(&["sweep-latency"]).status.code(), Some(0));
    assert_eq!(
        hapslink(&["sweep-capacity", "--grid", "-5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        hapslink(&["select", "--objective", "fastest"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        hapslink(&["replay", "/nonexistent/trace.csv"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(hapslink(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        hapslink(&["sweep-ee", "--emit-gnuplot"]).status.code(),
        Some(1)
    );
}

#[test]
fn select_reports_decision_and_infeasibility() {
    let out = hapslink(&[
        "select",
        "--objective",
        "max_energy_efficiency",
        "--size",
        "1e6",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    assert!(
        row.starts_with("0.00000000e0,communication,RIS,forward_via_gateway,"),
        "{row}"
    );

    let out = hapslink(&["select", "--objective", "min_energy", "--qos", "1e12"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains(",infeasible,"));

    let out = hapslink(&["select", "--kind", "task_offloading", "--size", "1e6"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains(",SMBS,compute_onboard,"));
}
