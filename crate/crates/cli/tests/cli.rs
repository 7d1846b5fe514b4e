use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ionwire::mathieu::solve_floquet;
use ionwire::MathieuParams;
use serde_json::Value;

fn ionwire(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ionwire"))
        .args(args)
        .current_dir(dir)
        .env_remove("IONWIRE_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_stdout(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|f| f.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

const SMALL_ENSEMBLE: &str = r#"
[ensemble]
n_traj = 24
seed = 5
delta_omega = "300 mHz"
samples = 4

[output]
dir = "run"
"#;

#[test]
fn workpoint_black_cross() {
    let dir = tempfile::tempdir().unwrap();
    let o = ionwire(&["workpoint", "--omega-d-ratio", "25", "--Q", "-6.0", "--k", "0"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json_stdout(&o);
    assert_eq!(v["mu"], 0.08);
    assert!((v["A"].as_f64().unwrap() - 7.8847).abs() < 1e-3);
    assert!((v["eta_prime"].as_f64().unwrap() - 1.5219).abs() < 1e-3);
    assert!((v["omega_e_ratio"].as_f64().unwrap() - 35.1).abs() < 1e-2);
    assert!((v["R_k"].as_f64().unwrap() - 111.57).abs() < 1e-2);
}

#[test]
fn workpoint_boundary_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = ionwire(&["workpoint", "--omega-d-ratio", "2", "--Q", "0", "--k", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("boundary"), "{}", stderr(&o));

    let o = ionwire(&["workpoint", "--omega-d-ratio", "4", "--Q", "-0.5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json_stdout(&o);
    let p = MathieuParams::new(v["A"].as_f64().unwrap(), v["Q"].as_f64().unwrap()).unwrap();
    let s = solve_floquet(p, None).unwrap();
    assert!(s.stable);
    assert!((s.mu - 0.5).abs() < 1e-12);
}

#[test]
fn stability_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("grid.toml"),
        "[sweep]\neta = { min = 0.5, max = 1.5, steps = 2 }\nratio = { min = 0.3, max = 1.4, steps = 2 }\n",
    )
    .unwrap();
    let o = ionwire(&["stability", "--config", "grid.toml", "--out", "maps"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("maps/stability_k0.csv"));
    assert_eq!(header, ["eta_prime", "ratio_e_d", "stable", "mu", "R_k", "ratio_e_i"]);
    assert_eq!(rows.len(), 4);
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("maps/stability_k0.json")).unwrap()).unwrap();
    assert_eq!(m["results"]["summary"]["cells"], 4);
    let r0 = m["results"]["working_point_cell"]["r_k"].as_f64().unwrap();
    assert!((r0 - 111.57).abs() < 0.01);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn config_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[wire]\ncapacitance = \"5.5 pH\"\n").unwrap();
    let o = ionwire(&["exchange", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 2") && e.contains("capacitance") && e.contains("pH"), "{e}");

    fs::write(dir.path().join("typo.toml"), "[ensemble]\nntraj = 5\n").unwrap();
    let o = ionwire(&["ensemble", "--config", "typo.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ntraj"));

    let o = ionwire(&["ensemble", "--threads", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn entangle_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["entangle", "--g", "5.6 Hz", "--m", "1", "--n", "1", "--samples", "100", "--out"];
    let o = ionwire(&[&args[..], &["closed.csv"]].concat(), dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = ionwire(&[&args[..], &["numeric.csv", "--source", "numeric"]].concat(), dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, closed) = read_csv(&dir.path().join("closed.csv"));
    assert_eq!(header, ["t", "re_c100", "im_c100", "re_c010", "im_c010", "re_c001", "im_c001", "norm"]);
    let (_, numeric) = read_csv(&dir.path().join("numeric.csv"));
    assert_eq!(&closed[0][1..], &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    // With 2m = n + 1 the plan ends at half the swap time, in a NOON state.
    let end = closed.last().unwrap();
    let p100 = end[1] * end[1] + end[2] * end[2];
    let p010 = end[3] * end[3] + end[4] * end[4];
    assert!((p100 - 0.5).abs() < 1e-10 && (p010 - 0.5).abs() < 1e-10, "{end:?}");
    assert!(end[5].hypot(end[6]) < 1e-10);
    for (a, b) in closed.iter().zip(&numeric) {
        for i in 1..7 {
            assert!((a[i] - b[i]).abs() < 1e-10);
        }
    }
}

#[test]
fn uncoupled_exchange_keeps_temperatures() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("free.toml"),
        "[exchange]\ncoupled = false\nt_end = \"5 ms\"\nsamples = 10\n[output]\ndir = \"free\"\n",
    )
    .unwrap();
    let o = ionwire(&["exchange", "--config", "free.toml"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("free/exchange_temperatures.csv"));
    assert_eq!(header, ["t", "T_Be", "T_P", "T_Be_analytic", "T_P_analytic"]);
    assert_eq!(rows.len(), 11);
    for r in &rows {
        assert!((r[1] / 0.5e-3 - 1.0).abs() < 1e-8 && (r[2] / 10.0 - 1.0).abs() < 1e-8, "{r:?}");
    }
    let (header, _) = read_csv(&dir.path().join("free/exchange_trajectory.csv"));
    assert_eq!(header[0], "t");
    assert!(header.contains(&"T_e_inst".to_string()));
}

#[test]
fn exchange_check_mode() {
    let dir = tempfile::tempdir().unwrap();
    let base = "[exchange]\nt_end = \"66 ms\"\nsamples = 66\n[integrator]\ntolerance = 1e-12\n";
    fs::write(dir.path().join("ok.toml"), format!("{base}[check]\nmax_deviation = \"1 uK\"\n")).unwrap();
    fs::write(dir.path().join("strict.toml"), format!("{base}[check]\nmax_deviation = \"1e-15 K\"\n")).unwrap();
    let o = ionwire(&["exchange", "--config", "ok.toml", "--check"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = ionwire(&["exchange", "--config", "strict.toml", "--check"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let o = ionwire(&["exchange", "--check"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ensemble_is_reproducible_from_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.toml"), SMALL_ENSEMBLE).unwrap();
    let o = ionwire(&["ensemble", "--config", "e.toml", "--threads", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(dir.path().join("run/ensemble_summary_300mHz.csv")).unwrap();
    let manifest = fs::read(dir.path().join("run/ensemble.json")).unwrap();
    fs::copy(dir.path().join("run/ensemble.json"), dir.path().join("m.json")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ionwire"))
        .args(["ensemble", "--config", "m.json"])
        .current_dir(dir.path())
        .env("IONWIRE_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(dir.path().join("run/ensemble_summary_300mHz.csv")).unwrap(), first);
    assert_eq!(fs::read(dir.path().join("run/ensemble.json")).unwrap(), manifest);
    let (header, rows) = read_csv(&dir.path().join("run/ensemble_summary_300mHz.csv"));
    assert_eq!(header, ["t", "mean_TP", "p5_TP", "p95_TP", "n_ok"]);
    assert_eq!(rows.len(), 5);
    let m: Value = serde_json::from_slice(&manifest).unwrap();
    assert_eq!(m["units"]["mean_TP"], "K");
    assert_eq!(m["results"]["runs"][0]["delta_omega"], 0.3);
}

#[test]
fn single_trajectory_aggregates_collapse() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.toml"), SMALL_ENSEMBLE).unwrap();
    let o = ionwire(&["ensemble", "--config", "e.toml", "--n-traj", "1", "--delta-omega", "0 Hz"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("run/ensemble_summary_0mHz.csv"));
    for r in &rows {
        assert_eq!(r[1], r[2]);
        assert_eq!(r[1], r[3]);
        assert_eq!(r[4], 1.0);
    }
}

#[test]
fn ensemble_check_mode() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.toml"), format!("{SMALL_ENSEMBLE}[check]\nmean_tp = [\"1 nK\", \"2 nK\"]\n")).unwrap();
    let o = ionwire(&["ensemble", "--config", "e.toml", "--check"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("outside"));
}

#[test]
fn resolved_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.toml"), SMALL_ENSEMBLE).unwrap();
    let o = ionwire(&["ensemble", "--config", "e.toml", "--seed", "9", "--print-config"], dir.path());
    assert!(o.status.success());
    let echo = String::from_utf8(o.stdout).unwrap();
    assert!(echo.contains("seed = 9") && echo.contains("[traps.ion2]") && echo.contains("[integrator]"));
    fs::write(dir.path().join("echo.toml"), &echo).unwrap();
    let o = ionwire(&["ensemble", "--config", "echo.toml", "--print-config"], dir.path());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), echo);
}

#[test]
fn presets_parse() {
    let presets = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let dir = tempfile::tempdir().unwrap();
    for name in ["fig2", "fig3cd", "blackcross", "convergence"] {
        let p = presets.join(format!("{name}.toml"));
        let o = ionwire(&["ensemble", "--config", p.to_str().unwrap(), "--print-config"], dir.path());
        assert!(o.status.success(), "{name}: {}", stderr(&o));
    }
}

#[test]
fn help_lists_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = ionwire(&["ensemble", "--help"], dir.path());
    let help = String::from_utf8(o.stdout).unwrap();
    for flag in ["--config", "--seed", "--delta-omega", "--n-traj", "--check", "--threads", "--out"] {
        assert!(help.contains(flag), "{flag} missing from\n{help}");
    }
}
