use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn essbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_essbound")).args(args).output().expect("spawn essbound")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn empty_ball_is_a_config_error() {
    let out = essbound(&["growth", "--surface", "catenoid", "--r-max", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.starts_with("error[config]:"), "{err}");
    assert!(err.contains("extrinsic ball empty below r=1"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn bad_arguments_exit_two_with_one_line() {
    for args in [&["bogus"][..], &["growth", "--surface", "torus"], &["growth", "--grid", "many"]] {
        let out = essbound(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = stderr(&out);
        assert!(err.starts_with("error[config]:"), "{err}");
        assert_eq!(err.lines().count(), 1, "{err}");
    }
    let out = essbound(&["model", "--curvature", "wobbly"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(essbound(&["--help"]).status.code(), Some(0));
    assert_eq!(essbound(&["--version"]).status.code(), Some(0));
}

#[test]
fn plane_growth_exponent_at_fifty() {
    let out = essbound(&["growth", "--r-max", "50"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,vol,dvol_dr,theta,mu_hat,beta_hat"));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let expected = (std::f64::consts::PI * 2500.0).ln() / 2500.0;
    assert!((last[0] - 50.0).abs() < 1e-6);
    assert!((last[5] - expected).abs() < 1e-4, "beta_hat {} vs {expected}", last[5]);
    assert!((last[5] - 0.00359).abs() < 1e-4);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let a = essbound(&["growth", "--surface", "helicoid", "--r-max", "10", "--grid", "25", "--format", "json"]);
    let b = essbound(&["growth", "--surface", "helicoid", "--r-max", "10", "--grid", "25", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let a = essbound(&["spectrum", "--r-max", "5", "--radii", "2,5", "--seed", "7"]);
    let b = essbound(&["spectrum", "--r-max", "5", "--radii", "2,5", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn flags_override_config_file_over_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# settings\nsurface = catenoid\nr_max = 12\ngrid = 20\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let out = essbound(&["growth", "--config", cfg, "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    let grid = v["growth_profile"]["r_grid"].as_array().unwrap();
    assert_eq!(grid.len(), 20);
    assert!((grid.last().unwrap().as_f64().unwrap() - 12.0).abs() < 1e-6);
    // catenoid balls start at the neck
    assert!(grid[0].as_f64().unwrap() > 1.0);

    let out = essbound(&["growth", "--config", cfg, "--grid", "30", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["growth_profile"]["r_grid"].as_array().unwrap().len(), 30);

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "colour = red\n").unwrap();
    let out = essbound(&["growth", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown key"));
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.csv");
    let out = essbound(&[
        "model",
        "--curvature",
        "hyperbolic",
        "--r-max",
        "2",
        "--radii",
        "1,2",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!((row[1] - row[0].sinh()).abs() < 1e-8);
        assert!((row[2] - row[0].cosh()).abs() < 1e-8);
    }
}

#[test]
fn enneper_corollary2_is_skipped_as_not_embedded() {
    let out = essbound(&["bounds", "--surface", "enneper", "--r-max", "8", "--grid", "40", "--sigma", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    let c2 = &v["bounds"]["corollary2"];
    assert_eq!(c2["status"], "skipped");
    assert_eq!(c2["reason"], "not embedded");
}

#[test]
fn synthetic_profile_uses_generic_bounds_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.csv");
    let mut text = String::from("r,vol\n");
    for i in 1..=40 {
        let r = i as f64 * 0.25;
        text.push_str(&format!("{r},{}\n", (0.3 * r * r).exp()));
    }
    fs::write(&path, text).unwrap();
    let out = essbound(&["bounds", "--profile", path.to_str().unwrap(), "--dim", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    let t1 = v["theorem1"]["value"].as_f64().unwrap();
    // m * lim log V / r^2 = 0.6; the tail minimum sees the offset from the prefactor
    assert!(t1 > 0.5 && t1 < 0.7, "{t1}");
    assert!(v.get("corollary2").is_none());
}

#[test]
fn failed_check_exits_one() {
    // at r = 3 the plane's local growth rate still exceeds sigma = 0.05
    let out = essbound(&["verify", "--r-max", "3", "--radii", "2", "--sigma", "0.05"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error[consistency]:"), "{err}");
    assert!(err.contains("moment finite"));
    let v = json(&out);
    assert_eq!(v["pass"], false);
}

#[test]
fn verify_all_reports_every_surface() {
    let out = essbound(&[
        "verify",
        "--all",
        "--r-max",
        "5",
        "--grid",
        "30",
        "--resolution",
        "48",
        "--suite-resolution",
        "32",
        "--spectrum-resolution",
        "32",
        "--radii",
        "2,5",
        "--sigma",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let reports = v.as_array().unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["plane", "catenoid", "helicoid", "enneper", "catenoid_x_line"]);
    for r in reports {
        assert_eq!(r["schema"], "bound_report/v1");
        assert_eq!(r["pass"], true, "{}", r["name"]);
        assert!(r["theorem1"]["value"].as_f64().unwrap().is_finite());
    }
    assert_eq!(reports[4]["m"], 3);
}
