use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn ppsf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppsf")).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let o = ppsf(args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn calibrate_reports_and_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cal");
    let cfg = examples().join("fig1c.toml");
    let o = run_ok(&["calibrate", "--config", s(&cfg), "--out", s(&out)]);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("dn = ") && stdout.contains("ps^2/km"));
    let report = json(&out.join("calibration.json"));
    let dn = report["birefringence_dn"].as_f64().unwrap();
    let k2 = report["k2_ps2_per_km"].as_f64().unwrap().abs();
    assert!(dn > 0.0);
    assert!((1.0..=4.0).contains(&k2), "{k2}");

    // feed the calibrated fiber back in
    let body = format!(
        "[fiber]\nfile = \"{}\"\n[calibration]\ntype2_shg_nm = 653.3\n",
        out.join("fiber_calibrated.toml").display()
    );
    let cfg2 = write_config(tmp.path(), "again.toml", &body);
    let out2 = tmp.path().join("cal2");
    run_ok(&["calibrate", "--config", s(&cfg2), "--out", s(&out2)]);
    let dn2 = json(&out2.join("calibration.json"))["birefringence_dn"].as_f64().unwrap();
    assert!((dn2 - dn).abs() < 1e-12);
}

#[test]
fn missing_fiber_file_is_an_input_error_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "[fiber]\nfile = \"nowhere.toml\"\n[calibration]\ntype2_shg_nm = 653.3\n",
    );
    let out = tmp.path().join("out");
    let o = ppsf(&["calibrate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not exist"));
    assert!(!out.exists());
}

#[test]
fn bad_configs_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let unknown = write_config(tmp.path(), "u.toml", "[fiber]\npreset = \"ppsf\"\ncolour = \"blue\"\n");
    let no_section = write_config(tmp.path(), "n.toml", "[fiber]\npreset = \"ppsf\"\n");
    for (cmd, cfg) in [("spectrum", &unknown), ("hom", &no_section), ("shg", &no_section)] {
        let o = ppsf(&[cmd, "--config", s(cfg), "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
    }
    assert_eq!(ppsf(&["spectrum"]).status.code(), Some(2));
    assert_eq!(ppsf(&["frobnicate"]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn computation_failure_exits_with_code_1() {
    let tmp = tempfile::tempdir().unwrap();
    // a ±5 THz window cannot contain the half-maximum edges
    let cfg = write_config(
        tmp.path(),
        "narrow.toml",
        "[fiber]\npreset = \"ppsf\"\n[calibration]\ntype2_shg_nm = 653.3\n[grid]\nhalf_span_thz = 5.0\npoints = 201\n",
    );
    let out = tmp.path().join("out");
    let o = ppsf(&["spectrum", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "run.log")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn figure_pipelines_are_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, name, expected) in [
        ("shg", "fig1a", vec!["shg.csv", "shg.json"]),
        ("tuning", "fig1b", vec!["tuning.csv", "tuning.json"]),
        ("spectrum", "fig1c", vec!["spectrum.csv", "spectrum.json", "spectrum_taylor.csv"]),
        ("hom", "fig2b", vec!["hom_fit.json", "hom_scan.csv"]),
    ] {
        let cfg = examples().join(format!("{name}.toml"));
        let a = tmp.path().join(format!("{name}-a"));
        let b = tmp.path().join(format!("{name}-b"));
        run_ok(&[cmd, "--config", s(&cfg), "--out", s(&a), "--threads", "2"]);
        run_ok(&[cmd, "--config", s(&cfg), "--out", s(&b)]);
        let fa = files(&a);
        let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, expected);
        assert_eq!(fa, files(&b), "{cmd}");
        let log = fs::read_to_string(a.join("run.log")).unwrap();
        assert!(log.contains("started_unix=") && log.contains(&format!("command={cmd}")));
    }
}

#[test]
fn hom_reports_fit_and_bandwidth() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = examples().join("fig2b.toml");
    let out = tmp.path().join("hom");
    run_ok(&["hom", "--config", s(&cfg), "--out", s(&out), "--seed", "5"]);
    let r = json(&out.join("hom_fit.json"));
    let v = r["fit"]["visibility"].as_f64().unwrap();
    assert!((v - 0.832).abs() < 0.01, "{v}");
    let w = r["fit"]["width_fs"].as_f64().unwrap();
    assert!((w / 26.6 - 1.0).abs() < 0.2, "{w}");
    assert_eq!(r["seed"], 5);
    assert_eq!(r["transform_limit_by_family"].as_array().unwrap().len(), 4);
    // a different seed gives a different noisy scan
    let other = tmp.path().join("hom6");
    run_ok(&["hom", "--config", s(&cfg), "--out", s(&other), "--seed", "6"]);
    assert_ne!(fs::read(out.join("hom_scan.csv")).unwrap(), fs::read(other.join("hom_scan.csv")).unwrap());
}

#[test]
fn tomo_simulates_reconstructs_and_reloads() {
    let tmp = tempfile::tempdir().unwrap();
    let body = fs::read_to_string(examples().join("table1.toml"))
        .unwrap()
        .replace("mc_resamples = 200", "mc_resamples = 100");
    let cfg = write_config(tmp.path(), "t.toml", &body);
    let a = tmp.path().join("a");
    let o = run_ok(&["tomo", "--config", s(&cfg), "--out", s(&a)]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("concurrence = "));
    let r = json(&a.join("tomo_result.json"));
    let c = r["concurrence"].as_f64().unwrap();
    assert!((0.93..=0.98).contains(&c), "{c}");
    let sc = r["uncertainties"]["concurrence"].as_f64().unwrap();
    assert!((0.002..0.03).contains(&sc), "{sc}");
    assert_eq!(r["settings_digest"]["count"], 36);
    assert_eq!(r["rho"]["re"].as_array().unwrap().len(), 4);

    let b = tmp.path().join("b");
    run_ok(&["tomo", "--config", s(&cfg), "--out", s(&b)]);
    assert_eq!(files(&a), files(&b));

    // reconstruct from the written counts file instead of simulating
    let reload = format!(
        "[fiber]\npreset = \"ppsf\"\n[tomo]\nsignal_nm = 1290.0\nidler_nm = 1330.0\nanalyzer_design_nm = 1306.6\nmc_resamples = 0\ncounts_file = \"{}\"\n",
        a.join("tomo_counts.csv").display()
    );
    let cfg2 = write_config(tmp.path(), "reload.toml", &reload);
    let c2 = tmp.path().join("c");
    run_ok(&["tomo", "--config", s(&cfg2), "--out", s(&c2)]);
    let r2 = json(&c2.join("tomo_result.json"));
    assert!((r2["concurrence"].as_f64().unwrap() - c).abs() < 1e-9);
    assert!(r2["uncertainties"].is_null());
}
