//! End-to-end tests of the command-line tool: exit codes, artifact formats,
//! determinism, and the admittance → solve round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dma_model::io::matrix_from_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dma-model"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn dma-model")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

fn users_scenario(dir: &Path) -> std::path::PathBuf {
    let text = r#"
[medium]
frequency_hz = 1.0e10

[waveguide]
a = 2.19388120764399987e-2
b = 5.00053819943999979e-3
S = 0.110

[layout]
n_waveguides = 2
waveguide_spacing = 2.99792457999999984e-2
elements_per_guide = 5
element_spacing = 1.79875474799999976e-2
element_placement = "centered"

[terminations]
Y_s = [2.0, -15.7934]

[users]
positions = [[0.055, 3.0, 0.0], [0.2, 2.5, 0.4]]
Y_r = [6.186, 0.0]

[connector]
Y_0 = "auto"
"#;
    let path = dir.join("users.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn validate_passes_on_bundled_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["validate", "--out", tmp.path().to_str().unwrap(), "--no-timestamp"]);
    assert_exit(&out, 0);
    let report = read(tmp.path(), "report.csv");
    assert!(report.contains("quantity,expected,actual,rel_error,tolerance,status"));
    assert!(report.contains("P_t_W"));
    assert!(!report.contains("FAIL"), "report:\n{report}");
    // 1 connector + 1 power + 2 j + 2 j_t + 10 currents
    assert_eq!(report.lines().filter(|l| l.ends_with(",pass")).count(), 16);
}

#[test]
fn solve_outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for dir in [&out_a, &out_b] {
        let out = run(&["solve", "--out", dir.to_str().unwrap(), "--no-timestamp", "--seed", "3"]);
        assert_exit(&out, 0);
    }
    for name in ["j_t.csv", "j_s.csv", "powers.csv", "gamma.csv", "y_p.csv", "h_eq.csv"] {
        assert_eq!(read(&out_a, name), read(&out_b, name), "{name} differs between runs");
    }
}

#[test]
fn timestamp_header_is_present_unless_suppressed() {
    let tmp = tempfile::tempdir().unwrap();
    let with_ts = tmp.path().join("ts");
    let without = tmp.path().join("nots");
    assert_exit(&run(&["solve", "--out", with_ts.to_str().unwrap()]), 0);
    assert_exit(&run(&["solve", "--out", without.to_str().unwrap(), "--no-timestamp"]), 0);
    assert!(read(&with_ts, "powers.csv").contains("timestamp_unix="));
    assert!(!read(&without, "powers.csv").contains("timestamp_unix="));
}

#[test]
fn admittance_roundtrip_reproduces_solve() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = users_scenario(tmp.path());
    let sc = scenario.to_str().unwrap();

    let adm_dir = tmp.path().join("adm");
    assert_exit(
        &run(&["admittance", "--scenario", sc, "--out", adm_dir.to_str().unwrap(), "--no-timestamp"]),
        0,
    );
    let direct = tmp.path().join("direct");
    assert_exit(
        &run(&["solve", "--scenario", sc, "--out", direct.to_str().unwrap(), "--no-timestamp"]),
        0,
    );
    let reingested = tmp.path().join("reingested");
    let yrs_path = adm_dir.join("y_rs.csv");
    assert_exit(
        &run(&[
            "solve",
            "--scenario",
            sc,
            "--yrs",
            yrs_path.to_str().unwrap(),
            "--out",
            reingested.to_str().unwrap(),
            "--no-timestamp",
        ]),
        0,
    );

    // Values agree at the dump precision of the re-ingested channel.
    for name in ["j_r.csv", "j_s.csv", "j_t.csv"] {
        let a = matrix_from_csv(&read(&direct, name)).unwrap();
        let b = matrix_from_csv(&read(&reingested, name)).unwrap();
        let scale = a.norm().max(1e-300);
        assert!(
            (a - b).norm() <= 1e-7 * scale,
            "{name} deviates beyond dump precision"
        );
    }

    // And the re-ingested run itself is byte-stable.
    let reingested2 = tmp.path().join("reingested2");
    assert_exit(
        &run(&[
            "solve",
            "--scenario",
            sc,
            "--yrs",
            yrs_path.to_str().unwrap(),
            "--out",
            reingested2.to_str().unwrap(),
            "--no-timestamp",
        ]),
        0,
    );
    assert_eq!(read(&reingested, "j_r.csv"), read(&reingested2, "j_r.csv"));
}

#[test]
fn roundtrip_works_without_users_too() {
    // The bundled scenario has no users; its empty Y_rs dump must still be
    // accepted back by solve.
    let tmp = tempfile::tempdir().unwrap();
    let adm_dir = tmp.path().join("adm");
    assert_exit(&run(&["admittance", "--out", adm_dir.to_str().unwrap(), "--no-timestamp"]), 0);
    let solved = tmp.path().join("solve");
    assert_exit(
        &run(&[
            "solve",
            "--yrs",
            adm_dir.join("y_rs.csv").to_str().unwrap(),
            "--out",
            solved.to_str().unwrap(),
            "--no-timestamp",
        ]),
        0,
    );
    assert!(read(&solved, "powers.csv").contains("P_t"));
}

#[test]
fn rayleigh_channel_is_seed_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = users_scenario(tmp.path());
    let sc = scenario.to_str().unwrap();
    let a = tmp.path().join("ch_a");
    let b = tmp.path().join("ch_b");
    for dir in [&a, &b] {
        let out = run(&[
            "channel",
            "--model",
            "rayleigh",
            "--samples",
            "4",
            "--seed",
            "7",
            "--scenario",
            sc,
            "--out",
            dir.to_str().unwrap(),
            "--no-timestamp",
        ]);
        assert_exit(&out, 0);
    }
    assert_eq!(read(&a, "samples.csv"), read(&b, "samples.csv"));
    assert_eq!(read(&a, "covariance_user0.csv"), read(&b, "covariance_user0.csv"));

    let c = tmp.path().join("ch_c");
    let out = run(&[
        "channel",
        "--model",
        "rayleigh",
        "--samples",
        "4",
        "--seed",
        "8",
        "--scenario",
        sc,
        "--out",
        c.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_exit(&out, 0);
    assert_ne!(read(&a, "samples.csv"), read(&c, "samples.csv"));
}

#[test]
fn los_channel_and_field_and_pattern_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = users_scenario(tmp.path());
    let sc = scenario.to_str().unwrap();

    let ch = tmp.path().join("ch");
    assert_exit(
        &run(&["channel", "--model", "los", "--scenario", sc, "--out", ch.to_str().unwrap(), "--no-timestamp"]),
        0,
    );
    let yrs = matrix_from_csv(&read(&ch, "y_rs.csv")).unwrap();
    assert_eq!((yrs.nrows(), yrs.ncols()), (2, 10));

    let field = tmp.path().join("field");
    assert_exit(
        &run(&["field", "--samples", "200", "--out", field.to_str().unwrap(), "--no-timestamp"]),
        0,
    );
    let probe = read(&field, "probe.csv");
    assert!(probe.lines().next().unwrap().starts_with('#'));
    assert!(probe.contains("x_m,y_m,z_m,re_Hz,im_Hz,abs_Hz,arg_Hz_rad"));
    assert_eq!(probe.lines().filter(|l| !l.starts_with('#')).count(), 201);

    let pat = tmp.path().join("pat");
    assert_exit(
        &run(&["pattern", "--samples", "18", "--quadrature", "32", "--out", pat.to_str().unwrap(), "--no-timestamp"]),
        0,
    );
    for name in [
        "grid.csv",
        "cut_theta_half_pi.csv",
        "cut_theta_quarter_pi.csv",
        "cut_phi_half_pi.csv",
        "powers.csv",
    ] {
        assert!(pat.join(name).exists(), "{name} missing");
    }
    let grid = read(&pat, "grid.csv");
    assert!(grid.contains("theta_rad,phi_rad,gain_linear,gain_dbi"));
    assert_eq!(grid.lines().filter(|l| !l.starts_with('#')).count(), 18 * 18 + 1);
}

#[test]
fn lorentzian_traces_the_circle() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "lorentzian",
        "--re-yss",
        "1.0",
        "--samples",
        "101",
        "--out",
        tmp.path().to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_exit(&out, 0);
    let text = read(tmp.path(), "lorentzian.csv");
    let mut rows = 0;
    for line in text.lines().skip_while(|l| l.starts_with('#')).skip(1) {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let (angle, mag) = (fields[1], fields[2]);
        let v = num_complex::Complex64::from_polar(mag, angle);
        let residual = ((v - num_complex::Complex64::new(0.5, 0.0)).norm() - 0.5).abs();
        // Residual floor set by the nine-digit dump precision.
        assert!(residual < 1e-8, "row {line} off the circle by {residual}");
        rows += 1;
    }
    assert_eq!(rows, 101);
}

#[test]
fn bad_inputs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--scenario", "/definitely/not/here.toml", "--out", tmp.path().to_str().unwrap()]);
    assert_exit(&out, 2);

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[medium]\nfrequency_hz = -3.0\n").unwrap();
    let out = run(&["solve", "--scenario", bad.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_exit(&out, 2);

    // No users: channel models cannot run.
    let out = run(&["channel", "--model", "rayleigh", "--out", tmp.path().to_str().unwrap()]);
    assert_exit(&out, 2);
}

#[test]
fn cavity_resonance_exits_3() {
    // Guide length tuned to an exact multiple of the half guided wavelength.
    let medium = dma_model::Medium::vacuum(10.0e9).unwrap();
    let lambda = medium.wavelength();
    let a = 0.7318 * lambda;
    let guide = dma_model::WaveguideSpec::new(a, 0.1668 * lambda, 0.1, a / 2.0, nalgebra::Vector3::zeros()).unwrap();
    let kx = dma_model::derive_wavenumbers(&medium, &guide).unwrap().k_x.re;
    let s = 3.0 * std::f64::consts::PI / kx;

    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "[medium]\nfrequency_hz = 1.0e10\n\n[waveguide]\na = {:.17e}\nb = {:.17e}\nS = {:.17e}\n\n\
         [layout]\nelements_per_guide = 1\nelement_placement = [{:.17e}]\n\n\
         [terminations]\nY_s = [2.0, -15.7934]\n\n[connector]\nY_0 = 35.3387\n",
        a,
        0.1668 * lambda,
        s,
        s / 2.0
    );
    let path = tmp.path().join("resonant.toml");
    fs::write(&path, text).unwrap();
    let out = run(&["solve", "--scenario", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_exit(&out, 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cavity resonance"));
}
