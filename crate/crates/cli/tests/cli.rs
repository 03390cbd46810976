use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn optomech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optomech"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(bytes: &[u8]) -> Self {
        let text = std::str::from_utf8(bytes).unwrap();
        let mut lines = text
            .lines()
            .map(|l| l.split(',').map(str::to_string).collect());
        Csv {
            header: lines.next().unwrap(),
            rows: lines.collect(),
        }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let j = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[j].parse().unwrap()).collect()
    }

    fn text(&self, name: &str) -> Vec<String> {
        let j = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[j].clone()).collect()
    }
}

fn run_ok(args: &[&str]) -> Csv {
    let out = optomech(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    Csv::parse(&out.stdout)
}

#[test]
fn spectrum_detuning_sign_enters_only_through_correlation() {
    let t = run_ok(&["spectrum"]);
    assert_eq!(
        t.header,
        [
            "detuning",
            "omega",
            "s_zz",
            "corr_term",
            "s_ba",
            "s_thermal_zp",
            "s_yy_total"
        ]
    );
    let half = t.rows.len() / 2;
    let d = t.col("detuning");
    assert!(d[..half].iter().all(|&x| x == 1.0) && d[half..].iter().all(|&x| x == -1.0));
    for name in ["omega", "s_zz", "s_ba", "s_thermal_zp"] {
        let c = t.col(name);
        assert_eq!(c[..half], c[half..], "{name}");
    }
    let (corr, total) = (t.col("corr_term"), t.col("s_yy_total"));
    for i in 0..half {
        let diff_total = total[i] - total[i + half];
        let diff_corr = corr[i] - corr[i + half];
        assert!((diff_total - diff_corr).abs() <= 1e-12 * total[i].abs());
    }
    assert!(corr[..half].iter().zip(&corr[half..]).any(|(a, b)| a != b));
}

#[test]
fn ground_state_anti_stokes_spectrum_is_flat() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "flat.toml",
        "kappa_m = 1e-4\nkappa_r = 0.1\ng0_bar_coupling = 1e-4\nn_occ = 0.0\n\
         [grid]\nomega_min = 0.999\nomega_max = 1.001\nn_points = 2001\n",
    );
    let t = run_ok(&["spectrum", &cfg, "--detuning-sign", "+"]);
    // shot-noise floor κ_r/(2Ḡ₀²)
    let floor = 0.1 / (2.0 * 1e-8);
    assert!(t
        .col("s_yy_total")
        .iter()
        .all(|s| (s / floor - 1.0).abs() < 0.01));
}

#[test]
fn unknown_key_fails_with_its_name() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", "kappa_m = 0.01\nkapa_r = 0.1\n");
    let out = optomech(&["spectrum", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kapa_r"));
    assert!(out.stdout.is_empty());
}

#[test]
fn asymmetry_recovers_occupancy() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "asym.toml",
        "kappa_m = 1e-4\n[asymmetry]\noccupancies = [0.0, 0.1, 1.0, 10.0]\n",
    );
    let t = run_ok(&["asymmetry", &cfg]);
    let (n, eta, n_est) = (t.col("n_occ"), t.col("eta"), t.col("n_est"));
    assert_eq!(t.text("eta")[0], "inf");
    assert_eq!(n_est[0], 0.0);
    for i in 1..4 {
        assert!(
            (0.99..=1.01).contains(&(eta[i] * n[i])),
            "{}",
            eta[i] * n[i]
        );
    }
    let ratio = t.col("i_minus")[2] / t.col("i_plus")[2];
    assert!((ratio - 2.0).abs() < 0.02);
}

#[test]
fn full_spectra_asymmetry_in_weak_probe_regime() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "full.toml",
        "kappa_m = 1e-4\nkappa_r = 0.02\ng0_bar_coupling = 1e-5\n\
         [asymmetry]\nspectra = \"full\"\n",
    );
    let t = run_ok(&["asymmetry", &cfg]);
    for (n, eta) in t.col("n_occ").iter().zip(t.col("eta")) {
        assert!((eta * n - 1.0).abs() < 0.05);
    }
}

#[test]
fn force_smaller_decay_rate_is_quieter() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "force.toml",
        "[force]\nkappa_m_values = [1e-3, 1e-2]\n\
         [grid]\nomega_min = 0.5\nomega_max = 1.5\nn_points = 2001\n",
    );
    let t = run_ok(&["force", &cfg, "--detuning-sign", "+"]);
    let (omega, qtot, ratio) = (t.col("omega"), t.col("s_f_qtot"), t.col("ratio_exact"));
    let n = 2001;
    assert!((0..n).all(|i| qtot[i] < qtot[i + n]));
    for block in [0, n] {
        let i = block + (0..n).find(|&i| omega[i] == 1.0).unwrap();
        assert!((ratio[i] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn force_ratio_monotone_away_from_resonance_on_log_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "log.toml",
        "kappa_m = 1e-3\n[grid]\nomega_min = 0.01\nomega_max = 100.0\nn_points = 4001\nspacing = \"log\"\n",
    );
    let t = run_ok(&["force", &cfg, "--detuning-sign", "-"]);
    let (omega, ratio) = (t.col("omega"), t.col("ratio_exact"));
    for i in 1..omega.len() {
        if omega[i] < 0.99 {
            assert!(ratio[i] < ratio[i - 1]);
        } else if omega[i - 1] > 1.01 {
            assert!(ratio[i] > ratio[i - 1]);
        }
    }
}

#[test]
fn scattering_matches_resolved_spectrum() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "cold.toml", "kappa_m = 1e-3\nn_occ = 0.0\n");
    let t = run_ok(&["scattering", &cfg]);
    assert!(t.col("residual").iter().all(|&r| r <= 1e-12));
    let (d, g_as) = (t.col("detuning"), t.col("gamma_as"));
    assert!(d.iter().zip(&g_as).all(|(_, &g)| g == 0.0));

    let cfg = write_config(&dir, "warm.toml", "kappa_m = 1e-3\nn_occ = 1.0\n");
    let t = run_ok(&["scattering", &cfg]);
    let d = t.col("detuning");
    let peak = |col: &str, sign: f64| {
        t.col(col)
            .iter()
            .zip(&d)
            .filter(|(_, &x)| x == sign)
            .map(|(v, _)| *v)
            .fold(0.0, f64::max)
    };
    let ratio = peak("gamma_s", -1.0) / peak("gamma_as", 1.0);
    assert!((ratio - 2.0).abs() < 1e-12, "{ratio}");
}

#[test]
fn scattering_requires_sideband_detuning() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "off.toml", "detuning = 0.5\n");
    assert_eq!(optomech(&["scattering", &cfg]).status.code(), Some(1));
}

#[test]
fn oracle_default_passes_and_repeats() {
    let a = optomech(&["oracle", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    let t = Csv::parse(&a.stdout);
    assert!(t.col("fraction_within_3").iter().all(|&f| f >= 0.99));
    assert_eq!(t.text("pass"), ["true", "true"]);
    let b = optomech(&["oracle", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn oracle_uncoupled_control_is_flat() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "ctl.toml", "g0_bar_coupling = 0.0\n");
    let psd = dir.path().join("psd.csv");
    let out = optomech(&[
        "oracle",
        &cfg,
        "--detuning-sign",
        "+",
        "--psd-output",
        psd.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let t = Csv::parse(&out.stdout);
    assert!(t.col("rms_relative_deviation")[0] <= 0.02);
    let dump = Csv::parse(&std::fs::read(&psd).unwrap());
    assert!(dump.col("analytic").iter().all(|&a| a == 1.0));
}

#[test]
fn oracle_strict_tolerance_fails_with_code_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "strict.toml",
        "[oracle]\nmin_fraction = 1.0\n[sim]\nsamples = 262144\n",
    );
    let out = optomech(&["oracle", &cfg, "--detuning-sign", "+"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(Csv::parse(&out.stdout).text("pass"), ["false"]);
}

#[test]
fn check_passes_on_defaults() {
    let t = run_ok(&["check"]);
    assert!(t.text("pass").iter().all(|p| p == "true"));
    assert_eq!(t.rows.len(), 8);
}

#[test]
fn mis_signed_correlation_is_caught() {
    let out = optomech(&["check", "--flip-correlation-sign"]);
    assert_eq!(out.status.code(), Some(2));
    let t = Csv::parse(&out.stdout);
    let names = t.text("check");
    let pass = t.text("pass");
    for (name, pass) in names.iter().zip(&pass) {
        let expected = !name.starts_with("correlation_identity");
        assert_eq!(pass == "true", expected, "{name}");
    }
}

#[test]
fn zero_detuning_is_rejected_before_checks() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "zero.toml", "detuning = 0.0\n");
    let out = optomech(&["check", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("detuning"));
}

#[test]
fn json_matches_csv() {
    let csv = run_ok(&["spectrum", "--detuning-sign", "-"]);
    let out = optomech(&["spectrum", "--detuning-sign", "-", "--format", "json"]);
    let rows: Vec<serde_json::Map<String, serde_json::Value>> =
        serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), csv.rows.len());
    let keys: Vec<&String> = rows[0].keys().collect();
    assert_eq!(keys, csv.header.iter().collect::<Vec<_>>());
    for name in &csv.header {
        let from_json: Vec<f64> = rows.iter().map(|r| r[name].as_f64().unwrap()).collect();
        assert_eq!(from_json, csv.col(name), "{name}");
    }
}

#[test]
fn output_flag_writes_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("out.csv");
    let out = optomech(&["force", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let stdout = optomech(&["force"]).stdout;
    assert_eq!(std::fs::read(Path::new(&path)).unwrap(), stdout);
}
