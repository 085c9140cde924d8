use std::path::Path;
use std::process::{Command, Output};

fn wwspdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wwspdc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Parses CSV into (header, rows), dropping the wall-time column.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().map(|l| {
        let mut cells: Vec<String> = l.split(',').map(str::to_string).collect();
        cells.pop();
        cells
    });
    let header = lines.next().expect("header row");
    (header, lines.collect())
}

fn col(t: &(Vec<String>, Vec<Vec<String>>), name: &str) -> Vec<f64> {
    let k = t.0.iter().position(|h| h == name).unwrap();
    t.1.iter().map(|r| r[k].parse().unwrap()).collect()
}

const QUICK: &[&str] = &["--n_samples", "20000", "--n_batches", "20"];

#[test]
fn rates_header_and_closed_form() {
    let o = wwspdc(&[&["rates"], QUICK].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let t = table(&stdout(&o));
    let expected = "theta,phi,d_re,d_im,convention,p_a,p_a_err,p_b,p_b_err,p_ab,p_ab_err,p_ab_analytic,n_samples,n_batches,seed,rng_id,version";
    assert!(t.0.join(",").starts_with(expected));
    assert_eq!(col(&t, "p_ab_analytic"), vec![0.005]);
    let (m, e) = (col(&t, "p_ab")[0], col(&t, "p_ab_err")[0]);
    assert!((m - 0.005).abs() < 5.0 * e);
    assert!(stderr(&o).contains("# n_samples = 20000"));
}

#[test]
fn zero_pump_gives_zero_rates() {
    let o = wwspdc(&[&["rates", "--d_re", "0", "--theta", "0.2", "--phi", "1.4"], QUICK].concat());
    let t = table(&stdout(&o));
    for name in ["p_a", "p_a_err", "p_b", "p_ab", "p_ab_err", "p_ab_analytic"] {
        assert_eq!(col(&t, name), vec![0.0], "{name}");
    }
    let o = wwspdc(&[&["scan", "--d-re", "0", "--n-points", "5"], QUICK].concat());
    let t = table(&stdout(&o));
    assert!(col(&t, "p_ab").iter().all(|&x| x == 0.0));
    assert_eq!(col(&t, "fit_c")[0], 0.0);
}

#[test]
fn degrees_match_radians() {
    let deg = table(&stdout(&wwspdc(&[&["rates", "--degrees", "--theta", "45", "--phi", "-30"], QUICK].concat())));
    let rad = table(&stdout(&wwspdc(
        &[&["rates", "--theta", "0.7853981633974483", "--phi", "-0.5235987755982988"], QUICK].concat(),
    )));
    let k = deg.0.iter().position(|h| h == "p_a").unwrap();
    assert_eq!(deg.1[0][k..], rad.1[0][k..]);
    assert_eq!(deg.1[0][0], "45");
    assert_eq!(deg.1[0][1], "-30");
}

#[test]
fn angle_lists_form_a_grid() {
    let t = table(&stdout(&wwspdc(&[&["rates", "--theta", "0", "--theta", "1", "--phi", "0", "--phi", "2", "--phi", "3"], QUICK].concat())));
    assert_eq!(t.1.len(), 6);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "theta = [0.0, 0.5]\nphi = 0.25\nseed = 3\nn_samples = 20000\nn_batches = 20\nconvention = \"hilbert\"\n").unwrap();
    let out = dir.path().join("rates.csv");
    let o = wwspdc(&["rates", "--config", cfg.to_str().unwrap(), "--seed", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let t = table(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(t.1.len(), 2);
    assert_eq!(col(&t, "seed"), vec![5.0, 5.0]);
    assert!(t.1[0].contains(&"hilbert_normalized".to_string()));

    let echo = dir.path().join("rates.csv.config.toml");
    let text = std::fs::read_to_string(&echo).unwrap();
    assert!(text.contains("seed = 5"));
    let again = dir.path().join("again.csv");
    let o = wwspdc(&["rates", "--config", echo.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(table(&std::fs::read_to_string(&again).unwrap()), t);
}

#[test]
fn scan_fits_and_is_symmetric() {
    let o = wwspdc(&["scan", "--n_samples", "400000", "--n_points", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = table(&stdout(&o));
    let delta = col(&t, "delta");
    assert_eq!(delta.len(), 9);
    assert_eq!(delta[0], 0.0);
    assert!((delta[8] - std::f64::consts::PI).abs() < 1e-11);
    let (c, e) = (col(&t, "fit_c")[0], col(&t, "fit_c_err")[0]);
    assert!((c - 0.005).abs() < 5.0 * e, "{c} +- {e}");
    let (r, re) = (col(&t, "p_ab"), col(&t, "p_ab_err"));
    for k in 0..9 {
        let j = 8 - k;
        let se = (re[k].powi(2) + re[j].powi(2)).sqrt();
        assert!((r[k] - r[j]).abs() < 5.0 * se.max(1e-15));
    }
}

#[test]
fn bell_report() {
    let o = wwspdc(&[&["bell"], QUICK].concat());
    assert!(o.status.success());
    let t = table(&stdout(&o));
    assert_eq!(t.1.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["analytic", "mc", "fock"]);
    assert!((col(&t, "ratio")[0] - 1.20710678119).abs() < 1e-11);
    let err = stderr(&o);
    assert!(err.contains("se band"), "{err}");
    assert!(err.contains("violation possible"));

    let o = wwspdc(&[&["bell", "--eta_a", "0.8", "--eta_b", "0.8"], QUICK].concat());
    let t = table(&stdout(&o));
    let k = t.0.iter().position(|h| h == "violated").unwrap();
    assert_eq!(t.1[0][k], "false");
    assert_eq!(t.1[2][k], "false");
    assert!(stderr(&o).contains("violation impossible"));
}

#[test]
fn oracle_passes_and_flags_failures() {
    let o = wwspdc(&["oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = table(&stdout(&o));
    let k = t.0.iter().position(|h| h == "pass").unwrap();
    assert!(t.1.iter().all(|r| r[k] == "true"));
    let word = t.1.iter().find(|r| r[0] == "word_expectations_len_le_6").unwrap();
    assert!(word[1].parse::<f64>().unwrap() < 1e-10);

    let o = wwspdc(&["oracle", "--ode_steps", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("FAIL ode_vs_exact_flow"));
}

#[test]
fn exit_codes() {
    let o = wwspdc(&["oracle", "--cutoff", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("precondition"), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\nd_reel = 0.1\n").unwrap();
    let o = wwspdc(&["rates", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("d_reel") && err.contains("line 2"), "{err}");

    let o = wwspdc(&["rates", "--n_batches", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`n_batches`"));
    let o = wwspdc(&["rates", "--d_re", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = wwspdc(&["rates", "--config", "/nonexistent/x.toml"]);
    assert_eq!(o.status.code(), Some(2));

    let missing = Path::new("/nonexistent-dir/out.csv");
    let o = wwspdc(&[&["rates", "--out", missing.to_str().unwrap()], QUICK].concat());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn large_d_is_flagged() {
    let t = table(&stdout(&wwspdc(&[&["rates", "--d_re", "0.3"], QUICK].concat())));
    assert!(t.1[0].contains(&"large_d".to_string()));
}

#[test]
fn help_documents_flags() {
    let help = stdout(&wwspdc(&["bell", "--help"]));
    for flag in ["--config", "--out", "--d_re", "--degrees", "--n_batches", "--eta_a", "--theta1", "--threads", "--clamp_floor"] {
        assert!(help.contains(flag), "{flag}");
    }
    assert!(help.contains("2/3"));
}
