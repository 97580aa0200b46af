//! End-to-end tests of the command-line surface: determinism, exit codes,
//! unit conversion, and the config-file merge.

use std::process::{Command, Output};

fn covertsig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covertsig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .expect("header present")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn coeff_reports_the_expected_comm_values() {
    let out = covertsig(&[
        "coeff", "--mode", "comm", "--eta", "0.6", "--n-bar-b", "1", "--n-s", "0.5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let c_p: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("c_p_direct="))
        .expect("c_p_direct present")
        .parse()
        .unwrap();
    assert!((c_p - 0.04 / 0.96).abs() < 1e-12);
    assert!(text.contains("two_point_fock_lo=0"));
    assert!(text.contains("c_p_meixner="));
    assert!(text.contains("c_g="));
}

#[test]
fn coeff_zero_brightness_gives_zero_coefficients() {
    let out = covertsig(&[
        "coeff", "--mode", "comm", "--eta", "0.6", "--n-bar-b", "1", "--n-s", "0",
    ]);
    assert!(out.status.success());
    for line in stdout(&out).lines() {
        if let Some(v) = line
            .strip_prefix("c_p_direct=")
            .or_else(|| line.strip_prefix("c_p_meixner="))
            .or_else(|| line.strip_prefix("c_g="))
        {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0, "{line}");
        }
    }
}

#[test]
fn invalid_parameter_exits_with_config_code_and_names_the_field() {
    let out = covertsig(&[
        "coeff", "--mode", "comm", "--eta", "1.2", "--n-bar-b", "1", "--n-s", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("eta"), "stderr must name the field: {err}");
}

#[test]
fn missing_required_parameter_exits_with_config_code() {
    let out = covertsig(&["coeff", "--mode", "comm", "--eta", "0.6", "--n-s", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n-bar-b"));
}

#[test]
fn sweep_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = covertsig(&[
            "comm-sweep",
            "--eta",
            "0.6",
            "--n-bar-b",
            "0.2",
            "--points",
            "40",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "identical configs must produce identical bytes");
    assert!(!bytes_a.is_empty());
}

#[test]
fn sweep_row_count_matches_points() {
    let out = covertsig(&[
        "comm-sweep", "--eta", "0.6", "--n-bar-b", "1", "--points", "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        ["n_s", "capability_fock", "capability_gaussian", "c_p", "c_g", "crossover"]
    );
    assert_eq!(rows.len(), 2);
    assert!(text.starts_with("# covertsig"));
    assert!(!text.contains('\r'), "unix newlines only");
}

#[test]
fn bits_equal_nats_divided_by_ln2() {
    let run = |unit: &str| {
        let out = covertsig(&[
            "comm-sweep", "--eta", "0.6", "--n-bar-b", "0.2", "--points", "12", "--unit", unit,
        ]);
        assert!(out.status.success());
        parse_csv(&stdout(&out)).1
    };
    let nats = run("nats");
    let bits = run("bits");
    let ln2 = std::f64::consts::LN_2;
    for (rn, rb) in nats.iter().zip(bits.iter()) {
        // capability columns convert, coefficient and flag columns do not
        for col in [1usize, 2] {
            assert!((rb[col] - rn[col] / ln2).abs() <= 1e-12 * rn[col].abs().max(1.0));
        }
        for col in [0usize, 3, 4, 5] {
            assert_eq!(rb[col], rn[col]);
        }
    }
}

#[test]
fn sense_sweep_near_coincident_hypotheses_has_tiny_exponents() {
    let out = covertsig(&[
        "sense-sweep",
        "--tau-a",
        "0.3",
        "--tau-w",
        "0.3",
        "--gamma1",
        "0.999",
        "--n-bar-a",
        "1",
        "--n-bar-w",
        "1",
        "--points",
        "5",
    ]);
    assert!(out.status.success());
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header[3], "phi_fock");
    assert_eq!(header[4], "phi_tmsv");
    for row in rows {
        assert!(row[3] < 1e-4, "phi_fock = {}", row[3]);
        assert!(row[4] < 1e-4, "phi_tmsv = {}", row[4]);
    }
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "eta=0.6\nn-bar-b=1\nn-s=0.5\n# comment\ndelta=0.05\n").unwrap();
    let from_file = covertsig(&["coeff", "--mode", "comm", "--config", cfg.to_str().unwrap()]);
    assert!(from_file.status.success());
    let baseline = stdout(&from_file);
    assert!(baseline.contains("c_p_direct=4.16666666666667e-2"));

    // flag overrides the file value
    let overridden = covertsig(&[
        "coeff",
        "--mode",
        "comm",
        "--config",
        cfg.to_str().unwrap(),
        "--n-s",
        "0.25",
    ]);
    assert!(overridden.status.success());
    assert!(stdout(&overridden).contains("n-s=0.25"));

    // unknown keys are rejected
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "etaa=0.6\n").unwrap();
    let out = covertsig(&["coeff", "--mode", "comm", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_path_is_a_config_error() {
    let out = covertsig(&[
        "comm-sweep",
        "--eta",
        "0.6",
        "--n-bar-b",
        "1",
        "--points",
        "2",
        "--output",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn crossover_command_reports_value_or_none() {
    let some = covertsig(&["crossover", "--mode", "comm", "--eta", "0.6", "--n-bar-b", "0.1"]);
    assert!(some.status.success());
    let text = stdout(&some);
    let value: f64 = text
        .trim()
        .strip_prefix("crossover_n_s=")
        .expect("crossover found for low background")
        .parse()
        .unwrap();
    assert!(value > 0.0 && value <= 1.0);

    let none = covertsig(&["crossover", "--mode", "comm", "--eta", "0.6", "--n-bar-b", "2"]);
    assert!(none.status.success());
    assert_eq!(stdout(&none).trim(), "crossover=none");
}

#[test]
fn verify_quick_passes_and_prints_reports() {
    let out = covertsig(&["verify", "--level", "quick"]);
    assert!(out.status.success(), "verify failed: {}", stdout(&out));
    let text = stdout(&out);
    for name in [
        "kernel_quadrature",
        "kernel_stochasticity",
        "meixner_orthogonality",
        "qre_representation",
        "qre_expansion",
        "optimizer_oracle",
        "chernoff_commuting",
        "jensen_random",
    ] {
        assert!(text.contains(name), "missing report for {name}");
    }
    assert!(text.contains("verify: 8/8 suites passed"));
}

#[test]
fn help_lists_all_subcommands() {
    let out = covertsig(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for sub in ["coeff", "comm-sweep", "sense-sweep", "crossover", "verify"] {
        assert!(text.contains(sub));
    }
}
