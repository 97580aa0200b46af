//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line (run with `--nocapture` to see them all). Criteria cover
//! kernel equivalence, stochasticity, representation equivalence, the
//! two-point optimality oracle, converse saturation, the quadratic
//! divergence expansion, commuting-state discrimination, figure-level sweep
//! reproduction through the CLI, and the discrete moment inequality.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use covertsig_core::{
    brute_force_min, c_diffuse_sensing, classical_chernoff, cp_direct, cp_meixner,
    discrete_jensen_check, fock_transition, fock_transition_quadrature, gaussian_qcb, meixner,
    optimal_two_point, sparse_kl, thermal_pmf, truncation_level, ChannelPort, CoefficientParams,
    CovarianceMatrix, FockDiagonalInput, GeometricWeight, MeanConstraint, PolyIndex, SparseInput,
};

const PORT_KAPPAS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
const PORT_NUS: [f64; 3] = [0.5, 1.0, 2.0];
const FIG3_ETAS: [f64; 3] = [0.4, 0.6, 0.8];
const FIG4_GAMMAS: [f64; 3] = [0.4, 0.6, 0.8];
/// Background brightnesses for the figure-level sweeps (photon-starved
/// regime, where the capability crossovers fall inside the plotted range).
const COMM_BACKGROUNDS: [f64; 3] = [0.05, 0.1, 0.2];
const SENSE_BACKGROUNDS: [f64; 2] = [0.05, 0.1];

fn random_input(rng: &mut ChaCha8Rng, support_max: usize) -> FockDiagonalInput {
    let len = rng.gen_range(2..=support_max + 1);
    let mut probs: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    FockDiagonalInput::new(probs).unwrap()
}

#[test]
fn criterion_1_kernel_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &kappa in &PORT_KAPPAS {
        for &nu in &PORT_NUS {
            let port = ChannelPort::new(kappa, nu).unwrap();
            for i in 0..=20 {
                for ell in 0..=20 {
                    let closed = fock_transition(port, i, ell).unwrap();
                    let integral = fock_transition_quadrature(port, i, ell).unwrap();
                    worst = worst.max((closed - integral).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-10, "kernel routes disagree by {worst}");
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "kernel grid took {elapsed:?}, budget 10 s"
    );
    println!(
        "[PASS] criterion 1 (kernel equivalence): max |closed - quadrature| = {worst:.3e} over 21x21x12 grid in {:.2} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_2_stochasticity_and_mean_map() {
    let mut worst_mass = 0.0f64;
    let mut worst_mean = 0.0f64;
    for &kappa in &PORT_KAPPAS {
        for &nu in &PORT_NUS {
            let port = ChannelPort::new(kappa, nu).unwrap();
            for i in 0..=20 {
                let ell_max =
                    truncation_level(nu + kappa * i as f64, 1e-16, i).unwrap() + 10;
                let mut total = 0.0;
                let mut mean = 0.0;
                for ell in 0..=ell_max {
                    let p = fock_transition(port, i, ell).unwrap();
                    total += p;
                    mean += ell as f64 * p;
                }
                worst_mass = worst_mass.max((total - 1.0).abs());
                worst_mean = worst_mean.max((mean - (kappa * i as f64 + nu)).abs());
            }
        }
    }
    assert!(worst_mass <= 1e-10, "row mass deviates by {worst_mass}");
    assert!(worst_mean <= 1e-9, "mean map deviates by {worst_mean}");
    println!(
        "[PASS] criterion 2 (stochasticity/mean map): mass err {worst_mass:.3e}, mean err {worst_mean:.3e}"
    );
}

#[test]
fn criterion_3_orthogonal_form_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_97ed);
    let mut worst_rel = 0.0f64;
    for trial in 0..1000 {
        let kappa = PORT_KAPPAS[trial % 4];
        let nu = PORT_NUS[trial % 3];
        let port = ChannelPort::new(kappa, nu).unwrap();
        let active = random_input(&mut rng, 8);
        let direct = cp_direct(port, &active).unwrap();
        let ortho = cp_meixner(CoefficientParams::from_port(port).unwrap(), &active).unwrap();
        worst_rel = worst_rel.max((direct - ortho).abs() / direct.abs().max(1e-300));
    }
    assert!(
        worst_rel <= 1e-8,
        "representations disagree by relative {worst_rel}"
    );

    // orthogonality of the geometric-weight family
    let mut worst_orth = 0.0f64;
    for q in [0.2, 0.5, 0.8] {
        let gw = GeometricWeight::new(q).unwrap();
        for y in 0..=8usize {
            for yp in y..=8usize {
                let target = if y == yp { q.powi(-(y as i32)) } else { 0.0 };
                let mut sum = 0.0f64;
                let mut weight = 1.0 - q;
                let mut quiet = 0;
                for ell in 0..4000 {
                    let term = weight
                        * meixner(PolyIndex::new(y).unwrap(), PolyIndex::new(ell).unwrap(), gw)
                        * meixner(PolyIndex::new(yp).unwrap(), PolyIndex::new(ell).unwrap(), gw);
                    sum += term;
                    weight *= q;
                    quiet = if term.abs() < 1e-16 * target.abs().max(1.0) {
                        quiet + 1
                    } else {
                        0
                    };
                    if quiet > 60 {
                        break;
                    }
                }
                worst_orth = worst_orth.max((sum - target).abs());
            }
        }
    }
    assert!(worst_orth <= 1e-8, "orthogonality residual {worst_orth}");
    println!(
        "[PASS] criterion 3 (orthogonal form): rep rel err {worst_rel:.3e} over 1000 inputs, orthogonality err {worst_orth:.3e}"
    );
}

#[test]
fn criterion_4_two_point_optimality_oracle() {
    let start = Instant::now();
    let step = 0.005;
    let tolerance = 10.0 * step * step;
    let port = ChannelPort::new(0.4, 0.6).unwrap();
    let params = CoefficientParams::from_port(port).unwrap();
    let mut worst_gap = f64::NEG_INFINITY;
    for n_bar in [0.3, 0.5, 0.8, 1.7, 2.3] {
        let c = MeanConstraint::new(n_bar).unwrap();
        let (_, scanned) = brute_force_min(c, 5, step, params).unwrap();
        let two_point = cp_meixner(params, &optimal_two_point(c)).unwrap();
        // positive gap would mean the scan beat the closed-form optimum
        worst_gap = worst_gap.max(two_point - scanned);
        assert!(
            scanned >= two_point - tolerance,
            "scan found {scanned} below two-point {two_point} at mean {n_bar}"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "oracle scan took {elapsed:?}, budget 2 min"
    );
    println!(
        "[PASS] criterion 4 (two-point oracle): worst scan advantage {worst_gap:.3e} <= {tolerance:.1e}, {:.1} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_5_converse_saturation() {
    let mut worst = 0.0f64;
    for &eta in &FIG3_ETAS {
        for n_bar_b in [0.05, 0.1, 0.2, 0.5, 1.0, 2.0] {
            let port = ChannelPort::new(1.0 - eta, eta * n_bar_b).unwrap();
            for n_s in [0.1, 0.5, 1.0] {
                let formula = (1.0 - eta).powi(2) * n_s * n_s
                    / (eta * n_bar_b * (1.0 + eta * n_bar_b));
                let active = optimal_two_point(MeanConstraint::new(n_s).unwrap());
                let direct = cp_direct(port, &active).unwrap();
                let ortho =
                    cp_meixner(CoefficientParams::from_port(port).unwrap(), &active).unwrap();
                worst = worst.max((direct / formula - 1.0).abs());
                worst = worst.max((ortho / formula - 1.0).abs());
            }
        }
    }
    // sensing side: the same two-point coefficient matches the printed
    // target-absent formula and the diffuse-benchmark coefficient
    for (tau_w, n_bar_w) in [(0.3, 0.05), (0.3, 0.1), (0.3, 1.0), (0.5, 0.4)] {
        let port = ChannelPort::new(tau_w, (1.0 - tau_w) * n_bar_w).unwrap();
        let diffuse = c_diffuse_sensing(tau_w, n_bar_w).unwrap();
        for n_s in [0.1, 0.5, 1.0] {
            let ambient = (1.0 - tau_w) * n_bar_w;
            let printed = (tau_w * n_s).powi(2) / (ambient * (1.0 + ambient));
            let active = optimal_two_point(MeanConstraint::new(n_s).unwrap());
            let direct = cp_direct(port, &active).unwrap();
            worst = worst.max((direct / printed - 1.0).abs());
            worst = worst.max((diffuse * n_s * n_s / printed - 1.0).abs());
        }
    }
    assert!(worst <= 1e-12, "converse saturation off by relative {worst}");
    println!("[PASS] criterion 5 (converse saturation): worst relative deviation {worst:.3e}");
}

#[test]
fn criterion_6_quadratic_divergence_expansion() {
    let port = ChannelPort::new(0.4, 0.6).unwrap();
    for active in [
        optimal_two_point(MeanConstraint::new(0.5).unwrap()),
        FockDiagonalInput::new(vec![0.3, 0.3, 0.2, 0.2]).unwrap(),
    ] {
        let c = cp_direct(port, &active).unwrap();
        let n_bar = active.mean();
        let ratio = |alpha: f64| {
            let sp = SparseInput::new(active.clone(), alpha, n_bar).unwrap();
            sparse_kl(port, &sp).unwrap() / (0.5 * alpha * alpha * c)
        };
        let r1 = ratio(1e-3);
        let r2 = ratio(5e-4);
        let r4 = ratio(2.5e-4);
        // input-dependent expansion constant estimated from the data itself
        let big_r = ((r1 - r2).abs() / 5e-4).max(1e-6);
        for (alpha, r) in [(1e-3, r1), (5e-4, r2)] {
            let window = 10.0 * alpha * big_r;
            assert!(
                (r - 1.0).abs() <= window,
                "ratio {r} at alpha={alpha} outside 1 +/- {window}"
            );
        }
        assert!(
            (r2 - 1.0).abs() < (r1 - 1.0).abs() && (r4 - 1.0).abs() < (r2 - 1.0).abs(),
            "ratios {r1}, {r2}, {r4} do not converge toward 1"
        );
    }
    println!("[PASS] criterion 6 (quadratic expansion): ratios converge to 1 under alpha-halving");
}

#[test]
fn criterion_7_commuting_state_discrimination() {
    let mut worst_pair = 0.0f64;
    let mut worst_idler = 0.0f64;
    for n in [0.5, 1.0, 2.0] {
        for m in [0.5, 1.0, 2.0] {
            let va = CovarianceMatrix::thermal(n).unwrap();
            let vb = CovarianceMatrix::thermal(m).unwrap();
            let quantum = gaussian_qcb(&va, &vb).unwrap();
            let ell_max = truncation_level(n.max(m), 1e-16, 0).unwrap() + 8;
            let p = thermal_pmf(n, ell_max).unwrap();
            let r = thermal_pmf(m, ell_max).unwrap();
            let classical = classical_chernoff(&p, &r).unwrap();
            worst_pair = worst_pair.max((quantum.exponent - classical.exponent).abs());
            let idler = CovarianceMatrix::thermal(0.7).unwrap();
            let extended = gaussian_qcb(&va.tensor(&idler), &vb.tensor(&idler)).unwrap();
            worst_idler = worst_idler.max((extended.exponent - quantum.exponent).abs());
        }
    }
    assert!(worst_pair <= 1e-8, "commuting-state mismatch {worst_pair}");
    assert!(worst_idler <= 1e-10, "idler factorization broke by {worst_idler}");
    println!(
        "[PASS] criterion 7 (commuting discrimination): pair err {worst_pair:.3e}, idler err {worst_idler:.3e}"
    );
}

struct Curve {
    rows: Vec<Vec<f64>>,
}

fn run_sweep(args: &[String]) -> Curve {
    let out = Command::new(env!("CARGO_BIN_EXE_covertsig"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "sweep failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("n_s"))
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().unwrap())
                .collect::<Vec<f64>>()
        })
        .collect();
    Curve { rows }
}

fn run_crossover(args: &[String]) -> Option<f64> {
    let out = Command::new(env!("CARGO_BIN_EXE_covertsig"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    text.trim()
        .strip_prefix("crossover_n_s=")
        .map(|v| v.parse().unwrap())
}

#[test]
fn criterion_8_figure_level_reproduction() {
    let start = Instant::now();
    let points = "120";

    // communication panels
    for &eta in &FIG3_ETAS {
        let mut crossovers = 0usize;
        for &n_bar_b in &COMM_BACKGROUNDS {
            let base: Vec<String> = [
                "comm-sweep",
                "--eta",
                &eta.to_string(),
                "--n-bar-b",
                &n_bar_b.to_string(),
                "--points",
                points,
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            let curve = run_sweep(&base);
            assert_eq!(curve.rows.len(), 120);
            // (a) the Gaussian benchmark dominates at the smallest brightness
            let first = &curve.rows[0];
            assert!(
                first[2] > first[1],
                "eta={eta} nb={n_bar_b}: benchmark not dominant at n_s={}",
                first[0]
            );
            // (b) crossover flag inside (0, 1]
            if curve.rows.iter().any(|r| r[5] == 1.0) {
                crossovers += 1;
                // (c) crossover location invariant in the covertness budget
                let xover = |delta: &str| {
                    run_crossover(
                        &[
                            "crossover",
                            "--mode",
                            "comm",
                            "--eta",
                            &eta.to_string(),
                            "--n-bar-b",
                            &n_bar_b.to_string(),
                            "--delta",
                            delta,
                        ]
                        .iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>(),
                    )
                };
                let at_005 = xover("0.05").expect("crossover at delta=0.05");
                let at_001 = xover("0.01").expect("crossover at delta=0.01");
                assert!(
                    (at_005 - at_001).abs() <= 2e-4,
                    "eta={eta} nb={n_bar_b}: crossover moved {at_005} -> {at_001}"
                );
            }
        }
        assert!(
            crossovers >= 1,
            "no communication crossover in panel eta={eta}"
        );
    }

    // sensing panels (tau_a = tau_w = 0.3)
    for &gamma1 in &FIG4_GAMMAS {
        let mut crossovers = 0usize;
        for &background in &SENSE_BACKGROUNDS {
            let base: Vec<String> = [
                "sense-sweep",
                "--tau-a",
                "0.3",
                "--tau-w",
                "0.3",
                "--gamma1",
                &gamma1.to_string(),
                "--n-bar-a",
                &background.to_string(),
                "--n-bar-w",
                &background.to_string(),
                "--points",
                points,
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            let curve = run_sweep(&base);
            assert_eq!(curve.rows.len(), 120);
            let first = &curve.rows[0];
            assert!(
                first[2] > first[1],
                "gamma1={gamma1} nb={background}: benchmark not dominant at n_s={}",
                first[0]
            );
            let has_crossover = curve.rows.iter().any(|r| r[1] >= r[2]);
            if has_crossover {
                crossovers += 1;
                let xover = |delta: &str| {
                    run_crossover(
                        &[
                            "crossover",
                            "--mode",
                            "sense",
                            "--tau-a",
                            "0.3",
                            "--tau-w",
                            "0.3",
                            "--gamma1",
                            &gamma1.to_string(),
                            "--n-bar-a",
                            &background.to_string(),
                            "--n-bar-w",
                            &background.to_string(),
                            "--delta",
                            delta,
                        ]
                        .iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>(),
                    )
                };
                let at_005 = xover("0.05").expect("crossover at delta=0.05");
                let at_001 = xover("0.01").expect("crossover at delta=0.01");
                assert!(
                    (at_005 - at_001).abs() <= 2e-4,
                    "gamma1={gamma1} nb={background}: crossover moved {at_005} -> {at_001}"
                );
            }
        }
        assert!(crossovers >= 1, "no sensing crossover in panel gamma1={gamma1}");
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "figure sweeps took {elapsed:?}, budget 5 min"
    );
    println!(
        "[PASS] criterion 8 (figure-level reproduction): 9 comm + 6 sense curves, crossovers present and delta-invariant, {:.1} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_9_discrete_moment_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e45_ea12);
    for trial in 0..10_000usize {
        let input = random_input(&mut rng, 8);
        for y in [2usize, 3, 4] {
            assert!(
                discrete_jensen_check(y, &input),
                "moment inequality failed at trial {trial}, order {y}"
            );
        }
    }
    // exact equality on two-point allocations
    let mut worst = 0.0f64;
    for n_bar in [0.3, 0.5, 1.0, 1.7, 2.3, 3.6] {
        let tp = optimal_two_point(MeanConstraint::new(n_bar).unwrap());
        let k = n_bar.floor();
        let beta = n_bar - k;
        for y in [2usize, 3, 4] {
            let lhs: f64 = tp
                .probs()
                .iter()
                .enumerate()
                .map(|(i, rho)| rho * covertsig_core::binomial(i, y))
                .sum();
            let rhs = (1.0 - beta) * covertsig_core::binomial(k as usize, y)
                + beta * covertsig_core::binomial(k as usize + 1, y);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    assert!(worst <= 1e-14, "two-point equality gap {worst}");
    println!(
        "[PASS] criterion 9 (discrete moment inequality): 10000 trials clean, equality gap {worst:.2e}"
    );
}
