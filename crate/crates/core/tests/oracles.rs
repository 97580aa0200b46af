//! Independent oracles for the numerical kernels: exact rational arithmetic
//! for the alternating transition sums, closed forms for divergences, and
//! frozen spot values computed from those oracles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use covertsig_core::{
    bob_channel, c_thermal_active, cp_direct, cp_meixner, fock_transition,
    fock_transition_quadrature, kl, sparse_kl, thermal_pmf, truncation_level, ChannelPort,
    CoefficientParams, CommScenario, FockDiagonalInput, SparseInput,
};

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact rational representation of an f64 (every finite f64 is rational).
fn rational_of(x: f64) -> BigRational {
    assert!(x.is_finite());
    let (mantissa, exponent, sign) = {
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        if exp == 0 {
            (frac, -1074i64, sign)
        } else {
            (frac | (1u64 << 52), exp - 1075, sign)
        }
    };
    let mut r = BigRational::from_integer(BigInt::from(mantissa)) * big(sign);
    if exponent >= 0 {
        r *= BigRational::from_integer(BigInt::from(2).pow(exponent as u32));
    } else {
        r /= BigRational::from_integer(BigInt::from(2).pow((-exponent) as u32));
    }
    r
}

fn binom_big(n: usize, k: usize) -> BigRational {
    if k > n {
        return BigRational::zero();
    }
    let mut c = BigRational::one();
    for j in 1..=k {
        c = c * big((n - k + j) as i64) / big(j as i64);
    }
    c
}

/// The transition probability as the literal alternating double sum,
/// `sum_t sum_u (-1)^(t+u) C(i,t) C(l,u) kappa^t C(t+u,t) (1+nu)^-(t+u+1)`,
/// in exact rational arithmetic.
fn fock_transition_exact(kappa: f64, nu: f64, i: usize, ell: usize) -> f64 {
    let kappa = rational_of(kappa);
    let one_plus_nu = rational_of(nu) + BigRational::one();
    let mut sum = BigRational::zero();
    for t in 0..=i {
        for u in 0..=ell {
            let mut term = binom_big(i, t) * binom_big(ell, u) * binom_big(t + u, t);
            let mut kp = BigRational::one();
            for _ in 0..t {
                kp *= kappa.clone();
            }
            term *= kp;
            let mut denom = BigRational::one();
            for _ in 0..=(t + u) {
                denom *= one_plus_nu.clone();
            }
            term /= denom;
            if (t + u) % 2 == 1 {
                sum -= term;
            } else {
                sum += term;
            }
        }
    }
    sum.to_f64().expect("fits f64")
}

#[test]
fn kernel_matches_exact_rational_arithmetic() {
    let mut worst = 0.0f64;
    for (kappa, nu) in [(0.4, 0.6), (0.8, 0.5), (0.2, 2.0), (0.7, 1.3)] {
        let port = ChannelPort::new(kappa, nu).unwrap();
        for i in 0..=12 {
            for ell in 0..=12 {
                let fast = fock_transition(port, i, ell).unwrap();
                let exact = fock_transition_exact(kappa, nu, i, ell);
                worst = worst.max((fast - exact).abs());
            }
        }
    }
    assert!(worst < 1e-14, "worst deviation {worst}");
}

#[test]
fn kernel_exact_oracle_agrees_with_quadrature() {
    // ties the two independent oracles to each other as well
    let port = ChannelPort::new(0.4, 0.6).unwrap();
    for (i, ell) in [(2usize, 0usize), (3, 4), (5, 7)] {
        let exact = fock_transition_exact(0.4, 0.6, i, ell);
        let integral = fock_transition_quadrature(port, i, ell).unwrap();
        assert!((exact - integral).abs() < 1e-11, "({i},{ell})");
    }
}

#[test]
fn frozen_kernel_spot_values() {
    // values computed with the exact rational oracle above
    let cases = [
        // (kappa, nu, i, ell, expected)
        (0.4, 0.6, 2, 0, 0.3515625),
        (0.3, 2.0, 3, 4, 0.08269958847736625),
        (0.8, 0.5, 6, 9, 0.04678666113834781),
    ];
    for (kappa, nu, i, ell, expected) in cases {
        let exact = fock_transition_exact(kappa, nu, i, ell);
        assert!(
            (exact - expected).abs() < 1e-15,
            "oracle drifted at ({kappa},{nu},{i},{ell}): {exact}"
        );
        let port = ChannelPort::new(kappa, nu).unwrap();
        let fast = fock_transition(port, i, ell).unwrap();
        assert!((fast - expected).abs() < 1e-13);
    }
}

/// Exact factorial-moment route for the chi-square coefficient on a
/// rational input, summing `q^-y theta^2y mu_y^2` in rationals.
fn cp_exact(kappa: f64, nu: f64, probs: &[(i64, i64)]) -> f64 {
    let kappa = rational_of(kappa);
    let nu = rational_of(nu);
    let q = nu.clone() / (BigRational::one() + nu.clone());
    let theta = kappa / (BigRational::one() + nu);
    let j = probs.len() - 1;
    let mut total = BigRational::zero();
    for y in 1..=j {
        let mut mu = BigRational::zero();
        for (i, &(num, den)) in probs.iter().enumerate() {
            if i >= y {
                mu += big(num) / big(den) * binom_big(i, y);
            }
        }
        let mut weight = BigRational::one();
        for _ in 0..y {
            weight = weight * theta.clone() * theta.clone() / q.clone();
        }
        total += weight * mu.clone() * mu;
    }
    total.to_f64().unwrap()
}

#[test]
fn coefficient_routes_match_exact_rational_value() {
    // rho = (1/4, 1/4, 1/8, 3/8), kappa = 0.4, nu = 0.6
    let probs_rational = [(1i64, 4i64), (1, 4), (1, 8), (3, 8)];
    let exact = cp_exact(0.4, 0.6, &probs_rational);
    // frozen from the rational oracle
    assert!((exact - 0.4841579861111112).abs() < 1e-15, "oracle drifted: {exact}");

    let active = FockDiagonalInput::new(vec![0.25, 0.25, 0.125, 0.375]).unwrap();
    let port = ChannelPort::new(0.4, 0.6).unwrap();
    let direct = cp_direct(port, &active).unwrap();
    let ortho = cp_meixner(CoefficientParams::from_port(port).unwrap(), &active).unwrap();
    assert!((direct - exact).abs() < 1e-12, "direct {direct} vs {exact}");
    assert!((ortho - exact).abs() < 1e-12, "orthogonal {ortho} vs {exact}");
}

#[test]
fn thermal_coefficient_matches_truncated_geometric_active_state() {
    // the thermal active state is the n_s-mean geometric distribution; a
    // deep truncation of it must reproduce the closed form through the
    // generic chi-square route
    let port = ChannelPort::new(0.3, 1.0).unwrap();
    let n_s = 0.5f64;
    let closed = c_thermal_active(port, n_s).unwrap();
    let support = 44; // geometric(0.5) tail below 1e-13 * renormalization
    let mut probs: Vec<f64> = (0..=support)
        .map(|i| n_s.powi(i as i32) / (1.0 + n_s).powi(i as i32 + 1))
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    let active = FockDiagonalInput::new(probs).unwrap();
    let direct = cp_direct(port, &active).unwrap();
    assert!(
        (direct - closed).abs() < 1e-9,
        "direct {direct} vs closed {closed}"
    );
}

#[test]
fn sparse_divergence_always_on_case_matches_direct_summation() {
    // alpha = 1 with a one-photon active state: plain divergence between two
    // explicit distributions
    let port = ChannelPort::new(0.4, 0.6).unwrap();
    let active = FockDiagonalInput::new(vec![0.0, 1.0]).unwrap();
    let sp = SparseInput::new(active, 1.0, 1.0).unwrap();
    let value = sparse_kl(port, &sp).unwrap();

    let ell_max = truncation_level(1.0, 1e-16, 1).unwrap() + 10;
    let mut direct = 0.0;
    for ell in 0..=ell_max {
        let p = fock_transition(port, 1, ell).unwrap();
        let lam = 0.6f64.powi(ell as i32) / 1.6f64.powi(ell as i32 + 1);
        if p > 0.0 {
            direct += p * (p / lam).ln();
        }
    }
    assert!((value - direct).abs() < 1e-12, "{value} vs {direct}");
}

#[test]
fn receiver_kl_against_geometric_closed_form() {
    // KL(geometric(a) || geometric(b)) = a ln(a/b) + (a+1) ln((1+b)/(1+a))
    let a = 1.0f64;
    let b = 0.5f64;
    let ell_max = 120;
    let p = thermal_pmf(a, ell_max).unwrap();
    let q = thermal_pmf(b, ell_max).unwrap();
    let closed = a * (a / b).ln() + (a + 1.0) * ((1.0 + b) / (1.0 + a)).ln();
    assert!((kl(&p, &q).unwrap() - closed).abs() < 1e-10);
}

#[test]
fn receiver_channel_rate_is_positive_and_increasing() {
    let s = CommScenario::new(0.6, 1.0, 0.05).unwrap();
    let mut last = 0.0;
    for n_s in [0.2, 0.4, 0.6, 0.8, 1.0] {
        let ch = bob_channel(&s, n_s).unwrap();
        let rate = kl(ch.on(), ch.off()).unwrap();
        assert!(rate > last, "rate must increase: {rate} after {last}");
        last = rate;
    }
}

