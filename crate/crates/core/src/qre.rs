//! Adversary-side relative-entropy detectability: the quadratic perturbation
//! coefficient of sparse signaling in two independent representations, the
//! full (unexpanded) sparse divergence, and closed forms for thermal
//! (Gaussian-modulated) active outputs.
//!
//! For an active output `p` against the innocent thermal distribution
//! `lambda`, the quadratic coefficient is the chi-square functional
//! `C_P = sum_l (p_l - lambda_l)^2 / lambda_l`. The orthogonal representation
//! re-expresses it through the input's factorial moments,
//! `C_P = sum_y q^{-y} theta^{2y} mu_y^2` with `q = nu/(1+nu)` and
//! `theta = kappa/(1+nu)`; the two routes share no code and cross-validate
//! each other.

use crate::channel::{ratios_minus_one, thermal_weight_dd, ChannelPort, FockDiagonalInput};
use crate::channel::KERNEL_INDEX_CAP;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::optimizer::factorial_moments;
use crate::orthopoly::binomial;

/// Sparse ensemble: an active state transmitted with activity probability
/// `alpha`, vacuum otherwise, at target brightness `n_bar_s`.
#[derive(Clone, Debug)]
pub struct SparseInput {
    active: FockDiagonalInput,
    alpha: f64,
    n_bar_s: f64,
}

impl SparseInput {
    /// `alpha` may be 1 (always-on edge case); the declared brightness must
    /// match the active state's mean to 1e-12.
    pub fn new(active: FockDiagonalInput, alpha: f64, n_bar_s: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                constraint: "activity probability in (0, 1]",
            });
        }
        let mean = active.mean();
        if (mean - n_bar_s).abs() > 1e-12 * n_bar_s.abs().max(1.0) {
            return Err(Error::Domain {
                name: "n_bar_s",
                value: n_bar_s,
                constraint: "must equal the active state's mean photon number",
            });
        }
        Ok(SparseInput {
            active,
            alpha,
            n_bar_s,
        })
    }

    pub fn active(&self) -> &FockDiagonalInput {
        &self.active
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_bar_s(&self) -> f64 {
        self.n_bar_s
    }
}

/// The (q, theta) pair of the orthogonal representation for one port.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientParams {
    q: f64,
    theta: f64,
}

impl CoefficientParams {
    pub fn new(q: f64, theta: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain {
                name: "q",
                value: q,
                constraint: "geometric weight in (0, 1)",
            });
        }
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::Domain {
                name: "theta",
                value: theta,
                constraint: "coupling >= 0",
            });
        }
        Ok(CoefficientParams { q, theta })
    }

    /// `q = nu/(1+nu)`, `theta = kappa/(1+nu)`. Requires a thermal background
    /// (`nu > 0`).
    pub fn from_port(port: ChannelPort) -> Result<Self> {
        if port.nu() == 0.0 {
            return Err(Error::DegenerateBackground);
        }
        CoefficientParams::new(port.nu() / (1.0 + port.nu()), port.kappa() / (1.0 + port.nu()))
    }

    pub fn q(self) -> f64 {
        self.q
    }

    pub fn theta(self) -> f64 {
        self.theta
    }
}

/// Per-truncation data shared by the chi-square and divergence loops.
struct DeviationSeries {
    port: ChannelPort,
    support: usize,
    rho: Vec<f64>,
    /// envelope scale D with |R_i(l) - 1| <= C(l+j, j) D^j
    envelope_base: f64,
}

impl DeviationSeries {
    fn new(port: ChannelPort, active: &FockDiagonalInput) -> Self {
        let z = 1.0 / (1.0 + port.nu());
        let envelope_base = 1.0 + port.kappa() / port.nu() * (1.0 + z);
        DeviationSeries {
            port,
            support: active.support_max(),
            rho: active.probs().to_vec(),
            envelope_base,
        }
    }

    /// (lambda_l, d_l) with d_l = p_l/lambda_l - 1.
    fn at(&self, ell: usize) -> (Dd, Dd) {
        let rm1 = ratios_minus_one(self.port, ell, self.support);
        let mut dev = Dd::ZERO;
        for (i, rho) in self.rho.iter().enumerate() {
            if *rho != 0.0 {
                dev = dev.add(rm1[i].mul_f64(*rho));
            }
        }
        (thermal_weight_dd(self.port.nu(), ell), dev)
    }

    /// Certified bound on |d_l| from the hypergeometric envelope.
    fn deviation_bound(&self, ell: usize) -> f64 {
        binomial(ell + self.support, self.support) * self.envelope_base.powi(self.support as i32)
    }

    /// Upper bound on sum_{l >= start} lambda_l * g(d_l) for any g with
    /// g(d) <= d^2, via the geometric-ratio tail of the envelope.
    /// Returns None while the ratio test fails.
    fn chi_square_tail_bound(&self, start: usize) -> Option<f64> {
        let q = self.port.nu() / (1.0 + self.port.nu());
        let growth = (start as f64 + 1.0 + self.support as f64) / (start as f64 + 1.0);
        let ratio = q * growth * growth;
        if ratio >= 1.0 {
            return None;
        }
        let e = self.deviation_bound(start);
        let lambda = (1.0 - q) * q.powi(start as i32);
        Some(lambda * e * e / (1.0 - ratio))
    }
}

/// Chi-square detectability coefficient by direct summation over the output
/// photon-number distribution, with a certified geometric tail bound.
pub fn cp_direct(port: ChannelPort, active: &FockDiagonalInput) -> Result<f64> {
    if port.kappa() == 0.0 {
        // nothing reaches the port; the output equals the innocent state
        return Ok(0.0);
    }
    if port.nu() == 0.0 {
        return Err(Error::DegenerateBackground);
    }
    if active.support_max() == 0 {
        return Ok(0.0);
    }
    let series = DeviationSeries::new(port, active);
    let mut acc = Dd::ZERO;
    for ell in 0..=KERNEL_INDEX_CAP {
        let (lambda, dev) = series.at(ell);
        acc = acc.add(lambda.mul(dev).mul(dev));
        if let Some(tail) = series.chi_square_tail_bound(ell + 1) {
            let value = acc.to_f64();
            let threshold = (value * 1e-13).clamp(1e-18, 1e-13);
            if tail < threshold {
                return Ok(value);
            }
        }
    }
    Err(Error::Numerical(
        "chi-square tail failed to certify below the truncation cap".into(),
    ))
}

/// Orthogonal (factorial-moment) representation of the same coefficient:
/// `sum_{y=1}^{j} q^{-y} theta^{2y} mu_y^2`.
pub fn cp_meixner(params: CoefficientParams, active: &FockDiagonalInput) -> Result<f64> {
    let j = active.support_max();
    if j == 0 {
        return Ok(0.0);
    }
    let moments = factorial_moments(active, j);
    let base = params.theta() * params.theta() / params.q();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut weight = 1.0f64;
    for y in 1..=j {
        weight *= base;
        let mu = moments.mu(y);
        let term = weight * mu * mu;
        let t = term - comp;
        let s = sum + t;
        comp = (s - sum) - t;
        sum = s;
    }
    Ok(sum)
}

/// `(1+x) ln(1+x) - x` for `x >= -1`, stable near zero.
fn entropy_g(x: f64) -> f64 {
    debug_assert!(x >= -1.0 - 1e-12);
    if x <= -1.0 {
        return 1.0;
    }
    if x.abs() < 1e-2 {
        // sum_{k>=2} (-1)^k x^k / (k(k-1))
        let x2 = x * x;
        return x2
            * (0.5
                + x * (-1.0 / 6.0
                    + x * (1.0 / 12.0 + x * (-0.05 + x * (1.0 / 30.0 - x / 42.0)))));
    }
    (1.0 + x) * x.ln_1p() - x
}

/// Full (unexpanded) single-mode divergence of the sparse ensemble against
/// the innocent thermal state,
/// `sum_l p_{alpha,l} ln(p_{alpha,l} / lambda_l)` in nats with
/// `p_{alpha,l} = (1-alpha) lambda_l + alpha p_l`.
///
/// Evaluated as `sum_l lambda_l g(alpha d_l) + alpha sum_l lambda_l d_l`
/// with `g(x) = (1+x)ln(1+x) - x`, which is term-wise nonnegative up to the
/// tiny truncation correction.
pub fn sparse_kl(port: ChannelPort, input: &SparseInput) -> Result<f64> {
    if port.kappa() == 0.0 {
        return Ok(0.0);
    }
    if port.nu() == 0.0 {
        return Err(Error::DegenerateBackground);
    }
    if input.active().support_max() == 0 {
        return Ok(0.0);
    }
    let alpha = input.alpha();
    let series = DeviationSeries::new(port, input.active());
    let mut acc = 0.0f64;
    let mut comp = 0.0f64;
    let mut linear = Dd::ZERO;
    for ell in 0..=KERNEL_INDEX_CAP {
        let (lambda, dev) = series.at(ell);
        let term = lambda.to_f64() * entropy_g(alpha * dev.to_f64());
        let t = term - comp;
        let s = acc + t;
        comp = (s - acc) - t;
        acc = s;
        linear = linear.add(lambda.mul(dev));

        if let Some(tail) = kl_tail_bound(&series, alpha, ell + 1) {
            let value = acc + alpha * linear.to_f64();
            let threshold = (value.abs() * 1e-13).clamp(1e-20, 1e-13);
            if tail < threshold {
                if value < -1e-12 {
                    return Err(Error::Numerical(format!(
                        "divergence evaluated to {value} < 0"
                    )));
                }
                return Ok(value.max(0.0));
            }
        }
    }
    Err(Error::Numerical(
        "divergence tail failed to certify below the truncation cap".into(),
    ))
}

/// Tail bound for the divergence loop: `g(x) <= x^2` on [-1, inf) together
/// with the linear correction `alpha |d| <= alpha E`.
fn kl_tail_bound(series: &DeviationSeries, alpha: f64, start: usize) -> Option<f64> {
    let q = series.port.nu() / (1.0 + series.port.nu());
    let growth = (start as f64 + 1.0 + series.support as f64) / (start as f64 + 1.0);
    let ratio = q * growth * growth;
    if ratio >= 1.0 {
        return None;
    }
    let e = alpha * series.deviation_bound(start);
    let lambda = (1.0 - q) * q.powi(start as i32);
    Some(lambda * e * (e + 1.0) / (1.0 - ratio))
}

/// Coefficient for an active output that is thermal with mean
/// `kappa n_s + nu` (Gaussian-modulated active input):
/// `(kappa n_s)^2 / (nu (1+nu) - (kappa n_s)^2)`.
pub fn c_thermal_active(port: ChannelPort, n_s: f64) -> Result<f64> {
    if !(n_s >= 0.0 && n_s.is_finite()) {
        return Err(Error::Domain {
            name: "n_s",
            value: n_s,
            constraint: "mean photon number >= 0",
        });
    }
    let coupling = port.kappa() * n_s;
    if coupling == 0.0 {
        return Ok(0.0);
    }
    let background = port.nu() * (1.0 + port.nu());
    if coupling * coupling >= background {
        return Err(Error::Divergence(format!(
            "(kappa n_s)^2 = {} >= nu(1+nu) = {background}: chi-square series diverges",
            coupling * coupling
        )));
    }
    Ok(coupling * coupling / (background - coupling * coupling))
}

/// Quadratic coefficient shared by the diffuse Gaussian-probe scheme and the
/// low-brightness two-point optimizer at the adversary's sensing port:
/// `tau_w^2 / ((1-tau_w) n_w (1 + (1-tau_w) n_w))`.
pub fn c_diffuse_sensing(tau_w: f64, n_w: f64) -> Result<f64> {
    if !(tau_w > 0.0 && tau_w < 1.0) {
        return Err(Error::Domain {
            name: "tau_w",
            value: tau_w,
            constraint: "transmissivity in (0, 1) strict",
        });
    }
    if !(n_w > 0.0 && n_w.is_finite()) {
        return Err(Error::Domain {
            name: "n_w",
            value: n_w,
            constraint: "thermal mean > 0",
        });
    }
    let ambient = (1.0 - tau_w) * n_w;
    Ok(tau_w * tau_w / (ambient * (1.0 + ambient)))
}

/// Relative-entropy budget implied by a detection-error slack `delta`
/// through the Pinsker conversion: `8 delta^2`.
pub fn pinsker_budget(delta: f64) -> Result<f64> {
    if !(delta >= 0.0 && delta < 0.5) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            constraint: "detection slack in [0, 1/2)",
        });
    }
    Ok(8.0 * delta * delta)
}
