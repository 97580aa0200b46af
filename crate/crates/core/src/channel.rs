//! Photon-number statistics of a composed lossy thermal-noise bosonic channel.
//!
//! A single generic output port is described by two scalars: the
//! transmissivity `kappa` multiplying the input mode and the ambient thermal
//! mean photon number `nu` seen at that port when the input is vacuum. Every
//! channel instantiation in the communication and sensing scenarios (the
//! adversary's tap, the intended receiver, the sensing return, the adversary's
//! sensing port) reduces to one such pair.
//!
//! For a Fock-diagonal input the port output is again Fock-diagonal with
//! transition probabilities
//!
//! ```text
//! p(l|i) = sum_{t=0}^{i} sum_{u=0}^{l} (-1)^{t+u} C(i,t) C(l,u) kappa^t
//!          C(t+u,t) (1+nu)^{-(t+u+1)}
//! ```
//!
//! equal to the integral `int_0^inf exp(-(1+nu)x) L_l(x) L_i(kappa x) dx`.
//! The double sum cancels catastrophically at moderate indices (terms reach
//! ~1e11 at i = l = 20 while the result lies in [0,1]), so the production
//! evaluator uses an exact hypergeometric rearrangement that factors out the
//! thermal weight,
//!
//! ```text
//! p(l|i) = lambda_l * sum_{t=0}^{i} C(i,t) (-kappa/nu)^t B_t(l),
//! B_t(l) = sum_{k=0}^{t} (-1)^k C(t,k) C(l+k,k) (1+nu)^{-k},
//! ```
//!
//! evaluated in double-double arithmetic. The integral form stays available
//! as an independent quadrature cross-check and is never called by the
//! production paths.

use crate::dd::{binomial_dd, Dd};
use crate::error::{Error, Result};
use crate::orthopoly::{binomial, laguerre_raw};

/// Cap on Fock indices entering the transition kernel. Larger than the
/// polynomial degree cap because thermal tails at high ambient brightness
/// need long truncation windows.
pub const KERNEL_INDEX_CAP: usize = 4096;

/// One output port of a composed lossy thermal-noise channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelPort {
    kappa: f64,
    nu: f64,
}

impl ChannelPort {
    pub fn new(kappa: f64, nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) || !kappa.is_finite() {
            return Err(Error::Domain {
                name: "kappa",
                value: kappa,
                constraint: "transmissivity in [0, 1]",
            });
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::Domain {
                name: "nu",
                value: nu,
                constraint: "ambient thermal mean >= 0",
            });
        }
        Ok(ChannelPort { kappa, nu })
    }

    pub fn kappa(self) -> f64 {
        self.kappa
    }

    pub fn nu(self) -> f64 {
        self.nu
    }
}

/// Truncated photon-number distribution with explicit tail bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl PhotonDistribution {
    /// Entries more negative than -1e-14 are rejected; tiny negative noise is
    /// clamped to zero.
    pub fn new(probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        let mut clamped = probs;
        for (ell, p) in clamped.iter_mut().enumerate() {
            if *p < -1e-14 {
                return Err(Error::Numerical(format!(
                    "photon probability p[{ell}] = {p} below the clamping floor"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        if !(-1e-12..).contains(&tail_mass) {
            return Err(Error::Numerical(format!(
                "negative tail mass {tail_mass}"
            )));
        }
        let tail_mass = tail_mass.max(0.0);
        let total: f64 = clamped.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Numerical(format!(
                "distribution mass {total} deviates from 1"
            )));
        }
        Ok(PhotonDistribution {
            probs: clamped,
            tail_mass,
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, ell: usize) -> f64 {
        self.probs.get(ell).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Mean photon number over the truncated support.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(ell, p)| ell as f64 * p)
            .sum()
    }
}

/// Normalized Fock-diagonal input state with finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct FockDiagonalInput {
    probs: Vec<f64>,
}

impl FockDiagonalInput {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Shape("empty input distribution".into()));
        }
        if probs.len() > KERNEL_INDEX_CAP {
            return Err(Error::IndexCap {
                index: probs.len() - 1,
                cap: KERNEL_INDEX_CAP,
            });
        }
        for (i, p) in probs.iter().enumerate() {
            if !(*p >= 0.0 && p.is_finite()) {
                return Err(Error::Domain {
                    name: "rho_i",
                    value: *p,
                    constraint: "probabilities must be finite and >= 0",
                });
            }
            let _ = i;
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain {
                name: "sum rho_i",
                value: total,
                constraint: "input must be normalized",
            });
        }
        // exact renormalization so downstream mean/moment identities hold to
        // machine precision
        let probs = probs.iter().map(|p| p / total).collect();
        Ok(FockDiagonalInput { probs })
    }

    pub fn vacuum() -> Self {
        FockDiagonalInput { probs: vec![1.0] }
    }

    /// Pure Fock state |i>.
    pub fn fock(i: usize) -> Result<Self> {
        if i > KERNEL_INDEX_CAP {
            return Err(Error::IndexCap {
                index: i,
                cap: KERNEL_INDEX_CAP,
            });
        }
        let mut probs = vec![0.0; i + 1];
        probs[i] = 1.0;
        Ok(FockDiagonalInput { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Largest Fock index in the support vector (trailing zeros included).
    pub fn support_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| i as f64 * p)
            .sum()
    }
}

/// Thermal photon-number distribution: entry `l` is `nu^l / (1+nu)^(l+1)`,
/// tail mass `(nu/(1+nu))^(l_max+1)`.
pub fn thermal_pmf(nu: f64, ell_max: usize) -> Result<PhotonDistribution> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::Domain {
            name: "nu",
            value: nu,
            constraint: "thermal mean >= 0",
        });
    }
    let ratio = nu / (1.0 + nu);
    let mut probs = Vec::with_capacity(ell_max + 1);
    let mut p = 1.0 / (1.0 + nu);
    for _ in 0..=ell_max {
        probs.push(p);
        p *= ratio;
    }
    // after the loop p = ratio^(ell_max+1) / (1+nu) * (1+nu); recompute the
    // exact closed form for the tail
    let tail = ratio.powi(ell_max as i32 + 1);
    PhotonDistribution::new(probs, tail)
}

fn check_kernel_index(name: &'static str, index: usize) -> Result<()> {
    let _ = name;
    if index > KERNEL_INDEX_CAP {
        return Err(Error::IndexCap {
            index,
            cap: KERNEL_INDEX_CAP,
        });
    }
    Ok(())
}

/// `B_t(l)` factors for t = 0..=t_max at fixed output index `l`:
/// `B_t(l) = sum_{k=0}^{t} (-1)^k C(t,k) C(l+k,k) z^k`, `z = 1/(1+nu)`.
fn kernel_b_factors(ell: usize, t_max: usize, nu: f64) -> Vec<Dd> {
    let z = Dd::ONE.div_f64(1.0 + nu);
    // C(l+k, k) and z^k built incrementally in k
    let mut clk = Vec::with_capacity(t_max + 1);
    let mut zk = Vec::with_capacity(t_max + 1);
    let mut c = Dd::ONE;
    let mut zp = Dd::ONE;
    for k in 0..=t_max {
        if k > 0 {
            c = c.mul_f64((ell + k) as f64).div_f64(k as f64);
            zp = zp.mul(z);
        }
        clk.push(c);
        zk.push(zp);
    }
    let mut out = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let mut b = Dd::ZERO;
        for k in 0..=t {
            let term = binomial_dd(t, k).mul(clk[k]).mul(zk[k]);
            b = if k % 2 == 0 { b.add(term) } else { b.sub(term) };
        }
        out.push(b);
    }
    out
}

/// `R_i(l) - 1` for i = 0..=i_max, where `R_i(l) = p(l|i) / lambda_l`.
/// Requires `nu > 0`; the pure-loss case is handled separately.
pub(crate) fn ratios_minus_one(port: ChannelPort, ell: usize, i_max: usize) -> Vec<Dd> {
    let b = kernel_b_factors(ell, i_max, port.nu);
    let w = -port.kappa / port.nu;
    // powers of w
    let mut wp = Vec::with_capacity(i_max + 1);
    let mut p = Dd::ONE;
    for t in 0..=i_max {
        if t > 0 {
            p = p.mul_f64(w);
        }
        wp.push(p);
    }
    let mut out = Vec::with_capacity(i_max + 1);
    for i in 0..=i_max {
        let mut acc = Dd::ZERO;
        for t in 1..=i {
            acc = acc.add(binomial_dd(i, t).mul(wp[t]).mul(b[t]));
        }
        out.push(acc);
    }
    out
}

/// Thermal weight `lambda_l = nu^l / (1+nu)^(l+1)` in double-double.
pub(crate) fn thermal_weight_dd(nu: f64, ell: usize) -> Dd {
    let one_plus = Dd::from_f64(1.0).add(Dd::from_f64(nu));
    let q = Dd::from_f64(nu).div(one_plus);
    q.powi(ell).div(one_plus)
}

/// Pure-loss (`nu = 0`) transition: binomial thinning of the input photons.
fn pure_loss_transition(kappa: f64, i: usize, ell: usize) -> f64 {
    if ell > i {
        return 0.0;
    }
    binomial(i, ell) * kappa.powi(ell as i32) * (1.0 - kappa).powi((i - ell) as i32)
}

/// Transition probability `p(l|i)` of the port, the probability of counting
/// `l` photons at the output when the input is the Fock state |i>.
pub fn fock_transition(port: ChannelPort, i: usize, ell: usize) -> Result<f64> {
    check_kernel_index("i", i)?;
    check_kernel_index("ell", ell)?;
    if port.nu == 0.0 {
        return Ok(pure_loss_transition(port.kappa, i, ell));
    }
    let rm1 = ratios_minus_one(port, ell, i);
    let p = thermal_weight_dd(port.nu, ell)
        .mul(Dd::ONE.add(rm1[i]))
        .to_f64();
    if !(-1e-10..=1.0 + 1e-10).contains(&p) {
        return Err(Error::Numerical(format!(
            "transition probability p({ell}|{i}) = {p} outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Integral form of the transition probability,
/// `int_0^inf exp(-(1+nu)x) L_l(x) L_i(kappa x) dx`, by node-doubling
/// Gauss-Legendre quadrature. Cross-validation oracle for [`fock_transition`];
/// not used by any production path.
pub fn fock_transition_quadrature(port: ChannelPort, i: usize, ell: usize) -> Result<f64> {
    check_kernel_index("i", i)?;
    check_kernel_index("ell", ell)?;
    // |L_n(x)| <= exp(x/2) bounds the integrand by exp(-c x)
    let c = 1.0 + port.nu - 0.5 * (1.0 + port.kappa);
    if c < 0.05 {
        return Err(Error::Numerical(format!(
            "quadrature envelope decay rate {c} too small for a certified tail"
        )));
    }
    let upper = (34.0 + (1.0 / c).ln().max(0.0)) / c;
    let f = |x: f64| {
        (-(1.0 + port.nu) * x).exp() * laguerre_raw(ell, x) * laguerre_raw(i, port.kappa * x)
    };
    let mut prev = gauss_legendre(&f, 0.0, upper, 64);
    let mut nodes = 128;
    while nodes <= 8192 {
        let next = gauss_legendre(&f, 0.0, upper, nodes);
        if (next - prev).abs() < 1e-12 {
            return Ok(next);
        }
        prev = next;
        nodes *= 2;
    }
    Err(Error::Numerical(
        "quadrature failed to converge below 1e-12 under node doubling".into(),
    ))
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and derivative by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static RULES: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    let rule = {
        let mut guard = rules.lock().unwrap();
        guard.entry(n).or_insert_with(|| legendre_rule(n)).clone()
    };
    let (nodes, weights) = rule;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        let term = w * f(mid + half * x);
        let t = term - comp;
        let s = sum + t;
        comp = (s - sum) - t;
        sum = s;
    }
    half * sum
}

/// Output photon-number distribution of a Fock-diagonal input through the
/// port, truncated at `ell_max`.
pub fn output_distribution(
    port: ChannelPort,
    input: &FockDiagonalInput,
    ell_max: usize,
) -> Result<PhotonDistribution> {
    check_kernel_index("ell_max", ell_max)?;
    let support = input.support_max();
    check_kernel_index("input support", support)?;
    let mut probs = Vec::with_capacity(ell_max + 1);
    if port.nu == 0.0 {
        for ell in 0..=ell_max {
            let p: f64 = input
                .probs()
                .iter()
                .enumerate()
                .map(|(i, rho)| rho * pure_loss_transition(port.kappa, i, ell))
                .sum();
            probs.push(p);
        }
    } else {
        for ell in 0..=ell_max {
            let rm1 = ratios_minus_one(port, ell, support);
            let mut dev = Dd::ZERO;
            for (i, rho) in input.probs().iter().enumerate() {
                if *rho != 0.0 {
                    dev = dev.add(rm1[i].mul_f64(*rho));
                }
            }
            let p = thermal_weight_dd(port.nu, ell)
                .mul(Dd::ONE.add(dev))
                .to_f64();
            if !(-1e-10..=1.0 + 1e-10).contains(&p) {
                return Err(Error::Numerical(format!(
                    "output probability p[{ell}] = {p} outside [0, 1]"
                )));
            }
            probs.push(p.clamp(0.0, 1.0));
        }
    }
    let mass: f64 = probs.iter().sum();
    let tail = (1.0 - mass).max(0.0);
    PhotonDistribution::new(probs, tail)
}

/// Smallest truncation level whose thermal tail `(nu/(1+nu))^(l+1)` falls
/// below `eps_tail`, plus a safety margin of the maximum input Fock index.
pub fn truncation_level(nu: f64, eps_tail: f64, input_support: usize) -> Result<usize> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::Domain {
            name: "nu",
            value: nu,
            constraint: "thermal mean >= 0",
        });
    }
    if !(eps_tail > 0.0 && eps_tail < 1.0) {
        return Err(Error::Domain {
            name: "eps_tail",
            value: eps_tail,
            constraint: "0 < eps_tail < 1",
        });
    }
    let base = if nu == 0.0 {
        0
    } else {
        let q = nu / (1.0 + nu);
        // smallest l with (l+1) ln q < ln eps
        let l_plus_1 = (eps_tail.ln() / q.ln()).ceil() as usize;
        l_plus_1.saturating_sub(1).max(0)
    };
    let level = base + input_support;
    check_kernel_index("truncation level", level)?;
    Ok(level)
}
