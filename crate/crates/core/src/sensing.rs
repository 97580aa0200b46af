//! Covert-sensing capability: photon-counting Chernoff exponents for the
//! covertness-optimized Fock-diagonal probe, the Gaussian quantum Chernoff
//! bound for the sparse two-mode-squeezed-vacuum benchmark, and their
//! crossover in probe brightness.
//!
//! Covariance matrices use the vacuum-is-identity convention in mode-major
//! (x1, p1, x2, p2, ...) ordering; a thermal mode with mean `n` has diagonal
//! `2n + 1`.

use rayon::prelude::*;

use crate::channel::{output_distribution, truncation_level, ChannelPort, FockDiagonalInput, PhotonDistribution};
use crate::error::{Error, Result};
use crate::linalg::{spectral_map, sym_eig, Mat};
use crate::qre::{c_diffuse_sensing, c_thermal_active, cp_direct};
use crate::sweep::SweepSpec;

/// Target hypothesis of the binary sensing problem. When the target is
/// absent the probe is fully diverted to the adversary's side and nothing
/// returns to the sensing receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetHypothesis {
    Absent,
    Present,
}

/// Parameters of the sensing scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensingScenario {
    tau_a: f64,
    tau_w: f64,
    gamma1: f64,
    n_bar_a: f64,
    n_bar_w: f64,
    delta: f64,
    eps_tail: f64,
}

impl SensingScenario {
    pub fn new(
        tau_a: f64,
        tau_w: f64,
        gamma1: f64,
        n_bar_a: f64,
        n_bar_w: f64,
        delta: f64,
    ) -> Result<Self> {
        for (name, value) in [("tau_a", tau_a), ("tau_w", tau_w), ("gamma1", gamma1)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::Domain {
                    name: match name {
                        "tau_a" => "tau_a",
                        "tau_w" => "tau_w",
                        _ => "gamma1",
                    },
                    value,
                    constraint: "must lie in (0, 1) strict",
                });
            }
        }
        if !(n_bar_a >= 0.0 && n_bar_a.is_finite()) {
            return Err(Error::Domain {
                name: "n_bar_a",
                value: n_bar_a,
                constraint: "return-path thermal mean >= 0",
            });
        }
        if !(n_bar_w > 0.0 && n_bar_w.is_finite()) {
            return Err(Error::Domain {
                name: "n_bar_w",
                value: n_bar_w,
                constraint: "adversary-path thermal mean > 0",
            });
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain {
                name: "delta",
                value: delta,
                constraint: "covertness budget > 0",
            });
        }
        Ok(SensingScenario {
            tau_a,
            tau_w,
            gamma1,
            n_bar_a,
            n_bar_w,
            delta,
            eps_tail: crate::comm::DEFAULT_EPS_TAIL,
        })
    }

    pub fn with_eps_tail(mut self, eps_tail: f64) -> Result<Self> {
        if !(eps_tail > 0.0 && eps_tail < 1e-6) {
            return Err(Error::Domain {
                name: "eps_tail",
                value: eps_tail,
                constraint: "truncation budget in (0, 1e-6)",
            });
        }
        self.eps_tail = eps_tail;
        Ok(self)
    }

    pub fn tau_a(&self) -> f64 {
        self.tau_a
    }

    pub fn tau_w(&self) -> f64 {
        self.tau_w
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn n_bar_a(&self) -> f64 {
        self.n_bar_a
    }

    pub fn n_bar_w(&self) -> f64 {
        self.n_bar_w
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Target reflectivity toward the adversary under hypothesis `h`
    /// (1 when absent).
    pub fn gamma(&self, h: TargetHypothesis) -> f64 {
        match h {
            TargetHypothesis::Absent => 1.0,
            TargetHypothesis::Present => self.gamma1,
        }
    }

    /// Sensing-return port under hypothesis `h`: transmissivity
    /// `(1 - gamma(h)) tau_a`, ambient `(1 - tau_a) n_bar_a`.
    pub fn alice_return_port(&self, h: TargetHypothesis) -> ChannelPort {
        ChannelPort::new(
            (1.0 - self.gamma(h)) * self.tau_a,
            (1.0 - self.tau_a) * self.n_bar_a,
        )
        .expect("scenario invariants keep the port valid")
    }

    /// Adversary-side port under hypothesis `h`: transmissivity
    /// `gamma(h) tau_w`, ambient `(1 - tau_w) n_bar_w`.
    pub fn willie_port(&self, h: TargetHypothesis) -> ChannelPort {
        ChannelPort::new(self.gamma(h) * self.tau_w, (1.0 - self.tau_w) * self.n_bar_w)
            .expect("scenario invariants keep the port valid")
    }
}

/// Result of a Chernoff-exponent minimization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernoffResult {
    /// `-ln min_s Q(s)`, nats; infinite for disjoint supports.
    pub exponent: f64,
    /// minimizing exchange parameter in [0, 1]
    pub s_star: f64,
    /// set when the supports are disjoint and the exponent is a sentinel
    pub disjoint: bool,
}

/// Photon-count distribution of the sensing return under hypothesis `h` for
/// the vacuum/one-photon probe of brightness `n_s`: the mixture
/// `(1 - n_s) p(.|0) + n_s p(.|1)` through the return port. With the target
/// absent the port transmissivity is zero and the return is purely thermal.
pub fn alice_return_distribution(
    sc: &SensingScenario,
    h: TargetHypothesis,
    n_s: f64,
) -> Result<PhotonDistribution> {
    let ell_max = return_truncation(sc, n_s)?;
    return_distribution_at(sc, h, n_s, ell_max)
}

fn return_truncation(sc: &SensingScenario, n_s: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&n_s) {
        return Err(Error::Domain {
            name: "n_s",
            value: n_s,
            constraint: "probe brightness in [0, 1]",
        });
    }
    // the brightest hypothesis dominates the tail
    let port = sc.alice_return_port(TargetHypothesis::Present);
    Ok(truncation_level(port.nu() + port.kappa() * n_s, sc.eps_tail, 1)? + 8)
}

fn return_distribution_at(
    sc: &SensingScenario,
    h: TargetHypothesis,
    n_s: f64,
    ell_max: usize,
) -> Result<PhotonDistribution> {
    let input = FockDiagonalInput::new(vec![1.0 - n_s, n_s])?;
    output_distribution(sc.alice_return_port(h), &input, ell_max)
}

/// Golden-section minimization of a scalar function on [a, b] to width
/// `tol`, seeded by a coarse scan; returns (argmin, min). The coarse-scan
/// minimum is kept when it beats the refined point, which covers numerically
/// non-convex edges near the interval ends.
fn minimize_scalar(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const SCAN: usize = 33;
    let mut best_k = 0;
    let mut best_v = f64::INFINITY;
    let mut xs = [0.0f64; SCAN];
    for (k, x) in xs.iter_mut().enumerate() {
        *x = a + (b - a) * k as f64 / (SCAN - 1) as f64;
        let v = f(*x);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let (mut lo, mut hi) = (
        xs[best_k.saturating_sub(1)],
        xs[(best_k + 1).min(SCAN - 1)],
    );
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (lo + hi);
    let fm = f(xm);
    if fm <= best_v {
        (xm, fm)
    } else {
        (xs[best_k], best_v)
    }
}

/// Chernoff exponent of the classical hypothesis test between two
/// photon-count distributions on a common truncation window:
/// minimizes `Q(s) = sum_l p_l^s r_l^{1-s}` over s in [0, 1].
pub fn classical_chernoff(
    p: &PhotonDistribution,
    r: &PhotonDistribution,
) -> Result<ChernoffResult> {
    if p.len() != r.len() {
        return Err(Error::Shape(format!(
            "distributions have different truncation lengths {} and {}",
            p.len(),
            r.len()
        )));
    }
    // joint support in log form
    let logs: Vec<(f64, f64)> = p
        .probs()
        .iter()
        .zip(r.probs().iter())
        .filter(|(&pl, &rl)| pl > 0.0 && rl > 0.0)
        .map(|(&pl, &rl)| (pl.ln(), rl.ln()))
        .collect();
    if logs.is_empty() {
        return Ok(ChernoffResult {
            exponent: f64::INFINITY,
            s_star: 0.5,
            disjoint: true,
        });
    }
    let ln_q = |s: f64| -> f64 {
        let mut sum = 0.0f64;
        for &(lp, lr) in &logs {
            sum += (s * lp + (1.0 - s) * lr).exp();
        }
        sum.ln()
    };
    let (s_star, ln_q_min) = minimize_scalar(&ln_q, 0.0, 1.0, 1e-6);
    if ln_q_min > 1e-8 {
        return Err(Error::Numerical(format!(
            "Chernoff overlap exceeded 1: ln Q = {ln_q_min}"
        )));
    }
    Ok(ChernoffResult {
        exponent: (-ln_q_min).max(0.0),
        s_star,
        disjoint: false,
    })
}

/// Real symmetric covariance matrix of an m-mode zero-mean Gaussian state,
/// vacuum-normalized, mode-major (x1, p1, x2, p2, ...) ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    modes: usize,
    entries: Vec<f64>,
}

impl CovarianceMatrix {
    /// `entries` is the dense 2m x 2m matrix in row-major order; it must be
    /// symmetric to 1e-10 (relative to its largest entry).
    pub fn new(modes: usize, entries: Vec<f64>) -> Result<Self> {
        let dim = 2 * modes;
        if modes == 0 || entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected a {dim}x{dim} matrix for {modes} modes, got {} entries",
                entries.len()
            )));
        }
        let scale = entries.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1.0);
        for i in 0..dim {
            for j in i + 1..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i];
                if (a - b).abs() > 1e-10 * scale {
                    return Err(Error::InvalidState(format!(
                        "not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(CovarianceMatrix { modes, entries })
    }

    /// Single thermal mode with mean photon number `n`.
    pub fn thermal(n: f64) -> Result<Self> {
        if !(n >= 0.0 && n.is_finite()) {
            return Err(Error::Domain {
                name: "n",
                value: n,
                constraint: "thermal mean >= 0",
            });
        }
        let nu = 2.0 * n + 1.0;
        CovarianceMatrix::new(1, vec![nu, 0.0, 0.0, nu])
    }

    /// Block-diagonal composition with another (uncorrelated) state.
    pub fn tensor(&self, other: &CovarianceMatrix) -> CovarianceMatrix {
        let m = self.modes + other.modes;
        let dim = 2 * m;
        let d1 = 2 * self.modes;
        let mut entries = vec![0.0; dim * dim];
        for i in 0..d1 {
            for j in 0..d1 {
                entries[i * dim + j] = self.entry(i, j);
            }
        }
        for i in 0..2 * other.modes {
            for j in 0..2 * other.modes {
                entries[(d1 + i) * dim + (d1 + j)] = other.entry(i, j);
            }
        }
        CovarianceMatrix { modes: m, entries }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    /// Position-quadrature and momentum-quadrature blocks, available when the
    /// state carries no x-p correlations (all states in this crate's scope:
    /// thermal products and two-mode-squeezed states).
    fn xp_split(&self) -> Result<(Mat, Mat)> {
        let m = self.modes;
        let scale = self
            .entries
            .iter()
            .fold(0.0f64, |acc, e| acc.max(e.abs()))
            .max(1.0);
        for i in 0..m {
            for j in 0..m {
                let cross_a = self.entry(2 * i, 2 * j + 1);
                let cross_b = self.entry(2 * i + 1, 2 * j);
                if cross_a.abs() > 1e-10 * scale || cross_b.abs() > 1e-10 * scale {
                    return Err(Error::InvalidState(
                        "position-momentum correlations are outside the supported state class"
                            .into(),
                    ));
                }
            }
        }
        let ax = Mat::from_fn(m, |i, j| self.entry(2 * i, 2 * j));
        let ap = Mat::from_fn(m, |i, j| self.entry(2 * i + 1, 2 * j + 1));
        Ok((ax, ap))
    }
}

/// Signal-idler covariance of the two-mode-squeezed-vacuum probe of
/// brightness `n_s` after the signal arm crosses the sensing-return channel
/// under hypothesis `h`. Mode 0 is the retained idler, mode 1 the return.
pub fn tmsv_covariance(
    sc: &SensingScenario,
    h: TargetHypothesis,
    n_s: f64,
) -> Result<CovarianceMatrix> {
    if !(n_s >= 0.0 && n_s.is_finite()) {
        return Err(Error::Domain {
            name: "n_s",
            value: n_s,
            constraint: "probe brightness >= 0",
        });
    }
    let port = sc.alice_return_port(h);
    let kappa = port.kappa();
    let idler = 2.0 * n_s + 1.0;
    let ret = 2.0 * (kappa * n_s + port.nu()) + 1.0;
    let c = 2.0 * (kappa * n_s * (n_s + 1.0)).sqrt();
    CovarianceMatrix::new(
        2,
        vec![
            idler, 0.0, c, 0.0, //
            0.0, idler, 0.0, -c, //
            c, 0.0, ret, 0.0, //
            0.0, -c, 0.0, ret,
        ],
    )
}

/// Symplectic eigenvalues (each >= 1 for a physical state). For one mode this
/// is `sqrt(det V)`; for two modes the closed-form invariants
/// `Delta = det A + det B + 2 det C` and `det V` are used; larger systems go
/// through the quadrature-split eigenproblem.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let nus = match v.modes {
        1 => {
            let det = v.entry(0, 0) * v.entry(1, 1) - v.entry(0, 1) * v.entry(1, 0);
            vec![det.max(0.0).sqrt()]
        }
        2 => {
            let det_a = v.entry(0, 0) * v.entry(1, 1) - v.entry(0, 1) * v.entry(1, 0);
            let det_b = v.entry(2, 2) * v.entry(3, 3) - v.entry(2, 3) * v.entry(3, 2);
            let det_c = v.entry(0, 2) * v.entry(1, 3) - v.entry(0, 3) * v.entry(1, 2);
            let full = Mat::from_fn(4, |i, j| v.entry(i, j)).det();
            let delta = det_a + det_b + 2.0 * det_c;
            let disc = (delta * delta - 4.0 * full).max(0.0).sqrt();
            let hi = ((delta + disc) / 2.0).max(0.0).sqrt();
            let lo = ((delta - disc) / 2.0).max(0.0).sqrt();
            vec![lo, hi]
        }
        _ => {
            let (ax, ap) = v.xp_split()?;
            let sx = spectral_map(&ax, |e| e.max(0.0).sqrt());
            let b = sx.mul(&ap).mul(&sx);
            let (eig, _) = sym_eig(&b);
            let mut nus: Vec<f64> = eig.iter().map(|e| e.max(0.0).sqrt()).collect();
            nus.sort_by(|a, b| a.partial_cmp(b).unwrap());
            nus
        }
    };
    if let Some(&bad) = nus.iter().find(|&&nu| nu < 1.0 - 1e-8) {
        return Err(Error::InvalidState(format!(
            "symplectic eigenvalue {bad} below 1: not a physical state"
        )));
    }
    Ok(nus)
}

/// Prepared symplectic data of one hypothesis state for the overlap formula.
struct GaussianSide {
    nus: Vec<f64>,
    /// sqrt of the position block
    sx: Mat,
    sx_inv: Mat,
    /// eigenvectors of sx * A_p * sx (columns)
    u: Mat,
}

impl GaussianSide {
    fn prepare(v: &CovarianceMatrix) -> Result<Self> {
        let (ax, ap) = v.xp_split()?;
        let (ax_eig, _) = sym_eig(&ax);
        if ax_eig.iter().any(|&e| e <= 0.0) {
            return Err(Error::InvalidState(
                "covariance position block is not positive definite".into(),
            ));
        }
        let sx = spectral_map(&ax, |e| e.max(0.0).sqrt());
        let sx_inv = spectral_map(&ax, |e| 1.0 / e.max(1e-300).sqrt());
        let b = sx.mul(&ap).mul(&sx);
        let (eig, u) = sym_eig(&b);
        let nus: Vec<f64> = eig.iter().map(|e| e.max(0.0).sqrt()).collect();
        if let Some(&bad) = nus.iter().find(|&&nu| nu < 1.0 - 1e-8) {
            return Err(Error::InvalidState(format!(
                "symplectic eigenvalue {bad} below 1: not a physical state"
            )));
        }
        Ok(GaussianSide {
            nus,
            sx,
            sx_inv,
            u,
        })
    }

    /// `sum_j ln G_s(nu_j)` with `G_s(nu) = 2^s / ((nu+1)^s - (nu-1)^s)`,
    /// the log-trace of the unnormalized s-th power.
    fn ln_power_trace(&self, s: f64) -> f64 {
        self.nus
            .iter()
            .map(|&nu| {
                let nu = nu.max(1.0);
                s * 2.0f64.ln() - ((nu + 1.0).powf(s) - (nu - 1.0).powf(s)).ln()
            })
            .sum()
    }

    /// Covariance blocks of the normalized s-th power:
    /// `(Vbar_x, Vbar_p) = (Sx U diag(L/nu) U^T Sx, Sx^-1 U diag(nu L) U^T Sx^-1)`
    /// with `L = Lambda_s(nu)`.
    fn power_blocks(&self, s: f64) -> (Mat, Mat) {
        let m = self.nus.len();
        let lam: Vec<f64> = self
            .nus
            .iter()
            .map(|&nu| {
                let nu = nu.max(1.0);
                let up = (nu + 1.0).powf(s);
                let dn = (nu - 1.0).powf(s);
                (up + dn) / (up - dn)
            })
            .collect();
        let wx = Mat::from_fn(m, |i, j| {
            (0..m)
                .map(|k| self.u.get(i, k) * (lam[k] / self.nus[k].max(1.0)) * self.u.get(j, k))
                .sum()
        });
        let wp = Mat::from_fn(m, |i, j| {
            (0..m)
                .map(|k| self.u.get(i, k) * (lam[k] * self.nus[k].max(1.0)) * self.u.get(j, k))
                .sum()
        });
        let vx = self.sx.mul(&wx).mul(&self.sx);
        let vp = self.sx_inv.mul(&wp).mul(&self.sx_inv);
        (vx, vp)
    }
}

/// Quantum Chernoff exponent between two zero-mean Gaussian states given by
/// their covariance matrices: minimizes
/// `Q(s) = tr(rho0^s rho1^(1-s))` over s in [0, 1] via the symplectic
/// closed form (per-eigenvalue scalar maps and a determinant of the combined
/// second moments).
pub fn gaussian_qcb(v0: &CovarianceMatrix, v1: &CovarianceMatrix) -> Result<ChernoffResult> {
    if v0.modes != v1.modes {
        return Err(Error::Shape(format!(
            "mode counts differ: {} vs {}",
            v0.modes, v1.modes
        )));
    }
    let m = v0.modes as f64;
    let side0 = GaussianSide::prepare(v0)?;
    let side1 = GaussianSide::prepare(v1)?;
    let ln_q = |s: f64| -> f64 {
        let (v0x, v0p) = side0.power_blocks(s);
        let (v1x, v1p) = side1.power_blocks(1.0 - s);
        let det_x = v0x.add(&v1x).det();
        let det_p = v0p.add(&v1p).det();
        side0.ln_power_trace(s) + side1.ln_power_trace(1.0 - s) + m * 2.0f64.ln()
            - 0.5 * (det_x.ln() + det_p.ln())
    };
    // the scalar maps degenerate at the endpoints (rho^0 is a projector);
    // the minimum of the log-convex overlap is interior for full-rank states
    let (s_star, ln_q_min) = minimize_scalar(&ln_q, 1e-3, 1.0 - 1e-3, 1e-6);
    if ln_q_min > 1e-8 {
        return Err(Error::Numerical(format!(
            "Gaussian Chernoff overlap exceeded 1: ln Q = {ln_q_min}"
        )));
    }
    Ok(ChernoffResult {
        exponent: (-ln_q_min).max(0.0),
        s_star,
        disjoint: false,
    })
}

/// Both hypothesis return distributions on a shared truncation window.
fn return_pair(
    sc: &SensingScenario,
    n_s: f64,
) -> Result<(PhotonDistribution, PhotonDistribution)> {
    let ell_max = return_truncation(sc, n_s)?;
    let absent = return_distribution_at(sc, TargetHypothesis::Absent, n_s, ell_max)?;
    let present = return_distribution_at(sc, TargetHypothesis::Present, n_s, ell_max)?;
    Ok((absent, present))
}

/// Covert sensing capability of the Fock-diagonal probe:
/// `sqrt(2 delta / C) * Phi` with `C` the printed quadratic coefficient of
/// the two-point state at the adversary's target-absent port and `Phi` the
/// photon-counting Chernoff exponent between the return hypotheses.
pub fn capability_fock_sensing(sc: &SensingScenario, n_s: f64) -> Result<f64> {
    if !(n_s > 0.0 && n_s <= 1.0) {
        return Err(Error::Domain {
            name: "n_s",
            value: n_s,
            constraint: "probe brightness in (0, 1]",
        });
    }
    let c = c_diffuse_sensing(sc.tau_w, sc.n_bar_w)? * n_s * n_s;
    let (p0, p1) = return_pair(sc, n_s)?;
    let phi = classical_chernoff(&p0, &p1)?;
    Ok((2.0 * sc.delta / c).sqrt() * phi.exponent)
}

/// Covert sensing capability of the sparse two-mode-squeezed-vacuum probe:
/// `sqrt(2 delta / C_TMSV) * Phi_TMSV`. Errs when the thermal-marginal
/// detectability coefficient diverges.
pub fn capability_tmsv(sc: &SensingScenario, n_s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&n_s) {
        return Err(Error::Domain {
            name: "n_s",
            value: n_s,
            constraint: "probe brightness in [0, 1]",
        });
    }
    if n_s == 0.0 {
        return Ok(0.0);
    }
    let c = c_thermal_active(sc.willie_port(TargetHypothesis::Absent), n_s)?;
    let v0 = tmsv_covariance(sc, TargetHypothesis::Absent, n_s)?;
    let v1 = tmsv_covariance(sc, TargetHypothesis::Present, n_s)?;
    let phi = gaussian_qcb(&v0, &v1)?;
    Ok((2.0 * sc.delta / c).sqrt() * phi.exponent)
}

/// Active probe marginal seen by the adversary.
#[derive(Clone, Copy, Debug)]
pub enum SensingProbe<'a> {
    /// Fock-diagonal active state (the covertness-optimized scheme).
    FockDiagonal(&'a FockDiagonalInput),
    /// Thermal signal marginal of brightness `n_s` (the TMSV scheme).
    ThermalMarginal { n_s: f64 },
}

/// Adversary-side detectability coefficient of the sensing scheme: the
/// quadratic coefficient at the adversary's port, maximized over the target
/// hypothesis. Numerically the target-absent port dominates (it carries the
/// larger transmissivity).
pub fn willie_sensing_coefficient(sc: &SensingScenario, probe: SensingProbe<'_>) -> Result<f64> {
    let mut worst = 0.0f64;
    for h in [TargetHypothesis::Absent, TargetHypothesis::Present] {
        let port = sc.willie_port(h);
        let c = match probe {
            SensingProbe::FockDiagonal(active) => cp_direct(port, active)?,
            SensingProbe::ThermalMarginal { n_s } => c_thermal_active(port, n_s)?,
        };
        worst = worst.max(c);
    }
    Ok(worst)
}

/// One row of the sensing sweep. Exponent columns stay finite and honest
/// even where the TMSV covertness coefficient diverges (there the TMSV
/// capability is reported as 0).
#[derive(Clone, Copy, Debug)]
pub struct SensePoint {
    pub n_s: f64,
    pub capability_fock: f64,
    pub capability_tmsv: f64,
    pub phi_fock: f64,
    pub phi_tmsv: f64,
    pub s_star_fock: f64,
    pub s_star_tmsv: f64,
}

fn sense_point(sc: &SensingScenario, n_s: f64) -> Result<SensePoint> {
    let (p0, p1) = return_pair(sc, n_s)?;
    let phi_fock = classical_chernoff(&p0, &p1)?;
    let v0 = tmsv_covariance(sc, TargetHypothesis::Absent, n_s)?;
    let v1 = tmsv_covariance(sc, TargetHypothesis::Present, n_s)?;
    let phi_tmsv = gaussian_qcb(&v0, &v1)?;
    let c_fock = c_diffuse_sensing(sc.tau_w, sc.n_bar_w)? * n_s * n_s;
    let capability_fock = (2.0 * sc.delta / c_fock).sqrt() * phi_fock.exponent;
    let capability_tmsv = match c_thermal_active(sc.willie_port(TargetHypothesis::Absent), n_s) {
        Ok(c) => (2.0 * sc.delta / c).sqrt() * phi_tmsv.exponent,
        Err(Error::Divergence(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(SensePoint {
        n_s,
        capability_fock,
        capability_tmsv,
        phi_fock: phi_fock.exponent,
        phi_tmsv: phi_tmsv.exponent,
        s_star_fock: phi_fock.s_star,
        s_star_tmsv: phi_tmsv.s_star,
    })
}

/// Sensing capability curves over a brightness grid.
pub fn sense_sweep(sc: &SensingScenario, grid: &SweepSpec) -> Result<Vec<SensePoint>> {
    grid.values()
        .par_iter()
        .map(|&n_s| sense_point(sc, n_s))
        .collect()
}

/// First brightness at which the Fock-diagonal probe's capability reaches
/// the TMSV benchmark, bisection-refined to 1e-4.
pub fn sensing_crossover(sc: &SensingScenario, grid: &SweepSpec) -> Result<Option<f64>> {
    let difference = |n_s: f64| -> Result<f64> {
        let fock = capability_fock_sensing(sc, n_s)?;
        let tmsv = match capability_tmsv(sc, n_s) {
            Ok(t) => t,
            Err(Error::Divergence(_)) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(fock - tmsv)
    };
    let values = grid.values();
    let mut previous: Option<f64> = None;
    for &n_s in &values {
        let d = difference(n_s)?;
        if d >= 0.0 {
            let (mut lo, mut hi) = match previous {
                None => return Ok(Some(n_s)),
                Some(x) => (x, n_s),
            };
            while hi - lo > 1e-4 {
                let mid = 0.5 * (lo + hi);
                if difference(mid)? >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        previous = Some(n_s);
    }
    Ok(None)
}
