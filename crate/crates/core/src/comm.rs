//! Covert-communication capability of the covertness-optimized two-point
//! scheme against the Gaussian coherent-state benchmark, and the crossover
//! brightness where the two-point scheme takes over.
//!
//! Capabilities are reported in nats per sqrt(channel use): the information
//! rate carried on the sqrt(n) scale once the activity probability is
//! maximized under the relative-entropy covertness budget.

use rayon::prelude::*;

use crate::channel::{
    output_distribution, thermal_pmf, truncation_level, ChannelPort, PhotonDistribution,
};
use crate::error::{Error, Result};
use crate::optimizer::{optimal_two_point, MeanConstraint};
use crate::qre::{c_thermal_active, cp_direct};
use crate::sweep::SweepSpec;

/// Default truncation budget for photon-number tails.
pub const DEFAULT_EPS_TAIL: f64 = 1e-14;

/// Parameters of the communication scenario: transmissivity to the intended
/// receiver, environment brightness, and covertness budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommScenario {
    eta: f64,
    n_bar_b: f64,
    delta: f64,
    eps_tail: f64,
}

impl CommScenario {
    pub fn new(eta: f64, n_bar_b: f64, delta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Domain {
                name: "eta",
                value: eta,
                constraint: "transmissivity in (0, 1) strict",
            });
        }
        if !(n_bar_b > 0.0 && n_bar_b.is_finite()) {
            return Err(Error::Domain {
                name: "n_bar_b",
                value: n_bar_b,
                constraint: "environment thermal mean > 0",
            });
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain {
                name: "delta",
                value: delta,
                constraint: "covertness budget > 0",
            });
        }
        Ok(CommScenario {
            eta,
            n_bar_b,
            delta,
            eps_tail: DEFAULT_EPS_TAIL,
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

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn n_bar_b(&self) -> f64 {
        self.n_bar_b
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The adversary's tap: transmissivity `1 - eta`, ambient `eta * n_bar_b`.
    pub fn willie_port(&self) -> ChannelPort {
        ChannelPort::new(1.0 - self.eta, self.eta * self.n_bar_b)
            .expect("scenario invariants keep the port valid")
    }

    /// The receiver's port: transmissivity `eta`, ambient `(1-eta) * n_bar_b`.
    pub fn bob_port(&self) -> ChannelPort {
        ChannelPort::new(self.eta, (1.0 - self.eta) * self.n_bar_b)
            .expect("scenario invariants keep the port valid")
    }
}

/// The binary asymmetric channel induced at the receiver by on-off sparse
/// signaling: OFF and ON conditional photon-count distributions on a common
/// truncation window.
#[derive(Clone, Debug)]
pub struct BinaryChannel {
    p0: PhotonDistribution,
    p1: PhotonDistribution,
}

impl BinaryChannel {
    pub fn new(p0: PhotonDistribution, p1: PhotonDistribution) -> Result<Self> {
        if p0.len() != p1.len() {
            return Err(Error::Shape(format!(
                "conditional distributions have different truncation lengths {} and {}",
                p0.len(),
                p1.len()
            )));
        }
        Ok(BinaryChannel { p0, p1 })
    }

    pub fn off(&self) -> &PhotonDistribution {
        &self.p0
    }

    pub fn on(&self) -> &PhotonDistribution {
        &self.p1
    }
}

/// The receiver-side channel of the covertness-optimized scheme: OFF is the
/// ambient thermal state, ON is the two-point active state through the
/// receiver port. Low-brightness regime only (`n_s <= 1`).
pub fn bob_channel(s: &CommScenario, n_s: f64) -> Result<BinaryChannel> {
    if !(0.0..=1.0).contains(&n_s) {
        return Err(Error::Domain {
            name: "n_s",
            value: n_s,
            constraint: "active brightness in [0, 1] (low-brightness regime)",
        });
    }
    let port = s.bob_port();
    let ell_max = truncation_level(port.nu() + port.kappa() * n_s, s.eps_tail, 1)? + 8;
    let p0 = thermal_pmf(port.nu(), ell_max)?;
    let active = optimal_two_point(MeanConstraint::new(n_s)?);
    let p1 = output_distribution(port, &active, ell_max)?;
    BinaryChannel::new(p0, p1)
}

/// Kullback-Leibler divergence `sum_l p_l ln(p_l / q_l)` in nats, with the
/// convention `0 ln 0 = 0`. Requires `q` to dominate the support of `p`.
pub fn kl(p: &PhotonDistribution, q: &PhotonDistribution) -> Result<f64> {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (ell, &pl) in p.probs().iter().enumerate() {
        if pl == 0.0 {
            continue;
        }
        let ql = q.prob(ell);
        if ql <= 0.0 {
            return Err(Error::Domain {
                name: "q",
                value: ql,
                constraint: "reference distribution must dominate the support",
            });
        }
        let term = pl * (pl / ql).ln();
        let t = term - comp;
        let s2 = sum + t;
        comp = (s2 - sum) - t;
        sum = s2;
    }
    Ok(sum.max(0.0))
}

/// Mutual information of the binary asymmetric channel at input probability
/// `alpha`, in nats.
pub fn mutual_information(ch: &BinaryChannel, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            constraint: "input probability in [0, 1]",
        });
    }
    if alpha == 0.0 || alpha == 1.0 {
        return Ok(0.0);
    }
    let mut sum = 0.0f64;
    for ell in 0..ch.p0.len() {
        let p0 = ch.p0.prob(ell);
        let p1 = ch.p1.prob(ell);
        let mix = (1.0 - alpha) * p0 + alpha * p1;
        if p0 > 0.0 {
            sum += (1.0 - alpha) * p0 * (p0 / mix).ln();
        }
        if p1 > 0.0 {
            sum += alpha * p1 * (p1 / mix).ln();
        }
    }
    Ok(sum.max(0.0))
}

/// Capability of the covertness-optimized two-point scheme,
/// `sqrt(2 delta / C_P) * KL(on || off)` in nats per sqrt(use).
pub fn capability_fock(s: &CommScenario, n_s: f64) -> Result<f64> {
    if !(n_s > 0.0 && n_s <= 1.0) {
        return Err(Error::Domain {
            name: "n_s",
            value: n_s,
            constraint: "active brightness in (0, 1]",
        });
    }
    let active = optimal_two_point(MeanConstraint::new(n_s)?);
    let c_p = cp_direct(s.willie_port(), &active)?;
    if c_p <= 0.0 {
        return Err(Error::DegenerateBackground);
    }
    let ch = bob_channel(s, n_s)?;
    let rate = kl(ch.on(), ch.off())?;
    Ok((2.0 * s.delta / c_p).sqrt() * rate)
}

/// `g(x) = (x+1) ln(x+1) - x ln x`, continuously extended by `g(0) = 0`.
fn photon_entropy(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).ln() - x * x.ln()
}

/// Holevo information of Gaussian coherent-state modulation at active
/// brightness `n_s`, in nats.
pub fn holevo_chi(s: &CommScenario, n_s: f64) -> Result<f64> {
    if !(n_s >= 0.0 && n_s.is_finite()) {
        return Err(Error::Domain {
            name: "n_s",
            value: n_s,
            constraint: "active brightness >= 0",
        });
    }
    let ambient = (1.0 - s.eta) * s.n_bar_b;
    Ok((photon_entropy(ambient + s.eta * n_s) - photon_entropy(ambient)).max(0.0))
}

/// Capability of the Gaussian coherent-state benchmark,
/// `sqrt(2 delta / C_G) * chi` in nats per sqrt(use). Errs when the
/// Gaussian detectability coefficient diverges.
pub fn capability_gaussian(s: &CommScenario, n_s: f64) -> Result<f64> {
    if !(n_s > 0.0 && n_s <= 1.0) {
        return Err(Error::Domain {
            name: "n_s",
            value: n_s,
            constraint: "active brightness in (0, 1]",
        });
    }
    let c_g = c_thermal_active(s.willie_port(), n_s)?;
    let chi = holevo_chi(s, n_s)?;
    Ok((2.0 * s.delta / c_g).sqrt() * chi)
}

/// One row of the communication sweep.
///
/// Beyond the brightness where the Gaussian coefficient diverges the
/// benchmark is infinitely detectable at quadratic order; its capability is
/// reported as 0 and the coefficient as infinity.
#[derive(Clone, Copy, Debug)]
pub struct CommPoint {
    pub n_s: f64,
    pub capability_fock: f64,
    pub capability_gaussian: f64,
    pub c_p: f64,
    pub c_g: f64,
    /// set on the first grid row where the two-point scheme is at least as
    /// capable as the benchmark
    pub crossover: bool,
}

fn comm_point(s: &CommScenario, n_s: f64) -> Result<CommPoint> {
    let active = optimal_two_point(MeanConstraint::new(n_s)?);
    let c_p = cp_direct(s.willie_port(), &active)?;
    let fock = capability_fock(s, n_s)?;
    let (gauss, c_g) = match c_thermal_active(s.willie_port(), n_s) {
        Ok(c_g) => (capability_gaussian(s, n_s)?, c_g),
        Err(Error::Divergence(_)) => (0.0, f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(CommPoint {
        n_s,
        capability_fock: fock,
        capability_gaussian: gauss,
        c_p,
        c_g,
        crossover: false,
    })
}

/// Capability curves over a brightness grid. Rows are computed independently
/// and assembled in grid order.
pub fn comm_sweep(s: &CommScenario, grid: &SweepSpec) -> Result<Vec<CommPoint>> {
    let values = grid.values();
    let mut rows = values
        .par_iter()
        .map(|&n_s| comm_point(s, n_s))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = rows
        .iter()
        .position(|r| r.capability_fock >= r.capability_gaussian)
    {
        rows[first].crossover = true;
    }
    Ok(rows)
}

/// First brightness at which the two-point scheme's capability reaches the
/// Gaussian benchmark, refined by bisection to 1e-4. `None` when the
/// benchmark dominates over the whole grid; the grid minimum when the
/// two-point scheme dominates everywhere.
pub fn comm_crossover(s: &CommScenario, grid: &SweepSpec) -> Result<Option<f64>> {
    let difference = |n_s: f64| -> Result<f64> {
        let fock = capability_fock(s, n_s)?;
        let gauss = match capability_gaussian(s, n_s) {
            Ok(g) => g,
            Err(Error::Divergence(_)) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(fock - gauss)
    };
    let values = grid.values();
    let mut previous: Option<(f64, f64)> = None;
    for &n_s in &values {
        let d = difference(n_s)?;
        if d >= 0.0 {
            let (mut lo, mut hi) = match previous {
                None => return Ok(Some(n_s)),
                Some((x, _)) => (x, n_s),
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
        previous = Some((n_s, d));
    }
    Ok(None)
}
