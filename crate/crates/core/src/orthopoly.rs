//! Orthogonal-polynomial and combinatorial primitives: Laguerre and Meixner
//! polynomials, binomial coefficients.
//!
//! Everything here is a pure function; the other modules build the channel
//! kernel, detectability coefficients, and test oracles on top of these.

use crate::error::{Error, Result};

/// Largest polynomial degree / Fock index accepted by the evaluators.
/// Exceeding it is a configuration error, never a silent truncation.
pub const DEGREE_CAP: usize = 512;

/// Degree of a polynomial (or a Fock/photon-number index used as one).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolyIndex(usize);

impl PolyIndex {
    pub fn new(degree: usize) -> Result<Self> {
        if degree > DEGREE_CAP {
            return Err(Error::IndexCap {
                index: degree,
                cap: DEGREE_CAP,
            });
        }
        Ok(PolyIndex(degree))
    }

    pub fn degree(self) -> usize {
        self.0
    }
}

/// Geometric weight parameter `q` of the Meixner family, strictly inside (0, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricWeight(f64);

impl GeometricWeight {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain {
                name: "q",
                value: q,
                constraint: "0 < q < 1 (strict)",
            });
        }
        Ok(GeometricWeight(q))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Laguerre polynomial L_n(x) via the three-term recurrence
/// `(n+1) L_{n+1} = (2n+1-x) L_n - n L_{n-1}`.
pub fn laguerre(n: PolyIndex, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            name: "x",
            value: x,
            constraint: "finite argument",
        });
    }
    Ok(laguerre_raw(n.degree(), x))
}

/// Recurrence without argument checks, for quadrature inner loops.
pub(crate) fn laguerre_raw(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0; // L_0
    let mut curr = 1.0 - x; // L_1
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * curr - kf * prev) / (kf + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// Meixner polynomial M_y(l; q), evaluated through the terminating
/// hypergeometric sum
///
/// ```text
/// M_y(l; q) = sum_{k=0}^{min(y,l)} C(y,k) C(l,k) (1 - 1/q)^k
/// ```
///
/// The sum terminates exactly, so the only error source is floating-point
/// cancellation of the alternating terms; compensated (Kahan) accumulation
/// keeps that at the level of the largest term's ulp.
pub fn meixner(y: PolyIndex, ell: PolyIndex, q: GeometricWeight) -> f64 {
    let y = y.degree();
    let ell = ell.degree();
    let z = 1.0 - 1.0 / q.get(); // negative for q in (0,1)
    let kmax = y.min(ell);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut term = 1.0f64; // k = 0 term
    for k in 0..=kmax {
        let t = term - comp;
        let s = sum + t;
        comp = (s - sum) - t;
        sum = s;
        if k < kmax {
            // C(y,k+1)/C(y,k) = (y-k)/(k+1), same for ell
            let kf = k as f64;
            term *= z * (y as f64 - kf) * (ell as f64 - kf) / ((kf + 1.0) * (kf + 1.0));
        }
    }
    sum
}

/// Binomial coefficient C(n, k) as f64; 0 when k > n.
///
/// Up to n = 128 the running product fits u128 and is exact at every step;
/// above that the log-gamma form is used.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 128 {
        let mut c: u128 = 1;
        for j in 1..=k {
            // prefix products are themselves binomial coefficients, so the
            // division is exact
            c = c * (n - k + j) as u128 / j as u128;
        }
        c as f64
    } else {
        use statrs::function::gamma::ln_gamma;
        let ln = ln_gamma(n as f64 + 1.0)
            - ln_gamma(k as f64 + 1.0)
            - ln_gamma((n - k) as f64 + 1.0);
        ln.exp()
    }
}
