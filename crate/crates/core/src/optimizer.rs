//! Detectability-minimizing active input states under a mean-photon-number
//! constraint, plus the brute-force simplex oracle and the discrete-convexity
//! check that certify them.

use rayon::prelude::*;

use crate::channel::FockDiagonalInput;
use crate::error::{Error, Result};
use crate::orthopoly::binomial;
use crate::qre::CoefficientParams;

/// A mean photon-number constraint split into its integer floor and
/// fractional part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanConstraint {
    n_bar_s: f64,
    kappa_floor: usize,
    beta: f64,
}

impl MeanConstraint {
    pub fn new(n_bar_s: f64) -> Result<Self> {
        if !(n_bar_s >= 0.0 && n_bar_s.is_finite()) {
            return Err(Error::Domain {
                name: "n_bar_s",
                value: n_bar_s,
                constraint: "mean photon number >= 0",
            });
        }
        let kappa_floor = n_bar_s.floor() as usize;
        // exact for n_bar_s in [floor, floor+1) by Sterbenz's lemma
        let beta = n_bar_s - kappa_floor as f64;
        Ok(MeanConstraint {
            n_bar_s,
            kappa_floor,
            beta,
        })
    }

    pub fn n_bar_s(self) -> f64 {
        self.n_bar_s
    }

    pub fn kappa_floor(self) -> usize {
        self.kappa_floor
    }

    pub fn beta(self) -> f64 {
        self.beta
    }
}

/// Factorial moments mu_y = E[C(I, y)] of an input photon-number
/// distribution, for y = 1..=y_max.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    mu: Vec<f64>,
}

impl MomentVector {
    /// Moment of order `y` (1-indexed; y = 0 would be the normalization).
    pub fn mu(&self, y: usize) -> f64 {
        assert!(y >= 1, "factorial moments are indexed from y = 1");
        self.mu.get(y - 1).copied().unwrap_or(0.0)
    }

    pub fn order(&self) -> usize {
        self.mu.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mu
    }
}

/// The detectability-minimizing active state for a given mean: a mixture of
/// the two consecutive Fock states bracketing the mean,
/// `rho_k = k+1-n_bar_s`, `rho_{k+1} = n_bar_s-k` with `k = floor(n_bar_s)`.
/// When the mean is an integer the second weight is zero but stays in the
/// support vector for shape stability.
pub fn optimal_two_point(c: MeanConstraint) -> FockDiagonalInput {
    let k = c.kappa_floor();
    let mut probs = vec![0.0; k + 2];
    probs[k] = 1.0 - c.beta();
    probs[k + 1] = c.beta();
    FockDiagonalInput::new(probs).expect("two-point allocation is always a valid distribution")
}

/// Factorial moments `mu_y = sum_{i >= y} rho_i C(i, y)` for y = 1..=y_max.
pub fn factorial_moments(input: &FockDiagonalInput, y_max: usize) -> MomentVector {
    let mut mu = Vec::with_capacity(y_max);
    for y in 1..=y_max {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (i, rho) in input.probs().iter().enumerate() {
            if i >= y && *rho != 0.0 {
                let term = rho * binomial(i, y);
                let t = term - comp;
                let s = sum + t;
                comp = (s - sum) - t;
                sum = s;
            }
        }
        mu.push(sum);
    }
    MomentVector { mu }
}

/// Exhaustive scan of the probability simplex over Fock support
/// `{0..=support_max}` restricted to the mean constraint. The free grid
/// coordinates are `rho_2..rho_support_max`; `rho_1` and `rho_0` are solved
/// from the mean and normalization constraints and checked for feasibility.
/// Returns the minimizer of the orthogonal-form coefficient and its value.
pub fn brute_force_min(
    c: MeanConstraint,
    support_max: usize,
    grid_step: f64,
    params: CoefficientParams,
) -> Result<(FockDiagonalInput, f64)> {
    if support_max > 6 {
        return Err(Error::Domain {
            name: "support_max",
            value: support_max as f64,
            constraint: "oracle scan limited to support <= 6",
        });
    }
    if support_max == 0 {
        return Err(Error::Domain {
            name: "support_max",
            value: 0.0,
            constraint: "support must contain at least one photon state",
        });
    }
    if !(grid_step >= 1e-3) {
        return Err(Error::Domain {
            name: "grid_step",
            value: grid_step,
            constraint: "grid step >= 1e-3",
        });
    }
    if c.n_bar_s() > support_max as f64 {
        return Err(Error::Domain {
            name: "n_bar_s",
            value: c.n_bar_s(),
            constraint: "mean must be reachable inside the support",
        });
    }

    let n_bar = c.n_bar_s();
    let weights = coefficient_weights(params, support_max);

    // number of grid steps that keep i * rho_i <= n_bar for coordinate i
    let steps_for = |i: usize| -> usize {
        let cap = (n_bar / i as f64).min(1.0);
        (cap / grid_step).floor() as usize
    };

    let best = if support_max >= 2 {
        (0..=steps_for(2))
            .into_par_iter()
            .map(|m2| {
                let mut coords = vec![0.0f64; support_max + 1];
                coords[2] = m2 as f64 * grid_step;
                let mut local = Candidate::none();
                scan_rest(
                    3,
                    support_max,
                    grid_step,
                    n_bar,
                    &mut coords,
                    &weights,
                    &mut local,
                );
                local
            })
            .reduce(Candidate::none, Candidate::merge)
    } else {
        // support {0, 1}: the mean fixes everything
        let mut coords = vec![0.0f64; 2];
        let mut local = Candidate::none();
        evaluate(&mut coords, n_bar, &weights, &mut local);
        local
    };

    match best.take() {
        Some((value, probs)) => {
            let input = FockDiagonalInput::new(probs)?;
            Ok((input, value))
        }
        None => Err(Error::Domain {
            name: "n_bar_s",
            value: n_bar,
            constraint: "no feasible grid point (grid too coarse for this mean)",
        }),
    }
}

/// Positive weights q^{-y} theta^{2y} of the orthogonal form, y = 1..=j.
fn coefficient_weights(params: CoefficientParams, j: usize) -> Vec<f64> {
    let base = params.theta() * params.theta() / params.q();
    let mut w = Vec::with_capacity(j);
    let mut acc = 1.0;
    for _ in 1..=j {
        acc *= base;
        w.push(acc);
    }
    w
}

struct Candidate {
    value: f64,
    probs: Option<Vec<f64>>,
}

impl Candidate {
    fn none() -> Self {
        Candidate {
            value: f64::INFINITY,
            probs: None,
        }
    }

    fn offer(&mut self, value: f64, probs: &[f64]) {
        // strict improvement keeps the scan deterministic under any split
        if value < self.value {
            self.value = value;
            self.probs = Some(probs.to_vec());
        }
    }

    fn merge(a: Candidate, b: Candidate) -> Candidate {
        match (a.probs.is_some(), b.probs.is_some()) {
            (false, _) => b,
            (_, false) => a,
            _ => {
                if b.value < a.value
                    || (b.value == a.value && b.probs.as_deref() < a.probs.as_deref())
                {
                    b
                } else {
                    a
                }
            }
        }
    }

    fn take(self) -> Option<(f64, Vec<f64>)> {
        self.probs.map(|p| (self.value, p))
    }
}

fn scan_rest(
    i: usize,
    support_max: usize,
    grid_step: f64,
    n_bar: f64,
    coords: &mut Vec<f64>,
    weights: &[f64],
    best: &mut Candidate,
) {
    if i > support_max {
        evaluate(coords, n_bar, weights, best);
        return;
    }
    let used: f64 = (2..i).map(|k| k as f64 * coords[k]).sum();
    let remaining = n_bar - used;
    if remaining < -1e-12 {
        return;
    }
    let max_steps = ((remaining / i as f64).min(1.0) / grid_step).floor() as usize;
    for m in 0..=max_steps {
        coords[i] = m as f64 * grid_step;
        scan_rest(i + 1, support_max, grid_step, n_bar, coords, weights, best);
    }
    coords[i] = 0.0;
}

fn evaluate(coords: &mut [f64], n_bar: f64, weights: &[f64], best: &mut Candidate) {
    let support_max = coords.len() - 1;
    let heavy_mean: f64 = (2..=support_max).map(|k| k as f64 * coords[k]).sum();
    let rho1 = n_bar - heavy_mean;
    if !(-1e-12..=1.0 + 1e-12).contains(&rho1) {
        return;
    }
    let rho1 = rho1.clamp(0.0, 1.0);
    let heavy_mass: f64 = (2..=support_max).map(|k| coords[k]).sum();
    let rho0 = 1.0 - rho1 - heavy_mass;
    if rho0 < -1e-12 {
        return;
    }
    coords[1] = rho1;
    coords[0] = rho0.max(0.0);

    // orthogonal-form value: sum_y w_y * mu_y^2
    let mut value = 0.0;
    for (y, w) in weights.iter().enumerate() {
        let y = y + 1;
        let mut mu = 0.0;
        for i in y..=support_max {
            if coords[i] != 0.0 {
                mu += coords[i] * binomial(i, y);
            }
        }
        value += w * mu * mu;
    }
    best.offer(value, coords);
}

/// Discrete Jensen inequality for the binomial moment of order `y`:
/// `E[C(I, y)] >= (1-beta) C(k, y) + beta C(k+1, y)` where `k + beta` is the
/// distribution's mean. Equality holds for the two-point allocation.
pub fn discrete_jensen_check(phi_degree: usize, distribution: &FockDiagonalInput) -> bool {
    let y = phi_degree;
    let mean = distribution.mean();
    let k = mean.floor() as usize;
    let beta = mean - k as f64;
    let lhs: f64 = distribution
        .probs()
        .iter()
        .enumerate()
        .map(|(i, rho)| rho * binomial(i, y))
        .sum();
    let rhs = (1.0 - beta) * binomial(k, y) + beta * binomial(k + 1, y);
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    lhs >= rhs - 1e-12 * scale
}
