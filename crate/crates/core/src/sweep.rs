//! Brightness grids for capability sweeps and crossover scans.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

/// A monotone grid of mean photon numbers in (0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    n_s_min: f64,
    n_s_max: f64,
    points: usize,
    scale: SweepScale,
}

impl SweepSpec {
    pub fn new(n_s_min: f64, n_s_max: f64, points: usize, scale: SweepScale) -> Result<Self> {
        if !(n_s_min > 0.0 && n_s_min < n_s_max) {
            return Err(Error::Domain {
                name: "n_s_min",
                value: n_s_min,
                constraint: "0 < n_s_min < n_s_max",
            });
        }
        if !(n_s_max <= 1.0) {
            return Err(Error::Domain {
                name: "n_s_max",
                value: n_s_max,
                constraint: "n_s_max <= 1 (low-brightness regime)",
            });
        }
        if !(2..=100_000).contains(&points) {
            return Err(Error::Domain {
                name: "points",
                value: points as f64,
                constraint: "2 <= points <= 100000",
            });
        }
        Ok(SweepSpec {
            n_s_min,
            n_s_max,
            points,
            scale,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let mut out = Vec::with_capacity(n);
        match self.scale {
            SweepScale::Linear => {
                let step = (self.n_s_max - self.n_s_min) / (n - 1) as f64;
                for k in 0..n {
                    out.push(self.n_s_min + step * k as f64);
                }
            }
            SweepScale::Log => {
                let ratio = (self.n_s_max / self.n_s_min).ln() / (n - 1) as f64;
                for k in 0..n {
                    out.push(self.n_s_min * (ratio * k as f64).exp());
                }
            }
        }
        // endpoints exact regardless of rounding in the interior
        out[0] = self.n_s_min;
        out[n - 1] = self.n_s_max;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_grid_hits_endpoints() {
        let g = SweepSpec::new(0.01, 1.0, 12, SweepScale::Linear).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 12);
        assert_eq!(v[0], 0.01);
        assert_eq!(v[11], 1.0);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn log_grid_is_geometric() {
        let g = SweepSpec::new(0.01, 1.0, 3, SweepScale::Log).unwrap();
        let v = g.values();
        assert!((v[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(SweepSpec::new(0.0, 1.0, 10, SweepScale::Linear).is_err());
        assert!(SweepSpec::new(0.5, 0.4, 10, SweepScale::Linear).is_err());
        assert!(SweepSpec::new(0.1, 1.2, 10, SweepScale::Linear).is_err());
        assert!(SweepSpec::new(0.1, 1.0, 1, SweepScale::Linear).is_err());
        assert!(SweepSpec::new(0.1, 1.0, 200_000, SweepScale::Linear).is_err());
    }
}
