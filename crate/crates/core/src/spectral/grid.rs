use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    padded_forward: Arc<dyn Fft<f64>>,
    padded_inverse: Arc<dyn Fft<f64>>,
}

/// Uniform grid of `n_points` nodes `x_j = 2πj/n` on the 2π-periodic torus.
///
/// Cloning is cheap: FFT plans are shared behind an `Arc` and are safe to
/// use from several threads at once (each call brings its own scratch).
#[derive(Clone)]
pub struct TorusGrid {
    n_points: usize,
    padding_factor: usize,
    plans: Arc<Plans>,
}

impl TorusGrid {
    pub const PERIOD: f64 = 2.0 * PI;

    pub fn new(n_points: usize) -> Result<Self> {
        Self::with_padding(n_points, 2)
    }

    pub fn with_padding(n_points: usize, padding_factor: usize) -> Result<Self> {
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGridSize(n_points));
        }
        if padding_factor < 2 {
            return Err(Error::OutOfRange {
                name: "padding_factor",
                value: padding_factor as f64,
                reason: "must be at least 2",
            });
        }
        let mut planner = FftPlanner::new();
        let m = n_points * padding_factor;
        let plans = Plans {
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
            padded_forward: planner.plan_fft_forward(m),
            padded_inverse: planner.plan_fft_inverse(m),
        };
        Ok(TorusGrid {
            n_points,
            padding_factor,
            plans: Arc::new(plans),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn padding_factor(&self) -> usize {
        self.padding_factor
    }

    pub fn padded_points(&self) -> usize {
        self.n_points * self.padding_factor
    }

    pub fn node_spacing(&self) -> f64 {
        Self::PERIOD / self.n_points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        Self::PERIOD * j as f64 / self.n_points as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.node(j))
    }

    /// Largest resolved wavenumber, `n/2`.
    pub fn k_max(&self) -> usize {
        self.n_points / 2
    }

    /// Signed wavenumber stored at FFT index `j`. The Nyquist slot `n/2`
    /// reports `+n/2`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n_points as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        self.plans.forward.process(buf);
    }

    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.plans.inverse.process(buf);
    }

    pub(crate) fn fft_padded_forward(&self, buf: &mut [Complex64]) {
        self.plans.padded_forward.process(buf);
    }

    pub(crate) fn fft_padded_inverse(&self, buf: &mut [Complex64]) {
        self.plans.padded_inverse.process(buf);
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n_points,
                right: other.n_points,
            })
        }
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.padding_factor == other.padding_factor
    }
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("n_points", &self.n_points)
            .field("padding_factor", &self.padding_factor)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(TorusGrid::new(8).is_err());
        assert!(TorusGrid::new(48).is_err());
        assert!(TorusGrid::with_padding(64, 1).is_err());
        assert!(TorusGrid::new(16).is_ok());
    }

    #[test]
    fn nodes_and_wavenumbers() {
        let g = TorusGrid::new(16).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert!((g.node(4) - PI / 2.0).abs() < 1e-15);
        assert!((g.node_spacing() - PI / 8.0).abs() < 1e-15);
        assert_eq!(g.wavenumber(3), 3);
        assert_eq!(g.wavenumber(8), 8);
        assert_eq!(g.wavenumber(9), -7);
        assert_eq!(g.wavenumber(15), -1);
    }
}
