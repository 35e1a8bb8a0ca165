use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Real scalar function sampled at the nodes of a [`TorusGrid`].
///
/// Fourier modes are computed on demand with [`Field::modes`]; nothing is
/// cached, so a `Field` is a plain value and can be shared across threads.
#[derive(Clone, Debug)]
pub struct Field {
    grid: TorusGrid,
    samples: Vec<f64>,
}

impl Field {
    pub fn new(grid: &TorusGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::SampleCount {
                expected: grid.n_points(),
                got: samples.len(),
            });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("field samples must be finite".into()));
        }
        Ok(Field {
            grid: grid.clone(),
            samples,
        })
    }

    /// Unchecked constructor for values produced by our own transforms.
    pub(crate) fn from_raw(grid: &TorusGrid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.n_points());
        Field {
            grid: grid.clone(),
            samples,
        }
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64) -> f64) -> Self {
        Field::from_raw(grid, grid.nodes().map(f).collect())
    }

    pub fn constant(grid: &TorusGrid, value: f64) -> Self {
        Field::from_raw(grid, vec![value; grid.n_points()])
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Field::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn modes(&self) -> Vec<Complex64> {
        super::ops::transform_forward(self)
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, &v) in self.samples.iter().enumerate() {
            if v > self.samples[best] {
                best = j;
            }
        }
        best
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoid rule on the periodic grid, `h Σ_j g(x_j)`.
    pub fn integral(&self) -> f64 {
        self.grid.node_spacing() * self.samples.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// `(h Σ |g|^p)^{1/p}`, or the max norm for `p = ∞`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let h = self.grid.node_spacing();
        (h * self.samples.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(&self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "zip_map across different grids");
        Field::from_raw(
            &self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Pointwise (aliased) product at the nodes. Use
    /// [`super::dealiased_product`] inside the dynamics.
    pub fn pointwise_mul(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    /// `self + c·other`
    pub fn axpy(&self, c: f64, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + c * b)
    }

    /// `‖self − other‖_∞`
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.map(|v| -v)
    }
}

impl Mul<&Field> for f64 {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        rhs.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let g = TorusGrid::new(16).unwrap();
        assert!(Field::new(&g, vec![0.0; 15]).is_err());
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(Field::new(&g, v).is_err());
    }

    #[test]
    fn trapezoid_integral_is_spectral() {
        let g = TorusGrid::new(32).unwrap();
        let f = Field::from_fn(&g, |x| (x.cos()).exp());
        // ∫_0^{2π} e^{cos x} dx = 2π I_0(1)
        let i0 = 1.266_065_877_752_008_4;
        assert!((f.integral() - 2.0 * PI * i0).abs() < 1e-13);
    }

    #[test]
    fn norms() {
        let g = TorusGrid::new(64).unwrap();
        let f = Field::from_fn(&g, |x| x.sin());
        assert!((f.lp_norm(2.0) - PI.sqrt()).abs() < 1e-13);
        assert!((f.sup_norm() - 1.0).abs() < 1e-15);
        assert_eq!(f.argmax(), 16);
    }
}
