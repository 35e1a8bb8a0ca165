use serde::{Deserialize, Serialize};

use crate::spectral::{Field, TorusGrid};

/// One term `a·sin(kx + ωt + φ)` of a trigonometric forcing series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub wavenumber: u32,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// External force `f(x, t)` with analytic `f'` and `f''`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ForceSpec {
    Zero,
    /// `a·b(t)·sin(kx + φ)` where `b` is the smooth bump
    /// `exp(1 − 1/(1 − s²))`, `s = 2t/T − 1`, supported on `(0, T)`
    /// with peak 1 at `T/2`.
    Bump {
        amplitude: f64,
        wavenumber: u32,
        #[serde(default)]
        phase: f64,
        support_end: f64,
    },
    Trig {
        terms: Vec<TrigTerm>,
    },
}

impl Default for ForceSpec {
    fn default() -> Self {
        ForceSpec::Zero
    }
}

fn bump_profile(t: f64, end: f64) -> f64 {
    if t <= 0.0 || t >= end {
        return 0.0;
    }
    let s = 2.0 * t / end - 1.0;
    (1.0 - 1.0 / (1.0 - s * s)).exp()
}

impl ForceSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            ForceSpec::Zero => true,
            ForceSpec::Bump { amplitude, .. } => *amplitude == 0.0,
            ForceSpec::Trig { terms } => terms.iter().all(|t| t.amplitude == 0.0),
        }
    }

    /// Time after which `f ≡ 0`, if any.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            ForceSpec::Zero => Some(0.0),
            ForceSpec::Bump { support_end, .. } => Some(*support_end),
            ForceSpec::Trig { terms } if terms.iter().all(|t| t.amplitude == 0.0) => Some(0.0),
            ForceSpec::Trig { .. } => None,
        }
    }

    /// `∂_x^order f(x, t)` for `order` in 0..=2.
    pub fn eval_derivative(&self, order: u32, x: f64, t: f64) -> f64 {
        // d^m/dx^m sin(θ) with θ = kx + c equals k^m sin(θ + mπ/2)
        let sin_deriv = |k: f64, theta: f64| {
            k.powi(order as i32) * (theta + order as f64 * std::f64::consts::FRAC_PI_2).sin()
        };
        match self {
            ForceSpec::Zero => 0.0,
            ForceSpec::Bump {
                amplitude,
                wavenumber,
                phase,
                support_end,
            } => {
                let b = bump_profile(t, *support_end);
                if b == 0.0 {
                    return 0.0;
                }
                let k = *wavenumber as f64;
                amplitude * b * sin_deriv(k, k * x + phase)
            }
            ForceSpec::Trig { terms } => terms
                .iter()
                .map(|term| {
                    let k = term.wavenumber as f64;
                    term.amplitude * sin_deriv(k, k * x + term.frequency * t + term.phase)
                })
                .sum(),
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.eval_derivative(0, x, t)
    }

    pub fn eval_dx(&self, x: f64, t: f64) -> f64 {
        self.eval_derivative(1, x, t)
    }

    pub fn eval_dxx(&self, x: f64, t: f64) -> f64 {
        self.eval_derivative(2, x, t)
    }

    pub fn sample(&self, grid: &TorusGrid, t: f64) -> Field {
        Field::from_fn(grid, |x| self.eval(x, t))
    }

    pub fn sample_dx(&self, grid: &TorusGrid, t: f64) -> Field {
        Field::from_fn(grid, |x| self.eval_dx(x, t))
    }

    /// Upper bound for `‖∂_x^order f‖_{L^∞_{x,t}}` (exact for a single term).
    pub fn sup_norm_derivative(&self, order: u32) -> f64 {
        match self {
            ForceSpec::Zero => 0.0,
            ForceSpec::Bump {
                amplitude,
                wavenumber,
                ..
            } => amplitude.abs() * (*wavenumber as f64).powi(order as i32),
            ForceSpec::Trig { terms } => terms
                .iter()
                .map(|t| t.amplitude.abs() * (t.wavenumber as f64).powi(order as i32))
                .sum(),
        }
    }

    /// `‖f‖_{L^∞_{x,t}}`
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_derivative(0)
    }

    /// `‖f'‖_{L^∞_{x,t}}`
    pub fn sup_norm_dx(&self) -> f64 {
        self.sup_norm_derivative(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::derivative;

    fn forces() -> Vec<ForceSpec> {
        vec![
            ForceSpec::Bump {
                amplitude: 0.7,
                wavenumber: 2,
                phase: 0.3,
                support_end: 1.0,
            },
            ForceSpec::Trig {
                terms: vec![
                    TrigTerm {
                        amplitude: 0.5,
                        wavenumber: 1,
                        frequency: 2.0,
                        phase: 0.0,
                    },
                    TrigTerm {
                        amplitude: 0.2,
                        wavenumber: 3,
                        frequency: -1.0,
                        phase: 1.0,
                    },
                ],
            },
        ]
    }

    #[test]
    fn analytic_derivatives_match_spectral() {
        let g = TorusGrid::new(64).unwrap();
        for f in forces() {
            for t in [0.2, 0.5, 0.9] {
                let s = f.sample(&g, t);
                let d = derivative(&s);
                assert!(d.max_abs_diff(&f.sample_dx(&g, t)) < 1e-8);
                let dd = Field::from_fn(&g, |x| f.eval_dxx(x, t));
                assert!(derivative(&d).max_abs_diff(&dd) < 1e-8);
            }
        }
    }

    #[test]
    fn bump_vanishes_after_support() {
        let f = &forces()[0];
        assert_eq!(f.support_end(), Some(1.0));
        for t in [0.0, 1.0, 1.5, 10.0] {
            assert_eq!(f.eval(0.4, t), 0.0);
        }
        assert!((f.eval((std::f64::consts::FRAC_PI_2 - 0.3) / 2.0, 0.5) - 0.7).abs() < 1e-12);
        assert!(forces()[1].support_end().is_none());
        assert_eq!(ForceSpec::Zero.sup_norm_dx(), 0.0);
        assert!((f.sup_norm_dx() - 1.4).abs() < 1e-15);
    }
}
