//! The periodized interaction kernel
//! `φ_α(z) = Σ_{k∈ℤ} |z + 2πk|^{-1-α}` and direct real-space quadratures
//! built on it.
//!
//! The quadratures here never touch Fourier multipliers; they are the
//! independent cross-check for the spectral operators.
//!
//! Singular integrals `∫_𝕋 N(z) φ_α(z) dz` with `N(0) = 0` are evaluated by
//! the punctured trapezoid rule on the grid offsets plus generalized
//! Euler-Maclaurin corrections: for the even Taylor terms `c_m z^m` of `N`,
//! the punctured sum overshoots the integral by `2ζ(α+1−m) c_m h^{m−α}`.
//! Odd terms cancel by symmetry. Corrections for `m = 2, 4` are applied,
//! leaving an `O(h^{6−α})` error; the Taylor coefficients come from
//! high-order finite differences on the samples.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{hurwitz_zeta, riemann_zeta};
use crate::spectral::{derivative, Field};

const MIN_TRUNCATION: usize = 64;
const AUDIT_POINTS: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    alpha: f64,
    truncation_terms: usize,
    tail_tolerance: f64,
}

impl KernelSpec {
    /// Kernel for order `alpha` with the default truncation (64 lattice
    /// terms) and tail tolerance `1e-12`.
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_truncation(alpha, MIN_TRUNCATION, 1e-12)
    }

    /// Builds the spec and audits that `φ_α` is decreasing on `(0, π]`
    /// (which is what lets [`KernelSpec::iota`] read off `φ_α(r)`).
    pub fn with_truncation(
        alpha: f64,
        truncation_terms: usize,
        tail_tolerance: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        if truncation_terms < MIN_TRUNCATION {
            return Err(Error::OutOfRange {
                name: "truncation_terms",
                value: truncation_terms as f64,
                reason: "must be at least 64",
            });
        }
        let mut spec = KernelSpec {
            alpha,
            truncation_terms,
            tail_tolerance,
        };
        while spec.tail_bound() > tail_tolerance {
            spec.truncation_terms *= 2;
        }
        spec.audit_monotone()?;
        Ok(spec)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn truncation_terms(&self) -> usize {
        self.truncation_terms
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    /// Bound on the error left after the Euler-Maclaurin tail is added to
    /// the truncated lattice sum: the size of the first neglected Bernoulli
    /// term (`B_22`) for both half-lattices, uniformly in `|z| ≤ π`.
    pub fn tail_bound(&self) -> f64 {
        let beta = 1.0 + self.alpha;
        let a = self.truncation_terms as f64 + 0.5 + 32.0;
        let mut rising = 1.0;
        for i in 0..21 {
            rising *= beta + i as f64;
        }
        // |B_22| / 22! ≈ 2·(2π)^{-22}
        let coef = 2.0 * (2.0 * PI).powi(-22);
        2.0 * (2.0 * PI).powf(-beta) * coef * rising * a.powf(-beta - 21.0)
    }

    fn audit_monotone(&self) -> Result<()> {
        let mut prev = f64::INFINITY;
        for i in 1..=AUDIT_POINTS {
            let z = PI * i as f64 / AUDIT_POINTS as f64;
            let v = self.phi_unchecked(z);
            if !(v < prev) {
                return Err(Error::Invalid(format!(
                    "phi_alpha is not decreasing on (0, pi] near z = {z}"
                )));
            }
            prev = v;
        }
        Ok(())
    }

    /// `φ_α(z)` for `z ∈ [−π, π] \ {0}`.
    pub fn phi(&self, z: f64) -> Result<f64> {
        if z == 0.0 {
            return Err(Error::OutOfRange {
                name: "z",
                value: z,
                reason: "phi_alpha is singular at z = 0",
            });
        }
        if !(z.abs() <= PI) {
            return Err(Error::OutOfRange {
                name: "z",
                value: z,
                reason: "must lie in [-pi, pi]",
            });
        }
        Ok(self.phi_unchecked(z))
    }

    fn phi_unchecked(&self, z: f64) -> f64 {
        let z = z.abs();
        let beta = 1.0 + self.alpha;
        let two_pi = 2.0 * PI;
        let k_max = self.truncation_terms;
        let mut sum = z.powf(-beta);
        for k in 1..=k_max {
            let kk = two_pi * k as f64;
            sum += (kk + z).powf(-beta) + (kk - z).powf(-beta);
        }
        // Σ_{k>K} (2πk ± z)^{-β} = (2π)^{-β} ζ(β, K + 1 ± z/2π)
        let shift = z / two_pi;
        let first = (k_max + 1) as f64;
        sum += two_pi.powf(-beta)
            * (hurwitz_zeta(beta, first + shift) + hurwitz_zeta(beta, first - shift));
        sum
    }

    /// `ι(r) = inf_{|x|<r} φ_α(x) = φ_α(r)` for `r ∈ (0, π]`.
    pub fn iota(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= PI) {
            return Err(Error::OutOfRange {
                name: "r",
                value: r,
                reason: "iota is defined for r in (0, pi]",
            });
        }
        Ok(self.phi_unchecked(r))
    }

    /// Supremum over `r ∈ (0, π]` of the non-singular lattice part
    /// `φ_α(r) − r^{-1-α}`, attained at `r = π` since that part is even and
    /// convex in `r`.
    pub fn lattice_remainder_bound(&self) -> f64 {
        self.phi_unchecked(PI) - PI.powf(-1.0 - self.alpha)
    }

    /// `r₀ ∈ (0, π)` with `r₀^{-1-α}` equal to [`Self::lattice_remainder_bound`];
    /// below it `r^{-1-α} ≤ ι(r) ≤ 2 r^{-1-α}`.
    pub fn r0(&self) -> f64 {
        self.lattice_remainder_bound()
            .powf(-1.0 / (1.0 + self.alpha))
    }

    /// `φ_α` at every grid offset `z_j = j·h`, `j = 0..n`, folded into
    /// `[−π, π]`; entry 0 is unused (set to 0).
    fn offsets(&self, n: usize) -> Vec<f64> {
        let h = 2.0 * PI / n as f64;
        let mut out = vec![0.0; n];
        for j in 1..=n / 2 {
            let v = self.phi_unchecked(j as f64 * h);
            out[j] = v;
            out[n - j] = v;
        }
        out
    }

    /// Euler-Maclaurin correction `Σ_{m=2,4} 2ζ(α+1−m) c_m h^{m−α}` that must
    /// be subtracted from the punctured trapezoid sum.
    fn singular_correction(&self, c2: f64, c4: f64, h: f64) -> f64 {
        let a = self.alpha;
        2.0 * riemann_zeta(a - 1.0) * c2 * h.powf(2.0 - a)
            + 2.0 * riemann_zeta(a - 3.0) * c4 * h.powf(4.0 - a)
    }
}

/// Local Taylor coefficients `[g, g', g''/2, g'''/6, g''''/24]` at every
/// node from periodic central differences (8th order for the first two
/// derivatives, 6th order for the third and fourth).
pub(crate) fn taylor_coefficients(field: &Field) -> Vec<[f64; 5]> {
    let s = field.samples();
    let n = s.len();
    let h = field.grid().node_spacing();
    let at = |i: usize, off: isize| s[(i as isize + off).rem_euclid(n as isize) as usize];
    const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    const D2: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
    const D2_CENTER: f64 = -205.0 / 72.0;
    const D3: [f64; 4] = [-61.0 / 30.0, 169.0 / 120.0, -3.0 / 10.0, 7.0 / 240.0];
    const D4: [f64; 4] = [-122.0 / 15.0, 169.0 / 60.0, -2.0 / 5.0, 7.0 / 240.0];
    const D4_CENTER: f64 = 91.0 / 8.0;
    (0..n)
        .map(|i| {
            let mut d1 = 0.0;
            let mut d2 = D2_CENTER * s[i];
            let mut d3 = 0.0;
            let mut d4 = D4_CENTER * s[i];
            for m in 1..=4isize {
                let (p, q) = (at(i, m), at(i, -m));
                let k = (m - 1) as usize;
                d1 += D1[k] * (p - q);
                d2 += D2[k] * (p + q);
                d3 += D3[k] * (p - q);
                d4 += D4[k] * (p + q);
            }
            [
                s[i],
                d1 / h,
                d2 / (2.0 * h * h),
                d3 / (6.0 * h * h * h),
                d4 / (24.0 * h * h * h * h),
            ]
        })
        .collect()
}

type Poly = [f64; 5];

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = [0.0; 5];
    for i in 0..5 {
        for j in 0..5 - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// Taylor polynomial in `z` of `g(x) − g(x + z)` from the coefficients of `g`.
fn difference_poly(t: &Poly) -> Poly {
    [0.0, -t[1], -t[2], -t[3], -t[4]]
}

/// Inner singular integral `∫_𝕋 N_i(z) φ_α(z) dz` at every node `i`, where
/// `numerator(i, j)` is `N_i` at offset `z_j` and `taylor(i)` its Taylor
/// polynomial at `z = 0`.
pub(crate) fn singular_integral_at_nodes(
    spec: &KernelSpec,
    n: usize,
    numerator: impl Fn(usize, usize) -> f64,
    taylor: impl Fn(usize) -> Poly,
) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let phi = spec.offsets(n);
    (0..n)
        .map(|i| {
            let mut sum = 0.0;
            for j in 1..n {
                sum += numerator(i, j) * phi[j];
            }
            let c = taylor(i);
            h * sum - spec.singular_correction(c[2], c[4], h)
        })
        .collect()
}

/// `Λ_α g(x_j) = p.v.∫_𝕋 (g(x_j) − g(x_j + z)) φ_α(z) dz` by direct
/// quadrature.
pub fn frac_laplacian_quadrature(field: &Field, spec: &KernelSpec) -> Field {
    let n = field.len();
    let s = field.samples();
    let taylor = taylor_coefficients(field);
    let values = singular_integral_at_nodes(
        spec,
        n,
        |i, j| s[i] - s[(i + j) % n],
        |i| difference_poly(&taylor[i]),
    );
    Field::from_raw(field.grid(), values)
}

/// `D_α g(y) = ∫_ℝ |g(y) − g(y+z)|² |z|^{-1-α} dz`, pointwise.
pub fn d_alpha(field: &Field, spec: &KernelSpec) -> Field {
    let n = field.len();
    let s = field.samples();
    let taylor = taylor_coefficients(field);
    let values = singular_integral_at_nodes(
        spec,
        n,
        |i, j| {
            let d = s[i] - s[(i + j) % n];
            d * d
        },
        |i| {
            let d = difference_poly(&taylor[i]);
            poly_mul(&d, &d)
        },
    );
    // the integrand is nonnegative; clip rounding-level negatives
    Field::from_raw(
        field.grid(),
        values.into_iter().map(|v| v.max(0.0)).collect(),
    )
}

/// `∫_𝕋 w(x) ∫_𝕋 a(x+z) |g(x) − g(x+z)|² φ_α(z) dz dx`: the symmetric
/// double integrals behind both dissipation rates.
pub(crate) fn weighted_pair_integral(
    outer: &Field,
    inner: &Field,
    g: &Field,
    spec: &KernelSpec,
    add_outer_to_inner: bool,
) -> f64 {
    let n = g.len();
    let h = g.grid().node_spacing();
    let w = outer.samples();
    let a = inner.samples();
    let s = g.samples();
    let tg = taylor_coefficients(g);
    let ta = taylor_coefficients(inner);
    let values = singular_integral_at_nodes(
        spec,
        n,
        |i, j| {
            let k = (i + j) % n;
            let d = s[i] - s[k];
            let weight = if add_outer_to_inner {
                w[i] + a[k]
            } else {
                a[k]
            };
            weight * d * d
        },
        |i| {
            let d = difference_poly(&tg[i]);
            let mut weight = ta[i];
            if add_outer_to_inner {
                weight[0] += w[i];
            }
            poly_mul(&weight, &poly_mul(&d, &d))
        },
    );
    if add_outer_to_inner {
        h * values.iter().sum::<f64>()
    } else {
        h * values.iter().zip(w).map(|(v, wi)| v * wi).sum::<f64>()
    }
}

/// Empirical constant in the nonlinear maximum principle: at the node where
/// `|g'|` peaks, returns `D_α g'(x)·‖g‖_∞^α / |g'(x)|^{2+α}`.
pub fn nonlinear_max_principle_ratio(field: &Field, spec: &KernelSpec) -> f64 {
    let dg = derivative(field);
    let abs = dg.map(f64::abs);
    let i = abs.argmax();
    let peak = abs.samples()[i];
    if peak == 0.0 {
        return f64::INFINITY;
    }
    let d = d_alpha(&dg, spec);
    d.samples()[i] * field.sup_norm().powf(spec.alpha()) / peak.powf(2.0 + spec.alpha())
}
