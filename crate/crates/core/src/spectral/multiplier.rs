use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Number of full periods of `cos` integrated numerically before the
/// asymptotic tail takes over.
const TAIL_PERIODS: usize = 64;

/// `C(α) = ∫_ℝ (1 − cos s)/|s|^{1+α} ds`, the symbol constant of the
/// unnormalized fractional Laplacian: `Λ_α e^{ikx} = C(α)|k|^α e^{ikx}`.
///
/// Computed once per `α` and memoized. The integral is split at `s = 1`:
/// on `[0, 1]` the leading `s²/2` part of `1 − cos s` is integrated in
/// closed form and the remainder adaptively; on `[1, ∞)` the `s^{-1-α}`
/// part is exact, the oscillatory part is integrated period by period up to
/// `L = 2π·64` and the rest comes from the integration-by-parts series at `L`.
pub fn frac_multiplier_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&c) = cache.lock().unwrap().get(&alpha.to_bits()) {
        return Ok(c);
    }
    let c = compute(alpha);
    cache.lock().unwrap().insert(alpha.to_bits(), c);
    Ok(c)
}

fn one_minus_cos_minus_quadratic(s: f64) -> f64 {
    if s < 0.1 {
        // −s⁴/4! + s⁶/6! − s⁸/8! + s¹⁰/10!
        let s2 = s * s;
        s2 * s2 * (-1.0 / 24.0 + s2 * (1.0 / 720.0 + s2 * (-1.0 / 40320.0 + s2 / 3_628_800.0)))
    } else {
        let h = (0.5 * s).sin();
        2.0 * h * h - 0.5 * s * s
    }
}

fn compute(alpha: f64) -> f64 {
    let beta = 1.0 + alpha;
    let near = 0.5 / (2.0 - alpha)
        + integrate(
            |s| {
                if s == 0.0 {
                    0.0
                } else {
                    one_minus_cos_minus_quadratic(s) * s.powf(-beta)
                }
            },
            0.0,
            1.0,
            1e-15,
            1e-14,
        );

    let two_pi = 2.0 * PI;
    let mut cos_part = integrate(|s| s.cos() * s.powf(-beta), 1.0, two_pi, 1e-16, 1e-14);
    for j in 1..TAIL_PERIODS {
        let a = two_pi * j as f64;
        cos_part += integrate(|s| s.cos() * s.powf(-beta), a, a + two_pi, 1e-17, 1e-14);
    }
    // ∫_L^∞ cos s · s^{-β} ds with sin L = 0, cos L = 1:
    // Σ_j (−1)^j β(β+1)…(β+2j) L^{-β-2j-1}
    let l = two_pi * TAIL_PERIODS as f64;
    let mut rising = beta;
    let mut term_pow = l.powf(-beta - 1.0);
    let mut tail = 0.0;
    for j in 0..6 {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        tail += sign * rising * term_pow;
        let m = 2.0 * j as f64;
        rising *= (beta + m + 1.0) * (beta + m + 2.0);
        term_pow /= l * l;
    }
    cos_part += tail;

    2.0 * (near + 1.0 / alpha - cos_part)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_one_is_pi() {
        let c = frac_multiplier_constant(1.0).unwrap();
        assert!((c - PI).abs() < 1e-10 * PI, "C(1) = {c}");
    }

    #[test]
    fn rejects_out_of_range() {
        for a in [0.0, 2.0, -0.5, 2.5, f64::NAN] {
            assert!(frac_multiplier_constant(a).is_err());
        }
    }

    #[test]
    fn positive_and_small_alpha_product_bounded() {
        for a in [0.5, 1.0, 1.5] {
            assert!(frac_multiplier_constant(a).unwrap() > 0.0);
        }
        // C(α)·α → 2 as α → 0⁺ (the 1/α tail dominates)
        let p1 = frac_multiplier_constant(0.1).unwrap() * 0.1;
        let p2 = frac_multiplier_constant(0.05).unwrap() * 0.05;
        assert!(p1 > 1.5 && p1 < 2.5 && p2 > 1.5 && p2 < 2.5, "{p1} {p2}");
        assert!((p2 - 2.0).abs() < (p1 - 2.0).abs());
    }

    #[test]
    fn matches_gamma_closed_form() {
        use statrs::function::gamma::gamma;
        for a in [0.1, 0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 1.7, 1.9] {
            let closed = PI / (gamma(1.0 + a) * (0.5 * PI * a).sin());
            let c = frac_multiplier_constant(a).unwrap();
            assert!(
                (c - closed).abs() <= 1e-10 * closed,
                "alpha {a}: {c} vs {closed}"
            );
        }
    }
}
