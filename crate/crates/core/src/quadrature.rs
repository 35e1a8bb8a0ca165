//! One-dimensional quadrature and a few special functions used by the
//! kernel and multiplier constants.

// Gauss-Kronrod 7/15 abscissae (positive half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss 7-point weights for the odd Kronrod nodes (indices 1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 50;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> f64 {
    let (value, err) = whole;
    if err <= tol || depth >= MAX_DEPTH || (b - a).abs() < 1e-300 {
        return value;
    }
    let mid = 0.5 * (a + b);
    let left = gk15(f, a, mid);
    let right = gk15(f, mid, b);
    adapt(f, a, mid, left, 0.5 * tol, depth + 1) + adapt(f, mid, b, right, 0.5 * tol, depth + 1)
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Intervals are bisected until the Gauss/Kronrod difference of each piece
/// falls under its share of `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let whole = gk15(&f, a, b);
    let tol = abs_tol.max(rel_tol * whole.0.abs());
    adapt(&f, a, b, whole, tol, 0)
}

// B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (k + a)^{-s}` for real `s ≠ 1`, `a > 0`.
///
/// Direct summation of the first terms followed by the Euler-Maclaurin
/// tail (integral, endpoint and Bernoulli corrections). The expansion is the
/// analytic continuation, so negative `s` (down to about −15) is valid too.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(a > 0.0, "hurwitz_zeta needs a > 0");
    assert!((s - 1.0).abs() > 1e-14, "hurwitz_zeta has a pole at s = 1");
    const N: usize = 32;
    let mut sum = 0.0;
    for k in 0..N {
        sum += (k as f64 + a).powf(-s);
    }
    let x = N as f64 + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising product s(s+1)...(s+2j-2), updated in place
    let mut rising = s;
    let mut fact = 2.0;
    let mut pow = x.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * pow;
        sum += term;
        let m = 2 * j as u32 + 2;
        rising *= (s + m as f64 - 1.0) * (s + m as f64);
        fact *= (m as f64 + 1.0) * (m as f64 + 2.0);
        pow /= x * x;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Riemann zeta `ζ(s)` for real `s ≠ 1`.
pub fn riemann_zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Ordinary least-squares fit `y ≈ intercept + slope·x`.
///
/// Returns `(slope, intercept)`; `None` for fewer than two points or
/// degenerate abscissae.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Trapezoid-rule cumulative integral of samples `y` at (possibly uneven)
/// times `t`. The first entry is zero.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomials_and_smooth() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1e-14);
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-12);
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-14, 1e-14);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let v = integrate(|x| x.powf(-0.5), 0.0, 1.0, 1e-12, 1e-12);
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn zeta_known_values() {
        let pi = std::f64::consts::PI;
        assert!((riemann_zeta(2.0) - pi * pi / 6.0).abs() < 1e-14);
        assert!((riemann_zeta(0.0) + 0.5).abs() < 1e-14);
        assert!((riemann_zeta(-1.0) + 1.0 / 12.0).abs() < 1e-14);
        assert!(riemann_zeta(-2.0).abs() < 1e-14);
        assert!((riemann_zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-13);
        // ζ(2, 1/2) = (2² − 1)ζ(2)
        assert!((hurwitz_zeta(2.0, 0.5) - 3.0 * pi * pi / 6.0).abs() < 1e-13);
    }

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (s, c) = linear_fit(&x, &y).unwrap();
        assert!((s + 0.5).abs() < 1e-14 && (c - 2.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn trapezoid_exact_for_linear() {
        let t = [0.0, 0.5, 1.5, 2.0];
        let y: Vec<f64> = t.iter().map(|v| 3.0 * v + 1.0).collect();
        let c = cumulative_trapezoid(&t, &y);
        assert!((c[3] - (1.5 * 4.0 + 2.0)).abs() < 1e-14);
    }
}
