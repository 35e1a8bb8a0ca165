use super::field::Field;

/// Discrete Hölder seminorm `max_{i≠j} |g_i − g_j| / d(x_i, x_j)^γ` with the
/// periodic distance `d = min(|x − y|, 2π − |x − y|)`. O(n²).
pub fn holder_seminorm(field: &Field, gamma: f64) -> f64 {
    assert!(
        gamma > 0.0 && gamma <= 1.0,
        "Hölder exponent must lie in (0, 1]"
    );
    let n = field.len();
    let h = field.grid().node_spacing();
    let s = field.samples();
    // distance depends only on the index offset
    let weights: Vec<f64> = (0..=n / 2)
        .map(|m| {
            if m == 0 {
                0.0
            } else {
                (m as f64 * h).powf(-gamma)
            }
        })
        .collect();
    let mut best = 0.0_f64;
    for i in 0..n {
        for m in 1..=n / 2 {
            let j = (i + m) % n;
            best = best.max((s[i] - s[j]).abs() * weights[m]);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use std::f64::consts::PI;

    #[test]
    fn constant_is_zero_and_sine_lipschitz_is_one() {
        let g = TorusGrid::new(256).unwrap();
        assert_eq!(holder_seminorm(&Field::constant(&g, 2.0), 0.5), 0.0);
        let v = holder_seminorm(&Field::from_fn(&g, f64::sin), 1.0);
        assert!((v - 1.0).abs() < 1e-3 && v <= 1.0 + 1e-12, "{v}");
    }

    #[test]
    fn matches_exhaustive_pair_scan() {
        let g = TorusGrid::new(32).unwrap();
        let vals: Vec<f64> = (0..32).map(|j| ((j * 7919) % 101) as f64 / 101.0).collect();
        let f = Field::new(&g, vals.clone()).unwrap();
        for gamma in [0.1, 0.5, 1.0] {
            let mut brute = 0.0_f64;
            for i in 0..32 {
                for j in 0..32 {
                    if i == j {
                        continue;
                    }
                    let d = (g.node(i) - g.node(j)).abs();
                    let d = d.min(2.0 * PI - d);
                    brute = brute.max((vals[i] - vals[j]).abs() / d.powf(gamma));
                }
            }
            assert!((holder_seminorm(&f, gamma) - brute).abs() < 1e-12 * brute);
        }
    }
}
