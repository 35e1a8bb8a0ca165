use num_complex::Complex64;

use super::field::Field;
use super::grid::TorusGrid;
use super::multiplier::frac_multiplier_constant;
use crate::error::Result;

/// Fourier coefficients `ĝ(k) = (1/n) Σ_j g_j e^{-ikx_j}` in FFT order.
pub fn transform_forward(field: &Field) -> Vec<Complex64> {
    let grid = field.grid();
    let n = grid.n_points();
    let mut buf: Vec<Complex64> = field
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    grid.fft_forward(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

/// Inverse of [`transform_forward`]; the imaginary part is dropped.
pub fn transform_inverse(grid: &TorusGrid, modes: &[Complex64]) -> Field {
    assert_eq!(modes.len(), grid.n_points(), "mode count mismatch");
    let mut buf = modes.to_vec();
    grid.fft_inverse(&mut buf);
    Field::from_raw(grid, buf.into_iter().map(|c| c.re).collect())
}

/// Multiply mode `k` by `symbol(|k|)`; the Nyquist mode is zeroed.
fn apply_real_symbol(field: &Field, symbol: impl Fn(f64) -> f64) -> Field {
    let grid = field.grid();
    let mut modes = transform_forward(field);
    for (j, c) in modes.iter_mut().enumerate() {
        let k = grid.wavenumber(j).unsigned_abs() as f64;
        *c *= symbol(k);
    }
    modes[grid.nyquist_index()] = Complex64::new(0.0, 0.0);
    transform_inverse(grid, &modes)
}

/// Spectral derivative (`ik` in mode space, Nyquist dropped).
pub fn derivative(field: &Field) -> Field {
    let grid = field.grid();
    let mut modes = transform_forward(field);
    for (j, c) in modes.iter_mut().enumerate() {
        let k = grid.wavenumber(j) as f64;
        *c *= Complex64::new(0.0, k);
    }
    modes[grid.nyquist_index()] = Complex64::new(0.0, 0.0);
    transform_inverse(grid, &modes)
}

/// `Λ_α g` with symbol `C(α)|k|^α`.
pub fn frac_laplacian(field: &Field, alpha: f64) -> Result<Field> {
    let c = frac_multiplier_constant(alpha)?;
    Ok(apply_real_symbol(field, |k| c * k.powf(alpha)))
}

/// Square root of `Λ_α`, symbol `√C(α)·|k|^{α/2}`, so that applying it twice
/// reproduces [`frac_laplacian`] exactly. This is the half-order operator
/// used in the symmetrized dissipation pairings.
pub fn half_frac_laplacian(field: &Field, alpha: f64) -> Result<Field> {
    let c = frac_multiplier_constant(alpha)?.sqrt();
    let half = 0.5 * alpha;
    Ok(apply_real_symbol(field, |k| c * k.powf(half)))
}

/// Translate: returns `g(x + s)` via the phase `e^{iks}`; exact for
/// band-limited fields. The Nyquist mode is dropped.
pub fn shift(field: &Field, s: f64) -> Field {
    let grid = field.grid();
    let mut modes = transform_forward(field);
    for (j, c) in modes.iter_mut().enumerate() {
        let k = grid.wavenumber(j) as f64;
        *c *= Complex64::from_polar(1.0, k * s);
    }
    modes[grid.nyquist_index()] = Complex64::new(0.0, 0.0);
    transform_inverse(grid, &modes)
}

/// Zero-pad the n-point spectrum of `field` to the padded grid and return
/// the padded physical samples. The n-point Nyquist coefficient is split
/// evenly between `±n/2`.
fn pad(field: &Field) -> Vec<Complex64> {
    let grid = field.grid();
    let n = grid.n_points();
    let m = grid.padded_points();
    let modes = transform_forward(field);
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n / 2 {
        padded[j] = modes[j];
    }
    for j in n / 2 + 1..n {
        padded[m - n + j] = modes[j];
    }
    let nyq = 0.5 * modes[n / 2];
    padded[n / 2] = nyq;
    padded[m - n / 2] = nyq;
    grid.fft_padded_inverse(&mut padded);
    padded
}

/// Forward-transform padded samples and truncate back to the n-point
/// spectrum, discarding `|k| ≥ n/2`.
fn truncate(grid: &TorusGrid, mut padded: Vec<Complex64>) -> Field {
    let n = grid.n_points();
    let m = grid.padded_points();
    for c in padded.iter_mut() {
        *c = Complex64::new(c.re, 0.0);
    }
    grid.fft_padded_forward(&mut padded);
    let scale = 1.0 / m as f64;
    let mut modes = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n / 2 {
        modes[j] = padded[j] * scale;
    }
    for j in n / 2 + 1..n {
        modes[j] = padded[m - n + j] * scale;
    }
    transform_inverse(grid, &modes)
}

/// Product `a·b` evaluated on the padded grid and truncated to the modes
/// `|k| < n/2` (the output carries no Nyquist component). Exact whenever the
/// full product spectrum fits, i.e. always for inputs without Nyquist
/// content and `padding_factor ≥ 2`.
pub fn dealiased_product(a: &Field, b: &Field) -> Result<Field> {
    a.grid().check_same(b.grid())?;
    let pa = pad(a);
    let pb = pad(b);
    let prod = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
    Ok(truncate(a.grid(), prod))
}

/// Triple product `a·b·c` formed on the padded grid before truncating, so
/// cubic terms such as `ρu²` are not truncated twice.
pub fn dealiased_product3(a: &Field, b: &Field, c: &Field) -> Result<Field> {
    a.grid().check_same(b.grid())?;
    a.grid().check_same(c.grid())?;
    let pa = pad(a);
    let pb = pad(b);
    let pc = pad(c);
    let prod = pa
        .iter()
        .zip(&pb)
        .zip(&pc)
        .map(|((x, y), z)| x * y * z)
        .collect();
    Ok(truncate(a.grid(), prod))
}
