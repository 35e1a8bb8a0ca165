use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{weighted_pair_integral, KernelSpec};
use crate::model::{DerivedFields, ForceSpec, Snapshot, State};
use crate::spectral::{
    dealiased_product, dealiased_product3, derivative, frac_laplacian, holder_seminorm, Field,
};

/// Scalars describing one snapshot.
///
/// `energy_residual` and `rho_energy_residual` depend on the whole history
/// and are filled in by [`compute_records`]; a lone record carries zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    /// `½∫ρu²`
    pub energy: f64,
    /// `∫ρ²`
    pub rho_energy: f64,
    /// `∫∫ρ(x)ρ(y)|u(x)−u(y)|²φ_α(x−y)`
    pub dissipation: f64,
    /// `∫∫(ρ(x)+ρ(y))|ρ(x)−ρ(y)|²φ_α(x−y)`
    pub rho_dissipation: f64,
    /// `max u − min u`
    pub alignment: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub u_inf_norm: f64,
    pub q_inf_norm: f64,
    pub q_max: f64,
    pub q_min: f64,
    pub e_inf_norm: f64,
    pub e_integral: f64,
    /// `∫eρ²`
    pub e_rho2: f64,
    /// `∫ρuf`
    pub force_work: f64,
    /// `∫ρf`
    pub force_momentum: f64,
    pub u_prime_inf_norm: f64,
    pub rho_prime_inf_norm: f64,
    pub e_prime_inf_norm: f64,
    pub energy_residual: f64,
    pub rho_energy_residual: f64,
    /// `(γ, [ρ]_γ, [u]_γ)` for each configured exponent.
    pub holder: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecordOptions {
    pub holder_gammas: Vec<f64>,
}

/// Dealiased pairing `∫ a b` (exact for band-limited inputs).
fn pairing(a: &Field, b: &Field) -> f64 {
    a.pointwise_mul(b).integral()
}

/// `D = ∫[2ρu·Λ(ρu) − ρu²·Λρ − ρ·Λ(ρu²)]`
pub fn spectral_dissipation(state: &State) -> Result<f64> {
    let alpha = state.alpha;
    let m = dealiased_product(&state.rho, &state.u)?;
    let m2 = dealiased_product3(&state.rho, &state.u, &state.u)?;
    let lrho = frac_laplacian(&state.rho, alpha)?;
    Ok(2.0 * pairing(&m, &frac_laplacian(&m, alpha)?)
        - pairing(&m2, &lrho)
        - pairing(&state.rho, &frac_laplacian(&m2, alpha)?))
}

/// `∫∫(ρ(x)+ρ(y))|ρ(x)−ρ(y)|²φ_α = 2∫ρ²Λρ`
pub fn spectral_rho_dissipation(state: &State) -> Result<f64> {
    let r2 = dealiased_product(&state.rho, &state.rho)?;
    Ok(2.0 * pairing(&r2, &frac_laplacian(&state.rho, state.alpha)?))
}

/// Velocity dissipation rate by direct double quadrature against the
/// periodized kernel.
pub fn dissipation_double_integral(state: &State, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(state, kernel)?;
    Ok(weighted_pair_integral(
        &state.rho, &state.rho, &state.u, kernel, false,
    ))
}

/// Density dissipation rate by direct double quadrature.
pub fn rho_dissipation_double_integral(state: &State, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(state, kernel)?;
    Ok(weighted_pair_integral(
        &state.rho, &state.rho, &state.rho, kernel, true,
    ))
}

fn check_kernel(state: &State, kernel: &KernelSpec) -> Result<()> {
    if kernel.alpha() != state.alpha {
        return Err(Error::Invalid(format!(
            "kernel alpha {} does not match state alpha {}",
            kernel.alpha(),
            state.alpha
        )));
    }
    Ok(())
}

pub fn compute_record(
    state: &State,
    derived: &DerivedFields,
    force: &ForceSpec,
    options: &RecordOptions,
) -> Result<DiagnosticsRecord> {
    let grid = state.u.grid();
    let rho = &state.rho;
    let u = &state.u;
    let f = force.sample(grid, state.t);
    let momentum_field = rho.pointwise_mul(u);
    let holder = options
        .holder_gammas
        .iter()
        .map(|&g| (g, holder_seminorm(rho, g), holder_seminorm(u, g)))
        .collect();
    Ok(DiagnosticsRecord {
        t: state.t,
        mass: rho.integral(),
        momentum: momentum_field.integral(),
        energy: 0.5 * momentum_field.pointwise_mul(u).integral(),
        rho_energy: rho.pointwise_mul(rho).integral(),
        dissipation: spectral_dissipation(state)?,
        rho_dissipation: spectral_rho_dissipation(state)?,
        alignment: u.max() - u.min(),
        rho_min: rho.min(),
        rho_max: rho.max(),
        u_inf_norm: u.sup_norm(),
        q_inf_norm: derived.q.sup_norm(),
        q_max: derived.q.max(),
        q_min: derived.q.min(),
        e_inf_norm: derived.e.sup_norm(),
        e_integral: derived.e.integral(),
        e_rho2: derived.e.pointwise_mul(&rho.pointwise_mul(rho)).integral(),
        force_work: momentum_field.pointwise_mul(&f).integral(),
        force_momentum: rho.pointwise_mul(&f).integral(),
        u_prime_inf_norm: derivative(u).sup_norm(),
        rho_prime_inf_norm: derivative(rho).sup_norm(),
        e_prime_inf_norm: derivative(&derived.e).sup_norm(),
        energy_residual: 0.0,
        rho_energy_residual: 0.0,
        holder,
    })
}

/// Records for every snapshot (computed in parallel), with the energy
/// residual columns filled in.
pub fn compute_records(
    snapshots: &[Snapshot],
    force: &ForceSpec,
    options: &RecordOptions,
) -> Result<Vec<DiagnosticsRecord>> {
    let mut records = snapshots
        .par_iter()
        .map(|s| compute_record(&s.state, &s.derived, force, options))
        .collect::<Result<Vec<_>>>()?;
    let e = super::energy::energy_residual_from_records(&records, 0.5);
    let r = super::energy::rho_energy_residual_from_records(&records);
    for (rec, (a, b)) in records.iter_mut().zip(e.residual.iter().zip(&r.residual)) {
        rec.energy_residual = *a;
        rec.rho_energy_residual = *b;
    }
    Ok(records)
}

const SCALAR_COLUMNS: [&str; 24] = [
    "t",
    "mass",
    "momentum",
    "energy",
    "rho_energy",
    "dissipation",
    "rho_dissipation",
    "alignment",
    "rho_min",
    "rho_max",
    "u_inf_norm",
    "q_inf_norm",
    "q_max",
    "q_min",
    "e_inf_norm",
    "e_integral",
    "e_rho2",
    "force_work",
    "force_momentum",
    "u_prime_inf_norm",
    "rho_prime_inf_norm",
    "e_prime_inf_norm",
    "energy_residual",
    "rho_energy_residual",
];

fn scalars(r: &DiagnosticsRecord) -> [f64; 24] {
    [
        r.t,
        r.mass,
        r.momentum,
        r.energy,
        r.rho_energy,
        r.dissipation,
        r.rho_dissipation,
        r.alignment,
        r.rho_min,
        r.rho_max,
        r.u_inf_norm,
        r.q_inf_norm,
        r.q_max,
        r.q_min,
        r.e_inf_norm,
        r.e_integral,
        r.e_rho2,
        r.force_work,
        r.force_momentum,
        r.u_prime_inf_norm,
        r.rho_prime_inf_norm,
        r.e_prime_inf_norm,
        r.energy_residual,
        r.rho_energy_residual,
    ]
}

/// Seventeen significant digits, round-trip exact.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn record_csv_header(gammas: &[f64]) -> String {
    let mut cols: Vec<String> = SCALAR_COLUMNS.iter().map(|s| s.to_string()).collect();
    for g in gammas {
        cols.push(format!("holder_rho_{g}"));
        cols.push(format!("holder_u_{g}"));
    }
    cols.join(",")
}

/// One header line then one row per record.
pub fn write_records_csv(
    mut out: impl Write,
    records: &[DiagnosticsRecord],
) -> std::io::Result<()> {
    let gammas: Vec<f64> = records
        .first()
        .map(|r| r.holder.iter().map(|h| h.0).collect())
        .unwrap_or_default();
    writeln!(out, "{}", record_csv_header(&gammas))?;
    for r in records {
        let mut row: Vec<String> = scalars(r).iter().map(|&v| fmt_f64(v)).collect();
        for &(_, a, b) in &r.holder {
            row.push(fmt_f64(a));
            row.push(fmt_f64(b));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::compute_derived;
    use crate::spectral::TorusGrid;
    use std::f64::consts::PI;

    fn state(u: impl Fn(f64) -> f64, rho: impl Fn(f64) -> f64, alpha: f64, n: usize) -> State {
        let g = TorusGrid::new(n).unwrap();
        State::new(Field::from_fn(&g, u), Field::from_fn(&g, rho), 0.0, alpha).unwrap()
    }

    #[test]
    fn cosine_velocity_examples() {
        let s = state(f64::cos, |_| 1.0, 1.0, 128);
        let d = compute_derived(&s).unwrap();
        let r = compute_record(&s, &d, &ForceSpec::Zero, &RecordOptions::default()).unwrap();
        assert!((r.energy - PI / 2.0).abs() < 1e-13);
        assert!((r.dissipation - 2.0 * PI * PI).abs() < 1e-10);
        assert!((r.alignment - 2.0).abs() < 1e-12);
        let k = KernelSpec::new(1.0).unwrap();
        let dq = dissipation_double_integral(&s, &k).unwrap();
        assert!((dq - 2.0 * PI * PI).abs() < 1e-8, "{dq}");
    }

    #[test]
    fn constant_velocity_has_no_dissipation() {
        let s = state(|_| 0.3, |x| 1.0 + 0.4 * x.sin(), 0.7, 64);
        let d = compute_derived(&s).unwrap();
        let r = compute_record(&s, &d, &ForceSpec::Zero, &RecordOptions::default()).unwrap();
        assert!(r.alignment == 0.0 && r.dissipation.abs() < 1e-12);
        let k = KernelSpec::new(0.7).unwrap();
        assert!(dissipation_double_integral(&s, &k).unwrap().abs() < 1e-12);
    }

    #[test]
    fn double_integral_agrees_with_spectral() {
        for alpha in [0.4, 1.0, 1.6] {
            let s = state(
                |x| x.sin() + 0.3 * (2.0 * x).cos(),
                |x| 1.0 + 0.5 * x.cos() + 0.1 * (3.0 * x).sin(),
                alpha,
                256,
            );
            let k = KernelSpec::new(alpha).unwrap();
            let a = dissipation_double_integral(&s, &k).unwrap();
            let b = spectral_dissipation(&s).unwrap();
            assert!((a - b).abs() < 1e-5 * b, "alpha {alpha}: {a} vs {b}");
            let a = rho_dissipation_double_integral(&s, &k).unwrap();
            let b = spectral_rho_dissipation(&s).unwrap();
            assert!((a - b).abs() < 1e-5 * b, "alpha {alpha}: {a} vs {b}");
        }
    }

    #[test]
    fn double_integral_is_quadratic_in_rho() {
        let k = KernelSpec::new(0.9).unwrap();
        let s1 = state(f64::sin, |x| 1.0 + 0.3 * x.cos(), 0.9, 64);
        let s2 = state(f64::sin, |x| 2.0 * (1.0 + 0.3 * x.cos()), 0.9, 64);
        let a = dissipation_double_integral(&s1, &k).unwrap();
        let b = dissipation_double_integral(&s2, &k).unwrap();
        assert!((b - 4.0 * a).abs() < 1e-12 * b);
        assert!(dissipation_double_integral(&s1, &KernelSpec::new(1.0).unwrap()).is_err());
    }

    #[test]
    fn csv_shape_and_precision() {
        let s = state(f64::cos, |_| 1.0, 1.0, 32);
        let snap = Snapshot::new(s).unwrap();
        let opts = RecordOptions {
            holder_gammas: vec![0.25],
        };
        let recs = compute_records(&[snap.clone(), snap], &ForceSpec::Zero, &opts).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].ends_with("holder_rho_0.25,holder_u_0.25"));
        let cols = lines[0].split(',').count();
        for l in &lines[1..] {
            assert_eq!(l.split(',').count(), cols);
            let energy: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
            assert_eq!(energy, recs[0].energy);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn records_are_finite_with_nonnegative_dissipation(
            u in proptest::collection::vec(-2.0f64..2.0, 6),
            r in proptest::collection::vec(-0.3f64..0.3, 6),
            alpha in 0.2f64..1.8,
        ) {
            let g = TorusGrid::new(32).unwrap();
            let series = |c: &[f64], x: f64| c.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * x + k as f64).sin()).sum::<f64>();
            let uf = Field::from_fn(&g, |x| series(&u, x));
            let rf = Field::from_fn(&g, |x| 1.0 + 0.5 * series(&r, x));
            let state = State::new(uf, rf, 0.0, alpha).unwrap();
            let d = compute_derived(&state).unwrap();
            let rec = compute_record(&state, &d, &ForceSpec::Zero, &RecordOptions { holder_gammas: vec![0.5] }).unwrap();
            proptest::prop_assert!(scalars(&rec).iter().all(|v| v.is_finite()));
            proptest::prop_assert!(rec.dissipation >= -1e-12 * rec.energy.max(1.0));
            proptest::prop_assert!(rec.rho_dissipation >= -1e-12);
            proptest::prop_assert!(rec.alignment >= 0.0);
        }
    }
}
