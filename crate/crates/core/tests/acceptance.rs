use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::sync::OnceLock;

use euler_alignment::diagnostics::{
    alignment_decay, check_linfty_bounds, check_q_bound, compute_records,
    dissipation_double_integral, flocking_study, holder_scaling_study, residual_refinement,
    rho_dissipation_double_integral, spectral_dissipation, spectral_rho_dissipation,
    BoundConstants, HolderField, RecordOptions,
};
use euler_alignment::experiments::{refined, run_config, uniqueness_gronwall, ScenarioConfig};
use euler_alignment::kernel::frac_laplacian_quadrature;
use euler_alignment::model::{decode_snapshot, encode_snapshot, evolve, InitialData, State};
use euler_alignment::onsager::{default_q_list, energy_budget, onsager_convergence_study};
use euler_alignment::spectral::{frac_laplacian, frac_multiplier_constant};
use euler_alignment::{diagnostics, KernelSpec, TorusGrid, Trajectory};

fn report(id: u32, title: &str, passed: bool, measured: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "acceptance {id:>2} {verdict} {title}: {measured}");
}

fn scenario(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"));
    ScenarioConfig::load(path).unwrap()
}

fn run(name: &str) -> Trajectory {
    evolve(&scenario(name).sim_config().unwrap()).unwrap()
}

fn smooth_decay() -> &'static Trajectory {
    static TRAJ: OnceLock<Trajectory> = OnceLock::new();
    TRAJ.get_or_init(|| run("smooth-decay"))
}

fn compact_force() -> &'static Trajectory {
    static TRAJ: OnceLock<Trajectory> = OnceLock::new();
    TRAJ.get_or_init(|| run("compact-force-flocking"))
}

fn max_drift(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max((x - v[0]).abs()))
}

#[test]
fn criterion_01_operator_correctness() {
    let g = TorusGrid::new(256).unwrap();
    let catalog = [
        InitialData::Smooth {
            rho_mean: 1.0,
            rho_amp: 0.5,
            rho_mode: 1,
            u_mean: 0.0,
            u_amp: 1.0,
            u_mode: 3,
        },
        InitialData::SteepTanh {
            base: 0.5,
            height: 1.0,
            width: 0.3,
            u_amp: 0.2,
            u_modes: 4,
        },
        InitialData::Random {
            rho_mean: 1.0,
            rho_amp: 0.3,
            u_mean: 0.0,
            u_amp: 1.0,
            modes: 12,
            decay: 1.5,
        },
    ];
    let mut fields = Vec::new();
    for (i, c) in catalog.iter().enumerate() {
        let (u, rho) = c.sample(&g, 7);
        fields.push(rho);
        if i != 1 {
            fields.push(u);
        }
    }
    assert_eq!(fields.len(), 5);
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.5] {
        let k = KernelSpec::new(alpha).unwrap();
        for f in &fields {
            let spectral = frac_laplacian(f, alpha).unwrap();
            let quad = frac_laplacian_quadrature(f, &k);
            worst = worst.max(quad.max_abs_diff(&spectral) / spectral.sup_norm());
        }
    }
    let c1 = (frac_multiplier_constant(1.0).unwrap() - PI).abs();
    let phi = (KernelSpec::new(1.0).unwrap().phi(PI).unwrap() - 0.25).abs();
    let passed = worst < 1e-6 && c1 < 1e-10 && phi < 1e-10;
    report(
        1,
        "operator correctness",
        passed,
        &format!("Λ vs quadrature {worst:.2e} (< 1e-6), |C(1) − π| {c1:.1e}, |φ₁(π) − 1/4| {phi:.1e} (< 1e-10)"),
    );
    assert!(passed);
}

#[test]
fn criterion_02_conservation() {
    let traj = smooth_decay();
    let r = compute_records(
        &traj.snapshots,
        &traj.config.force,
        &RecordOptions::default(),
    )
    .unwrap();
    let mass: Vec<f64> = r.iter().map(|x| x.mass).collect();
    let e: Vec<f64> = r.iter().map(|x| x.e_integral).collect();
    let p: Vec<f64> = r.iter().map(|x| x.momentum).collect();
    let dm = max_drift(&mass) / mass[0];
    let de = max_drift(&e);
    let dp = max_drift(&p);
    let passed = dm < 1e-11 && de < 1e-9 && dp < 1e-11;
    report(
        2,
        "conservation",
        passed,
        &format!("mass {dm:.2e} (< 1e-11 rel), ∫e {de:.2e} (< 1e-9), momentum {dp:.2e} (< 1e-11)"),
    );
    assert!(passed);
}

#[test]
fn criterion_03_energy_laws() {
    let traj = smooth_decay();
    let force = &traj.config.force;
    let e = diagnostics::energy_residual(traj, force).unwrap();
    let r = diagnostics::rho_energy_residual(traj, force).unwrap();
    let refinement = residual_refinement(traj, force, &[1, 2, 4]).unwrap();
    let order = refinement.min_order();
    let k = KernelSpec::new(traj.config.alpha).unwrap();
    let mut gap: f64 = 0.0;
    for s in traj.snapshots.iter().step_by(1000) {
        let d = spectral_dissipation(&s.state).unwrap();
        let j = spectral_rho_dissipation(&s.state).unwrap();
        gap = gap.max((dissipation_double_integral(&s.state, &k).unwrap() - d).abs() / d);
        gap = gap.max((rho_dissipation_double_integral(&s.state, &k).unwrap() - j).abs() / j);
    }
    let passed = e.max_relative < 1e-5 && r.max_relative < 1e-5 && order >= 1.95 && gap < 1e-5;
    report(
        3,
        "energy laws",
        passed,
        &format!(
            "residuals {:.2e} / {:.2e} (< 1e-5), order {order:.4} (≥ 2, pinned 1.95), dissipation gap {gap:.1e} (< 1e-5)",
            e.max_relative, r.max_relative
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_04_explicit_bounds() {
    let mut parts = Vec::new();
    let mut passed = true;
    for (label, traj) in [("unforced", smooth_decay()), ("forced", compact_force())] {
        let k = KernelSpec::new(traj.config.alpha).unwrap();
        let c = BoundConstants::from_initial(traj.first(), &traj.config.force, &k).unwrap();
        let linf = check_linfty_bounds(traj, &c);
        let q = check_q_bound(traj, &traj.config.force, &c);
        let v = linf.violations.len() + q.transport_violations + q.exponential_violations;
        passed &= v == 0 && linf.checked > 0;
        parts.push(format!(
            "{label}: {v} violations over {} checks",
            linf.checked
        ));
    }
    report(4, "explicit L∞ bounds", passed, &parts.join(", "));
    assert!(passed);
}

#[test]
fn criterion_05_fast_alignment() {
    let traj = smooth_decay();
    let a = alignment_decay(traj, &KernelSpec::new(1.0).unwrap()).unwrap();
    let rate_ok = (a.rate_bound - PI / 2.0).abs() < 1e-9;
    let passed = a.envelope_ok && rate_ok && a.window_start == 0.0 && a.window_end >= 5.0 - 1e-12;
    report(
        5,
        "fast alignment",
        passed,
        &format!(
            "max A(t)/(A(0)e^(−πt/2)) = {:.6} (≤ 1 + 1e-6), rate bound {:.10}, fitted rate {:?}",
            a.worst_envelope_ratio, a.rate_bound, a.fitted_rate
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_06_onsager_budget() {
    let traj = smooth_decay();
    let q_list = default_q_list(&traj.first().state);
    let budget = energy_budget(traj, &traj.config.force, &q_list, false).unwrap();
    let conv = onsager_convergence_study(&budget, traj);
    let worst = budget
        .relative_residuals()
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.1));
    let passed = worst < 1e-5 && conv.passed(10.0);
    report(
        6,
        "Onsager budget",
        passed,
        &format!(
            "Q = {}..={}, residual {worst:.2e} (< 1e-5), |∫Π_Q| decay {:.1e}, |ε_Q − ε| decay {:.1e} (≥ 10)",
            q_list[0],
            q_list[q_list.len() - 1],
            conv.flux_decay_factor,
            conv.eps_decay_factor
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_07_smoothing() {
    let cfg = scenario("rough-data-smoothing");
    let traj = evolve(&cfg.sim_config().unwrap()).unwrap();
    let mut parts = Vec::new();
    let mut passed = true;
    for gamma in [0.1, 0.25] {
        let r =
            holder_scaling_study(&traj, gamma, HolderField::Rho, cfg.holder_t_max, 0.0).unwrap();
        passed &= r.slope_ok() && r.times.len() >= 10;
        parts.push(format!(
            "γ = {gamma}: slope {:.4} ≥ {:.4}",
            r.slope, r.envelope_slope
        ));
    }
    report(7, "Hölder smoothing", passed, &parts.join(", "));
    assert!(passed);
}

#[test]
fn criterion_08_uniqueness() {
    let sim = scenario("uniqueness-gronwall").sim_config().unwrap();
    let zero = uniqueness_gronwall(&sim, 0.0, 20).unwrap();
    let zero_max = zero.phi.iter().fold(0.0_f64, |m, p| m.max(*p));
    let coarse = uniqueness_gronwall(&sim, 1e-6, 20).unwrap();
    let large = uniqueness_gronwall(&sim, 1e-5, 20).unwrap();
    let fine = uniqueness_gronwall(&refined(&sim).unwrap(), 1e-6, 20).unwrap();
    let linear = coarse
        .ratios()
        .iter()
        .zip(large.ratios())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs() / b));
    let change = (fine.envelope_rate - coarse.envelope_rate).abs() / coarse.envelope_rate.abs();
    let passed = zero_max <= 1e-12
        && coarse.envelope_ok
        && fine.envelope_ok
        && change <= 0.1
        && linear <= 0.05;
    report(
        8,
        "uniqueness/stability",
        passed,
        &format!(
            "Φ(δ₀ = 0) ≤ {zero_max:.1e} (≤ 1e-12), Λ = {:.5} (n = {}) vs {:.5} (n = {}), change {change:.1e} (≤ 0.1), linear response gap {linear:.1e} (≤ 0.05)",
            coarse.envelope_rate, coarse.n_points, fine.envelope_rate, fine.n_points
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_09_flocking() {
    let traj = compact_force();
    assert!(traj.config.alpha != 1.0);
    let end = traj.config.force.support_end().unwrap();
    let f = flocking_study(traj, end, 1.25).unwrap();
    let d: Vec<String> = f.cauchy.iter().map(|c| format!("{:.2e}", c.2)).collect();
    let passed = f.rate_negative() && f.cauchy_decreasing() && f.cauchy.len() >= 3;
    report(
        9,
        "flocking",
        passed,
        &format!(
            "‖u′‖∞ rate {:.4} (< 0) after t = {end}, dyadic Cauchy distances [{}]",
            f.u_prime_rate,
            d.join(", ")
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_10_determinism_and_formats() {
    let traj = smooth_decay();
    let mut exact = true;
    for s in [traj.first(), traj.last()] {
        let back = decode_snapshot(&encode_snapshot(&s.state).unwrap())
            .unwrap()
            .state;
        exact &= bits(&back) == bits(&s.state) && back.t.to_bits() == s.state.t.to_bits();
    }
    let mut cfg = scenario("smooth-decay");
    cfg.name = "determinism".into();
    cfg.n_points = 64;
    cfg.t_end = 0.5;
    cfg.initial = "random".into();
    cfg.random_modes = 6;
    cfg.rho_amp = 0.2;
    cfg.seed = 42;
    cfg.checks = vec!["conservation".into(), "energy".into(), "budget".into()];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let files = ["diagnostics.csv", "budget.csv", "besov.csv"];
    let outputs: Vec<Vec<Vec<u8>>> = dirs
        .iter()
        .map(|d| {
            let r = run_config(&cfg, d.path()).unwrap();
            files
                .iter()
                .map(|f| std::fs::read(r.output_dir.join(f)).unwrap())
                .collect()
        })
        .collect();
    let identical = outputs[0] == outputs[1];
    let passed = exact && identical;
    report(
        10,
        "determinism and formats",
        passed,
        &format!(
            "snapshot round trip bit-exact: {exact}, repeated run CSVs bit-identical: {identical}"
        ),
    );
    assert!(passed);
}

fn bits(s: &State) -> Vec<u64> {
    s.u.samples()
        .iter()
        .chain(s.rho.samples())
        .map(|v| v.to_bits())
        .collect()
}
