use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::limits::{mollification_convergence, refined, uniqueness_gronwall};
use super::output::{publish_dir, write_atomic, CONFIG_FILE, SNAPSHOT_DIR, SUMMARY_FILE};
use crate::diagnostics::energy::{energy_residual_from_records, rho_energy_residual_from_records};
use crate::diagnostics::{
    alignment_decay, check_linfty_bounds, check_q_bound, compute_records,
    dissipation_double_integral, flocking_study, holder_scaling_study, residual_refinement,
    rho_dissipation_double_integral, write_records_csv, BoundConstants, BoundKind,
    DiagnosticsRecord, HolderField, RecordOptions,
};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::model::{encode_snapshot, evolve, ForceSpec, SimConfig, Trajectory};
use crate::onsager::{default_q_list, energy_budget, onsager_convergence_study, write_besov_csv};

/// Residuals at or below this are roundoff; no convergence order is fitted.
const ROUNDOFF: f64 = 1e-11;
const UNIQUENESS_SAMPLES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    /// How `measured` is compared with `tolerance`: `"<="`, `">="` or `"<"`.
    pub comparison: String,
    #[serde(default)]
    pub details: BTreeMap<String, f64>,
}

impl CheckOutcome {
    fn new(name: &str, measured: f64, comparison: &str, tolerance: f64) -> Self {
        let passed = match comparison {
            "<=" => measured <= tolerance,
            ">=" => measured >= tolerance,
            "<" => measured < tolerance,
            _ => unreachable!("unknown comparison {comparison}"),
        };
        CheckOutcome {
            name: name.to_string(),
            passed,
            measured,
            tolerance,
            comparison: comparison.to_string(),
            details: BTreeMap::new(),
        }
    }

    fn detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    /// Fails the check if `ok` is false (keeps it failed otherwise).
    fn require(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }

    fn failed(name: &str, err: &Error) -> Self {
        let mut c = CheckOutcome::new(name, f64::NAN, "<=", 0.0);
        c.passed = false;
        c.details.insert(format!("error: {err}"), f64::NAN);
        c
    }
}

/// Everything a run left on disk plus its verdicts. Paths are relative to
/// `output_dir`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub config: ScenarioConfig,
    pub output_dir: PathBuf,
    pub steps: usize,
    pub snapshot_count: usize,
    pub snapshot_files: Vec<PathBuf>,
    pub diagnostics_csv: PathBuf,
    pub budget_csv: Option<PathBuf>,
    pub besov_csv: Option<PathBuf>,
    pub extra_csv: Vec<PathBuf>,
    pub checks: Vec<CheckOutcome>,
}

impl ScenarioResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Loads a scenario file and runs it under `output_root/<name>/`.
pub fn run(config_path: impl AsRef<Path>, output_root: impl AsRef<Path>) -> Result<ScenarioResult> {
    let cfg = ScenarioConfig::load(config_path)?;
    run_config(&cfg, output_root)
}

struct Artifacts {
    files: Vec<(PathBuf, Vec<u8>)>,
    budget_csv: Option<PathBuf>,
    besov_csv: Option<PathBuf>,
    extra_csv: Vec<PathBuf>,
}

impl Artifacts {
    fn add(&mut self, name: &str, bytes: Vec<u8>) -> PathBuf {
        let p = PathBuf::from(name);
        self.files.push((p.clone(), bytes));
        p
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    buf
}

pub fn run_config(cfg: &ScenarioConfig, output_root: impl AsRef<Path>) -> Result<ScenarioResult> {
    cfg.validate()?;
    let sim = cfg.sim_config()?;
    let traj = evolve(&sim)?;
    let force = sim.force.clone();
    let kernel = KernelSpec::new(cfg.alpha)?;
    let records = compute_records(
        &traj.snapshots,
        &force,
        &RecordOptions {
            holder_gammas: cfg.holder_gammas.clone(),
        },
    )?;

    let mut art = Artifacts {
        files: Vec::new(),
        budget_csv: None,
        besov_csv: None,
        extra_csv: Vec::new(),
    };
    let mut checks = Vec::new();
    let mut seen: Vec<&str> = Vec::new();
    for name in &cfg.checks {
        if seen.contains(&name.as_str()) {
            continue;
        }
        seen.push(name);
        let ctx = Ctx {
            cfg,
            sim: &sim,
            traj: &traj,
            force: &force,
            kernel: &kernel,
            records: &records,
        };
        let outcome = match name.as_str() {
            "conservation" => Ok(ctx.conservation()),
            "compatibility" => ctx.compatibility(),
            "energy" => ctx.energy(),
            "bounds" => ctx.bounds(),
            "regularity" => Ok(ctx.regularity()),
            "alignment" => ctx.alignment(),
            "budget" => ctx.budget(&mut art),
            "holder" => ctx.holder(),
            "flocking" => ctx.flocking(),
            "mollification" => ctx.mollification(&mut art),
            "uniqueness" => ctx.uniqueness(&mut art),
            other => Err(Error::Config(format!("unknown check {other:?}"))),
        };
        checks.push(match outcome {
            Ok(c) => c,
            Err(e @ Error::Config(_)) => return Err(e),
            Err(e) => CheckOutcome::failed(name, &e),
        });
    }

    let diagnostics_csv = art.add(
        "diagnostics.csv",
        csv_bytes(|b| write_records_csv(b, &records)),
    );
    let picked = pick_snapshots(traj.snapshots.len(), cfg.snapshot_files);
    let mut snapshot_files = Vec::new();
    for &i in &picked {
        let name = format!("{SNAPSHOT_DIR}/snap_{i:06}.bin");
        snapshot_files.push(art.add(&name, encode_snapshot(&traj.snapshots[i].state)?));
    }
    art.add(CONFIG_FILE, cfg.to_toml_string().into_bytes());

    let root = output_root.as_ref();
    let dest = root.join(&cfg.name);
    let result = ScenarioResult {
        name: cfg.name.clone(),
        config: cfg.clone(),
        output_dir: dest.clone(),
        steps: traj.steps,
        snapshot_count: traj.snapshots.len(),
        snapshot_files,
        diagnostics_csv,
        budget_csv: art.budget_csv.clone(),
        besov_csv: art.besov_csv.clone(),
        extra_csv: art.extra_csv.clone(),
        checks,
    };
    let summary = serde_json::to_vec_pretty(&result).map_err(|e| Error::Format(e.to_string()))?;
    art.add(SUMMARY_FILE, summary);

    let staging = root.join(format!(".{}.partial", cfg.name));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    for (rel, bytes) in &art.files {
        let path = staging.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        write_atomic(&path, bytes)?;
    }
    publish_dir(&staging, &dest)?;
    Ok(result)
}

/// `count` indices spread evenly over `0..len` (first and last included);
/// `count = 0` keeps all of them.
fn pick_snapshots(len: usize, count: usize) -> Vec<usize> {
    if count == 0 || count >= len {
        return (0..len).collect();
    }
    if count == 1 {
        return vec![len - 1];
    }
    let mut v: Vec<usize> = (0..count).map(|k| k * (len - 1) / (count - 1)).collect();
    v.dedup();
    v
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    sim: &'a SimConfig,
    traj: &'a Trajectory,
    force: &'a ForceSpec,
    kernel: &'a KernelSpec,
    records: &'a [DiagnosticsRecord],
}

fn drift(series: impl Iterator<Item = f64>, first: f64, scale: f64) -> f64 {
    series.fold(0.0_f64, |m, v| m.max((v - first).abs())) / scale
}

impl Ctx<'_> {
    fn conservation(&self) -> CheckOutcome {
        let r = self.records;
        let m0 = r[0].mass;
        let mass = drift(r.iter().map(|x| x.mass), m0, m0);
        let e = drift(
            r.iter().map(|x| x.e_integral),
            r[0].e_integral,
            r[0].e_integral.abs().max(1.0),
        );
        let tol = self.cfg.conservation_tol;
        let mut c = CheckOutcome::new("conservation", mass, "<=", tol)
            .detail("e_integral_drift", e)
            .detail("e_integral_tol", self.cfg.e_integral_tol)
            .require(e <= self.cfg.e_integral_tol);
        if self.force.is_zero() {
            let p = drift(
                r.iter().map(|x| x.momentum),
                r[0].momentum,
                r[0].momentum.abs().max(1.0),
            );
            c = c.detail("momentum_drift", p).require(p <= tol);
        }
        c
    }

    fn compatibility(&self) -> Result<CheckOutcome> {
        let mut worst: f64 = 0.0;
        for s in &self.traj.snapshots {
            let evolved = s
                .state
                .evolved_e
                .as_ref()
                .ok_or_else(|| Error::Invalid("run did not evolve e".into()))?;
            let scale = s.derived.e.sup_norm().max(1.0);
            worst = worst.max(evolved.max_abs_diff(&s.derived.e) / scale);
        }
        Ok(CheckOutcome::new(
            "compatibility",
            worst,
            "<=",
            self.cfg.compatibility_tol,
        ))
    }

    fn energy(&self) -> Result<CheckOutcome> {
        let e = energy_residual_from_records(self.records, 0.5);
        let r = rho_energy_residual_from_records(self.records);
        let worst = e.max_relative.max(r.max_relative);
        let mut c = CheckOutcome::new("energy", worst, "<=", self.cfg.energy_tol)
            .detail("energy_residual", e.max_relative)
            .detail("rho_energy_residual", r.max_relative)
            .detail("energy_residual_unit_weight", e.max_relative_unit_weight)
            .detail(
                "rho_energy_residual_unit_weight",
                r.max_relative_unit_weight,
            );
        if worst > ROUNDOFF {
            let refinement = residual_refinement(self.traj, self.force, &self.cfg.energy_strides)?;
            let order = refinement.min_order();
            c = c
                .detail("min_order", order)
                .detail("min_order_required", self.cfg.energy_min_order)
                .require(order >= self.cfg.energy_min_order);
        }
        let snaps = &self.traj.snapshots;
        let every = self.cfg.dissipation_every;
        let idx: Vec<usize> = if every == 0 {
            vec![0, snaps.len() - 1]
        } else {
            (0..snaps.len()).step_by(every).collect()
        };
        let mut gap: f64 = 0.0;
        for &i in &idx {
            let s = &snaps[i].state;
            let rec = &self.records[i];
            for (dbl, spec) in [
                (
                    dissipation_double_integral(s, self.kernel)?,
                    rec.dissipation,
                ),
                (
                    rho_dissipation_double_integral(s, self.kernel)?,
                    rec.rho_dissipation,
                ),
            ] {
                let scale = spec.abs().max(dbl.abs());
                if scale > 1e-13 {
                    gap = gap.max((dbl - spec).abs() / scale);
                }
            }
        }
        Ok(c.detail("dissipation_gap", gap)
            .detail("dissipation_tol", self.cfg.dissipation_tol)
            .require(gap <= self.cfg.dissipation_tol))
    }

    fn bounds(&self) -> Result<CheckOutcome> {
        let k = BoundConstants::from_initial(self.traj.first(), self.force, self.kernel)?;
        let linf = check_linfty_bounds(self.traj, &k);
        let q = check_q_bound(self.traj, self.force, &k);
        let violations = linf.violations.len() + q.transport_violations + q.exponential_violations;
        let mut c = CheckOutcome::new("bounds", violations as f64, "<=", 0.0)
            .detail("checked", linf.checked as f64)
            .detail("c0", k.c0)
            .detail("c1", k.c1)
            .detail("c2", k.c2)
            .detail("c3", k.c3)
            .detail("c4", k.c4)
            .detail("iota_pi", k.iota_pi)
            .detail("r0", k.r0)
            .detail("q_transport_violations", q.transport_violations as f64)
            .detail("q_exponential_violations", q.exponential_violations as f64);
        for (kind, ratio) in &linf.worst_ratio {
            let key = match kind {
                BoundKind::Velocity => "worst_ratio_velocity",
                BoundKind::DensityLower => "worst_ratio_density_lower",
                BoundKind::DensityUpper => "worst_ratio_density_upper",
                BoundKind::Q => "worst_ratio_q",
                BoundKind::E => "worst_ratio_e",
            };
            c = c.detail(key, *ratio);
        }
        Ok(c)
    }

    fn regularity(&self) -> CheckOutcome {
        let growth = |f: fn(&DiagnosticsRecord) -> f64| {
            let start = f(&self.records[0]);
            let peak = self.records.iter().map(f).fold(0.0_f64, f64::max);
            if peak == 0.0 {
                0.0
            } else {
                peak / start.max(1e-300)
            }
        };
        let rho = growth(|r| r.rho_prime_inf_norm);
        let e = growth(|r| r.e_prime_inf_norm);
        let finite = self
            .records
            .iter()
            .all(|r| r.rho_prime_inf_norm.is_finite() && r.e_prime_inf_norm.is_finite());
        CheckOutcome::new("regularity", rho.max(e), "<=", self.cfg.regularity_growth)
            .detail("rho_prime_growth", rho)
            .detail("e_prime_growth", e)
            .require(finite)
    }

    fn alignment(&self) -> Result<CheckOutcome> {
        let a = alignment_decay(self.traj, self.kernel)?;
        let mut c = CheckOutcome::new("alignment", a.worst_envelope_ratio, "<=", 1.0 + 1e-6)
            .detail("rate_bound", a.rate_bound)
            .detail("window_start", a.window_start)
            .require(a.envelope_ok && a.fitted_rate_ok());
        if let Some(r) = a.fitted_rate {
            c = c.detail("fitted_rate", r);
        }
        Ok(c)
    }

    fn budget(&self, art: &mut Artifacts) -> Result<CheckOutcome> {
        let q_list: Vec<i32> = match self.cfg.budget_q_max {
            Some(m) => (0..=m).collect(),
            None => default_q_list(&self.traj.first().state),
        };
        let report = energy_budget(self.traj, self.force, &q_list, false)?;
        let conv = onsager_convergence_study(&report, self.traj);
        let worst = report
            .relative_residuals()
            .iter()
            .fold(0.0_f64, |m, r| m.max(r.1));
        art.budget_csv = Some(art.add("budget.csv", csv_bytes(|b| report.write_csv(b))));
        art.besov_csv = Some(art.add("besov.csv", csv_bytes(|b| write_besov_csv(b, &conv.besov))));
        let mut c = CheckOutcome::new("budget", worst, "<=", self.cfg.budget_tol)
            .detail("flux_decay_factor", conv.flux_decay_factor)
            .detail("eps_decay_factor", conv.eps_decay_factor)
            .detail("decay_factor_required", self.cfg.budget_decay_factor)
            .detail("q_min", *q_list.first().unwrap_or(&0) as f64)
            .detail("q_max", *q_list.last().unwrap_or(&0) as f64)
            .require(conv.passed(self.cfg.budget_decay_factor));
        if let Some(s) = conv.flux_slope {
            c = c.detail("flux_log2_slope", s);
        }
        Ok(c)
    }

    fn holder(&self) -> Result<CheckOutcome> {
        let mut margin = f64::INFINITY;
        let mut details = BTreeMap::new();
        let mut u_ok = true;
        for &g in &self.cfg.holder_gammas {
            for (field, label) in [(HolderField::Rho, "rho"), (HolderField::U, "u")] {
                let r = holder_scaling_study(
                    self.traj,
                    g,
                    field,
                    self.cfg.holder_t_max,
                    self.cfg.holder_tol,
                )?;
                details.insert(format!("slope_{label}_{g}"), r.slope);
                details.insert(format!("envelope_slope_{g}"), r.envelope_slope);
                details.insert(
                    format!("envelope_constant_{label}_{g}"),
                    r.envelope_constant,
                );
                match field {
                    HolderField::Rho => margin = margin.min(r.slope - r.envelope_slope),
                    HolderField::U => u_ok &= r.slope_ok(),
                }
            }
        }
        let mut c = CheckOutcome::new("holder", margin, ">=", -self.cfg.holder_tol);
        c.details = details;
        Ok(c.detail("u_slopes_ok", if u_ok { 1.0 } else { 0.0 }))
    }

    fn flocking(&self) -> Result<CheckOutcome> {
        let start = if self.cfg.flocking_fit_start > 0.0 {
            self.cfg.flocking_fit_start
        } else {
            self.force.support_end().unwrap_or(0.0)
        };
        let f = flocking_study(self.traj, start, self.cfg.flocking_pair_base)?;
        let mut c = CheckOutcome::new("flocking", f.u_prime_rate, "<", 0.0)
            .detail("u_bar", f.u_bar)
            .detail("fit_start", f.fit_start)
            .detail(
                "cauchy_decreasing",
                if f.cauchy_decreasing() { 1.0 } else { 0.0 },
            )
            .require(f.cauchy_decreasing());
        for (t1, t2, d) in &f.cauchy {
            c = c.detail(format!("cauchy_{t1}_{t2}"), *d);
        }
        Ok(c)
    }

    fn mollification(&self, art: &mut Artifacts) -> Result<CheckOutcome> {
        let times = if self.cfg.mollification_times.is_empty() {
            vec![self.sim.t_end]
        } else {
            self.cfg.mollification_times.clone()
        };
        let r = mollification_convergence(self.sim, &self.cfg.mollification_eps, &times)?;
        let mut csv = String::from("t,eps_a,eps_b,u_distance,rho_distance\n");
        for (i, t) in r.times.iter().enumerate() {
            for j in 0..r.eps.len() - 1 {
                csv.push_str(&format!(
                    "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    r.eps[j],
                    r.eps[j + 1],
                    r.u_distances[i][j],
                    r.rho_distances[i][j]
                ));
            }
        }
        let p = art.add("mollification.csv", csv.into_bytes());
        art.extra_csv.push(p);
        let last = r.times.len() - 1;
        let halving = |d: &[Vec<f64>]| {
            d[1..]
                .iter()
                .flat_map(|row| row.windows(2).map(|w| w[0] / w[1]))
                .fold(f64::INFINITY, f64::min)
        };
        Ok(CheckOutcome::new("mollification", r.worst_ratio, "<", 1.0)
            .detail("u_distance_first_pair_t0", r.u_distances[0][0])
            .detail("u_distance_first_pair_final", r.u_distances[last][0])
            .detail("rho_distance_first_pair_t0", r.rho_distances[0][0])
            .detail("rho_distance_first_pair_final", r.rho_distances[last][0])
            .detail("u_min_halving_factor", halving(&r.u_distances))
            .detail("rho_min_halving_factor", halving(&r.rho_distances))
            .require(r.decreasing))
    }

    fn uniqueness(&self, art: &mut Artifacts) -> Result<CheckOutcome> {
        let deltas = &self.cfg.uniqueness_perturbations;
        let first = *deltas
            .first()
            .ok_or_else(|| Error::Config("uniqueness_perturbations must not be empty".into()))?;
        let zero = uniqueness_gronwall(self.sim, 0.0, UNIQUENESS_SAMPLES)?;
        let runs = deltas
            .iter()
            .map(|&d| uniqueness_gronwall(self.sim, d, UNIQUENESS_SAMPLES))
            .collect::<Result<Vec<_>>>()?;
        let fine = uniqueness_gronwall(&refined(self.sim)?, first, UNIQUENESS_SAMPLES)?;
        let zero_max = zero.phi.iter().fold(0.0_f64, |m, p| m.max(*p));
        let mut linear_gap: f64 = 0.0;
        if runs.len() >= 2 {
            for (a, b) in runs[0].ratios().iter().zip(runs[1].ratios()) {
                linear_gap = linear_gap.max((a - b).abs() / b.abs().max(1e-300));
            }
        }
        let coarse = runs[0].envelope_rate;
        let rate_change = (fine.envelope_rate - coarse).abs() / coarse.abs().max(1e-300);
        let mut csv = String::from("t");
        for r in runs.iter().chain([&fine]) {
            csv.push_str(&format!(",phi_n{}_delta{:e}", r.n_points, r.delta));
        }
        csv.push('\n');
        for (i, t) in runs[0].times.iter().enumerate() {
            csv.push_str(&format!("{t:.16e}"));
            for r in runs.iter().chain([&fine]) {
                csv.push_str(&format!(",{:.16e}", r.phi[i]));
            }
            csv.push('\n');
        }
        let p = art.add("uniqueness.csv", csv.into_bytes());
        art.extra_csv.push(p);
        let envelopes = runs.iter().chain([&fine]).all(|r| r.envelope_ok);
        let mut c = CheckOutcome::new(
            "uniqueness",
            rate_change,
            "<=",
            self.cfg.uniqueness_rate_tol,
        )
        .detail("zero_perturbation_phi_max", zero_max)
        .detail("linear_response_gap", linear_gap)
        .detail("linear_response_tol", self.cfg.uniqueness_linear_tol)
        .detail("envelope_rate", coarse)
        .detail("envelope_rate_refined", fine.envelope_rate)
        .require(zero_max <= 1e-12 && linear_gap <= self.cfg.uniqueness_linear_tol && envelopes);
        if let Some(s) = runs[0].fitted_slope {
            c = c.detail("fitted_log_slope", s);
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_picking() {
        assert_eq!(pick_snapshots(5, 0), vec![0, 1, 2, 3, 4]);
        assert_eq!(pick_snapshots(5, 9), vec![0, 1, 2, 3, 4]);
        assert_eq!(pick_snapshots(10, 2), vec![0, 9]);
        assert_eq!(pick_snapshots(10, 3), vec![0, 4, 9]);
        assert_eq!(pick_snapshots(10, 1), vec![9]);
    }

    #[test]
    fn outcome_comparisons() {
        assert!(CheckOutcome::new("a", 1.0, "<=", 1.0).passed);
        assert!(!CheckOutcome::new("a", 1.0, "<", 1.0).passed);
        assert!(CheckOutcome::new("a", 2.0, ">=", 1.0).passed);
        assert!(!CheckOutcome::new("a", f64::NAN, "<=", 1.0).passed);
        assert!(!CheckOutcome::new("a", 0.0, "<=", 1.0).require(false).passed);
    }

    proptest::proptest! {
        #[test]
        fn picked_snapshots_are_sorted_and_keep_ends(len in 1usize..200, count in 0usize..20) {
            let v = pick_snapshots(len, count);
            proptest::prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
            proptest::prop_assert_eq!(*v.last().unwrap(), len - 1);
            if count != 1 {
                proptest::prop_assert_eq!(v[0], 0);
            }
            if count > 0 {
                proptest::prop_assert!(v.len() <= count);
            }
        }
    }
}
