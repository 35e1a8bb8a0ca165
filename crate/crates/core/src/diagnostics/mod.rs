//! Scalar diagnostics per snapshot and checks over whole runs.

mod bounds;
pub(crate) mod energy;
mod record;
mod studies;

pub use bounds::{
    check_density_bounds, check_linfty_bounds, check_q_bound, BoundConstants, BoundKind,
    BoundReport, BoundViolation, QBoundReport,
};
pub use energy::{
    energy_residual, residual_refinement, rho_energy_residual, EnergyResidual, RefinementReport,
};
pub use record::{
    compute_record, compute_records, dissipation_double_integral, record_csv_header,
    rho_dissipation_double_integral, spectral_dissipation, spectral_rho_dissipation,
    write_records_csv, DiagnosticsRecord, RecordOptions,
};
pub use studies::{
    alignment_decay, flocking_study, holder_scaling_study, AlignmentReport, FlockingReport,
    HolderField, HolderReport,
};
