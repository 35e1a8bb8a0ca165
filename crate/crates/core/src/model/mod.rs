//! The Euler alignment dynamics: state, forcing, right-hand side, time
//! stepping, initial data and snapshot persistence.

mod force;
mod initial;
mod integrator;
mod rhs;
mod snapshot;
mod state;

pub use force::{ForceSpec, TrigTerm};
pub use initial::{mollify, rough_initial_data, InitialData};
pub use integrator::{evolve, evolve_from, stable_dt, step, SimConfig, Snapshot, Trajectory};
pub use rhs::{rhs, rhs_e_form, Tendency};
pub use snapshot::{
    decode_snapshot, encode_snapshot, load_snapshot, save_snapshot, SnapshotFile,
    SNAPSHOT_HEADER_BYTES, SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
};
pub use state::{compute_derived, remove_nyquist, DerivedFields, State, VACUUM_THRESHOLD};
