//! Approximate quantum states built from randomized single-qubit measurements,
//! with estimators, error seminorms, a Pauli-sampling baseline and a
//! measurement-guided circuit optimizer.

pub mod error;
pub mod estimation;
pub mod linalg;
pub mod optimizer;
pub mod pauli;
pub mod pauli_baseline;
pub mod rng;
pub mod seminorm;
pub mod simplex;
pub mod snapshot;
pub mod statevector;

pub use error::{Error, Result};
pub use estimation::{approx_fidelity, estimate, reconstruct_density, EstimateReport};
pub use optimizer::{
    heisenberg_transform, minimize_over_params, objective, run_protocol, Generator, Layer, OptimizerTrace,
    ParametricCircuit, ProtocolOptions,
};
pub use pauli::{Letter, PauliMonomial, PauliObservable, Phase};
pub use pauli_baseline::{pauli_estimate, PauliShotPlan, Sampler};
pub use rng::RngStream;
pub use seminorm::{seminorm_full, seminorm_one, seminorm_two, SeminormReport};
pub use snapshot::{build_snapshot_set, Direction, Snapshot, SnapshotSet};
pub use statevector::{prepare, StateKind, Statevector};
