//! Sectional solver and verification tools for continuous coagulation with
//! collision-induced multiple fragmentation.

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod analysis;
pub mod error;
pub mod grid;
pub mod initial;
pub mod kernels;
pub mod moments;
pub mod quadrature;
pub mod solver;

pub use analysis::{
    contraction_check, gronwall_constant_psi, mass_conservation_report, oracle_constant_kernel_m0, oracle_dense_ode,
    truncation_convergence, uniqueness_distance, weighted_norm, AnalysisConfig, ContractionReport, ConvergenceReport,
    DistanceSeries, MassReport,
};
pub use error::{Error, Result};
pub use grid::{project_initial_condition, GridSpec, MassGrid};
pub use initial::InitialCondition;
pub use kernels::{
    check_admissibility, truncate, AdmissibilityReport, Assumption, BreakupKernel, CoagulationKernel, CollisionKernel,
    GrowthBound, SamplePlan, TruncatedKernelPair,
};
pub use moments::{moment, moment_of, EnvelopeParams, Envelopes};
pub use solver::{AbortedRun, PositivityMode, Solver, SolverConfig, State, Trajectory};
