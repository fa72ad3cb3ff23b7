//! Coagulation, collision and breakup kernels, their truncations, and
//! sampling-based admissibility checks.

mod admissibility;
mod breakup;
mod coagulation;
mod collision;
mod tabulated;
mod truncation;

pub use admissibility::{
    check_admissibility, Assumption, AssumptionCheck, AdmissibilityReport, SamplePlan, UniquenessWeights, Witness,
};
pub use breakup::{BreakupFamily, BreakupKernel, DaughterProfile, ProfileSpec};
pub use coagulation::{CoagulationFamily, CoagulationKernel, GrowthBound};
pub use collision::{CollisionFamily, CollisionKernel};
pub use tabulated::{TableSpec, TabulatedKernel};
pub use truncation::{truncate, TruncatedKernelPair};

use crate::error::{domain, Result};

fn check_masses(x: f64, y: f64) -> Result<()> {
    if x > 0.0 && y > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("kernel arguments must be positive masses, got ({x}, {y})")))
    }
}
