use serde::{Deserialize, Serialize};

use super::{check_masses, CoagulationKernel, CollisionKernel};
use crate::error::{config, Result};

/// Kernels cut off outside the square `[1/n, n)²`.
///
/// Inside the square both kernels equal their base kernels; outside they are
/// zero, so `0 <= K_n <= K` and `0 <= C_n <= C` everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedKernelPair {
    pub coagulation: CoagulationKernel,
    pub collision: CollisionKernel,
    pub n: u32,
}

pub fn truncate(coagulation: CoagulationKernel, collision: CollisionKernel, n: u32) -> Result<TruncatedKernelPair> {
    if n == 0 {
        return Err(config("truncation index n must be at least 1"));
    }
    Ok(TruncatedKernelPair { coagulation, collision, n })
}

impl TruncatedKernelPair {
    pub fn lower(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn upper(&self) -> f64 {
        self.n as f64
    }

    pub fn in_support(&self, x: f64, y: f64) -> bool {
        let (lo, hi) = (self.lower(), self.upper());
        lo <= x && x < hi && lo <= y && y < hi
    }

    pub fn eval_k(&self, x: f64, y: f64) -> Result<f64> {
        check_masses(x, y)?;
        Ok(self.k_value(x, y))
    }

    pub fn eval_c(&self, x: f64, y: f64) -> Result<f64> {
        check_masses(x, y)?;
        Ok(self.c_value(x, y))
    }

    pub(crate) fn k_value(&self, x: f64, y: f64) -> f64 {
        if self.in_support(x, y) {
            self.coagulation.value(x, y)
        } else {
            0.0
        }
    }

    pub(crate) fn c_value(&self, x: f64, y: f64) -> f64 {
        if self.in_support(x, y) {
            self.collision.value(x, y)
        } else {
            0.0
        }
    }
}
