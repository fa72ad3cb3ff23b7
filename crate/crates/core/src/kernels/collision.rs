use serde::{Deserialize, Serialize};

use super::{check_masses, TabulatedKernel};
use crate::error::{config, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CollisionFamily {
    /// `C = 0`.
    Zero,
    /// `C = k2`.
    Constant,
    /// `C = k2 (1 + x)^alpha (1 + y)^alpha`.
    ProductBounded,
    /// Tabulated values; `k2` and `alpha` are the declared bound constants.
    Custom { table: TabulatedKernel },
}

/// Collision kernel together with the constants `(k2, alpha)` of the bound
/// `C(x, y) <= k2 (1 + x)^alpha (1 + y)^alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionKernel {
    #[serde(flatten)]
    pub family: CollisionFamily,
    pub k2: f64,
    pub alpha: f64,
}

impl CollisionKernel {
    pub fn new(family: CollisionFamily, k2: f64, alpha: f64) -> Result<Self> {
        let kernel = Self { family, k2, alpha };
        kernel.validate()?;
        Ok(kernel)
    }

    pub fn zero() -> Self {
        Self { family: CollisionFamily::Zero, k2: 0.0, alpha: 0.0 }
    }

    pub fn constant(k2: f64) -> Result<Self> {
        Self::new(CollisionFamily::Constant, k2, 0.0)
    }

    pub fn product_bounded(k2: f64, alpha: f64) -> Result<Self> {
        Self::new(CollisionFamily::ProductBounded, k2, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k2.is_finite() && self.k2 >= 0.0) {
            return Err(config(format!("collision constant k2 must be finite and nonnegative, got {}", self.k2)));
        }
        if !self.alpha.is_finite() {
            return Err(config("collision exponent alpha must be finite"));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        match self.family {
            CollisionFamily::Zero => true,
            CollisionFamily::Constant | CollisionFamily::ProductBounded => self.k2 == 0.0,
            CollisionFamily::Custom { ref table } => table.values().iter().flatten().all(|&v| v == 0.0),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        check_masses(x, y)?;
        Ok(self.value(x, y))
    }

    pub(crate) fn value(&self, x: f64, y: f64) -> f64 {
        match &self.family {
            CollisionFamily::Zero => 0.0,
            CollisionFamily::Constant => self.k2,
            CollisionFamily::ProductBounded => self.k2 * ((1.0 + x) * (1.0 + y)).powf(self.alpha),
            CollisionFamily::Custom { table } => table.value(x, y),
        }
    }

    /// Right-hand side of the declared bound at `(x, y)`.
    pub fn bound_at(&self, x: f64, y: f64) -> f64 {
        self.k2 * (1.0 + x).powf(self.alpha) * (1.0 + y).powf(self.alpha)
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            CollisionFamily::Zero => "zero",
            CollisionFamily::Constant => "constant",
            CollisionFamily::ProductBounded => "product_bounded",
            CollisionFamily::Custom { .. } => "custom",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn family_values() {
        assert_eq!(CollisionKernel::zero().eval(3.0, 4.0).unwrap(), 0.0);
        assert_eq!(CollisionKernel::constant(1.0).unwrap().eval(3.0, 4.0).unwrap(), 1.0);
        let pb = CollisionKernel::product_bounded(1.0, 1.0).unwrap();
        assert_relative_eq!(pb.eval(1.0, 2.0).unwrap(), 6.0, max_relative = 1e-15);
    }

    #[test]
    fn rejects_negative_prefactor() {
        assert!(CollisionKernel::constant(-0.1).is_err());
        assert!(CollisionKernel::zero().eval(0.0, 1.0).is_err());
    }

    #[test]
    fn serde_shape() {
        let c = CollisionKernel::constant(0.1).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"family":"constant","k2":0.1,"alpha":0.0}"#);
        assert_eq!(serde_json::from_str::<CollisionKernel>(&json).unwrap(), c);
    }
}
