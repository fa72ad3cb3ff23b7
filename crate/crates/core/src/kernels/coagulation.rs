use serde::{Deserialize, Serialize};

use super::{check_masses, TabulatedKernel};
use crate::error::{config, Result};

/// Declared constants `(k1, mu, sigma)` of the growth bound
/// `K(x, y) <= k1 (1 + x + y)^mu / (x y)^sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthBound {
    pub k1: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl GrowthBound {
    pub fn new(k1: f64, mu: f64, sigma: f64) -> Self {
        Self { k1, mu, sigma }
    }

    /// Right-hand side of the bound at `(x, y)`.
    pub fn at(&self, x: f64, y: f64) -> f64 {
        self.k1 * (1.0 + x + y).powf(self.mu) / (x * y).powf(self.sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CoagulationFamily {
    /// `K = k`.
    Constant,
    /// `K = k (x^(1/3) + y^(1/3)) (x^(-1/3) + y^(-1/3))`.
    BrownianContinuum,
    /// `K = k (x^(1/3) + y^(1/3))^2 sqrt(1/x + 1/y)`.
    BrownianFreeMolecular,
    /// `K = k (x + y)^a / (x y)^b` with `a - b` in `[0, 1]`, `b` in `[0, 1)`.
    Granulation { a: f64, b: f64 },
    /// `K = k * table(x, y)`.
    Custom { table: TabulatedKernel },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoagulationKernel {
    #[serde(flatten)]
    pub family: CoagulationFamily,
    pub k: f64,
    pub bound: GrowthBound,
}

impl CoagulationKernel {
    pub fn new(family: CoagulationFamily, k: f64, bound: GrowthBound) -> Result<Self> {
        let kernel = Self { family, k, bound };
        kernel.validate()?;
        Ok(kernel)
    }

    pub fn constant(k: f64) -> Result<Self> {
        Self::new(CoagulationFamily::Constant, k, GrowthBound::new(k.max(f64::MIN_POSITIVE), 0.0, 0.0))
    }

    pub fn granulation(k: f64, a: f64, b: f64, bound: GrowthBound) -> Result<Self> {
        Self::new(CoagulationFamily::Granulation { a, b }, k, bound)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(config(format!("coagulation prefactor k must be finite and nonnegative, got {}", self.k)));
        }
        if let CoagulationFamily::Granulation { a, b } = self.family {
            if !(0.0..1.0).contains(&b) {
                return Err(config(format!("granulation exponent b must lie in [0, 1), got {b}")));
            }
            let d = a - b;
            if !(0.0..=1.0).contains(&d) {
                return Err(config(format!("granulation exponents need a - b in [0, 1], got {d}")));
            }
        }
        let GrowthBound { k1, mu, sigma } = self.bound;
        if !(k1.is_finite() && mu.is_finite() && sigma.is_finite()) {
            return Err(config("coagulation bound constants must be finite"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        check_masses(x, y)?;
        Ok(self.value(x, y))
    }

    pub(crate) fn value(&self, x: f64, y: f64) -> f64 {
        let k = self.k;
        match &self.family {
            CoagulationFamily::Constant => k,
            CoagulationFamily::BrownianContinuum => {
                let (cx, cy) = (x.cbrt(), y.cbrt());
                k * (cx + cy) * (1.0 / cx + 1.0 / cy)
            }
            CoagulationFamily::BrownianFreeMolecular => {
                let s = x.cbrt() + y.cbrt();
                k * s * s * (1.0 / x + 1.0 / y).sqrt()
            }
            CoagulationFamily::Granulation { a, b } => k * (x + y).powf(*a) / (x * y).powf(*b),
            CoagulationFamily::Custom { table } => k * table.value(x, y),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            CoagulationFamily::Constant => "constant",
            CoagulationFamily::BrownianContinuum => "brownian_continuum",
            CoagulationFamily::BrownianFreeMolecular => "brownian_free_molecular",
            CoagulationFamily::Granulation { .. } => "granulation",
            CoagulationFamily::Custom { .. } => "custom",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::assert_relative_eq;

    fn unit_bound() -> GrowthBound {
        GrowthBound::new(1.0, 1.0, 0.5)
    }

    #[test]
    fn family_values() {
        let bc = CoagulationKernel::new(CoagulationFamily::BrownianContinuum, 1.0, unit_bound()).unwrap();
        assert_relative_eq!(bc.eval(1.0, 1.0).unwrap(), 4.0, max_relative = 1e-15);
        let gr = CoagulationKernel::granulation(1.0, 1.0, 0.5, unit_bound()).unwrap();
        assert_relative_eq!(gr.eval(1.0, 4.0).unwrap(), 2.5, max_relative = 1e-15);
        let c = CoagulationKernel::constant(7.0).unwrap();
        assert_eq!(c.eval(0.3, 1e4).unwrap(), 7.0);
        let fm = CoagulationKernel::new(CoagulationFamily::BrownianFreeMolecular, 1.0, unit_bound()).unwrap();
        assert_relative_eq!(fm.eval(1.0, 1.0).unwrap(), 4.0 * 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn rejects_nonpositive_mass() {
        let c = CoagulationKernel::constant(1.0).unwrap();
        assert!(matches!(c.eval(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(c.eval(1.0, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn granulation_exponent_constraints() {
        assert!(CoagulationKernel::granulation(1.0, 2.0, 0.5, unit_bound()).is_err());
        assert!(CoagulationKernel::granulation(1.0, 0.5, 1.0, unit_bound()).is_err());
        assert!(CoagulationKernel::granulation(1.0, 0.2, 0.5, unit_bound()).is_err());
        assert!(CoagulationKernel::granulation(1.0, 1.5, 0.5, unit_bound()).is_ok());
    }

    #[test]
    fn serde_shape() {
        let gr = CoagulationKernel::granulation(1.0, 1.0, 0.5, unit_bound()).unwrap();
        let json = serde_json::to_string(&gr).unwrap();
        assert_eq!(json, r#"{"family":"granulation","a":1.0,"b":0.5,"k":1.0,"bound":{"k1":1.0,"mu":1.0,"sigma":0.5}}"#);
        let back: CoagulationKernel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, gr);
    }
}
