//! Closed-form initial densities.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Zero,
    /// `g0(x) = (number / mean) exp(-x / mean)`: `M_0 = number`, `M_1 = number * mean`.
    Exponential { number: f64, mean: f64 },
    /// Gaussian bump in `x` with total number `number` (before cutting at `x = 0`).
    Gaussian { number: f64, center: f64, width: f64 },
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Zero => Ok(()),
            Self::Exponential { number, mean } => {
                if number >= 0.0 && number.is_finite() && mean > 0.0 && mean.is_finite() {
                    Ok(())
                } else {
                    Err(config("exponential initial condition needs number >= 0 and mean > 0"))
                }
            }
            Self::Gaussian { number, center, width } => {
                if number >= 0.0 && number.is_finite() && center.is_finite() && width > 0.0 && width.is_finite() {
                    Ok(())
                } else {
                    Err(config("gaussian initial condition needs number >= 0 and width > 0"))
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Exponential { number, mean } => number / mean * (-x / mean).exp(),
            Self::Gaussian { number, center, width } => {
                let z = (x - center) / width;
                number / (width * (2.0 * std::f64::consts::PI).sqrt()) * (-0.5 * z * z).exp()
            }
        }
    }

    /// Same shape with the total number multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Self::Zero => Self::Zero,
            Self::Exponential { number, mean } => Self::Exponential { number: number * factor, mean },
            Self::Gaussian { number, center, width } => Self::Gaussian { number: number * factor, center, width },
        }
    }
}
