//! Symmetric two-argument kernels tabulated on a mass lattice.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub masses: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Values on a lattice of masses, interpolated bilinearly in `(ln x, ln y)`.
///
/// Queries outside the lattice are clamped to its boundary. Arguments are
/// sorted before interpolation so the result is bitwise symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableSpec", into = "TableSpec")]
pub struct TabulatedKernel {
    masses: Vec<f64>,
    log_masses: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl TabulatedKernel {
    pub fn new(masses: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = masses.len();
        if n < 2 {
            return Err(config("tabulated kernel needs at least two lattice masses"));
        }
        if masses.iter().any(|&m| !(m.is_finite() && m > 0.0)) {
            return Err(config("tabulated kernel masses must be positive and finite"));
        }
        if masses.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config("tabulated kernel masses must be strictly increasing"));
        }
        if values.len() != n || values.iter().any(|row| row.len() != n) {
            return Err(config(format!("tabulated kernel values must be a {n}x{n} table")));
        }
        for (i, row) in values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(config(format!("tabulated kernel value [{i}][{j}] = {v} is not finite and nonnegative")));
                }
                if v != values[j][i] {
                    return Err(config(format!("tabulated kernel is not symmetric at [{i}][{j}]")));
                }
            }
        }
        let log_masses = masses.iter().map(|m| m.ln()).collect();
        Ok(Self { masses, log_masses, values })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub(crate) fn value(&self, x: f64, y: f64) -> f64 {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let (i, s) = self.bracket(lo.ln());
        let (j, t) = self.bracket(hi.ln());
        let v = &self.values;
        (1.0 - s) * ((1.0 - t) * v[i][j] + t * v[i][j + 1]) + s * ((1.0 - t) * v[i + 1][j] + t * v[i + 1][j + 1])
    }

    fn bracket(&self, lx: f64) -> (usize, f64) {
        let lm = &self.log_masses;
        let last = lm.len() - 1;
        if lx <= lm[0] {
            return (0, 0.0);
        }
        if lx >= lm[last] {
            return (last - 1, 1.0);
        }
        let k = lm.partition_point(|&v| v <= lx) - 1;
        let k = k.min(last - 1);
        (k, (lx - lm[k]) / (lm[k + 1] - lm[k]))
    }
}

impl TryFrom<TableSpec> for TabulatedKernel {
    type Error = Error;

    fn try_from(spec: TableSpec) -> Result<Self> {
        TabulatedKernel::new(spec.masses, spec.values)
    }
}

impl From<TabulatedKernel> for TableSpec {
    fn from(t: TabulatedKernel) -> Self {
        TableSpec { masses: t.masses, values: t.values }
    }
}
