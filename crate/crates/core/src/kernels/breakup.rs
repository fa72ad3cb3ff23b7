//! Daughter distributions `B(x | y; z)`: fragments of mass `x` produced when a
//! particle of mass `y` breaks after colliding with one of mass `z`.

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::quadrature::tanh_sinh;

const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub ratios: Vec<f64>,
    pub values: Vec<f64>,
}

/// Self-similar daughter profile `h(s)`, `s = x / y`, so that
/// `B(x | y; z) = h(x / y) / y`.
///
/// `h` interpolates the tabulated values linearly in `ln s` and is constant
/// below the first ratio. The table is rescaled on construction so that
/// `∫₀¹ s h(s) ds = 1`, which makes every fragmentation event mass neutral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct DaughterProfile {
    ratios: Vec<f64>,
    values: Vec<f64>,
    log_ratios: Vec<f64>,
    scale: f64,
}

impl DaughterProfile {
    pub fn new(ratios: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ratios.len() < 2 || ratios.len() != values.len() {
            return Err(config("daughter profile needs at least two (ratio, value) pairs of equal length"));
        }
        if ratios.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return Err(config("daughter profile ratios must lie in (0, 1]"));
        }
        if ratios.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config("daughter profile ratios must be strictly increasing"));
        }
        if *ratios.last().unwrap() != 1.0 {
            return Err(config("daughter profile must end at ratio 1"));
        }
        if values.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
            return Err(config("daughter profile values must be finite and nonnegative"));
        }
        let log_ratios = ratios.iter().map(|s| s.ln()).collect();
        let mut profile = Self { ratios, values, log_ratios, scale: 1.0 };
        let mass = profile.integrate_ratio(0.0, 1.0, 1.0)?;
        if !(mass > 0.0) {
            return Err(config("daughter profile carries no mass"));
        }
        profile.scale = 1.0 / mass;
        Ok(profile)
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Factor applied to the tabulated values to enforce mass neutrality.
    pub fn normalization(&self) -> f64 {
        self.scale
    }

    fn h(&self, s: f64) -> f64 {
        let lr = &self.log_ratios;
        let v = &self.values;
        let ls = s.ln();
        let raw = if ls <= lr[0] {
            v[0]
        } else if ls >= lr[lr.len() - 1] {
            v[v.len() - 1]
        } else {
            let k = (lr.partition_point(|&r| r <= ls) - 1).min(lr.len() - 2);
            let t = (ls - lr[k]) / (lr[k + 1] - lr[k]);
            (1.0 - t) * v[k] + t * v[k + 1]
        };
        self.scale * raw
    }

    /// `∫ s^p h(s) ds` over `[lo, hi] ⊂ [0, 1]`, split at the table ratios.
    fn integrate_ratio(&self, lo: f64, hi: f64, p: f64) -> Result<f64> {
        let mut cuts = vec![lo];
        cuts.extend(self.ratios.iter().copied().filter(|&r| r > lo && r < hi));
        cuts.push(hi);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += tanh_sinh(|s| s.powf(p) * self.h(s), w[0], w[1], QUAD_TOL)?;
        }
        Ok(total)
    }
}

impl TryFrom<ProfileSpec> for DaughterProfile {
    type Error = Error;

    fn try_from(spec: ProfileSpec) -> Result<Self> {
        DaughterProfile::new(spec.ratios, spec.values)
    }
}

impl From<DaughterProfile> for ProfileSpec {
    fn from(p: DaughterProfile) -> Self {
        ProfileSpec { ratios: p.ratios, values: p.values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BreakupFamily {
    /// `B(x | y; z) = ((nu + 2) / y) (x / y)^nu`, `nu` in `(-1, 0]`.
    PowerLaw { nu: f64 },
    Custom { profile: DaughterProfile },
}

/// Breakup kernel with its declared pointwise constant `b_tilde`,
/// `B(x | y; z) <= b_tilde / x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakupKernel {
    #[serde(flatten)]
    pub family: BreakupFamily,
    pub b_tilde: f64,
}

impl BreakupKernel {
    pub fn new(family: BreakupFamily, b_tilde: f64) -> Result<Self> {
        let kernel = Self { family, b_tilde };
        kernel.validate()?;
        Ok(kernel)
    }

    /// Power-law kernel with `b_tilde = nu + 2`.
    pub fn power_law(nu: f64) -> Result<Self> {
        Self::new(BreakupFamily::PowerLaw { nu }, nu + 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if let BreakupFamily::PowerLaw { nu } = self.family {
            if !(nu > -1.0 && nu <= 0.0) {
                return Err(config(format!("power-law breakup exponent nu must lie in (-1, 0], got {nu}")));
            }
        }
        if !(self.b_tilde.is_finite() && self.b_tilde > 0.0) {
            return Err(config(format!("breakup constant b_tilde must be positive, got {}", self.b_tilde)));
        }
        Ok(())
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            BreakupFamily::PowerLaw { .. } => "power_law",
            BreakupFamily::Custom { .. } => "custom",
        }
    }

    /// `B(x | y; z)`; zero for `x >= y`. The colliding mass `z` is accepted
    /// for interface symmetry but neither family depends on it.
    pub fn eval(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(domain(format!("fragment mass must be positive, got {x}")));
        }
        if !(y > 0.0 && z > 0.0) {
            return Err(domain(format!("parent and collider masses must be positive, got y = {y}, z = {z}")));
        }
        Ok(self.value(x, y))
    }

    pub(crate) fn value(&self, x: f64, y: f64) -> f64 {
        if x >= y {
            return 0.0;
        }
        match &self.family {
            BreakupFamily::PowerLaw { nu } => (nu + 2.0) / y * (x / y).powf(*nu),
            BreakupFamily::Custom { profile } => profile.h(x / y) / y,
        }
    }

    /// Smallest admissible exponent: moments exist for `p > threshold`.
    fn integrability_threshold(&self) -> f64 {
        match self.family {
            BreakupFamily::PowerLaw { nu } => -(nu + 1.0),
            BreakupFamily::Custom { .. } => -1.0,
        }
    }

    fn check_exponent(&self, p: f64) -> Result<()> {
        let threshold = self.integrability_threshold();
        if !(p > threshold) {
            return Err(domain(format!("x^{p} B is not integrable at 0; need p > {threshold}")));
        }
        Ok(())
    }

    /// `∫₀ʸ x^p B(x | y; z) dx`: closed form for the power law, adaptive
    /// quadrature for tabulated profiles.
    pub fn moment(&self, y: f64, z: f64, p: f64) -> Result<f64> {
        if !(y > 0.0 && z > 0.0) {
            return Err(domain(format!("parent and collider masses must be positive, got y = {y}, z = {z}")));
        }
        self.check_exponent(p)?;
        match &self.family {
            BreakupFamily::PowerLaw { nu } => Ok((nu + 2.0) / (nu + p + 1.0) * y.powf(p)),
            BreakupFamily::Custom { profile } => Ok(y.powf(p) * profile.integrate_ratio(0.0, 1.0, p)?),
        }
    }

    /// The same integral evaluated by tanh-sinh quadrature of `eval` over
    /// `(0, y)`, regardless of family.
    pub fn moment_by_quadrature(&self, y: f64, z: f64, p: f64) -> Result<f64> {
        if !(y > 0.0 && z > 0.0) {
            return Err(domain(format!("parent and collider masses must be positive, got y = {y}, z = {z}")));
        }
        self.check_exponent(p)?;
        let mut cuts = vec![0.0];
        if let BreakupFamily::Custom { profile } = &self.family {
            cuts.extend(profile.ratios.iter().filter(|&&r| r < 1.0).map(|r| r * y));
        }
        cuts.push(y);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += tanh_sinh(|x| x.powf(p) * self.value(x, y), w[0], w[1], QUAD_TOL)?;
        }
        Ok(total)
    }

    /// Number of fragments `N(y)`.
    pub fn fragment_count(&self, y: f64) -> Result<f64> {
        self.moment(y, 1.0, 0.0)
    }

    /// `N = sup_y N(y)`. Both families are self-similar, so `N(y)` is constant.
    pub fn total_fragments(&self) -> f64 {
        match &self.family {
            BreakupFamily::PowerLaw { nu } => (nu + 2.0) / (nu + 1.0),
            BreakupFamily::Custom { .. } => self.fragment_count(1.0).expect("p = 0 is integrable"),
        }
    }

    /// `omega_p` with `∫ x^p B dx = omega_p y^p`.
    pub fn omega_p(&self, p: f64) -> Result<f64> {
        self.check_exponent(p)?;
        match &self.family {
            BreakupFamily::PowerLaw { nu } => Ok((nu + 2.0) / (nu + p + 1.0)),
            BreakupFamily::Custom { .. } => self.moment(1.0, 1.0, p),
        }
    }

    /// `eta(omega)` with `∫ x^(-omega) B dx = eta(omega) y^(-omega)`.
    pub fn eta(&self, omega: f64) -> Result<f64> {
        self.omega_p(-omega)
    }

    /// `(∫ₐᵇ B dx, ∫ₐᵇ x B dx)` for `0 <= a <= b <= y`.
    pub fn partial_moments(&self, y: f64, a: f64, b: f64) -> Result<(f64, f64)> {
        if !(0.0 <= a && a <= b && b <= y) {
            return Err(domain(format!("partial moment interval [{a}, {b}] must lie in [0, {y}]")));
        }
        if a == b {
            return Ok((0.0, 0.0));
        }
        match &self.family {
            BreakupFamily::PowerLaw { nu } => {
                let (s, t) = (a / y, b / y);
                let e0 = nu + 1.0;
                let e1 = nu + 2.0;
                let n0 = (nu + 2.0) * (t.powf(e0) - s.powf(e0)) / e0;
                let n1 = y * (t.powf(e1) - s.powf(e1));
                Ok((n0, n1))
            }
            BreakupFamily::Custom { profile } => {
                let (s, t) = (a / y, b / y);
                let n0 = profile.integrate_ratio(s, t, 0.0)?;
                let n1 = y * profile.integrate_ratio(s, t, 1.0)?;
                Ok((n0, n1))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_law_values() {
        let b0 = BreakupKernel::power_law(0.0).unwrap();
        assert_eq!(b0.eval(1.0, 2.0, 0.7).unwrap(), 1.0);
        assert_eq!(b0.eval(3.0, 2.0, 0.7).unwrap(), 0.0);
        let bh = BreakupKernel::power_law(-0.5).unwrap();
        assert_relative_eq!(bh.eval(0.25, 1.0, 1.0).unwrap(), 3.0, max_relative = 1e-15);
        assert!(matches!(b0.eval(0.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn power_law_moments() {
        let b0 = BreakupKernel::power_law(0.0).unwrap();
        assert_relative_eq!(b0.moment(5.0, 1.0, 1.0).unwrap(), 5.0, max_relative = 1e-15);
        assert_relative_eq!(b0.moment(3.0, 1.0, 0.0).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(b0.moment(1.0, 1.0, -0.5).unwrap(), 4.0, max_relative = 1e-15);
        assert_relative_eq!(b0.eta(0.5).unwrap(), 4.0, max_relative = 1e-15);
        assert!(matches!(b0.moment(1.0, 1.0, -1.0), Err(Error::Domain(_))));
        let bq = BreakupKernel::power_law(-0.5).unwrap();
        assert!(bq.moment(1.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn nu_range_enforced() {
        assert!(BreakupKernel::power_law(0.1).is_err());
        assert!(BreakupKernel::power_law(-1.0).is_err());
        assert!(BreakupKernel::power_law(-0.99).is_ok());
    }

    #[test]
    fn power_law_partial_moments_sum_to_whole() {
        let b = BreakupKernel::power_law(-0.25).unwrap();
        let y = 3.0;
        let (n_a, m_a) = b.partial_moments(y, 0.0, 1.0).unwrap();
        let (n_b, m_b) = b.partial_moments(y, 1.0, y).unwrap();
        assert_relative_eq!(n_a + n_b, b.total_fragments(), max_relative = 1e-14);
        assert_relative_eq!(m_a + m_b, y, max_relative = 1e-14);
    }

    #[test]
    fn custom_profile_is_mass_normalized() {
        // Flat raw profile with value 7; normalization rescales to h = 2.
        let p = DaughterProfile::new(vec![0.01, 0.5, 1.0], vec![7.0, 7.0, 7.0]).unwrap();
        assert_relative_eq!(p.normalization(), 2.0 / 7.0, max_relative = 1e-12);
        let b = BreakupKernel::new(BreakupFamily::Custom { profile: p }, 2.0).unwrap();
        assert_relative_eq!(b.moment(4.0, 1.0, 1.0).unwrap(), 4.0, max_relative = 1e-12);
        assert_relative_eq!(b.total_fragments(), 2.0, max_relative = 1e-12);
        let (n, m) = b.partial_moments(4.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(n, 0.5, max_relative = 1e-12);
        assert_relative_eq!(m, 0.75, max_relative = 1e-12);
    }

    #[test]
    fn custom_profile_rejects_bad_tables() {
        assert!(DaughterProfile::new(vec![0.5, 0.9], vec![1.0, 1.0]).is_err());
        assert!(DaughterProfile::new(vec![0.5, 0.4, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(DaughterProfile::new(vec![0.5, 1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn custom_serde_keeps_raw_values() {
        let p = DaughterProfile::new(vec![0.1, 1.0], vec![3.0, 1.0]).unwrap();
        let b = BreakupKernel::new(BreakupFamily::Custom { profile: p }, 5.0).unwrap();
        let json = serde_json::to_string(&b).unwrap();
        assert_eq!(json, r#"{"family":"custom","profile":{"ratios":[0.1,1.0],"values":[3.0,1.0]},"b_tilde":5.0}"#);
        let back: BreakupKernel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
    }
}
