//! Sampling-based certification of the kernel assumptions.
//!
//! The assumptions are universally quantified inequalities; here they are
//! evaluated on a finite witness set (log lattices over `(0, 1)²` and
//! `[1, x_max]²`, their cross product and diagonal, plus seeded random
//! points). Each check records the worst observed ratio of the left-hand
//! side to the declared bound together with the point where it occurred.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BreakupKernel, CoagulationKernel, CollisionKernel};

/// Slack allowed on bound ratios to absorb rounding in the kernel formulas.
const RATIO_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    /// Nonnegativity, finiteness and symmetry.
    A0,
    /// Growth bound on the coagulation kernel.
    A1,
    /// Growth bound on the collision kernel.
    A2,
    /// `K >= 2 (N - 1) C` on the open unit square.
    A2UnitSquare,
    /// `B(x | y; z) <= b_tilde / x`.
    A3,
    /// `∫ x^p B dx <= omega_p y^p` with `omega_p < 1` for `p > 1`.
    A4,
    /// `∫ x^(-omega) B dx <= eta(omega) y^(-omega)` with finite `eta > 1`.
    A5,
    /// Uniqueness weights for the coagulation kernel.
    A1Prime,
    /// Uniqueness weights for the collision kernel.
    A2Prime,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Assumption::A0 => "A0",
            Assumption::A1 => "A1",
            Assumption::A2 => "A2",
            Assumption::A2UnitSquare => "A2-unit-square",
            Assumption::A3 => "A3",
            Assumption::A4 => "A4",
            Assumption::A5 => "A5",
            Assumption::A1Prime => "A1'",
            Assumption::A2Prime => "A2'",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    /// Largest observed `lhs / bound`, where meaningful.
    pub worst_ratio: Option<f64>,
    /// Point attaining the worst ratio, or the first violation.
    pub witness: Option<Witness>,
    pub detail: String,
}

/// Weight exponents used by the uniqueness estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniquenessWeights {
    pub theta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    /// Lattice points in `(0, 1)`, log spaced from `unit_floor`.
    pub unit_points: usize,
    pub unit_floor: f64,
    /// Lattice points in `[1, x_max]`.
    pub outer_points: usize,
    pub x_max: f64,
    pub random_points: usize,
    pub seed: u64,
    /// Fragment-to-parent ratios sampled for the pointwise breakup bound.
    pub fragment_ratios: usize,
    /// Orders `p > 1` checked against the moment contraction bound.
    pub contraction_orders: Vec<f64>,
    /// Orders `omega` in `[0, 1)` checked for finite negative breakup moments.
    pub negative_orders: Vec<f64>,
    pub uniqueness: Option<UniquenessWeights>,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            unit_points: 40,
            unit_floor: 1e-6,
            outer_points: 40,
            x_max: 1e3,
            random_points: 1000,
            seed: 0x5eed_c0a6,
            fragment_ratios: 32,
            contraction_orders: vec![2.0, 3.0],
            negative_orders: vec![0.0],
            uniqueness: None,
        }
    }
}

impl SamplePlan {
    fn unit_lattice(&self) -> Vec<f64> {
        let m = self.unit_points.max(1);
        let lf = self.unit_floor.ln();
        let mut pts: Vec<f64> = (0..m).map(|i| (lf * (1.0 - i as f64 / m as f64)).exp()).collect();
        pts.push(0.999);
        pts
    }

    fn outer_lattice(&self) -> Vec<f64> {
        let m = self.outer_points.max(2);
        let lm = self.x_max.max(1.0).ln();
        (0..m).map(|i| (lm * i as f64 / (m - 1) as f64).exp()).collect()
    }

    fn lattice(&self) -> Vec<f64> {
        let mut pts = self.unit_lattice();
        pts.extend(self.outer_lattice());
        pts
    }

    /// All pairs to evaluate: lattice product (which contains the diagonal)
    /// followed by seeded log-uniform random pairs.
    fn pairs(&self) -> Vec<(f64, f64)> {
        let lat = self.lattice();
        let mut out: Vec<(f64, f64)> = lat.iter().flat_map(|&x| lat.iter().map(move |&y| (x, y))).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (lo, hi) = (self.unit_floor.ln(), self.x_max.max(1.0).ln());
        for _ in 0..self.random_points {
            let x = rng.random_range(lo..hi).exp();
            let y = rng.random_range(lo..hi).exp();
            out.push((x, y));
        }
        out
    }

    fn ratios(&self) -> Vec<f64> {
        let m = self.fragment_ratios.max(2);
        let lf = self.unit_floor.ln();
        let mut r: Vec<f64> = (0..m).map(|i| (lf * (1.0 - i as f64 / m as f64)).exp()).collect();
        r.push(1.0 - 1e-9);
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub checks: Vec<AssumptionCheck>,
    /// `sup_y N(y)` over the sampled parents.
    pub fragment_sup: f64,
    /// False when `N(y)` varied across the sampled parents.
    pub fragment_count_constant: bool,
}

impl AdmissibilityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, a: Assumption) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.assumption == a)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Tracks the worst `value / bound` ratio over a sample set.
struct Worst {
    ratio: f64,
    witness: Option<Witness>,
}

impl Worst {
    fn new() -> Self {
        Self { ratio: 0.0, witness: None }
    }

    fn observe(&mut self, x: f64, y: f64, z: Option<f64>, value: f64, bound: f64) {
        let ratio = if value == 0.0 {
            0.0
        } else if bound > 0.0 {
            value / bound
        } else {
            f64::INFINITY
        };
        if ratio > self.ratio || self.witness.is_none() {
            self.ratio = ratio;
            self.witness = Some(Witness { x, y, z, value, bound });
        }
    }

    fn finish(self, assumption: Assumption, constants_ok: Result<(), String>) -> AssumptionCheck {
        let within = self.ratio <= 1.0 + RATIO_SLACK;
        let detail = match (&constants_ok, within) {
            (Err(e), _) => e.clone(),
            (Ok(()), true) => format!("worst ratio {:.6e}", self.ratio),
            (Ok(()), false) => format!("bound exceeded, worst ratio {:.6e}", self.ratio),
        };
        AssumptionCheck {
            assumption,
            passed: constants_ok.is_ok() && within,
            worst_ratio: Some(self.ratio),
            witness: self.witness,
            detail,
        }
    }
}

pub fn check_admissibility(
    coag: &CoagulationKernel,
    coll: &CollisionKernel,
    breakup: &BreakupKernel,
    plan: &SamplePlan,
) -> AdmissibilityReport {
    let pairs = plan.pairs();
    let parents = plan.lattice();
    let ratios = plan.ratios();

    let counts: Vec<f64> = parents.iter().filter_map(|&y| breakup.fragment_count(y).ok()).collect();
    let fragment_sup = counts.iter().copied().fold(0.0, f64::max);
    let fragment_min = counts.iter().copied().fold(f64::INFINITY, f64::min);
    let fragment_count_constant = fragment_sup - fragment_min <= 1e-12 * fragment_sup;

    let mut checks = vec![check_a0(coag, coll, breakup, &pairs, &parents, &ratios)];
    let a1 = check_a1(coag, &pairs);
    let a2 = check_a2(coll, &pairs);
    checks.push(a1.clone());
    checks.push(a2.clone());
    checks.push(check_unit_square(coag, coll, fragment_sup, &pairs));
    checks.push(check_a3(breakup, &parents, &ratios));
    checks.push(check_a4(breakup, &parents, &plan.contraction_orders));
    checks.push(check_a5(breakup, &parents, &plan.negative_orders, fragment_sup));
    if let Some(w) = plan.uniqueness {
        checks.push(check_a1_prime(coag, &a1, w));
        checks.push(check_a2_prime(coll, &a2, w));
    }
    AdmissibilityReport { checks, fragment_sup, fragment_count_constant }
}

fn check_a0(
    coag: &CoagulationKernel,
    coll: &CollisionKernel,
    breakup: &BreakupKernel,
    pairs: &[(f64, f64)],
    parents: &[f64],
    ratios: &[f64],
) -> AssumptionCheck {
    let fail = |x, y, z, value, detail: String| AssumptionCheck {
        assumption: Assumption::A0,
        passed: false,
        worst_ratio: None,
        witness: Some(Witness { x, y, z, value, bound: 0.0 }),
        detail,
    };
    for &(x, y) in pairs {
        for (name, f) in [
            ("coagulation", &(|a, b| coag.value(a, b)) as &dyn Fn(f64, f64) -> f64),
            ("collision", &|a, b| coll.value(a, b)),
        ] {
            let v = f(x, y);
            if !(v.is_finite() && v >= 0.0) {
                return fail(x, y, None, v, format!("{name} kernel is negative or not finite"));
            }
            if v != f(y, x) {
                return fail(x, y, None, v, format!("{name} kernel is not symmetric"));
            }
        }
    }
    for &y in parents {
        for &s in ratios {
            let v = breakup.value(s * y, y);
            if !(v.is_finite() && v >= 0.0) {
                return fail(s * y, y, Some(1.0), v, "breakup kernel is negative or not finite".into());
            }
        }
    }
    AssumptionCheck {
        assumption: Assumption::A0,
        passed: true,
        worst_ratio: None,
        witness: None,
        detail: "nonnegative, finite and symmetric on all samples".into(),
    }
}

fn check_a1(coag: &CoagulationKernel, pairs: &[(f64, f64)]) -> AssumptionCheck {
    let b = coag.bound;
    let constants = if !(b.k1 > 0.0) {
        Err(format!("k1 must be positive, got {}", b.k1))
    } else if !(0.0..1.0).contains(&b.sigma) {
        Err(format!("sigma must lie in [0, 1), got {}", b.sigma))
    } else if !(0.0..=1.0).contains(&(b.mu - b.sigma)) {
        Err(format!("need 0 <= mu - sigma <= 1, got {}", b.mu - b.sigma))
    } else {
        Ok(())
    };
    let mut worst = Worst::new();
    for &(x, y) in pairs {
        worst.observe(x, y, None, coag.value(x, y), b.at(x, y));
    }
    worst.finish(Assumption::A1, constants)
}

fn check_a2(coll: &CollisionKernel, pairs: &[(f64, f64)]) -> AssumptionCheck {
    let constants = if !(0.0..=1.0).contains(&coll.alpha) {
        Err(format!("alpha must lie in [0, 1], got {}", coll.alpha))
    } else {
        Ok(())
    };
    let mut worst = Worst::new();
    for &(x, y) in pairs {
        worst.observe(x, y, None, coll.value(x, y), coll.bound_at(x, y));
    }
    worst.finish(Assumption::A2, constants)
}

fn check_unit_square(
    coag: &CoagulationKernel,
    coll: &CollisionKernel,
    fragment_sup: f64,
    pairs: &[(f64, f64)],
) -> AssumptionCheck {
    let factor = 2.0 * (fragment_sup - 1.0);
    let mut worst = Worst::new();
    for &(x, y) in pairs.iter().filter(|&&(x, y)| x < 1.0 && y < 1.0) {
        worst.observe(x, y, None, factor * coll.value(x, y), coag.value(x, y));
    }
    let mut check = worst.finish(Assumption::A2UnitSquare, Ok(()));
    check.detail = format!("2(N-1)C / K with N = {fragment_sup}: {}", check.detail);
    check
}

fn check_a3(breakup: &BreakupKernel, parents: &[f64], ratios: &[f64]) -> AssumptionCheck {
    let mut worst = Worst::new();
    for &y in parents {
        for &s in ratios {
            let x = s * y;
            worst.observe(x, y, Some(1.0), x * breakup.value(x, y), breakup.b_tilde);
        }
    }
    worst.finish(Assumption::A3, Ok(()))
}

fn check_a4(breakup: &BreakupKernel, parents: &[f64], orders: &[f64]) -> AssumptionCheck {
    let mut worst_omega = 0.0f64;
    let mut witness = None;
    for &p in orders {
        if !(p > 1.0) {
            return AssumptionCheck {
                assumption: Assumption::A4,
                passed: false,
                worst_ratio: None,
                witness: None,
                detail: format!("contraction order must exceed 1, got {p}"),
            };
        }
        for &y in parents {
            match breakup.moment(y, 1.0, p) {
                Ok(m) => {
                    let omega = m / y.powf(p);
                    if omega > worst_omega || witness.is_none() {
                        worst_omega = omega;
                        witness = Some(Witness { x: p, y, z: None, value: m, bound: y.powf(p) });
                    }
                }
                Err(e) => {
                    return AssumptionCheck {
                        assumption: Assumption::A4,
                        passed: false,
                        worst_ratio: None,
                        witness: None,
                        detail: e.to_string(),
                    }
                }
            }
        }
    }
    AssumptionCheck {
        assumption: Assumption::A4,
        passed: worst_omega < 1.0,
        worst_ratio: Some(worst_omega),
        witness,
        detail: format!("largest omega_p = {worst_omega:.6e} (must be < 1)"),
    }
}

fn check_a5(breakup: &BreakupKernel, parents: &[f64], orders: &[f64], fragment_sup: f64) -> AssumptionCheck {
    let mut etas = Vec::new();
    for &omega in orders {
        if !(0.0..1.0).contains(&omega) {
            return AssumptionCheck {
                assumption: Assumption::A5,
                passed: false,
                worst_ratio: None,
                witness: None,
                detail: format!("omega must lie in [0, 1), got {omega}"),
            };
        }
        let mut eta = 0.0f64;
        for &y in parents {
            match breakup.moment(y, 1.0, -omega) {
                Ok(m) => eta = eta.max(m * y.powf(omega)),
                Err(e) => {
                    return AssumptionCheck {
                        assumption: Assumption::A5,
                        passed: false,
                        worst_ratio: None,
                        witness: Some(Witness { x: -omega, y, z: None, value: f64::INFINITY, bound: f64::NAN }),
                        detail: format!("eta({omega}) is infinite: {e}"),
                    }
                }
            }
        }
        if omega == 0.0 && eta < fragment_sup * (1.0 - 1e-12) {
            return AssumptionCheck {
                assumption: Assumption::A5,
                passed: false,
                worst_ratio: Some(eta),
                witness: None,
                detail: format!("eta(0) = {eta} is below N = {fragment_sup}"),
            };
        }
        etas.push(format!("eta({omega}) = {eta:.6e}"));
    }
    AssumptionCheck {
        assumption: Assumption::A5,
        passed: true,
        worst_ratio: None,
        witness: None,
        detail: if etas.is_empty() { "no orders sampled".into() } else { etas.join(", ") },
    }
}

fn check_a1_prime(coag: &CoagulationKernel, a1: &AssumptionCheck, w: UniquenessWeights) -> AssumptionCheck {
    let sigma = coag.bound.sigma;
    let mut problems = Vec::new();
    if !a1.passed {
        problems.push("growth bound A1 fails".to_string());
    }
    if !(0.0..1.0).contains(&w.theta) {
        problems.push(format!("theta must lie in [0, 1), got {}", w.theta));
    }
    if !(w.sigma2 > 0.0 && w.sigma2 < 1.0) {
        problems.push(format!("sigma2 must lie in (0, 1), got {}", w.sigma2));
    }
    if sigma > w.theta {
        problems.push(format!("need sigma <= theta, got sigma = {sigma}, theta = {}", w.theta));
    }
    if sigma + w.theta > w.sigma2 {
        problems.push(format!("need sigma + theta <= sigma2, got {} > {}", sigma + w.theta, w.sigma2));
    }
    if sigma + w.theta > w.sigma1 {
        problems.push(format!("need sigma + theta <= sigma1, got {} > {}", sigma + w.theta, w.sigma1));
    }
    let binding = if w.sigma2 <= w.sigma1 { "sigma2" } else { "sigma1" };
    AssumptionCheck {
        assumption: Assumption::A1Prime,
        passed: problems.is_empty(),
        worst_ratio: Some(sigma + w.theta),
        witness: None,
        detail: if problems.is_empty() {
            format!("sigma + theta = {} within both weights; binding constraint: {binding}", sigma + w.theta)
        } else {
            problems.join("; ")
        },
    }
}

fn check_a2_prime(coll: &CollisionKernel, a2: &AssumptionCheck, w: UniquenessWeights) -> AssumptionCheck {
    let mut problems = Vec::new();
    if !a2.passed {
        problems.push("growth bound A2 fails".to_string());
    }
    if !(w.sigma1 >= 1.0) {
        problems.push(format!("sigma1 must be at least 1, got {}", w.sigma1));
    }
    if coll.alpha + 1.0 > w.sigma1 {
        problems.push(format!("need alpha + 1 <= sigma1, got {} > {}", coll.alpha + 1.0, w.sigma1));
    }
    AssumptionCheck {
        assumption: Assumption::A2Prime,
        passed: problems.is_empty(),
        worst_ratio: Some(coll.alpha + 1.0),
        witness: None,
        detail: if problems.is_empty() { format!("alpha + 1 = {} <= sigma1", coll.alpha + 1.0) } else { problems.join("; ") },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{CoagulationFamily, GrowthBound, TabulatedKernel};

    fn granulation() -> CoagulationKernel {
        CoagulationKernel::granulation(1.0, 1.0, 0.5, GrowthBound::new(1.0, 1.0, 0.5)).unwrap()
    }

    #[test]
    fn granulation_with_declared_constants_passes() {
        let r = check_admissibility(
            &granulation(),
            &CollisionKernel::constant(0.1).unwrap(),
            &BreakupKernel::power_law(0.0).unwrap(),
            &SamplePlan { negative_orders: vec![0.0, 0.75], ..SamplePlan::default() },
        );
        assert!(r.all_passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        let a1 = r.get(Assumption::A1).unwrap();
        assert!(a1.worst_ratio.unwrap() <= 1.0);
        assert_eq!(r.fragment_sup, 2.0);
        assert!(r.fragment_count_constant);
    }

    #[test]
    fn understated_k1_fails_with_witness() {
        let k = CoagulationKernel::granulation(1.0, 1.0, 0.5, GrowthBound::new(0.5, 1.0, 0.5)).unwrap();
        let r = check_admissibility(&k, &CollisionKernel::zero(), &BreakupKernel::power_law(0.0).unwrap(), &SamplePlan::default());
        let a1 = r.get(Assumption::A1).unwrap();
        assert!(!a1.passed);
        let w = a1.witness.unwrap();
        assert!(w.value > w.bound);
    }

    #[test]
    fn strong_collisions_break_the_unit_square_condition() {
        // K = 1 everywhere; with N = 2 the condition needs C <= 1/2 on (0, 1)².
        let k = CoagulationKernel::constant(1.0).unwrap();
        let c = CollisionKernel::constant(0.2).unwrap();
        let b = BreakupKernel::power_law(0.0).unwrap();
        let ok = check_admissibility(&k, &c, &b, &SamplePlan::default());
        assert!(ok.get(Assumption::A2UnitSquare).unwrap().passed);

        let c = CollisionKernel::constant(0.6).unwrap();
        let r = check_admissibility(&k, &c, &b, &SamplePlan::default());
        let sq = r.get(Assumption::A2UnitSquare).unwrap();
        assert!(!sq.passed);
        let w = sq.witness.unwrap();
        assert!(w.x < 1.0 && w.y < 1.0);
        assert!(w.value > w.bound);
    }

    #[test]
    fn zero_collision_passes_collision_checks() {
        let r = check_admissibility(
            &CoagulationKernel::constant(1.0).unwrap(),
            &CollisionKernel::zero(),
            &BreakupKernel::power_law(-0.5).unwrap(),
            &SamplePlan::default(),
        );
        assert!(r.get(Assumption::A2).unwrap().passed);
        assert!(r.get(Assumption::A2UnitSquare).unwrap().passed);
        assert_eq!(r.get(Assumption::A2).unwrap().worst_ratio, Some(0.0));
    }

    #[test]
    fn asymmetric_values_are_impossible_for_tables_but_a0_scans_them() {
        let t = TabulatedKernel::new(vec![1e-3, 1.0, 1e3], vec![vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 2.0], vec![3.0, 2.0, 1.0]])
            .unwrap();
        let k = CoagulationKernel::new(CoagulationFamily::Custom { table: t }, 1.0, GrowthBound::new(3.0, 0.0, 0.0)).unwrap();
        let r = check_admissibility(&k, &CollisionKernel::zero(), &BreakupKernel::power_law(0.0).unwrap(), &SamplePlan::default());
        assert!(r.get(Assumption::A0).unwrap().passed);
        assert!(r.get(Assumption::A1).unwrap().passed);
    }

    #[test]
    fn negative_order_beyond_integrability_fails_a5() {
        let plan = SamplePlan { negative_orders: vec![0.6], ..SamplePlan::default() };
        let r = check_admissibility(
            &CoagulationKernel::constant(1.0).unwrap(),
            &CollisionKernel::zero(),
            &BreakupKernel::power_law(-0.5).unwrap(),
            &plan,
        );
        assert!(!r.get(Assumption::A5).unwrap().passed);
    }

    #[test]
    fn uniqueness_weights_checked() {
        let k = CoagulationKernel::new(CoagulationFamily::BrownianContinuum, 1.0, GrowthBound::new(4.0, 2.0 / 3.0, 1.0 / 3.0))
            .unwrap();
        let c = CollisionKernel::constant(0.1).unwrap();
        let b = BreakupKernel::power_law(0.0).unwrap();
        let good = SamplePlan {
            uniqueness: Some(UniquenessWeights { theta: 0.5, sigma1: 2.0, sigma2: 0.9 }),
            ..SamplePlan::default()
        };
        let r = check_admissibility(&k, &c, &b, &good);
        assert!(r.all_passed(), "{:#?}", r.failures().collect::<Vec<_>>());

        // Granulation with sigma = 1/2 cannot satisfy sigma <= theta and sigma + theta <= sigma2 < 1.
        let bad = SamplePlan {
            uniqueness: Some(UniquenessWeights { theta: 0.5, sigma1: 2.0, sigma2: 0.9 }),
            ..SamplePlan::default()
        };
        let r = check_admissibility(&granulation(), &c, &b, &bad);
        assert!(!r.get(Assumption::A1Prime).unwrap().passed);
        assert!(r.get(Assumption::A2Prime).unwrap().passed);
    }
}
