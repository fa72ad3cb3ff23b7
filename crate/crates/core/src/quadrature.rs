//! Fixed Gauss-Legendre rules and double-exponential (tanh-sinh) integration.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    let (_, d) = legendre_with_derivative(order, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The 16-point rule used for cell-average projection.
pub fn gauss_legendre_16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

const MAX_LEVEL: usize = 12;

/// Tanh-sinh quadrature of `f` over `[a, b]`, halving the step until two
/// successive levels agree to `rel_tol`.
///
/// Abscissae are generated as distances from the nearer endpoint, so
/// integrable endpoint singularities are never evaluated at the endpoint.
/// Near `b` the resolution is limited by the spacing of doubles at `b`, so
/// singularities there only converge to about `sqrt(eps)`.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("tanh-sinh needs a finite interval a < b, got [{a}, {b}]")));
    }
    let len = b - a;
    let mut eval = |t: f64| -> Result<Option<f64>> {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let dist = len * e / (1.0 + e);
        if dist == 0.0 {
            return Ok(None);
        }
        let x = if t < 0.0 { a + dist } else { b - dist };
        if !(x > a && x < b) {
            return Ok(None);
        }
        let weight = len * PI * t.cosh() * e / ((1.0 + e) * (1.0 + e));
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Quadrature(format!("integrand not finite at x = {x:e}")));
        }
        Ok(Some(weight * v))
    };

    // Level 0: unit step over the integers.
    let mut h = 1.0;
    let mut sum = eval(0.0)?.unwrap_or(0.0);
    sum += sweep(&mut eval, 1.0, 1.0)?;
    let mut estimate = h * sum;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        // New abscissae are the odd multiples of h.
        sum += sweep(&mut eval, h, 2.0 * h)?;
        let next = h * sum;
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Quadrature(format!(
        "tanh-sinh on [{a:e}, {b:e}] did not reach relative tolerance {rel_tol:e}"
    )))
}

fn sweep<E>(eval: &mut E, start: f64, stride: f64) -> Result<f64>
where
    E: FnMut(f64) -> Result<Option<f64>>,
{
    let mut total = 0.0;
    let mut t = start;
    loop {
        let right = eval(t)?;
        let left = eval(-t)?;
        if right.is_none() && left.is_none() {
            break;
        }
        total += right.unwrap_or(0.0) + left.unwrap_or(0.0);
        t += stride;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sixteen_point_rule_is_exact_to_degree_31() {
        let rule = gauss_legendre_16();
        assert_relative_eq!(rule.weights().iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        for deg in 0..=31 {
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg));
            assert_relative_eq!(got, 1.0 / (deg as f64 + 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn known_sixteen_point_node() {
        // Largest node of the 16-point rule.
        let rule = gauss_legendre_16();
        assert_relative_eq!(rule.nodes()[15], 0.989_400_934_991_649_9, max_relative = 1e-15);
        assert_relative_eq!(rule.weights()[15], 0.027_152_459_411_754_1, max_relative = 1e-13);
    }

    #[test]
    fn odd_order_has_zero_node() {
        let rule = GaussLegendre::new(5);
        assert_eq!(rule.nodes()[2], 0.0);
        assert_relative_eq!(rule.weights()[2], 128.0 / 225.0, max_relative = 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let got = tanh_sinh(|x| x.powf(-0.9), 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(got, 10.0, max_relative = 1e-11);
        // Near `b` the abscissae are limited by the spacing of doubles below 1.
        let got = tanh_sinh(|x| 1.0 / (1.0 - x).sqrt(), 0.0, 1.0, 1e-7).unwrap();
        assert_relative_eq!(got, 2.0, max_relative = 1e-7);
    }

    #[test]
    fn tanh_sinh_smooth_and_trivial() {
        let got = tanh_sinh(|x| (-x).exp(), 1.0, 2.0, 1e-13).unwrap();
        assert_relative_eq!(got, (-1f64).exp() - (-2f64).exp(), max_relative = 1e-13);
        assert_eq!(tanh_sinh(|_| 0.0, 0.0, 1.0, 1e-12).unwrap(), 0.0);
        assert_eq!(tanh_sinh(|x| x, 3.0, 3.0, 1e-12).unwrap(), 0.0);
        assert!(tanh_sinh(|x| x, 3.0, 1.0, 1e-12).is_err());
    }
}
