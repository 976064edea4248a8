//! Composite Gauss-Legendre quadrature with panel doubling.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes per panel.
pub const NODES: usize = 32;
/// Relative agreement required between successive panel counts.
pub const REL_TOL: f64 = 1e-10;
/// Panel doubling stops here and reports a tolerance failure.
pub const MAX_PANELS: usize = 1 << 10;

struct Rule {
    nodes: [f64; NODES],
    weights: [f64; NODES],
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(NODES))
}

/// Nodes and weights on [-1, 1] by Newton iteration on the Legendre recurrence.
fn legendre_rule(n: usize) -> Rule {
    let mut nodes = [0.0; NODES];
    let mut weights = [0.0; NODES];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Integral of `f` over `[lo, hi]` split into `panels` equal panels, plus the integral of `|f|`.
fn composite<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, panels: usize) -> (f64, f64) {
    let rule = rule();
    let width = (hi - lo) / panels as f64;
    let half = 0.5 * width;
    let (mut sum, mut abs_sum) = (0.0, 0.0);
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * width;
        let (mut s, mut sa) = (0.0, 0.0);
        for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
            let v = w * f(mid + half * x);
            s += v;
            sa += v.abs();
        }
        sum += s * half;
        abs_sum += sa * half;
    }
    (sum, abs_sum)
}

/// `∫_lo^hi f(x) dx`, doubling panels until successive estimates agree to [`REL_TOL`].
///
/// Agreement is measured relative to the larger of the integral and a tiny fraction of
/// `∫|f|`, so integrals that cancel to zero still converge.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    if hi == lo {
        return Ok(0.0);
    }
    let (mut prev, _) = composite(&f, lo, hi, 1);
    let mut panels = 2;
    loop {
        let (cur, abs_cur) = composite(&f, lo, hi, panels);
        if !cur.is_finite() {
            return Err(Error::QuadratureTolerance {
                best_estimate: cur,
                panels,
            });
        }
        let scale = cur.abs().max(1e-6 * abs_cur);
        if (cur - prev).abs() <= REL_TOL * scale || (cur - prev).abs() <= 1e-300 {
            return Ok(cur);
        }
        if panels >= MAX_PANELS {
            return Err(Error::QuadratureTolerance {
                best_estimate: cur,
                panels,
            });
        }
        prev = cur;
        panels *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_symmetric() {
        let r = rule();
        let total: f64 = r.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        for i in 0..NODES {
            assert!((r.nodes[i] + r.nodes[NODES - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_for_high_degree_polynomials() {
        // 32 nodes integrate degree 63 exactly
        let v = integrate(|x: f64| x.powi(62), -1.0, 1.0).unwrap();
        assert!((v - 2.0 / 63.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_antiderivative() {
        let v = integrate(|x: f64| x.exp(), 0.5, 1.0).unwrap();
        let exact = std::f64::consts::E - 0.5f64.exp();
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn cancelling_integrand_converges() {
        let v = integrate(|x: f64| x, -3.0, 3.0).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn sharp_peak_needs_more_panels_but_converges() {
        let theta = 40.0;
        let v = integrate(|x: f64| (theta * (x - 10.0)).exp(), 1.0, 10.0).unwrap();
        let exact = (1.0 - (theta * -9.0).exp()) / theta;
        assert!(((v - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn reports_tolerance_failure() {
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-9, 1.0).unwrap_err();
        assert!(matches!(err, Error::QuadratureTolerance { .. }));
    }
}
