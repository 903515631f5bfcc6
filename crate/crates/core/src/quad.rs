//! Globally adaptive Gauss–Legendre quadrature on finite intervals.
//!
//! Each segment carries a 15-point estimate over the whole segment and over
//! its two halves; their difference is the segment's error estimate and the
//! halves' sum its value. The segment with the largest error is bisected
//! until the summed error meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

const RULE_POINTS: usize = 15;

static RULE: LazyLock<GaussLegendre> = LazyLock::new(|| GaussLegendre::new(RULE_POINTS));

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut derivative = 0.0;
            for _ in 0..100 {
                let (p, p_prev) = legendre_pair(n, x);
                derivative = nf * (x * p - p_prev) / (x * x - 1.0);
                let step = p / derivative;
                x -= step;
                if step.abs() <= 1e-16 {
                    let (p, p_prev) = legendre_pair(n, x);
                    derivative = nf * (x * p - p_prev) / (x * x - 1.0);
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn apply<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for j in 2..=n {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    if n == 0 {
        (1.0, 0.0)
    } else {
        (p, p_prev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            rel,
            abs: 1e-300,
            max_intervals: 4000,
        }
    }

    pub fn with_abs(self, abs: f64) -> Self {
        Self { abs, ..self }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl Segment {
    fn evaluate<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, whole: Option<f64>) -> Self {
        let mid = 0.5 * (a + b);
        let whole = whole.unwrap_or_else(|| RULE.apply(f, a, b));
        let left = RULE.apply(f, a, mid);
        let right = RULE.apply(f, mid, b);
        Self {
            a,
            b,
            left,
            right,
            error: (whole - (left + right)).abs(),
        }
    }
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over the partition given by `breakpoints` (sorted, at least
/// two entries). Breakpoints seed the subdivision where the caller knows the
/// integrand has structure at scales the first estimates could not see.
pub fn integrate_partitioned<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<Integral> {
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let mut heap: BinaryHeap<Segment> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| Segment::evaluate(&mut f, w[0], w[1], None))
        .collect();
    loop {
        let value = heap.iter().map(|s| s.left + s.right).collect::<CompensatedSum>().value();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target || !error.is_finite() || !value.is_finite() {
            if !(error.is_finite() && value.is_finite()) {
                return Err(Error::NotConverged {
                    intervals: heap.len(),
                    estimate: value,
                    error_estimate: error,
                    requested: target,
                });
            }
            return Ok(Integral {
                value,
                error_estimate: error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::NotConverged {
                intervals: heap.len(),
                estimate: value,
                error_estimate: error,
                requested: target,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution; keep its estimate.
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        heap.push(Segment::evaluate(&mut f, worst.a, mid, Some(worst.left)));
        heap.push(Segment::evaluate(&mut f, mid, worst.b, Some(worst.right)));
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    integrate_partitioned(f, &[a, b], tol)
}

/// Breakpoints on `[0, 1]` that are geometric toward both ends:
/// `0, 1e-k.., 0.5, .., 1 - 1e-k, 1` for `k = 1..=depth`.
pub fn unit_breakpoints(depth: i32) -> Vec<f64> {
    let mut points = vec![0.0];
    points.extend((1..=depth).rev().map(|k| 10f64.powi(-k)));
    points.push(0.5);
    points.extend((1..=depth).map(|k| 1.0 - 10f64.powi(-k)));
    points.push(1.0);
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(RULE_POINTS);
        let total: f64 = rule.weights().iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-15);
        // degree 2n - 1 = 29
        let v = rule.apply(&mut |x: f64| x.powi(28), 0.0, 1.0);
        assert_relative_eq!(v, 1.0 / 29.0, max_relative = 1e-13);
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn smooth_and_singular_integrands() {
        let tol = Tolerance::relative(1e-12);
        let v = integrate(|x: f64| x.exp(), 0.0, 1.0, tol).unwrap();
        assert_relative_eq!(v.value, std::f64::consts::E - 1.0, max_relative = 1e-13);

        let v = integrate(|x: f64| x.sqrt(), 0.0, 1.0, tol).unwrap();
        assert_relative_eq!(v.value, 2.0 / 3.0, max_relative = 1e-11);

        let v = integrate(|x: f64| -x.ln(), 0.0, 1.0, tol).unwrap();
        assert_relative_eq!(v.value, 1.0, max_relative = 1e-11);
    }

    #[test]
    fn narrow_feature_needs_breakpoints() {
        // Step of width 1e-7 next to the right end.
        let f = |u: f64| if u > 1.0 - 1e-7 { 1.0 } else { 0.0 };
        let v = integrate_partitioned(f, &unit_breakpoints(12), Tolerance::relative(1e-6)).unwrap();
        assert_relative_eq!(v.value, 1e-7, max_relative = 1e-6);
    }

    #[test]
    fn reports_non_convergence() {
        let tol = Tolerance {
            rel: 1e-14,
            abs: 0.0,
            max_intervals: 8,
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::NotConverged { intervals: 8, .. }));
    }
}
