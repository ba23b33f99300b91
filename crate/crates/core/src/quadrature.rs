//! Gauss-Legendre rules.
//!
//! This is a numerical primitive shared by the closed-form modules and the
//! oracle, in the same way the special functions are.

use std::f64::consts::PI;

use crate::sum::KahanSum;

/// An n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on P_n.
    ///
    /// Panics if `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mut acc = KahanSum::new();
        for (x, w) in self.mapped(a, b) {
            acc.add(w * f(x));
        }
        acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Integrates `f` over a piecewise-smooth interval with breakpoints, splitting
/// every piece into panels no longer than `max_panel`.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    breakpoints: &[f64],
    max_panel: f64,
    mut f: F,
) -> f64 {
    let mut acc = KahanSum::new();
    for piece in breakpoints.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        if b <= a {
            continue;
        }
        let panels = ((b - a) / max_panel).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for k in 0..panels {
            let lo = a + k as f64 * h;
            let hi = if k + 1 == panels { b } else { lo + h };
            for (x, w) in rule.mapped(lo, hi) {
                acc.add(w * f(x));
            }
        }
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 64, 128] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}: {s}");
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let g = GaussLegendre::new(8);
        for deg in 0..16 {
            let approx = g.integrate(0.0, 1.0, |x| x.powi(deg));
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((approx - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let g = GaussLegendre::new(33);
        for w in g.nodes().windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..33 {
            assert!((g.nodes()[i] + g.nodes()[32 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn panels_handle_kinks() {
        let g = GaussLegendre::new(10);
        let v = integrate_panels(&g, &[-1.0, 0.0, 2.0], 0.5, |x: f64| x.abs());
        assert!((v - 2.5).abs() < 1e-14);
    }
}
