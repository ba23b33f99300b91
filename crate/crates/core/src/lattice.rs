//! Closed-form Matsubara sums of the form
//!
//! ```text
//! G(x) = sum_{l>=0} e^{-l x} p(l x / 2)
//! ```
//!
//! for a polynomial p. With x = 2 gamma T s these are exactly the l-sums of
//! the 3+1D scalar kernel (p = 1) and of the electromagnetic kernel h
//! (p = 3 + 6t + 5t^2 + 2t^3 + t^4).
//!
//! Two evaluation routes: Eulerian-polynomial closed forms of Li_{-n} for
//! x >= 1, and the Euler-Maclaurin expansion (convergent for x < 2 pi) below.

use crate::specfun::{bernoulli_even_over_factorial, polylog_nonpositive};
use crate::sum::KahanSum;

const SERIES_SWITCH: f64 = 1.0;

/// G(x) together with x G'(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeValue {
    pub g: f64,
    pub x_dg: f64,
}

impl LatticeValue {
    /// d/dx [x G(x)] = G + x G'.
    pub fn d_xg(&self) -> f64 {
        self.g + self.x_dg
    }
}

#[derive(Debug, Clone)]
pub struct ExpPolyLattice {
    coeffs: Vec<f64>,
    integral: f64,
}

impl ExpPolyLattice {
    /// `coeffs[n]` multiplies t^n. Degree at most 7.
    pub fn new(coeffs: &[f64]) -> Self {
        assert!(!coeffs.is_empty() && coeffs.len() <= 8);
        // int_0^inf e^{-2t} t^n dt = n! / 2^{n+1}
        let mut integral = 0.0;
        let mut fact = 1.0;
        for (n, c) in coeffs.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            integral += c * fact / 2f64.powi(n as i32 + 1);
        }
        Self {
            coeffs: coeffs.to_vec(),
            integral,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// int_0^inf e^{-2t} p(t) dt.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn eval(&self, x: f64) -> LatticeValue {
        if x < SERIES_SWITCH {
            self.eval_series(x)
        } else {
            self.eval_closed(x)
        }
    }

    pub fn eval_closed(&self, x: f64) -> LatticeValue {
        assert!(x > 0.0);
        let li = |n: usize| polylog_nonpositive(n as u32, x).expect("order <= 8, x > 0");
        let half = 0.5 * x;
        let mut g = KahanSum::new();
        let mut xdg = KahanSum::new();
        let one_minus_q = -(-x).exp_m1();
        let mut pow = 1.0; // (x/2)^n
        for (n, &p) in self.coeffs.iter().enumerate() {
            if n == 0 {
                g.add(p / one_minus_q);
            } else {
                let l_n = li(n);
                g.add(p * pow * l_n);
                xdg.add(n as f64 * p * pow * l_n);
            }
            xdg.add(-x * p * pow * li(n + 1));
            pow *= half;
        }
        LatticeValue {
            g: g.value(),
            x_dg: xdg.value(),
        }
    }

    /// S_k = sum_j p_j (-1)^{j+1} (2k)(2k-1)...(2k-j) / 2^j
    fn s_k(&self, k: u32) -> f64 {
        let two_k = 2.0 * k as f64;
        let mut acc = 0.0;
        let mut ff = 1.0;
        for (j, &p) in self.coeffs.iter().enumerate() {
            ff *= two_k - j as f64;
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            acc += p * sign * ff / 2f64.powi(j as i32);
        }
        acc
    }

    pub fn eval_series(&self, x: f64) -> LatticeValue {
        assert!(x > 0.0 && x < 2.0 * std::f64::consts::PI);
        let p0 = self.coeffs[0];
        let mut d = KahanSum::new();
        let mut g = KahanSum::new();
        d.add(0.5 * p0);
        g.add(2.0 * self.integral / x);
        g.add(0.5 * p0);
        let mut xpow = x; // x^{2k-1}
        for k in 1..200u32 {
            let term = bernoulli_even_over_factorial(k) * xpow * self.s_k(k);
            d.add(-term);
            g.add(-term / (2.0 * k as f64));
            if term.abs() <= 1e-18 * d.value().abs().max(1e-300) && k > 2 {
                break;
            }
            xpow *= x * x;
        }
        let g = g.value();
        LatticeValue { g, x_dg: d.value() - g }
    }

    /// Laurent coefficients of G(x): pairs (power of x, coefficient), starting
    /// with (-1, 2 I) and (0, p0 / 2), then odd powers 1, 3, 5, ...
    pub fn g_expansion(&self, n_odd: u32) -> Vec<(i32, f64)> {
        let mut out = vec![(-1, 2.0 * self.integral), (0, 0.5 * self.coeffs[0])];
        for k in 1..=n_odd {
            let c = -bernoulli_even_over_factorial(k) * self.s_k(k) / (2.0 * k as f64);
            out.push((2 * k as i32 - 1, c));
        }
        out
    }

    /// Taylor coefficients of d/dx [x G(x)]: (0, p0/2), then odd powers.
    pub fn d_xg_expansion(&self, n_odd: u32) -> Vec<(i32, f64)> {
        let mut out = vec![(0, 0.5 * self.coeffs[0])];
        for k in 1..=n_odd {
            out.push((2 * k as i32 - 1, -bernoulli_even_over_factorial(k) * self.s_k(k)));
        }
        out
    }
}
