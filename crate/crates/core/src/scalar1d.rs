//! Two ribbons in the (1+1)D massless scalar field.
//!
//! With y = 2 gamma T, gap g = c - b and widths w1 = b - a, w2 = d - c, the
//! interaction free energy is
//!
//! ```text
//! E_int = -chi1 chi2 / (8 gamma^4 T^3) * C_4
//! C_s   = sum_i sigma_i Li_s(e^{-y d_i})
//!       = sum_k k^{-s} e^{-k y g} (1 - e^{-k y w1}) (1 - e^{-k y w2})
//! ```
//!
//! over the four distances d_i = r -+ r' -+ r'' with signs (+, -, -, +).
//! Entropy, internal energy and force follow by exact differentiation.

use crate::error::{Error, Result};
use crate::geometry::RibbonPair;
use crate::specfun::{polylog_exp, polylog_exp_remainder, zeta, PolylogOrder};
use crate::sum::KahanSum;
use crate::thermo::{ThermoPoint, UnitSystem};

/// Full 1+1D result at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar1DResult {
    pub point: ThermoPoint,
    pub entropy_self: f64,
    pub entropy_interaction: f64,
    /// F = dE/dr.
    pub force: f64,
    /// -dE/dr.
    pub force_on_body: f64,
}

/// Self part and interaction part of one thermodynamic quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub self_part: f64,
    pub interaction: f64,
}

impl Split {
    pub fn total(&self) -> f64 {
        self.self_part + self.interaction
    }
}

fn order(s: u32) -> PolylogOrder {
    PolylogOrder::new(s).expect("orders 1..=4 are valid")
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "scalar1d",
            detail: format!("temperature must be positive and finite, got {t}"),
        })
    }
}

/// The four distances with their signs: gap, gap + w1, gap + w2, gap + w1 + w2.
fn distances(pair: &RibbonPair) -> [(f64, f64); 4] {
    let r = pair.r();
    let rp = pair.r_prime();
    let rpp = pair.r_double_prime();
    [
        (1.0, r - rp - rpp),
        (-1.0, r - rp + rpp),
        (-1.0, r + rp - rpp),
        (1.0, r + rp + rpp),
    ]
}

/// C_4, C_3 and D_3 = sum_i sigma_i d_i Li_3(e^{-y d_i}).
#[derive(Debug, Clone, Copy)]
struct InteractionSums {
    c4: f64,
    c3: f64,
    d3: f64,
}

const PAIRED_SWITCH: f64 = 0.1;

fn interaction_sums(pair: &RibbonPair, y: f64) -> Result<InteractionSums> {
    let g = pair.gap();
    if y * g >= PAIRED_SWITCH {
        Ok(paired_sums(pair, y))
    } else {
        split_sums(pair, y)
    }
}

fn paired_sums(pair: &RibbonPair, y: f64) -> InteractionSums {
    let (g, w1, w2) = (pair.gap(), pair.width1(), pair.width2());
    let mut c4 = KahanSum::new();
    let mut c3 = KahanSum::new();
    let mut d3 = KahanSum::new();
    let ratio = (-y * g).exp();
    for k in 1..100_000u32 {
        let kf = k as f64;
        let base = (-kf * y * g).exp();
        let e1 = (-kf * y * w1).exp();
        let e2 = (-kf * y * w2).exp();
        let f1 = -(-kf * y * w1).exp_m1();
        let f2 = -(-kf * y * w2).exp_m1();
        let k3 = kf * kf * kf;
        let t3 = base * f1 * f2 / k3;
        c3.add(t3);
        c4.add(t3 / kf);
        d3.add(base * (g * f1 * f2 - w1 * e1 * f2 - w2 * e2 * f1) / k3);
        if t3 * ratio / (1.0 - ratio) <= 1e-17 * c3.value() || base == 0.0 {
            break;
        }
    }
    InteractionSums {
        c4: c4.value(),
        c3: c3.value(),
        d3: d3.value(),
    }
}

fn split_sums(pair: &RibbonPair, y: f64) -> Result<InteractionSums> {
    // polynomial parts of degree <= 1 in d_i cancel against the signs
    let mut c4 = KahanSum::new();
    let mut c3 = KahanSum::new();
    let mut d3 = KahanSum::new();
    for (sigma, d) in distances(pair) {
        let x = y * d;
        c4.add(sigma * polylog_exp_remainder(order(4), x, 2)?);
        c3.add(sigma * polylog_exp_remainder(order(3), x, 2)?);
        d3.add(sigma * d * polylog_exp_remainder(order(3), x, 1)?);
    }
    Ok(InteractionSums {
        c4: c4.value(),
        c3: c3.value(),
        d3: d3.value(),
    })
}

/// (E, S, U) of a single ribbon of width w.
fn self_terms(chi: f64, w: f64, t: f64, gamma: f64) -> Result<(f64, f64, f64)> {
    if chi == 0.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let x = 2.0 * gamma * t * w;
    let r4 = polylog_exp_remainder(order(4), x, 2)?;
    let r3 = polylog_exp_remainder(order(3), x, 1)?;
    let pref = 2.0 * chi * chi * w.powi(4);
    let x3 = x * x * x;
    let x4 = x3 * x;
    let e = -pref * t * r4 / x4;
    let s = pref * (-3.0 * r4 / x4 - r3 / x3);
    let u = pref * t * (-r3 / x3 - 4.0 * r4 / x4);
    Ok((e, s, u))
}

struct Parts {
    e: Split,
    s: Split,
    u: Split,
    force: f64,
}

fn evaluate_parts(pair: &RibbonPair, t: f64, units: &UnitSystem) -> Result<Parts> {
    check_temperature(t)?;
    let gamma = units.gamma();
    let (e1, s1, u1) = self_terms(pair.chi1, pair.width1(), t, gamma)?;
    let (e2, s2, u2) = self_terms(pair.chi2, pair.width2(), t, gamma)?;
    let cc = pair.chi1 * pair.chi2;
    let (ei, si, ui, f) = if cc == 0.0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let sums = interaction_sums(pair, 2.0 * gamma * t)?;
        let k = cc / (8.0 * gamma.powi(4));
        let t3 = t * t * t;
        let gt2 = 2.0 * gamma * t;
        (
            -k * sums.c4 / t3,
            -k / (t3 * t) * (3.0 * sums.c4 + gt2 * sums.d3),
            -k / t3 * (4.0 * sums.c4 + gt2 * sums.d3),
            cc * sums.c3 / (4.0 * gamma.powi(3) * t * t),
        )
    };
    let parts = Parts {
        e: Split {
            self_part: e1 + e2,
            interaction: ei,
        },
        s: Split {
            self_part: s1 + s2,
            interaction: si,
        },
        u: Split {
            self_part: u1 + u2,
            interaction: ui,
        },
        force: f,
    };
    for v in [parts.e.total(), parts.s.total(), parts.u.total(), parts.force] {
        if !v.is_finite() {
            return Err(Error::NonFinite("scalar1d"));
        }
    }
    Ok(parts)
}

/// (E_self, E_interaction).
pub fn free_energy_1d(pair: &RibbonPair, t: f64, units: &UnitSystem) -> Result<(f64, f64)> {
    let p = evaluate_parts(pair, t, units)?;
    Ok((p.e.self_part, p.e.interaction))
}

/// Total entropy S = -dE/dT.
pub fn entropy_1d(pair: &RibbonPair, t: f64, units: &UnitSystem) -> Result<f64> {
    Ok(evaluate_parts(pair, t, units)?.s.total())
}

/// Entropy split into self and interaction parts.
pub fn entropy_1d_parts(pair: &RibbonPair, t: f64, units: &UnitSystem) -> Result<Split> {
    Ok(evaluate_parts(pair, t, units)?.s)
}

/// F = dE/dr at fixed widths. Self energies do not depend on r.
pub fn force_1d(pair: &RibbonPair, t: f64, units: &UnitSystem) -> Result<f64> {
    Ok(evaluate_parts(pair, t, units)?.force)
}

/// Total internal energy U = E + T S.
pub fn internal_energy_1d(pair: &RibbonPair, t: f64, units: &UnitSystem) -> Result<f64> {
    Ok(evaluate_parts(pair, t, units)?.u.total())
}

pub fn evaluate_1d(pair: &RibbonPair, t: f64, units: &UnitSystem) -> Result<Scalar1DResult> {
    let p = evaluate_parts(pair, t, units)?;
    Ok(Scalar1DResult {
        point: ThermoPoint {
            temperature: t,
            e_self: p.e.self_part,
            e_interaction: p.e.interaction,
            entropy: p.s.total(),
            internal_energy: p.u.total(),
            force: Some(p.force),
        },
        entropy_self: p.s.self_part,
        entropy_interaction: p.s.interaction,
        force: p.force,
        force_on_body: -p.force,
    })
}

/// Literal transcription of the published entropy expression
/// (Li_2 / log form with zeta(3) r'' self terms). Not consistent with
/// `free_energy_1d`; kept for deviation reports.
pub fn printed_entropy_1d(pair: &RibbonPair, t: f64, units: &UnitSystem) -> Result<f64> {
    check_temperature(t)?;
    let gamma = units.gamma();
    let gt = gamma * t;
    let y = 2.0 * gt;
    let [(_, d1), (_, d2), (_, d3), (_, d4)] = distances(pair);
    let li2 = |d: f64| polylog_exp(order(2), y * d);
    let lg = |d: f64| (-(-y * d).exp_m1()).ln();
    let z3 = zeta(3)?;
    let cc = pair.chi1 * pair.chi2;
    let self_part = -pair.chi1.powi(2) * pair.r_double_prime() * z3 / gt.powi(3)
        - pair.chi2.powi(2) * pair.r_prime() * z3 / gt.powi(3);
    let dilog = cc / (2.0 * gt * gt) * (li2(d3)? - li2(d4)? - li2(d1)? + li2(d2)?);
    let logs = cc / gt * (d3 * lg(d3) - d4 * lg(d4) - d1 * lg(d1) + d2 * lg(d2));
    Ok(-(self_part + dilog - logs))
}

/// Literal transcription of the published force expression (log form).
pub fn printed_force_1d(pair: &RibbonPair, t: f64, units: &UnitSystem) -> Result<f64> {
    check_temperature(t)?;
    let gamma = units.gamma();
    let y = 2.0 * gamma * t;
    let [(_, d1), (_, d2), (_, d3), (_, d4)] = distances(pair);
    let lg = |d: f64| (-(-y * d).exp_m1()).ln();
    Ok(-pair.chi1 * pair.chi2 / (2.0 * gamma) * (-lg(d4) + lg(d2) + lg(d3) - lg(d1)))
}

/// Literal transcription of the published internal energy expression.
pub fn printed_internal_energy_1d(pair: &RibbonPair, t: f64, units: &UnitSystem) -> Result<f64> {
    check_temperature(t)?;
    let gamma = units.gamma();
    let y = 2.0 * gamma * t;
    let [(_, d1), (_, d2), (_, d3), (_, d4)] = distances(pair);
    let li = |s: u32, d: f64| polylog_exp(order(s), y * d);
    let cc = pair.chi1 * pair.chi2;
    let self_part = 3.0 * (pair.chi1.powi(2) * pair.r_double_prime() + pair.chi2.powi(2) * pair.r_prime())
        / (4.0 * gamma.powi(3) * t * t);
    let quad = cc / (2.0 * gamma.powi(4) * t.powi(3)) * (li(4, d4)? - li(4, d1)? + li(4, d2)? - li(4, d3)?);
    let tri =
        cc / (4.0 * gamma.powi(3) * t * t) * (-d4 * li(3, d4)? - d1 * li(3, d1)? - d2 * li(3, d2)? - d3 * li(3, d3)?);
    Ok(self_part + quad - tri)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{entropy_from_free_energy, internal_energy_from_free_energy, richardson_derivative};

    fn blue() -> RibbonPair {
        RibbonPair::from_widths(2.0, 8.0, 4.0, 1.0, 1.0).unwrap()
    }

    fn e_total(pair: &RibbonPair, t: f64) -> f64 {
        let (a, b) = free_energy_1d(pair, t, &UnitSystem::natural()).unwrap();
        a + b
    }

    #[test]
    fn paired_and_split_sums_agree() {
        let pair = RibbonPair::from_widths(1.5, 0.3, 0.7, 1.0, 1.0).unwrap();
        for &y in &[0.2, 0.33, 0.5, 1.0] {
            let p = paired_sums(&pair, y);
            let s = split_sums(&pair, y).unwrap();
            for (a, b) in [(p.c4, s.c4), (p.c3, s.c3), (p.d3, s.d3)] {
                assert!(((a - b) / a).abs() < 1e-11, "y = {y}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn interaction_is_attractive() {
        for &t in &[0.01, 0.1, 1.0] {
            let (_, ei) = free_energy_1d(&blue(), t, &UnitSystem::natural()).unwrap();
            assert!(ei < 0.0, "T = {t}");
        }
        // e^{-2 gamma T g} underflows here
        let (_, ei) = free_energy_1d(&blue(), 10.0, &UnitSystem::natural()).unwrap();
        assert!(ei <= 0.0);
    }

    #[test]
    fn decoupled_bodies() {
        let p = RibbonPair::from_widths(2.0, 8.0, 4.0, 1.0, 0.0).unwrap();
        let r = evaluate_1d(&p, 0.7, &UnitSystem::natural()).unwrap();
        assert_eq!(r.point.e_interaction, 0.0);
        assert_eq!(r.force, 0.0);
        let none = RibbonPair::from_widths(2.0, 8.0, 4.0, 0.0, 0.0).unwrap();
        let r = evaluate_1d(&none, 0.7, &UnitSystem::natural()).unwrap();
        assert_eq!((r.point.entropy, r.point.internal_energy), (0.0, 0.0));
    }

    #[test]
    fn entropy_and_internal_energy_are_derivatives() {
        let u = UnitSystem::natural();
        for &t in &[0.01, 0.05, 0.3, 1.0, 4.0] {
            let s = entropy_1d(&blue(), t, &u).unwrap();
            let fd = entropy_from_free_energy(|x| e_total(&blue(), x), t, 1e-3 * t).unwrap();
            assert!(((s - fd.value) / s).abs() < 1e-7, "S at T = {t}: {s} vs {}", fd.value);
            let uu = internal_energy_1d(&blue(), t, &u).unwrap();
            let fd = internal_energy_from_free_energy(|x| e_total(&blue(), x), t, 1e-3 * t).unwrap();
            assert!(((uu - fd.value) / uu).abs() < 1e-7, "U at T = {t}");
        }
    }

    #[test]
    fn force_is_r_derivative() {
        let u = UnitSystem::natural();
        let t = 1.0;
        let f = force_1d(&blue(), t, &u).unwrap();
        let e = |r: f64| {
            free_energy_1d(&blue().with_center_distance(r).unwrap(), t, &u)
                .unwrap()
                .1
        };
        let fd = richardson_derivative(e, blue().r(), 1e-3).unwrap();
        assert!(((f - fd.value) / f).abs() < 1e-8);
        assert!(f > 0.0);
    }

    #[test]
    fn consistency_residual_vanishes() {
        let r = evaluate_1d(&blue(), 0.2, &UnitSystem::natural()).unwrap();
        let p = r.point;
        assert!(p.consistency_residual().abs() <= 1e-12 * p.internal_energy.abs());
    }

    #[test]
    fn printed_forms_differ_from_derivatives() {
        let u = UnitSystem::natural();
        let s = entropy_1d(&blue(), 1.0, &u).unwrap();
        let sp = printed_entropy_1d(&blue(), 1.0, &u).unwrap();
        assert!((s - sp).abs() > 1e-3 * s.abs());
    }
}
