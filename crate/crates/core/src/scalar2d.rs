//! Two bodies in the (2+1)D massless scalar field.
//!
//! ```text
//! E = -(T / 4 pi^2) sum_{l>=1} int int chi1 chi2 K0^2(gamma l T s)
//! S =  (1 / 4 pi^2) sum_{l>=1} int int chi1 chi2 [K0^2 - 2 x K0 K1]
//! U = -(T / 2 pi^2) sum_{l>=1} int int chi1 chi2 x K0 K1
//! ```
//!
//! with s = |x - x'| and x = gamma l T s. Spatial integrals use fixed tensor
//! Gauss-Legendre rules; all three quantities come from the same nodes and
//! the same l-sums, so U = E + T S holds to rounding.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::NumericsPolicy;
use crate::quadrature::GaussLegendre;
use crate::specfun::{bessel_k01, polylog_exp, PolylogOrder};
use crate::sum::KahanSum;
use crate::thermo::{ThermoPoint, UnitSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanarBody {
    Disk { center: [f64; 2], radius: f64 },
    Rectangle { center: [f64; 2], half_widths: [f64; 2] },
}

impl PlanarBody {
    pub fn area(&self) -> f64 {
        match *self {
            PlanarBody::Disk { radius, .. } => PI * radius * radius,
            PlanarBody::Rectangle { half_widths, .. } => 4.0 * half_widths[0] * half_widths[1],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            PlanarBody::Disk { center, radius } => {
                center.iter().all(|c| c.is_finite()) && radius.is_finite() && radius > 0.0
            }
            PlanarBody::Rectangle { center, half_widths } => {
                center.iter().all(|c| c.is_finite()) && half_widths.iter().all(|h| h.is_finite() && *h > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry(format!("invalid planar body {self:?}")))
        }
    }

    /// Quadrature nodes (x, y, weight). Disks use Gauss-Legendre in r (with
    /// the r dr Jacobian) and the periodic trapezoid rule in the polar angle;
    /// rectangles a tensor Gauss-Legendre rule.
    pub fn nodes(&self, order: (usize, usize)) -> Vec<(f64, f64, f64)> {
        let (n1, n2) = order;
        match *self {
            PlanarBody::Disk { center, radius } => {
                let gr = GaussLegendre::new(n1);
                let wt = 2.0 * PI / n2 as f64;
                let mut out = Vec::with_capacity(n1 * n2);
                for (r, wr) in gr.mapped(0.0, radius) {
                    for j in 0..n2 {
                        let t = wt * (j as f64 + 0.5);
                        out.push((center[0] + r * t.cos(), center[1] + r * t.sin(), r * wr * wt));
                    }
                }
                out
            }
            PlanarBody::Rectangle { center, half_widths } => {
                // more nodes along the longer side
                let (nx, ny) = if half_widths[0] >= half_widths[1] {
                    (n2, n1)
                } else {
                    (n1, n2)
                };
                let gx = GaussLegendre::new(nx);
                let gy = GaussLegendre::new(ny);
                let mut out = Vec::with_capacity(nx * ny);
                for (x, wx) in gx.mapped(center[0] - half_widths[0], center[0] + half_widths[0]) {
                    for (y, wy) in gy.mapped(center[1] - half_widths[1], center[1] + half_widths[1]) {
                        out.push((x, y, wx * wy));
                    }
                }
                out
            }
        }
    }

    /// Maps two uniform variates in [0, 1) to a uniformly distributed point.
    pub fn point_from_unit(&self, u: f64, v: f64) -> (f64, f64) {
        match *self {
            PlanarBody::Disk { center, radius } => {
                let r = radius * u.sqrt();
                let t = 2.0 * PI * v;
                (center[0] + r * t.cos(), center[1] + r * t.sin())
            }
            PlanarBody::Rectangle { center, half_widths } => (
                center[0] + half_widths[0] * (2.0 * u - 1.0),
                center[1] + half_widths[1] * (2.0 * v - 1.0),
            ),
        }
    }
}

fn distance_point_rect(p: [f64; 2], center: [f64; 2], hw: [f64; 2]) -> f64 {
    let dx = ((p[0] - center[0]).abs() - hw[0]).max(0.0);
    let dy = ((p[1] - center[1]).abs() - hw[1]).max(0.0);
    dx.hypot(dy)
}

/// Smallest distance between two bodies (0 if they touch or overlap).
pub fn min_distance(b1: &PlanarBody, b2: &PlanarBody) -> f64 {
    use PlanarBody::*;
    let d = match (*b1, *b2) {
        (Disk { center: c1, radius: r1 }, Disk { center: c2, radius: r2 }) => {
            (c1[0] - c2[0]).hypot(c1[1] - c2[1]) - r1 - r2
        }
        (Disk { center, radius }, Rectangle { center: c, half_widths })
        | (Rectangle { center: c, half_widths }, Disk { center, radius }) => {
            distance_point_rect(center, c, half_widths) - radius
        }
        (
            Rectangle {
                center: c1,
                half_widths: h1,
            },
            Rectangle {
                center: c2,
                half_widths: h2,
            },
        ) => {
            let dx = ((c1[0] - c2[0]).abs() - h1[0] - h2[0]).max(0.0);
            let dy = ((c1[1] - c2[1]).abs() - h1[1] - h2[1]).max(0.0);
            dx.hypot(dy)
        }
    };
    d.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarBodyPair {
    pub body1: PlanarBody,
    pub body2: PlanarBody,
    pub chi1: f64,
    pub chi2: f64,
    gap: f64,
}

impl PlanarBodyPair {
    pub fn new(body1: PlanarBody, body2: PlanarBody, chi1: f64, chi2: f64) -> Result<Self> {
        body1.validate()?;
        body2.validate()?;
        if !(chi1 >= 0.0 && chi2 >= 0.0 && chi1.is_finite() && chi2.is_finite()) {
            return Err(Error::Geometry(
                "susceptibilities must be finite and non-negative".into(),
            ));
        }
        let gap = min_distance(&body1, &body2);
        if !(gap > 0.0) {
            return Err(Error::Geometry(
                "planar bodies must be separated by a positive gap".into(),
            ));
        }
        Ok(Self {
            body1,
            body2,
            chi1,
            chi2,
            gap,
        })
    }

    /// Two disks of equal radius with centers on the x axis.
    pub fn disks(radius: f64, center_distance: f64, chi1: f64, chi2: f64) -> Result<Self> {
        Self::new(
            PlanarBody::Disk {
                center: [0.0, 0.0],
                radius,
            },
            PlanarBody::Disk {
                center: [center_distance, 0.0],
                radius,
            },
            chi1,
            chi2,
        )
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }
}

/// Per-l sums of K0^2(x) and x K0(x) K1(x) at x = gamma l T s, l >= 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSums {
    pub k0_sq: f64,
    pub x_k0_k1: f64,
    pub terms: u64,
}

/// Sums the two kernels over l for one separation. K0(x)^2 e^{2x} and
/// x K0(x) K1(x) e^{2x} are both decreasing, so consecutive terms shrink at
/// least by e^{-2 gamma T s} and the geometric tail bound is rigorous.
pub fn kernel_l_sums(gts: f64, tol: f64, l_max: u64) -> Result<KernelSums> {
    if !(gts > 0.0) {
        return Err(Error::Domain {
            function: "kernel_l_sums",
            detail: format!("gamma T s = {gts} must be positive"),
        });
    }
    let rho = (-2.0 * gts).exp();
    let mut a = KahanSum::new();
    let mut b = KahanSum::new();
    for l in 1..=l_max {
        let x = gts * l as f64;
        let (k0, k1) = bessel_k01(x)?;
        let ta = k0 * k0;
        let tb = x * k0 * k1;
        a.add(ta);
        b.add(tb);
        let factor = rho / (1.0 - rho);
        if (ta * factor <= tol * a.value() && tb * factor <= tol * b.value()) || ta == 0.0 {
            return Ok(KernelSums {
                k0_sq: a.value(),
                x_k0_k1: b.value(),
                terms: l,
            });
        }
    }
    Err(Error::NotConverged {
        what: "2+1D Matsubara sum",
        terms: l_max,
        tail_bound: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar2DResult {
    pub point: ThermoPoint,
    /// Largest number of Matsubara terms used by any node pair.
    pub max_terms: u64,
    pub node_pairs: usize,
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "scalar2d",
            detail: format!("temperature must be positive and finite, got {t}"),
        })
    }
}

/// (int int sum K0^2, int int sum x K0 K1, max terms, pairs).
fn integrate_kernels(
    pair: &PlanarBodyPair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<(f64, f64, u64, usize)> {
    check_temperature(t)?;
    let n1 = pair.body1.nodes(numerics.planar_order);
    let n2 = pair.body2.nodes(numerics.planar_order);
    let gt = units.gamma() * t;
    let tol = numerics.matsubara_tol;
    let rows: Vec<Result<(f64, f64, u64)>> = n1
        .par_iter()
        .map(|&(x1, y1, w1)| {
            let mut a = KahanSum::new();
            let mut b = KahanSum::new();
            let mut terms = 0;
            for &(x2, y2, w2) in &n2 {
                let s = (x1 - x2).hypot(y1 - y2);
                let k = kernel_l_sums(gt * s, tol, numerics.l_max)?;
                a.add(w2 * k.k0_sq);
                b.add(w2 * k.x_k0_k1);
                terms = terms.max(k.terms);
            }
            Ok((w1 * a.value(), w1 * b.value(), terms))
        })
        .collect();
    let mut a = KahanSum::new();
    let mut b = KahanSum::new();
    let mut terms = 0;
    for row in rows {
        let (ra, rb, rt) = row?;
        a.add(ra);
        b.add(rb);
        terms = terms.max(rt);
    }
    Ok((a.value(), b.value(), terms, n1.len() * n2.len()))
}

pub fn evaluate_2d(
    pair: &PlanarBodyPair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<Scalar2DResult> {
    let cc = pair.chi1 * pair.chi2;
    let (a, b, max_terms, node_pairs) = if cc == 0.0 {
        check_temperature(t)?;
        (0.0, 0.0, 0, 0)
    } else {
        integrate_kernels(pair, t, units, numerics)?
    };
    let four_pi_sq = 4.0 * PI * PI;
    let e = -t * cc * a / four_pi_sq;
    let s = cc * (a - 2.0 * b) / four_pi_sq;
    let u = -t * cc * b / (2.0 * PI * PI);
    Ok(Scalar2DResult {
        point: ThermoPoint {
            temperature: t,
            e_self: 0.0,
            e_interaction: e,
            entropy: s,
            internal_energy: u,
            force: None,
        },
        max_terms,
        node_pairs,
    })
}

pub fn free_energy_2d(pair: &PlanarBodyPair, t: f64, units: &UnitSystem, numerics: &NumericsPolicy) -> Result<f64> {
    Ok(evaluate_2d(pair, t, units, numerics)?.point.e_interaction)
}

pub fn entropy_2d(pair: &PlanarBodyPair, t: f64, units: &UnitSystem, numerics: &NumericsPolicy) -> Result<f64> {
    Ok(evaluate_2d(pair, t, units, numerics)?.point.entropy)
}

pub fn internal_energy_2d(pair: &PlanarBodyPair, t: f64, units: &UnitSystem, numerics: &NumericsPolicy) -> Result<f64> {
    Ok(evaluate_2d(pair, t, units, numerics)?.point.internal_energy)
}

/// The published exact-sum entropy, whose overall sign is opposite to
/// -dE/dT. Kept for deviation reports.
pub fn printed_entropy_exact_sum_2d(
    pair: &PlanarBodyPair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<f64> {
    Ok(-entropy_2d(pair, t, units, numerics)?)
}

/// Bracket of the published asymptotic entropy, with the exponent signs
/// flipped to e^{-2y} so the logarithm and polylogarithms are real; y = gamma T s.
pub fn asymptotic_bracket(y: f64) -> Result<f64> {
    let q2 = 2.0 * y;
    let li2 = polylog_exp(PolylogOrder::new(2)?, q2)?;
    let li3 = polylog_exp(PolylogOrder::new(3)?, q2)?;
    let log = (-(-q2).exp_m1()).ln();
    Ok(-1.0 / q2.exp_m1() - log / (4.0 * y) + li2 / (16.0 * q2 * q2) - li3 / (8.0 * q2 * q2 * q2))
}

/// The published asymptotic entropy, -(1/4 pi^2) int int chi1 chi2 A(gamma T s).
pub fn printed_asymptotic_entropy_2d(
    pair: &PlanarBodyPair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<f64> {
    check_temperature(t)?;
    let n1 = pair.body1.nodes(numerics.planar_order);
    let n2 = pair.body2.nodes(numerics.planar_order);
    let gt = units.gamma() * t;
    let rows: Vec<Result<f64>> = n1
        .par_iter()
        .map(|&(x1, y1, w1)| {
            let mut acc = KahanSum::new();
            for &(x2, y2, w2) in &n2 {
                let s = (x1 - x2).hypot(y1 - y2);
                acc.add(w2 * asymptotic_bracket(gt * s)?);
            }
            Ok(w1 * acc.value())
        })
        .collect();
    let mut acc = KahanSum::new();
    for r in rows {
        acc.add(r?);
    }
    Ok(-pair.chi1 * pair.chi2 * acc.value() / (4.0 * PI * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{entropy_from_free_energy, richardson_derivative};

    fn coarse() -> NumericsPolicy {
        NumericsPolicy {
            planar_order: (8, 16),
            ..NumericsPolicy::default()
        }
    }

    #[test]
    fn node_weights_sum_to_area() {
        let d = PlanarBody::Disk {
            center: [1.0, -2.0],
            radius: 1.5,
        };
        let r = PlanarBody::Rectangle {
            center: [0.0, 0.0],
            half_widths: [2.0, 0.5],
        };
        for b in [d, r] {
            let w: f64 = b.nodes((10, 20)).iter().map(|n| n.2).sum();
            assert!((w - b.area()).abs() < 1e-12 * b.area());
        }
    }

    #[test]
    fn gaps() {
        let p = PlanarBodyPair::disks(1.0, 3.0, 1.0, 1.0).unwrap();
        assert!((p.gap() - 1.0).abs() < 1e-15);
        assert!(PlanarBodyPair::disks(1.0, 2.0, 1.0, 1.0).is_err());
        let r1 = PlanarBody::Rectangle {
            center: [0.0, 0.0],
            half_widths: [1.0, 1.0],
        };
        let r2 = PlanarBody::Rectangle {
            center: [3.0, 4.0],
            half_widths: [1.0, 1.0],
        };
        assert!((min_distance(&r1, &r2) - (1.0f64).hypot(2.0)).abs() < 1e-15);
        let d = PlanarBody::Disk {
            center: [0.0, 3.0],
            radius: 1.0,
        };
        assert!((min_distance(&r1, &d) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_kernels_are_decreasing() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for i in 1..400 {
            let x = 0.01 * i as f64 * (1.0 + 0.05 * i as f64);
            let (k0, k1) = bessel_k01(x).unwrap();
            let e = (2.0 * x).exp();
            let cur = (k0 * k0 * e, x * k0 * k1 * e);
            assert!(cur.0 < prev.0 && cur.1 < prev.1, "x = {x}");
            assert!(cur.0 > 0.0 && cur.1 > 0.0);
            prev = cur;
        }
    }

    #[test]
    fn kernel_derivative_identity() {
        // d/dT K0^2(gamma l T s) = -2 gamma l s K0 K1 at l = 1, s = 2, T = 1
        let g = 2.0 * PI;
        let f = |t: f64| bessel_k01(g * 2.0 * t).unwrap().0.powi(2);
        let d = richardson_derivative(f, 1.0, 1e-4).unwrap();
        let (k0, k1) = bessel_k01(g * 2.0).unwrap();
        assert!(((d.value + 2.0 * g * 2.0 * k0 * k1) / d.value).abs() < 1e-6);
    }

    #[test]
    fn consistency() {
        let pair = PlanarBodyPair::disks(1.0, 3.0, 1.0, 1.0).unwrap();
        let u = UnitSystem::natural();
        let num = coarse();
        for &t in &[0.2, 1.0] {
            let r = evaluate_2d(&pair, t, &u, &num).unwrap();
            assert!(r.point.consistency_residual().abs() <= 1e-12 * r.point.internal_energy.abs());
            let fd = entropy_from_free_energy(|x| free_energy_2d(&pair, x, &u, &num).unwrap(), t, 1e-3 * t).unwrap();
            assert!(((fd.value - r.point.entropy) / r.point.entropy).abs() < 1e-6, "T = {t}");
        }
    }

    #[test]
    fn decoupled_is_zero() {
        let pair = PlanarBodyPair::disks(1.0, 3.0, 0.0, 1.0).unwrap();
        let r = evaluate_2d(&pair, 1.0, &UnitSystem::natural(), &coarse()).unwrap();
        assert_eq!(
            (r.point.e_interaction, r.point.entropy, r.point.internal_energy),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn far_bodies_are_below_envelope() {
        let t = 1.0;
        let pair = PlanarBodyPair::disks(0.5, 6.0, 1.0, 1.0).unwrap();
        let e = free_energy_2d(&pair, t, &UnitSystem::natural(), &coarse()).unwrap();
        assert!(e < 0.0);
        assert!(e.abs() < (-2.0 * 2.0 * PI * t * pair.gap()).exp());
    }
}
