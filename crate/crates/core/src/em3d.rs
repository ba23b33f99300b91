//! Electromagnetic field between two dielectric bodies at first nonvanishing
//! order in the susceptibilities.
//!
//! The point-pair kernel is
//!
//! ```text
//! h(kappa, s) = e^{-2 kappa s} / (8 pi^2) [kappa^4/s^2 + 2 kappa^3/s^3 + 5 kappa^2/s^4 + 6 kappa/s^5 + 3/s^6]
//! ```
//!
//! with kappa = nu_l / c = gamma l T, and E = -T sum_{l>=0} int int chi1 chi2 h.
//! Summed over l, h becomes G(x) / (8 pi^2 s^6) with x = 2 gamma T s and
//! G(x) = sum_l e^{-l x} p(l x / 2), p(t) = 3 + 6t + 5t^2 + 2t^3 + t^4.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{p_factor, sphere_pair_average, SpherePair, P_FACTOR_MAX, P_FACTOR_MIN};
use crate::lattice::ExpPolyLattice;
use crate::numerics::NumericsPolicy;
use crate::quadrature::GaussLegendre;
use crate::scalar3d::sphere_panel;
use crate::thermo::{ThermoPoint, UnitSystem};

/// One term kappa^w / s^{-power} of the bracket in h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EMKernelTerm {
    pub power: i32,
    pub coefficient: f64,
    pub matsubara_weight: u32,
}

pub const EM_KERNEL_TERMS: [EMKernelTerm; 5] = [
    EMKernelTerm {
        power: -2,
        coefficient: 1.0,
        matsubara_weight: 4,
    },
    EMKernelTerm {
        power: -3,
        coefficient: 2.0,
        matsubara_weight: 3,
    },
    EMKernelTerm {
        power: -4,
        coefficient: 5.0,
        matsubara_weight: 2,
    },
    EMKernelTerm {
        power: -5,
        coefficient: 6.0,
        matsubara_weight: 1,
    },
    EMKernelTerm {
        power: -6,
        coefficient: 3.0,
        matsubara_weight: 0,
    },
];

/// Coefficients of p(t), lowest power first.
pub const EM_LATTICE_POLY: [f64; 5] = [3.0, 6.0, 5.0, 2.0, 1.0];

fn lattice() -> &'static ExpPolyLattice {
    static L: OnceLock<ExpPolyLattice> = OnceLock::new();
    L.get_or_init(|| ExpPolyLattice::new(&EM_LATTICE_POLY))
}

/// h(kappa, s) for a wavenumber kappa = nu / c >= 0.
pub fn em_kernel_h(kappa: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain {
            function: "em_kernel_h",
            detail: format!("separation must be positive, got {s}"),
        });
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::Domain {
            function: "em_kernel_h",
            detail: format!("wavenumber must be non-negative, got {kappa}"),
        });
    }
    let bracket: f64 = EM_KERNEL_TERMS
        .iter()
        .map(|t| t.coefficient * kappa.powi(t.matsubara_weight as i32) * s.powi(t.power))
        .sum();
    Ok((-2.0 * kappa * s).exp() * bracket / (8.0 * PI * PI))
}

/// Free dyadic Green's function at imaginary frequency, without the contact
/// term (which vanishes between disjoint bodies).
pub fn dyadic_green(kappa: f64, r: [f64; 3]) -> [[f64; 3]; 3] {
    let d = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let mut g = [[0.0; 3]; 3];
    if kappa == 0.0 {
        // static limit: (delta - 3 r r / d^2) / (4 pi d^3)
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                g[i][j] = (delta - 3.0 * r[i] * r[j] / (d * d)) / (4.0 * PI * d.powi(3));
            }
        }
        return g;
    }
    let u = 1.0 / (kappa * d);
    let a = 1.0 + u + u * u;
    let b = 1.0 + 3.0 * u + 3.0 * u * u;
    let pref = kappa * kappa * (-kappa * d).exp() / (4.0 * PI * d);
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            g[i][j] = pref * (delta * a - r[i] * r[j] / (d * d) * b);
        }
    }
    g
}

/// sum_ij G_ij(r) G_ji(-r), which equals h(kappa, |r|).
pub fn dyadic_contraction(kappa: f64, r: [f64; 3]) -> f64 {
    let g = dyadic_green(kappa, r);
    let gm = dyadic_green(kappa, [-r[0], -r[1], -r[2]]);
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += g[i][j] * gm[j][i];
        }
    }
    acc
}

fn check(s: f64, t: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite() && t > 0.0 && t.is_finite()) {
        return Err(Error::Domain {
            function: "em3d",
            detail: format!("need s > 0 and T > 0, got s = {s}, T = {t}"),
        });
    }
    Ok(())
}

/// (E, S, U) point-pair kernels summed over l >= 0.
pub fn em_kernels(s: f64, t: f64, units: &UnitSystem) -> Result<(f64, f64, f64)> {
    check(s, t)?;
    let v = lattice().eval(2.0 * units.gamma() * t * s);
    let pref = 1.0 / (8.0 * PI * PI * s.powi(6));
    Ok((-t * pref * v.g, pref * v.d_xg(), t * pref * v.x_dg))
}

/// A term coefficient * gamma^gamma_power * T^t_power * s^s_power of a
/// point-pair series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub coefficient: f64,
    pub gamma_power: i32,
    pub t_power: i32,
    pub s_power: i32,
}

impl SeriesTerm {
    const fn new(coefficient: f64, gamma_power: i32, t_power: i32, s_power: i32) -> Self {
        Self {
            coefficient,
            gamma_power,
            t_power,
            s_power,
        }
    }

    pub fn eval(&self, gamma: f64, t: f64, s: f64) -> f64 {
        self.coefficient * gamma.powi(self.gamma_power) * t.powi(self.t_power) * s.powi(self.s_power)
    }
}

/// Published point-pair free energy series, E = chi1 chi2 sum terms.
pub const PRINTED_E_SERIES: [SeriesTerm; 6] = [
    SeriesTerm::new(-55.0, -1, 0, -7),
    SeriesTerm::new(-1.5, 0, 1, -6),
    SeriesTerm::new(0.25, 1, 2, -5),
    SeriesTerm::new(1.0 / 240.0, 3, 4, -3),
    SeriesTerm::new(-73.0 / 30240.0, 5, 6, -1),
    SeriesTerm::new(197.0 / 352800.0, 7, 8, 1),
];

/// Published point-pair entropy series, S = chi1 chi2 sum terms.
pub const PRINTED_S_SERIES: [SeriesTerm; 5] = [
    SeriesTerm::new(-1.5, 0, 0, -6),
    SeriesTerm::new(0.5, 1, 1, -5),
    SeriesTerm::new(1.0 / 60.0, 3, 3, -3),
    SeriesTerm::new(-73.0 / 5040.0, 5, 5, -1),
    SeriesTerm::new(197.0 / 50400.0, 7, 7, 1),
];

/// Published point-pair internal energy series, U = chi1 chi2 sum terms.
pub const PRINTED_U_SERIES: [SeriesTerm; 4] = [
    SeriesTerm::new(55.0, -1, 0, -7),
    SeriesTerm::new(0.25, 1, 2, -5),
    SeriesTerm::new(1.0 / 80.0, 3, 4, -3),
    SeriesTerm::new(-73.0 / 6048.0, 5, 6, -1),
];

/// Published two-sphere entropy series with pi written as gamma / 2, so that
/// S = chi1 chi2 sum terms with s^p read as the double solid-angle integral
/// (4 pi)^2 R^p P_p.
pub const PRINTED_SPHERE_S_SERIES: [SeriesTerm; 5] = [
    SeriesTerm::new(-1.5, 0, 0, -6),
    SeriesTerm::new(0.5, 1, 1, -5),
    SeriesTerm::new(1.0 / 60.0, 3, 3, -3),
    SeriesTerm::new(-1.0 / 5040.0, 5, 5, -1),
    SeriesTerm::new(1.0 / 256.0, 7, 7, 1),
];

/// Low-temperature series of the exact point-pair free energy, from the
/// Euler-Maclaurin expansion of the l-sum: the 1/T term, the T^0 term and
/// `n_odd` further odd powers of x = 2 gamma T s.
pub fn derived_e_series(n_odd: u32) -> Vec<SeriesTerm> {
    // E_k = -(T / 8 pi^2 s^6) sum_p c_p (2 gamma T s)^p
    lattice()
        .g_expansion(n_odd)
        .into_iter()
        .map(|(p, c)| SeriesTerm::new(-c * 2f64.powi(p) / (8.0 * PI * PI), p, p + 1, p - 6))
        .collect()
}

/// S = -dE/dT term by term.
pub fn entropy_terms_from_free_energy(e: &[SeriesTerm]) -> Vec<SeriesTerm> {
    e.iter()
        .filter(|t| t.t_power != 0)
        .map(|t| {
            SeriesTerm::new(
                -f64::from(t.t_power) * t.coefficient,
                t.gamma_power,
                t.t_power - 1,
                t.s_power,
            )
        })
        .collect()
}

/// U = -T^2 d/dT (E / T) term by term.
pub fn internal_energy_terms_from_free_energy(e: &[SeriesTerm]) -> Vec<SeriesTerm> {
    e.iter()
        .filter(|t| t.t_power != 1)
        .map(|t| {
            SeriesTerm::new(
                f64::from(1 - t.t_power) * t.coefficient,
                t.gamma_power,
                t.t_power,
                t.s_power,
            )
        })
        .collect()
}

/// Double solid-angle integral of s^p over the two spheres, (4 pi)^2 R^p P_p.
pub fn sphere_moment(pair: &SpherePair, p: i32, numerics: &NumericsPolicy) -> Result<f64> {
    let r = pair.center_distance();
    let four_pi_sq = (4.0 * PI).powi(2);
    if (P_FACTOR_MIN..=P_FACTOR_MAX).contains(&p) {
        Ok(four_pi_sq * r.powi(p) * p_factor(p, pair)?)
    } else {
        let rule = GaussLegendre::new(numerics.radial_order);
        Ok(four_pi_sq * sphere_pair_average(pair, &rule, sphere_panel(pair), |s| s.powi(p)))
    }
}

/// A point-pair series integrated over two spheres, times chi1 chi2 and the
/// surface-measure factor.
pub fn sphere_series(
    terms: &[SeriesTerm],
    pair: &SpherePair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<f64> {
    let g = units.gamma();
    let mut acc = 0.0;
    for term in terms {
        let m = sphere_moment(pair, term.s_power, numerics)?;
        acc += term.coefficient * g.powi(term.gamma_power) * t.powi(term.t_power) * m;
    }
    Ok(pair.chi1 * pair.chi2 * pair.measure_factor() * acc)
}

/// Exact two-sphere thermodynamics from the closed-form l-sum and the
/// one-dimensional distance density.
pub fn em_sphere_thermo(
    pair: &SpherePair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<ThermoPoint> {
    check(pair.center_distance(), t)?;
    let pref = pair.chi1 * pair.chi2 * pair.measure_factor() * (4.0 * PI).powi(2) / (8.0 * PI * PI);
    let rule = GaussLegendre::new(numerics.radial_order);
    let panel = sphere_panel(pair);
    let xs = 2.0 * units.gamma() * t;
    let lat = lattice();
    let (mut e, mut s, mut u) = (0.0, 0.0, 0.0);
    if pref != 0.0 {
        e = -t * pref * sphere_pair_average(pair, &rule, panel, |d| lat.eval(xs * d).g / d.powi(6));
        s = pref * sphere_pair_average(pair, &rule, panel, |d| lat.eval(xs * d).d_xg() / d.powi(6));
        u = t * pref * sphere_pair_average(pair, &rule, panel, |d| lat.eval(xs * d).x_dg / d.powi(6));
    }
    Ok(ThermoPoint {
        temperature: t,
        e_self: 0.0,
        e_interaction: e,
        entropy: s,
        internal_energy: u,
        force: None,
    })
}

/// How the two-sphere EM quantities are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmMethod {
    /// Exact l-sum with the exact distance-density reduction.
    #[default]
    Closed,
    /// The published series (two-sphere entropy form for S).
    PrintedSeries,
}

pub fn em_free_energy(
    pair: &SpherePair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
    method: EmMethod,
) -> Result<f64> {
    match method {
        EmMethod::Closed => Ok(em_sphere_thermo(pair, t, units, numerics)?.e_interaction),
        EmMethod::PrintedSeries => sphere_series(&PRINTED_E_SERIES, pair, t, units, numerics),
    }
}

pub fn em_entropy(
    pair: &SpherePair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
    method: EmMethod,
) -> Result<f64> {
    match method {
        EmMethod::Closed => Ok(em_sphere_thermo(pair, t, units, numerics)?.entropy),
        EmMethod::PrintedSeries => sphere_series(&PRINTED_SPHERE_S_SERIES, pair, t, units, numerics),
    }
}

pub fn em_internal_energy(
    pair: &SpherePair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
    method: EmMethod,
) -> Result<f64> {
    match method {
        EmMethod::Closed => Ok(em_sphere_thermo(pair, t, units, numerics)?.internal_energy),
        EmMethod::PrintedSeries => sphere_series(&PRINTED_U_SERIES, pair, t, units, numerics),
    }
}

/// Temperature for the dimensionless variable Z = 4 pi R T.
pub fn temperature_from_z(z: f64, center_distance: f64) -> f64 {
    z / (4.0 * PI * center_distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{entropy_from_free_energy, internal_energy_from_free_energy};

    fn nat() -> UnitSystem {
        UnitSystem::natural()
    }

    #[test]
    fn static_kernel() {
        let h = em_kernel_h(0.0, 2.0).unwrap();
        assert!((h - 3.0 / (8.0 * PI * PI * 64.0)).abs() < 1e-18);
        assert!(em_kernel_h(1.0, 0.0).is_err());
    }

    #[test]
    fn dyadic_contraction_matches_h() {
        for &(k, s) in &[(1.0, 2.0), (0.0, 1.5), (3.0, 0.4), (0.2, 7.0)] {
            let dir = [0.36, -0.48, 0.8];
            let r = [s * dir[0], s * dir[1], s * dir[2]];
            let a = dyadic_contraction(k, r);
            let b = em_kernel_h(k, s).unwrap();
            assert!(((a - b) / b).abs() < 1e-12, "kappa = {k}, s = {s}");
        }
    }

    #[test]
    fn large_separation_tail() {
        let (k, s) = (1.0, 200.0);
        let h = em_kernel_h(k, s).unwrap();
        let lead = (-2.0 * k * s).exp() * k.powi(4) / (8.0 * PI * PI * s * s);
        assert!(((h - lead) / lead).abs() < 0.011);
    }

    #[test]
    fn kernels_match_direct_l_sum() {
        let u = nat();
        for &(s, t) in &[(1.0, 0.05), (2.0, 0.3), (0.5, 2.0)] {
            let direct: f64 = (0..5000)
                .map(|l| em_kernel_h(u.gamma() * l as f64 * t, s).unwrap())
                .sum();
            let (e, _, _) = em_kernels(s, t, &u).unwrap();
            assert!(((e + t * direct) / e).abs() < 1e-12);
        }
    }

    #[test]
    fn kernels_are_consistent() {
        let u = nat();
        let s = 1.3;
        for &t in &[0.01, 0.2, 1.0] {
            let (e, sk, uk) = em_kernels(s, t, &u).unwrap();
            assert!((uk - e - t * sk).abs() <= 1e-13 * e.abs());
            let fd = entropy_from_free_energy(|x| em_kernels(s, x, &u).unwrap().0, t, 1e-3 * t).unwrap();
            assert!(((fd.value - sk) / sk).abs() < 1e-7);
            let fu = internal_energy_from_free_energy(|x| em_kernels(s, x, &u).unwrap().0, t, 1e-3 * t).unwrap();
            assert!((fu.value - uk).abs() < 1e-7 * uk.abs() + 1e-9 * e.abs());
        }
    }

    #[test]
    fn derived_series_leading_terms() {
        let e = derived_e_series(3);
        // -23 / (32 pi^2 gamma s^7)
        assert!((e[0].coefficient + 23.0 / (32.0 * PI * PI)).abs() < 1e-15);
        assert_eq!((e[0].gamma_power, e[0].t_power, e[0].s_power), (-1, 0, -7));
        assert!((e[1].coefficient + 3.0 / (16.0 * PI * PI)).abs() < 1e-15);
        assert!(e[2].coefficient.abs() < 1e-15);
        let u = nat();
        let (s, t) = (1.0, 0.005);
        let series: f64 = e.iter().map(|x| x.eval(u.gamma(), t, s)).sum();
        let exact = em_kernels(s, t, &u).unwrap().0;
        assert!(((series - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn term_differentiation() {
        let s_terms = entropy_terms_from_free_energy(&PRINTED_E_SERIES);
        // -dE/dT of the published E is minus the published S, up to the T^7 term
        for (a, b) in s_terms.iter().zip(PRINTED_S_SERIES.iter()).take(4) {
            assert!((a.coefficient + b.coefficient).abs() < 1e-15 * b.coefficient.abs().max(1.0));
        }
        let u_terms = internal_energy_terms_from_free_energy(&PRINTED_E_SERIES);
        for (a, b) in u_terms.iter().zip(PRINTED_U_SERIES.iter()) {
            assert!((a.coefficient + b.coefficient).abs() < 1e-15 * b.coefficient.abs().max(1.0));
        }
    }

    #[test]
    fn sphere_thermo_consistent_and_positive() {
        let u = nat();
        let pair = SpherePair::new(1.0, 2.0, 10.0, 1.0, 1.0).unwrap();
        let n = NumericsPolicy::default();
        for &z in &[0.1, 1.0, 5.0] {
            let t = temperature_from_z(z, 10.0);
            let p = em_sphere_thermo(&pair, t, &u, &n).unwrap();
            assert!(p.entropy > 0.0);
            assert!(p.consistency_residual().abs() <= 1e-12 * p.e_interaction.abs());
        }
    }

    #[test]
    fn printed_sphere_series_negative_at_low_z() {
        let u = nat();
        let pair = SpherePair::new(1.0, 2.0, 10.0, 1.0, 1.0).unwrap();
        let n = NumericsPolicy::default();
        let low = em_entropy(&pair, temperature_from_z(0.1, 10.0), &u, &n, EmMethod::PrintedSeries).unwrap();
        assert!(low < 0.0);
    }

    #[test]
    fn moments_outside_p_range_use_radial_average() {
        let pair = SpherePair::new(1.0, 2.0, 10.0, 1.0, 1.0).unwrap();
        let n = NumericsPolicy::default();
        let m6 = sphere_moment(&pair, -6, &n).unwrap();
        let rule = GaussLegendre::new(32);
        let avg = (4.0 * PI).powi(2) * sphere_pair_average(&pair, &rule, 0.25, |s| s.powi(-6));
        assert!(((m6 - avg) / avg).abs() < 1e-12);
        assert!(sphere_moment(&pair, -7, &n).unwrap() > 0.0);
    }
}
