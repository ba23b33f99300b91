//! (3+1)D massless scalar field: per-point-pair kernels, the low-temperature
//! series, and the two-sphere entropy.
//!
//! With x = 2 gamma T s and G(x) = 1/(1 - e^{-x}),
//!
//! ```text
//! E_k = -(T / 16 pi s^2) G(x)
//! S_k =  (1 / 16 pi s^2) d/dx [x G(x)]
//! U_k =  (T / 16 pi s^2) x G'(x)
//! ```

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{p_factor, sphere_pair_average, SpherePair};
use crate::lattice::ExpPolyLattice;
use crate::numerics::NumericsPolicy;
use crate::quadrature::GaussLegendre;
use crate::thermo::{ThermoPoint, UnitSystem};

fn lattice() -> &'static ExpPolyLattice {
    static L: OnceLock<ExpPolyLattice> = OnceLock::new();
    L.get_or_init(|| ExpPolyLattice::new(&[1.0]))
}

fn check(s: f64, t: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain {
            function: "scalar3d kernel",
            detail: format!("separation must be positive, got {s}"),
        });
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain {
            function: "scalar3d kernel",
            detail: format!("temperature must be positive, got {t}"),
        });
    }
    Ok(())
}

/// (E, S, U) kernels for one point pair at separation s.
pub fn kernels_3d(s: f64, t: f64, units: &UnitSystem) -> Result<(f64, f64, f64)> {
    check(s, t)?;
    let x = 2.0 * units.gamma() * t * s;
    let v = lattice().eval(x);
    let pref = 1.0 / (16.0 * PI * s * s);
    Ok((-t * pref * v.g, pref * v.d_xg(), t * pref * v.x_dg))
}

pub fn free_energy_3d_kernel(s: f64, t: f64, units: &UnitSystem) -> Result<f64> {
    Ok(kernels_3d(s, t, units)?.0)
}

pub fn entropy_3d_kernel(s: f64, t: f64, units: &UnitSystem) -> Result<f64> {
    Ok(kernels_3d(s, t, units)?.1)
}

pub fn internal_energy_3d_kernel(s: f64, t: f64, units: &UnitSystem) -> Result<f64> {
    Ok(kernels_3d(s, t, units)?.2)
}

/// The published entropy kernel -(1/16 pi s^2)[G + x e^{-x} G^2]; it is
/// not -dE/dT of `free_energy_3d_kernel`.
pub fn printed_entropy_3d_kernel(s: f64, t: f64, units: &UnitSystem) -> Result<f64> {
    check(s, t)?;
    let x = 2.0 * units.gamma() * t * s;
    let v = lattice().eval(x);
    Ok(-(v.g - v.x_dg) / (16.0 * PI * s * s))
}

/// The published internal-energy kernel (gamma T^2 / 8 pi s) e^{-x} G^2.
pub fn printed_internal_energy_3d_kernel(s: f64, t: f64, units: &UnitSystem) -> Result<f64> {
    check(s, t)?;
    let x = 2.0 * units.gamma() * t * s;
    let v = lattice().eval(x);
    // e^{-x} G^2 = -G'(x) = -x_dg / x
    Ok(units.gamma() * t * t / (8.0 * PI * s) * (-v.x_dg / x))
}

/// Which low-temperature series to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LowTSeries {
    /// Expansion of -dE/dT: 1/2 + y/3 - 2y^3/45 + 2y^5/315 - ...
    #[default]
    Thermodynamic,
    /// Expansion of the published entropy kernel: 1/y + 1/2 + y^3/45 - 4y^5/945 + ...
    Printed,
}

/// Nonzero terms (power of y, coefficient) of the bracket in S_k, with
/// y = gamma T s, in increasing power.
pub fn low_t_series_terms(kind: LowTSeries, n_terms: usize) -> Vec<(i32, f64)> {
    let odd = n_terms as u32 + 2;
    let lat = lattice();
    // coefficients in x = 2y
    let in_x: Vec<(i32, f64)> = match kind {
        LowTSeries::Thermodynamic => lat.d_xg_expansion(odd),
        LowTSeries::Printed => {
            // 2 G - d/dx[x G]
            let g = lat.g_expansion(odd);
            let d = lat.d_xg_expansion(odd);
            g.iter()
                .map(|&(p, c)| {
                    let dc = d.iter().find(|(q, _)| *q == p).map_or(0.0, |t| t.1);
                    (p, 2.0 * c - dc)
                })
                .collect()
        }
    };
    in_x.into_iter()
        .map(|(p, c)| (p, c * 2f64.powi(p)))
        .filter(|&(_, c)| c.abs() > 1e-13)
        .take(n_terms)
        .collect()
}

/// A truncated series together with the magnitude of the first omitted term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub first_omitted: f64,
}

/// Partial sum of the low-temperature entropy series with `n_terms` nonzero
/// terms, in the same normalization as `entropy_3d_kernel`.
pub fn entropy_3d_low_t_expansion(
    s: f64,
    t: f64,
    units: &UnitSystem,
    n_terms: usize,
    kind: LowTSeries,
) -> Result<SeriesValue> {
    check(s, t)?;
    let y = units.gamma() * t * s;
    let terms = low_t_series_terms(kind, n_terms + 1);
    let sign = match kind {
        LowTSeries::Thermodynamic => 1.0,
        LowTSeries::Printed => -1.0,
    };
    let pref = sign / (16.0 * PI * s * s);
    let value: f64 = terms.iter().take(n_terms).map(|&(p, c)| c * y.powi(p)).sum();
    let omitted = terms.get(n_terms).map_or(0.0, |&(p, c)| (c * y.powi(p)).abs());
    Ok(SeriesValue {
        value: pref * value,
        first_omitted: pref.abs() * omitted,
    })
}

/// Two-sphere result: quadrature-exact thermodynamics plus the low-T series.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalar3DSphereResult {
    pub point: ThermoPoint,
    /// Thermodynamic series for S (P_{-2}, P_{-1}, P_1, P_3 terms).
    pub series_entropy: f64,
    /// Published series for S (P_{-3}, P_{-2}, P_1, P_3 terms).
    pub printed_series_entropy: f64,
    /// (power of T, coefficient) of the thermodynamic series.
    pub expansion_terms: Vec<(i32, f64)>,
}

/// chi1 chi2 (4 pi)^2 / (16 pi) times the surface-measure factor.
fn sphere_prefactor(pair: &SpherePair) -> f64 {
    pair.chi1 * pair.chi2 * pair.measure_factor() * (4.0 * PI).powi(2) / (16.0 * PI)
}

/// (power of gamma T, coefficient, power of s) for the sphere series.
fn sphere_series_layout(kind: LowTSeries) -> Vec<(i32, f64, i32)> {
    low_t_series_terms(kind, 4)
        .into_iter()
        .map(|(p, c)| (p, c, p - 2))
        .collect()
}

/// Series S = pref * sum_j c_j (gamma T)^j R^{j-2} P_{j-2}, as (T power, coefficient).
fn sphere_series_terms(pair: &SpherePair, units: &UnitSystem, kind: LowTSeries) -> Result<Vec<(i32, f64)>> {
    let r = pair.center_distance();
    let sign = match kind {
        LowTSeries::Thermodynamic => 1.0,
        LowTSeries::Printed => -1.0,
    };
    let pref = sign * sphere_prefactor(pair);
    sphere_series_layout(kind)
        .into_iter()
        .map(|(j, c, q)| Ok((j, pref * c * units.gamma().powi(j) * r.powi(q) * p_factor(q, pair)?)))
        .collect()
}

fn eval_poly(terms: &[(i32, f64)], t: f64) -> f64 {
    terms.iter().map(|&(p, c)| c * t.powi(p)).sum()
}

/// Exact (E, S, U) for two spheres, from the one-dimensional distance
/// density and the closed-form l-sum.
pub fn two_sphere_thermo_3d(
    pair: &SpherePair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<ThermoPoint> {
    check(pair.center_distance(), t)?;
    let pref = sphere_prefactor(pair);
    let rule = GaussLegendre::new(numerics.radial_order);
    let panel = sphere_panel(pair);
    let x_per_s = 2.0 * units.gamma() * t;
    let lat = lattice();
    let mut e = 0.0;
    let mut s = 0.0;
    let mut u = 0.0;
    if pref != 0.0 {
        e = -t * pref * sphere_pair_average(pair, &rule, panel, |d| lat.eval(x_per_s * d).g / (d * d));
        s = pref * sphere_pair_average(pair, &rule, panel, |d| lat.eval(x_per_s * d).d_xg() / (d * d));
        u = t * pref * sphere_pair_average(pair, &rule, panel, |d| lat.eval(x_per_s * d).x_dg / (d * d));
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

/// Panel length for the radial reduction: a quarter of the smallest of the
/// gap and the radii.
pub(crate) fn sphere_panel(pair: &SpherePair) -> f64 {
    0.25 * pair.min_distance().min(pair.radius_a()).min(pair.radius_b())
}

pub fn two_sphere_entropy_3d(
    pair: &SpherePair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<Scalar3DSphereResult> {
    let point = two_sphere_thermo_3d(pair, t, units, numerics)?;
    let expansion_terms = sphere_series_terms(pair, units, LowTSeries::Thermodynamic)?;
    let printed = sphere_series_terms(pair, units, LowTSeries::Printed)?;
    Ok(Scalar3DSphereResult {
        point,
        series_entropy: eval_poly(&expansion_terms, t),
        printed_series_entropy: eval_poly(&printed, t),
        expansion_terms,
    })
}
