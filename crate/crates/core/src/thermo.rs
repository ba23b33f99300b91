//! Units, Matsubara sums and the thermodynamic relations
//! S = -dE/dT and U = -T^2 d/dT (E/T).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sum::KahanSum;

/// CODATA 2018 exact constants.
pub mod codata {
    /// Boltzmann constant, J/K.
    pub const BOLTZMANN: f64 = 1.380_649e-23;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Speed of light, m/s.
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitMode {
    /// hbar = c = k_B = 1.
    Natural,
    /// Lengths in nm, temperatures in K, energies in units of k_B * 1 K.
    SiNmKelvin,
}

/// Unit convention plus the thermal constant gamma = 2 pi k_B / (hbar c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    gamma: f64,
    mode: UnitMode,
}

impl UnitSystem {
    pub fn natural() -> Self {
        Self {
            gamma: 2.0 * PI,
            mode: UnitMode::Natural,
        }
    }

    pub fn si_nm_kelvin() -> Self {
        let per_metre = 2.0 * PI * codata::BOLTZMANN / (codata::HBAR * codata::SPEED_OF_LIGHT);
        Self {
            gamma: per_metre * 1e-9,
            mode: UnitMode::SiNmKelvin,
        }
    }

    pub fn new(mode: UnitMode) -> Self {
        match mode {
            UnitMode::Natural => Self::natural(),
            UnitMode::SiNmKelvin => Self::si_nm_kelvin(),
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mode(&self) -> UnitMode {
        self.mode
    }

    /// Matsubara wavenumber nu_l / c = gamma l T.
    #[inline]
    pub fn alpha(&self, l: u64, temperature: f64) -> f64 {
        self.gamma * l as f64 * temperature
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::natural()
    }
}

/// The Matsubara index range l_start..=l_max at temperature T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraGrid {
    l_start: u64,
    l_max: u64,
    temperature: f64,
    gamma: f64,
}

impl MatsubaraGrid {
    pub fn new(units: &UnitSystem, temperature: f64, l_start: u64, l_max: u64) -> Result<Self> {
        if l_start > 1 {
            return Err(Error::domain("MatsubaraGrid", "l_start must be 0 or 1"));
        }
        if l_max < 1 || l_max < l_start {
            return Err(Error::domain("MatsubaraGrid", "l_max must be >= max(1, l_start)"));
        }
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::domain("MatsubaraGrid", format!("T = {temperature}")));
        }
        Ok(Self {
            l_start,
            l_max,
            temperature,
            gamma: units.gamma(),
        })
    }

    pub fn l_start(&self) -> u64 {
        self.l_start
    }

    pub fn l_max(&self) -> u64 {
        self.l_max
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn alpha(&self, l: u64) -> f64 {
        self.gamma * l as f64 * self.temperature
    }
}

/// Result of a truncated Matsubara sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumOutcome {
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: u64,
    pub converged: bool,
}

impl SumOutcome {
    pub fn into_result(self, what: &'static str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NotConverged {
                what,
                terms: self.terms_used,
                tail_bound: self.tail_bound,
            })
        }
    }
}

/// Sums `summand(l, alpha_l)` over the grid in increasing l with compensated
/// addition. Stops once the geometric tail bound |t_l| r/(1-r), with r the
/// observed ratio |t_l/t_{l-1}|, drops below `tol * |sum|`.
pub fn matsubara_sum<F>(summand: F, grid: &MatsubaraGrid, tol: f64) -> SumOutcome
where
    F: Fn(u64, f64) -> f64,
{
    let mut acc = KahanSum::new();
    let mut prev: Option<f64> = None;
    let mut tail = f64::INFINITY;
    let mut used = 0;
    for l in grid.l_start..=grid.l_max {
        let term = summand(l, grid.alpha(l));
        acc.add(term);
        used += 1;
        if term == 0.0 {
            tail = 0.0;
            break;
        }
        if let Some(p) = prev {
            let r = (term / p).abs();
            tail = if r < 1.0 {
                term.abs() * r / (1.0 - r)
            } else {
                f64::INFINITY
            };
            if tail <= tol * acc.value().abs() {
                break;
            }
        }
        prev = Some(term);
    }
    let value = acc.value();
    SumOutcome {
        value,
        tail_bound: tail,
        terms_used: used,
        converged: tail <= tol * value.abs(),
    }
}

/// A derivative estimate with an error estimate from the Richardson step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

/// Default finite-difference step for temperature derivatives.
pub fn default_step(temperature: f64) -> f64 {
    1e-4 * temperature
}

/// Central difference with step h and h/2, combined by one Richardson step.
pub fn richardson_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> Result<Derivative> {
    if !(h >= 64.0 * f64::EPSILON * x.abs()) || h == 0.0 {
        return Err(Error::StepUnderflow { step: h, at: x });
    }
    let eval = |t: f64| {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("finite-difference stencil"))
        }
    };
    let d_h = (eval(x + h)? - eval(x - h)?) / (2.0 * h);
    let h2 = 0.5 * h;
    let d_h2 = (eval(x + h2)? - eval(x - h2)?) / (2.0 * h2);
    let value = (4.0 * d_h2 - d_h) / 3.0;
    Ok(Derivative {
        value,
        error: (value - d_h2).abs(),
    })
}

fn check_stencil(temperature: f64, h: f64) -> Result<()> {
    if !(temperature - h > 0.0) {
        return Err(Error::domain(
            "finite difference",
            format!("T - h = {} is not positive", temperature - h),
        ));
    }
    Ok(())
}

/// S = -dE/dT by Richardson-extrapolated central differences.
pub fn entropy_from_free_energy<F: Fn(f64) -> f64>(free_energy: F, temperature: f64, h: f64) -> Result<Derivative> {
    check_stencil(temperature, h)?;
    let d = richardson_derivative(free_energy, temperature, h)?;
    Ok(Derivative {
        value: -d.value,
        error: d.error,
    })
}

/// U = -T^2 d/dT (E/T) by Richardson-extrapolated central differences.
pub fn internal_energy_from_free_energy<F: Fn(f64) -> f64>(
    free_energy: F,
    temperature: f64,
    h: f64,
) -> Result<Derivative> {
    check_stencil(temperature, h)?;
    let d = richardson_derivative(|t| free_energy(t) / t, temperature, h)?;
    let t2 = temperature * temperature;
    Ok(Derivative {
        value: -t2 * d.value,
        error: t2 * d.error,
    })
}

/// Thermodynamic state at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub temperature: f64,
    pub e_self: f64,
    pub e_interaction: f64,
    pub entropy: f64,
    pub internal_energy: f64,
    /// dE/dr for geometries with a scalar separation.
    pub force: Option<f64>,
}

impl ThermoPoint {
    pub fn e_total(&self) -> f64 {
        self.e_self + self.e_interaction
    }

    /// U - (E + T S).
    pub fn consistency_residual(&self) -> f64 {
        self.internal_energy - (self.e_total() + self.temperature * self.entropy)
    }
}

/// |a - b| <= rel * max(|a|, |b|) or |a - b| <= abs_floor.
pub fn approx_eq(a: f64, b: f64, rel: f64, abs_floor: f64) -> bool {
    let d = (a - b).abs();
    d <= abs_floor || d <= rel * a.abs().max(b.abs())
}

/// Relative deviation |a - b| / max(|a|, |b|), zero when both vanish.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_gamma_is_two_pi() {
        assert_eq!(UnitSystem::natural().gamma(), 2.0 * PI);
    }

    #[test]
    fn si_gamma_from_codata() {
        let g = UnitSystem::si_nm_kelvin().gamma();
        assert!((g - 2.743_887e-6).abs() < 1e-11, "{g}");
    }

    #[test]
    fn zero_summand() {
        let grid = MatsubaraGrid::new(&UnitSystem::natural(), 1.0, 1, 100).unwrap();
        let out = matsubara_sum(|_, _| 0.0, &grid, 1e-15);
        assert_eq!((out.value, out.tail_bound, out.terms_used), (0.0, 0.0, 1));
        assert!(out.converged);
    }

    #[test]
    fn geometric_series() {
        let grid = MatsubaraGrid::new(&UnitSystem::natural(), 1.0, 1, 10_000).unwrap();
        let tol = 1e-14;
        let out = matsubara_sum(|l, _| (-(l as f64)).exp(), &grid, tol);
        let exact = 1.0 / (std::f64::consts::E - 1.0);
        assert!(out.converged);
        assert!((out.value - exact).abs() <= 2.0 * tol * exact);
    }

    #[test]
    fn non_convergence_is_reported() {
        let grid = MatsubaraGrid::new(&UnitSystem::natural(), 1.0, 1, 50).unwrap();
        let out = matsubara_sum(|l, _| 1.0 / (l as f64).powi(2), &grid, 1e-15);
        assert!(!out.converged);
        assert_eq!(out.terms_used, 50);
        assert!(matches!(
            out.into_result("test"),
            Err(Error::NotConverged { terms: 50, .. })
        ));
    }

    #[test]
    fn grid_validation() {
        let u = UnitSystem::natural();
        assert!(MatsubaraGrid::new(&u, 1.0, 2, 10).is_err());
        assert!(MatsubaraGrid::new(&u, -1.0, 0, 10).is_err());
        assert!(MatsubaraGrid::new(&u, 1.0, 0, 0).is_err());
        let g = MatsubaraGrid::new(&u, 0.5, 0, 10).unwrap();
        assert!((g.alpha(3) - 2.0 * PI * 3.0 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn trivial_thermodynamics() {
        let t = 2.0;
        let h = default_step(t);
        let s = entropy_from_free_energy(|_| 3.0, t, h).unwrap();
        assert_eq!(s.value, 0.0);
        let s = entropy_from_free_energy(|t| -1.5 * t, t, h).unwrap();
        assert!((s.value - 1.5).abs() < 1e-10);
        let u = internal_energy_from_free_energy(|t| -1.5 * t, t, h).unwrap();
        assert!(u.value.abs() < 1e-9);
        let u = internal_energy_from_free_energy(|_| 3.0, t, h).unwrap();
        assert!((u.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn fd_errors() {
        assert!(matches!(
            entropy_from_free_energy(|t| t, 1.0, 1e-20),
            Err(Error::StepUnderflow { .. })
        ));
        assert!(entropy_from_free_energy(|t| t, 1.0, 2.0).is_err());
        assert!(matches!(
            entropy_from_free_energy(|_| f64::NAN, 1.0, 1e-3),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn richardson_is_fourth_order() {
        let d = richardson_derivative(f64::sin, 0.7, 1e-2).unwrap();
        assert!((d.value - 0.7f64.cos()).abs() < 1e-10);
    }
}
