//! Field configurations, temperature grids and the built-in figure scenarios.

use std::f64::consts::PI;
use std::fmt;

use crate::em3d::{em_sphere_thermo, sphere_series, PRINTED_E_SERIES, PRINTED_SPHERE_S_SERIES, PRINTED_U_SERIES};
use crate::error::{Error, Result};
use crate::geometry::{RibbonPair, SpherePair};
use crate::numerics::NumericsPolicy;
use crate::scalar1d::evaluate_1d;
use crate::scalar2d::{evaluate_2d, PlanarBodyPair};
use crate::scalar3d::two_sphere_thermo_3d;
use crate::thermo::{ThermoPoint, UnitSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Scalar1D,
    Scalar2D,
    Scalar3D,
    Em,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Scalar1D => "scalar1d",
            FieldKind::Scalar2D => "scalar2d",
            FieldKind::Scalar3D => "scalar3d",
            FieldKind::Em => "em",
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A field together with the geometry and susceptibilities of both bodies.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldConfig {
    Scalar1D(RibbonPair),
    Scalar2D(PlanarBodyPair),
    Scalar3D(SpherePair),
    Em(SpherePair),
}

impl FieldConfig {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldConfig::Scalar1D(_) => FieldKind::Scalar1D,
            FieldConfig::Scalar2D(_) => FieldKind::Scalar2D,
            FieldConfig::Scalar3D(_) => FieldKind::Scalar3D,
            FieldConfig::Em(_) => FieldKind::Em,
        }
    }

    /// Closed-form thermodynamics at one temperature.
    pub fn closed_thermo(&self, t: f64, units: &UnitSystem, numerics: &NumericsPolicy) -> Result<ThermoPoint> {
        match self {
            FieldConfig::Scalar1D(p) => Ok(evaluate_1d(p, t, units)?.point),
            FieldConfig::Scalar2D(p) => Ok(evaluate_2d(p, t, units, numerics)?.point),
            FieldConfig::Scalar3D(p) => two_sphere_thermo_3d(p, t, units, numerics),
            FieldConfig::Em(p) => em_sphere_thermo(p, t, units, numerics),
        }
    }

    /// Closed-form total free energy.
    pub fn closed_free_energy(&self, t: f64, units: &UnitSystem, numerics: &NumericsPolicy) -> Result<f64> {
        Ok(self.closed_thermo(t, units, numerics)?.e_total())
    }

    /// The published low-temperature series (EM only).
    pub fn series_thermo(&self, t: f64, units: &UnitSystem, numerics: &NumericsPolicy) -> Result<ThermoPoint> {
        match self {
            FieldConfig::Em(p) => Ok(ThermoPoint {
                temperature: t,
                e_self: 0.0,
                e_interaction: sphere_series(&PRINTED_E_SERIES, p, t, units, numerics)?,
                entropy: sphere_series(&PRINTED_SPHERE_S_SERIES, p, t, units, numerics)?,
                internal_energy: sphere_series(&PRINTED_U_SERIES, p, t, units, numerics)?,
                force: None,
            }),
            other => Err(Error::domain(
                "series_thermo",
                format!("no series evaluation for {} fields", other.kind()),
            )),
        }
    }

    /// Same geometry with chi1 chi2 replaced by `product` (chi1 = product, chi2 = 1).
    pub fn with_chi_product(&self, product: f64) -> Self {
        let mut c = self.clone();
        match &mut c {
            FieldConfig::Scalar1D(p) => (p.chi1, p.chi2) = (product, 1.0),
            FieldConfig::Scalar2D(p) => (p.chi1, p.chi2) = (product, 1.0),
            FieldConfig::Scalar3D(p) | FieldConfig::Em(p) => (p.chi1, p.chi2) = (product, 1.0),
        }
        c
    }

    /// Center distance for sphere geometries.
    pub fn center_distance(&self) -> Option<f64> {
        match self {
            FieldConfig::Scalar3D(p) | FieldConfig::Em(p) => Some(p.center_distance()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// What the grid variable means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridAxis {
    Temperature,
    /// Z = 4 pi R T with the given center distance R.
    Z {
        center_distance: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub spacing: Spacing,
    pub axis: GridAxis,
}

impl TemperatureGrid {
    pub fn new(min: f64, max: f64, steps: usize, spacing: Spacing, axis: GridAxis) -> Result<Self> {
        let ok = min.is_finite() && max.is_finite() && min > 0.0 && max >= min && steps >= 1;
        if !ok || (steps == 1 && max != min) {
            return Err(Error::domain(
                "TemperatureGrid",
                format!("need 0 < min <= max and steps >= 1, got [{min}, {max}] x {steps}"),
            ));
        }
        Ok(Self {
            min,
            max,
            steps,
            spacing,
            axis,
        })
    }

    /// Grid variable values, in order.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i + 1 == self.steps {
                    return self.max;
                }
                let f = i as f64 / n;
                match self.spacing {
                    Spacing::Linear => self.min + f * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .map(|v| v.clamp(self.min, self.max))
            .collect()
    }

    pub fn temperature(&self, value: f64) -> f64 {
        match self.axis {
            GridAxis::Temperature => value,
            GridAxis::Z { center_distance } => value / (4.0 * PI * center_distance),
        }
    }

    pub fn axis_label(&self) -> &'static str {
        match self.axis {
            GridAxis::Temperature => "T",
            GridAxis::Z { .. } => "Z",
        }
    }
}

/// A named, fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub config: FieldConfig,
    pub grid: TemperatureGrid,
    pub units: UnitSystem,
    pub numerics: NumericsPolicy,
}

/// Chi products of the four EM figure curves.
pub const FIG4_CHI_PRODUCTS: [f64; 4] = [1.0, 6.0, 20.0, 50.0];

fn ribbon(name: &str, desc: &str, w1: f64, gap: f64, w2: f64, chi1: f64, chi2: f64) -> Scenario {
    Scenario {
        name: name.into(),
        description: desc.into(),
        config: FieldConfig::Scalar1D(RibbonPair::from_widths(w1, gap, w2, chi1, chi2).expect("valid ribbons")),
        grid: TemperatureGrid::new(1e-3, 10.0, 200, Spacing::Log, GridAxis::Temperature).expect("valid grid"),
        units: UnitSystem::natural(),
        numerics: NumericsPolicy::default(),
    }
}

fn spheres_3d(name: &str, desc: &str, r: f64) -> Scenario {
    Scenario {
        name: name.into(),
        description: desc.into(),
        config: FieldConfig::Scalar3D(SpherePair::new(1.0, 2.0, r, 11.68, 2.6).expect("valid spheres")),
        grid: TemperatureGrid::new(1e-3, 10.0, 50, Spacing::Log, GridAxis::Temperature).expect("valid grid"),
        units: UnitSystem::natural(),
        numerics: NumericsPolicy::default(),
    }
}

/// The EM two-sphere scenario for one chi product.
pub fn fig4_scenario(chi_product: f64) -> Scenario {
    let r = 10.0;
    Scenario {
        name: format!("fig4-chi{chi_product}"),
        description: format!("EM two spheres a=1 b=2 R=10, chi1 chi2 = {chi_product}, Z sweep"),
        config: FieldConfig::Em(SpherePair::new(1.0, 2.0, r, chi_product, 1.0).expect("valid spheres")),
        grid: TemperatureGrid::new(0.1, 10.0, 100, Spacing::Log, GridAxis::Z { center_distance: r })
            .expect("valid grid"),
        units: UnitSystem::natural(),
        numerics: NumericsPolicy::default(),
    }
}

/// Two unit disks with unit gap in the (2+1)D field.
pub fn disks_2d_scenario() -> Scenario {
    Scenario {
        name: "disks-2d".into(),
        description: "2+1D unit disks, gap 1, chi1 = chi2 = 1".into(),
        config: FieldConfig::Scalar2D(PlanarBodyPair::disks(1.0, 3.0, 1.0, 1.0).expect("valid disks")),
        grid: TemperatureGrid::new(0.1, 10.0, 20, Spacing::Log, GridAxis::Temperature).expect("valid grid"),
        units: UnitSystem::natural(),
        numerics: NumericsPolicy {
            planar_order: (8, 16),
            ..NumericsPolicy::default()
        },
    }
}

/// Every built-in scenario in catalogue order.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let mut v = vec![
        ribbon(
            "fig1-blue",
            "1+1D ribbons b-a=2 c-b=8 d-c=4, chi=1",
            2.0,
            8.0,
            4.0,
            1.0,
            1.0,
        ),
        ribbon(
            "fig1-red",
            "1+1D ribbons b-a=2 c-b=8 d-c=8, chi=1",
            2.0,
            8.0,
            8.0,
            1.0,
            1.0,
        ),
        ribbon(
            "fig1-green",
            "1+1D ribbons b-a=10 c-b=8 d-c=8, chi=1",
            10.0,
            8.0,
            8.0,
            1.0,
            1.0,
        ),
        ribbon(
            "fig2-blue",
            "1+1D ribbons 1/4/1, chi1=11.68 chi2=2.6",
            1.0,
            4.0,
            1.0,
            11.68,
            2.6,
        ),
        ribbon(
            "fig2-red",
            "1+1D ribbons 1/4/1, chi1=11.68 chi2=1000",
            1.0,
            4.0,
            1.0,
            11.68,
            1000.0,
        ),
        ribbon(
            "fig2-green",
            "1+1D ribbons 1/4/1, chi1=11.68 chi2=6000",
            1.0,
            4.0,
            1.0,
            11.68,
            6000.0,
        ),
        ribbon(
            "fig2-orange",
            "1+1D ribbons 1/4/1, chi1=2 chi2=3",
            1.0,
            4.0,
            1.0,
            2.0,
            3.0,
        ),
        spheres_3d("fig3-blue", "3+1D spheres a=1 b=2 R=10, chi1=11.68 chi2=2.6", 10.0),
        spheres_3d("fig3-red", "3+1D spheres a=1 b=2 R=20, chi1=11.68 chi2=2.6", 20.0),
    ];
    v.extend(FIG4_CHI_PRODUCTS.iter().map(|&c| fig4_scenario(c)));
    v.push(disks_2d_scenario());
    v
}

/// Looks up a built-in scenario; `fig4` is the chi1 chi2 = 1 curve.
pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    let name = if name == "fig4" { "fig4-chi1" } else { name };
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = TemperatureGrid::new(0.01, 10.0, 20, Spacing::Log, GridAxis::Temperature).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 20);
        assert_eq!(v[0], 0.01);
        assert_eq!(v[19], 10.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert!(TemperatureGrid::new(1.0, 0.5, 3, Spacing::Linear, GridAxis::Temperature).is_err());
    }

    #[test]
    fn z_axis_maps_to_temperature() {
        let g = TemperatureGrid::new(0.1, 10.0, 5, Spacing::Log, GridAxis::Z { center_distance: 10.0 }).unwrap();
        assert!((g.temperature(4.0 * PI * 10.0) - 1.0).abs() < 1e-15);
        assert_eq!(g.axis_label(), "Z");
    }

    #[test]
    fn catalogue_is_complete() {
        let names: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
        for n in [
            "fig1-blue",
            "fig1-red",
            "fig1-green",
            "fig2-blue",
            "fig2-red",
            "fig2-green",
            "fig2-orange",
            "fig3-blue",
            "fig3-red",
            "fig4-chi1",
            "fig4-chi6",
            "fig4-chi20",
            "fig4-chi50",
        ] {
            assert!(names.iter().any(|x| x == n), "{n} missing");
        }
        assert!(builtin_scenario("fig4").is_some());
        assert!(builtin_scenario("nope").is_none());
    }

    #[test]
    fn chi_product_override() {
        let s = builtin_scenario("fig4").unwrap();
        match s.config.with_chi_product(20.0) {
            FieldConfig::Em(p) => assert_eq!(p.chi1 * p.chi2, 20.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn series_only_for_em() {
        let s = builtin_scenario("fig1-blue").unwrap();
        assert!(s.config.series_thermo(1.0, &s.units, &s.numerics).is_err());
    }
}
