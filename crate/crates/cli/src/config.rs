//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! [system]
//! field = scalar1d            # scalar1d | scalar2d | scalar3d | em
//! method = closed             # closed | oracle | series | both
//! units = natural             # natural | si-nm-k
//!
//! [geometry]
//! a = 0                       # scalar1d: a b c d, or width1 gap width2
//! b = 2
//! c = 10
//! d = 14
//!
//! [material]
//! chi1 = 1                    # or chi_product = x
//! chi2 = 1
//!
//! [temperature]
//! min = 0.001
//! max = 10
//! steps = 200
//! spacing = log               # log | linear
//! axis = T                    # T | Z (sphere fields only)
//!
//! [numerics]
//! angular_order = 64
//!
//! [output]
//! path = sweep.csv
//! ```
//!
//! Any key may also be written as `section.key = value` outside a header.
//! Planar bodies: `body1 = disk cx cy r` or `body1 = rect cx cy hx hy`.
//! Sphere geometry: `radius_a`, `radius_b`, `center_distance`,
//! `measure = solid-angle | area`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use casimir_core::geometry::{RibbonPair, SpherePair, SurfaceMeasure};
use casimir_core::scalar2d::{PlanarBody, PlanarBodyPair};
use casimir_core::system::{FieldConfig, FieldKind, GridAxis, Scenario, Spacing, TemperatureGrid};
use casimir_core::thermo::UnitSystem;
use casimir_core::NumericsPolicy;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(k) = &self.key {
            write!(f, "`{k}`: ")?;
        }
        f.write_str(&self.message)
    }
}

fn err(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        key: key.map(str::to_owned),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Closed,
    Oracle,
    Series,
    Both,
}

impl Method {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "closed" => Some(Method::Closed),
            "oracle" => Some(Method::Oracle),
            "series" => Some(Method::Series),
            "both" => Some(Method::Both),
            _ => None,
        }
    }
}

const SECTIONS: [&str; 6] = ["system", "geometry", "material", "temperature", "numerics", "output"];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// `section.key -> value` with line numbers.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(Some(line), None, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(Some(line), None, format!("unknown section [{name}]")));
                }
                section = Some(name.to_owned());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(Some(line), None, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(err(Some(line), Some(key), "empty key or value"));
            }
            let full = match key.split_once('.') {
                Some((s, k)) => {
                    if !SECTIONS.contains(&s) {
                        return Err(err(Some(line), Some(key), format!("unknown section `{s}`")));
                    }
                    format!("{s}.{k}")
                }
                None => match &section {
                    Some(s) => format!("{s}.{key}"),
                    None => return Err(err(Some(line), Some(key), "key outside any section")),
                },
            };
            if let Some(prev) = entries.get(&full) {
                let prev: &Entry = prev;
                return Err(err(
                    Some(line),
                    Some(&full),
                    format!("duplicate key (first set on line {})", prev.line),
                ));
            }
            entries.insert(
                full,
                Entry {
                    value: value.to_owned(),
                    line,
                },
            );
        }
        Ok(Self { entries })
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.entries.keys().any(|k| k.starts_with(&prefix))
    }

    fn str(&self, key: &str) -> Option<(&str, usize)> {
        self.get(key).map(|e| (e.value.as_str(), e.line))
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| {
                    err(
                        Some(e.line),
                        Some(key),
                        format!("expected a real number, got `{}`", e.value),
                    )
                }),
        }
    }

    fn int(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<u64>().map(Some).map_err(|_| {
                err(
                    Some(e.line),
                    Some(key),
                    format!("expected a non-negative integer, got `{}`", e.value),
                )
            }),
        }
    }

    fn required(&self, key: &str) -> Result<f64, ConfigError> {
        self.real(key)?
            .ok_or_else(|| err(None, Some(key), "missing required key"))
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.get(key).map(|e| e.line)
    }
}

/// Fully resolved sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub field: FieldConfig,
    pub method: Method,
    pub grid: TemperatureGrid,
    pub units: UnitSystem,
    pub numerics: NumericsPolicy,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            name: s.name.clone(),
            field: s.config.clone(),
            method: Method::Closed,
            grid: s.grid,
            units: s.units,
            numerics: s.numerics.clone(),
            output: None,
        }
    }

    /// Parses a configuration file's text. With `base`, keys override the
    /// base settings and every section is optional; without it `[system]`,
    /// `[geometry]`, `[material]` and `[temperature]` are required.
    pub fn from_text(text: &str, base: Option<RunConfig>) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        let known: &[&str] = &[
            "system.field",
            "system.method",
            "system.units",
            "geometry.a",
            "geometry.b",
            "geometry.c",
            "geometry.d",
            "geometry.width1",
            "geometry.gap",
            "geometry.width2",
            "geometry.body1",
            "geometry.body2",
            "geometry.radius_a",
            "geometry.radius_b",
            "geometry.center_distance",
            "geometry.measure",
            "material.chi1",
            "material.chi2",
            "material.chi_product",
            "temperature.min",
            "temperature.max",
            "temperature.steps",
            "temperature.spacing",
            "temperature.axis",
            "numerics.matsubara_tol",
            "numerics.l_max",
            "numerics.fd_rel_step",
            "numerics.radial_order",
            "numerics.angular_order",
            "numerics.planar_order",
            "numerics.mc_samples",
            "numerics.mc_seed",
            "numerics.consistency_tol",
            "output.path",
        ];
        for (k, e) in &raw.entries {
            if !known.contains(&k.as_str()) {
                return Err(err(Some(e.line), Some(k), "unknown key"));
            }
        }

        let kind = match raw.str("system.field") {
            Some((v, line)) => Some(parse_field(v).ok_or_else(|| {
                err(
                    Some(line),
                    Some("system.field"),
                    format!("unknown field `{v}` (scalar1d|scalar2d|scalar3d|em)"),
                )
            })?),
            None => None,
        };
        let kind = match (kind, &base) {
            (Some(k), _) => k,
            (None, Some(b)) => b.field.kind(),
            (None, None) => return Err(err(None, Some("system.field"), "missing required key")),
        };
        if let Some(b) = &base {
            if b.field.kind() != kind && !raw.has_section("geometry") {
                return Err(err(
                    raw.line_of("system.field"),
                    Some("system.field"),
                    "changing the field requires a [geometry] block",
                ));
            }
        }

        check_geometry_keys(&raw, kind)?;

        let method = match raw.str("system.method") {
            Some((v, line)) => Method::parse(v).ok_or_else(|| {
                err(
                    Some(line),
                    Some("system.method"),
                    format!("unknown method `{v}` (closed|oracle|series|both)"),
                )
            })?,
            None => base.as_ref().map_or(Method::Closed, |b| b.method),
        };
        let units = match raw.str("system.units") {
            Some(("natural", _)) => UnitSystem::natural(),
            Some(("si-nm-k", _)) => UnitSystem::si_nm_kelvin(),
            Some((v, line)) => {
                return Err(err(
                    Some(line),
                    Some("system.units"),
                    format!("unknown units `{v}` (natural|si-nm-k)"),
                ))
            }
            None => base.as_ref().map_or_else(UnitSystem::natural, |b| b.units),
        };

        let (chi1, chi2) = material(&raw, base.as_ref())?;
        let field = match &base {
            Some(b) if !raw.has_section("geometry") => {
                let product_only = raw.get("material.chi_product").is_some();
                match (raw.has_section("material"), product_only) {
                    (false, _) => b.field.clone(),
                    (true, true) => b.field.with_chi_product(chi1 * chi2),
                    (true, false) => with_chis(&b.field, chi1, chi2),
                }
            }
            _ => geometry(&raw, kind, chi1, chi2)?,
        };

        let numerics = numerics(
            &raw,
            base.as_ref()
                .map_or_else(NumericsPolicy::default, |b| b.numerics.clone()),
        )?;
        let grid = temperature(&raw, &field, base.as_ref().map(|b| b.grid))?;
        let output = raw
            .str("output.path")
            .map(|(v, _)| PathBuf::from(v))
            .or_else(|| base.as_ref().and_then(|b| b.output.clone()));
        Ok(Self {
            name: base.as_ref().map_or_else(|| "config".to_owned(), |b| b.name.clone()),
            field,
            method,
            grid,
            units,
            numerics,
            output,
        })
    }
}

fn parse_field(v: &str) -> Option<FieldKind> {
    match v {
        "scalar1d" => Some(FieldKind::Scalar1D),
        "scalar2d" => Some(FieldKind::Scalar2D),
        "scalar3d" => Some(FieldKind::Scalar3D),
        "em" => Some(FieldKind::Em),
        _ => None,
    }
}

fn with_chis(field: &FieldConfig, chi1: f64, chi2: f64) -> FieldConfig {
    let mut f = field.clone();
    match &mut f {
        FieldConfig::Scalar1D(p) => (p.chi1, p.chi2) = (chi1, chi2),
        FieldConfig::Scalar2D(p) => (p.chi1, p.chi2) = (chi1, chi2),
        FieldConfig::Scalar3D(p) | FieldConfig::Em(p) => (p.chi1, p.chi2) = (chi1, chi2),
    }
    f
}

fn current_chis(field: &FieldConfig) -> (f64, f64) {
    match field {
        FieldConfig::Scalar1D(p) => (p.chi1, p.chi2),
        FieldConfig::Scalar2D(p) => (p.chi1, p.chi2),
        FieldConfig::Scalar3D(p) | FieldConfig::Em(p) => (p.chi1, p.chi2),
    }
}

fn material(raw: &RawConfig, base: Option<&RunConfig>) -> Result<(f64, f64), ConfigError> {
    let product = raw.real("material.chi_product")?;
    let chi1 = raw.real("material.chi1")?;
    let chi2 = raw.real("material.chi2")?;
    let check = |v: f64, key: &str| {
        if v >= 0.0 {
            Ok(v)
        } else {
            Err(err(raw.line_of(key), Some(key), "susceptibility must be non-negative"))
        }
    };
    if let Some(p) = product {
        if chi1.is_some() || chi2.is_some() {
            return Err(err(
                raw.line_of("material.chi_product"),
                Some("material.chi_product"),
                "cannot be combined with chi1/chi2",
            ));
        }
        return Ok((check(p, "material.chi_product")?, 1.0));
    }
    let (d1, d2) = base.map_or((f64::NAN, f64::NAN), |b| current_chis(&b.field));
    let chi1 = chi1.unwrap_or(d1);
    let chi2 = chi2.unwrap_or(d2);
    if chi1.is_nan() {
        return Err(err(None, Some("material.chi1"), "missing required key"));
    }
    if chi2.is_nan() {
        return Err(err(None, Some("material.chi2"), "missing required key"));
    }
    Ok((check(chi1, "material.chi1")?, check(chi2, "material.chi2")?))
}

fn check_geometry_keys(raw: &RawConfig, kind: FieldKind) -> Result<(), ConfigError> {
    let allowed: &[&str] = match kind {
        FieldKind::Scalar1D => &["a", "b", "c", "d", "width1", "gap", "width2"],
        FieldKind::Scalar2D => &["body1", "body2"],
        FieldKind::Scalar3D | FieldKind::Em => &["radius_a", "radius_b", "center_distance", "measure"],
    };
    for (k, e) in &raw.entries {
        if let Some(g) = k.strip_prefix("geometry.") {
            if !allowed.contains(&g) {
                return Err(err(
                    Some(e.line),
                    Some(k),
                    format!("not a {} geometry key", kind.name()),
                ));
            }
        }
    }
    Ok(())
}

fn geometry(raw: &RawConfig, kind: FieldKind, chi1: f64, chi2: f64) -> Result<FieldConfig, ConfigError> {
    let geo_err = |e: casimir_core::Error| err(None, Some("geometry"), e.to_string());
    match kind {
        FieldKind::Scalar1D => {
            let by_bounds = ["a", "b", "c", "d"]
                .iter()
                .any(|k| raw.get(&format!("geometry.{k}")).is_some());
            let pair = if by_bounds {
                if ["width1", "gap", "width2"]
                    .iter()
                    .any(|k| raw.get(&format!("geometry.{k}")).is_some())
                {
                    return Err(err(None, Some("geometry"), "use either a b c d or width1 gap width2"));
                }
                RibbonPair::new(
                    raw.required("geometry.a")?,
                    raw.required("geometry.b")?,
                    raw.required("geometry.c")?,
                    raw.required("geometry.d")?,
                    chi1,
                    chi2,
                )
            } else {
                RibbonPair::from_widths(
                    raw.required("geometry.width1")?,
                    raw.required("geometry.gap")?,
                    raw.required("geometry.width2")?,
                    chi1,
                    chi2,
                )
            };
            Ok(FieldConfig::Scalar1D(pair.map_err(geo_err)?))
        }
        FieldKind::Scalar2D => {
            let b1 = planar_body(raw, "geometry.body1")?;
            let b2 = planar_body(raw, "geometry.body2")?;
            Ok(FieldConfig::Scalar2D(
                PlanarBodyPair::new(b1, b2, chi1, chi2).map_err(geo_err)?,
            ))
        }
        FieldKind::Scalar3D | FieldKind::Em => {
            let measure = match raw.str("geometry.measure") {
                None | Some(("solid-angle", _)) => SurfaceMeasure::SolidAngle,
                Some(("area", _)) => SurfaceMeasure::Area,
                Some((v, line)) => {
                    return Err(err(
                        Some(line),
                        Some("geometry.measure"),
                        format!("unknown measure `{v}` (solid-angle|area)"),
                    ))
                }
            };
            let pair = SpherePair::new(
                raw.required("geometry.radius_a")?,
                raw.required("geometry.radius_b")?,
                raw.required("geometry.center_distance")?,
                chi1,
                chi2,
            )
            .map_err(geo_err)?
            .with_measure(measure);
            Ok(if kind == FieldKind::Em {
                FieldConfig::Em(pair)
            } else {
                FieldConfig::Scalar3D(pair)
            })
        }
    }
}

fn planar_body(raw: &RawConfig, key: &str) -> Result<PlanarBody, ConfigError> {
    let (v, line) = raw
        .str(key)
        .ok_or_else(|| err(None, Some(key), "missing required key"))?;
    let mut parts = v.split_whitespace();
    let shape = parts.next().unwrap_or("");
    let nums: Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
    let nums = nums.map_err(|_| err(Some(line), Some(key), "expected numbers after the shape name"))?;
    match (shape, nums.as_slice()) {
        ("disk", &[cx, cy, r]) => Ok(PlanarBody::Disk {
            center: [cx, cy],
            radius: r,
        }),
        ("rect", &[cx, cy, hx, hy]) => Ok(PlanarBody::Rectangle {
            center: [cx, cy],
            half_widths: [hx, hy],
        }),
        _ => Err(err(
            Some(line),
            Some(key),
            "expected `disk cx cy r` or `rect cx cy hx hy`",
        )),
    }
}

fn temperature(
    raw: &RawConfig,
    field: &FieldConfig,
    base: Option<TemperatureGrid>,
) -> Result<TemperatureGrid, ConfigError> {
    if !raw.has_section("temperature") {
        return base.ok_or_else(|| err(None, Some("temperature"), "missing [temperature] block"));
    }
    let b = base;
    let pick = |key: &str, fallback: Option<f64>| -> Result<f64, ConfigError> {
        raw.real(key)?
            .or(fallback)
            .ok_or_else(|| err(None, Some(key), "missing required key"))
    };
    let min = pick("temperature.min", b.map(|g| g.min))?;
    let max = pick("temperature.max", b.map(|g| g.max))?;
    let steps = match raw.int("temperature.steps")? {
        Some(s) => s as usize,
        None => b
            .map(|g| g.steps)
            .ok_or_else(|| err(None, Some("temperature.steps"), "missing required key"))?,
    };
    let spacing = match raw.str("temperature.spacing") {
        Some(("log", _)) => Spacing::Log,
        Some(("linear", _)) => Spacing::Linear,
        Some((v, line)) => {
            return Err(err(
                Some(line),
                Some("temperature.spacing"),
                format!("unknown spacing `{v}` (log|linear)"),
            ))
        }
        None => b.map_or(Spacing::Log, |g| g.spacing),
    };
    let axis = match raw.str("temperature.axis") {
        Some(("T", _)) => GridAxis::Temperature,
        Some(("Z", line)) => match field.center_distance() {
            Some(r) => GridAxis::Z { center_distance: r },
            None => {
                return Err(err(
                    Some(line),
                    Some("temperature.axis"),
                    "Z grids need a sphere geometry",
                ))
            }
        },
        Some((v, line)) => {
            return Err(err(
                Some(line),
                Some("temperature.axis"),
                format!("unknown axis `{v}` (T|Z)"),
            ))
        }
        None => match (b.map(|g| g.axis), field.center_distance()) {
            (Some(GridAxis::Z { .. }), Some(r)) => GridAxis::Z { center_distance: r },
            _ => GridAxis::Temperature,
        },
    };
    TemperatureGrid::new(min, max, steps, spacing, axis)
        .map_err(|e| err(raw.line_of("temperature.min"), Some("temperature"), e.to_string()))
}

fn numerics(raw: &RawConfig, mut n: NumericsPolicy) -> Result<NumericsPolicy, ConfigError> {
    let positive = |key: &str, v: f64| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(err(raw.line_of(key), Some(key), "must be positive"))
        }
    };
    let order = |key: &str, v: u64| {
        if (1..=4096).contains(&v) {
            Ok(v as usize)
        } else {
            Err(err(raw.line_of(key), Some(key), "quadrature order must be in 1..=4096"))
        }
    };
    if let Some(v) = raw.real("numerics.matsubara_tol")? {
        n.matsubara_tol = positive("numerics.matsubara_tol", v)?;
    }
    if let Some(v) = raw.int("numerics.l_max")? {
        n.l_max = v.max(1);
    }
    if let Some(v) = raw.real("numerics.fd_rel_step")? {
        n.fd_rel_step = positive("numerics.fd_rel_step", v)?;
    }
    if let Some(v) = raw.int("numerics.radial_order")? {
        n.radial_order = order("numerics.radial_order", v)?;
    }
    if let Some(v) = raw.int("numerics.angular_order")? {
        n.angular_order = order("numerics.angular_order", v)?;
    }
    if let Some((v, line)) = raw.str("numerics.planar_order") {
        let parts: Vec<u64> = v
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| err(Some(line), Some("numerics.planar_order"), "expected two integers"))?;
        match parts.as_slice() {
            &[a, b] => {
                n.planar_order = (order("numerics.planar_order", a)?, order("numerics.planar_order", b)?);
            }
            _ => return Err(err(Some(line), Some("numerics.planar_order"), "expected two integers")),
        }
    }
    if let Some(v) = raw.int("numerics.mc_samples")? {
        n.mc_samples = v.max(2);
    }
    if let Some(v) = raw.int("numerics.mc_seed")? {
        n.mc_seed = v;
    }
    if let Some(v) = raw.real("numerics.consistency_tol")? {
        n.consistency_tol = positive("numerics.consistency_tol", v)?;
    }
    Ok(n)
}
