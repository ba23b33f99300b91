//! Body geometries: ribbon pairs on a line and pairs of spherical shells.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, GaussLegendre};
use crate::thermo::richardson_derivative;

/// Two homogeneous segments [a, b] and [c, d] on a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibbonPair {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    pub chi1: f64,
    pub chi2: f64,
}

impl RibbonPair {
    pub fn new(a: f64, b: f64, c: f64, d: f64, chi1: f64, chi2: f64) -> Result<Self> {
        if ![a, b, c, d, chi1, chi2].iter().all(|v| v.is_finite()) {
            return Err(Error::Geometry("ribbon parameters must be finite".into()));
        }
        if !(a < b && b < c && c < d) {
            return Err(Error::Geometry(format!(
                "ribbons must satisfy a < b < c < d, got a={a}, b={b}, c={c}, d={d}"
            )));
        }
        if chi1 < 0.0 || chi2 < 0.0 {
            return Err(Error::Geometry("susceptibilities must be non-negative".into()));
        }
        Ok(Self { a, b, c, d, chi1, chi2 })
    }

    /// Builds the pair from widths and gap, with the first body starting at 0.
    pub fn from_widths(width1: f64, gap: f64, width2: f64, chi1: f64, chi2: f64) -> Result<Self> {
        Self::new(0.0, width1, width1 + gap, width1 + gap + width2, chi1, chi2)
    }

    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn width1(&self) -> f64 {
        self.b - self.a
    }

    pub fn width2(&self) -> f64 {
        self.d - self.c
    }

    pub fn gap(&self) -> f64 {
        self.c - self.b
    }

    /// Center distance r = r2 - r1.
    pub fn r(&self) -> f64 {
        0.5 * (self.c + self.d) - 0.5 * (self.a + self.b)
    }

    /// Half-width of the second body, r' = (d - c)/2.
    pub fn r_prime(&self) -> f64 {
        0.5 * self.width2()
    }

    /// Half-width of the first body, r'' = (b - a)/2.
    pub fn r_double_prime(&self) -> f64 {
        0.5 * self.width1()
    }

    /// Same widths, center distance moved to `r`.
    pub fn with_center_distance(&self, r: f64) -> Result<Self> {
        let shift = r - self.r();
        Self::new(self.a, self.b, self.c + shift, self.d + shift, self.chi1, self.chi2)
    }
}

/// How the double surface integral is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SurfaceMeasure {
    /// Integrate over solid angles, dOmega dOmega'.
    #[default]
    SolidAngle,
    /// Integrate over surface area, a^2 b^2 dOmega dOmega'.
    Area,
}

/// Two spherical shells of radii a and b whose centers are R apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePair {
    radius_a: f64,
    radius_b: f64,
    center_distance: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub measure: SurfaceMeasure,
}

impl SpherePair {
    pub fn new(radius_a: f64, radius_b: f64, center_distance: f64, chi1: f64, chi2: f64) -> Result<Self> {
        if ![radius_a, radius_b, center_distance, chi1, chi2]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::Geometry("sphere parameters must be finite".into()));
        }
        if radius_a <= 0.0 || radius_b <= 0.0 {
            return Err(Error::Geometry("sphere radii must be positive".into()));
        }
        if center_distance <= radius_a + radius_b {
            return Err(Error::Geometry(format!(
                "spheres overlap: R = {center_distance} <= a + b = {}",
                radius_a + radius_b
            )));
        }
        if chi1 < 0.0 || chi2 < 0.0 {
            return Err(Error::Geometry("susceptibilities must be non-negative".into()));
        }
        Ok(Self {
            radius_a,
            radius_b,
            center_distance,
            chi1,
            chi2,
            measure: SurfaceMeasure::SolidAngle,
        })
    }

    pub fn with_measure(mut self, measure: SurfaceMeasure) -> Self {
        self.measure = measure;
        self
    }

    pub fn with_center_distance(&self, r: f64) -> Result<Self> {
        Ok(Self::new(self.radius_a, self.radius_b, r, self.chi1, self.chi2)?.with_measure(self.measure))
    }

    pub fn radius_a(&self) -> f64 {
        self.radius_a
    }

    pub fn radius_b(&self) -> f64 {
        self.radius_b
    }

    pub fn center_distance(&self) -> f64 {
        self.center_distance
    }

    pub fn a_hat(&self) -> f64 {
        self.radius_a / self.center_distance
    }

    pub fn b_hat(&self) -> f64 {
        self.radius_b / self.center_distance
    }

    /// 1 for solid-angle integration, a^2 b^2 for area integration.
    pub fn measure_factor(&self) -> f64 {
        match self.measure {
            SurfaceMeasure::SolidAngle => 1.0,
            SurfaceMeasure::Area => (self.radius_a * self.radius_b).powi(2),
        }
    }

    /// Smallest surface-to-surface distance, R - a - b.
    pub fn min_distance(&self) -> f64 {
        self.center_distance - self.radius_a - self.radius_b
    }

    /// Largest surface-to-surface distance, R + a + b.
    pub fn max_distance(&self) -> f64 {
        self.center_distance + self.radius_a + self.radius_b
    }
}

/// Distance between the point (theta, phi) on sphere 1, centered at the
/// origin, and (theta', phi') on sphere 2, centered at (0, 0, R).
pub fn sphere_point_distance(pair: &SpherePair, theta: f64, phi: f64, theta_p: f64, phi_p: f64) -> f64 {
    let (a, b, r) = (pair.radius_a, pair.radius_b, pair.center_distance);
    let cos_gamma = theta.cos() * theta_p.cos() + theta.sin() * theta_p.sin() * (phi - phi_p).cos();
    let sq = r * r + a * a + b * b - 2.0 * a * b * cos_gamma - 2.0 * r * (a * theta.cos() - b * theta_p.cos());
    sq.max(0.0).sqrt()
}

pub const P_FACTOR_MIN: i32 = -6;
pub const P_FACTOR_MAX: i32 = 3;

/// P_p(a_hat, b_hat), defined by
/// `int dOmega int dOmega' |x - x'|^p = (4 pi)^2 R^p P_p`.
pub fn p_factor(p: i32, pair: &SpherePair) -> Result<f64> {
    p_factor_hat(p, pair.a_hat(), pair.b_hat())
}

/// P_p from the dimensionless radii.
pub fn p_factor_hat(p: i32, a_hat: f64, b_hat: f64) -> Result<f64> {
    if !(P_FACTOR_MIN..=P_FACTOR_MAX).contains(&p) {
        return Err(Error::Domain {
            function: "p_factor",
            detail: format!("p = {p} outside [{P_FACTOR_MIN}, {P_FACTOR_MAX}]"),
        });
    }
    if !(a_hat > 0.0 && b_hat > 0.0 && a_hat + b_hat < 1.0) {
        return Err(Error::Domain {
            function: "p_factor",
            detail: format!("need a_hat, b_hat > 0 and a_hat + b_hat < 1, got {a_hat}, {b_hat}"),
        });
    }
    // symmetric in the two radii; keep b the smaller one
    let (a, b) = if a_hat >= b_hat { (a_hat, b_hat) } else { (b_hat, a_hat) };
    let s = a + b;
    let d = a - b;
    let four_ab = 4.0 * a * b;
    let value = match p {
        -1 => 1.0,
        -3 => -(-four_ab / (1.0 - d * d)).ln_1p() / four_ab,
        _ if b < 0.05 => p_factor_integral(p, s, d) / four_ab,
        -2 => {
            let l1 = (-four_ab / (1.0 - d * d)).ln_1p();
            let l2 = (((b + 1.0) * (b + 1.0) - a * a) / ((b - 1.0) * (b - 1.0) - a * a)).ln();
            let l3 = (((a + 1.0) * (a + 1.0) - b * b) / ((a - 1.0) * (a - 1.0) - b * b)).ln();
            (l1 + a * l2 + b * l3) / four_ab
        }
        _ => {
            let n = p + 3;
            let num = (1.0 + s).powi(n) + (1.0 - s).powi(n) - (1.0 + d).powi(n) - (1.0 - d).powi(n);
            num / (four_ab * f64::from(p + 2) * f64::from(n))
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite("p_factor"))
    }
}

/// int_d^s k_p(x) dx, where k_p(x) = [(1+x)^{p+2} - (1-x)^{p+2}]/(p+2) and
/// k_{-2}(x) = ln((1+x)/(1-x)). Free of the cancellation in the closed forms
/// when one radius is small.
fn p_factor_integral(p: i32, s: f64, d: f64) -> f64 {
    let kernel = |x: f64| -> f64 {
        if p == -2 {
            x.ln_1p() - (-x).ln_1p()
        } else {
            let m = p + 2;
            ((1.0 + x).powi(m) - (1.0 - x).powi(m)) / f64::from(m)
        }
    };
    let rule = GaussLegendre::new(24);
    let panel = (1.0 - s).clamp(1e-3, 0.05);
    integrate_panels(&rule, &[d, s], panel, kernel)
}

/// |P_{p-1} - R^{-p}/(1+p) d/dR [R^{p+1} P_p(a/R, b/R)]| at fixed radii,
/// with the R-derivative taken by Richardson-extrapolated central differences
/// of step `h`.
pub fn p_factor_recursion_check(p: i32, pair: &SpherePair, h: f64) -> Result<f64> {
    if p == -1 {
        return Err(Error::Domain {
            function: "p_factor_recursion_check",
            detail: "p = -1 makes 1/(1+p) singular".into(),
        });
    }
    let (a, b, r) = (pair.radius_a, pair.radius_b, pair.center_distance);
    if r - 2.0 * h <= a + b {
        return Err(Error::Domain {
            function: "p_factor_recursion_check",
            detail: format!("step {h} reaches the contact distance"),
        });
    }
    let g = |rr: f64| rr.powi(p + 1) * p_factor_hat(p, a / rr, b / rr).unwrap_or(f64::NAN);
    let deriv = richardson_derivative(g, r, h)?;
    let rhs = r.powi(-p) / f64::from(1 + p) * deriv.value;
    let lhs = p_factor(p - 1, pair)?;
    Ok((lhs - rhs).abs())
}

/// Breakpoints of the surface-to-surface distance density.
pub fn sphere_distance_breakpoints(pair: &SpherePair) -> [f64; 4] {
    let (a, b, r) = (pair.radius_a, pair.radius_b, pair.center_distance);
    [r - a - b, r - (a - b).abs(), r + (a - b).abs(), r + a + b]
}

/// Mean of f(|x - x'|) over uniformly distributed points on the two spheres,
/// via the one-dimensional distance density
/// `s w(s) / (4 a b R)` with w(s) = |[max(R - b, s - a), min(R + b, s + a)]|.
pub fn sphere_pair_average<F: FnMut(f64) -> f64>(
    pair: &SpherePair,
    rule: &GaussLegendre,
    max_panel: f64,
    mut f: F,
) -> f64 {
    let (a, b, r) = (pair.radius_a, pair.radius_b, pair.center_distance);
    let norm = 1.0 / (4.0 * a * b * r);
    let bp = sphere_distance_breakpoints(pair);
    integrate_panels(rule, &bp, max_panel, |s| {
        let w = ((r + b).min(s + a) - (r - b).max(s - a)).max(0.0);
        s * w * f(s)
    }) * norm
}
