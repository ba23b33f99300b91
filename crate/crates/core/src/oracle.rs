//! Brute-force reference evaluations.
//!
//! Every quantity here is computed from the defining Matsubara sums term by
//! term, with the spatial integrals done by quadrature (or Monte-Carlo for
//! planar bodies) and thermodynamic quantities by finite differences. The only
//! code shared with the closed-form modules is `specfun` (Bessel K) and the
//! Gauss-Legendre rule.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{RibbonPair, SpherePair, SurfaceMeasure};
use crate::numerics::NumericsPolicy;
use crate::quadrature::GaussLegendre;
use crate::scalar2d::{PlanarBody, PlanarBodyPair};
use crate::specfun::bessel_k0;
use crate::sum::KahanSum;
use crate::system::FieldConfig;
use crate::thermo::{ThermoPoint, UnitSystem};

/// An oracle value with its convergence metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    /// Largest Matsubara index used.
    pub l_max_used: u64,
    /// Quadrature order per axis (0 when not applicable).
    pub quadrature_order: usize,
    /// Monte-Carlo standard error, when the value is a sample mean.
    pub std_error: Option<f64>,
    pub converged: bool,
}

impl OracleValue {
    fn exact(value: f64, l_max_used: u64, quadrature_order: usize, converged: bool) -> Self {
        Self {
            value,
            l_max_used,
            quadrature_order,
            std_error: None,
            converged,
        }
    }
}

/// Running sum over l with a ratio-based tail estimate. Terms must be
/// eventually monotone with ratio below one.
struct LSum {
    acc: KahanSum,
    prev: f64,
    tol: f64,
}

impl LSum {
    fn new(tol: f64) -> Self {
        Self {
            acc: KahanSum::new(),
            prev: f64::NAN,
            tol,
        }
    }

    /// Adds a term and reports whether the remaining tail is negligible.
    fn push(&mut self, term: f64) -> bool {
        self.acc.add(term);
        let done = if term == 0.0 {
            true
        } else {
            let r = (term / self.prev).abs();
            r < 1.0 && term.abs() * r / (1.0 - r) <= self.tol * self.acc.value().abs()
        };
        self.prev = term;
        done
    }

    fn value(&self) -> f64 {
        self.acc.value()
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            "oracle",
            format!("temperature must be positive, got {t}"),
        ))
    }
}

/// l_max raised for small gamma T gap so the geometric tail can resolve.
fn effective_l_max(numerics: &NumericsPolicy, gt_gap: f64) -> u64 {
    if gt_gap < 0.05 {
        numerics.l_max.max((40.0 / gt_gap).ceil() as u64)
    } else {
        numerics.l_max
    }
}

// ---------------------------------------------------------------- 1+1D

/// int_0^w f(t) dt for an integrand concentrated within ~1/beta of t = 0.
fn decay_integral<F: Fn(f64) -> f64>(rule: &GaussLegendre, beta: f64, w: f64, f: F) -> f64 {
    let end = if beta > 0.0 { w.min(45.0 / beta) } else { w };
    let panel = if beta > 0.0 { (2.0 / beta).min(end) } else { end };
    let n = (end / panel).ceil().max(1.0) as usize;
    let h = end / n as f64;
    let mut acc = KahanSum::new();
    for k in 0..n {
        let lo = k as f64 * h;
        acc.add(rule.integrate(lo, lo + h, &f));
    }
    acc.value()
}

/// l-th term of the single-body sum: -T chi^2 / (4 alpha^2) int int e^{-2 alpha |x - x'|}.
fn ribbon_self_term(rule: &GaussLegendre, chi: f64, w: f64, alpha: f64, t: f64) -> f64 {
    let beta = 2.0 * alpha;
    let j = 2.0 * decay_integral(rule, beta, w, |u| (w - u) * (-beta * u).exp());
    -t * chi * chi * j / (4.0 * alpha * alpha)
}

/// l-th term of the cross sum: -2 T chi1 chi2 / (4 alpha^2) int_1 int_2 e^{-2 alpha |x - x'|}.
fn ribbon_cross_term(rule: &GaussLegendre, pair: &RibbonPair, alpha: f64, t: f64) -> f64 {
    let beta = 2.0 * alpha;
    let a = decay_integral(rule, beta, pair.width1(), |u| (-beta * u).exp());
    let b = decay_integral(rule, beta, pair.width2(), |u| (-beta * u).exp());
    -2.0 * t * pair.chi1 * pair.chi2 * (-beta * pair.gap()).exp() * a * b / (4.0 * alpha * alpha)
}

/// Single-body sum: direct up to L, then the midpoint-rule integral of the
/// same summand from L + 1/2 to infinity (the summand decays as l^{-3}).
fn ribbon_self_sum(
    rule: &GaussLegendre,
    chi: f64,
    w: f64,
    t: f64,
    gamma: f64,
    numerics: &NumericsPolicy,
) -> (f64, u64) {
    if chi == 0.0 {
        return (0.0, 0);
    }
    let big_l = ((60.0 / (gamma * t * w)).ceil() as u64).clamp(4096, numerics.l_max.max(4096));
    let mut acc = KahanSum::new();
    for l in 1..=big_l {
        acc.add(ribbon_self_term(rule, chi, w, gamma * l as f64 * t, t));
    }
    // u = 1 / l maps the tail onto (0, 1 / (L + 1/2)]
    let u0 = 1.0 / (big_l as f64 + 0.5);
    let tail = rule.integrate(0.0, u0, |u| ribbon_self_term(rule, chi, w, gamma * t / u, t) / (u * u));
    acc.add(tail);
    (acc.value(), big_l)
}

/// (self, interaction) oracle free energies of two ribbons.
pub fn oracle_free_energy_1d(
    pair: &RibbonPair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<(OracleValue, OracleValue)> {
    check_t(t)?;
    let rule = GaussLegendre::new(16);
    let g = units.gamma();
    let (s1, l1) = ribbon_self_sum(&rule, pair.chi1, pair.width1(), t, g, numerics);
    let (s2, l2) = ribbon_self_sum(&rule, pair.chi2, pair.width2(), t, g, numerics);
    let self_part = OracleValue::exact(s1 + s2, l1.max(l2), 16, true);
    if pair.chi1 * pair.chi2 == 0.0 {
        return Ok((self_part, OracleValue::exact(0.0, 0, 16, true)));
    }
    let l_cap = effective_l_max(numerics, g * t * pair.gap());
    let mut sum = LSum::new(numerics.matsubara_tol);
    let mut used = 0;
    let mut converged = false;
    for l in 1..=l_cap {
        used = l;
        if sum.push(ribbon_cross_term(&rule, pair, g * l as f64 * t, t)) {
            converged = true;
            break;
        }
    }
    Ok((self_part, OracleValue::exact(sum.value(), used, 16, converged)))
}

// ---------------------------------------------------------------- 2+1D

/// Mean and standard error of a Monte-Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Monte-Carlo free energy, entropy and internal energy for planar bodies.
/// Entropy and internal energy use finite differences per sample with common
/// random numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McThermo {
    pub free_energy: McEstimate,
    pub entropy: Option<McEstimate>,
    pub internal_energy: Option<McEstimate>,
}

const MC_CHUNK: u64 = 1 << 15;

/// sum_{l >= 1} K0(gamma l T s)^2, summed directly.
fn k0_squared_l_sum(gts: f64, tol: f64, l_max: u64) -> Result<f64> {
    let mut sum = LSum::new(tol);
    for l in 1..=l_max {
        let k = bessel_k0(gts * l as f64)?;
        if sum.push(k * k) {
            return Ok(sum.value());
        }
    }
    Err(Error::NotConverged {
        what: "oracle 2+1D l-sum",
        terms: l_max,
        tail_bound: f64::NAN,
    })
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: u64,
    sum: [f64; 3],
    sum_sq: [f64; 3],
}

fn sample_point(body: &PlanarBody, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    body.point_from_unit(u, v)
}

pub fn monte_carlo_2d(
    pair: &PlanarBodyPair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
    samples: u64,
    with_derivatives: bool,
) -> Result<McThermo> {
    check_t(t)?;
    if samples < 2 {
        return Err(Error::domain("monte_carlo_2d", "need at least two samples"));
    }
    let cc = pair.chi1 * pair.chi2;
    let scale = -cc * pair.body1.area() * pair.body2.area() / (4.0 * PI * PI);
    let g = units.gamma();
    let h = numerics.fd_step(t);
    let stencil = [t, t + h, t - h, t + 0.5 * h, t - 0.5 * h];
    let n_stencil = if with_derivatives { 5 } else { 1 };
    let chunks = samples.div_ceil(MC_CHUNK);
    let tol = numerics.matsubara_tol;
    let l_max = numerics.l_max;
    let per_chunk: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(numerics.mc_seed);
            rng.set_stream(c);
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut m = Moments::default();
            let mut acc = [KahanSum::new(), KahanSum::new(), KahanSum::new()];
            let mut acc2 = [KahanSum::new(), KahanSum::new(), KahanSum::new()];
            for _ in 0..n {
                let (x1, y1) = sample_point(&pair.body1, &mut rng);
                let (x2, y2) = sample_point(&pair.body2, &mut rng);
                let s = (x1 - x2).hypot(y1 - y2);
                let mut e = [0.0; 5];
                for (k, &tk) in stencil.iter().take(n_stencil).enumerate() {
                    e[k] = scale * tk * k0_squared_l_sum(g * tk * s, tol, l_max)?;
                }
                let mut vals = [e[0], 0.0, 0.0];
                if with_derivatives {
                    let d = |f: &dyn Fn(usize) -> f64| {
                        let dh = (f(1) - f(2)) / (2.0 * h);
                        let dh2 = (f(3) - f(4)) / h;
                        (4.0 * dh2 - dh) / 3.0
                    };
                    vals[1] = -d(&|k| e[k]);
                    vals[2] = -t * t * d(&|k| e[k] / stencil[k]);
                }
                for k in 0..3 {
                    acc[k].add(vals[k]);
                    acc2[k].add(vals[k] * vals[k]);
                }
            }
            m.n = n;
            for k in 0..3 {
                m.sum[k] = acc[k].value();
                m.sum_sq[k] = acc2[k].value();
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    let mut acc = [KahanSum::new(), KahanSum::new(), KahanSum::new()];
    let mut acc2 = [KahanSum::new(), KahanSum::new(), KahanSum::new()];
    for m in per_chunk {
        let m = m?;
        total.n += m.n;
        for k in 0..3 {
            acc[k].add(m.sum[k]);
            acc2[k].add(m.sum_sq[k]);
        }
    }
    let n = total.n as f64;
    let est = |k: usize| {
        let mean = acc[k].value() / n;
        let var = ((acc2[k].value() / n - mean * mean) * n / (n - 1.0)).max(0.0);
        McEstimate {
            mean,
            std_error: (var / n).sqrt(),
            samples: total.n,
        }
    };
    Ok(McThermo {
        free_energy: est(0),
        entropy: with_derivatives.then(|| est(1)),
        internal_energy: with_derivatives.then(|| est(2)),
    })
}

// ---------------------------------------------------------------- spheres

/// int dOmega int dOmega' f(|x - x'|) for points on the two spheres, by
/// tensor Gauss-Legendre in cos(theta), cos(theta') and the azimuth
/// difference (the other azimuth integrates to 2 pi).
pub fn sphere_angular_integral<F>(pair: &SpherePair, order: usize, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let rule = GaussLegendre::new(order);
    let (a, b, r) = (pair.radius_a(), pair.radius_b(), pair.center_distance());
    let mu: Vec<(f64, f64)> = rule.mapped(-1.0, 1.0).collect();
    let phi: Vec<(f64, f64, f64)> = rule.mapped(0.0, PI).map(|(p, w)| (p.cos(), p.sin(), w)).collect();
    let rows: Vec<Result<f64>> = mu
        .par_iter()
        .map(|&(m1, w1)| {
            let s1 = (1.0 - m1 * m1).max(0.0).sqrt();
            let p1 = [a * s1, 0.0, a * m1];
            let mut acc = KahanSum::new();
            for &(m2, w2) in &mu {
                let s2 = (1.0 - m2 * m2).max(0.0).sqrt();
                for &(cp, sp, w3) in &phi {
                    let p2 = [b * s2 * cp, b * s2 * sp, r + b * m2];
                    let d = ((p1[0] - p2[0]).powi(2) + (p1[1] - p2[1]).powi(2) + (p1[2] - p2[2]).powi(2)).sqrt();
                    acc.add(w2 * w3 * f(d)?);
                }
            }
            Ok(w1 * acc.value())
        })
        .collect();
    let mut acc = KahanSum::new();
    for row in rows {
        acc.add(row?);
    }
    // 2 pi from the free azimuth, 2 from folding the difference onto [0, pi]
    Ok(4.0 * PI * acc.value())
}

/// P_p by angular quadrature: (4 pi)^{-2} R^{-p} int int |x - x'|^p.
pub fn angular_p_factor(p: i32, pair: &SpherePair, order: usize) -> Result<f64> {
    let i = sphere_angular_integral(pair, order, |s| Ok(s.powi(p)))?;
    Ok(i / ((4.0 * PI).powi(2) * pair.center_distance().powi(p)))
}

fn measure(pair: &SpherePair) -> f64 {
    match pair.measure {
        SurfaceMeasure::SolidAngle => 1.0,
        SurfaceMeasure::Area => (pair.radius_a() * pair.radius_b()).powi(2),
    }
}

/// sum_{l >= 0} e^{-2 gamma l T s} / (16 pi s^2).
pub fn scalar3d_point_sum(s: f64, gt: f64, tol: f64, l_max: u64) -> Result<(f64, u64)> {
    let mut sum = LSum::new(tol);
    for l in 0..=l_max {
        if sum.push((-2.0 * gt * l as f64 * s).exp()) {
            return Ok((sum.value() / (16.0 * PI * s * s), l));
        }
    }
    Err(Error::NotConverged {
        what: "oracle 3+1D l-sum",
        terms: l_max,
        tail_bound: f64::NAN,
    })
}

/// The EM point-pair kernel at wavenumber kappa, transcribed independently.
fn em_h(kappa: f64, s: f64) -> f64 {
    let k2 = kappa * kappa;
    let bracket = k2 * k2 / (s * s)
        + 2.0 * k2 * kappa / s.powi(3)
        + 5.0 * k2 / s.powi(4)
        + 6.0 * kappa / s.powi(5)
        + 3.0 / s.powi(6);
    (-2.0 * kappa * s).exp() * bracket / (8.0 * PI * PI)
}

/// sum_{l >= 0} h(gamma l T, s), l by l.
pub fn em_point_sum(s: f64, gt: f64, tol: f64, l_max: u64) -> Result<(f64, u64)> {
    let mut sum = LSum::new(tol);
    // terms rise until kappa s ~ 2 before decaying
    let l_peak = (3.0 / (gt * s)).ceil() as u64;
    for l in 0..=l_max {
        let done = sum.push(em_h(gt * l as f64, s));
        if done && l > l_peak {
            return Ok((sum.value(), l));
        }
    }
    Err(Error::NotConverged {
        what: "oracle EM l-sum",
        terms: l_max,
        tail_bound: f64::NAN,
    })
}

fn sphere_oracle(
    pair: &SpherePair,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
    order: usize,
    em: bool,
) -> Result<OracleValue> {
    check_t(t)?;
    let cc = pair.chi1 * pair.chi2 * measure(pair);
    let gt = units.gamma() * t;
    let tol = numerics.matsubara_tol;
    let l_cap = effective_l_max(numerics, gt * pair.min_distance());
    let used = std::sync::atomic::AtomicU64::new(0);
    let integral = sphere_angular_integral(pair, order, |s| {
        let (v, l) = if em {
            em_point_sum(s, gt, tol, l_cap)?
        } else {
            scalar3d_point_sum(s, gt, tol, l_cap)?
        };
        used.fetch_max(l, std::sync::atomic::Ordering::Relaxed);
        Ok(v)
    })?;
    Ok(OracleValue::exact(-t * cc * integral, used.into_inner(), order, true))
}

/// Free energy of a field configuration from the defining sums.
pub fn oracle_free_energy(
    config: &FieldConfig,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<OracleValue> {
    match config {
        FieldConfig::Scalar1D(p) => {
            let (s, i) = oracle_free_energy_1d(p, t, units, numerics)?;
            Ok(OracleValue::exact(
                s.value + i.value,
                s.l_max_used.max(i.l_max_used),
                16,
                s.converged && i.converged,
            ))
        }
        FieldConfig::Scalar2D(p) => {
            let mc = monte_carlo_2d(p, t, units, numerics, numerics.mc_samples, false)?;
            Ok(OracleValue {
                value: mc.free_energy.mean,
                l_max_used: 0,
                quadrature_order: 0,
                std_error: Some(mc.free_energy.std_error),
                converged: true,
            })
        }
        FieldConfig::Scalar3D(p) => sphere_oracle(p, t, units, numerics, numerics.angular_order, false),
        FieldConfig::Em(p) => sphere_oracle(p, t, units, numerics, numerics.angular_order, true),
    }
}

/// Central differences at h and h/2 combined by one Richardson step, from
/// values at (x + h, x - h, x + h/2, x - h/2).
fn richardson(v: [f64; 4], h: f64) -> f64 {
    let dh = (v[0] - v[1]) / (2.0 * h);
    let dh2 = (v[2] - v[3]) / h;
    (4.0 * dh2 - dh) / 3.0
}

/// Oracle thermodynamics: E from the defining sums, S = -dE/dT and
/// U = -T^2 d/dT (E/T) by Richardson-extrapolated central differences, and
/// for ribbons F = dE/dr the same way.
pub fn oracle_thermo(
    config: &FieldConfig,
    t: f64,
    units: &UnitSystem,
    numerics: &NumericsPolicy,
) -> Result<ThermoPoint> {
    check_t(t)?;
    let h = numerics.fd_step(t);
    if !(t - h > 0.0) {
        return Err(Error::domain(
            "oracle_thermo",
            "finite-difference stencil crosses T = 0",
        ));
    }
    if let FieldConfig::Scalar2D(p) = config {
        let mc = monte_carlo_2d(p, t, units, numerics, numerics.mc_samples, true)?;
        return Ok(ThermoPoint {
            temperature: t,
            e_self: 0.0,
            e_interaction: mc.free_energy.mean,
            entropy: mc.entropy.map_or(f64::NAN, |e| e.mean),
            internal_energy: mc.internal_energy.map_or(f64::NAN, |e| e.mean),
            force: None,
        });
    }
    let stencil = [t + h, t - h, t + 0.5 * h, t - 0.5 * h];
    let mut e = [0.0; 4];
    for (k, &tk) in stencil.iter().enumerate() {
        e[k] = oracle_free_energy(config, tk, units, numerics)?.value;
    }
    let (e_self, e_int) = match config {
        FieldConfig::Scalar1D(p) => {
            let (s, i) = oracle_free_energy_1d(p, t, units, numerics)?;
            (s.value, i.value)
        }
        _ => (0.0, oracle_free_energy(config, t, units, numerics)?.value),
    };
    let over_t = [
        e[0] / stencil[0],
        e[1] / stencil[1],
        e[2] / stencil[2],
        e[3] / stencil[3],
    ];
    let force = match config {
        FieldConfig::Scalar1D(p) => Some(oracle_force_1d(p, t, units, numerics)?),
        _ => None,
    };
    let values = [e_self + e_int, -richardson(e, h), -t * t * richardson(over_t, h)];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("oracle finite-difference stencil"));
    }
    Ok(ThermoPoint {
        temperature: t,
        e_self,
        e_interaction: e_int,
        entropy: values[1],
        internal_energy: values[2],
        force,
    })
}

/// dE/dr for two ribbons by finite differences of the oracle interaction
/// energy in the center distance.
pub fn oracle_force_1d(pair: &RibbonPair, t: f64, units: &UnitSystem, numerics: &NumericsPolicy) -> Result<f64> {
    let r = pair.r();
    let h = 1e-3 * pair.gap();
    let mut v = [0.0; 4];
    for (k, rk) in [r + h, r - h, r + 0.5 * h, r - 0.5 * h].into_iter().enumerate() {
        let moved = pair.with_center_distance(rk)?;
        v[k] = oracle_free_energy_1d(&moved, t, units, numerics)?.1.value;
    }
    Ok(richardson(v, h))
}

// ---------------------------------------------------------------- fits

/// Chebyshev nodes of the first kind on [lo, hi].
fn chebyshev_nodes(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let c = (PI * (2 * k + 1) as f64 / (2 * n) as f64).cos();
            0.5 * (lo + hi) + 0.5 * (hi - lo) * c
        })
        .collect()
}

/// Solves a dense linear system by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[piv][col] == 0.0 {
            return Err(Error::domain("solve_dense", "singular matrix"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (x, &p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

/// Power-series coefficients of gamma s^7 E_k in y = gamma T s, where E_k is
/// the EM point-pair free energy from the direct l-sum. Coefficient j
/// multiplies y^j; the fit interpolates at Chebyshev nodes on (0, y_max].
pub fn fit_em_point_pair_coefficients(degree: usize, y_max: f64) -> Result<Vec<f64>> {
    let s = 1.0;
    let gamma = 2.0 * PI;
    let ys = chebyshev_nodes(degree + 1, 0.0, y_max);
    let scale = y_max;
    let mut rows = Vec::with_capacity(ys.len());
    let mut rhs = Vec::with_capacity(ys.len());
    for &y in &ys {
        let t = y / (gamma * s);
        let (sum, _) = em_point_sum(s, gamma * t, 1e-17, 10_000_000)?;
        let e = -t * sum;
        rhs.push(gamma * s.powi(7) * e);
        let u = y / scale;
        rows.push((0..=degree).map(|j| u.powi(j as i32)).collect());
    }
    let c = solve_dense(rows, rhs)?;
    Ok(c.into_iter()
        .enumerate()
        .map(|(j, v)| v / scale.powi(j as i32))
        .collect())
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    DocumentedDeviation,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::DocumentedDeviation => "documented-deviation",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Acceptance rule for one comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Relative {
        rel: f64,
        abs_floor: f64,
    },
    /// |closed - oracle| <= k standard errors.
    StdErrors {
        k: f64,
        std_error: f64,
    },
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Tolerance::Relative { rel, abs_floor: 0.0 }
    }

    fn accepts(&self, a: f64, b: f64) -> bool {
        let d = (a - b).abs();
        match *self {
            Tolerance::Relative { rel, abs_floor } => d <= abs_floor || d <= rel * a.abs().max(b.abs()),
            Tolerance::StdErrors { k, std_error } => d <= k * std_error,
        }
    }

    fn describe(&self) -> String {
        match *self {
            Tolerance::Relative { rel, abs_floor } if abs_floor > 0.0 => format!("rel {rel:e} abs {abs_floor:e}"),
            Tolerance::Relative { rel, .. } => format!("rel {rel:e}"),
            Tolerance::StdErrors { k, std_error } => format!("{k} x stderr {std_error:e}"),
        }
    }
}

/// One closed-form versus oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub scenario: String,
    pub quantity: String,
    pub closed_form_value: f64,
    pub oracle_value: f64,
    pub relative_deviation: f64,
    pub tolerance: String,
    pub status: Status,
    pub l_max_used: u64,
    pub quadrature_order: usize,
    pub fd_step: f64,
    pub note: String,
}

impl OracleReport {
    pub const HEADER: &'static str =
        "scenario\tquantity\tclosed\toracle\trel_deviation\tstatus\ttolerance\tl_max\tquad_order\tfd_step\tnote";

    /// Builds a record. `expected_deviation` marks known disagreements of a
    /// published expression: they become `documented-deviation` instead of
    /// `fail` when they do not match.
    #[allow(clippy::too_many_arguments)]
    pub fn compare(
        scenario: &str,
        quantity: &str,
        closed: f64,
        oracle: &OracleValue,
        tol: Tolerance,
        fd_step: f64,
        expected_deviation: bool,
        note: &str,
    ) -> Self {
        let agrees = tol.accepts(closed, oracle.value) && closed.is_finite() && oracle.value.is_finite();
        let status = match (oracle.converged, agrees, expected_deviation) {
            (true, true, _) => Status::Pass,
            (_, false, true) => Status::DocumentedDeviation,
            _ => Status::Fail,
        };
        let scale = closed.abs().max(oracle.value.abs());
        Self {
            scenario: scenario.into(),
            quantity: quantity.into(),
            closed_form_value: closed,
            oracle_value: oracle.value,
            relative_deviation: if scale == 0.0 {
                0.0
            } else {
                (closed - oracle.value).abs() / scale
            },
            tolerance: tol.describe(),
            status,
            l_max_used: oracle.l_max_used,
            quadrature_order: oracle.quadrature_order,
            fd_step,
            note: note.into(),
        }
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{:e}\t{:e}\t{:.3e}\t{}\t{}\t{}\t{}\t{:e}\t{}",
            self.scenario,
            self.quantity,
            self.closed_form_value,
            self.oracle_value,
            self.relative_deviation,
            self.status,
            self.tolerance,
            self.l_max_used,
            self.quadrature_order,
            self.fd_step,
            self.note
        )
    }
}

/// Writes a report: header line then one record per line.
pub fn format_reports(reports: &[OracleReport]) -> String {
    let mut out = String::from(OracleReport::HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em3d::{derived_e_series, em_sphere_thermo};
    use crate::geometry::p_factor;
    use crate::scalar1d::evaluate_1d;
    use crate::scalar2d::evaluate_2d;
    use crate::scalar3d::two_sphere_thermo_3d;
    use crate::thermo::relative_deviation;

    fn nat() -> UnitSystem {
        UnitSystem::natural()
    }

    #[test]
    fn ribbons_match_closed_form() {
        let pair = RibbonPair::from_widths(2.0, 8.0, 4.0, 1.0, 1.0).unwrap();
        let n = NumericsPolicy::default();
        for &t in &[0.003, 0.05, 1.0, 10.0] {
            let closed = evaluate_1d(&pair, t, &nat()).unwrap().point;
            let (s, i) = oracle_free_energy_1d(&pair, t, &nat(), &n).unwrap();
            assert!(i.converged);
            assert!(relative_deviation(closed.e_self, s.value) < 1e-9, "self at T = {t}");
            if closed.e_interaction != 0.0 {
                assert!(
                    relative_deviation(closed.e_interaction, i.value) < 1e-9,
                    "interaction at T = {t}"
                );
            }
        }
    }

    #[test]
    fn ribbon_thermo_by_differences() {
        let pair = RibbonPair::from_widths(2.0, 8.0, 4.0, 1.0, 1.0).unwrap();
        let n = NumericsPolicy::default();
        let t = 0.2;
        let o = oracle_thermo(&FieldConfig::Scalar1D(pair), t, &nat(), &n).unwrap();
        let c = evaluate_1d(&pair, t, &nat()).unwrap();
        assert!(relative_deviation(o.entropy, c.point.entropy) < 1e-6);
        assert!(relative_deviation(o.internal_energy, c.point.internal_energy) < 1e-6);
        assert!(relative_deviation(o.force.unwrap(), c.force) < 1e-6);
    }

    #[test]
    fn geometric_series_identity() {
        let (s, gt) = (1.5, 0.2);
        let (v, _) = scalar3d_point_sum(s, gt, 1e-16, 100_000).unwrap();
        let exact = 1.0 / (1.0 - (-2.0 * gt * s).exp()) / (16.0 * PI * s * s);
        assert!(relative_deviation(v, exact) < 1e-14);
    }

    #[test]
    fn angular_quadrature_reproduces_p_factors() {
        let pair = SpherePair::new(0.1, 0.2, 1.0, 1.0, 1.0).unwrap();
        for p in -6..=3 {
            let q = angular_p_factor(p, &pair, 48).unwrap();
            let c = p_factor(p, &pair).unwrap();
            assert!(relative_deviation(q, c) < 1e-10, "p = {p}: {q} vs {c}");
        }
    }

    #[test]
    fn spheres_match_closed_form() {
        let n = NumericsPolicy {
            angular_order: 24,
            ..NumericsPolicy::default()
        };
        let pair = SpherePair::new(1.0, 2.0, 10.0, 11.68, 2.6).unwrap();
        for &t in &[0.01, 0.5] {
            let c = two_sphere_thermo_3d(&pair, t, &nat(), &n).unwrap();
            let o = oracle_free_energy(&FieldConfig::Scalar3D(pair), t, &nat(), &n).unwrap();
            assert!(relative_deviation(c.e_interaction, o.value) < 1e-10, "scalar T = {t}");
            let c = em_sphere_thermo(&pair, t, &nat(), &n).unwrap();
            let o = oracle_free_energy(&FieldConfig::Em(pair), t, &nat(), &n).unwrap();
            assert!(relative_deviation(c.e_interaction, o.value) < 1e-10, "em T = {t}");
        }
    }

    #[test]
    fn monte_carlo_brackets_quadrature() {
        let pair = PlanarBodyPair::disks(1.0, 3.0, 1.0, 1.0).unwrap();
        let n = NumericsPolicy::default();
        let mc = monte_carlo_2d(&pair, 1.0, &nat(), &n, 200_000, true).unwrap();
        let c = evaluate_2d(&pair, 1.0, &nat(), &n).unwrap().point;
        assert!((mc.free_energy.mean - c.e_interaction).abs() < 4.0 * mc.free_energy.std_error);
        let s = mc.entropy.unwrap();
        assert!((s.mean - c.entropy).abs() < 4.0 * s.std_error);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let pair = PlanarBodyPair::disks(1.0, 3.0, 1.0, 1.0).unwrap();
        let n = NumericsPolicy::default();
        let a = monte_carlo_2d(&pair, 1.0, &nat(), &n, 70_000, false).unwrap();
        let b = monte_carlo_2d(&pair, 1.0, &nat(), &n, 70_000, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn em_fit_recovers_expansion() {
        let fit = fit_em_point_pair_coefficients(16, 1.0).unwrap();
        let derived = derived_e_series(3);
        for term in &derived {
            let j = (term.gamma_power + 1) as usize;
            assert!(
                (fit[j] - term.coefficient).abs() < 1e-9 + 1e-3 * term.coefficient.abs(),
                "y^{j}: {} vs {}",
                fit[j],
                term.coefficient
            );
        }
    }

    #[test]
    fn report_status_rules() {
        let ok = OracleValue::exact(1.0, 10, 0, true);
        let r = OracleReport::compare("x", "E", 1.0 + 1e-12, &ok, Tolerance::rel(1e-8), 0.0, false, "");
        assert_eq!(r.status, Status::Pass);
        let r = OracleReport::compare("x", "E", 1.1, &ok, Tolerance::rel(1e-8), 0.0, false, "");
        assert_eq!(r.status, Status::Fail);
        let r = OracleReport::compare("x", "E", 1.1, &ok, Tolerance::rel(1e-8), 0.0, true, "");
        assert_eq!(r.status, Status::DocumentedDeviation);
        let bad = OracleValue { converged: false, ..ok };
        let r = OracleReport::compare("x", "E", 1.0, &bad, Tolerance::rel(1e-8), 0.0, false, "");
        assert_eq!(r.status, Status::Fail);
        assert_eq!(
            r.to_string().split('\t').count(),
            OracleReport::HEADER.split('\t').count()
        );
    }
}
