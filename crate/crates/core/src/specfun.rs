//! Special functions: integer-order polylogarithms, Riemann zeta at integer
//! arguments, and the modified Bessel functions K0 and K1.
//!
//! All functions are pure and allocation-free per call. The only shared state
//! is a lazily built table of zeta values, computed once.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::sum::KahanSum;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Order of a polylogarithm. Only 1..=6 is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolylogOrder(u32);

impl PolylogOrder {
    pub const MAX: u32 = 6;

    pub fn new(s: u32) -> Result<Self> {
        if (1..=Self::MAX).contains(&s) {
            Ok(PolylogOrder(s))
        } else {
            Err(Error::domain("polylog", format!("order {s} outside 1..=6")))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for PolylogOrder {
    type Error = Error;

    fn try_from(s: u32) -> Result<Self> {
        PolylogOrder::new(s)
    }
}

// Bernoulli numbers B_2 .. B_14 for the Euler-Maclaurin tail of zeta.
const BERNOULLI_EVEN: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

const ZETA_TABLE_LEN: usize = 128;

fn zeta_table() -> &'static [f64; ZETA_TABLE_LEN] {
    static TABLE: OnceLock<[f64; ZETA_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [f64::NAN; ZETA_TABLE_LEN];
        for (s, slot) in t.iter_mut().enumerate().skip(2) {
            *slot = zeta_euler_maclaurin(s as u32);
        }
        t
    })
}

fn zeta_euler_maclaurin(s: u32) -> f64 {
    if s > 60 {
        // 3^-60 is below double precision relative to 1
        return 1.0 + 2f64.powi(-(s as i32));
    }
    const N: u32 = 16;
    let sf = s as f64;
    let mut acc = KahanSum::new();
    for k in (1..N).rev() {
        acc.add((k as f64).powf(-sf));
    }
    let n = N as f64;
    acc.add(n.powf(1.0 - sf) / (sf - 1.0));
    acc.add(0.5 * n.powf(-sf));
    // sum_j B_2j/(2j)! * s(s+1)...(s+2j-2) N^{-s-2j+1}
    let mut rising = sf; // s(s+1)...(s+2j-2)
    let mut fact = 2.0; // (2j)!
    let mut npow = n.powf(-sf - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        acc.add(b / fact * rising * npow);
        let j2 = 2.0 * (j as f64 + 1.0);
        rising *= (sf + j2 - 1.0) * (sf + j2);
        fact *= (j2 + 1.0) * (j2 + 2.0);
        npow /= n * n;
    }
    acc.value()
}

/// Riemann zeta at an integer argument s >= 2.
pub fn zeta(s: u32) -> Result<f64> {
    if s < 2 {
        return Err(Error::domain("zeta", format!("s = {s} < 2")));
    }
    let s = s as usize;
    if s < ZETA_TABLE_LEN {
        Ok(zeta_table()[s])
    } else {
        Ok(1.0)
    }
}

/// B_{2k} / (2k)! for k >= 1, via B_{2k} = (-1)^{k+1} 2 (2k)! zeta(2k) / (2 pi)^{2k}.
pub fn bernoulli_even_over_factorial(k: u32) -> f64 {
    assert!(k >= 1);
    let z = zeta(2 * k).expect("2k >= 2");
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * 2.0 * z / (2.0 * PI).powi(2 * k as i32)
}

/// Li_s(z) = sum_{k>=1} z^k / k^s for 0 <= z <= 1 (z = 1 only for s >= 2).
pub fn polylog(s: PolylogOrder, z: f64) -> Result<f64> {
    let order = s.get();
    if !(0.0..=1.0).contains(&z) || z.is_nan() {
        return Err(Error::domain("polylog", format!("z = {z} outside [0, 1)")));
    }
    if z == 1.0 {
        if order == 1 {
            return Err(Error::domain("polylog", "Li_1 diverges at z = 1"));
        }
        return zeta(order);
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if order == 1 {
        return Ok(-(-z).ln_1p());
    }
    if z <= 0.5 {
        Ok(polylog_direct(order, z))
    } else {
        Ok(polylog_log_series(order, z.ln()))
    }
}

/// Li_s(e^{-x}) for x >= 0, without forming e^{-x} when it is close to one.
pub fn polylog_exp(s: PolylogOrder, x: f64) -> Result<f64> {
    let order = s.get();
    if !(x >= 0.0) {
        return Err(Error::domain("polylog_exp", format!("x = {x} < 0")));
    }
    if x == 0.0 {
        return polylog(s, 1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if order == 1 {
        return Ok(-(-(-x).exp_m1()).ln());
    }
    if x >= std::f64::consts::LN_2 {
        Ok(polylog_direct(order, (-x).exp()))
    } else {
        Ok(polylog_log_series(order, -x))
    }
}

/// Li_s(e^{-x}) minus its first `m` Taylor terms at x = 0,
/// i.e. Li_s(e^{-x}) - sum_{k<m} zeta(s-k) (-x)^k / k!, for m <= s - 1.
///
/// Keeps full relative accuracy as x -> 0, where the plain difference
/// cancels.
pub fn polylog_exp_remainder(s: PolylogOrder, x: f64, m: u32) -> Result<f64> {
    let order = s.get();
    if m + 1 > order {
        return Err(Error::domain(
            "polylog_exp_remainder",
            format!("cannot remove {m} terms from Li_{order}"),
        ));
    }
    if !(x > 0.0) {
        return Err(Error::domain("polylog_exp_remainder", format!("x = {x} <= 0")));
    }
    if m == 0 {
        return polylog_exp(s, x);
    }
    if x < std::f64::consts::LN_2 {
        return Ok(polylog_log_series_from(order, -x, m));
    }
    let mut acc = KahanSum::new();
    acc.add(polylog_exp(s, x)?);
    let mut mk = 1.0;
    for k in 0..m {
        if k > 0 {
            mk *= -x / k as f64;
        }
        acc.add(-zeta(order - k)? * mk);
    }
    Ok(acc.value())
}

fn polylog_direct(s: u32, z: f64) -> f64 {
    let mut acc = KahanSum::new();
    let mut zk = 1.0;
    let mut k = 1u32;
    loop {
        zk *= z;
        let term = zk / (k as f64).powi(s as i32);
        acc.add(term);
        // remaining terms are bounded by term * z / (1 - z)
        if term * z / (1.0 - z) <= 1e-17 * acc.value() || zk == 0.0 {
            break;
        }
        k += 1;
    }
    acc.value()
}

/// Expansion of Li_s(e^mu) in powers of mu (mu < 0, |mu| < 2 pi):
/// sum_{k != s-1} zeta(s-k) mu^k/k! + mu^{s-1}/(s-1)! (H_{s-1} - ln(-mu)).
fn polylog_log_series(s: u32, mu: f64) -> f64 {
    polylog_log_series_from(s, mu, 0)
}

/// As `polylog_log_series`, omitting the terms k < skip (skip <= s - 1).
fn polylog_log_series_from(s: u32, mu: f64, skip: u32) -> f64 {
    debug_assert!(mu < 0.0 && mu > -2.0 * PI);
    let mut acc = KahanSum::new();
    // k = 0 .. s-2: zeta(s-k) mu^k / k!
    let mut mk = 1.0; // mu^k / k!
    for k in 0..s.saturating_sub(1) {
        if k > 0 {
            mk *= mu / k as f64;
        }
        if k >= skip {
            acc.add(zeta(s - k).expect("s - k >= 2") * mk);
        }
    }
    // k = s-1
    let k = s - 1;
    if k > 0 {
        mk *= mu / k as f64;
    }
    let harmonic: f64 = (1..=k).map(|j| 1.0 / j as f64).sum();
    acc.add(mk * (harmonic - (-mu).ln()));
    // k = s: zeta(0) = -1/2
    mk *= mu / s as f64;
    acc.add(-0.5 * mk);
    // k = s-1+2m, m >= 1: zeta(1-2m) = -B_2m/(2m)
    //   term = (-1)^m 2 zeta(2m) (2m-1)! mu^k / (k! (2 pi)^{2m})
    let two_pi_sq = (2.0 * PI) * (2.0 * PI);
    let sf = s as f64;
    // a_m = (2m-1)! mu^{s-1+2m} / ((s-1+2m)! (2 pi)^{2m}); a_1 = mu^{s+1}/((s+1)! (2pi)^2)
    let mut a = {
        let mut v = mu.powi(s as i32 + 1) / two_pi_sq;
        for j in 2..=(s + 1) {
            v /= j as f64;
        }
        v
    };
    for m in 1..200u32 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * 2.0 * zeta(2 * m).expect("2m >= 2") * a;
        acc.add(term);
        if term.abs() <= 1e-18 * acc.value().abs() {
            break;
        }
        let mf = m as f64;
        a *= (2.0 * mf) * (2.0 * mf + 1.0) * mu * mu / ((sf + 2.0 * mf) * (sf + 2.0 * mf + 1.0) * two_pi_sq);
    }
    acc.value()
}

/// Li_{-n}(e^{-x}) = sum_{l>=1} l^n e^{-l x} for 0 <= n <= 8 and x > 0,
/// via Eulerian polynomials: q A_n(q) / (1 - q)^{n+1}.
pub fn polylog_nonpositive(n: u32, x: f64) -> Result<f64> {
    if n > 8 {
        return Err(Error::domain("polylog_nonpositive", format!("order -{n} below -8")));
    }
    if !(x > 0.0) {
        return Err(Error::domain("polylog_nonpositive", format!("x = {x} <= 0")));
    }
    let q = (-x).exp();
    let one_minus_q = -(-x).exp_m1();
    // Eulerian numbers A(n, k), k = 0..n-1
    let mut row = [0.0f64; 9];
    row[0] = 1.0;
    for m in 2..=n as usize {
        let prev = row;
        for k in 0..m {
            let left = if k > 0 { prev[k - 1] } else { 0.0 };
            row[k] = (k as f64 + 1.0) * prev[k] + (m - k) as f64 * left;
        }
    }
    let degree = if n == 0 { 0 } else { n as usize - 1 };
    let mut poly = 0.0;
    for k in (0..=degree).rev() {
        poly = poly * q + row[k];
    }
    Ok(q * poly / one_minus_q.powi(n as i32 + 1))
}

/// Order of a modified Bessel function of the second kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    K0,
    K1,
}

/// K_0(x) or K_1(x) for x > 0.
pub fn bessel_k(order: BesselOrder, x: f64) -> Result<f64> {
    let (k0, k1) = bessel_k01(x)?;
    Ok(match order {
        BesselOrder::K0 => k0,
        BesselOrder::K1 => k1,
    })
}

/// Both K_0(x) and K_1(x), evaluated together.
pub fn bessel_k01(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) {
        return Err(Error::domain("bessel_k", format!("x = {x} <= 0")));
    }
    if x.is_infinite() {
        return Ok((0.0, 0.0));
    }
    if x <= 2.0 {
        Ok(k01_series(x))
    } else {
        Ok(k01_continued_fraction(x))
    }
}

pub fn bessel_k0(x: f64) -> Result<f64> {
    bessel_k(BesselOrder::K0, x)
}

pub fn bessel_k1(x: f64) -> Result<f64> {
    bessel_k(BesselOrder::K1, x)
}

// Ascending series with the logarithmic branch.
fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // K0 = -(ln(x/2) + gamma) I0 + sum H_k y^k/(k!)^2
    // K1 = 1/x + (x/2) sum u_k [ln(x/2) - (H_k + H_{k+1})/2 + gamma], u_k = y^k/(k!(k+1)!)
    let mut t0 = 1.0; // y^k/(k!)^2
    let mut u = 1.0; // y^k/(k!(k+1)!)
    let mut h = 0.0; // H_k
    let mut i0 = KahanSum::new();
    let mut s0 = KahanSum::new();
    let mut s1 = KahanSum::new();
    for k in 0..200u32 {
        let h_next = h + 1.0 / (k as f64 + 1.0);
        i0.add(t0);
        s0.add(h * t0);
        s1.add(u * (log_half - 0.5 * (h + h_next) + EULER_GAMMA));
        if t0 < 1e-18 * i0.value() {
            break;
        }
        let kn = k as f64 + 1.0;
        t0 *= y / (kn * kn);
        u *= y / (kn * (kn + 1.0));
        h = h_next;
    }
    let k0 = -(log_half + EULER_GAMMA) * i0.value() + s0.value();
    let k1 = 1.0 / x + 0.5 * x * s1.value();
    (k0, k1)
}

// Steed's continued fraction (Temme's CF2) for x >= 2, order 0.
fn k01_continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000u32 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-16 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_panels, GaussLegendre};

    fn order(s: u32) -> PolylogOrder {
        PolylogOrder::new(s).unwrap()
    }

    fn direct_sum(s: u32, z: f64, terms: u32) -> f64 {
        let mut acc = KahanSum::new();
        for k in (1..=terms).rev() {
            acc.add(z.powi(k as i32) / (k as f64).powi(s as i32));
        }
        acc.value()
    }

    #[test]
    fn polylog_trivial_values() {
        assert_eq!(polylog(order(2), 0.0).unwrap(), 0.0);
        let ln2 = polylog(order(1), 0.5).unwrap();
        assert!((ln2 - std::f64::consts::LN_2).abs() < 1e-16);
        let z2 = polylog(order(2), 1.0).unwrap();
        assert!((z2 - PI * PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn polylog_matches_200_term_sum() {
        let v = polylog(order(4), 0.3).unwrap();
        let d = direct_sum(4, 0.3, 200);
        assert!(((v - d) / d).abs() < 1e-12);
    }

    #[test]
    fn polylog_rejects_bad_arguments() {
        assert!(polylog(order(2), -0.1).is_err());
        assert!(polylog(order(2), 1.1).is_err());
        assert!(polylog(order(1), 1.0).is_err());
        assert!(PolylogOrder::new(0).is_err());
        assert!(PolylogOrder::new(7).is_err());
        assert!(polylog_exp(order(3), -1.0).is_err());
    }

    #[test]
    fn log_series_and_direct_series_agree_across_switch() {
        for s in 2..=6 {
            for &z in &[0.45, 0.5, 0.55, 0.6, 0.7] {
                let d = polylog_direct(s, z);
                let l = polylog_log_series(s, z.ln());
                assert!(((d - l) / d).abs() < 1e-14, "s={s} z={z}: {d} vs {l}");
            }
        }
    }

    #[test]
    fn polylog_exp_near_one() {
        // Li_2(e^-x) = zeta(2) + x ln x - x - ... for small x
        let x = 1e-8;
        let v = polylog_exp(order(2), x).unwrap();
        let approx = PI * PI / 6.0 + x * x.ln() - x;
        assert!((v - approx).abs() < 1e-14);
        let z3 = zeta(3).unwrap();
        assert!((polylog_exp(order(3), 1e-12).unwrap() - z3).abs() < 1e-11);
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(2).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(3).unwrap() - 1.202_056_903_159_594_3).abs() < 1e-15);
        assert!((zeta(4).unwrap() - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(6).unwrap() - PI.powi(6) / 945.0).abs() < 1e-15);
        assert!(zeta(1).is_err());
        assert!(zeta(0).is_err());
    }

    #[test]
    fn zeta3_against_direct_summation_with_tail() {
        // sum to N plus the Euler-Maclaurin tail 1/(2N^2) - 1/(2 N^3) + 1/(4 N^4)
        let n = 10_000u32;
        let mut acc = KahanSum::new();
        for k in (1..=n).rev() {
            acc.add((k as f64).powi(-3));
        }
        let nf = n as f64;
        acc.add(1.0 / (2.0 * nf * nf) - 1.0 / (2.0 * nf.powi(3)) + 1.0 / (4.0 * nf.powi(4)));
        assert!((zeta(3).unwrap() - acc.value()).abs() < 1e-14);
    }

    #[test]
    fn even_bernoulli() {
        assert!((bernoulli_even_over_factorial(1) - 1.0 / 12.0).abs() < 1e-16);
        assert!((bernoulli_even_over_factorial(2) + 1.0 / 720.0).abs() < 1e-17);
        assert!((bernoulli_even_over_factorial(3) - 1.0 / 30240.0).abs() < 1e-18);
    }

    #[test]
    fn nonpositive_orders_match_direct_sums() {
        for n in 0..=8u32 {
            for &x in &[0.05, 0.3, 1.0, 4.0] {
                let mut acc = KahanSum::new();
                for l in (1..20_000u32).rev() {
                    acc.add((l as f64).powi(n as i32) * (-(l as f64) * x).exp());
                }
                let v = polylog_nonpositive(n, x).unwrap();
                assert!(((v - acc.value()) / v).abs() < 1e-12, "n={n} x={x}");
            }
        }
        assert!(polylog_nonpositive(9, 1.0).is_err());
        assert!(polylog_nonpositive(1, 0.0).is_err());
    }

    // K_0(x) = int_0^inf e^{-x cosh t} dt, K_1(x) = int_0^inf e^{-x cosh t} cosh t dt
    fn k_integral(x: f64, nu1: bool) -> f64 {
        let g = GaussLegendre::new(32);
        let t_max = (800.0 / x).acosh().max(1.0);
        integrate_panels(&g, &[0.0, t_max], 0.25, |t| {
            let w = if nu1 { t.cosh() } else { 1.0 };
            (-x * t.cosh()).exp() * w
        })
    }

    #[test]
    fn bessel_against_integral_representation() {
        for &x in &[1e-3, 0.1, 0.5, 1.0, 1.9, 2.0, 2.1, 3.0, 10.0, 50.0, 300.0] {
            let (k0, k1) = bessel_k01(x).unwrap();
            let q0 = k_integral(x, false);
            let q1 = k_integral(x, true);
            assert!(((k0 - q0) / q0).abs() < 1e-12, "K0({x}) = {k0} vs {q0}");
            assert!(((k1 - q1) / q1).abs() < 1e-12, "K1({x}) = {k1} vs {q1}");
        }
    }

    #[test]
    fn bessel_reference_values() {
        assert!((bessel_k0(1.0).unwrap() - 0.421_024_438_240_708_3).abs() < 1e-15);
        assert!((bessel_k1(1.0).unwrap() - 0.601_907_230_197_234_6).abs() < 1e-15);
        assert!((bessel_k0(2.0).unwrap() - 0.113_893_872_749_533_4).abs() < 1e-15);
        assert!((bessel_k1(2.0).unwrap() - 0.139_865_881_816_522_4).abs() < 1e-15);
    }

    #[test]
    fn bessel_regimes_agree_near_switch() {
        for &x in &[1.5, 2.0, 2.5, 3.0] {
            let a = k01_series(x);
            let b = k01_continued_fraction(x);
            assert!(((a.0 - b.0) / b.0).abs() < 1e-13, "K0 at {x}");
            assert!(((a.1 - b.1) / b.1).abs() < 1e-13, "K1 at {x}");
        }
    }

    #[test]
    fn bessel_asymptotic_ratio_and_underflow() {
        let r = bessel_k0(50.0).unwrap() / bessel_k0(49.0).unwrap();
        let expected = (-1.0f64).exp() * (49.0f64 / 50.0).sqrt();
        assert!(((r - expected) / expected).abs() < 0.02);
        assert_eq!(bessel_k0(800.0).unwrap(), 0.0);
        assert!(bessel_k0(700.0).unwrap() > 0.0);
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k1(-1.0).is_err());
    }

    #[test]
    fn k1_is_minus_k0_derivative() {
        let x = 2.0;
        let h = 1e-4;
        let d = (bessel_k0(x + h).unwrap() - bessel_k0(x - h).unwrap()) / (2.0 * h);
        assert!((d + bessel_k1(x).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn remainder_matches_plain_difference() {
        for &x in &[0.3, 0.69, 0.7, 1.5] {
            let li4 = polylog_exp(order(4), x).unwrap();
            let z4 = zeta(4).unwrap();
            let z3 = zeta(3).unwrap();
            let r = polylog_exp_remainder(order(4), x, 2).unwrap();
            assert!((r - (li4 - z4 + z3 * x)).abs() < 1e-14, "x = {x}");
            let r3 = polylog_exp_remainder(order(3), x, 1).unwrap();
            let li3 = polylog_exp(order(3), x).unwrap();
            assert!((r3 - (li3 - z3)).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn remainder_small_argument() {
        // Li_4(e^{-x}) - zeta(4) + zeta(3) x = zeta(2) x^2/2 - x^3 (11/6 - ln x)/6 - x^4/48 + O(x^5)
        let x: f64 = 1e-3;
        let z2 = zeta(2).unwrap();
        let expect = z2 * x * x / 2.0 - x.powi(3) * (11.0 / 6.0 - x.ln()) / 6.0 - x.powi(4) / 48.0;
        let r = polylog_exp_remainder(order(4), x, 2).unwrap();
        assert!(((r - expect) / expect).abs() < 1e-12, "{r} vs {expect}");
        assert!(polylog_exp_remainder(order(3), x, 3).is_err());
    }
}
