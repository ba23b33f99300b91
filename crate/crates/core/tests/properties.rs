use casimir_core::geometry::{p_factor, p_factor_hat, p_factor_recursion_check, RibbonPair, SpherePair};
use casimir_core::lattice::ExpPolyLattice;
use casimir_core::scalar1d::evaluate_1d;
use casimir_core::scalar3d::{entropy_3d_kernel, free_energy_3d_kernel, internal_energy_3d_kernel};
use casimir_core::specfun::{bernoulli_even_over_factorial, bessel_k01, polylog, polylog_exp, PolylogOrder};
use casimir_core::system::FieldConfig;
use casimir_core::thermo::{approx_eq, entropy_from_free_energy, UnitSystem};
use casimir_core::NumericsPolicy;
use num_rational::Ratio;
use proptest::prelude::*;

fn li(s: u32, z: f64) -> f64 {
    polylog(PolylogOrder::new(s).unwrap(), z).unwrap()
}

fn direct_polylog(s: u32, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zk = z;
    for k in 1..20_000u32 {
        let term = zk / f64::from(k).powi(s as i32);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        zk *= z;
    }
    sum
}

/// B_{2k}/(2k)! from the exact recurrence sum_{j<=n} C(n+1, j) B_j = 0.
fn exact_bernoulli_over_factorial(k: usize) -> f64 {
    let n_max = 2 * k;
    let mut b: Vec<Ratio<i128>> = vec![Ratio::from_integer(1)];
    for n in 1..=n_max {
        let mut acc = Ratio::from_integer(0);
        let mut binom: i128 = 1;
        for (j, bj) in b.iter().enumerate() {
            acc += *bj * binom;
            binom = binom * (n as i128 + 1 - j as i128) / (j as i128 + 1);
        }
        b.push(-acc / (n as i128 + 1));
    }
    let fact: f64 = (1..=n_max).map(|j| j as f64).product();
    let v = b[n_max];
    *v.numer() as f64 / *v.denom() as f64 / fact
}

#[test]
fn bernoulli_matches_exact_rationals() {
    for k in 1..=10 {
        let exact = exact_bernoulli_over_factorial(k);
        let got = bernoulli_even_over_factorial(k as u32);
        assert!(approx_eq(got, exact, 1e-13, 0.0), "k={k}: {got} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn polylog_matches_direct_sum(s in 1u32..=6, z in 0.0f64..0.9) {
        let d = direct_polylog(s, z);
        prop_assert!(approx_eq(li(s, z), d, 1e-12, 1e-300));
    }

    #[test]
    fn polylog_orders_are_ordered(s in 2u32..=6, z in 1e-6f64..0.999) {
        prop_assert!(li(s, z) <= li(s - 1, z) * (1.0 + 1e-14));
    }

    #[test]
    fn polylog_ladder(s in 2u32..=6, x in 0.05f64..5.0) {
        // d/dx Li_s(e^{-x}) = -Li_{s-1}(e^{-x})
        let f = |x: f64| polylog_exp(PolylogOrder::new(s).unwrap(), x).unwrap();
        let h = 1e-3 * x;
        let d = (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h);
        let lower = polylog_exp(PolylogOrder::new(s - 1).unwrap(), x).unwrap();
        prop_assert!(approx_eq(-d, lower, 1e-6, 0.0), "{} vs {}", -d, lower);
    }

    #[test]
    fn bessel_k_positive_decreasing(x in 1e-3f64..40.0, dx in 1e-3f64..1.0) {
        let (k0, k1) = bessel_k01(x).unwrap();
        let (k0b, k1b) = bessel_k01(x + dx).unwrap();
        prop_assert!(k0 > 0.0 && k1 > k0);
        prop_assert!(k0b < k0 && k1b < k1);
    }

    #[test]
    fn bessel_k1_is_minus_k0_derivative(x in 0.05f64..30.0) {
        let h = 1e-4 * x;
        let k0 = |x: f64| bessel_k01(x).unwrap().0;
        let d = (8.0 * (k0(x + h) - k0(x - h)) - (k0(x + 2.0 * h) - k0(x - 2.0 * h))) / (12.0 * h);
        prop_assert!(approx_eq(-d, bessel_k01(x).unwrap().1, 1e-6, 0.0));
    }

    #[test]
    fn p_factor_is_symmetric(p in -6i32..=3, a in 0.01f64..0.6, frac in 0.05f64..0.95) {
        let b = frac * (0.98 - a);
        prop_assert!(approx_eq(p_factor_hat(p, a, b).unwrap(), p_factor_hat(p, b, a).unwrap(), 1e-12, 0.0));
    }

    #[test]
    fn p_factor_minus_one_is_one(a in 0.01f64..0.6, frac in 0.05f64..0.95) {
        prop_assert_eq!(p_factor_hat(-1, a, frac * (0.98 - a)).unwrap(), 1.0);
    }

    #[test]
    fn p_factor_point_limit(p in -6i32..=3, scale in 1e-4f64..1e-3) {
        let v = p_factor_hat(p, scale, 0.7 * scale).unwrap();
        prop_assert!((v - 1.0).abs() < 1e-4, "P_{} = {}", p, v);
    }

    #[test]
    fn p_factor_recursion(p in prop::sample::select(vec![-2, 0, 1, 2, 3]), a in 0.5f64..2.0, b in 0.5f64..2.0, gap in 1.0f64..10.0) {
        let pair = SpherePair::new(a, b, a + b + gap, 1.0, 1.0).unwrap();
        let h = 1e-3 * pair.center_distance();
        prop_assert!(p_factor_recursion_check(p, &pair, h).unwrap() <= 1e-6 * p_factor(p - 1, &pair).unwrap().abs().max(1.0));
    }

    #[test]
    fn lattice_routes_agree(x in 0.3f64..3.0) {
        let lat = ExpPolyLattice::new(&[3.0, 6.0, 5.0, 2.0, 1.0]);
        let (a, b) = (lat.eval_series(x), lat.eval_closed(x));
        prop_assert!(approx_eq(a.g, b.g, 1e-11, 0.0));
        prop_assert!(approx_eq(a.x_dg, b.x_dg, 1e-10, 0.0));
    }

    #[test]
    fn ribbon_thermodynamics_consistent(w1 in 0.5f64..10.0, gap in 0.5f64..10.0, w2 in 0.5f64..10.0, t in 1e-3f64..5.0) {
        let u = UnitSystem::natural();
        let pair = RibbonPair::from_widths(w1, gap, w2, 1.3, 0.7).unwrap();
        let r = evaluate_1d(&pair, t, &u).unwrap();
        let e = |t: f64| evaluate_1d(&pair, t, &u).unwrap().point.e_total();
        let s = entropy_from_free_energy(e, t, 1e-4 * t).unwrap().value;
        prop_assert!(approx_eq(r.point.entropy, s, 1e-4, 1e-9));
        let p = r.point;
        prop_assert!(approx_eq(p.internal_energy, p.e_total() + t * p.entropy, 1e-6, 1e-12));
    }

    #[test]
    fn ribbon_energy_translation_invariant(shift in -50.0f64..50.0, t in 1e-2f64..5.0) {
        let u = UnitSystem::natural();
        let p1 = RibbonPair::new(0.0, 2.0, 10.0, 14.0, 1.0, 2.0).unwrap();
        let p2 = RibbonPair::new(shift, 2.0 + shift, 10.0 + shift, 14.0 + shift, 1.0, 2.0).unwrap();
        let (e1, e2) = (evaluate_1d(&p1, t, &u).unwrap().point, evaluate_1d(&p2, t, &u).unwrap().point);
        prop_assert!(approx_eq(e1.e_total(), e2.e_total(), 1e-9, 0.0));
    }

    #[test]
    fn interaction_is_bilinear_in_chi(c1 in 0.0f64..50.0, c2 in 0.0f64..50.0, t in 1e-2f64..5.0) {
        let u = UnitSystem::natural();
        let base = RibbonPair::from_widths(1.0, 4.0, 1.0, 1.0, 1.0).unwrap();
        let scaled = RibbonPair::from_widths(1.0, 4.0, 1.0, c1, c2).unwrap();
        let (a, b) = (evaluate_1d(&base, t, &u).unwrap().point, evaluate_1d(&scaled, t, &u).unwrap().point);
        prop_assert!(approx_eq(b.e_interaction, c1 * c2 * a.e_interaction, 1e-12, 1e-300));
    }

    #[test]
    fn kernel_3d_signs(s in 0.1f64..50.0, t in 1e-3f64..10.0) {
        let u = UnitSystem::natural();
        let e = free_energy_3d_kernel(s, t, &u).unwrap();
        let entropy = entropy_3d_kernel(s, t, &u).unwrap();
        let ui = internal_energy_3d_kernel(s, t, &u).unwrap();
        prop_assert!(e < 0.0 && entropy > 0.0);
        prop_assert!(approx_eq(ui, e + t * entropy, 1e-9, 1e-14 * e.abs()));
    }

    #[test]
    fn sphere_swap_symmetry(a in 0.5f64..3.0, b in 0.5f64..3.0, gap in 0.5f64..20.0, t in 1e-2f64..3.0) {
        let u = UnitSystem::natural();
        let n = NumericsPolicy::default();
        let r = a + b + gap;
        for em in [false, true] {
            let wrap = |p: SpherePair| if em { FieldConfig::Em(p) } else { FieldConfig::Scalar3D(p) };
            let x = wrap(SpherePair::new(a, b, r, 2.0, 3.0).unwrap()).closed_free_energy(t, &u, &n).unwrap();
            let y = wrap(SpherePair::new(b, a, r, 3.0, 2.0).unwrap()).closed_free_energy(t, &u, &n).unwrap();
            prop_assert!(approx_eq(x, y, 1e-10, 0.0));
        }
    }
}
