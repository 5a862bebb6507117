use proptest::prelude::*;

use kppspeeds::cli::{parse_config, render, Command, Model, RunConfig, Scale, Sweep, SweepVar};
use kppspeeds::halfspace::{speed_halfspace, speed_halfspace_overlap};
use kppspeeds::params::{Exterior, Params};
use kppspeeds::specfun::{bessel_j, bessel_k, h_v, k_v, Order};

#[test]
fn k_ratio_decreasing_for_orders_above_minus_half() {
    for twice in 0..=10 {
        let tau = Order::from_twice(twice).unwrap();
        let up = Order::from_twice(twice + 2).unwrap();
        let ratios: Vec<f64> =
            (1..=100).map(|k| 0.1 * k as f64).map(|r| bessel_k(up, r).unwrap() / bessel_k(tau, r).unwrap()).collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "tau = {}", tau.value());
    }
}

#[test]
fn large_order_law() {
    for twice in [40, 60] {
        let tau = Order::from_twice(twice).unwrap();
        let t = tau.value();
        let scaled = bessel_j(tau, 1.0).unwrap() * (2.0 * std::f64::consts::PI * t).sqrt() * (2.0 * t / std::f64::consts::E).powf(t);
        assert!((scaled - 1.0).abs() < 0.05, "tau = {t}: {scaled}");
    }
}

fn pos() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_construction_matches_closed_form(dd in pos(), d in pos(), gp in pos(), fp in pos()) {
        let p = Params::kpp(dd, d, gp, fp);
        let closed = speed_halfspace(&p).unwrap().c;
        prop_assert!((speed_halfspace_overlap(&p).unwrap() - closed).abs() <= 1e-9 * closed.max(1.0));
    }

    #[test]
    fn h_v_inverse_round_trip(twice in 0i32..12, r in 0.05f64..20.0) {
        let tau = Order::from_twice(twice).unwrap();
        let s = h_v(tau, r).unwrap();
        prop_assert!((k_v(tau, s).unwrap() - r).abs() <= 1e-9 * r);
    }

    #[test]
    fn config_render_round_trip(
        dd in pos(), d in pos(), gp in pos(), other in pos(), mu in pos(), nu in pos(), r in pos(), s in pos(),
        dim in 2u32..8, mortality in any::<bool>(), sweep in any::<bool>(), count in 2usize..40,
    ) {
        let exterior = if mortality { Exterior::Mortality { rho: other } } else { Exterior::Kpp { fp: other } };
        let params = Params { dim, diff_u: dd, diff_v: d, gp, exterior, mu, nu, radius: r, capacity: s };
        let cfg = RunConfig {
            command: if sweep { Command::Sweep } else { Command::Speed },
            model: Model::Cylinder,
            params,
            sweep: sweep.then_some(Sweep { var: SweepVar::Radius, start: r, stop: 2.0 * r, count, scale: Scale::Log }),
            sim: None,
            output_path: None,
        };
        prop_assert_eq!(parse_config(&render(&cfg)).unwrap(), cfg);
    }
}
