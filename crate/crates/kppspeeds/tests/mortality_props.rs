use kppspeeds::mortality::{
    cg_upper_bound_check, robin_eigenvalue, speed_cylinder_mortality, survival_threshold_d, DThreshold,
};
use kppspeeds::params::Params;

fn unit() -> Params {
    Params::mortality(1.0, 1.0, 1.0, 1.0)
}

#[test]
fn large_d_expansion_of_the_eigenvalue() {
    for dim in [2, 3, 4] {
        let p = unit().with_dim(dim);
        for dd in [1e3, 1e4] {
            let e = robin_eigenvalue(&p.with_diff_u(dd)).unwrap();
            let limit = e.kappa * f64::from(dim - 1) / p.radius;
            assert!((dd * e.beta0 * e.beta0 - limit).abs() / limit < 0.01, "N = {dim}, D = {dd}");
        }
    }
}

#[test]
fn beta0_residual_and_monotonicity_in_r() {
    let mut prev = f64::INFINITY;
    for k in 0..40 {
        let e = robin_eigenvalue(&unit().with_radius(0.1 * 1.15f64.powi(k))).unwrap();
        assert!(e.residual <= 1e-10 && e.beta0 < prev);
        prev = e.beta0;
    }
}

#[test]
fn strict_case_speed_scales_like_sqrt_d() {
    assert_eq!(survival_threshold_d(&unit()).unwrap(), DThreshold::AllD { equality: false });
    let s = |dd: f64| speed_cylinder_mortality(&unit().with_diff_u(dd)).unwrap().c_star / dd.sqrt();
    let (a, b) = (s(1e3), s(1e4));
    assert!((a - b).abs() / b < 0.02, "{a} vs {b}");
}

#[test]
fn equality_case_speed_stays_bounded() {
    // N = 2, R = d = rho = 1: kappa = mu/(nu + 1), so mu = 2 gives kappa(N-1)/R = gp
    let p = unit().with_exchange(2.0, 1.0);
    assert_eq!(survival_threshold_d(&p).unwrap(), DThreshold::AllD { equality: true });
    let c2 = speed_cylinder_mortality(&p.with_diff_u(1e2)).unwrap().c_star;
    let c4 = speed_cylinder_mortality(&p.with_diff_u(1e4)).unwrap().c_star;
    assert!(c4 < 3.0 * c2, "{c4} vs {c2}");
}

#[test]
fn speed_vanishes_near_d0() {
    let p = unit().with_exchange(4.0, 1.0);
    let DThreshold::D0(d0) = survival_threshold_d(&p).unwrap() else { panic!("finite D0 expected") };
    let near = speed_cylinder_mortality(&p.with_diff_u(0.99 * d0)).unwrap().c_star;
    let far = speed_cylinder_mortality(&p.with_diff_u(0.5 * d0)).unwrap().c_star;
    assert!(near < 0.2 * far, "{near} vs {far}");
}

#[test]
fn interior_speed_bound_when_condition_holds() {
    for (dd, d, gp, rho, r) in [(2.0, 1.0, 1.0, 1.0, 1.0), (1.0, 1.5, 1.0, 2.0, 3.0), (5.0, 0.5, 0.5, 1.0, 2.0)] {
        let c = cg_upper_bound_check(&Params::mortality(dd, d, gp, rho).with_radius(r)).unwrap();
        assert!(c.condition, "condition should hold for D = {dd}, d = {d}");
        assert!(c.c_star_m < c.c_g);
    }
}

#[test]
fn higher_dimension_needs_d_at_least_d() {
    let p = unit().with_dim(6).with_radius(3.0);
    assert!(speed_cylinder_mortality(&p.with_diff_u(0.5)).is_err());
    let ok = speed_cylinder_mortality(&p.with_diff_u(2.0)).unwrap();
    assert!(!ok.diagnostics.notes.is_empty());
}
