//! One PASS/FAIL line per acceptance criterion. The tests share a lock so
//! that each reported runtime is measured without competing work.

use std::sync::Mutex;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use kppspeeds::cylinder::{rescaled_speed, road_field_speed, speed_cylinder};
use kppspeeds::halfspace::{
    classify_kpp, classify_mortality, fisher_boundary, interior_boundary, regime_diagram, speed_halfspace,
    speed_halfspace_mortality, speed_halfspace_mortality_overlap, speed_halfspace_overlap,
    steady_state_halfspace_logistic, truncated_speed_halfspace,
};
use kppspeeds::mortality::{
    radial_steady_mortality, radial_steady_with_grid, robin_eigenvalue, robin_eigenvalue_with,
    shifted_amplitude_grid, speed_cylinder_mortality, survival_threshold_d, survival_threshold_r, DThreshold,
};
use kppspeeds::params::{Logistic, Params, Regime};
use kppspeeds::roots::{brent, Tol};
use kppspeeds::simulate::{run_radial, run_strip, Grid, SimConfig};
use kppspeeds::specfun::{bessel_i, bessel_j, bessel_k, first_zero_j, h_u, h_v, Kernel, Order};

static LOCK: Mutex<()> = Mutex::new(());

fn report(n: u32, title: &str, checks: &[(&str, bool)], started: Instant) {
    let ok = checks.iter().all(|c| c.1);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    println!(
        "criterion {n:>2} [{}] {title} ({:.2} s){}",
        if ok { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64(),
        if ok { String::new() } else { format!(" failed: {}", failed.join("; ")) }
    );
    assert!(ok, "criterion {n} failed: {failed:?}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

#[test]
fn criterion_01_closed_form_speeds() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let ca = speed_halfspace(&Params::kpp(3.0, 1.0, 0.5, 1.0)).unwrap();
    let cma = speed_halfspace_mortality(&Params::mortality(1.0, 4.0, 1.0, 1.0)).unwrap();
    let mut rng = StdRng::seed_from_u64(20240611);
    let mut counts = [0usize; 3];
    let mut worst_kpp = 0.0f64;
    while counts.iter().any(|&c| c < 100) {
        let p = Params::kpp(
            log_uniform(&mut rng, 0.05, 20.0),
            log_uniform(&mut rng, 0.05, 20.0),
            log_uniform(&mut rng, 0.05, 20.0),
            log_uniform(&mut rng, 0.05, 20.0),
        );
        let k = match classify_kpp(p.diff_u, p.diff_v, p.gp, p.fp().unwrap()) {
            Regime::Fisher => 0,
            Regime::Interior => 1,
            Regime::Anomalous => 2,
        };
        if counts[k] >= 100 {
            continue;
        }
        counts[k] += 1;
        let closed = speed_halfspace(&p).unwrap().c;
        worst_kpp = worst_kpp.max((speed_halfspace_overlap(&p).unwrap() - closed).abs());
    }
    let mut mcounts = [0usize; 2];
    let mut worst_m = 0.0f64;
    while mcounts.iter().any(|&c| c < 100) {
        let p = Params::mortality(
            log_uniform(&mut rng, 0.05, 20.0),
            log_uniform(&mut rng, 0.05, 20.0),
            log_uniform(&mut rng, 0.05, 20.0),
            log_uniform(&mut rng, 0.05, 20.0),
        );
        let k = usize::from(classify_mortality(p.diff_u, p.diff_v, p.gp, p.rho().unwrap()) == Regime::Anomalous);
        if mcounts[k] >= 100 {
            continue;
        }
        mcounts[k] += 1;
        let closed = speed_halfspace_mortality(&p).unwrap().c;
        worst_m = worst_m.max((speed_halfspace_mortality_overlap(&p).unwrap() - closed).abs());
    }
    let elapsed = t.elapsed().as_secs_f64();
    println!("  c_a = {:.12}, c_ma = {:.12}, overlap gaps {worst_kpp:.2e} / {worst_m:.2e}", ca.c, cma.c);
    report(
        1,
        "closed-form half-space speeds",
        &[
            ("c_a = 2.5", (ca.c - 2.5).abs() <= 1e-9 && ca.regime == Some(Regime::Anomalous)),
            ("c_ma = 5/sqrt 6", (cma.c - 5.0 / 6f64.sqrt()).abs() <= 1e-9),
            ("overlap vs closed, KPP", worst_kpp <= 1e-9),
            ("overlap vs closed, mortality", worst_m <= 1e-9),
            ("runtime < 1 s", elapsed < 1.0),
        ],
        t,
    );
}

#[test]
fn criterion_02_regime_diagram() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let cells = regime_diagram((0.1, 5.0), (0.1, 3.0), 50, 50);
    let analytic = |x: f64, y: f64| {
        if y <= 2.0 - x {
            Regime::Fisher
        } else if x > 0.5 && y >= x / (2.0 * x - 1.0) {
            Regime::Interior
        } else {
            Regime::Anomalous
        }
    };
    let mismatches = cells.iter().filter(|c| c.regime != analytic(c.x, c.y)).count();
    let speed = |x: f64, y: f64| speed_halfspace(&Params::kpp(x, 1.0, y, 1.0)).unwrap().c;
    let mut jump = 0.0f64;
    for x in [0.2, 0.5, 0.9, 1.3, 1.8] {
        let y = fisher_boundary(x);
        jump = jump.max((speed(x, y + 1e-6) - speed(x, y - 1e-6)).abs());
    }
    for x in [0.7, 1.2, 2.0, 3.5, 5.0] {
        let y = interior_boundary(x).unwrap();
        jump = jump.max((speed(x, y + 1e-6) - speed(x, y - 1e-6)).abs());
    }
    println!("  {mismatches} mismatched cells of {}, largest jump {jump:.2e}", cells.len());
    report(
        2,
        "regime diagram and continuity of c*",
        &[("50x50 grid matches boundaries", mismatches == 0 && cells.len() == 2500), ("jump <= 1e-4", jump <= 1e-4)],
        t,
    );
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

#[test]
fn criterion_03_special_function_properties() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let orders: Vec<Order> = (-1..=8).map(|k| Order::from_twice(k).unwrap()).collect();

    let mut ratios_ok = true;
    for &tau in &orders {
        let j = first_zero_j(tau);
        for eps in [1, 2] {
            let up = Order::from_twice(tau.twice() + 2 * eps).unwrap();
            for alpha in [-1i32, 0, 1] {
                let vals: Vec<f64> = (1..=200)
                    .map(|k| {
                        let r = 0.999 * j * k as f64 / 200.0;
                        r.powi(alpha) * bessel_j(up, r).unwrap() / bessel_j(tau, r).unwrap()
                    })
                    .collect();
                ratios_ok &= strictly_increasing(&vals);
            }
        }
    }

    let mut prop_a3 = true;
    for &tau in &orders {
        let j = first_zero_j(tau);
        let vals: Vec<f64> = (1..=100)
            .map(|k| {
                let r = 0.99 * j * k as f64 / 100.0;
                let d = (h_u(tau, r + 1e-6).unwrap() - h_u(tau, r - 1e-6).unwrap()) / 2e-6;
                d / r
            })
            .collect();
        prop_a3 &= strictly_increasing(&vals);
    }

    let mut deriv = 0.0f64;
    for &tau in &orders {
        let up = Order::from_twice(tau.twice() + 2).unwrap();
        let nu = tau.value();
        for r in [0.3, 1.0, 2.2, 4.5] {
            let h = 1e-5;
            let fd = |f: &dyn Fn(f64) -> f64| (f(r + h) - f(r - h)) / (2.0 * h);
            let jd = fd(&|x| x.powf(-nu) * bessel_j(tau, x).unwrap());
            let kd = fd(&|x| x.powf(-nu) * bessel_k(tau, x).unwrap());
            let id = fd(&|x| x.powf(-nu) * bessel_i(tau, x).unwrap());
            let w = r.powf(-nu);
            deriv = deriv.max(rel(jd, -w * bessel_j(up, r).unwrap()));
            deriv = deriv.max(rel(kd, -w * bessel_k(up, r).unwrap()));
            deriv = deriv.max(rel(id, w * bessel_i(up, r).unwrap()));
        }
    }

    let mut closed = 0.0f64;
    for k in 1..=200 {
        let r = 0.05 * k as f64;
        closed = closed.max((h_v(Order::MINUS_HALF, r).unwrap() - r).abs());
        closed = closed.max((h_v(Order::HALF, r).unwrap() - (r + 1.0)).abs());
    }
    let j0 = first_zero_j(Order::ZERO);
    let j1 = first_zero_j(Order::ONE);
    println!("  derivative identities rel err {deriv:.2e}, closed-form h_v err {closed:.2e}, j0 = {j0:.12}, j1 = {j1:.12}");
    let elapsed = t.elapsed().as_secs_f64();
    report(
        3,
        "special-function property suite",
        &[
            ("ratio monotonicity", ratios_ok),
            ("h_u'(r)/r increasing", prop_a3),
            ("derivative identities to 1e-6", deriv <= 1e-6),
            ("h_v closed forms to 1e-10", closed <= 1e-10),
            ("j0", (j0 - 2.4048255577).abs() <= 1e-8),
            ("j1", (j1 - 3.8317059702).abs() <= 1e-8),
            ("runtime < 10 s", elapsed < 10.0),
        ],
        t,
    );
}

#[test]
fn criterion_04_robin_eigenvalue() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let p = Params::mortality(1.0, 1.0, 1.0, 1.0);
    let trig = brent(|b: f64| b * b.tan() - 0.5, 0.1, 1.5, Tol::TIGHT).unwrap();
    let generic = robin_eigenvalue_with(&p, Kernel::Generic).unwrap();
    let betas: Vec<f64> = (0..50).map(|k| robin_eigenvalue(&p.with_radius(0.2 * 1.1f64.powi(k))).unwrap().beta0).collect();
    let decreasing = betas.windows(2).all(|w| w[1] < w[0]);
    let e = robin_eigenvalue(&p.with_diff_u(1e4)).unwrap();
    let limit = e.kappa * f64::from(p.dim - 1) / p.radius;
    let large_d = rel(1e4 * e.beta0 * e.beta0, limit);
    println!("  beta0 = {:.12} (trig {trig:.12}), D beta0^2 at 1e4 off by {large_d:.2e}", generic.beta0);
    report(
        4,
        "Robin eigenvalue cross-validation",
        &[
            ("generic vs trig to 1e-8", (generic.beta0 - trig).abs() <= 1e-8),
            ("beta0 ~ 0.6533", (trig - 0.6533).abs() < 1e-4),
            ("beta0(R) decreasing", decreasing),
            ("large-D limit within 1%", large_d < 0.01),
        ],
        t,
    );
}

#[test]
fn criterion_05_cylinder_limits() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let base = Params::kpp(3.0, 1.0, 0.5, 1.0);
    let c_wide = speed_cylinder(&base.with_radius(100.0)).unwrap().c_star;
    let c_thin = speed_cylinder(&base.with_radius(1e-3)).unwrap().c_star;
    let c_slow = speed_cylinder(&Params::kpp(1e-4, 1.0, 3.0, 1.0)).unwrap().c_star;
    let c0 = 3.0 / 2f64.sqrt();
    let s3 = speed_cylinder(&base.with_diff_u(1e3)).unwrap().c_star / 1e3f64.sqrt();
    let s4 = speed_cylinder(&base.with_diff_u(1e4)).unwrap().c_star / 1e4f64.sqrt();
    let elapsed = t.elapsed().as_secs_f64();
    println!("  c*(R=100) = {c_wide:.8}, c*(R=1e-3) = {c_thin:.8}, c*(D=1e-4) = {c_slow:.8}, c*/sqrt D = {s3:.6} / {s4:.6}");
    report(
        5,
        "cylinder limits",
        &[
            ("R = 100 within 1% of c_a", rel(c_wide, 2.5) < 0.01),
            ("R = 1e-3 within 1% of c_f", rel(c_thin, 2.0) < 0.01),
            ("D = 1e-4 within 1% of c0", rel(c_slow, c0) < 0.01),
            ("c*/sqrt D converges", rel(s3, s4) < 0.02),
            ("runtime < 30 s", elapsed < 30.0),
        ],
        t,
    );
}

#[test]
fn criterion_06_road_field_limit() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let p = Params::kpp(4.0, 1.0, 1.0, 1.0);
    let c_rf = road_field_speed(&p).unwrap().c;
    let linear = rescaled_speed(&p, |r| p.mu * r, 1e-3).unwrap().c;
    let constant = rescaled_speed(&p, |_| p.mu, 1e-3).unwrap().c;
    let quadratic = rescaled_speed(&p, |r| p.mu * r * r, 1e-3).unwrap().c;
    let c_inf = speed_halfspace(&p).unwrap().c;
    println!("  c_rf = {c_rf:.8}, rescaled {linear:.8}, constant {constant:.8}, quadratic {quadratic:.8} vs {c_inf:.8}");
    report(
        6,
        "road-field limit",
        &[
            ("mu R -> c_rf", rel(linear, c_rf) < 0.01),
            ("constant -> c_f", rel(constant, 2.0) < 0.01),
            ("mu R^2 -> c*_inf", rel(quadratic, c_inf) < 0.01),
        ],
        t,
    );
}

#[test]
fn criterion_07_truncated_convergence() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let p = Params::kpp(3.0, 1.0, 0.5, 1.0);
    let ca = speed_halfspace(&p).unwrap().c;
    let gaps: Vec<f64> =
        [10.0, 20.0, 40.0].iter().map(|&l| (ca - truncated_speed_halfspace(&p, l, 0.0).unwrap().c) / ca).collect();
    println!("  relative gaps {gaps:?}");
    report(
        7,
        "truncated-domain speeds",
        &[
            ("c*_L < c_a", gaps.iter().all(|&g| g > 0.0)),
            ("gap decreasing", gaps.windows(2).all(|w| w[1] < w[0])),
            ("gap < 5% at L = 40", gaps[2] < 0.05),
        ],
        t,
    );
}

#[test]
fn criterion_08_mortality_thresholds() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let p = Params::mortality(1.0, 1.0, 1.0, 1.0);
    let survives = |q: &Params| robin_eigenvalue(q).unwrap().survives;
    let r0 = survival_threshold_r(&p).unwrap();
    let r_flip = !survives(&p.with_radius(0.99 * r0)) && survives(&p.with_radius(1.01 * r0));
    let q = p.with_exchange(4.0, 1.0);
    let d_flip = match survival_threshold_d(&q).unwrap() {
        DThreshold::D0(d0) => survives(&q.with_diff_u(0.99 * d0)) && !survives(&q.with_diff_u(1.01 * d0)),
        DThreshold::AllD { .. } => false,
    };
    let all_d = survival_threshold_d(&p).unwrap() == DThreshold::AllD { equality: false };
    let c_near = speed_cylinder_mortality(&p.with_radius(1.01 * r0)).unwrap().c_star;
    let cs: Vec<f64> = (0..20)
        .map(|k| speed_cylinder_mortality(&p.with_radius(1.01 * r0 * 100f64.powf(k as f64 / 19.0))).unwrap().c_star)
        .collect();
    let m = Params::mortality(1.0, 4.0, 1.0, 1.0);
    let c_wide = speed_cylinder_mortality(&m.with_radius(100.0)).unwrap().c_star;
    let c_inf = speed_halfspace_mortality(&m).unwrap().c;
    println!("  R0 = {r0:.10}, c*_m(1.01 R0) = {c_near:.6}, c*_m(R=100) = {c_wide:.8} vs {c_inf:.8}");
    report(
        8,
        "mortality thresholds and speeds",
        &[
            ("flip at R0", r_flip),
            ("flip at D0", d_flip),
            ("all-D survival case", all_d),
            ("c*_m(1.01 R0) < 0.2 c_g", c_near < 0.2 * p.c_g()),
            ("c*_m increasing in R", strictly_increasing(&cs)),
            ("R = 100 within 2%", rel(c_wide, c_inf) < 0.02),
        ],
        t,
    );
}

#[test]
fn criterion_09_solver_vs_simulator() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let p = Params::kpp(2.0, 1.0, 1.0, 1.0);
    let c_star = speed_cylinder(&p).unwrap().c_star;
    let grid = Grid { nx: 600, ny_u: 10, ny_v: 190, lx: 200.0, ly: 19.0 };
    let mut strip = SimConfig::strip(p, grid, 0.0, 40.0);
    strip.dt = 0.999 * strip.stability_bound();
    strip.sample_every = 0.1;
    let sim = run_strip(&strip).unwrap();
    let speed_err = rel(sim.fitted_speed, c_star);

    let mut dead = Params::mortality(1.0, 1.0, 0.3, 1.0);
    let mut radial = SimConfig::radial(dead, 20, 300, 15.0, 6e-4, 150.0);
    radial.second_order = true;
    let survives_dead = robin_eigenvalue(&dead).unwrap().survives;
    let extinct = run_radial(&radial).unwrap();

    dead.gp = 1.0;
    let alive = dead;
    radial.params = alive;
    radial.t_end = 80.0;
    let settled = run_radial(&radial).unwrap();
    let shot = radial_steady_mortality(&alive, &Logistic::new(alive.gp, 1.0), 2001).unwrap();
    let ny_u = radial.grid.ny_u;
    let sup_err = settled.coords[..ny_u]
        .iter()
        .zip(&settled.profile[..ny_u])
        .map(|(&r, &u)| {
            let x = r / alive.radius * 2000.0;
            let k = x.floor() as usize;
            let w = x - k as f64;
            let reference = (1.0 - w) * shot.interior[k].1 + w * shot.interior[k + 1].1;
            (u - reference).abs()
        })
        .fold(0.0, f64::max)
        / shot.a0;
    let elapsed = t.elapsed().as_secs_f64();
    println!(
        "  strip speed {:.6} vs c* {c_star:.6} ({:.2}%), extinct sup {:.2e}, radial sup-error {:.3}%",
        sim.fitted_speed,
        100.0 * speed_err,
        extinct.sup_u + extinct.sup_v,
        100.0 * sup_err
    );
    report(
        9,
        "solver vs simulator",
        &[
            ("strip speed within 10%", speed_err < 0.10),
            ("extinction when beta0^2 > gp/D", !survives_dead && extinct.extinct),
            ("radial profile within 1%", sup_err < 0.01),
            ("runtime < 5 min", elapsed < 300.0),
        ],
        t,
    );
}

#[test]
fn criterion_10_steady_states() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut flux = 0.0f64;
    for (dd, d, gp, fp, mu, nu) in
        [(1.0, 1.0, 1.0, 1.0, 2.0, 1.0), (3.0, 1.0, 0.5, 1.0, 1.0, 3.0), (0.5, 2.0, 2.0, 0.7, 0.4, 1.5)]
    {
        let s = steady_state_halfspace_logistic(&Params::kpp(dd, d, gp, fp).with_exchange(mu, nu), 100).unwrap();
        flux = flux.max(s.flux_residual);
    }
    let balanced = steady_state_halfspace_logistic(&Params::kpp(1.0, 2.0, 1.0, 1.0).with_exchange(3.0, 1.5).with_capacity(2.0), 50)
        .unwrap();
    let exact = balanced.u0 == 1.0 && balanced.v0 == 2.0;

    let m = Params::mortality(1.0, 2.0, 1.0, 0.5).with_exchange(1.5, 1.0);
    let s = steady_state_halfspace_logistic(&m, 200).unwrap();
    let k = (0.5f64 / 2.0).sqrt();
    let exterior = s.v.iter().map(|&(x, v)| (v - s.v0 * (-k * x).exp()).abs()).fold(0.0, f64::max);

    let p = Params::mortality(1.0, 1.0, 1.0, 1.0);
    let g = Logistic::new(p.gp, 1.0);
    let a = radial_steady_mortality(&p, &g, 100).unwrap();
    let b = radial_steady_with_grid(&p, &g, 100, &shifted_amplitude_grid()).unwrap();
    println!(
        "  flux residual {flux:.2e}, exterior profile err {exterior:.2e}, Robin residual {:.2e}, amplitudes {:.12} / {:.12}",
        a.robin_residual, a.a0, b.a0
    );
    report(
        10,
        "steady states",
        &[
            ("flux residuals <= 1e-8", flux <= 1e-8),
            ("mu = nu S gives (1, S)", exact),
            ("mortality exterior exponential", exterior <= 1e-8),
            ("Robin residual <= 1e-8", a.robin_residual <= 1e-8),
            ("unique amplitude", (a.a0 - b.a0).abs() <= 1e-8),
        ],
        t,
    );
}
