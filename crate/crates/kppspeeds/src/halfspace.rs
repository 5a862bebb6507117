//! Two half-spaces coupled across a hyperplane: closed-form speeds and their
//! region-overlap cross-check, steady states from first integrals, the
//! truncated-domain speed `c*_L`, and the regime diagram.

use crate::error::{Error, Result};
use crate::params::{Diagnostics, Logistic, Params, Reaction, Regime, SpeedResult};
use crate::quad::simpson;
use crate::overlap::{quad_roots, scan_min};
use crate::roots::{bisect_threshold, brent, Tol};

/// `(c_f, c_g)`.
pub fn fisher_speeds(p: &Params) -> Result<(f64, f64)> {
    Ok((p.c_f()?, p.c_g()))
}

/// Regime of the KPP/KPP half-space problem; ties go to `Fisher`.
pub fn classify_kpp(diff_u: f64, diff_v: f64, gp: f64, fp: f64) -> Regime {
    if diff_u / diff_v <= 2.0 - gp / fp {
        Regime::Fisher
    } else if diff_v / diff_u <= 2.0 - fp / gp {
        Regime::Interior
    } else {
        Regime::Anomalous
    }
}

/// Regime of the KPP/mortality half-space problem.
pub fn classify_mortality(diff_u: f64, diff_v: f64, gp: f64, rho: f64) -> Regime {
    if diff_v / diff_u <= 2.0 + rho / gp {
        Regime::Interior
    } else {
        Regime::Anomalous
    }
}

/// `c*_∞` for the KPP/KPP half-space problem from the closed forms, cross
/// checked against the region-overlap construction.
pub fn speed_halfspace(p: &Params) -> Result<SpeedResult> {
    p.validate()?;
    let fp = p.fp()?;
    let (dd, d, gp) = (p.diff_u, p.diff_v, p.gp);
    let (cf, cg) = (p.c_f()?, p.c_g());
    let regime = classify_kpp(dd, d, gp, fp);
    let (c, alpha) = match regime {
        Regime::Fisher => (cf, cf / (2.0 * d)),
        Regime::Interior => (cg, cg / (2.0 * dd)),
        Regime::Anomalous => {
            let c = (dd * fp - d * gp).abs() / ((dd - d) * (fp - gp)).sqrt();
            let (rd_minus, rd_plus) = quad_roots(c, dd, gp).unwrap_or((c / (2.0 * dd), c / (2.0 * dd)));
            let (rv_minus, rv_plus) = quad_roots(c, d, fp).unwrap_or((c / (2.0 * d), c / (2.0 * d)));
            let alpha = if (rd_minus - rv_plus).abs() < (rv_minus - rd_plus).abs() {
                0.5 * (rd_minus + rv_plus)
            } else {
                0.5 * (rv_minus + rd_plus)
            };
            (c, alpha)
        }
    };
    let overlap = speed_halfspace_overlap(p)?;
    let residual = (overlap - c).abs();
    let mut notes = Vec::new();
    if residual > 1e-9 * c {
        notes.push(format!("region-overlap speed {overlap} disagrees with closed form {c}"));
    }
    Ok(SpeedResult {
        c,
        regime: Some(regime),
        witness: Some((0.0, alpha)),
        diagnostics: Diagnostics { iterations: 0, residual, notes },
    })
}

/// `c*_∞` as the first `c ≥ max(c_f, c_g)` at which the root intervals
/// `[r_D^-, r_D^+]` and `[r_d^-, r_d^+]` intersect.
pub fn speed_halfspace_overlap(p: &Params) -> Result<f64> {
    let fp = p.fp()?;
    let (dd, d, gp) = (p.diff_u, p.diff_v, p.gp);
    let c0 = p.c_f()?.max(p.c_g());
    let overlaps = |c: f64| match (quad_roots(c, dd, gp), quad_roots(c, d, fp)) {
        (Some((a0, a1)), Some((b0, b1))) => a0 <= b1 && b0 <= a1,
        _ => false,
    };
    if overlaps(c0) {
        return Ok(c0);
    }
    let mut hi = 2.0 * (dd.max(d) * gp.max(fp)).sqrt() + 1.0;
    while !overlaps(hi) {
        hi *= 2.0;
    }
    Ok(bisect_threshold(overlaps, c0, hi, 1e-15, 0.0))
}

/// `c*_{m,∞}` for the KPP/mortality half-space problem.
pub fn speed_halfspace_mortality(p: &Params) -> Result<SpeedResult> {
    p.validate()?;
    let rho = p.rho()?;
    let (dd, d, gp) = (p.diff_u, p.diff_v, p.gp);
    let cg = p.c_g();
    let regime = classify_mortality(dd, d, gp, rho);
    let c = match regime {
        Regime::Interior => cg,
        _ => (dd * rho + d * gp) / ((d - dd) * (rho + gp)).sqrt(),
    };
    let overlap = speed_halfspace_mortality_overlap(p)?;
    let residual = (overlap - c).abs();
    let mut notes = Vec::new();
    if residual > 1e-9 * c {
        notes.push(format!("region-overlap speed {overlap} disagrees with closed form {c}"));
    }
    let rd_plus = (c + (c * c + 4.0 * d * rho).sqrt()) / (2.0 * d);
    let alpha = match regime {
        Regime::Interior => cg / (2.0 * dd),
        _ => rd_plus,
    };
    Ok(SpeedResult {
        c,
        regime: Some(regime),
        witness: Some((0.0, alpha)),
        diagnostics: Diagnostics { iterations: 0, residual, notes },
    })
}

/// Region-overlap computation of `c*_{m,∞}`: the first `c ≥ c_g` with
/// `r_D^-(c) ≤ r_d^+(c) = (c + sqrt(c² + 4dρ))/(2d)`.
pub fn speed_halfspace_mortality_overlap(p: &Params) -> Result<f64> {
    let rho = p.rho()?;
    let (dd, d, gp) = (p.diff_u, p.diff_v, p.gp);
    let cg = p.c_g();
    let overlaps = |c: f64| match quad_roots(c, dd, gp) {
        Some((a0, _)) => a0 <= (c + (c * c + 4.0 * d * rho).sqrt()) / (2.0 * d),
        None => false,
    };
    if overlaps(cg) {
        return Ok(cg);
    }
    let mut hi = 2.0 * cg + 1.0;
    while !overlaps(hi) {
        hi *= 2.0;
    }
    Ok(bisect_threshold(overlaps, cg, hi, 1e-15, 0.0))
}

/// Monotonicity class of a half-space steady state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `U` and `V` both decreasing in the normal coordinate.
    Decreasing,
    /// `(U, V) ≡ (1, S)`.
    Constant,
    /// `U` and `V` both increasing.
    Increasing,
}

/// Sampled stationary profiles. `u` holds `(y, U(y))` for `y ≤ 0`, `v` holds
/// `(y, V(y))` for `y ≥ 0`, both sorted by `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyProfile {
    pub u0: f64,
    pub v0: f64,
    pub du0: f64,
    pub dv0: f64,
    pub branch: Branch,
    pub u: Vec<(f64, f64)>,
    pub v: Vec<(f64, f64)>,
    pub flux_residual: f64,
    pub diagnostics: Diagnostics,
}

/// `∫_a^b f` by adaptive Simpson with an absolute tolerance of `1e-12`,
/// tightened relative to the integral's size for tiny tails.
fn integral(f: &dyn Reaction, a: f64, b: f64) -> f64 {
    let rough = simpson(|s| f.eval(s), a, b, 1e-8);
    let tol = 1e-12_f64.min(1e-13 * rough.abs()).max(1e-300);
    simpson(|s| f.eval(s), a, b, tol)
}

/// Steady state with logistic reactions `g(s) = g'(0) s (1 - s)` and
/// `f(s) = f'(0) s (1 - s/S)`.
pub fn steady_state_halfspace_logistic(p: &Params, n_grid: usize) -> Result<SteadyProfile> {
    let g = Logistic::new(p.gp, 1.0);
    match p.exterior {
        crate::params::Exterior::Kpp { fp } => {
            let f = Logistic::new(fp, p.capacity);
            steady_state_halfspace(p, &g, Some(&f), n_grid)
        }
        crate::params::Exterior::Mortality { .. } => steady_state_halfspace(p, &g, None, n_grid),
    }
}

/// Half-space steady state from the first integrals
/// `∫_{U(0)}^1 g = (D/2) U'(0)²` and `∫_{V(0)}^S f = (d/2) V'(0)²`
/// (or `V'(0)² = (ρ/d) V(0)²` with mortality), plus the exchange conditions.
///
/// `f` is required for a KPP exterior and ignored with mortality.
pub fn steady_state_halfspace(
    p: &Params,
    g: &dyn Reaction,
    f: Option<&dyn Reaction>,
    n_grid: usize,
) -> Result<SteadyProfile> {
    p.validate()?;
    let n_grid = n_grid.max(8);
    let (dd, d, mu, nu, s) = (p.diff_u, p.diff_v, p.mu, p.nu, p.capacity);
    let big_g = |w: f64| integral(g, w, 1.0);

    if let Ok(rho) = p.rho() {
        let k = (rho / d).sqrt();
        let du = |u0: f64| -((2.0 / dd) * big_g(u0)).max(0.0).sqrt();
        let v0_of = |u0: f64| (mu * u0 + dd * du(u0)) / nu;
        let u_zero = brent(v0_of, 0.0, 1.0, Tol::TIGHT)?;
        let resid = |u0: f64| -(dd / d) * du(u0) - k * v0_of(u0);
        let u0 = brent(resid, u_zero, 1.0, Tol::TIGHT)?;
        let du0 = du(u0);
        let v0 = v0_of(u0);
        let dv0 = (dd / d) * du0;
        let flux_residual =
            (dd * du0 - (nu * v0 - mu * u0)).abs().max((d * (-k * v0) - dd * du0).abs());
        let u = sample_side(g, dd, 1.0, u0, n_grid, -1.0);
        let extent = u.first().map(|q| -q.0).unwrap_or(1.0).max(25.0 / k);
        let v = (0..n_grid)
            .map(|i| {
                let y = extent * i as f64 / (n_grid - 1) as f64;
                (y, v0 * (-k * y).exp())
            })
            .collect();
        return Ok(SteadyProfile {
            u0,
            v0,
            du0,
            dv0,
            branch: Branch::Decreasing,
            u,
            v,
            flux_residual,
            diagnostics: Diagnostics::default(),
        });
    }

    let f = f.ok_or_else(|| Error::InvalidParam { name: "f", reason: "KPP exterior needs f".into() })?;
    let big_f = |w: f64| integral(f, w, s);
    let imbalance = nu * s - mu;
    if imbalance == 0.0 {
        let u = vec![(-1.0, 1.0), (0.0, 1.0)];
        let v = vec![(0.0, s), (1.0, s)];
        return Ok(SteadyProfile {
            u0: 1.0,
            v0: s,
            du0: 0.0,
            dv0: 0.0,
            branch: Branch::Constant,
            u,
            v,
            flux_residual: 0.0,
            diagnostics: Diagnostics::default(),
        });
    }

    let decreasing = || -> Result<(f64, f64, f64, f64)> {
        let du = |u0: f64| -((2.0 / dd) * big_g(u0)).max(0.0).sqrt();
        let v0_of = |u0: f64| (mu * u0 + dd * du(u0)) / nu;
        let u_s = brent(|u0| v0_of(u0) - s, 0.0, 1.0, Tol::TIGHT)?;
        let resid = |u0: f64| {
            let dv = (dd / d) * du(u0);
            big_f(v0_of(u0)) - 0.5 * d * dv * dv
        };
        let u0 = brent(resid, u_s, 1.0, Tol::TIGHT)?;
        let du0 = du(u0);
        Ok((u0, v0_of(u0), du0, (dd / d) * du0))
    };
    let increasing = || -> Result<(f64, f64, f64, f64)> {
        let dv = |v0: f64| ((2.0 / d) * big_f(v0)).max(0.0).sqrt();
        let u0_of = |v0: f64| (nu * v0 - d * dv(v0)) / mu;
        let v_1 = brent(|v0| u0_of(v0) - 1.0, 0.0, s, Tol::TIGHT)?;
        let resid = |v0: f64| {
            let du = (d / dd) * dv(v0);
            big_g(u0_of(v0)) - 0.5 * dd * du * du
        };
        let v0 = brent(resid, v_1, s, Tol::TIGHT)?;
        let dv0 = dv(v0);
        Ok((u0_of(v0), v0, (d / dd) * dv0, dv0))
    };
    let mut notes = Vec::new();
    let (expected, other) = if imbalance < 0.0 {
        (Branch::Decreasing, Branch::Increasing)
    } else {
        (Branch::Increasing, Branch::Decreasing)
    };
    let solve = |b: Branch| if b == Branch::Decreasing { decreasing() } else { increasing() };
    let (branch, (u0, v0, du0, dv0)) = match solve(expected) {
        Ok(sol) => (expected, sol),
        Err(e) => {
            notes.push(format!("expected {expected:?} branch has no root ({e}); trying {other:?}"));
            match solve(other) {
                Ok(sol) => (other, sol),
                Err(e2) => return Err(Error::Infeasible(format!("no steady state in either branch: {e}; {e2}"))),
            }
        }
    };
    let dv_first_integral = dv0.signum() * ((2.0 / d) * big_f(v0)).max(0.0).sqrt();
    let flux_residual =
        (dd * du0 - (nu * v0 - mu * u0)).abs().max((d * dv_first_integral - dd * du0).abs());
    let u = sample_side(g, dd, 1.0, u0, n_grid, -1.0);
    let v = sample_side(f, d, s, v0, n_grid, 1.0);
    Ok(SteadyProfile {
        u0,
        v0,
        du0,
        dv0,
        branch,
        u,
        v,
        flux_residual,
        diagnostics: Diagnostics { iterations: 0, residual: flux_residual, notes },
    })
}

/// Samples one side of the profile by separable quadrature of
/// `W'(y)² = (2/diff) ∫_W^eq r`, from the interface value `w0` towards the
/// equilibrium `eq`, stopping where `|W - eq| < 1e-10`. `side` is `-1` for
/// `y < 0`, `+1` for `y > 0`.
fn sample_side(r: &dyn Reaction, diff: f64, eq: f64, w0: f64, n: usize, side: f64) -> Vec<(f64, f64)> {
    let gap0 = eq - w0;
    if gap0.abs() <= 1e-10 {
        return vec![(0.0, w0), (side, w0)];
    }
    let speed = |w: f64| ((2.0 / diff) * integral(r, w, eq)).max(0.0).sqrt();
    let ratio = (1e-10 / gap0.abs()).powf(1.0 / (n - 1) as f64);
    let mut out = Vec::with_capacity(n);
    let mut y = 0.0;
    let mut w_prev = w0;
    out.push((0.0, w0));
    for k in 1..n {
        let w = eq - gap0 * ratio.powi(k as i32);
        let a = w_prev.min(w);
        let b = w_prev.max(w);
        let rough = simpson(|x| 1.0 / speed(x), a, b, 1e-6);
        let dy = simpson(|x| 1.0 / speed(x), a, b, 1e-10 * rough.abs().max(1e-300));
        y += dy;
        out.push((side * y, w));
        w_prev = w;
    }
    if side < 0.0 {
        out.reverse();
    }
    out
}

/// Transverse eigenvalue for the truncated problem: `0` for `N = 2`,
/// `π/(2L)` for `N = 3`.
fn truncated_lambda(dim: u32, l: f64) -> Result<f64> {
    match dim {
        2 => Ok(0.0),
        3 => Ok(std::f64::consts::PI / (2.0 * l)),
        n => Err(Error::Unsupported(format!("truncated speed needs N in {{2, 3}}, got {n}"))),
    }
}

/// Dispersion branches of the truncated, penalised linear problem on a slab
/// of half-width `L`.
struct Truncated {
    dd: f64,
    d: f64,
    mu: f64,
    nu: f64,
    l: f64,
    delta_bar: f64,
    delta_under: f64,
    beta_under: f64,
    beta_bar: f64,
}

impl Truncated {
    fn new(p: &Params, l: f64) -> Result<Self> {
        let (dd, d, mu, nu) = (p.diff_u, p.diff_v, p.mu, p.nu);
        let pi = std::f64::consts::PI;
        let mut t = Truncated { dd, d, mu, nu, l, delta_bar: 0.0, delta_under: 0.0, beta_under: 0.0, beta_bar: 0.0 };
        t.delta_bar = brent(
            |x| nu * (x * l).sin() + d * x * (x * l).cos(),
            pi / (2.0 * l),
            pi / l,
            Tol::TIGHT,
        )?;
        let top = t.delta_bar * (1.0 - 1e-15);
        t.delta_under = brent(|x| t.chi_v1(x) - dd / l, 0.0, top, Tol::TIGHT)?;
        let chi0 = t.chi_v1(0.0);
        let edge = pi / l * (1.0 - 1e-15);
        t.beta_under = brent(|b| t.chi_u(b) - chi0, pi / (2.0 * l), edge, Tol::TIGHT)?;
        t.beta_bar = brent(|b| t.chi_u(b) + mu, t.beta_under, edge, Tol::TIGHT)?;
        Ok(t)
    }

    /// `D β cot(β L)`.
    fn chi_u(&self, b: f64) -> f64 {
        if b == 0.0 {
            self.dd / self.l
        } else {
            self.dd * b / (b * self.l).tan()
        }
    }

    /// `D β coth(β L)`.
    fn chi_u3(&self, b: f64) -> f64 {
        if b == 0.0 {
            self.dd / self.l
        } else {
            self.dd * b / (b * self.l).tanh()
        }
    }

    fn chi_v1(&self, x: f64) -> f64 {
        let (d, mu, nu, l) = (self.d, self.mu, self.nu, self.l);
        if x == 0.0 {
            return -mu * d / (nu * l + d);
        }
        let c = (x * l).cos();
        -mu * d * x * c / (nu * (x * l).sin() + d * x * c)
    }

    fn chi_v2(&self, x: f64) -> f64 {
        let (d, mu, nu, l) = (self.d, self.mu, self.nu, self.l);
        if x == 0.0 {
            return -mu * d / (nu * l + d);
        }
        -mu * d * x / (nu * (x * l).tanh() + d * x)
    }

    /// The glued function `𝔡(β)` on `(-∞, β̄)`.
    fn glued(&self, b: f64) -> f64 {
        let top = self.delta_bar * (1.0 - 1e-15);
        if b < 0.0 {
            let t = self.chi_u3(-b);
            let x = brent(|x| self.chi_v1(x) - t, self.delta_under, top, Tol::TIGHT).unwrap_or(top);
            x * x
        } else if b <= self.beta_under {
            let t = self.chi_u(b);
            let x = brent(|x| self.chi_v1(x) - t, 0.0, self.delta_under, Tol::TIGHT).unwrap_or(0.0);
            x * x
        } else if b < self.beta_bar {
            let t = self.chi_u(b);
            let mut hi = 1.0 / self.l;
            while self.chi_v2(hi) > t && hi < 1e8 {
                hi *= 2.0;
            }
            let x = brent(|x| self.chi_v2(x) - t, 0.0, hi, Tol::TIGHT).unwrap_or(hi);
            -x * x
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// `c*_L`, the smallest `c` at which the truncated dispersion regions meet,
/// for the slab of half-width `L` and penalisation `theta`.
pub fn truncated_speed_halfspace(p: &Params, l: f64, theta: f64) -> Result<SpeedResult> {
    p.validate()?;
    let fp = p.fp()?;
    if !(l > 0.0) || !(theta >= 0.0) {
        return Err(Error::Domain(format!("need L > 0 and theta >= 0, got L = {l}, theta = {theta}")));
    }
    let lambda = truncated_lambda(p.dim, l)?;
    let (dd, d, gp) = (p.diff_u, p.diff_v, p.gp);
    let regime = classify_kpp(dd, d, gp, fp);
    let mut notes = Vec::new();
    if regime != Regime::Anomalous {
        notes.push(format!("regime is {regime}; the truncated construction targets the anomalous case"));
    }
    let t = Truncated::new(p, l)?;
    let lam2 = lambda * lambda;
    let a_d0 = fp - theta - d * lam2;
    let a_u0 = gp - theta - dd * lam2;
    let c_under_sq = 4.0 * d * (a_d0 - d * t.delta_bar * t.delta_bar);
    if c_under_sq <= 0.0 {
        return Err(Error::Infeasible(format!(
            "L = {l} too small: no admissible c (f'(0) - θ - dλ² - dδ̄² = {})",
            c_under_sq / (4.0 * d)
        )));
    }
    let c_under = c_under_sq.sqrt();
    let beta_top = t.beta_bar * (1.0 - 1e-12);

    // gap(β) ≤ 0 iff the α-intervals of the two regions intersect at β
    let gap = |c: f64, b: f64| -> f64 {
        let ad = a_d0 - d * t.glued(b);
        let au = if b < 0.0 { a_u0 + dd * b * b } else { a_u0 - dd * b * b };
        match (quad_roots(c, d, ad), quad_roots(c, dd, au)) {
            (Some((vm, vp)), Some((um, up))) => (vm - up).max(um - vp),
            _ => f64::INFINITY,
        }
    };
    let window = |c: f64| -> Option<(f64, f64)> {
        let disc_u = c * c - 4.0 * dd * a_u0;
        let lo = if disc_u >= 0.0 { -disc_u.sqrt() / (2.0 * dd) } else { (-disc_u).sqrt() / (2.0 * dd) };
        if lo >= beta_top {
            return None;
        }
        let disc_d = |b: f64| c * c - 4.0 * d * (a_d0 - d * t.glued(b));
        if disc_d(lo) < 0.0 {
            return None;
        }
        let hi = if disc_d(beta_top) >= 0.0 {
            beta_top
        } else {
            brent(disc_d, lo, beta_top, Tol::TIGHT).ok()?
        };
        Some((lo, hi))
    };
    let min_gap = |c: f64| -> (f64, f64) {
        match window(c) {
            None => (f64::INFINITY, f64::NAN),
            Some((lo, hi)) => scan_min(|b| gap(c, b), lo, hi),
        }
    };
    let overlaps = |c: f64| min_gap(c).0 <= 0.0;

    let lo = c_under * (1.0 + 1e-9);
    if overlaps(lo) {
        return Err(Error::Infeasible(format!("regions already overlap at c = {lo}; L = {l} too small")));
    }
    let mut hi = 2.0 * (dd.max(d) * gp.max(fp)).sqrt() + 1.0;
    let mut guard = 0;
    while !overlaps(hi) {
        hi *= 2.0;
        guard += 1;
        if guard > 40 {
            return Err(Error::NoConvergence("truncated speed: no overlap found".into()));
        }
    }
    let c = bisect_threshold(overlaps, lo, hi, 1e-10, 0.0);
    let (g, beta) = min_gap(c);
    let witness = if beta.is_finite() {
        let ad = a_d0 - d * t.glued(beta);
        quad_roots(c, d, ad).map(|(vm, vp)| (beta, 0.5 * (vm + vp)))
    } else {
        None
    };
    notes.push(format!("c_under = {c_under}, lambda = {lambda}"));
    Ok(SpeedResult {
        c,
        regime: Some(regime),
        witness,
        diagnostics: Diagnostics { iterations: 0, residual: g.max(0.0), notes },
    })
}

/// One cell of the regime diagram at `x = D/d`, `y = g'(0)/f'(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramCell {
    pub x: f64,
    pub y: f64,
    pub regime: Regime,
}

/// Fisher/interior boundary `y = 2 - x`.
pub fn fisher_boundary(x: f64) -> f64 {
    2.0 - x
}

/// Interior/anomalous boundary `y = x/(2x - 1)`, defined for `x > 1/2`.
pub fn interior_boundary(x: f64) -> Option<f64> {
    (x > 0.5).then(|| x / (2.0 * x - 1.0))
}

/// Classifies the cell centres of an `nx × ny` grid over
/// `[x0, x1] × [y0, y1]`, row-major in `y` then `x`.
pub fn regime_diagram(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Vec<DiagramCell> {
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = y_range.0 + (j as f64 + 0.5) * (y_range.1 - y_range.0) / ny as f64;
        for i in 0..nx {
            let x = x_range.0 + (i as f64 + 0.5) * (x_range.1 - x_range.0) / nx as f64;
            out.push(DiagramCell { x, y, regime: classify_kpp(x, 1.0, y, 1.0) });
        }
    }
    out
}
