//! Cylinder with a mortality exterior `f(v) = -ρv`: the Robin constant `κ`,
//! the principal eigenvalue `β₀²`, survival thresholds in `R` and `D`, the
//! speed `c*_m` and the radial steady state.

use crate::cylinder::{contact, DispersionCurves, TangencyResult};
use crate::error::{Error, Result};
use crate::overlap::first_true;
use crate::params::{Diagnostics, Params, Reaction};
use crate::quad::dopri45;
use crate::roots::{brent, Tol};
use crate::specfun::{bessel_k, Kernel, Order};

/// `√(ρ/d)`, the exterior decay rate.
fn decay(p: &Params) -> Result<f64> {
    Ok((p.rho()? / p.diff_v).sqrt())
}

/// `κ = μ√(dρ)K_{τ+1}(sR) / (νK_τ(sR) + √(dρ)K_{τ+1}(sR))`, `s = √(ρ/d)`,
/// written through `h_v` so that large orders do not overflow.
pub fn robin_kappa(p: &Params) -> Result<f64> {
    robin_kappa_with(p, Kernel::Closed)
}

fn robin_kappa_with(p: &Params, kernel: Kernel) -> Result<f64> {
    p.validate()?;
    let chi = exterior_chi(p, kernel)?;
    Ok(p.mu * chi / (p.nu + chi))
}

/// `χ_v(√(ρ/d)) = √(dρ) K_{τ+1}/K_τ` at `√(ρ/d) R`.
fn exterior_chi(p: &Params, kernel: Kernel) -> Result<f64> {
    let sr = decay(p)? * p.radius;
    Ok(p.diff_v / p.radius * kernel.h_v(p.order()?, sr)?)
}

/// Principal Robin eigenvalue data.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub beta0: f64,
    pub kappa: f64,
    /// `g'(0)/D > β₀²`.
    pub survives: bool,
    /// `|χ_u(β₀) - χ_v(√(ρ/d))|`.
    pub residual: f64,
    /// `k_u(κR/D)/R`, the closed inversion used as a cross-check.
    pub beta0_inverse: f64,
}

/// `β₀` from `χ_u(β₀) = χ_v(√(ρ/d))`, bracketed in `(β̲, β̄)`.
pub fn robin_eigenvalue(p: &Params) -> Result<EigenResult> {
    robin_eigenvalue_with(p, Kernel::Closed)
}

pub fn robin_eigenvalue_with(p: &Params, kernel: Kernel) -> Result<EigenResult> {
    let curves = DispersionCurves::new(p, kernel)?;
    let target = exterior_chi(p, kernel)?;
    let kappa = p.mu * target / (p.nu + target);
    let lo = curves.beta_under;
    let hi = curves.beta_bar;
    let eps = 1e-14 * (hi - lo);
    let f = |b: f64| curves.chi_u(b).map(|c| (c / target).ln()).unwrap_or(f64::INFINITY);
    let beta0 = brent(f, lo + eps, hi - eps, Tol { abs: 1e-300, rel: 1e-15 })?;
    let residual = (curves.chi_u(beta0)? - target).abs();
    let beta0_inverse = kernel.k_u(curves.tau, kappa * p.radius / p.diff_u)? / p.radius;
    Ok(EigenResult {
        beta0,
        kappa,
        survives: p.gp / p.diff_u > beta0 * beta0,
        residual,
        beta0_inverse,
    })
}

/// `ln(Dβ₀²/g'(0))`, positive where the population dies out.
fn log_margin(p: &Params) -> Result<f64> {
    let e = robin_eigenvalue(p)?;
    Ok((p.diff_u * e.beta0 * e.beta0 / p.gp).ln())
}

/// Radius `R₀` with `Dβ₀²(R₀) = g'(0)`; survival holds iff `R > R₀`.
pub fn survival_threshold_r(p: &Params) -> Result<f64> {
    p.validate()?;
    let f = |r: f64| log_margin(&p.with_radius(r)).unwrap_or(f64::NAN);
    let (mut lo, mut hi) = (p.radius, p.radius);
    let mut guard = 0;
    while f(lo) <= 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 200 {
            return Err(Error::NoConvergence("survival_threshold_r: no lower bracket".into()));
        }
    }
    while f(hi) >= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 400 {
            return Err(Error::NoConvergence("survival_threshold_r: no upper bracket".into()));
        }
    }
    brent(f, lo, hi, Tol { abs: 1e-300, rel: 1e-14 })
}

/// Survival as a function of `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DThreshold {
    /// Survival for every `D > 0`; `equality` flags the borderline case
    /// `κ(N-1)/R = g'(0)`.
    AllD { equality: bool },
    /// Survival iff `D < D₀`.
    D0(f64),
}

/// Survival threshold in `D`: all `D` when `κ(N-1)/R ≤ g'(0)`, which is the
/// condition `μ(N-1)/(R g'(0)) ≤ 1 + (ν/√(dρ)) K_τ/K_{τ+1}`; otherwise `D₀`
/// with `Dβ₀²(D₀) = g'(0)`.
pub fn survival_threshold_d(p: &Params) -> Result<DThreshold> {
    p.validate()?;
    let chi = exterior_chi(p, Kernel::Closed)?;
    let lhs = p.mu * f64::from(p.dim - 1) / (p.radius * p.gp);
    let rhs = 1.0 + p.nu / chi;
    let gap = (lhs - rhs) / rhs;
    if gap.abs() <= 1e-12 {
        return Ok(DThreshold::AllD { equality: true });
    }
    if gap < 0.0 {
        return Ok(DThreshold::AllD { equality: false });
    }
    let f = |dd: f64| log_margin(&p.with_diff_u(dd)).unwrap_or(f64::NAN);
    let (mut lo, mut hi) = (p.diff_u, p.diff_u);
    let mut guard = 0;
    while f(lo) >= 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 400 {
            return Err(Error::NoConvergence("survival_threshold_d: no lower bracket".into()));
        }
    }
    while f(hi) <= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 400 {
            return Err(Error::NoConvergence("survival_threshold_d: no upper bracket".into()));
        }
    }
    Ok(DThreshold::D0(brent(f, lo, hi, Tol { abs: 1e-300, rel: 1e-14 })?))
}

/// `c*_m`: the first `c > 0` at which the region between
/// `α̃_d^± = (c ± √(c² + 4dρ - 4d²δ²))/(2d)` meets the one between `α_D^±`.
pub fn speed_cylinder_mortality(p: &Params) -> Result<TangencyResult> {
    let e = robin_eigenvalue(p)?;
    if !e.survives {
        return Err(Error::Infeasible(format!(
            "g'(0)/D = {} <= beta0^2 = {}: the population goes extinct",
            p.gp / p.diff_u,
            e.beta0 * e.beta0
        )));
    }
    let mut notes = Vec::new();
    if p.dim > 5 {
        if p.diff_u < p.diff_v {
            return Err(Error::Unsupported(format!("N = {} with D < d: tangency is not guaranteed", p.dim)));
        }
        notes.push(format!("N = {}: tangency relies on D >= d", p.dim));
    }
    let curves = DispersionCurves::new(p, Kernel::Closed)?;
    let cg = p.c_g();
    let hi = 2.0 * (p.diff_u.max(p.diff_v) * p.gp).sqrt() + 1.0;
    let mut evals = 0;
    let c = first_true(
        |c| {
            evals += 1;
            curves.overlaps(c)
        },
        0.0,
        hi,
        1e-10,
    )?;
    let (beta, alpha, pair, residual) = contact(&curves, c)?;
    Ok(TangencyResult {
        c_star: c,
        beta_star: beta,
        alpha_star: alpha,
        enhanced: c > cg,
        pair,
        diagnostics: Diagnostics { iterations: evals, residual, notes },
    })
}

/// Outcome of the sufficient condition for `c*_m < c_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct CgCheck {
    /// `(d-D)c_g - 2dβ̲ ≤ 0`, or `(d/D)(1-C)² ≤ 2 + ρ/g'(0) - 2C` with
    /// `C = β̲/√(D g'(0))`.
    pub condition: bool,
    pub c_star_m: f64,
    pub c_g: f64,
}

impl CgCheck {
    /// The condition implies `c*_m < c_g`; false only if that is violated.
    pub fn consistent(&self) -> bool {
        !self.condition || self.c_star_m < self.c_g
    }
}

pub fn cg_upper_bound_check(p: &Params) -> Result<CgCheck> {
    let rho = p.rho()?;
    let (dd, d, gp) = (p.diff_u, p.diff_v, p.gp);
    let cg = p.c_g();
    let bu = DispersionCurves::new(p, Kernel::Closed)?.beta_under;
    let first = (d - dd) * cg - 2.0 * d * bu <= 0.0;
    let cc = bu / (dd * gp).sqrt();
    let second = (d / dd) * (1.0 - cc).powi(2) <= 2.0 + rho / gp - 2.0 * cc;
    let c = speed_cylinder_mortality(p)?.c_star;
    Ok(CgCheck { condition: first || second, c_star_m: c, c_g: cg })
}

/// Radial steady state of the mortality problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSteady {
    /// `Φ(0)`.
    pub a0: f64,
    /// `γ` in `Ψ(r) = γ r^{-τ} K_τ(√(ρ/d) r)`.
    pub gamma_ext: f64,
    /// `(r, Φ(r))` on `[0, R]`.
    pub interior: Vec<(f64, f64)>,
    /// `(r, Ψ(r))` on `[R, R_ext]`.
    pub exterior: Vec<(f64, f64)>,
    /// `|DΦ'(R) + κΦ(R)|`.
    pub robin_residual: f64,
    pub kappa: f64,
}

struct Shooter<'a> {
    p: &'a Params,
    g: &'a dyn Reaction,
    kappa: f64,
}

impl Shooter<'_> {
    fn start(&self, a: f64) -> (f64, [f64; 2]) {
        let (dd, n) = (self.p.diff_u, f64::from(self.p.dim));
        let eps = self.p.radius * 1e-6;
        let ga = self.g.eval(a);
        (eps, [a - ga * eps * eps / (2.0 * dd * (n - 1.0)), -ga * eps / (dd * (n - 1.0))])
    }

    fn integrate(&self, t0: f64, y0: &[f64], t1: f64) -> Result<Vec<f64>> {
        let (dd, m) = (self.p.diff_u, f64::from(self.p.dim) - 2.0);
        let g = self.g;
        let st = dopri45(
            |r, y, dy| {
                dy[0] = y[1];
                dy[1] = -m / r * y[1] - g.eval(y[0]) / dd;
            },
            t0,
            y0,
            t1,
            1e-10,
        )?;
        Ok(st.y)
    }

    fn residual(&self, a: f64) -> f64 {
        let (t0, y0) = self.start(a);
        match self.integrate(t0, &y0, self.p.radius) {
            Ok(y) => self.p.diff_u * y[1] + self.kappa * y[0],
            Err(_) => f64::NAN,
        }
    }

    /// Root of the Robin residual, bracketed by scanning `grid`.
    fn shoot(&self, grid: &[f64]) -> Result<f64> {
        let vals: Vec<f64> = grid.iter().map(|&a| self.residual(a)).collect();
        for k in 0..grid.len() - 1 {
            if vals[k] < 0.0 && vals[k + 1] >= 0.0 {
                return brent(|a| self.residual(a), grid[k], grid[k + 1], Tol { abs: 1e-15, rel: 1e-14 });
            }
        }
        Err(Error::Infeasible("no sign change of the Robin residual in (0, 1)".into()))
    }
}

/// Scan grid over `(0, 1)`: logarithmic near `0`, uniform in the bulk and
/// geometric towards `1`.
fn amplitude_grid(n: usize, shift: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..6).map(|k| 10f64.powf(-8.0 + k as f64 + shift)).collect();
    g.extend((1..n).map(|k| (k as f64 + shift) / n as f64));
    g.extend((2..12).map(|k| 1.0 - 10f64.powf(-(k as f64) - shift)));
    g.retain(|&a| a > 0.0 && a < 1.0);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Radial steady state by shooting on `a = Φ(0)`.
pub fn radial_steady_mortality(p: &Params, g: &dyn Reaction, n_grid: usize) -> Result<RadialSteady> {
    radial_steady_with_grid(p, g, n_grid, &amplitude_grid(64, 0.0))
}

/// As [`radial_steady_mortality`] with an explicit amplitude scan grid.
pub fn radial_steady_with_grid(p: &Params, g: &dyn Reaction, n_grid: usize, grid: &[f64]) -> Result<RadialSteady> {
    let e = robin_eigenvalue(p)?;
    if !e.survives {
        return Err(Error::Infeasible(format!(
            "g'(0)/D <= beta0^2 = {}: no positive radial solution",
            e.beta0 * e.beta0
        )));
    }
    let n_grid = n_grid.max(2);
    let sh = Shooter { p, g, kappa: e.kappa };
    let a = sh.shoot(grid)?;
    let r_end = p.radius;
    let (mut t, y0) = sh.start(a);
    let mut y = y0.to_vec();
    let mut interior = vec![(0.0, a)];
    for k in 1..n_grid {
        let r = r_end * k as f64 / (n_grid - 1) as f64;
        if r > t {
            y = sh.integrate(t, &y, r)?;
            t = r;
        }
        interior.push((r, y[0]));
    }
    if interior.iter().any(|&(_, v)| !(v > 0.0 && v < 1.0)) {
        return Err(Error::Infeasible("shot profile leaves (0, 1)".into()));
    }
    let robin_residual = (p.diff_u * y[1] + e.kappa * y[0]).abs();
    let tau = p.order()?;
    let up = Order::from_twice(tau.twice() + 2)?;
    let s = decay(p)?;
    let sqrt_dr = (p.diff_v * p.rho()?).sqrt();
    let gamma_ext = -p.diff_u * y[1] * r_end.powf(tau.value()) / (sqrt_dr * bessel_k(up, s * r_end)?);
    let extent = r_end + 20.0 / s;
    let exterior = (0..n_grid)
        .map(|k| {
            let r = r_end + (extent - r_end) * k as f64 / (n_grid - 1) as f64;
            Ok((r, gamma_ext * r.powf(-tau.value()) * bessel_k(tau, s * r)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RadialSteady { a0: a, gamma_ext, interior, exterior, robin_residual, kappa: e.kappa })
}

/// Scan grid offset from the default, for uniqueness checks.
pub fn shifted_amplitude_grid() -> Vec<f64> {
    amplitude_grid(41, 0.37)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Logistic;

    fn unit() -> Params {
        Params::mortality(1.0, 1.0, 1.0, 1.0)
    }

    #[test]
    fn kappa_planar_identity() {
        for nu in [0.5, 1.0, 3.0] {
            let p = unit().with_exchange(2.0, nu);
            assert!((robin_kappa(&p).unwrap() - 2.0 / (nu + 1.0)).abs() < 1e-14);
        }
        let small = robin_kappa(&unit().with_exchange(1.0, 1e-9)).unwrap();
        let large = robin_kappa(&unit().with_exchange(1.0, 1e9)).unwrap();
        assert!((small - 1.0).abs() < 1e-8 && large < 1e-8);
    }

    #[test]
    fn eigenvalue_trig_reduction() {
        let e = robin_eigenvalue(&unit()).unwrap();
        let trig = brent(|b: f64| b * b.tan() - 0.5, 0.1, 1.0, Tol::TIGHT).unwrap();
        assert!((e.beta0 - trig).abs() < 1e-12);
        assert!((e.beta0 - 0.6533).abs() < 1e-4);
        assert!((e.beta0 - e.beta0_inverse).abs() < 1e-12);
        assert!(e.residual < 1e-10 && e.survives);
        let g = robin_eigenvalue_with(&unit(), Kernel::Generic).unwrap();
        assert!((g.beta0 - trig).abs() < 1e-8);
        let mut q = unit();
        q.gp = 0.3;
        assert!(!robin_eigenvalue(&q).unwrap().survives);
    }

    #[test]
    fn threshold_in_radius() {
        let p = unit();
        let r0 = survival_threshold_r(&p).unwrap();
        let e = robin_eigenvalue(&p.with_radius(r0)).unwrap();
        assert!((e.beta0 * e.beta0 * p.diff_u - p.gp).abs() < 1e-9);
        assert!(robin_eigenvalue(&p.with_radius(2.0 * r0)).unwrap().survives);
        assert!(!robin_eigenvalue(&p.with_radius(0.5 * r0)).unwrap().survives);
    }

    #[test]
    fn threshold_in_diffusion() {
        assert_eq!(survival_threshold_d(&unit()).unwrap(), DThreshold::AllD { equality: false });
        let eq = unit().with_exchange(2.0, 1.0);
        assert_eq!(survival_threshold_d(&eq).unwrap(), DThreshold::AllD { equality: true });
        let p = unit().with_exchange(4.0, 1.0);
        let DThreshold::D0(d0) = survival_threshold_d(&p).unwrap() else { panic!("expected D0") };
        assert!(robin_eigenvalue(&p.with_diff_u(0.99 * d0)).unwrap().survives);
        assert!(!robin_eigenvalue(&p.with_diff_u(1.01 * d0)).unwrap().survives);
    }

    #[test]
    fn speed_requires_survival() {
        let mut q = unit();
        q.gp = 0.3;
        assert!(matches!(speed_cylinder_mortality(&q), Err(Error::Infeasible(_))));
        let r = speed_cylinder_mortality(&unit()).unwrap();
        assert!(r.c_star > 0.0 && r.c_star < 2.0);
        assert!(r.diagnostics.residual < 1e-8);
    }

    #[test]
    fn cg_bound_consistent() {
        let c = cg_upper_bound_check(&Params::mortality(2.0, 1.0, 1.0, 1.0)).unwrap();
        assert!(c.condition && c.consistent());
        let c = cg_upper_bound_check(&Params::mortality(1.0, 2.5, 1.0, 1.0)).unwrap();
        assert!(c.condition && c.consistent());
    }

    #[test]
    fn radial_shooting() {
        let p = unit();
        let g = Logistic::new(p.gp, 1.0);
        let s = radial_steady_mortality(&p, &g, 50).unwrap();
        assert!(s.robin_residual < 1e-8, "{}", s.robin_residual);
        let t = radial_steady_with_grid(&p, &g, 50, &shifted_amplitude_grid()).unwrap();
        assert!((s.a0 - t.a0).abs() < 1e-8);
        let mut q = unit();
        q.gp = 0.3;
        assert!(matches!(radial_steady_mortality(&q, &g, 10), Err(Error::Infeasible(_))));
    }

    #[test]
    fn radial_near_threshold_is_small() {
        let p = unit();
        let b0 = robin_eigenvalue(&p).unwrap().beta0;
        let mut q = p;
        q.gp = 1.02 * b0 * b0;
        let s = radial_steady_mortality(&q, &Logistic::new(q.gp, 1.0), 20).unwrap();
        assert!(s.a0 < 0.2, "{}", s.a0);
    }
}
