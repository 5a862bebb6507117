//! Spreading speed along a cylinder of radius `R` embedded in `R^N`.
//!
//! Exponential solutions `e^{-α(x-ct)} |y|^{-τ} (J_τ(β|y|), γ K_τ(δ|y|))` of
//! the linearised problem exist when `χ_v(δ) = χ_u(β)` and
//!
//! ```text
//! cα - Dα² + Dβ² = g'(0)        (interior curve Σ_D)
//! cα - dα² - dδ² = f'(0)        (exterior curve Σ_d)
//! ```
//!
//! `c*` is `c_f` when `Σ_d(c_f)` appears inside the region bounded by
//! `Σ_D(c_f)`, and otherwise the first `c` at which the two regions meet.

use crate::error::{Error, Result};
use crate::halfspace::speed_halfspace;
use crate::overlap::{first_true, interval_gap, quad_roots, scan_min};
use crate::params::{Diagnostics, Params, Regime, SpeedResult};
use crate::roots::{brent, golden_min, Tol};
use crate::specfun::{bessel_j, bessel_k, first_zero_j, Kernel, Order};

/// Cap on `δ(β)` near `β̄`.
pub const DELTA_CAP: f64 = 1e8;

/// The dispersion machinery for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionCurves {
    pub params: Params,
    pub tau: Order,
    pub kernel: Kernel,
    /// First zero `j_τ` of `J_τ`.
    pub j_tau: f64,
    /// `β̄ = k_u(μR/D)/R`, where `χ_u` blows up.
    pub beta_bar: f64,
    /// `β̲`, where `δ(β)` vanishes.
    pub beta_under: f64,
}

/// Dispersion curves with the closed-form kernel.
pub fn build_curves(p: &Params) -> Result<DispersionCurves> {
    DispersionCurves::new(p, Kernel::Closed)
}

impl DispersionCurves {
    pub fn new(p: &Params, kernel: Kernel) -> Result<Self> {
        p.validate()?;
        let tau = p.order()?;
        let (dd, d, mu, nu, r) = (p.diff_u, p.diff_v, p.mu, p.nu, p.radius);
        let beta_bar = kernel.k_u(tau, mu * r / dd)? / r;
        let beta_under = if p.dim <= 3 {
            0.0
        } else {
            let m = f64::from(p.dim - 3);
            kernel.k_u(tau, (mu * r / dd) * d * m / (nu * r + d * m))? / r
        };
        Ok(DispersionCurves { params: *p, tau, kernel, j_tau: first_zero_j(tau), beta_bar, beta_under })
    }

    /// `χ_u(β) = νD h_u(βR) / (μR - D h_u(βR))`, `+∞` from `β̄` on.
    pub fn chi_u(&self, beta: f64) -> Result<f64> {
        let p = &self.params;
        if beta == 0.0 {
            return Ok(0.0);
        }
        if beta >= self.beta_bar {
            return Ok(f64::INFINITY);
        }
        let h = self.kernel.h_u(self.tau, beta * p.radius)?;
        let den = p.mu * p.radius - p.diff_u * h;
        Ok(if den > 0.0 { p.nu * p.diff_u * h / den } else { f64::INFINITY })
    }

    /// `χ_v(δ) = (d/R) h_v(δR)`.
    pub fn chi_v(&self, delta: f64) -> Result<f64> {
        let p = &self.params;
        if delta == 0.0 {
            return Ok(p.diff_v / p.radius * self.tau.h_v_floor());
        }
        Ok(p.diff_v / p.radius * self.kernel.h_v(self.tau, delta * p.radius)?)
    }

    /// `δ(β)` solving `χ_v(δ) = χ_u(β)`; `0` at or below `β̲`, capped at
    /// [`DELTA_CAP`].
    pub fn delta(&self, beta: f64) -> Result<f64> {
        let p = &self.params;
        if !(beta >= 0.0) {
            return Err(Error::Domain(format!("delta({beta}) needs beta >= 0")));
        }
        if beta <= self.beta_under {
            return Ok(0.0);
        }
        let chi = self.chi_u(beta)?;
        if !chi.is_finite() {
            return Ok(DELTA_CAP);
        }
        let s = p.radius * chi / p.diff_v;
        if s <= self.tau.h_v_floor() {
            return Ok(0.0);
        }
        Ok((self.kernel.k_v(self.tau, s)? / p.radius).min(DELTA_CAP))
    }

    /// Inverse of [`delta`](Self::delta): `β ∈ [β̲, β̄)` with `δ(β) = delta`.
    pub fn beta_of_delta(&self, delta: f64) -> Result<f64> {
        let p = &self.params;
        if delta <= 0.0 {
            return Ok(self.beta_under);
        }
        if delta >= DELTA_CAP {
            return Ok(self.beta_bar);
        }
        let chi = self.chi_v(delta)?;
        let h = chi * p.mu * p.radius / (p.diff_u * (p.nu + chi));
        Ok(self.kernel.k_u(self.tau, h)? / p.radius)
    }

    /// Exterior amplitude `γ(β) = (μJ_τ(βR) - DβJ_{τ+1}(βR)) / (νK_τ(δR))`.
    pub fn gamma(&self, beta: f64) -> Result<f64> {
        let p = &self.params;
        let up = Order::from_twice(self.tau.twice() + 2)?;
        let br = beta * p.radius;
        let num = p.mu * bessel_j(self.tau, br)? - p.diff_u * beta * bessel_j(up, br)?;
        let delta = self.delta(beta)?;
        if delta == 0.0 {
            return Err(Error::Domain("gamma needs beta > beta_under".into()));
        }
        Ok(num / (p.nu * bessel_k(self.tau, delta * p.radius)?))
    }

    /// `β̂(c)`: smallest `β ≥ 0` where `Σ_D(c)` is defined.
    pub fn beta_hat(&self, c: f64) -> f64 {
        let p = &self.params;
        let cg2 = 4.0 * p.diff_u * p.gp;
        if c * c >= cg2 {
            0.0
        } else {
            (cg2 - c * c).sqrt() / (2.0 * p.diff_u)
        }
    }

    /// `β̆(c)`: largest `β` where the exterior curve is defined, i.e.
    /// `4d²δ²(β) = c² + 4d·ext`, where `ext` is `-f'(0)` or `ρ`.
    pub fn beta_breve(&self, c: f64) -> Result<Option<f64>> {
        let d = self.params.diff_v;
        let disc = c * c + 4.0 * d * self.exterior_shift();
        if disc < 0.0 {
            return Ok(None);
        }
        Ok(Some(self.beta_of_delta(disc.sqrt() / (2.0 * d))?))
    }

    /// `-f'(0)` for a KPP exterior, `ρ` with mortality.
    fn exterior_shift(&self) -> f64 {
        match (self.params.fp(), self.params.rho()) {
            (Ok(fp), _) => -fp,
            (_, Ok(rho)) => rho,
            _ => unreachable!("exterior is either KPP or mortality"),
        }
    }

    /// `(α_D^-, α_D^+)` at `(c, β)`.
    pub fn alpha_interior(&self, c: f64, beta: f64) -> Option<(f64, f64)> {
        let p = &self.params;
        quad_roots(c, p.diff_u, p.gp - p.diff_u * beta * beta)
    }

    /// `(α_d^-, α_d^+)` at `(c, β)`.
    pub fn alpha_exterior(&self, c: f64, beta: f64) -> Result<Option<(f64, f64)>> {
        let d = self.params.diff_v;
        let delta = self.delta(beta)?;
        Ok(quad_roots(c, d, -self.exterior_shift() + d * delta * delta))
    }

    /// `min_β gap(c, β)` over the common domain, with its argmin.
    fn min_gap(&self, c: f64) -> Result<Option<(f64, f64)>> {
        let lo = self.beta_under.max(self.beta_hat(c));
        let top = self.beta_bar * (1.0 - 1e-12);
        let hi = match self.beta_breve(c)? {
            None => return Ok(None),
            Some(b) => b.min(top),
        };
        if hi < lo {
            return Ok(None);
        }
        let gap = |b: f64| -> f64 {
            match (self.alpha_exterior(c, b), self.alpha_interior(c, b)) {
                (Ok(Some(e)), Some(i)) => interval_gap(e, i),
                _ => f64::INFINITY,
            }
        };
        let (g, b) = scan_min(gap, lo, hi);
        Ok(g.is_finite().then_some((g, b)))
    }

    pub(crate) fn overlaps(&self, c: f64) -> bool {
        matches!(self.min_gap(c), Ok(Some((g, _))) if g <= 0.0)
    }
}

/// Which curves touch at `c*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TouchingPair {
    /// `α_d^-` meets `α_D^+`.
    ExteriorLowerInteriorUpper,
    /// `α_d^+` meets `α_D^-`.
    ExteriorUpperInteriorLower,
}

/// Result of a tangency search.
#[derive(Debug, Clone, PartialEq)]
pub struct TangencyResult {
    pub c_star: f64,
    pub beta_star: f64,
    pub alpha_star: f64,
    /// `c*` exceeds the reference Fisher speed: `c_f` with a KPP exterior,
    /// `c_g` with mortality.
    pub enhanced: bool,
    pub pair: Option<TouchingPair>,
    pub diagnostics: Diagnostics,
}

impl From<TangencyResult> for SpeedResult {
    fn from(t: TangencyResult) -> Self {
        SpeedResult {
            c: t.c_star,
            regime: None,
            witness: Some((t.beta_star, t.alpha_star)),
            diagnostics: t.diagnostics,
        }
    }
}

/// Contact point at the located speed and the curve-equation residual there.
pub(crate) fn contact(curves: &DispersionCurves, c: f64) -> Result<(f64, f64, Option<TouchingPair>, f64)> {
    let p = &curves.params;
    let (_, beta) = curves
        .min_gap(c)?
        .ok_or_else(|| Error::NoConvergence(format!("no contact at c = {c}")))?;
    let ext = curves.alpha_exterior(c, beta)?.expect("exterior defined on the window");
    let int = curves.alpha_interior(c, beta).expect("interior defined on the window");
    let (pair, alpha) = if (ext.0 - int.1).abs() <= (int.0 - ext.1).abs() {
        (TouchingPair::ExteriorLowerInteriorUpper, 0.5 * (ext.0 + int.1))
    } else {
        (TouchingPair::ExteriorUpperInteriorLower, 0.5 * (ext.1 + int.0))
    };
    let delta = curves.delta(beta)?;
    let r_int = c * alpha - p.diff_u * alpha * alpha + p.diff_u * beta * beta - p.gp;
    let r_ext = c * alpha - p.diff_v * alpha * alpha - p.diff_v * delta * delta + curves.exterior_shift();
    Ok((beta, alpha, Some(pair), r_int.abs().max(r_ext.abs())))
}

/// `D(f'(0) - dβ̲²) > d(2f'(0) - g'(0))`: whether `c* > c_f`.
pub fn enhancement_test(p: &Params) -> Result<bool> {
    let fp = p.fp()?;
    let bu = build_curves(p)?.beta_under;
    Ok(p.diff_u * (fp - p.diff_v * bu * bu) > p.diff_v * (2.0 * fp - p.gp))
}

/// `c*` for the KPP/KPP cylinder problem with the closed-form kernel.
pub fn speed_cylinder(p: &Params) -> Result<TangencyResult> {
    speed_cylinder_with(p, Kernel::Closed)
}

/// `c*` with an explicit Bessel kernel.
pub fn speed_cylinder_with(p: &Params, kernel: Kernel) -> Result<TangencyResult> {
    let fp = p.fp()?;
    let curves = DispersionCurves::new(p, kernel)?;
    let cf = p.c_f()?;
    let (dd, d) = (p.diff_u, p.diff_v);
    let bu = curves.beta_under;
    let enhanced = dd * (fp - d * bu * bu) > d * (2.0 * fp - p.gp);
    let mut notes = Vec::new();
    if !enhanced {
        let alpha = cf / (2.0 * d);
        if p.dim > 5 {
            notes.push(format!("N = {}: only the c* = c_f certificate is available", p.dim));
        }
        return Ok(TangencyResult {
            c_star: cf,
            beta_star: bu,
            alpha_star: alpha,
            enhanced: false,
            pair: None,
            diagnostics: Diagnostics { iterations: 0, residual: 0.0, notes },
        });
    }
    if p.dim > 5 {
        return Err(Error::Unsupported(format!(
            "N = {} with the enhancement condition satisfied: c* is not characterised",
            p.dim
        )));
    }
    let hi = 2.0 * (dd.max(d) * p.gp.max(fp)).sqrt() + 1.0;
    let mut evals = 0;
    let c = first_true(
        |c| {
            evals += 1;
            curves.overlaps(c)
        },
        cf,
        hi,
        1e-10,
    )?;
    let (beta, alpha, pair, residual) = contact(&curves, c)?;
    if beta <= bu {
        notes.push(format!("contact at beta = {beta} is not above beta_under = {bu}"));
    }
    Ok(TangencyResult {
        c_star: c,
        beta_star: beta,
        alpha_star: alpha,
        enhanced: true,
        pair,
        diagnostics: Diagnostics { iterations: evals, residual, notes },
    })
}

/// Which part of `(0, ∞)` of diffusions `D` gives `c* > c_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnhancementProfile {
    /// Every `D > 0`.
    All,
    /// Exactly `D > D̄`.
    Above(f64),
    /// Every `D` outside `[D1, D2]`.
    ComplementInterval(f64, f64),
    /// Only `D > D̄`, with `D̄` beyond the end of the requested range.
    NoneBelow(f64),
}

/// `ζ(D) = D(f'(0) - dβ̲²(D))`.
pub fn zeta(p: &Params, diff_u: f64) -> Result<f64> {
    let fp = p.fp()?;
    let bu = build_curves(&p.with_diff_u(diff_u))?.beta_under;
    Ok(diff_u * (fp - p.diff_v * bu * bu))
}

/// Enhancement set in `D`, reported relative to `d_range = (lo, hi)`:
/// a threshold above `hi` is returned as [`EnhancementProfile::NoneBelow`].
/// `lo` seeds the search for the minimum of `ζ`.
pub fn enhancement_profile(p: &Params, d_range: (f64, f64)) -> Result<EnhancementProfile> {
    let fp = p.fp()?;
    let d = p.diff_v;
    let target = d * (2.0 * fp - p.gp);
    let wrap = |dbar: f64| {
        if dbar >= d_range.1 {
            EnhancementProfile::NoneBelow(dbar)
        } else {
            EnhancementProfile::Above(dbar)
        }
    };
    if p.dim <= 3 {
        return Ok(if target <= 0.0 { EnhancementProfile::All } else { wrap(d * (2.0 - p.gp / fp)) });
    }
    let z = |dd: f64| zeta(p, dd).unwrap_or(f64::NAN);
    // ζ is convex with ζ(0⁺) = 0 and ζ → ∞
    let mut top = d_range.1.max(1.0);
    while z(top) <= target.max(0.0) {
        top *= 2.0;
        if top > 1e12 {
            return Err(Error::NoConvergence("zeta does not exceed the enhancement target".into()));
        }
    }
    let floor = d_range.0.max(1e-12).min(top * 1e-6);
    let (d_min, m) = golden_min(|x: f64| z(x.exp()), floor.ln(), top.ln(), 1e-12);
    let d_min = d_min.exp();
    if p.radius * (fp / d).sqrt() >= first_zero_j(p.order()?) {
        // ζ is increasing from 0
        if target <= 0.0 {
            return Ok(EnhancementProfile::All);
        }
        return Ok(wrap(brent(|x| z(x) - target, floor, top, Tol::TIGHT)?));
    }
    if target < m {
        return Ok(EnhancementProfile::All);
    }
    if target >= 0.0 {
        return Ok(wrap(brent(|x| z(x) - target, d_min, top, Tol::TIGHT)?));
    }
    let d1 = brent(|x| z(x) - target, floor, d_min, Tol::TIGHT)?;
    let d2 = brent(|x| z(x) - target, d_min, top, Tol::TIGHT)?;
    Ok(EnhancementProfile::ComplementInterval(d1, d2))
}

/// Limit regime for [`speed_limit_d`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DLimit {
    /// `lim_{D→0} c*(D)`.
    ToZero,
    /// `lim_{D→∞} c*(D)/√D`.
    ToInfinity,
}

/// Limits of `c*` in `D`. The `D → ∞` value is Richardson-extrapolated in
/// `1/√D` from `D ∈ {10², 10³, 10⁴}`.
pub fn speed_limit_d(p: &Params, mode: DLimit) -> Result<f64> {
    let fp = p.fp()?;
    if !(2..=5).contains(&p.dim) {
        return Err(Error::Unsupported(format!("speed limits need N in 2..=5, got {}", p.dim)));
    }
    match mode {
        DLimit::ToZero => {
            if p.gp >= 2.0 * fp {
                Ok(p.gp * (p.diff_v / (p.gp - fp)).sqrt())
            } else {
                p.c_f()
            }
        }
        DLimit::ToInfinity => {
            let pts = [1e2_f64, 1e3, 1e4]
                .iter()
                .map(|&dd| Ok((1.0 / dd.sqrt(), speed_cylinder(&p.with_diff_u(dd))?.c_star / dd.sqrt())))
                .collect::<Result<Vec<_>>>()?;
            Ok(neville_at_zero(&pts))
        }
    }
}

/// Value at `0` of the interpolating polynomial through `pts`.
fn neville_at_zero(pts: &[(f64, f64)]) -> f64 {
    let mut y: Vec<f64> = pts.iter().map(|q| q.1).collect();
    let n = pts.len();
    for k in 1..n {
        for i in 0..n - k {
            let (xi, xk) = (pts[i].0, pts[i + k].0);
            y[i] = (xk * y[i] - xi * y[i + 1]) / (xk - xi);
        }
    }
    y[0]
}

/// Limit regime for [`speed_limit_r`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RLimit {
    ToZero,
    ToInfinity,
}

/// `lim_{R→0} c* = c_f` and `lim_{R→∞} c* = c*_∞`.
pub fn speed_limit_r(p: &Params, mode: RLimit) -> Result<f64> {
    match mode {
        RLimit::ToZero => p.c_f(),
        RLimit::ToInfinity => Ok(speed_halfspace(p)?.c),
    }
}

/// Speed `c_rf` of the planar road-field model: the first `c` at which
/// `cα - dα² - dδ² = f'(0)` and `cα - Dα² = g'(0) - μdδ/(ν + dδ)` bound
/// intersecting regions for some `δ ≥ 0`.
pub fn road_field_speed(p: &Params) -> Result<SpeedResult> {
    p.validate()?;
    let fp = p.fp()?;
    let (dd, d, gp, mu, nu) = (p.diff_u, p.diff_v, p.gp, p.mu, p.nu);
    let cf = p.c_f()?;
    if dd / d <= 2.0 - gp / fp {
        return Ok(SpeedResult {
            c: cf,
            regime: Some(Regime::Fisher),
            witness: Some((0.0, cf / (2.0 * d))),
            diagnostics: Diagnostics::default(),
        });
    }
    let line = |x: f64| mu * d * x / (nu + d * x);
    let gap = |c: f64, x: f64| match (quad_roots(c, d, fp + d * x * x), quad_roots(c, dd, gp - line(x))) {
        (Some(e), Some(i)) => interval_gap(e, i),
        _ => f64::INFINITY,
    };
    let window = |c: f64| -> Option<(f64, f64)> {
        let hi = (c * c - cf * cf).max(0.0).sqrt() / (2.0 * d);
        let a_star = gp - c * c / (4.0 * dd);
        let lo = if a_star <= 0.0 {
            0.0
        } else if a_star >= mu {
            return None;
        } else {
            nu * a_star / (d * (mu - a_star))
        };
        (lo <= hi).then_some((lo, hi))
    };
    let min_gap = |c: f64| window(c).map(|(lo, hi)| scan_min(|x| gap(c, x), lo, hi));
    let hi = 2.0 * (dd.max(d) * gp.max(fp)).sqrt() + 1.0;
    let c = first_true(|c| matches!(min_gap(c), Some((g, _)) if g <= 0.0), cf, hi, 1e-12)?;
    let (g, x) = min_gap(c).unwrap_or((f64::NAN, f64::NAN));
    let alpha = quad_roots(c, d, fp + d * x * x).map(|e| 0.5 * (e.0 + e.1)).unwrap_or(f64::NAN);
    Ok(SpeedResult {
        c,
        regime: None,
        witness: Some((x, alpha)),
        diagnostics: Diagnostics { iterations: 0, residual: g.max(0.0), notes: vec![] },
    })
}

/// `c̃*(R)`: the strip speed (`N = 2`) with `μ` replaced by `μ̃(R)`.
pub fn rescaled_speed<F: Fn(f64) -> f64>(p: &Params, mu_tilde: F, radius: f64) -> Result<SpeedResult> {
    if p.dim != 2 {
        return Err(Error::Unsupported(format!("rescaled speed is planar (N = 2), got N = {}", p.dim)));
    }
    let q = p.with_radius(radius).with_exchange(mu_tilde(radius), p.nu);
    Ok(speed_cylinder(&q)?.into())
}

/// Dimension scan for the loss of enhancement.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionScan {
    /// Smallest `N₀ ≥ 4` such that enhancement fails for every scanned
    /// `N ≥ N₀`; `None` if it still holds at the top of the scan.
    pub n0: Option<u32>,
    /// `(N, β̲(N))` for `N = 4, ..., 103`.
    pub beta_under: Vec<(u32, f64)>,
    pub enhanced: Vec<(u32, bool)>,
}

/// Scans `N = 4..=103` for the dimension beyond which the cylinder no longer
/// raises the speed.
pub fn max_effect_dimension(p: &Params) -> Result<DimensionScan> {
    let fp = p.fp()?;
    let mut beta_under = Vec::new();
    let mut enhanced = Vec::new();
    for n in 4..=103u32 {
        let q = p.with_dim(n);
        let bu = build_curves(&q)?.beta_under;
        beta_under.push((n, bu));
        enhanced.push((n, q.diff_u * (fp - q.diff_v * bu * bu) > q.diff_v * (2.0 * fp - q.gp)));
    }
    let n0 = match enhanced.iter().rposition(|&(_, e)| e) {
        None => Some(4),
        Some(i) if i + 1 < enhanced.len() => Some(enhanced[i + 1].0),
        Some(_) => None,
    };
    Ok(DimensionScan { n0, beta_under, enhanced })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Params {
        Params::kpp(1.0, 1.0, 1.0, 1.0)
    }

    #[test]
    fn planar_delta_is_closed_form() {
        let c = build_curves(&base()).unwrap();
        let expect = 0.5 * 0.5f64.tan() / (1.0 - 0.5 * 0.5f64.tan());
        assert!((c.delta(0.5).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 0.3762).abs() < 5e-4);
        let g = DispersionCurves::new(&base(), Kernel::Generic).unwrap();
        assert!((g.delta(0.5).unwrap() - expect).abs() < 1e-8);
    }

    #[test]
    fn beta_under_by_dimension() {
        assert_eq!(build_curves(&base().with_dim(2)).unwrap().beta_under, 0.0);
        assert_eq!(build_curves(&base().with_dim(3)).unwrap().beta_under, 0.0);
        let c = build_curves(&base().with_dim(4)).unwrap();
        assert!(c.beta_under > 0.0 && c.beta_under < c.beta_bar);
        let h = crate::specfun::h_u(c.tau, c.beta_under).unwrap();
        assert!((h - 0.5).abs() < 1e-10);
    }

    #[test]
    fn delta_inverse_round_trip() {
        for n in [2, 3, 4, 5] {
            let c = build_curves(&base().with_dim(n)).unwrap();
            for k in 1..40 {
                let b = c.beta_under + (c.beta_bar - c.beta_under) * k as f64 / 41.0;
                let dl = c.delta(b).unwrap();
                if dl * c.params.radius <= 1e-300 {
                    // below the smallest representable k_v argument
                    continue;
                }
                let res = c.chi_v(dl).unwrap() - c.chi_u(b).unwrap();
                assert!(res.abs() <= 1e-10 * c.chi_u(b).unwrap().max(1.0), "N={n} b={b} res={res}");
                assert!((c.beta_of_delta(dl).unwrap() - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn enhancement_examples() {
        assert!(enhancement_test(&Params::kpp(1.5, 1.0, 1.0, 1.0)).unwrap());
        assert!(!enhancement_test(&base()).unwrap());
        assert!(enhancement_test(&base().with_dim(4).with_diff_u(1e3)).unwrap());
    }

    #[test]
    fn boundary_case_is_fisher() {
        let r = speed_cylinder(&base()).unwrap();
        assert_eq!((r.c_star, r.enhanced), (2.0, false));
    }

    #[test]
    fn enhanced_planar_speed() {
        let r = speed_cylinder(&Params::kpp(2.0, 1.0, 1.0, 1.0)).unwrap();
        assert!(r.enhanced && r.c_star > 2.0 && r.c_star < 2.0 * 2f64.sqrt() + 1e-9, "{}", r.c_star);
        assert!(r.beta_star > 0.0);
        assert!(r.diagnostics.residual < 1e-8, "{}", r.diagnostics.residual);
        let g = speed_cylinder_with(&Params::kpp(2.0, 1.0, 1.0, 1.0), Kernel::Generic).unwrap();
        assert!((g.c_star - r.c_star).abs() < 1e-8, "{} {}", g.c_star, r.c_star);
    }

    #[test]
    fn overlap_is_monotone_in_c() {
        let c = build_curves(&Params::kpp(2.0, 1.0, 1.0, 1.0)).unwrap();
        let mut seen = false;
        for k in 0..200 {
            let s = 2.0 + 1.5 * k as f64 / 199.0;
            let o = c.overlaps(s);
            assert!(!seen || o, "lost overlap at {s}");
            seen |= o;
        }
        assert!(seen);
    }

    #[test]
    fn high_dimension_needs_certificate() {
        let p = Params::kpp(1.0, 1.0, 1.0, 1.0).with_dim(8);
        let r = speed_cylinder(&p).unwrap();
        assert!(!r.enhanced && r.c_star == 2.0);
        let q = Params::kpp(1e4, 1.0, 3.0, 1.0).with_dim(8);
        if enhancement_test(&q).unwrap() {
            assert!(matches!(speed_cylinder(&q), Err(Error::Unsupported(_))));
        }
    }

    #[test]
    fn small_diffusion_limit() {
        let p = Params::kpp(1.0, 1.0, 3.0, 1.0);
        assert!((speed_limit_d(&p, DLimit::ToZero).unwrap() - 3.0 / 2f64.sqrt()).abs() < 1e-12);
        let q = Params::kpp(1.0, 1.0, 2.0, 1.0);
        assert!((speed_limit_d(&q, DLimit::ToZero).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn radius_limits() {
        let p = Params::kpp(3.0, 1.0, 0.5, 1.0);
        assert_eq!(speed_limit_r(&p, RLimit::ToZero).unwrap(), 2.0);
        assert!((speed_limit_r(&p, RLimit::ToInfinity).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn road_field_examples() {
        assert_eq!(road_field_speed(&base()).unwrap().c, 2.0);
        let r = road_field_speed(&Params::kpp(4.0, 1.0, 1.0, 1.0)).unwrap();
        assert!(r.c > 2.0);
        let mut prev = 0.0;
        for k in 0..10 {
            let c = road_field_speed(&Params::kpp(0.5 + k as f64, 1.0, 1.0, 1.0)).unwrap().c;
            assert!(c >= prev - 1e-12);
            prev = c;
        }
    }

    #[test]
    fn zeta_is_convex() {
        let p = base().with_dim(4).with_radius(0.3);
        let h = 0.05;
        let z: Vec<f64> = (1..80).map(|k| zeta(&p, k as f64 * h).unwrap()).collect();
        for w in z.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-8);
        }
    }

    #[test]
    fn profile_examples() {
        let j = first_zero_j(Order::from_dim(4).unwrap());
        let p = Params::kpp(1.0, 1.0, 2.5, 1.0).with_dim(4).with_radius(1.1 * j);
        assert_eq!(enhancement_profile(&p, (1e-6, 1e3)).unwrap(), EnhancementProfile::All);
        let q = Params::kpp(1.0, 1.0, 1.0, 1.0).with_dim(4).with_radius(1.1 * j);
        assert!(matches!(enhancement_profile(&q, (1e-6, 1e3)).unwrap(), EnhancementProfile::Above(x) if x > 0.0));
    }

    #[test]
    fn dimension_scan() {
        let s = max_effect_dimension(&Params::kpp(3.0, 1.0, 1.0, 1.0)).unwrap();
        let n0 = s.n0.unwrap();
        assert!(n0 >= 4);
        assert!(s.beta_under.windows(2).all(|w| w[1].1 > w[0].1));
        let big = max_effect_dimension(&Params::kpp(3.0, 1.0, 4.0, 1.0)).unwrap();
        assert!(big.n0.unwrap() > n0);
    }
}
