//! Explicit finite-volume time stepping of the coupled system on the strip
//! `(x, y) ∈ (0, L_x) × (-R, L_y)` and on the radial section `r ∈ (0, R + L_y)`.
//!
//! Each x-column stores the `u` cells followed by the `v` cells. The interface
//! flux `F = νv₀ - μu_last` enters `u` and leaves `v` through the same face, so
//! the exchange is conservative to rounding.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{Exterior, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Two-dimensional strip (`N = 2`), front moving in `+x`.
    Strip,
    /// x-independent radial section with the `(N-2)/r` drift.
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// `u = height`, `v = height·S` where `|x - center| ≤ radius` (strip) or
    /// `|r - center| ≤ radius` (radial); zero elsewhere.
    CompactBump { center: f64, radius: f64, height: f64 },
    /// `u = level`, `v = level` everywhere.
    SmallUniform { level: f64 },
    /// `u = min(k e^{-αx}, 1)`, `v = min((μ/ν) k e^{-αx}, S)`.
    Exponential { amplitude: f64, alpha: f64 },
}

/// Boundary condition at `x = L_x` and at the outer edge of the `v` medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterBc {
    Neumann,
    DirichletZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    /// Cells across the interior medium, of width `R / ny_u`.
    pub ny_u: usize,
    /// Cells across the exterior medium, of width `ly / ny_v`.
    pub ny_v: usize,
    pub lx: f64,
    /// Depth of the exterior medium.
    pub ly: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshots {
    pub dir: PathBuf,
    pub every: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub geometry: Geometry,
    pub params: Params,
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub init: Init,
    pub outer_bc: OuterBc,
    /// Interface values extrapolated from the adjacent cells.
    pub second_order: bool,
    /// Interval between front and mass samples.
    pub sample_every: f64,
    /// Reference interface value for the front marker; computed from the
    /// transverse steady state when absent.
    pub u_ref: Option<f64>,
    pub snapshots: Option<Snapshots>,
}

impl SimConfig {
    /// Strip run with a unit bump at the left wall and Neumann far field.
    pub fn strip(params: Params, grid: Grid, dt: f64, t_end: f64) -> Self {
        SimConfig {
            geometry: Geometry::Strip,
            params,
            grid,
            dt,
            t_end,
            init: Init::CompactBump { center: 0.0, radius: 5.0, height: 1.0 },
            outer_bc: OuterBc::Neumann,
            second_order: false,
            sample_every: t_end / 400.0,
            u_ref: None,
            snapshots: None,
        }
    }

    /// Radial run starting from `u = v = 1`.
    pub fn radial(params: Params, ny_u: usize, ny_v: usize, ly: f64, dt: f64, t_end: f64) -> Self {
        SimConfig {
            geometry: Geometry::Radial,
            params,
            grid: Grid { nx: 1, ny_u, ny_v, lx: 1.0, ly },
            dt,
            t_end,
            init: Init::SmallUniform { level: 1.0 },
            outer_bc: OuterBc::Neumann,
            second_order: false,
            sample_every: t_end / 400.0,
            u_ref: None,
            snapshots: None,
        }
    }

    pub fn dx(&self) -> f64 {
        self.grid.lx / self.grid.nx as f64
    }

    pub fn dy_u(&self) -> f64 {
        self.params.radius / self.grid.ny_u as f64
    }

    pub fn dy_v(&self) -> f64 {
        self.grid.ly / self.grid.ny_v as f64
    }

    /// `0.25·min(dx², dy²)/max(D, d)`; `dx` only counts on the strip.
    pub fn stability_bound(&self) -> f64 {
        let mut h = self.dy_u().min(self.dy_v());
        if self.geometry == Geometry::Strip {
            h = h.min(self.dx());
        }
        0.25 * h * h / self.params.diff_u.max(self.params.diff_v)
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |name: &'static str, reason: &str| Err(Error::InvalidParam { name, reason: reason.into() });
        if self.geometry == Geometry::Strip && self.params.dim != 2 {
            return bad("N", "the strip geometry requires N = 2");
        }
        if self.grid.nx == 0 || self.grid.ny_u == 0 || self.grid.ny_v == 0 {
            return bad("sim.grid", "cell counts must be positive");
        }
        for (name, v) in [("sim.lx", self.grid.lx), ("sim.ly", self.grid.ly), ("sim.dt", self.dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(name, "must be positive and finite");
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("sim.T", "must be non-negative and finite");
        }
        if !(self.sample_every > 0.0) {
            return bad("sim.sample_every", "must be positive");
        }
        Ok(())
    }
}

/// Least-squares slope of `x_f(t)` over the trailing `window_fraction` of the
/// time span, with its standard error.
pub fn measure_speed(front: &[(f64, f64)], window_fraction: f64) -> Result<(f64, f64)> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidParam { name: "window_fraction", reason: "must lie in (0, 1]".into() });
    }
    let (Some(first), Some(last)) = (front.first(), front.last()) else {
        return Err(Error::InvalidParam { name: "front_positions", reason: "empty series".into() });
    };
    let t0 = last.0 - window_fraction * (last.0 - first.0);
    let w: Vec<(f64, f64)> = front.iter().copied().filter(|&(t, _)| t >= t0).collect();
    if w.len() < 20 {
        return Err(Error::InvalidParam {
            name: "front_positions",
            reason: format!("{} samples in the window, need at least 20", w.len()),
        });
    }
    let n = w.len() as f64;
    let tm = w.iter().map(|p| p.0).sum::<f64>() / n;
    let xm = w.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = w.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = w.iter().map(|p| (p.0 - tm) * (p.1 - xm)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = w.iter().map(|p| (p.1 - xm - slope * (p.0 - tm)).powi(2)).sum();
    Ok((slope, (ssr / (n - 2.0) / sxx).sqrt()))
}

/// Explicit solver state.
#[derive(Debug, Clone)]
pub struct Solver {
    cfg: SimConfig,
    ny: usize,
    dx: f64,
    /// Transverse coupling to the lower and upper neighbour, diffusion and
    /// `A/(V·h)` included.
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Interface face area over the adjacent cell volume, per side.
    iface_u: f64,
    iface_v: f64,
    /// Outer Dirichlet coefficient on the last `v` cell.
    outer: f64,
    /// Cell volumes in the transverse direction.
    vol: Vec<f64>,
    /// Cell-centre coordinates: `r` on the radial section, `y` on the strip.
    coords: Vec<f64>,
    flux_scale: f64,
    state: Vec<f64>,
    next: Vec<f64>,
    t: f64,
    steps: usize,
}

impl Solver {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let p = &cfg.params;
        let g = &cfg.grid;
        let (ny_u, ny_v) = (g.ny_u, g.ny_v);
        let ny = ny_u + ny_v;
        let (hu, hv) = (cfg.dy_u(), cfg.dy_v());
        let n = f64::from(if cfg.geometry == Geometry::Strip { 2 } else { p.dim });
        let r = p.radius;
        let area = |x: f64| (x / r).powf(n - 2.0);
        let volume = |a: f64, b: f64| r / (n - 1.0) * ((b / r).powf(n - 1.0) - (a / r).powf(n - 1.0));
        let mut faces = Vec::with_capacity(ny + 1);
        faces.extend((0..=ny_u).map(|j| j as f64 * hu));
        faces.extend((1..=ny_v).map(|j| r + j as f64 * hv));
        let vol: Vec<f64> = (0..ny).map(|j| volume(faces[j], faces[j + 1])).collect();
        if vol.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParam { name: "N", reason: "radial weights overflow on this grid".into() });
        }
        let mut lo = vec![0.0; ny];
        let mut hi = vec![0.0; ny];
        for j in 0..ny {
            let (diff, h) = if j < ny_u { (p.diff_u, hu) } else { (p.diff_v, hv) };
            if j != 0 && j != ny_u {
                lo[j] = diff * area(faces[j]) / (vol[j] * h);
            }
            if j != ny_u - 1 && j != ny - 1 {
                hi[j] = diff * area(faces[j + 1]) / (vol[j] * h);
            }
        }
        let iface_u = area(r) / vol[ny_u - 1];
        let iface_v = area(r) / vol[ny_u];
        let outer = match cfg.outer_bc {
            OuterBc::Neumann => 0.0,
            OuterBc::DirichletZero => 2.0 * p.diff_v * area(faces[ny]) / (vol[ny - 1] * hv),
        };
        let flux_scale = if cfg.second_order {
            1.0 / (1.0 + p.nu * 0.5 * hv / p.diff_v + p.mu * 0.5 * hu / p.diff_u)
        } else {
            1.0
        };
        let coords = (0..ny)
            .map(|j| {
                let c = 0.5 * (faces[j] + faces[j + 1]);
                if cfg.geometry == Geometry::Strip { c - r } else { c }
            })
            .collect();
        let dx = cfg.dx();
        let mut s = Solver {
            cfg: cfg.clone(),
            ny,
            dx,
            lo,
            hi,
            iface_u,
            iface_v,
            outer,
            vol,
            coords,
            flux_scale,
            state: vec![0.0; g.nx * ny],
            next: vec![0.0; g.nx * ny],
            t: 0.0,
            steps: 0,
        };
        s.check_stability()?;
        s.initialise();
        Ok(s)
    }

    fn check_stability(&self) -> Result<()> {
        let cfg = &self.cfg;
        let p = &cfg.params;
        let bound = cfg.stability_bound();
        if cfg.dt > bound * (1.0 + 1e-12) {
            return Err(Error::Unstable(format!("dt = {} exceeds 0.25·min(dx², dy²)/max(D, d) = {bound}", cfg.dt)));
        }
        let ny_u = cfg.grid.ny_u;
        let strip = cfg.geometry == Geometry::Strip && cfg.grid.nx > 1;
        let mut worst = 0.0f64;
        for j in 0..self.ny {
            let diff = if j < ny_u { p.diff_u } else { p.diff_v };
            let mut diag = self.lo[j] + self.hi[j];
            if strip {
                diag += 2.0 * diff / (self.dx * self.dx);
            }
            if j == ny_u - 1 {
                diag += self.iface_u * p.mu * self.flux_scale;
            }
            if j == ny_u {
                diag += self.iface_v * p.nu * self.flux_scale;
            }
            if j == self.ny - 1 {
                diag += self.outer;
            }
            worst = worst.max(diag);
        }
        if cfg.dt * worst > 1.0 {
            return Err(Error::Unstable(format!(
                "dt·(largest diagonal) = {} > 1 with the exchange and drift terms included",
                cfg.dt * worst
            )));
        }
        Ok(())
    }

    fn initialise(&mut self) {
        let p = self.cfg.params;
        let ny_u = self.cfg.grid.ny_u;
        let cap = p.capacity;
        let dx = self.dx;
        let geometry = self.cfg.geometry;
        let init = self.cfg.init;
        let coords = self.coords.clone();
        for (i, col) in self.state.chunks_mut(self.ny).enumerate() {
            let x = (i as f64 + 0.5) * dx;
            for (j, val) in col.iter_mut().enumerate() {
                let is_u = j < ny_u;
                let scale = if is_u { 1.0 } else { cap };
                *val = match init {
                    Init::CompactBump { center, radius, height } => {
                        let pos = if geometry == Geometry::Strip { x } else { coords[j] };
                        if (pos - center).abs() <= radius { height * scale } else { 0.0 }
                    }
                    Init::SmallUniform { level } => level,
                    Init::Exponential { amplitude, alpha } => {
                        let pos = if geometry == Geometry::Strip { x } else { 0.0 };
                        let e = amplitude * (-alpha * pos).exp();
                        if is_u { e.min(1.0) } else { (p.mu / p.nu * e).min(cap) }
                    }
                };
            }
        }
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Transverse cell-centre coordinates of the `u` cells followed by the
    /// `v` cells.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.state[i * self.ny..(i + 1) * self.ny]
    }

    pub fn u(&self, i: usize, j: usize) -> f64 {
        self.state[i * self.ny + j]
    }

    pub fn v(&self, i: usize, j: usize) -> f64 {
        self.state[i * self.ny + self.cfg.grid.ny_u + j]
    }

    /// Replaces the state; `col(x, j)` gives cell `j` of the column at `x`.
    pub fn set_state<F: Fn(f64, usize) -> f64>(&mut self, col: F) {
        let ny = self.ny;
        let dx = self.dx;
        for (i, c) in self.state.chunks_mut(ny).enumerate() {
            let x = (i as f64 + 0.5) * dx;
            for (j, v) in c.iter_mut().enumerate() {
                *v = col(x, j);
            }
        }
    }

    fn flux(&self, col: &[f64]) -> f64 {
        let ny_u = self.cfg.grid.ny_u;
        let p = &self.cfg.params;
        (p.nu * col[ny_u] - p.mu * col[ny_u - 1]) * self.flux_scale
    }

    /// `(D(u_ghost - u_last)/dy_u, d(v₀ - v_ghost)/dy_v)` for column `i`, the
    /// flux entering `u` and the flux leaving `v` through the interface.
    pub fn interface_fluxes(&self, i: usize) -> (f64, f64) {
        let col = self.column(i);
        let ny_u = self.cfg.grid.ny_u;
        let p = &self.cfg.params;
        let f = self.flux(col);
        let (hu, hv) = (self.cfg.dy_u(), self.cfg.dy_v());
        let u_ghost = col[ny_u - 1] + hu * f / p.diff_u;
        let v_ghost = col[ny_u] - hv * f / p.diff_v;
        (p.diff_u * (u_ghost - col[ny_u - 1]) / hu, p.diff_v * (col[ny_u] - v_ghost) / hv)
    }

    /// Interface values `(u(0), v(0))` of column `i`, extrapolated half a cell
    /// using the exchange flux.
    pub fn interface_values(&self, i: usize) -> (f64, f64) {
        let col = self.column(i);
        let ny_u = self.cfg.grid.ny_u;
        let p = &self.cfg.params;
        let f = self.flux(col);
        (
            col[ny_u - 1] + 0.5 * self.cfg.dy_u() * f / p.diff_u,
            col[ny_u] - 0.5 * self.cfg.dy_v() * f / p.diff_v,
        )
    }

    /// Advances one explicit step; returns `sup |Δ|/dt`.
    pub fn step(&mut self) -> Result<f64> {
        let p = self.cfg.params;
        let ny = self.ny;
        let ny_u = self.cfg.grid.ny_u;
        let nx = self.cfg.grid.nx;
        let dt = self.cfg.dt;
        let x_diffusion = self.cfg.geometry == Geometry::Strip && nx > 1;
        let inv_dx2 = 1.0 / (self.dx * self.dx);
        let dirichlet_x = self.cfg.outer_bc == OuterBc::DirichletZero;
        let (gp, fp_or_rho, cap) = match p.exterior {
            Exterior::Kpp { fp } => (p.gp, fp, p.capacity),
            Exterior::Mortality { rho } => (p.gp, -rho, f64::INFINITY),
        };
        let kpp_exterior = !p.is_mortality();
        let mut next = std::mem::take(&mut self.next);
        let this = &*self;
        let old = &this.state;
        let change = next
            .par_chunks_mut(ny)
            .enumerate()
            .map(|(i, out)| {
                let col = &old[i * ny..(i + 1) * ny];
                let left = if i > 0 { Some(&old[(i - 1) * ny..i * ny]) } else { None };
                let right = if i + 1 < nx { Some(&old[(i + 1) * ny..(i + 2) * ny]) } else { None };
                let f = this.flux(col);
                let mut sup = 0.0f64;
                for j in 0..ny {
                    let c = col[j];
                    let mut rate = 0.0;
                    if j > 0 {
                        rate += this.lo[j] * (col[j - 1] - c);
                    }
                    if j + 1 < ny {
                        rate += this.hi[j] * (col[j + 1] - c);
                    }
                    let is_u = j < ny_u;
                    if j == ny_u - 1 {
                        rate += this.iface_u * f;
                    } else if j == ny_u {
                        rate -= this.iface_v * f;
                    }
                    if j == ny - 1 {
                        rate -= this.outer * c;
                    }
                    if x_diffusion {
                        let diff = if is_u { p.diff_u } else { p.diff_v };
                        let l = left.map_or(c, |l| l[j]);
                        let r = match right {
                            Some(r) => r[j],
                            None if dirichlet_x => -c,
                            None => c,
                        };
                        rate += diff * (l - 2.0 * c + r) * inv_dx2;
                    }
                    rate += if is_u {
                        gp * c * (1.0 - c)
                    } else if kpp_exterior {
                        fp_or_rho * c * (1.0 - c / cap)
                    } else {
                        fp_or_rho * c
                    };
                    out[j] = c + dt * rate;
                    sup = sup.max(rate.abs());
                }
                sup
            })
            .reduce(|| 0.0, f64::max);
        self.next = next;
        if !change.is_finite() || self.next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unstable(format!(
                "non-finite state at t = {} (dt = {}, bound {})",
                self.t + dt,
                dt,
                self.cfg.stability_bound()
            )));
        }
        std::mem::swap(&mut self.state, &mut self.next);
        self.steps += 1;
        self.t = self.steps as f64 * dt;
        Ok(change)
    }

    /// `∫u + ∫v` with the transverse weights.
    pub fn mass(&self) -> f64 {
        let dx = if self.cfg.geometry == Geometry::Strip { self.dx } else { 1.0 };
        self.state.chunks(self.ny).map(|c| c.iter().zip(&self.vol).map(|(a, b)| a * b).sum::<f64>()).sum::<f64>() * dx
    }

    pub fn sup_u(&self) -> f64 {
        let ny_u = self.cfg.grid.ny_u;
        self.state.chunks(self.ny).flat_map(|c| c[..ny_u].iter()).fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn sup_v(&self) -> f64 {
        let ny_u = self.cfg.grid.ny_u;
        self.state.chunks(self.ny).flat_map(|c| c[ny_u..].iter()).fold(0.0, |a, &b| a.max(b.abs()))
    }

    /// Largest `x` with `u(x, interface row) ≥ level`, linearly interpolated
    /// between cell centres; `0` when no cell reaches the level.
    pub fn front(&self, level: f64) -> f64 {
        let j = self.cfg.grid.ny_u - 1;
        let nx = self.cfg.grid.nx;
        let Some(i) = (0..nx).rev().find(|&i| self.u(i, j) >= level) else {
            return 0.0;
        };
        if i + 1 == nx {
            return self.x(i);
        }
        let (a, b) = (self.u(i, j), self.u(i + 1, j));
        self.x(i) + self.dx * (a - level) / (a - b)
    }

    /// Writes `u_<k>.txt` and `v_<k>.txt`: header `t=<time> nx=<nx> ny=<ny>`
    /// followed by `ny` rows of `nx` values.
    pub fn write_snapshot(&self, dir: &Path, k: usize) -> Result<()> {
        fs::create_dir_all(dir)?;
        let nx = self.cfg.grid.nx;
        let ny_u = self.cfg.grid.ny_u;
        for (name, range) in [("u", 0..ny_u), ("v", ny_u..self.ny)] {
            let file = fs::File::create(dir.join(format!("{name}_{k:05}.txt")))?;
            let mut w = BufWriter::new(file);
            writeln!(w, "t={} nx={} ny={}", self.t, nx, range.len())?;
            for j in range {
                let row: Vec<String> = (0..nx).map(|i| format!("{:e}", self.state[i * self.ny + j])).collect();
                writeln!(w, "{}", row.join(" "))?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

/// Parsed snapshot file: `(t, nx, ny, rows)`.
pub fn read_snapshot(path: &Path) -> Result<(f64, usize, usize, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Io("empty snapshot".into()))?;
    let mut t = None;
    let mut nx = None;
    let mut ny = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("t", v)) => t = v.parse().ok(),
            Some(("nx", v)) => nx = v.parse().ok(),
            Some(("ny", v)) => ny = v.parse().ok(),
            _ => return Err(Error::Io(format!("bad snapshot header field `{field}`"))),
        }
    }
    let (Some(t), Some(nx), Some(ny)) = (t, nx, ny) else {
        return Err(Error::Io(format!("incomplete snapshot header `{header}`")));
    };
    let rows = lines
        .map(|l| l.split_whitespace().map(|v| v.parse::<f64>().map_err(|e| Error::Io(e.to_string()))).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    if rows.len() != ny || rows.iter().any(|r| r.len() != nx) {
        return Err(Error::Io("snapshot shape does not match its header".into()));
    }
    Ok((t, nx, ny, rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// `(t, x_f(t))` at the `0.5·U_ref` level.
    pub front_positions: Vec<(f64, f64)>,
    /// Slope over the last half of the samples, clamped at zero.
    pub fitted_speed: f64,
    pub speed_stderr: f64,
    /// `(level / U_ref, fitted speed)` for the levels `0.25` and `0.75`.
    pub level_speeds: Vec<(f64, f64)>,
    pub mass_history: Vec<(f64, f64)>,
    /// `sup |∂_t (u, v)|` over the final step.
    pub steady_residual: f64,
    /// `sup u + sup v < 1e-6` at the final time.
    pub extinct: bool,
    pub sup_u: f64,
    pub sup_v: f64,
    pub u_ref: f64,
    /// Transverse cell centres and final values of the first column.
    pub coords: Vec<f64>,
    pub profile: Vec<f64>,
    pub interface: (f64, f64),
    pub notes: Vec<String>,
}

fn fitted(front: &[(f64, f64)]) -> (f64, f64) {
    match measure_speed(front, 0.5) {
        Ok((s, e)) => (s.max(0.0), e),
        Err(_) => (0.0, f64::NAN),
    }
}

/// Interface value of the x-independent steady state on the same transverse
/// grid, reached by time stepping from `(1, S)`.
pub fn transverse_reference(cfg: &SimConfig) -> Result<f64> {
    let mut c = cfg.clone();
    c.geometry = Geometry::Radial;
    c.grid.nx = 1;
    c.init = Init::SmallUniform { level: 1.0 };
    c.snapshots = None;
    let mut s = Solver::new(&c)?;
    let ny_u = c.grid.ny_u;
    let cap = c.params.capacity;
    s.set_state(|_, j| if j < ny_u { 1.0 } else if c.params.is_mortality() { 0.0 } else { cap });
    let max_steps = 20_000_000usize;
    for _ in 0..max_steps {
        let r = s.step()?;
        if r < 1e-10 {
            return Ok(s.u(0, ny_u - 1));
        }
    }
    Err(Error::NoConvergence("transverse steady state did not settle".into()))
}

fn drive(cfg: &SimConfig, u_ref: f64) -> Result<SimResult> {
    let mut s = Solver::new(cfg)?;
    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    let every = ((cfg.sample_every / cfg.dt).round() as usize).max(1);
    let snap_every = cfg.snapshots.as_ref().map(|sn| ((sn.every / cfg.dt).round() as usize).max(1));
    let strip = cfg.geometry == Geometry::Strip;
    let levels = [0.5, 0.25, 0.75];
    let mut fronts: [Vec<(f64, f64)>; 3] = Default::default();
    let mut mass = Vec::new();
    let record = |s: &Solver, fronts: &mut [Vec<(f64, f64)>; 3], mass: &mut Vec<(f64, f64)>| {
        if strip {
            for (k, l) in levels.iter().enumerate() {
                fronts[k].push((s.time(), s.front(l * u_ref)));
            }
        }
        mass.push((s.time(), s.mass()));
    };
    record(&s, &mut fronts, &mut mass);
    let mut snap_k = 0;
    if let (Some(sn), Some(_)) = (&cfg.snapshots, snap_every) {
        s.write_snapshot(&sn.dir, snap_k)?;
        snap_k += 1;
    }
    let mut residual = 0.0;
    for n in 1..=n_steps {
        residual = s.step()?;
        if n % every == 0 || n == n_steps {
            record(&s, &mut fronts, &mut mass);
        }
        if let (Some(sn), Some(e)) = (&cfg.snapshots, snap_every) {
            if n % e == 0 {
                s.write_snapshot(&sn.dir, snap_k)?;
                snap_k += 1;
            }
        }
    }
    let [f50, f25, f75] = fronts;
    let (fitted_speed, speed_stderr) = if strip { fitted(&f50) } else { (0.0, f64::NAN) };
    let level_speeds = if strip { vec![(0.25, fitted(&f25).0), (0.75, fitted(&f75).0)] } else { Vec::new() };
    let mut notes = Vec::new();
    if strip {
        let reach = f50.last().map_or(0.0, |p| p.1);
        if reach > 0.9 * cfg.grid.lx {
            notes.push(format!("front reached x = {reach}, within 10% of the boundary"));
        }
    }
    let (sup_u, sup_v) = (s.sup_u(), s.sup_v());
    Ok(SimResult {
        front_positions: f50,
        fitted_speed,
        speed_stderr,
        level_speeds,
        mass_history: mass,
        steady_residual: residual,
        extinct: sup_u + sup_v < 1e-6,
        sup_u,
        sup_v,
        u_ref,
        coords: s.coords().to_vec(),
        profile: s.column(0).to_vec(),
        interface: s.interface_values(0),
        notes,
    })
}

/// Strip run with front tracking at `0.5·U_ref`.
pub fn run_strip(cfg: &SimConfig) -> Result<SimResult> {
    if cfg.geometry != Geometry::Strip {
        return Err(Error::InvalidParam { name: "sim.geometry", reason: "run_strip needs the strip".into() });
    }
    cfg.validate()?;
    let u_ref = match cfg.u_ref {
        Some(u) => u,
        None => transverse_reference(cfg)?,
    };
    drive(cfg, u_ref)
}

/// Radial run; reports the final profile, steady residual and extinction.
pub fn run_radial(cfg: &SimConfig) -> Result<SimResult> {
    if cfg.geometry != Geometry::Radial {
        return Err(Error::InvalidParam { name: "sim.geometry", reason: "run_radial needs the radial section".into() });
    }
    if cfg.grid.nx != 1 {
        return Err(Error::InvalidParam { name: "sim.nx", reason: "the radial section is x-independent".into() });
    }
    drive(cfg, cfg.u_ref.unwrap_or(f64::NAN))
}
