//! Flat `key = value` run configuration, rendering, and the command runner
//! that writes CSV.

use std::fmt::{self, Write as _};
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::cylinder::{road_field_speed, speed_cylinder};
use crate::error::Error;
use crate::halfspace::{
    regime_diagram, speed_halfspace, speed_halfspace_mortality, steady_state_halfspace_logistic,
};
use crate::mortality::{
    radial_steady_mortality, robin_eigenvalue, speed_cylinder_mortality, survival_threshold_d,
    survival_threshold_r, DThreshold,
};
use crate::params::{Exterior, Logistic, Params, Regime};
use crate::simulate::{run_radial, run_strip, Geometry, Grid, Init, OuterBc, SimConfig, Snapshots};

/// Configuration errors, each naming the key and, when known, the line.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: `{key}` {reason}")]
    BadValue { key: String, line: usize, reason: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Speed,
    Steady,
    Eigen,
    Threshold,
    Diagram,
    Sweep,
    Simulate,
    Xcheck,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Speed,
        Command::Steady,
        Command::Eigen,
        Command::Threshold,
        Command::Diagram,
        Command::Sweep,
        Command::Simulate,
        Command::Xcheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Speed => "speed",
            Command::Steady => "steady",
            Command::Eigen => "eigen",
            Command::Threshold => "threshold",
            Command::Diagram => "diagram",
            Command::Sweep => "sweep",
            Command::Simulate => "simulate",
            Command::Xcheck => "xcheck",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Halfspace,
    Cylinder,
    Roadfield,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Model::Halfspace => "halfspace",
            Model::Cylinder => "cylinder",
            Model::Roadfield => "roadfield",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    DiffU,
    DiffV,
    Radius,
    Mu,
    Nu,
    Gp,
    Fp,
    Rho,
    Dim,
}

impl SweepVar {
    const ALL: [SweepVar; 9] = [
        SweepVar::DiffU,
        SweepVar::DiffV,
        SweepVar::Radius,
        SweepVar::Mu,
        SweepVar::Nu,
        SweepVar::Gp,
        SweepVar::Fp,
        SweepVar::Rho,
        SweepVar::Dim,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SweepVar::DiffU => "D",
            SweepVar::DiffV => "d",
            SweepVar::Radius => "R",
            SweepVar::Mu => "mu",
            SweepVar::Nu => "nu",
            SweepVar::Gp => "gp",
            SweepVar::Fp => "fp",
            SweepVar::Rho => "rho",
            SweepVar::Dim => "N",
        }
    }

    fn apply(self, p: &Params, x: f64) -> Params {
        let mut q = *p;
        match self {
            SweepVar::DiffU => q.diff_u = x,
            SweepVar::DiffV => q.diff_v = x,
            SweepVar::Radius => q.radius = x,
            SweepVar::Mu => q.mu = x,
            SweepVar::Nu => q.nu = x,
            SweepVar::Gp => q.gp = x,
            SweepVar::Fp => {
                if let Exterior::Kpp { fp } = &mut q.exterior {
                    *fp = x;
                }
            }
            SweepVar::Rho => {
                if let Exterior::Mortality { rho } = &mut q.exterior {
                    *rho = x;
                }
            }
            SweepVar::Dim => q.dim = x.round() as u32,
        }
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Scale,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                if k == 0 {
                    return self.start;
                }
                if k == n - 1 {
                    return self.stop;
                }
                match self.scale {
                    Scale::Linear => self.start + s * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + s * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: Model,
    pub params: Params,
    pub sweep: Option<Sweep>,
    pub sim: Option<SimConfig>,
    pub output_path: Option<String>,
}

#[derive(Default)]
struct Raw {
    entries: Vec<(String, String, usize)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.iter().find(|e| e.0 == key).map(|e| (e.1.as_str(), e.2))
    }

    fn num(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some((v, line)) = self.get(key) else { return Ok(None) };
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Some)
            .ok_or_else(|| ConfigError::BadValue { key: key.into(), line, reason: format!("is not a finite number: `{v}`") })
    }

    fn positive(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.num(key)? {
            Some(x) if x <= 0.0 => {
                let line = self.get(key).map_or(0, |e| e.1);
                Err(ConfigError::BadValue { key: key.into(), line, reason: format!("must be positive, got {x}") })
            }
            other => Ok(other),
        }
    }

    fn required(&self, key: &str) -> Result<f64, ConfigError> {
        self.positive(key)?.ok_or_else(|| ConfigError::Missing(key.into()))
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        let Some((v, line)) = self.get(key) else { return Ok(None) };
        v.parse::<usize>()
            .map(Some)
            .map_err(|_| ConfigError::BadValue { key: key.into(), line, reason: format!("is not a non-negative integer: `{v}`") })
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>, ConfigError> {
        let Some((v, line)) = self.get(key) else { return Ok(None) };
        options.iter().find(|o| o.0.eq_ignore_ascii_case(v)).map(|o| Some(o.1)).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|o| o.0).collect();
            ConfigError::BadValue { key: key.into(), line, reason: format!("must be one of {}, got `{v}`", names.join("|")) }
        })
    }
}

const TOP_KEYS: [&str; 19] = [
    "command", "model", "exterior", "N", "D", "d", "gp", "fp", "rho", "mu", "nu", "R", "S", "sweep.var",
    "sweep.start", "sweep.stop", "sweep.count", "sweep.scale", "out",
];

const SIM_KEYS: [&str; 21] = [
    "sim.geometry",
    "sim.nx",
    "sim.ny_u",
    "sim.ny_v",
    "sim.lx",
    "sim.ly",
    "sim.dt",
    "sim.T",
    "sim.init",
    "sim.center",
    "sim.radius",
    "sim.height",
    "sim.level",
    "sim.amplitude",
    "sim.alpha",
    "sim.outer_bc",
    "sim.second_order",
    "sim.sample_every",
    "sim.u_ref",
    "sim.snapshot_dir",
    "sim.snapshot_every",
];

/// Parses a flat `key = value` file; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut raw = Raw::default();
    for (k, line) in text.lines().enumerate() {
        let n = k + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line: n })?;
        let (key, value) = (key.trim(), value.trim());
        if !TOP_KEYS.contains(&key) && !SIM_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { key: key.into(), line: n });
        }
        if raw.get(key).is_some() {
            return Err(ConfigError::BadValue { key: key.into(), line: n, reason: "is given twice".into() });
        }
        raw.entries.push((key.into(), value.into(), n));
    }

    let command = match raw.get("command") {
        None => return Err(ConfigError::Missing("command".into())),
        Some((v, line)) => Command::parse(v).ok_or_else(|| ConfigError::BadValue {
            key: "command".into(),
            line,
            reason: format!("is not a known command: `{v}`"),
        })?,
    };
    let model = raw
        .choice("model", &[("halfspace", Model::Halfspace), ("cylinder", Model::Cylinder), ("roadfield", Model::Roadfield)])?
        .ok_or_else(|| ConfigError::Missing("model".into()))?;
    let mortality = raw
        .choice("exterior", &[("kpp", false), ("mortality", true)])?
        .ok_or_else(|| ConfigError::Missing("exterior".into()))?;
    let exterior = if mortality {
        Exterior::Mortality { rho: raw.required("rho")? }
    } else {
        Exterior::Kpp { fp: raw.required("fp")? }
    };
    let other = if mortality { "fp" } else { "rho" };
    if let Some((_, line)) = raw.get(other) {
        return Err(ConfigError::BadValue {
            key: other.into(),
            line,
            reason: format!("does not apply to exterior = {}", if mortality { "mortality" } else { "kpp" }),
        });
    }
    let dim = match raw.count("N")? {
        None => 2,
        Some(n) if (2..=103).contains(&n) => n as u32,
        Some(n) => {
            let line = raw.get("N").map_or(0, |e| e.1);
            return Err(ConfigError::BadValue { key: "N".into(), line, reason: format!("must lie in 2..=103, got {n}") });
        }
    };
    let params = Params {
        dim,
        diff_u: raw.required("D")?,
        diff_v: raw.required("d")?,
        gp: raw.required("gp")?,
        exterior,
        mu: raw.required("mu")?,
        nu: raw.required("nu")?,
        radius: raw.required("R")?,
        capacity: raw.positive("S")?.unwrap_or(1.0),
    };

    let sweep = parse_sweep(&raw)?;
    if command == Command::Sweep && sweep.is_none() {
        return Err(ConfigError::Missing("sweep.var".into()));
    }
    let sim = parse_sim(&raw, params)?;
    if command == Command::Simulate && sim.is_none() {
        return Err(ConfigError::Missing("sim.geometry".into()));
    }
    let output_path = raw.get("out").map(|v| v.0.to_string());
    Ok(RunConfig { command, model, params, sweep, sim, output_path })
}

fn parse_sweep(raw: &Raw) -> Result<Option<Sweep>, ConfigError> {
    let vars: Vec<(&str, SweepVar)> = SweepVar::ALL.iter().map(|v| (v.key(), *v)).collect();
    let var = match raw.get("sweep.var") {
        None => {
            if let Some(e) = raw.entries.iter().find(|e| e.0.starts_with("sweep.")) {
                return Err(ConfigError::BadValue { key: e.0.clone(), line: e.2, reason: "requires sweep.var".into() });
            }
            return Ok(None);
        }
        Some((v, line)) => vars.iter().find(|o| o.0 == v).map(|o| o.1).ok_or_else(|| ConfigError::BadValue {
            key: "sweep.var".into(),
            line,
            reason: format!("must be one of D|d|R|mu|nu|gp|fp|rho|N, got `{v}`"),
        })?,
    };
    let start = raw.required("sweep.start")?;
    let stop = raw.required("sweep.stop")?;
    let count = raw.count("sweep.count")?.ok_or_else(|| ConfigError::Missing("sweep.count".into()))?;
    if count < 2 {
        let line = raw.get("sweep.count").map_or(0, |e| e.1);
        return Err(ConfigError::BadValue { key: "sweep.count".into(), line, reason: "must be at least 2".into() });
    }
    let scale = raw.choice("sweep.scale", &[("linear", Scale::Linear), ("log", Scale::Log)])?.unwrap_or(Scale::Linear);
    Ok(Some(Sweep { var, start, stop, count, scale }))
}

fn parse_sim(raw: &Raw, params: Params) -> Result<Option<SimConfig>, ConfigError> {
    let any = raw.entries.iter().find(|e| e.0.starts_with("sim."));
    let Some(first) = any else { return Ok(None) };
    let geometry = raw
        .choice("sim.geometry", &[("strip", Geometry::Strip), ("radial", Geometry::Radial)])?
        .ok_or_else(|| ConfigError::BadValue { key: first.0.clone(), line: first.2, reason: "requires sim.geometry".into() })?;
    let cells = |key: &str| -> Result<usize, ConfigError> {
        match raw.count(key)? {
            Some(0) => Err(ConfigError::BadValue { key: key.into(), line: raw.get(key).map_or(0, |e| e.1), reason: "must be positive".into() }),
            Some(n) => Ok(n),
            None => Err(ConfigError::Missing(key.into())),
        }
    };
    let nx = if geometry == Geometry::Strip { cells("sim.nx")? } else { raw.count("sim.nx")?.unwrap_or(1) };
    let lx = if geometry == Geometry::Strip { raw.required("sim.lx")? } else { raw.positive("sim.lx")?.unwrap_or(1.0) };
    let grid = Grid { nx, ny_u: cells("sim.ny_u")?, ny_v: cells("sim.ny_v")?, lx, ly: raw.required("sim.ly")? };
    let dt = raw.required("sim.dt")?;
    let t_end = raw.required("sim.T")?;
    let init_kind = raw
        .choice("sim.init", &[("bump", 0u8), ("uniform", 1), ("exponential", 2)])?
        .unwrap_or(if geometry == Geometry::Strip { 0 } else { 1 });
    let init = match init_kind {
        0 => Init::CompactBump {
            center: raw.num("sim.center")?.unwrap_or(0.0),
            radius: raw.positive("sim.radius")?.unwrap_or(5.0),
            height: raw.positive("sim.height")?.unwrap_or(1.0),
        },
        1 => Init::SmallUniform { level: raw.num("sim.level")?.unwrap_or(1.0) },
        _ => Init::Exponential { amplitude: raw.required("sim.amplitude")?, alpha: raw.required("sim.alpha")? },
    };
    let outer_bc = raw
        .choice("sim.outer_bc", &[("neumann", OuterBc::Neumann), ("dirichlet", OuterBc::DirichletZero)])?
        .unwrap_or(OuterBc::Neumann);
    let second_order = raw.choice("sim.second_order", &[("true", true), ("false", false)])?.unwrap_or(false);
    let sample_every = raw.positive("sim.sample_every")?.unwrap_or(t_end / 400.0);
    let u_ref = raw.positive("sim.u_ref")?;
    let snapshots = match raw.get("sim.snapshot_dir") {
        Some((dir, _)) => Some(Snapshots { dir: PathBuf::from(dir), every: raw.required("sim.snapshot_every")? }),
        None => None,
    };
    Ok(Some(SimConfig {
        geometry,
        params,
        grid,
        dt,
        t_end,
        init,
        outer_bc,
        second_order,
        sample_every,
        u_ref,
        snapshots,
    }))
}

/// Shortest decimal that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Inverse of [`parse_config`]: every field is written explicitly.
pub fn render(cfg: &RunConfig) -> String {
    let p = &cfg.params;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("command", cfg.command.name().into());
    kv("model", cfg.model.name().into());
    match p.exterior {
        Exterior::Kpp { fp } => {
            kv("exterior", "kpp".into());
            kv("fp", num(fp));
        }
        Exterior::Mortality { rho } => {
            kv("exterior", "mortality".into());
            kv("rho", num(rho));
        }
    }
    kv("N", p.dim.to_string());
    kv("D", num(p.diff_u));
    kv("d", num(p.diff_v));
    kv("gp", num(p.gp));
    kv("mu", num(p.mu));
    kv("nu", num(p.nu));
    kv("R", num(p.radius));
    kv("S", num(p.capacity));
    if let Some(sw) = &cfg.sweep {
        kv("sweep.var", sw.var.key().into());
        kv("sweep.start", num(sw.start));
        kv("sweep.stop", num(sw.stop));
        kv("sweep.count", sw.count.to_string());
        kv("sweep.scale", if sw.scale == Scale::Log { "log" } else { "linear" }.into());
    }
    if let Some(sim) = &cfg.sim {
        kv("sim.geometry", if sim.geometry == Geometry::Strip { "strip" } else { "radial" }.into());
        kv("sim.nx", sim.grid.nx.to_string());
        kv("sim.ny_u", sim.grid.ny_u.to_string());
        kv("sim.ny_v", sim.grid.ny_v.to_string());
        kv("sim.lx", num(sim.grid.lx));
        kv("sim.ly", num(sim.grid.ly));
        kv("sim.dt", num(sim.dt));
        kv("sim.T", num(sim.t_end));
        match sim.init {
            Init::CompactBump { center, radius, height } => {
                kv("sim.init", "bump".into());
                kv("sim.center", num(center));
                kv("sim.radius", num(radius));
                kv("sim.height", num(height));
            }
            Init::SmallUniform { level } => {
                kv("sim.init", "uniform".into());
                kv("sim.level", num(level));
            }
            Init::Exponential { amplitude, alpha } => {
                kv("sim.init", "exponential".into());
                kv("sim.amplitude", num(amplitude));
                kv("sim.alpha", num(alpha));
            }
        }
        kv("sim.outer_bc", if sim.outer_bc == OuterBc::Neumann { "neumann" } else { "dirichlet" }.into());
        kv("sim.second_order", sim.second_order.to_string());
        kv("sim.sample_every", num(sim.sample_every));
        if let Some(u) = sim.u_ref {
            kv("sim.u_ref", num(u));
        }
        if let Some(sn) = &sim.snapshots {
            kv("sim.snapshot_dir", sn.dir.display().to_string());
            kv("sim.snapshot_every", num(sn.every));
        }
    }
    if let Some(out) = &cfg.output_path {
        kv("out", out.clone());
    }
    s
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const UNSTABLE: i32 = 4;
}

/// Exit code and CSV text of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub code: i32,
    pub csv: String,
}

/// CSV number: 17 significant digits.
fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::Infeasible(_) => "infeasible",
        Error::Unsupported(_) => "unsupported",
        Error::NoConvergence(_) => "no_convergence",
        Error::Unstable(_) => "unstable",
        Error::InvalidParam { .. } => "invalid_param",
        Error::Domain(_) | Error::Io(_) => "error",
    }
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => exit::INFEASIBLE,
        Error::Unstable(_) => exit::UNSTABLE,
        Error::InvalidParam { .. } => exit::CONFIG,
        _ => exit::FAILURE,
    }
}

const PARAM_HEADER: &str = "N,D,d,gp,fp,rho,mu,nu,R,S";

fn param_cells(p: &Params) -> String {
    let (fp, rho) = match p.exterior {
        Exterior::Kpp { fp } => (f(fp), String::new()),
        Exterior::Mortality { rho } => (String::new(), f(rho)),
    };
    format!(
        "{},{},{},{},{fp},{rho},{},{},{},{}",
        p.dim,
        f(p.diff_u),
        f(p.diff_v),
        f(p.gp),
        f(p.mu),
        f(p.nu),
        f(p.radius),
        f(p.capacity)
    )
}

struct Speed {
    regime: Option<Regime>,
    c: f64,
    beta: Option<f64>,
    alpha: Option<f64>,
    enhanced: Option<bool>,
}

fn speed(model: Model, p: &Params) -> crate::Result<Speed> {
    let from_result = |r: crate::params::SpeedResult, enhanced: Option<bool>| Speed {
        regime: r.regime,
        c: r.c,
        beta: r.witness.map(|w| w.0),
        alpha: r.witness.map(|w| w.1),
        enhanced,
    };
    match (model, p.is_mortality()) {
        (Model::Halfspace, false) => {
            let r = speed_halfspace(p)?;
            let e = r.regime.map(|g| g != Regime::Fisher);
            Ok(from_result(r, e))
        }
        (Model::Halfspace, true) => {
            let r = speed_halfspace_mortality(p)?;
            let e = r.regime.map(|g| g != Regime::Interior);
            Ok(from_result(r, e))
        }
        (Model::Cylinder, mortality) => {
            let t = if mortality { speed_cylinder_mortality(p)? } else { speed_cylinder(p)? };
            Ok(Speed {
                regime: None,
                c: t.c_star,
                beta: Some(t.beta_star),
                alpha: Some(t.alpha_star),
                enhanced: Some(t.enhanced),
            })
        }
        (Model::Roadfield, false) => {
            let r = road_field_speed(p)?;
            let e = Some(r.c > p.c_f()?);
            Ok(from_result(r, e))
        }
        (Model::Roadfield, true) => {
            Err(Error::Unsupported("the road-field model is implemented for a KPP exterior only".into()))
        }
    }
}

const SPEED_HEADER: &str = "regime,c_star,beta_star,alpha_star,enhanced,status";

fn speed_cells(model: Model, p: &Params) -> (String, i32) {
    let opt = |x: Option<f64>| x.map(f).unwrap_or_default();
    match speed(model, p) {
        Ok(s) => (
            format!(
                "{},{},{},{},{},ok",
                s.regime.map(|r| r.to_string()).unwrap_or_default(),
                f(s.c),
                opt(s.beta),
                opt(s.alpha),
                s.enhanced.map(|e| e.to_string()).unwrap_or_default()
            ),
            exit::OK,
        ),
        Err(e) => {
            let status = match (&e, p.is_mortality()) {
                (Error::Infeasible(_), true) => "extinct",
                _ => status_of(&e),
            };
            (format!(",,,,,{status}"), code_of(&e))
        }
    }
}

fn need_mortality(cfg: &RunConfig) -> Result<(), ConfigError> {
    if cfg.params.is_mortality() {
        Ok(())
    } else {
        Err(ConfigError::Invalid { key: "exterior".into(), reason: format!("{} requires exterior = mortality", cfg.command) })
    }
}

/// Strip configuration used by XCHECK when no `sim.*` keys are given.
pub fn default_xcheck_sim(p: Params) -> SimConfig {
    let grid = Grid { nx: 600, ny_u: 10, ny_v: 190, lx: 200.0, ly: 19.0 };
    let mut c = SimConfig::strip(p, grid, 0.0, 40.0);
    c.dt = 0.999 * c.stability_bound();
    c.sample_every = 0.1;
    c
}

/// Runs a configuration; config-level problems map to exit code 2.
pub fn run(cfg: &RunConfig) -> RunOutput {
    match run_inner(cfg) {
        Ok(out) => out,
        Err(e) => RunOutput { code: exit::CONFIG, csv: format!("status\nconfig_error: {e}\n") },
    }
}

fn run_inner(cfg: &RunConfig) -> Result<RunOutput, ConfigError> {
    cfg.params.validate().map_err(|e| match e {
        Error::InvalidParam { name, reason } => ConfigError::Invalid { key: name.into(), reason },
        other => ConfigError::Invalid { key: "params".into(), reason: other.to_string() },
    })?;
    let p = &cfg.params;
    let mut csv = String::new();
    let mut code = exit::OK;
    match cfg.command {
        Command::Speed => {
            let _ = writeln!(csv, "{PARAM_HEADER},{SPEED_HEADER}");
            let (cells, c) = speed_cells(cfg.model, p);
            code = c;
            let _ = writeln!(csv, "{},{cells}", param_cells(p));
        }
        Command::Sweep => {
            let sw = cfg.sweep.ok_or_else(|| ConfigError::Missing("sweep.var".into()))?;
            let _ = writeln!(csv, "var,value,{PARAM_HEADER},{SPEED_HEADER}");
            let rows: Vec<(String, i32)> = sw
                .values()
                .par_iter()
                .map(|&x| {
                    let q = sw.var.apply(p, x);
                    let (cells, c) = match q.validate() {
                        Ok(()) => speed_cells(cfg.model, &q),
                        Err(e) => (format!(",,,,,{}", status_of(&e)), code_of(&e)),
                    };
                    (format!("{},{},{},{cells}", sw.var.key(), f(x), param_cells(&q)), c)
                })
                .collect();
            for (row, c) in rows {
                if code == exit::OK {
                    code = c;
                }
                let _ = writeln!(csv, "{row}");
            }
        }
        Command::Diagram => {
            let _ = writeln!(csv, "x,y,regime");
            for cell in regime_diagram((0.1, 5.0), (0.1, 3.0), 50, 50) {
                let _ = writeln!(csv, "{},{},{}", f(cell.x), f(cell.y), cell.regime);
            }
        }
        Command::Steady => {
            let _ = writeln!(csv, "{PARAM_HEADER},u0,v0,center,residual,status");
            let row = match cfg.model {
                Model::Halfspace => steady_state_halfspace_logistic(p, 200)
                    .map(|s| format!("{},{},,{}", f(s.u0), f(s.v0), f(s.flux_residual))),
                Model::Cylinder if p.is_mortality() => {
                    radial_steady_mortality(p, &Logistic::new(p.gp, 1.0), 201).map(|s| {
                        let u0 = s.interior.last().map_or(f64::NAN, |x| x.1);
                        let v0 = s.exterior.first().map_or(f64::NAN, |x| x.1);
                        format!("{},{},{},{}", f(u0), f(v0), f(s.a0), f(s.robin_residual))
                    })
                }
                _ => {
                    return Err(ConfigError::Invalid {
                        key: "model".into(),
                        reason: "steady supports model = halfspace, or cylinder with exterior = mortality".into(),
                    })
                }
            };
            match row {
                Ok(r) => {
                    let _ = writeln!(csv, "{},{r},ok", param_cells(p));
                }
                Err(e) => {
                    code = code_of(&e);
                    let _ = writeln!(csv, "{},,,,,{}", param_cells(p), status_of(&e));
                }
            }
        }
        Command::Eigen => {
            need_mortality(cfg)?;
            let _ = writeln!(csv, "{PARAM_HEADER},beta0,kappa,survives,residual,status");
            match robin_eigenvalue(p) {
                Ok(e) => {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},ok",
                        param_cells(p),
                        f(e.beta0),
                        f(e.kappa),
                        e.survives,
                        f(e.residual)
                    );
                }
                Err(e) => {
                    code = code_of(&e);
                    let _ = writeln!(csv, "{},,,,,{}", param_cells(p), status_of(&e));
                }
            }
        }
        Command::Threshold => {
            need_mortality(cfg)?;
            let _ = writeln!(csv, "{PARAM_HEADER},R0,D0,all_D,equality,status");
            let r = survival_threshold_r(p).and_then(|r0| survival_threshold_d(p).map(|d| (r0, d)));
            match r {
                Ok((r0, d)) => {
                    let (d0, all, eq) = match d {
                        DThreshold::AllD { equality } => (String::new(), true, equality),
                        DThreshold::D0(x) => (f(x), false, false),
                    };
                    let _ = writeln!(csv, "{},{},{d0},{all},{eq},ok", param_cells(p), f(r0));
                }
                Err(e) => {
                    code = code_of(&e);
                    let _ = writeln!(csv, "{},,,,,{}", param_cells(p), status_of(&e));
                }
            }
        }
        Command::Simulate => {
            let sim = cfg.sim.as_ref().ok_or_else(|| ConfigError::Missing("sim.geometry".into()))?;
            let result = match sim.geometry {
                Geometry::Strip => run_strip(sim),
                Geometry::Radial => run_radial(sim),
            };
            match result {
                Ok(r) => {
                    let _ = writeln!(csv, "t,x_front,mass,status");
                    let fronts = r.front_positions.iter().map(|x| Some(x.1)).chain(std::iter::repeat(None));
                    for (&(t, m), x) in r.mass_history.iter().zip(fronts) {
                        let _ = writeln!(csv, "{},{},{},ok", f(t), x.map(f).unwrap_or_default(), f(m));
                    }
                }
                Err(e) => {
                    code = code_of(&e);
                    let _ = writeln!(csv, "t,x_front,mass,status\n,,,{}", status_of(&e));
                }
            }
        }
        Command::Xcheck => {
            let sim = cfg.sim.clone().unwrap_or_else(|| default_xcheck_sim(*p));
            if sim.geometry != Geometry::Strip {
                return Err(ConfigError::Invalid { key: "sim.geometry".into(), reason: "xcheck needs the strip".into() });
            }
            let _ = writeln!(csv, "c_star_solver,speed_sim,rel_err,status");
            let solver = speed(Model::Cylinder, p);
            let sim_speed = run_strip(&sim);
            match (solver, sim_speed) {
                (Ok(s), Ok(r)) => {
                    let rel = (r.fitted_speed - s.c).abs() / s.c;
                    let _ = writeln!(csv, "{},{},{},ok", f(s.c), f(r.fitted_speed), f(rel));
                }
                (Err(e), _) | (_, Err(e)) => {
                    code = code_of(&e);
                    let _ = writeln!(csv, ",,,{}", status_of(&e));
                }
            }
        }
    }
    Ok(RunOutput { code, csv })
}
