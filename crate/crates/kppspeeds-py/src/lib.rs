use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use ::kppspeeds::cli;
use ::kppspeeds::cylinder;
use ::kppspeeds::halfspace;
use ::kppspeeds::mortality::{self, DThreshold};
use ::kppspeeds::params::{self, Exterior, Logistic};
use ::kppspeeds::simulate::{self, Grid, Init, SimConfig};
use ::kppspeeds::specfun::{self, Order};
use ::kppspeeds::Error;

create_exception!(kppspeeds, KppSpeedsError, PyException);
create_exception!(kppspeeds, InfeasibleError, KppSpeedsError);
create_exception!(kppspeeds, UnstableError, KppSpeedsError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParam { .. } | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        Error::Infeasible(_) => InfeasibleError::new_err(e.to_string()),
        Error::Unstable(_) => UnstableError::new_err(e.to_string()),
        _ => KppSpeedsError::new_err(e.to_string()),
    }
}

fn order(tau: f64) -> PyResult<Order> {
    let twice = 2.0 * tau;
    if twice.fract() != 0.0 {
        return Err(PyValueError::new_err(format!("tau must be a multiple of 1/2, got {tau}")));
    }
    Order::from_twice(twice as i32).map_err(py_err)
}

/// Model constants. Build with `Params.kpp(...)` or `Params.mortality(...)`.
#[pyclass(name = "Params", frozen, from_py_object)]
#[derive(Clone)]
struct PyParams(params::Params);

#[pymethods]
impl PyParams {
    #[staticmethod]
    #[pyo3(signature = (D, d, gp, fp, mu=1.0, nu=1.0, R=1.0, N=2, S=1.0))]
    #[allow(non_snake_case, clippy::too_many_arguments)]
    fn kpp(D: f64, d: f64, gp: f64, fp: f64, mu: f64, nu: f64, R: f64, N: u32, S: f64) -> PyResult<Self> {
        let p = params::Params::kpp(D, d, gp, fp).with_exchange(mu, nu).with_radius(R).with_dim(N).with_capacity(S);
        p.validate().map_err(py_err)?;
        Ok(PyParams(p))
    }

    #[staticmethod]
    #[pyo3(signature = (D, d, gp, rho, mu=1.0, nu=1.0, R=1.0, N=2, S=1.0))]
    #[allow(non_snake_case, clippy::too_many_arguments)]
    fn mortality(D: f64, d: f64, gp: f64, rho: f64, mu: f64, nu: f64, R: f64, N: u32, S: f64) -> PyResult<Self> {
        let p = params::Params::mortality(D, d, gp, rho).with_exchange(mu, nu).with_radius(R).with_dim(N).with_capacity(S);
        p.validate().map_err(py_err)?;
        Ok(PyParams(p))
    }

    /// Copy with one field replaced; `name` is one of D, d, gp, fp, rho, mu, nu, R, N, S.
    fn with_(&self, name: &str, value: f64) -> PyResult<Self> {
        let mut p = self.0;
        match name {
            "D" => p.diff_u = value,
            "d" => p.diff_v = value,
            "gp" => p.gp = value,
            "mu" => p.mu = value,
            "nu" => p.nu = value,
            "R" => p.radius = value,
            "S" => p.capacity = value,
            "N" => p.dim = value as u32,
            "fp" | "rho" => {
                p.exterior = if name == "fp" { Exterior::Kpp { fp: value } } else { Exterior::Mortality { rho: value } }
            }
            _ => return Err(PyValueError::new_err(format!("unknown parameter `{name}`"))),
        }
        p.validate().map_err(py_err)?;
        Ok(PyParams(p))
    }

    #[getter]
    #[allow(non_snake_case)]
    fn D(&self) -> f64 {
        self.0.diff_u
    }
    #[getter]
    fn d(&self) -> f64 {
        self.0.diff_v
    }
    #[getter]
    fn gp(&self) -> f64 {
        self.0.gp
    }
    #[getter]
    fn fp(&self) -> Option<f64> {
        self.0.fp().ok()
    }
    #[getter]
    fn rho(&self) -> Option<f64> {
        self.0.rho().ok()
    }
    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }
    #[getter]
    fn nu(&self) -> f64 {
        self.0.nu
    }
    #[getter]
    #[allow(non_snake_case)]
    fn R(&self) -> f64 {
        self.0.radius
    }
    #[getter]
    #[allow(non_snake_case)]
    fn N(&self) -> u32 {
        self.0.dim
    }
    #[getter]
    #[allow(non_snake_case)]
    fn S(&self) -> f64 {
        self.0.capacity
    }
    #[getter]
    fn c_g(&self) -> f64 {
        self.0.c_g()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// A spreading speed with its regime and contact point when available.
#[pyclass(name = "Speed", frozen, get_all, skip_from_py_object)]
struct PySpeed {
    c: f64,
    regime: Option<String>,
    beta_star: Option<f64>,
    alpha_star: Option<f64>,
    enhanced: Option<bool>,
}

#[pymethods]
impl PySpeed {
    fn __repr__(&self) -> String {
        fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "None".into(), |x| x.to_string())
        }
        let regime = self.regime.as_ref().map_or_else(|| "None".into(), |g| format!("'{g}'"));
        let enhanced = self.enhanced.map_or("None", |b| if b { "True" } else { "False" });
        format!(
            "Speed(c={}, regime={regime}, beta_star={}, alpha_star={}, enhanced={enhanced})",
            self.c,
            opt(&self.beta_star),
            opt(&self.alpha_star)
        )
    }
}

impl From<params::SpeedResult> for PySpeed {
    fn from(r: params::SpeedResult) -> Self {
        PySpeed {
            c: r.c,
            regime: r.regime.map(|g| g.to_string()),
            beta_star: r.witness.map(|w| w.0),
            alpha_star: r.witness.map(|w| w.1),
            enhanced: None,
        }
    }
}

impl From<cylinder::TangencyResult> for PySpeed {
    fn from(t: cylinder::TangencyResult) -> Self {
        PySpeed {
            c: t.c_star,
            regime: None,
            beta_star: Some(t.beta_star),
            alpha_star: Some(t.alpha_star),
            enhanced: Some(t.enhanced),
        }
    }
}

/// Half-space speed for either exterior.
#[pyfunction]
fn speed_halfspace(p: &PyParams) -> PyResult<PySpeed> {
    let r = if p.0.is_mortality() { halfspace::speed_halfspace_mortality(&p.0) } else { halfspace::speed_halfspace(&p.0) };
    r.map(Into::into).map_err(py_err)
}

/// Cylinder speed `c*` (KPP exterior) or `c*_m` (mortality exterior).
#[pyfunction]
fn speed_cylinder(p: &PyParams) -> PyResult<PySpeed> {
    let r = if p.0.is_mortality() { mortality::speed_cylinder_mortality(&p.0) } else { cylinder::speed_cylinder(&p.0) };
    r.map(Into::into).map_err(py_err)
}

#[pyfunction]
fn road_field_speed(p: &PyParams) -> PyResult<PySpeed> {
    cylinder::road_field_speed(&p.0).map(Into::into).map_err(py_err)
}

#[pyfunction]
fn enhancement_test(p: &PyParams) -> PyResult<bool> {
    cylinder::enhancement_test(&p.0).map_err(py_err)
}

/// Truncated-domain speed `c*_L`.
#[pyfunction]
#[pyo3(signature = (p, L, theta=0.0))]
#[allow(non_snake_case)]
fn truncated_speed_halfspace(p: &PyParams, L: f64, theta: f64) -> PyResult<f64> {
    halfspace::truncated_speed_halfspace(&p.0, L, theta).map(|r| r.c).map_err(py_err)
}

/// `(u0, v0, flux_residual, u_profile, v_profile)` of the half-space steady state.
#[pyfunction]
#[pyo3(signature = (p, n_grid=200))]
#[allow(clippy::type_complexity)]
fn steady_state_halfspace(p: &PyParams, n_grid: usize) -> PyResult<(f64, f64, f64, Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let s = halfspace::steady_state_halfspace_logistic(&p.0, n_grid).map_err(py_err)?;
    Ok((s.u0, s.v0, s.flux_residual, s.u, s.v))
}

/// `(beta0, kappa, survives, residual)`.
#[pyfunction]
fn robin_eigenvalue(p: &PyParams) -> PyResult<(f64, f64, bool, f64)> {
    let e = mortality::robin_eigenvalue(&p.0).map_err(py_err)?;
    Ok((e.beta0, e.kappa, e.survives, e.residual))
}

#[pyfunction]
fn survival_threshold_r(p: &PyParams) -> PyResult<f64> {
    mortality::survival_threshold_r(&p.0).map_err(py_err)
}

/// `D0`, or `None` when the population survives for every `D`.
#[pyfunction]
fn survival_threshold_d(p: &PyParams) -> PyResult<Option<f64>> {
    Ok(match mortality::survival_threshold_d(&p.0).map_err(py_err)? {
        DThreshold::AllD { .. } => None,
        DThreshold::D0(d0) => Some(d0),
    })
}

/// `(a0, robin_residual, interior_profile, exterior_profile)`.
#[pyfunction]
#[pyo3(signature = (p, n_grid=200))]
#[allow(clippy::type_complexity)]
fn radial_steady_mortality(p: &PyParams, n_grid: usize) -> PyResult<(f64, f64, Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let s = mortality::radial_steady_mortality(&p.0, &Logistic::new(p.0.gp, 1.0), n_grid).map_err(py_err)?;
    Ok((s.a0, s.robin_residual, s.interior, s.exterior))
}

/// `(x, y, regime)` cells of the half-space regime diagram.
#[pyfunction]
#[pyo3(signature = (x_range=(0.1, 5.0), y_range=(0.1, 3.0), nx=50, ny=50))]
fn regime_diagram(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Vec<(f64, f64, String)> {
    halfspace::regime_diagram(x_range, y_range, nx, ny).into_iter().map(|c| (c.x, c.y, c.regime.to_string())).collect()
}

#[pyfunction]
fn h_u(tau: f64, r: f64) -> PyResult<f64> {
    specfun::h_u(order(tau)?, r).map_err(py_err)
}

#[pyfunction]
fn h_v(tau: f64, r: f64) -> PyResult<f64> {
    specfun::h_v(order(tau)?, r).map_err(py_err)
}

#[pyfunction]
fn k_u(tau: f64, s: f64) -> PyResult<f64> {
    specfun::k_u(order(tau)?, s).map_err(py_err)
}

#[pyfunction]
fn k_v(tau: f64, s: f64) -> PyResult<f64> {
    specfun::k_v(order(tau)?, s).map_err(py_err)
}

#[pyfunction]
fn bessel_j(tau: f64, r: f64) -> PyResult<f64> {
    specfun::bessel_j(order(tau)?, r).map_err(py_err)
}

#[pyfunction]
fn bessel_k(tau: f64, r: f64) -> PyResult<f64> {
    specfun::bessel_k(order(tau)?, r).map_err(py_err)
}

#[pyfunction]
fn first_zero_j(tau: f64) -> PyResult<f64> {
    Ok(specfun::first_zero_j(order(tau)?))
}

/// Summary of a simulation run.
#[pyclass(name = "SimResult", frozen, get_all, skip_from_py_object)]
struct PySimResult {
    fitted_speed: f64,
    speed_stderr: f64,
    front_positions: Vec<(f64, f64)>,
    mass_history: Vec<(f64, f64)>,
    steady_residual: f64,
    extinct: bool,
    u_ref: f64,
    coords: Vec<f64>,
    profile: Vec<f64>,
}

impl From<simulate::SimResult> for PySimResult {
    fn from(r: simulate::SimResult) -> Self {
        PySimResult {
            fitted_speed: r.fitted_speed,
            speed_stderr: r.speed_stderr,
            front_positions: r.front_positions,
            mass_history: r.mass_history,
            steady_residual: r.steady_residual,
            extinct: r.extinct,
            u_ref: r.u_ref,
            coords: r.coords,
            profile: r.profile,
        }
    }
}

/// Strip simulation with a unit bump at the left wall; `dt` defaults to the
/// stability bound.
#[pyfunction]
#[pyo3(signature = (p, nx, ny_u, ny_v, lx, ly, t_end, dt=None, sample_every=None))]
#[allow(clippy::too_many_arguments)]
fn run_strip(
    py: Python<'_>,
    p: &PyParams,
    nx: usize,
    ny_u: usize,
    ny_v: usize,
    lx: f64,
    ly: f64,
    t_end: f64,
    dt: Option<f64>,
    sample_every: Option<f64>,
) -> PyResult<PySimResult> {
    let mut cfg = SimConfig::strip(p.0, Grid { nx, ny_u, ny_v, lx, ly }, 0.0, t_end);
    cfg.dt = dt.unwrap_or(0.999 * cfg.stability_bound());
    if let Some(s) = sample_every {
        cfg.sample_every = s;
    }
    py.detach(|| simulate::run_strip(&cfg)).map(Into::into).map_err(py_err)
}

/// Radial simulation from `u = v = level`.
#[pyfunction]
#[pyo3(signature = (p, ny_u, ny_v, ly, t_end, dt=None, level=1.0, second_order=true))]
#[allow(clippy::too_many_arguments)]
fn run_radial(
    py: Python<'_>,
    p: &PyParams,
    ny_u: usize,
    ny_v: usize,
    ly: f64,
    t_end: f64,
    dt: Option<f64>,
    level: f64,
    second_order: bool,
) -> PyResult<PySimResult> {
    let mut cfg = SimConfig::radial(p.0, ny_u, ny_v, ly, 0.0, t_end);
    cfg.dt = dt.unwrap_or(0.5 * cfg.stability_bound());
    cfg.init = Init::SmallUniform { level };
    cfg.second_order = second_order;
    py.detach(|| simulate::run_radial(&cfg)).map(Into::into).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (front_positions, window_fraction=0.5))]
fn measure_speed(front_positions: Vec<(f64, f64)>, window_fraction: f64) -> PyResult<(f64, f64)> {
    simulate::measure_speed(&front_positions, window_fraction).map_err(py_err)
}

/// Parses a config text and runs it; returns `(exit_code, csv)`.
#[pyfunction]
fn run_config(py: Python<'_>, text: &str) -> PyResult<(i32, String)> {
    let cfg = cli::parse_config(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = py.detach(|| cli::run(&cfg));
    Ok((out.code, out.csv))
}

#[pymodule(name = "kppspeeds")]
fn kppspeeds_ext(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("KppSpeedsError", py.get_type::<KppSpeedsError>())?;
    m.add("InfeasibleError", py.get_type::<InfeasibleError>())?;
    m.add("UnstableError", py.get_type::<UnstableError>())?;
    m.add_class::<PyParams>()?;
    m.add_class::<PySpeed>()?;
    m.add_class::<PySimResult>()?;
    m.add_function(wrap_pyfunction!(speed_halfspace, m)?)?;
    m.add_function(wrap_pyfunction!(speed_cylinder, m)?)?;
    m.add_function(wrap_pyfunction!(road_field_speed, m)?)?;
    m.add_function(wrap_pyfunction!(enhancement_test, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_speed_halfspace, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state_halfspace, m)?)?;
    m.add_function(wrap_pyfunction!(robin_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(survival_threshold_r, m)?)?;
    m.add_function(wrap_pyfunction!(survival_threshold_d, m)?)?;
    m.add_function(wrap_pyfunction!(radial_steady_mortality, m)?)?;
    m.add_function(wrap_pyfunction!(regime_diagram, m)?)?;
    m.add_function(wrap_pyfunction!(h_u, m)?)?;
    m.add_function(wrap_pyfunction!(h_v, m)?)?;
    m.add_function(wrap_pyfunction!(k_u, m)?)?;
    m.add_function(wrap_pyfunction!(k_v, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(first_zero_j, m)?)?;
    m.add_function(wrap_pyfunction!(run_strip, m)?)?;
    m.add_function(wrap_pyfunction!(run_radial, m)?)?;
    m.add_function(wrap_pyfunction!(measure_speed, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
