//! Model constants, reaction terms and result types shared by the solvers.

use std::fmt;

use crate::error::{Error, Result};
use crate::specfun::Order;

/// Reaction in the exterior medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exterior {
    /// KPP growth with slope `f'(0) = fp` at zero.
    Kpp { fp: f64 },
    /// Linear mortality `-rho v`.
    Mortality { rho: f64 },
}

/// All model constants.
///
/// `u` lives in the interior medium (diffusion `D`, reaction `g`), `v` in the
/// exterior medium (diffusion `d`). Exchange across the interface is
/// `D ∂_n u = ν v - μ u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Spatial dimension `N`.
    pub dim: u32,
    /// Interior diffusion `D`.
    pub diff_u: f64,
    /// Exterior diffusion `d`.
    pub diff_v: f64,
    /// Interior growth slope `g'(0)`.
    pub gp: f64,
    pub exterior: Exterior,
    /// Exchange rate out of the interior.
    pub mu: f64,
    /// Exchange rate into the interior.
    pub nu: f64,
    /// Cylinder radius `R`.
    pub radius: f64,
    /// Exterior carrying capacity `S`.
    pub capacity: f64,
}

impl Params {
    /// KPP/KPP parameters with `μ = ν = R = S = 1`, `N = 2`.
    pub fn kpp(diff_u: f64, diff_v: f64, gp: f64, fp: f64) -> Self {
        Params {
            dim: 2,
            diff_u,
            diff_v,
            gp,
            exterior: Exterior::Kpp { fp },
            mu: 1.0,
            nu: 1.0,
            radius: 1.0,
            capacity: 1.0,
        }
    }

    /// KPP/mortality parameters with `μ = ν = R = S = 1`, `N = 2`.
    pub fn mortality(diff_u: f64, diff_v: f64, gp: f64, rho: f64) -> Self {
        Params { exterior: Exterior::Mortality { rho }, ..Self::kpp(diff_u, diff_v, gp, 1.0) }
    }

    pub fn with_exchange(mut self, mu: f64, nu: f64) -> Self {
        self.mu = mu;
        self.nu = nu;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_dim(mut self, dim: u32) -> Self {
        self.dim = dim;
        self
    }

    pub fn with_capacity(mut self, capacity: f64) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn with_diff_u(mut self, diff_u: f64) -> Self {
        self.diff_u = diff_u;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParam { name, reason: format!("must be positive and finite, got {v}") })
            }
        }
        positive("D", self.diff_u)?;
        positive("d", self.diff_v)?;
        positive("gp", self.gp)?;
        positive("mu", self.mu)?;
        positive("nu", self.nu)?;
        positive("R", self.radius)?;
        positive("S", self.capacity)?;
        match self.exterior {
            Exterior::Kpp { fp } => positive("fp", fp)?,
            Exterior::Mortality { rho } => positive("rho", rho)?,
        }
        if self.dim < 2 || self.dim > 103 {
            return Err(Error::InvalidParam { name: "N", reason: format!("must lie in 2..=103, got {}", self.dim) });
        }
        Ok(())
    }

    /// `f'(0)`, or an error for a mortality exterior.
    pub fn fp(&self) -> Result<f64> {
        match self.exterior {
            Exterior::Kpp { fp } => Ok(fp),
            Exterior::Mortality { .. } => {
                Err(Error::InvalidParam { name: "fp", reason: "requires a KPP exterior".into() })
            }
        }
    }

    /// Mortality rate `rho`, or an error for a KPP exterior.
    pub fn rho(&self) -> Result<f64> {
        match self.exterior {
            Exterior::Mortality { rho } => Ok(rho),
            Exterior::Kpp { .. } => {
                Err(Error::InvalidParam { name: "rho", reason: "requires a mortality exterior".into() })
            }
        }
    }

    pub fn is_mortality(&self) -> bool {
        matches!(self.exterior, Exterior::Mortality { .. })
    }

    /// Bessel order `τ = (N - 3)/2`.
    pub fn order(&self) -> Result<Order> {
        Order::from_dim(self.dim)
    }

    /// Interior Fisher speed `c_g = 2 sqrt(D g'(0))`.
    pub fn c_g(&self) -> f64 {
        2.0 * (self.diff_u * self.gp).sqrt()
    }

    /// Exterior Fisher speed `c_f = 2 sqrt(d f'(0))`.
    pub fn c_f(&self) -> Result<f64> {
        Ok(2.0 * (self.diff_v * self.fp()?).sqrt())
    }
}

/// A scalar reaction term.
pub trait Reaction: Send + Sync {
    fn eval(&self, s: f64) -> f64;
}

/// `rate * s * (1 - s / capacity)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Logistic {
    pub rate: f64,
    pub capacity: f64,
}

impl Logistic {
    pub fn new(rate: f64, capacity: f64) -> Self {
        Logistic { rate, capacity }
    }
}

impl Reaction for Logistic {
    fn eval(&self, s: f64) -> f64 {
        self.rate * s * (1.0 - s / self.capacity)
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> Reaction for F {
    fn eval(&self, s: f64) -> f64 {
        self(s)
    }
}

/// Which closed-form speed applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `c = c_f`.
    Fisher,
    /// `c = c_g`.
    Interior,
    /// `c = c_a` (or `c_{m,a}` with mortality).
    Anomalous,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Fisher => "FISHER",
            Regime::Interior => "INTERIOR",
            Regime::Anomalous => "ANOMALOUS",
        })
    }
}

/// Solver bookkeeping attached to a result.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub residual: f64,
    pub notes: Vec<String>,
}

/// A computed speed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedResult {
    pub c: f64,
    pub regime: Option<Regime>,
    /// Contact point `(β*, α*)` of the two dispersion regions.
    pub witness: Option<(f64, f64)>,
    pub diagnostics: Diagnostics,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_builders() {
        let p = Params::kpp(2.0, 1.0, 1.0, 1.0).with_exchange(3.0, 4.0).with_radius(0.5).with_dim(4);
        assert_eq!((p.mu, p.nu, p.radius, p.dim, p.capacity), (3.0, 4.0, 0.5, 4, 1.0));
        assert!(p.validate().is_ok());
        assert_eq!(p.order().unwrap().value(), 0.5);
    }

    #[test]
    fn validation_names_the_parameter() {
        let err = Params::kpp(-1.0, 1.0, 1.0, 1.0).validate().unwrap_err();
        assert!(matches!(err, Error::InvalidParam { name: "D", .. }));
        let err = Params::mortality(1.0, 1.0, 1.0, 0.0).validate().unwrap_err();
        assert!(matches!(err, Error::InvalidParam { name: "rho", .. }));
    }

    #[test]
    fn fisher_speed_accessors() {
        let p = Params::kpp(4.0, 1.0, 1.0, 1.0);
        assert_eq!(p.c_g(), 4.0);
        assert_eq!(p.c_f().unwrap(), 2.0);
        assert!(Params::mortality(1.0, 1.0, 1.0, 1.0).c_f().is_err());
    }

    #[test]
    fn logistic_reaction() {
        let g = Logistic::new(2.0, 4.0);
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(4.0), 0.0);
        assert_eq!(g.eval(2.0), 2.0);
    }
}
