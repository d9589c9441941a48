//! Integration over `[0, ∞)` and the regularized principal value.
//!
//! The engine is a globally adaptive 21-point Gauss–Kronrod scheme. Semi-infinite
//! ranges are handled by identity panels up to a split point followed by the
//! algebraic map `ω = ω_split + Λ t/(1 − t)`, `t ∈ [0, 1)`, all inside one
//! adaptive run so the error budget is shared.

mod adaptive;
mod pv;
mod shift;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

pub use adaptive::{integrate, integrate_semiinf, integrate_semiinf_split};
pub use pv::{principal_value, Bump};
pub use shift::{gram_matrix, pv_matrix, t_matrix};

/// Values the adaptive integrator can accumulate.
pub trait QuadValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + 'static
{
    fn zero() -> Self;
    fn norm(&self) -> f64;
    fn is_finite(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn is_finite(&self) -> bool {
        Complex64::is_finite(*self)
    }
}

/// Result of an integration with its error estimate.
#[derive(Clone, Copy, Debug)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// `Λ_ref` in internal units; the length scale of the tail map.
    pub tail_scale: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_subdivisions: 2000,
            tail_scale: 1.0,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidSettings("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions < 10 {
            return Err(Error::InvalidSettings("max_subdivisions must be at least 10".into()));
        }
        if !(self.tail_scale > 0.0 && self.tail_scale.is_finite()) {
            return Err(Error::InvalidSettings("tail_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Bump-function regularization of `P∫ η(ω)/(ω − E) dω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PvSettings {
    /// Upper bound on the bump half-width; `δ = min(E/2, delta_cap)`.
    pub delta_cap: f64,
}

impl Default for PvSettings {
    fn default() -> Self {
        PvSettings { delta_cap: 0.5 }
    }
}

impl PvSettings {
    pub fn delta(&self, e: f64) -> f64 {
        (0.5 * e).min(self.delta_cap)
    }
}

/// Everything the numerical routines need besides the model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericalSettings {
    pub quad: QuadratureSettings,
    pub pv: PvSettings,
    pub execution: Execution,
}

impl NumericalSettings {
    pub fn sequential(mut self) -> Self {
        self.execution = Execution::Sequential;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        if !(self.pv.delta_cap > 0.0) {
            return Err(Error::InvalidSettings("delta_cap must be positive".into()));
        }
        Ok(())
    }
}
