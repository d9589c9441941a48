//! Bound states of the N-level Friedrichs model.
//!
//! A set of discrete levels `ω_1 ≤ … ≤ ω_N` couples with strength `λ` to a
//! continuum on `[0, ∞)` through form factors `v_n(ω)`. Eigenenergies below
//! the continuum solve `κ_n(E) = E`, where `κ_n` are the sorted eigenvalues of
//! `K(E) = diag(ω) − λ² S(E)` and `S(E)` is the Gram-type level-shift matrix.
//! Inside the continuum `S` is replaced by its principal-value analogue `D(E)`,
//! and [`thresholds`] evaluates the explicit coupling bounds under which no
//! embedded eigenvalue can exist.
//!
//! All energies are nondimensional, measured in units of the model's
//! [`UnitSystem::reference_cutoff`].
//!
//! ```no_run
//! use friedrichs::{presets, solver, NumericalSettings};
//!
//! let model = presets::three_level_fig(0.7).unwrap();
//! let report = solver::solve(&model, &NumericalSettings::default()).unwrap();
//! assert_eq!(report.count, 2);
//! ```

pub mod config;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod par;
pub mod presets;
pub mod quad;
pub mod solver;
pub mod spectral;
pub mod thresholds;

pub use error::{Error, Result};
pub use model::{FormFactor, FormFactorFamily, FriedrichsModel, UnitSystem};
pub use par::Execution;
pub use quad::{NumericalSettings, PvSettings, QuadratureSettings};
pub use spectral::{CMatrix, EigenCurvePoint, LevelShiftMatrix, ShiftKind};

pub use num_complex::Complex64;
