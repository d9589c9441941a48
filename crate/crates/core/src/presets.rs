//! Built-in models.

use crate::error::{Error, Result};
use crate::model::{FormFactor, FriedrichsModel, UnitSystem};

/// `Λ₁` for the hydrogen 2p/3p/4p → 1s transitions, in s⁻¹.
pub const HYDROGEN_LAMBDA1: f64 = 8.498e18;
/// Rydberg angular frequency `Ω`, in s⁻¹.
pub const HYDROGEN_OMEGA: f64 = 1.55e16;
/// Fine-structure-sized coupling squared used for hydrogen.
pub const HYDROGEN_LAMBDA_SQ: f64 = 6.435e-9;

pub const NAMES: [&str; 2] = ["hydrogen-4level", "three-level-fig"];

/// `Ω / Λ₁`.
pub fn hydrogen_omega() -> f64 {
    HYDROGEN_OMEGA / HYDROGEN_LAMBDA1
}

/// The ground state sits at the continuum edge; the 2p, 3p, 4p levels are at
/// `(4/3) Ω (1 − (n+1)⁻²)` in units of `Λ₁`.
pub fn hydrogen_4level() -> Result<FriedrichsModel> {
    let omega = hydrogen_omega();
    let levels = (1..=3)
        .map(|n: i32| 4.0 / 3.0 * omega * (1.0 - 1.0 / f64::from((n + 1) * (n + 1))))
        .collect();
    let ff = (1..=3).map(|i| FormFactor::hydrogen(i, 1.0)).collect::<Result<Vec<_>>>()?;
    FriedrichsModel::new(levels, HYDROGEN_LAMBDA_SQ.sqrt(), ff, UnitSystem::new(HYDROGEN_LAMBDA1)?)
}

/// Three rational form factors with `a = (0, 2, 1)` at `ω/Λ = (−0.01, 0.01, 0.02)`.
pub fn three_level_fig(lambda: f64) -> Result<FriedrichsModel> {
    let ff = [(1, 0.0), (2, 2.0), (3, 1.0)]
        .into_iter()
        .map(|(n, a)| FormFactor::rational(n, a, 1.0))
        .collect::<Result<Vec<_>>>()?;
    FriedrichsModel::new(vec![-0.01, 0.01, 0.02], lambda, ff, UnitSystem::natural())
}

/// Looks a preset up by name. `three-level-fig` starts at `λ = 0.7`.
pub fn by_name(name: &str) -> Result<FriedrichsModel> {
    match name {
        "hydrogen-4level" => hydrogen_4level(),
        "three-level-fig" => three_level_fig(0.7),
        _ => Err(Error::Config(format!(
            "unknown preset '{name}' (available: {})",
            NAMES.join(", ")
        ))),
    }
}
