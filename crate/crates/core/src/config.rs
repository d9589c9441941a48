//! Model files.
//!
//! A model file is TOML in physical units: energies and cutoffs are divided by
//! `reference_cutoff` on load, tabulated amplitudes by its square root.
//!
//! ```toml
//! reference_cutoff = 8.498e18
//! levels = [1.55e16, 1.837e16, 1.9375e16]
//! lambda_sq = 6.435e-9
//!
//! [[form_factors]]
//! family = "hydrogen"
//! index = 1
//! cutoff = 8.498e18
//!
//! [quadrature]
//! rel_tol = 1e-11
//! ```
//!
//! Alternatively `preset = "three-level-fig"` starts from a built-in model;
//! `lambda` / `lambda_sq` and the numerical sections still apply.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{FormFactor, FormFactorFamily, FriedrichsModel, UnitSystem};
use crate::par::Execution;
use crate::presets;
use crate::quad::{NumericalSettings, PvSettings};

#[derive(Clone, Debug, Deserialize)]
pub struct FormFactorEntry {
    #[serde(flatten)]
    pub family: FormFactorFamily,
    pub p_exponent: Option<f64>,
    pub gain: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub preset: Option<String>,
    pub reference_cutoff: Option<f64>,
    pub levels: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub lambda_sq: Option<f64>,
    #[serde(default)]
    pub form_factors: Vec<FormFactorEntry>,
    pub quadrature: Option<QuadratureOverrides>,
    pub pv: Option<PvSettings>,
    pub execution: Option<Execution>,
}

/// A model together with the numerical settings requested for it.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub model: FriedrichsModel,
    pub settings: NumericalSettings,
}

impl QuadratureOverrides {
    pub fn apply(&self, settings: &mut NumericalSettings) {
        if let Some(v) = self.rel_tol {
            settings.quad.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            settings.quad.abs_tol = v;
        }
        if let Some(v) = self.max_subdivisions {
            settings.quad.max_subdivisions = v;
        }
    }
}

fn to_internal(entry: &FormFactorEntry, units: &UnitSystem) -> Result<FormFactor> {
    let family = match &entry.family {
        FormFactorFamily::Rational { n_index, a, cutoff } => FormFactorFamily::Rational {
            n_index: *n_index,
            a: *a,
            cutoff: units.energy_to_internal(*cutoff),
        },
        FormFactorFamily::Hydrogen { index, cutoff } => FormFactorFamily::Hydrogen {
            index: *index,
            cutoff: units.energy_to_internal(*cutoff),
        },
        FormFactorFamily::UserTabulated {
            grid,
            values,
            tail_exponent,
        } => FormFactorFamily::UserTabulated {
            grid: grid.iter().map(|&w| units.energy_to_internal(w)).collect(),
            values: values.iter().map(|&v| v / units.reference_cutoff.sqrt()).collect(),
            tail_exponent: *tail_exponent,
        },
    };
    let f = FormFactor::from_family(family, entry.p_exponent.unwrap_or(0.5))?;
    match entry.gain {
        Some(g) => f.scaled(g),
        None => Ok(f),
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<Loaded> {
        let lambda = match (self.lambda, self.lambda_sq) {
            (Some(_), Some(_)) => return Err(Error::Config("give either lambda or lambda_sq, not both".into())),
            (Some(l), None) => Some(l),
            (None, Some(l2)) if l2 >= 0.0 => Some(l2.sqrt()),
            (None, Some(l2)) => return Err(Error::Config(format!("lambda_sq must be nonnegative, got {l2}"))),
            (None, None) => None,
        };
        let mut model = if let Some(name) = &self.preset {
            if self.levels.is_some() || !self.form_factors.is_empty() || self.reference_cutoff.is_some() {
                return Err(Error::Config("a preset cannot be combined with levels or form_factors".into()));
            }
            presets::by_name(name)?
        } else {
            let units = UnitSystem::new(self.reference_cutoff.unwrap_or(1.0)).map_err(|e| Error::Config(e.to_string()))?;
            let levels = self
                .levels
                .as_ref()
                .ok_or_else(|| Error::Config("missing 'levels'".into()))?
                .iter()
                .map(|&w| units.energy_to_internal(w))
                .collect();
            let ff = self
                .form_factors
                .iter()
                .map(|e| to_internal(e, &units))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Config(e.to_string()))?;
            let lambda = lambda.ok_or_else(|| Error::Config("missing 'lambda' or 'lambda_sq'".into()))?;
            FriedrichsModel::new(levels, lambda, ff, units).map_err(|e| Error::Config(e.to_string()))?
        };
        if let Some(l) = lambda {
            model = model.with_lambda(l);
        }
        let mut settings = NumericalSettings::default();
        if let Some(q) = &self.quadrature {
            q.apply(&mut settings);
        }
        if let Some(pv) = self.pv {
            settings.pv = pv;
        }
        if let Some(x) = self.execution {
            settings.execution = x;
        }
        settings.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(Loaded { model, settings })
    }
}

pub fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    ModelFile::parse(&text)?.build()
}
