//! Problem definition: levels, coupling and form factors.
//!
//! Every quantity stored here is nondimensional. Energies are ratios
//! `ω / Λ_ref` and form-factor amplitudes are measured in `Λ_ref^{1/2}`, so
//! `|v|²` and the level-shift matrices come out in units of `Λ_ref`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadratureSettings};

/// Physical energy scale used to nondimensionalize a model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// `Λ_ref` in physical units (for the hydrogen preset, s⁻¹).
    pub reference_cutoff: f64,
}

impl UnitSystem {
    pub fn new(reference_cutoff: f64) -> Result<Self> {
        if !(reference_cutoff.is_finite() && reference_cutoff > 0.0) {
            return Err(Error::InvalidModel(format!(
                "reference_cutoff must be positive and finite, got {reference_cutoff}"
            )));
        }
        Ok(UnitSystem { reference_cutoff })
    }

    /// Internal units throughout.
    pub fn natural() -> Self {
        UnitSystem { reference_cutoff: 1.0 }
    }

    pub fn energy_to_internal(&self, physical: f64) -> f64 {
        physical / self.reference_cutoff
    }

    pub fn energy_to_physical(&self, internal: f64) -> f64 {
        internal * self.reference_cutoff
    }

    pub fn amplitude_to_internal(&self, physical: f64) -> f64 {
        physical / self.reference_cutoff.sqrt()
    }

    pub fn amplitude_to_physical(&self, internal: f64) -> f64 {
        internal * self.reference_cutoff.sqrt()
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem::natural()
    }
}

/// Closed-form and tabulated form-factor families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FormFactorFamily {
    /// `v(ω) = Λ^{1/2} √x [1 + a x^{2(n−1)}] / (1 + x²)^{1+n}`, `x = ω/Λ`.
    Rational { n_index: u32, a: f64, cutoff: f64 },
    /// Hydrogen `(index+1)p → 1s` transitions; `cutoff` is `Λ₁`.
    Hydrogen { index: u8, cutoff: f64 },
    /// Samples on an ascending grid, power-law continued past the last node.
    UserTabulated {
        grid: Vec<f64>,
        values: Vec<Complex64>,
        tail_exponent: f64,
    },
}

/// One form factor `v_n(ω)`, with its threshold exponent `p` (`v ~ ω^p`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "RawFormFactor", try_from = "RawFormFactor")]
pub struct FormFactor {
    family: FormFactorFamily,
    p_exponent: f64,
    gain: f64,
    shape: Option<AlgebraicShape>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawFormFactor {
    #[serde(flatten)]
    family: FormFactorFamily,
    #[serde(default = "half")]
    p_exponent: f64,
    #[serde(default = "one")]
    gain: f64,
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

impl From<FormFactor> for RawFormFactor {
    fn from(f: FormFactor) -> Self {
        RawFormFactor {
            family: f.family,
            p_exponent: f.p_exponent,
            gain: f.gain,
        }
    }
}

impl TryFrom<RawFormFactor> for FormFactor {
    type Error = Error;

    fn try_from(raw: RawFormFactor) -> Result<Self> {
        FormFactor::from_family(raw.family, raw.p_exponent)?.scaled(raw.gain)
    }
}

/// `amp · phase · √x · P(x²) / (1 + x²)^q` with `x = ω / scale`.
#[derive(Clone, Debug, PartialEq)]
struct AlgebraicShape {
    amplitude: f64,
    phase: Complex64,
    scale: f64,
    poly: Vec<f64>,
    power: i32,
}

impl AlgebraicShape {
    fn poly_and_derivative(&self, y: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.poly.iter().rev() {
            dp = dp * y + p;
            p = p * y + c;
        }
        (p, dp)
    }

    fn value(&self, w: f64) -> Complex64 {
        let x = w / self.scale;
        let y = x * x;
        let (p, _) = self.poly_and_derivative(y);
        self.phase * (self.amplitude * x.sqrt() * p / (1.0 + y).powi(self.power))
    }

    fn derivative(&self, w: f64) -> Complex64 {
        let x = w / self.scale;
        let y = x * x;
        let q = self.power as f64;
        let (p, dp) = self.poly_and_derivative(y);
        let bracket = 0.5 * p * (1.0 + y) + 2.0 * y * (dp * (1.0 + y) - q * p);
        let d = self.amplitude / self.scale * bracket / (x.sqrt() * (1.0 + y).powi(self.power + 1));
        self.phase * d
    }

    fn mod_sq(&self, w: f64) -> f64 {
        let x = w / self.scale;
        let y = x * x;
        let (p, _) = self.poly_and_derivative(y);
        self.amplitude * self.amplitude * x * p * p / (1.0 + y).powi(2 * self.power)
    }

    fn mod_sq_derivative(&self, w: f64) -> f64 {
        let x = w / self.scale;
        let y = x * x;
        let q = self.power as f64;
        let (p, dp) = self.poly_and_derivative(y);
        let bracket = (p * p + 4.0 * y * p * dp) * (1.0 + y) - 4.0 * q * y * p * p;
        self.amplitude * self.amplitude / self.scale * bracket / (1.0 + y).powi(2 * self.power + 1)
    }
}

const HYDROGEN_SCALE: [f64; 3] = [1.0, 8.0 / 9.0, 10.0 / 12.0];

fn hydrogen_shape(index: u8, lambda1: f64) -> AlgebraicShape {
    // Global phase i of v_n^*; v_n itself carries −i.
    let phase = Complex64::new(0.0, -1.0);
    let (coeff, poly, power): (f64, Vec<f64>, i32) = match index {
        1 => (1.0, vec![1.0], 2),
        2 => (81.0 / (128.0 * 2f64.sqrt()), vec![1.0, 2.0], 3),
        _ => (54.0 * 3f64.sqrt() / 15625.0, vec![45.0, 146.0, 125.0], 4),
    };
    AlgebraicShape {
        amplitude: coeff * lambda1.sqrt(),
        phase,
        scale: HYDROGEN_SCALE[(index - 1) as usize] * lambda1,
        poly,
        power,
    }
}

fn rational_shape(n_index: u32, a: f64, cutoff: f64) -> AlgebraicShape {
    let mut poly = vec![0.0; n_index as usize];
    poly[0] = 1.0;
    poly[n_index as usize - 1] += a;
    AlgebraicShape {
        amplitude: cutoff.sqrt(),
        phase: Complex64::new(1.0, 0.0),
        scale: cutoff,
        poly,
        power: 1 + n_index as i32,
    }
}

impl FormFactor {
    pub fn rational(n_index: u32, a: f64, cutoff: f64) -> Result<Self> {
        FormFactor::from_family(FormFactorFamily::Rational { n_index, a, cutoff }, 0.5)
    }

    pub fn hydrogen(index: u8, lambda1: f64) -> Result<Self> {
        FormFactor::from_family(FormFactorFamily::Hydrogen { index, cutoff: lambda1 }, 0.5)
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<Complex64>, tail_exponent: f64, p_exponent: f64) -> Result<Self> {
        FormFactor::from_family(
            FormFactorFamily::UserTabulated {
                grid,
                values,
                tail_exponent,
            },
            p_exponent,
        )
    }

    /// Validates the family parameters. Built-in families always use `p = 1/2`.
    pub fn from_family(family: FormFactorFamily, p_exponent: f64) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        let (shape, p) = match &family {
            FormFactorFamily::Rational { n_index, a, cutoff } => {
                if *n_index < 1 {
                    return bad(format!("rational n_index must be >= 1, got {n_index}"));
                }
                if !(cutoff.is_finite() && *cutoff > 0.0) || !a.is_finite() {
                    return bad(format!("rational parameters out of range: a={a}, cutoff={cutoff}"));
                }
                (Some(rational_shape(*n_index, *a, *cutoff)), 0.5)
            }
            FormFactorFamily::Hydrogen { index, cutoff } => {
                if !(1..=3).contains(index) {
                    return bad(format!("hydrogen index must be 1, 2 or 3, got {index}"));
                }
                if !(cutoff.is_finite() && *cutoff > 0.0) {
                    return bad(format!("hydrogen cutoff must be positive, got {cutoff}"));
                }
                (Some(hydrogen_shape(*index, *cutoff)), 0.5)
            }
            FormFactorFamily::UserTabulated {
                grid,
                values,
                tail_exponent,
            } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return bad(format!(
                        "tabulated form factor needs >= 2 nodes and matching values ({} nodes, {} values)",
                        grid.len(),
                        values.len()
                    ));
                }
                if grid[0] < 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated grid must be nonnegative and strictly ascending".into());
                }
                if !(*tail_exponent < -0.5) {
                    return bad(format!("tail_exponent must be < -1/2, got {tail_exponent}"));
                }
                if !(p_exponent.is_finite() && p_exponent >= 0.0) {
                    return bad(format!("p_exponent must be >= 0, got {p_exponent}"));
                }
                (None, p_exponent)
            }
        };
        Ok(FormFactor {
            family,
            p_exponent: p,
            gain: 1.0,
            shape,
        })
    }

    pub fn family(&self) -> &FormFactorFamily {
        &self.family
    }

    pub fn p_exponent(&self) -> f64 {
        self.p_exponent
    }

    /// Constant amplitude multiplier applied on top of the family.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// The same factor multiplied by a constant `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidModel(format!("gain must be positive, got {s}")));
        }
        Ok(FormFactor {
            gain: self.gain * s,
            ..self.clone()
        })
    }

    /// Scale beyond which the factor is in its decaying tail.
    pub fn cutoff_scale(&self) -> f64 {
        match &self.family {
            FormFactorFamily::Rational { cutoff, .. } | FormFactorFamily::Hydrogen { cutoff, .. } => *cutoff,
            FormFactorFamily::UserTabulated { grid, .. } => *grid.last().unwrap(),
        }
    }

    /// `v(ω)`; callers guarantee `ω ≥ 0`.
    pub fn value(&self, w: f64) -> Complex64 {
        self.gain * self.raw_value(w)
    }

    fn raw_value(&self, w: f64) -> Complex64 {
        match &self.shape {
            Some(s) => s.value(w),
            None => self.tabulated_value(w),
        }
    }

    /// `dv/dω`, for `ω > 0`.
    pub fn derivative(&self, w: f64) -> Complex64 {
        if let Some(s) = &self.shape {
            return self.gain * s.derivative(w);
        }
        let h = tabulated_step(w);
        let lo = (w - h).max(0.0);
        self.gain * (self.tabulated_value(w + h) - self.tabulated_value(lo)) / (w + h - lo)
    }

    pub fn mod_sq(&self, w: f64) -> f64 {
        let g2 = self.gain * self.gain;
        match &self.shape {
            Some(s) => g2 * s.mod_sq(w),
            None => g2 * self.tabulated_value(w).norm_sqr(),
        }
    }

    /// `d|v|²/dω`: closed form for built-in families, central differences
    /// of the interpolant otherwise.
    pub fn mod_sq_derivative(&self, w: f64) -> f64 {
        let g2 = self.gain * self.gain;
        if let Some(s) = &self.shape {
            return g2 * s.mod_sq_derivative(w);
        }
        let h = tabulated_step(w);
        let lo = (w - h).max(0.0);
        g2 * (self.tabulated_value(w + h).norm_sqr() - self.tabulated_value(lo).norm_sqr()) / (w + h - lo)
    }

    fn tabulated_value(&self, w: f64) -> Complex64 {
        let FormFactorFamily::UserTabulated {
            grid,
            values,
            tail_exponent,
        } = &self.family
        else {
            unreachable!("closed-form factors carry a shape")
        };
        let last = grid.len() - 1;
        if w <= grid[0] {
            if grid[0] == 0.0 || w == grid[0] {
                return values[0];
            }
            return values[0] * (w / grid[0]).powf(self.p_exponent);
        }
        if w >= grid[last] {
            return values[last] * (w / grid[last]).powf(*tail_exponent);
        }
        let i = grid.partition_point(|&g| g <= w) - 1;
        let t = (w - grid[i]) / (grid[i + 1] - grid[i]);
        values[i] * (1.0 - t) + values[i + 1] * t
    }
}

#[derive(Deserialize)]
struct RawModel {
    levels: Vec<f64>,
    lambda: f64,
    form_factors: Vec<FormFactor>,
    units: UnitSystem,
}

impl TryFrom<RawModel> for FriedrichsModel {
    type Error = Error;

    fn try_from(r: RawModel) -> Result<Self> {
        FriedrichsModel::new(r.levels, r.lambda, r.form_factors, r.units)
    }
}

fn tabulated_step(w: f64) -> f64 {
    1e-6 * w.max(1e-6)
}

/// The full problem instance. Levels are kept sorted ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct FriedrichsModel {
    levels: Vec<f64>,
    lambda: f64,
    form_factors: Vec<FormFactor>,
    units: UnitSystem,
}

impl FriedrichsModel {
    pub fn new(levels: Vec<f64>, lambda: f64, form_factors: Vec<FormFactor>, units: UnitSystem) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidModel("at least one level is required".into()));
        }
        if form_factors.len() != levels.len() {
            return Err(Error::InvalidModel(format!(
                "{} levels but {} form factors",
                levels.len(),
                form_factors.len()
            )));
        }
        if levels.iter().any(|w| !w.is_finite()) || !lambda.is_finite() {
            return Err(Error::InvalidModel("levels and lambda must be finite".into()));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidModel("levels must be sorted ascending".into()));
        }
        Ok(FriedrichsModel {
            levels,
            lambda,
            form_factors,
            units,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn form_factors(&self) -> &[FormFactor] {
        &self.form_factors
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }

    /// Same model at a different coupling.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        FriedrichsModel { lambda, ..self.clone() }
    }

    /// Same model with every form factor replaced.
    pub fn with_form_factors(&self, form_factors: Vec<FormFactor>) -> Result<Self> {
        FriedrichsModel::new(self.levels.clone(), self.lambda, form_factors, self.units)
    }

    /// Largest cutoff scale among the form factors.
    pub fn max_cutoff(&self) -> f64 {
        self.form_factors.iter().map(FormFactor::cutoff_scale).fold(0.0, f64::max)
    }

    /// Breakpoint between the finite panels and the algebraic tail map.
    pub fn tail_split(&self) -> f64 {
        10.0 * self.max_cutoff()
    }

    pub fn min_p_exponent(&self) -> f64 {
        self.form_factors.iter().map(|f| f.p_exponent).fold(f64::INFINITY, f64::min)
    }

    /// Number of strictly positive levels `N₊`.
    pub fn n_positive(&self) -> usize {
        self.levels.iter().filter(|&&w| w > 0.0).count()
    }

    /// Smallest `|ω_n − ω_m|` over `m ≠ n`, or `None` for a single level.
    pub fn level_gap(&self, n: usize) -> Option<f64> {
        (0..self.n_levels())
            .filter(|&m| m != n)
            .map(|m| (self.levels[n] - self.levels[m]).abs())
            .reduce(f64::min)
    }

    pub(crate) fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.n_levels() {
            return Err(Error::Domain(format!(
                "level index {n} out of range for {} levels",
                self.n_levels()
            )));
        }
        Ok(())
    }
}

fn check_energy(w: f64) -> Result<()> {
    if !(w >= 0.0) {
        return Err(Error::Domain(format!("form factors are defined for ω >= 0, got {w}")));
    }
    Ok(())
}

/// `v_n(ω)` in units of `Λ_ref^{1/2}` (0-based `n`).
pub fn eval_form_factor(model: &FriedrichsModel, n: usize, w: f64) -> Result<Complex64> {
    model.check_index(n)?;
    check_energy(w)?;
    Ok(model.form_factors[n].value(w))
}

/// `d|v_n(ω)|²/dω`. At `ω = 0` this is the limit from above.
pub fn eval_mod_sq_derivative(model: &FriedrichsModel, n: usize, w: f64) -> Result<f64> {
    model.check_index(n)?;
    check_energy(w)?;
    let f = &model.form_factors[n];
    if w == 0.0 && f.shape.is_none() {
        return Ok(f.mod_sq_derivative(f64::MIN_POSITIVE.sqrt()));
    }
    Ok(f.mod_sq_derivative(w))
}

/// `∫₀^∞ |v_n(ω)|² dω`.
pub fn l2_norm_sq(model: &FriedrichsModel, n: usize, settings: &QuadratureSettings) -> Result<f64> {
    model.check_index(n)?;
    let f = &model.form_factors[n];
    let est = quad::integrate_semiinf_split(|w| f.mod_sq(w), model.tail_split(), &[], settings)?;
    Ok(est.value)
}

/// `Σ_n ∫|v_n|²`, the trace bound used throughout.
pub fn total_l2_norm_sq(model: &FriedrichsModel, settings: &QuadratureSettings) -> Result<f64> {
    (0..model.n_levels()).map(|n| l2_norm_sq(model, n, settings)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single(f: FormFactor) -> FriedrichsModel {
        FriedrichsModel::new(vec![0.1], 0.0, vec![f], UnitSystem::natural()).unwrap()
    }

    #[test]
    fn rational_threshold_and_unit_point() {
        let m = single(FormFactor::rational(1, 0.0, 1.0).unwrap());
        assert_eq!(eval_form_factor(&m, 0, 0.0).unwrap().norm(), 0.0);
        assert_relative_eq!(eval_form_factor(&m, 0, 1.0).unwrap().norm(), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn hydrogen_one_at_cutoff() {
        let m = single(FormFactor::hydrogen(1, 1.0).unwrap());
        let v = eval_form_factor(&m, 0, 1.0).unwrap();
        assert_relative_eq!(v.norm(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(v.im, -0.25, max_relative = 1e-15);
    }

    #[test]
    fn hydrogen_prefactors_and_cutoffs() {
        // x = ω/Λ_k = 1 for each factor gives coeff · P(1) / 2^q.
        let v2 = FormFactor::hydrogen(2, 1.0).unwrap().value(8.0 / 9.0).norm();
        assert_relative_eq!(v2, 81.0 * 3.0 / (128.0 * 2f64.sqrt() * 8.0), max_relative = 1e-14);
        let v3 = FormFactor::hydrogen(3, 1.0).unwrap().value(10.0 / 12.0).norm();
        assert_relative_eq!(v3, 54.0 * 3f64.sqrt() * 316.0 / (15625.0 * 16.0), max_relative = 1e-14);
    }

    #[test]
    fn derivative_of_mod_sq_at_threshold() {
        let m = single(FormFactor::hydrogen(1, 1.0).unwrap());
        assert_relative_eq!(eval_mod_sq_derivative(&m, 0, 0.0).unwrap(), 1.0, max_relative = 1e-15);
        assert!(eval_mod_sq_derivative(&m, 0, 1e8).unwrap().abs() < 1e-40);
        // symbolic (1 − 7x²)/(1 + x²)⁵
        let x: f64 = 0.37;
        assert_relative_eq!(
            eval_mod_sq_derivative(&m, 0, x).unwrap(),
            (1.0 - 7.0 * x * x) / (1.0 + x * x).powi(5),
            max_relative = 1e-14
        );
    }

    #[test]
    fn rational_derivative_maximum_is_at_threshold() {
        let m = single(FormFactor::rational(1, 0.0, 1.0).unwrap());
        let max = (0..=20_000)
            .map(|i| 1e-8 * 10f64.powf(i as f64 * 12.0 / 20_000.0))
            .map(|w| eval_mod_sq_derivative(&m, 0, w).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(max, 1.0, max_relative = 1e-7);
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let factors = [
            FormFactor::hydrogen(1, 1.0).unwrap(),
            FormFactor::hydrogen(2, 1.0).unwrap(),
            FormFactor::hydrogen(3, 1.0).unwrap(),
            FormFactor::rational(2, 2.0, 1.0).unwrap(),
            FormFactor::rational(3, 1.0, 0.7).unwrap(),
        ];
        let h = 1e-6;
        for f in &factors {
            for i in 0..100 {
                let w = 10f64.powf(-3.0 + 5.0 * i as f64 / 99.0).max(2.0 * h);
                let fd = (f.mod_sq(w + h) - f.mod_sq(w - h)) / (2.0 * h);
                let exact = f.mod_sq_derivative(w);
                let scale = exact.abs().max(1e-3 * f.mod_sq(w) / w);
                assert!((fd - exact).abs() <= 1e-5 * scale, "{f:?} at {w}: fd {fd} vs {exact}");
                let dv = (f.value(w + h) - f.value(w - h)) / (2.0 * h);
                let dv_exact = f.derivative(w);
                assert!((dv - dv_exact).norm() <= 1e-5 * dv_exact.norm().max(1e-3 * f.value(w).norm() / w));
            }
        }
    }

    #[test]
    fn threshold_ratio_has_finite_limit() {
        for f in [FormFactor::hydrogen(3, 1.0).unwrap(), FormFactor::rational(2, 2.0, 1.0).unwrap()] {
            let r1 = f.value(1e-10).norm() / 1e-5;
            let r2 = f.value(1e-12).norm() / 1e-6;
            assert_relative_eq!(r1, r2, max_relative = 1e-8);
        }
    }

    #[test]
    fn l2_norms_match_closed_forms() {
        let s = QuadratureSettings::default();
        let m = single(FormFactor::hydrogen(1, 1.0).unwrap());
        assert_relative_eq!(l2_norm_sq(&m, 0, &s).unwrap(), 1.0 / 6.0, max_relative = 1e-8);
        let m = single(FormFactor::rational(1, 0.0, 1.0).unwrap());
        assert_relative_eq!(l2_norm_sq(&m, 0, &s).unwrap(), 1.0 / 6.0, max_relative = 1e-8);
        // Λ-scaling: |v|² = Λ h(ω/Λ) integrates to Λ² ∫h.
        let m = single(FormFactor::rational(1, 0.0, 3.0).unwrap());
        assert_relative_eq!(l2_norm_sq(&m, 0, &s).unwrap(), 9.0 / 6.0, max_relative = 1e-8);
    }

    #[test]
    fn zero_tabulated_factor_has_zero_norm() {
        let f = FormFactor::tabulated(vec![0.0, 1.0, 2.0], vec![Complex64::new(0.0, 0.0); 3], -2.0, 0.5).unwrap();
        let m = single(f);
        assert_eq!(l2_norm_sq(&m, 0, &QuadratureSettings::default()).unwrap(), 0.0);
    }

    #[test]
    fn tabulated_interpolates_and_extends() {
        let f = FormFactor::tabulated(
            vec![1.0, 2.0, 4.0],
            vec![Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0), Complex64::new(2.0, 0.0)],
            -2.0,
            0.5,
        )
        .unwrap();
        assert_relative_eq!(f.value(1.5).re, 2.0);
        assert_relative_eq!(f.value(8.0).re, 0.5);
        assert_relative_eq!(f.value(0.25).re, 0.5);
        assert!(FormFactor::tabulated(vec![1.0, 2.0], vec![Complex64::default(); 2], -0.4, 0.5).is_err());
    }

    #[test]
    fn domain_errors() {
        let m = single(FormFactor::hydrogen(1, 1.0).unwrap());
        assert!(matches!(eval_form_factor(&m, 0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(eval_form_factor(&m, 1, 1.0), Err(Error::Domain(_))));
        assert!(FormFactor::hydrogen(4, 1.0).is_err());
        assert!(FormFactor::rational(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn model_invariants() {
        let f = || FormFactor::hydrogen(1, 1.0).unwrap();
        assert!(FriedrichsModel::new(vec![0.2, 0.1], 0.0, vec![f(), f()], UnitSystem::natural()).is_err());
        assert!(FriedrichsModel::new(vec![0.1], 0.0, vec![f(), f()], UnitSystem::natural()).is_err());
        assert!(FriedrichsModel::new(vec![], 0.0, vec![], UnitSystem::natural()).is_err());
        assert!(UnitSystem::new(0.0).is_err());
    }

    #[test]
    fn unit_round_trip() {
        let u = UnitSystem::new(8.498e18).unwrap();
        for &x in &[1.55e16, 3.0e18, 1.0, 7.2e21] {
            let back = u.energy_to_physical(u.energy_to_internal(x));
            assert_relative_eq!(back, x, max_relative = 1e-14);
            let back = u.amplitude_to_physical(u.amplitude_to_internal(x));
            assert_relative_eq!(back, x, max_relative = 1e-14);
        }
    }
}
