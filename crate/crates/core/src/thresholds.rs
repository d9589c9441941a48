//! Coupling thresholds below which no eigenvalue can sit inside the continuum.
//!
//! All constants are computed by deterministic grid scans followed by
//! golden-section refinement.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, FriedrichsModel};
use crate::par;
use crate::quad::{self, NumericalSettings};

/// Points in the log grid for `‖D(E)‖`.
pub const D_GRID_POINTS: usize = 400;
/// `E_max = D_RANGE · max cutoff`.
pub const D_RANGE: f64 = 100.0;
/// Lower end of the `‖D(E)‖` grid relative to the largest cutoff.
pub const D_GRID_FLOOR: f64 = 1e-6;
/// Points in the log grid for `sup |d|v|²/dω|`.
pub const DERIVATIVE_GRID_POINTS: usize = 10_000;
/// Points in the dense scan of each `γ` window.
pub const WINDOW_POINTS: usize = 2001;
/// `α_n` at or below this is treated as a zero of the form factor.
pub const ALPHA_TOL: f64 = 1e-14;
/// Relative accuracy of the refined maximizers.
pub const REFINE_TOL: f64 = 1e-4;

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
fn golden_max<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Spectral norm and smallest eigenvalue of `D(E)` on the search grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DScan {
    pub energies: Vec<f64>,
    pub norms: Vec<f64>,
    pub min_eigenvalues: Vec<f64>,
    /// `‖S(0)‖ = ‖D(0⁺)‖`.
    pub threshold_norm: f64,
    pub threshold_min_eigenvalue: f64,
}

pub fn scan_d(model: &FriedrichsModel, settings: &NumericalSettings) -> Result<DScan> {
    if model.min_p_exponent() <= 0.0 {
        return Err(Error::Hypothesis("every form factor needs p_exponent > 0".into()));
    }
    let top = D_RANGE * model.max_cutoff();
    let energies = log_grid(D_GRID_FLOOR * model.max_cutoff(), top, D_GRID_POINTS);
    let inner = settings.sequential();
    let eig = |e: f64| -> Result<Vec<f64>> { quad::pv_matrix(model, e, &inner)?.eigenvalues() };
    let spectra = par::try_map(settings.execution, &energies, |&e| eig(e))?;
    let s0 = eig(0.0)?;
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(DScan {
        norms: spectra.iter().map(|v| norm(v)).collect(),
        min_eigenvalues: spectra.iter().map(|v| v[0]).collect(),
        energies,
        threshold_norm: norm(&s0),
        threshold_min_eigenvalue: s0[0],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupNorm {
    pub value: f64,
    /// `E*`; 0 when the supremum is the threshold limit.
    pub argmax: f64,
    pub e_max: f64,
    /// `‖D(E_max)‖`, the size of the decaying tail beyond the grid.
    pub tail: f64,
}

/// `sup_{E>0} ‖D(E)‖` refined around the best grid point.
pub fn sup_from_scan(model: &FriedrichsModel, scan: &DScan, settings: &NumericalSettings) -> Result<SupNorm> {
    let (i, &best) = scan
        .norms
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    let e_max = *scan.energies.last().unwrap();
    let tail = *scan.norms.last().unwrap();
    if scan.threshold_norm >= best && i == 0 {
        return Ok(SupNorm {
            value: scan.threshold_norm,
            argmax: 0.0,
            e_max,
            tail,
        });
    }
    let lo = scan.energies[i.saturating_sub(1)].ln();
    let hi = scan.energies[(i + 1).min(scan.energies.len() - 1)].ln();
    let inner = settings.sequential();
    let (x, v) = golden_max(|x| quad::pv_matrix(model, x.exp(), &inner)?.norm(), lo, hi, REFINE_TOL)?;
    let (argmax, value) = if v >= best { (x.exp(), v) } else { (scan.energies[i], best) };
    Ok(SupNorm {
        value,
        argmax,
        e_max,
        tail,
    })
}

pub fn sup_d_norm(model: &FriedrichsModel, settings: &NumericalSettings) -> Result<SupNorm> {
    sup_from_scan(model, &scan_d(model, settings)?, settings)
}

fn check_levels(model: &FriedrichsModel) -> Result<()> {
    let w = model.levels();
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] == w[j] {
                return Err(Error::DegenerateLevels(i, j));
            }
        }
    }
    Ok(())
}

/// `R_a = min{ω_{N−N₊+1}/3, min_{n≠m} |ω_n − ω_m|/3}`.
pub fn r_a(model: &FriedrichsModel) -> Result<f64> {
    check_levels(model)?;
    let first_positive = model
        .levels()
        .iter()
        .copied()
        .find(|&w| w > 0.0)
        .ok_or_else(|| Error::Hypothesis("no positive level".into()))?;
    let gap = (0..model.n_levels()).filter_map(|n| model.level_gap(n)).fold(f64::INFINITY, f64::min);
    Ok((first_positive / 3.0).min(gap / 3.0))
}

pub fn lambda_a(model: &FriedrichsModel, sup: f64) -> Result<f64> {
    Ok((r_a(model)? / sup).sqrt())
}

/// `λ_n = [(min_{m≠n}|ω_n − ω_m|/3) / sup‖D‖]^{1/2}`.
pub fn lambda_n(model: &FriedrichsModel, n: usize, sup: f64) -> Result<f64> {
    model.check_index(n)?;
    check_levels(model)?;
    let gap = model
        .level_gap(n)
        .ok_or_else(|| Error::Hypothesis("a single level has no gap".into()))?;
    Ok((gap / 3.0 / sup).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RB {
    pub r_b: f64,
    pub lambda_b: f64,
    pub diagnostic: Option<String>,
}

/// Largest `R` with `D(E′) ⪰ −psd_tol` on `(0, R)`: the first violation on
/// the grid is located by bisection.
pub fn r_b_from_scan(model: &FriedrichsModel, scan: &DScan, sup: f64, settings: &NumericalSettings) -> Result<RB> {
    let psd_tol = 1e-10 * sup;
    let lambda_b = |r: f64| (r / sup).sqrt();
    if scan.threshold_min_eigenvalue < -psd_tol {
        return Ok(RB {
            r_b: 0.0,
            lambda_b: 0.0,
            diagnostic: Some(format!("S(0) is not positive semidefinite (δ₁ = {:e})", scan.threshold_min_eigenvalue)),
        });
    }
    let Some(k) = scan.min_eigenvalues.iter().position(|&d| d < -psd_tol) else {
        let top = *scan.energies.last().unwrap();
        return Ok(RB {
            r_b: top,
            lambda_b: lambda_b(top),
            diagnostic: Some("D(E) stays positive semidefinite over the whole scan".into()),
        });
    };
    let mut lo = if k == 0 { 0.0 } else { scan.energies[k - 1] };
    let mut hi = scan.energies[k];
    let inner = settings.sequential();
    while hi - lo > REFINE_TOL * hi {
        let mid = 0.5 * (lo + hi);
        let d1 = quad::pv_matrix(model, mid, &inner)?.eigenvalues()?[0];
        if d1 < -psd_tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if lo == 0.0 {
        return Ok(RB {
            r_b: 0.0,
            lambda_b: 0.0,
            diagnostic: Some("D(E) fails to be positive semidefinite arbitrarily close to 0".into()),
        });
    }
    Ok(RB {
        r_b: lo,
        lambda_b: lambda_b(lo),
        diagnostic: None,
    })
}

pub fn r_b_lambda_b(model: &FriedrichsModel, settings: &NumericalSettings) -> Result<RB> {
    let scan = scan_d(model, settings)?;
    let sup = sup_from_scan(model, &scan, settings)?;
    r_b_from_scan(model, &scan, sup.value, settings)
}

/// `sup_{ω>0} |d|v_n(ω)|²/dω|`.
pub fn sup_mod_sq_derivative(model: &FriedrichsModel, n: usize) -> Result<f64> {
    model.check_index(n)?;
    let scale = model.form_factors()[n].cutoff_scale();
    let grid = log_grid(1e-8 * scale, 1e3 * scale, DERIVATIVE_GRID_POINTS);
    let d = |w: f64| model::eval_mod_sq_derivative(model, n, w).map(f64::abs);
    let mut best = (0.0, d(0.0)?);
    let mut best_i = None;
    for (i, &w) in grid.iter().enumerate() {
        let v = d(w)?;
        if v > best.1 {
            best = (w, v);
            best_i = Some(i);
        }
    }
    if let Some(i) = best_i {
        let lo = grid[i.saturating_sub(1)].ln();
        let hi = grid[(i + 1).min(grid.len() - 1)].ln();
        let (_, v) = golden_max(|x| d(x.exp()), lo, hi, 1e-10)?;
        best.1 = best.1.max(v);
    }
    Ok(best.1)
}

/// `Σ_i sup_{|ω−ω_n|<R_a, ω≥0} |v_i(ω)|²`.
pub fn gamma_window(model: &FriedrichsModel, center: f64, radius: f64) -> Result<f64> {
    let lo = (center - radius).max(0.0);
    let hi = center + radius;
    let grid: Vec<f64> = (0..WINDOW_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (WINDOW_POINTS - 1) as f64)
        .collect();
    let mut total = 0.0;
    for f in model.form_factors() {
        let (i, best) = grid
            .iter()
            .map(|&w| f.mod_sq(w))
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(grid.len() - 1)];
        let (_, v) = golden_max(|w| Ok(f.mod_sq(w)), a, b, 1e-12 * hi)?;
        total += best.max(v);
    }
    Ok(total)
}

/// `(α_n, β_n, γ_n)` for a positive level.
pub fn alpha_beta_gamma(model: &FriedrichsModel, n: usize, r_a: f64) -> Result<(f64, f64, f64)> {
    model.check_index(n)?;
    let w = model.levels()[n];
    if !(w > 0.0) {
        return Err(Error::Hypothesis(format!("level {} is not positive", n + 1)));
    }
    let gap = model
        .level_gap(n)
        .ok_or_else(|| Error::Hypothesis("a single level has no gap".into()))?;
    let alpha = model::eval_form_factor(model, n, w)?.norm_sqr();
    let beta = gap / 3.0 * sup_mod_sq_derivative(model, n)?;
    let gamma = gamma_window(model, w, r_a)?;
    Ok((alpha, beta, gamma))
}

/// `λ̄_n² = λ_n²/(2β) [s − √(s² − 4αβ)]` with `s = α + β + γ`, evaluated in
/// the cancellation-free form `2 λ_n² α / (s + √(s² − 4αβ))`.
pub fn lambda_bar_from_constants(lambda_n: f64, alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    if !(alpha > ALPHA_TOL) {
        return Err(Error::Hypothesis(format!("v_n(ω_n) vanishes (α = {alpha:e})")));
    }
    if !(beta >= 0.0 && gamma >= 0.0) {
        return Err(Error::Hypothesis(format!("β = {beta:e} and γ = {gamma:e} must be nonnegative")));
    }
    let s = alpha + beta + gamma;
    let disc = (s * s - 4.0 * alpha * beta).max(0.0);
    Ok(lambda_n * (2.0 * alpha / (s + disc.sqrt())).sqrt())
}

pub fn lambda_bar(model: &FriedrichsModel, n: usize, sup: f64) -> Result<f64> {
    let ra = r_a(model)?;
    let (a, b, g) = alpha_beta_gamma(model, n, ra)?;
    lambda_bar_from_constants(lambda_n(model, n, sup)?, a, b, g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `|λ| < bound`: no eigenvalue in the continuum.
    Certified,
    /// The bound is not met; nothing follows either way.
    NotCertified,
    /// A hypothesis of the certificate fails for this model.
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelConstants {
    /// 0-based level index.
    pub index: usize,
    pub omega: f64,
    pub lambda_n: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda_bar: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub sup_d_norm: SupNorm,
    pub r_a: f64,
    pub r_b: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub r_b_diagnostic: Option<String>,
    pub levels: Vec<LevelConstants>,
    /// `min{λ_a, λ_b, λ̄_n}`.
    pub bound: f64,
    /// `min{λ_a, λ̄_n}`, leaving `λ_b` out.
    pub bound_without_b: f64,
    /// Name of the constant attaining `bound`.
    pub binding: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub lambda: f64,
    pub n_plus: usize,
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub constants: Option<Constants>,
}

fn inapplicable(model: &FriedrichsModel, reason: String) -> ThresholdReport {
    ThresholdReport {
        lambda: model.lambda(),
        n_plus: model.n_positive(),
        verdict: Verdict::Inapplicable,
        reason: Some(reason),
        constants: None,
    }
}

/// Evaluates every constant and compares `|λ|` with their minimum.
pub fn verdict(model: &FriedrichsModel, settings: &NumericalSettings) -> Result<ThresholdReport> {
    if model.n_positive() == 0 {
        return Ok(inapplicable(model, "no level lies inside the continuum".into()));
    }
    let ra = match r_a(model) {
        Ok(r) => r,
        Err(e @ (Error::DegenerateLevels(..) | Error::Hypothesis(_))) => return Ok(inapplicable(model, e.to_string())),
        Err(e) => return Err(e),
    };
    if model.min_p_exponent() <= 0.0 {
        return Ok(inapplicable(model, "every form factor needs p_exponent > 0".into()));
    }
    let scan = scan_d(model, settings)?;
    let sup = sup_from_scan(model, &scan, settings)?;
    let rb = r_b_from_scan(model, &scan, sup.value, settings)?;
    let la = (ra / sup.value).sqrt();
    let first = model.n_levels() - model.n_positive();
    let positive: Vec<usize> = (first..model.n_levels()).collect();
    let per_level = par::try_map(settings.execution, &positive, |&n| -> Result<LevelConstants> {
        let (alpha, beta, gamma) = alpha_beta_gamma(model, n, ra)?;
        let ln = lambda_n(model, n, sup.value)?;
        Ok(LevelConstants {
            index: n,
            omega: model.levels()[n],
            lambda_n: ln,
            alpha,
            beta,
            gamma,
            lambda_bar: lambda_bar_from_constants(ln, alpha, beta, gamma)?,
        })
    });
    let levels = match per_level {
        Ok(l) => l,
        Err(e @ Error::Hypothesis(_)) => return Ok(inapplicable(model, e.to_string())),
        Err(e) => return Err(e),
    };
    let mut candidates = vec![("lambda_a".to_string(), la)];
    candidates.extend(levels.iter().map(|l| (format!("lambda_bar_{}", l.index + 1), l.lambda_bar)));
    let (name_wo, bound_without_b) = candidates
        .iter()
        .cloned()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let (binding, bound) = if rb.lambda_b < bound_without_b {
        ("lambda_b".to_string(), rb.lambda_b)
    } else {
        (name_wo, bound_without_b)
    };
    let verdict = if model.lambda().abs() < bound {
        Verdict::Certified
    } else {
        Verdict::NotCertified
    };
    Ok(ThresholdReport {
        lambda: model.lambda(),
        n_plus: model.n_positive(),
        verdict,
        reason: None,
        constants: Some(Constants {
            sup_d_norm: sup,
            r_a: ra,
            r_b: rb.r_b,
            lambda_a: la,
            lambda_b: rb.lambda_b,
            r_b_diagnostic: rb.diagnostic,
            levels,
            bound,
            bound_without_b,
            binding,
        }),
    })
}

impl ThresholdReport {
    /// Plain-text table of the constants, squared couplings included.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "lambda^2        {:.6e}", self.lambda * self.lambda);
        let _ = writeln!(s, "N+              {}", self.n_plus);
        let Some(c) = &self.constants else {
            let _ = writeln!(s, "verdict         inapplicable ({})", self.reason.as_deref().unwrap_or(""));
            return s;
        };
        let _ = writeln!(s, "sup ||D(E)||    {:.6e} at E* = {:.6e} (tail {:.3e} at E = {:.3e})", c.sup_d_norm.value, c.sup_d_norm.argmax, c.sup_d_norm.tail, c.sup_d_norm.e_max);
        let _ = writeln!(s, "R_a             {:.6e}", c.r_a);
        let _ = writeln!(s, "R_b             {:.6e}", c.r_b);
        let _ = writeln!(s, "lambda_a^2      {:.6e}", c.lambda_a * c.lambda_a);
        let _ = writeln!(s, "lambda_b^2      {:.6e}", c.lambda_b * c.lambda_b);
        let _ = writeln!(s, "{:>4} {:>13} {:>13} {:>13} {:>13} {:>13} {:>13}", "n", "omega_n", "lambda_n^2", "alpha_n", "beta_n", "gamma_n", "lbar_n^2");
        for l in &c.levels {
            let _ = writeln!(
                s,
                "{:>4} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e}",
                l.index + 1,
                l.omega,
                l.lambda_n * l.lambda_n,
                l.alpha,
                l.beta,
                l.gamma,
                l.lambda_bar * l.lambda_bar
            );
        }
        let _ = writeln!(s, "bound^2         {:.6e} ({})", c.bound * c.bound, c.binding);
        let _ = writeln!(s, "bound^2 w/o b   {:.6e}", c.bound_without_b * c.bound_without_b);
        let v = match self.verdict {
            Verdict::Certified => "certified: no eigenvalue inside the continuum",
            Verdict::NotCertified => "not certified",
            Verdict::Inapplicable => "inapplicable",
        };
        let _ = writeln!(s, "verdict         {v}");
        s
    }
}
