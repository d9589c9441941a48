//! Negative eigenenergies from `κ_n(E) = E`, dressed bound states, and the
//! scan for embedded candidates above threshold.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, FriedrichsModel};
use crate::par;
use crate::quad::{self, NumericalSettings};
use crate::spectral::{self, EigenCurvePoint};

/// `κ_n(0⁻)` closer to zero than this is reported as indeterminate.
pub const ZERO_TOL: f64 = 1e-12;
/// Bisection stops once the bracket is this narrow.
pub const ROOT_TOL: f64 = 1e-12;
/// Relative singular-value cutoff for the numerical rank of `S(E)`.
pub const RANK_TOL: f64 = 1e-10;
/// Zero-defect threshold below which a positive crossing is flagged.
pub const ZERO_DEFECT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativeCount {
    pub count: usize,
    pub kappa_at_zero: Vec<f64>,
    /// Branches with `|κ_n(0)| ≤ ZERO_TOL`.
    pub indeterminate: Vec<usize>,
}

/// Number of bound states below the continuum: the branches with `κ_n(0) < 0`.
pub fn count_negative(model: &FriedrichsModel, settings: &NumericalSettings) -> Result<NegativeCount> {
    let p = spectral::kappa_at(model, 0.0, settings)?;
    let count = p.kappa.iter().filter(|&&k| k < -ZERO_TOL).count();
    let indeterminate = (0..p.kappa.len()).filter(|&n| p.kappa[n].abs() <= ZERO_TOL).collect();
    Ok(NegativeCount {
        count,
        kappa_at_zero: p.kappa,
        indeterminate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub branch: usize,
    pub energy: f64,
    /// Initial bracket `[E_lo, 0]` after expansion.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `κ_n(E) − E` at the returned energy.
    pub residual: f64,
}

fn kappa_n(model: &FriedrichsModel, n: usize, e: f64, settings: &NumericalSettings) -> Result<f64> {
    Ok(spectral::kappa_at(model, e, settings)?.kappa[n])
}

/// The unique `E_n < 0` with `κ_n(E_n) = E_n`, by bisection.
pub fn find_root(model: &FriedrichsModel, n: usize, settings: &NumericalSettings) -> Result<Root> {
    model.check_index(n)?;
    let g = |e: f64| kappa_n(model, n, e, settings).map(|k| k - e);
    let g0 = g(0.0)?;
    if !(g0 < 0.0) {
        return Err(Error::BracketNotFound {
            branch: n,
            reason: format!("κ(0) = {g0:e} is not negative"),
        });
    }
    let l2 = model.lambda() * model.lambda();
    let trace = model::total_l2_norm_sq(model, &settings.quad)?;
    // κ_n(E) ≥ ω_1 − λ² Σ‖v‖²/|E|, so this start is already at or left of the root.
    let mut lo = model.levels()[0].min(0.0) - (l2 * trace).sqrt();
    let mut g_lo = if lo < 0.0 { g(lo)? } else { f64::NAN };
    let mut expansions = 0;
    while !(g_lo > 0.0) {
        if g_lo == 0.0 {
            return Ok(Root {
                branch: n,
                energy: lo,
                bracket: (lo, 0.0),
                iterations: 0,
                residual: 0.0,
            });
        }
        expansions += 1;
        if expansions > 200 {
            return Err(Error::BracketNotFound {
                branch: n,
                reason: format!("g(E) stayed nonpositive down to E = {lo:e}"),
            });
        }
        lo = if lo < 0.0 { 2.0 * lo } else { -1e-3 };
        g_lo = g(lo)?;
    }
    let bracket = (lo, 0.0);
    let mut hi = 0.0;
    let mut iterations = 0;
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let gm = g(mid)?;
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let energy = 0.5 * (lo + hi);
    Ok(Root {
        branch: n,
        energy,
        bracket,
        iterations,
        residual: g(energy)?,
    })
}

/// A normalized dressed bound state `(c, f)` with
/// `f(ω) = −λ Σ c_n v_n(ω)/(ω − E)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub branch: usize,
    pub energy: f64,
    pub lambda: f64,
    pub c: Vec<Complex64>,
    pub continuum_norm_sq: f64,
    pub total_norm_sq: f64,
    /// Other branches whose `κ` coincides with this one at `E`; when
    /// nonempty `c` is one vector of a degenerate subspace.
    pub degenerate_with: Vec<usize>,
}

impl BoundState {
    pub fn discrete_norm_sq(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Continuum amplitude `f(ω)`.
    pub fn continuum_amplitude(&self, model: &FriedrichsModel, w: f64) -> Complex64 {
        -self.lambda * coupled_amplitude(model, &self.c, w) / (w - self.energy)
    }
}

fn coupled_amplitude(model: &FriedrichsModel, c: &[Complex64], w: f64) -> Complex64 {
    model.form_factors().iter().zip(c).map(|(f, cn)| cn * f.value(w)).sum()
}

/// Assembles and normalizes the bound state of branch `n` at `E_n`.
pub fn bound_state(model: &FriedrichsModel, n: usize, e: f64, settings: &NumericalSettings) -> Result<BoundState> {
    model.check_index(n)?;
    if !(e < 0.0) {
        return Err(Error::Domain(format!("bound states lie below the continuum, got E = {e}")));
    }
    let p = spectral::kappa_at(model, e, settings)?;
    let scale = p.kappa.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let degenerate_with = (0..p.kappa.len())
        .filter(|&m| m != n && (p.kappa[m] - p.kappa[n]).abs() <= 1e-9 * scale)
        .collect();
    let c0: Vec<Complex64> = p.vector(n).iter().copied().collect();
    let l2 = model.lambda() * model.lambda();
    let cont = quad::integrate_semiinf_split(
        |w| coupled_amplitude(model, &c0, w).norm_sqr() / ((w - e) * (w - e)),
        model.tail_split(),
        &[-e, model.max_cutoff()],
        &settings.quad,
    )?
    .value
        * l2;
    let s = 1.0 / (1.0 + cont).sqrt();
    let c: Vec<Complex64> = c0.iter().map(|z| z * s).collect();
    let continuum_norm_sq = cont / (1.0 + cont);
    let discrete: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    Ok(BoundState {
        branch: n,
        energy: e,
        lambda: model.lambda(),
        c,
        continuum_norm_sq,
        total_norm_sq: discrete + continuum_norm_sq,
        degenerate_with,
    })
}

/// Per-row residual of `ω_n c_n + λ ∫ v_n*(ω) f(ω) dω − E c_n`, with `f`
/// integrated directly rather than through `S(E)`.
pub fn eigen_residual(model: &FriedrichsModel, state: &BoundState, settings: &NumericalSettings) -> Result<Vec<f64>> {
    let e = state.energy;
    (0..model.n_levels())
        .map(|n| {
            let fnn = &model.form_factors()[n];
            let overlap = quad::integrate_semiinf_split(
                |w| fnn.value(w).conj() * state.continuum_amplitude(model, w),
                model.tail_split(),
                &[-e, model.max_cutoff()],
                &settings.quad,
            )?
            .value;
            Ok((state.c[n] * (model.levels()[n] - e) + overlap * model.lambda()).norm())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub lambda: f64,
    pub count: usize,
    pub kappa_at_zero: Vec<f64>,
    pub indeterminate: Vec<usize>,
    pub roots: Vec<Root>,
    pub states: Vec<BoundState>,
}

impl SolveReport {
    pub fn energies(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.energy).collect()
    }
}

/// Counts, locates and assembles every bound state below the continuum.
/// Branches are solved concurrently.
pub fn solve(model: &FriedrichsModel, settings: &NumericalSettings) -> Result<SolveReport> {
    let count = count_negative(model, settings)?;
    let inner = settings.sequential();
    let branches: Vec<usize> = (0..count.count).collect();
    let solved = par::try_map(settings.execution, &branches, |&n| {
        let root = find_root(model, n, &inner)?;
        let state = bound_state(model, n, root.energy, &inner)?;
        Ok::<_, Error>((root, state))
    })?;
    let (roots, states) = solved.into_iter().unzip();
    Ok(SolveReport {
        lambda: model.lambda(),
        count: count.count,
        kappa_at_zero: count.kappa_at_zero,
        indeterminate: count.indeterminate,
        roots,
        states,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub energy: f64,
    /// Ascending eigenvalues of `S(E_ref)`.
    pub sigma: Vec<f64>,
    pub rank_tol: f64,
    /// Numerical rank; at most this many eigencurves can be pushed below
    /// zero by large `|λ|` when the levels are confined.
    pub n_independent: usize,
}

/// Numerical rank of the Gram matrix `S(E_ref)`.
pub fn independence_analysis(model: &FriedrichsModel, e_ref: f64, settings: &NumericalSettings) -> Result<IndependenceReport> {
    if !(e_ref < 0.0) {
        return Err(Error::Domain(format!("reference energy must be negative, got {e_ref}")));
    }
    let sigma = quad::gram_matrix(model, e_ref, settings)?.eigenvalues()?;
    let top = sigma.last().copied().unwrap_or(0.0);
    let n_independent = if top > 0.0 {
        sigma.iter().filter(|&&s| s > RANK_TOL * top).count()
    } else {
        0
    };
    Ok(IndependenceReport {
        energy: e_ref,
        sigma,
        rank_tol: RANK_TOL,
        n_independent,
    })
}

/// A crossing `κ_n(E) = E` above threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositiveCandidate {
    pub branch: usize,
    pub energy: f64,
    /// `|Σ_i c_i v_i(E)|`; an embedded eigenvalue needs it to vanish.
    pub zero_defect: f64,
    /// `zero_defect < ZERO_DEFECT_TOL`. A flag for follow-up, not a proof.
    pub below_tol: bool,
}

fn refine_positive(model: &FriedrichsModel, n: usize, mut lo: f64, mut hi: f64, settings: &NumericalSettings) -> Result<EigenCurvePoint> {
    let g = |e: f64| -> Result<(f64, EigenCurvePoint)> {
        let p = spectral::kappa_at(model, e, settings)?;
        Ok((p.kappa[n] - e, p))
    };
    let mut last = g(0.5 * (lo + hi))?.1;
    while hi - lo > ROOT_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (gm, p) = g(mid)?;
        last = p;
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(last)
}

/// Sign changes of `κ_n(E) − E` on a positive grid, refined by bisection.
/// Nothing here certifies an embedded eigenvalue.
pub fn positive_candidate_scan(model: &FriedrichsModel, grid: &[f64], settings: &NumericalSettings) -> Result<Vec<PositiveCandidate>> {
    if grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Domain("scan grid must be strictly positive".into()));
    }
    let curve = spectral::kappa_curve(model, grid, settings)?;
    let mut brackets = Vec::new();
    for w in curve.windows(2) {
        for n in 0..model.n_levels() {
            let a = w[0].kappa[n] - w[0].energy;
            let b = w[1].kappa[n] - w[1].energy;
            if a > 0.0 && b <= 0.0 {
                brackets.push((n, w[0].energy, w[1].energy));
            }
        }
    }
    let inner = settings.sequential();
    par::try_map(settings.execution, &brackets, |&(n, lo, hi)| {
        let p = refine_positive(model, n, lo, hi, &inner)?;
        let defect = model
            .form_factors()
            .iter()
            .zip(p.vectors.column(n).iter())
            .map(|(f, c)| c * f.value(p.energy))
            .sum::<Complex64>()
            .norm();
        Ok(PositiveCandidate {
            branch: n,
            energy: p.energy,
            zero_defect: defect,
            below_tol: defect < ZERO_DEFECT_TOL,
        })
    })
}
