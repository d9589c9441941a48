//! Assembly of the level-shift matrices `S(E)`, `T(E, E′)` and `D(E)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::adaptive::integrate_semiinf_split;
use super::pv::principal_value;
use super::{Estimate, NumericalSettings};
use crate::error::{Error, Result};
use crate::model::FriedrichsModel;
use crate::par;
use crate::spectral::{CMatrix, LevelShiftMatrix, ShiftKind};

fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

/// Evaluates the upper triangle (possibly concurrently) and mirrors it.
fn assemble<F>(model: &FriedrichsModel, energy: f64, kind: ShiftKind, settings: &NumericalSettings, entry: F) -> Result<LevelShiftMatrix>
where
    F: Fn(usize, usize) -> Result<Estimate<Complex64>> + Sync + Send,
{
    settings.validate()?;
    let n = model.n_levels();
    let pairs = upper_pairs(n);
    let values = par::try_map(settings.execution, &pairs, |&(i, j)| entry(i, j))?;
    let mut entries = CMatrix::zeros(n, n);
    let mut errors = DMatrix::zeros(n, n);
    for (&(i, j), est) in pairs.iter().zip(values) {
        if i == j {
            entries[(i, i)] = Complex64::new(est.value.re, 0.0);
        } else {
            entries[(i, j)] = est.value;
            entries[(j, i)] = est.value.conj();
            errors[(j, i)] = est.error;
        }
        errors[(i, j)] = est.error;
    }
    Ok(LevelShiftMatrix {
        entries,
        energy,
        kind,
        errors,
    })
}

fn product(model: &FriedrichsModel, i: usize, j: usize) -> impl Fn(f64) -> Complex64 + '_ {
    let fi = &model.form_factors()[i];
    let fj = &model.form_factors()[j];
    move |w| fi.value(w).conj() * fj.value(w)
}

/// Breakpoints inside `[0, split]`: the energy scale of the kernel and the
/// scales of the form factors.
fn interior_breaks(model: &FriedrichsModel, scales: &[f64]) -> Vec<f64> {
    let mut b: Vec<f64> = model.form_factors().iter().map(|f| f.cutoff_scale()).collect();
    b.extend(scales.iter().copied().filter(|s| *s > 0.0));
    b
}

fn check_threshold(model: &FriedrichsModel) -> Result<()> {
    if model.min_p_exponent() <= 0.0 {
        return Err(Error::Domain("the threshold limit needs every p_exponent > 0".into()));
    }
    Ok(())
}

/// `S_{nm}(E) = ∫₀^∞ v_n*(ω) v_m(ω)/(ω − E) dω` for `E < 0`, or `E = 0` when
/// every `p > 0`.
pub fn gram_matrix(model: &FriedrichsModel, e: f64, settings: &NumericalSettings) -> Result<LevelShiftMatrix> {
    if !(e <= 0.0) {
        return Err(Error::Domain(format!("S(E) is defined for E <= 0, got {e}")));
    }
    if e == 0.0 {
        check_threshold(model)?;
    }
    let split = model.tail_split();
    let breaks = interior_breaks(model, &[-e]);
    assemble(model, e, ShiftKind::S, settings, |i, j| {
        let eta = product(model, i, j);
        integrate_semiinf_split(|w| eta(w) * (1.0 / (w - e)), split, &breaks, &settings.quad)
    })
}

/// `T_{nm}(E, E′) = ∫₀^∞ v_n* v_m /((ω − E)(ω − E′)) dω` for `E′ ≤ E < 0`.
pub fn t_matrix(model: &FriedrichsModel, e: f64, e_prime: f64, settings: &NumericalSettings) -> Result<LevelShiftMatrix> {
    if !(e < 0.0 && e_prime <= e) {
        return Err(Error::Domain(format!("T(E, E') needs E' <= E < 0, got E={e}, E'={e_prime}")));
    }
    let split = model.tail_split();
    let breaks = interior_breaks(model, &[-e, -e_prime]);
    assemble(model, e, ShiftKind::T, settings, |i, j| {
        let eta = product(model, i, j);
        integrate_semiinf_split(
            |w| eta(w) * (1.0 / ((w - e) * (w - e_prime))),
            split,
            &breaks,
            &settings.quad,
        )
    })
}

/// Principal-value matrix `D(E)` for `E ≥ 0`; `D(0) = S(0)`.
pub fn pv_matrix(model: &FriedrichsModel, e: f64, settings: &NumericalSettings) -> Result<LevelShiftMatrix> {
    if !(e >= 0.0 && e.is_finite()) {
        return Err(Error::Domain(format!("D(E) is defined for E >= 0, got {e}")));
    }
    check_threshold(model)?;
    if e == 0.0 {
        let mut s = gram_matrix(model, 0.0, settings)?;
        s.kind = ShiftKind::D;
        return Ok(s);
    }
    let split = model.tail_split();
    assemble(model, e, ShiftKind::D, settings, |i, j| {
        let fi = &model.form_factors()[i];
        let fj = &model.form_factors()[j];
        let (vi, vj) = (fi.value(e), fj.value(e));
        let eta_e = vi.conj() * vj;
        let deta_e = fi.derivative(e).conj() * vj + vi.conj() * fj.derivative(e);
        principal_value(product(model, i, j), eta_e, deta_e, e, split, &settings.quad, &settings.pv)
    })
}
