//! `K(E)`, its sorted eigensystem, and spectral projectors.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FriedrichsModel;
use crate::par;
use crate::quad::{self, NumericalSettings};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftKind {
    S,
    T,
    D,
}

/// `S(E)`, `T(E, E′)` or `D(E)` with per-entry quadrature errors.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelShiftMatrix {
    pub entries: CMatrix,
    pub energy: f64,
    pub kind: ShiftKind,
    pub errors: DMatrix<f64>,
}

impl LevelShiftMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Ascending eigenvalues `σ_1 ≤ … ≤ σ_N`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigh(&self.entries)?.values)
    }

    /// Spectral norm.
    pub fn norm(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev.iter().fold(0.0, |m, x| m.max(x.abs())))
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

/// `S(E)` below threshold, `D(E)` at and above it.
pub fn shift_matrix(model: &FriedrichsModel, e: f64, settings: &NumericalSettings) -> Result<LevelShiftMatrix> {
    if e < 0.0 {
        quad::gram_matrix(model, e, settings)
    } else {
        quad::pv_matrix(model, e, settings)
    }
}

/// `K = diag(ω) − λ² · shift`.
pub fn k_matrix(model: &FriedrichsModel, shift: &LevelShiftMatrix) -> Result<CMatrix> {
    let n = model.n_levels();
    if shift.dim() != n || shift.entries.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: shift.dim(),
        });
    }
    let l2 = model.lambda() * model.lambda();
    let mut k = shift.entries.map(|z| -l2 * z);
    for (i, w) in model.levels().iter().enumerate() {
        k[(i, i)] += Complex64::new(*w, 0.0);
    }
    Ok(k)
}

/// Sorted eigensystem of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Orthonormal columns aligned with `values`.
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition, ascending. Each eigenvector is rotated so
/// its largest component is real and positive, which makes the output
/// deterministic.
pub fn eigh(k: &CMatrix) -> Result<Eigh> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k.ncols(),
        });
    }
    if n == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let h = (k + k.adjoint()).map(|z| z * 0.5);
    let dec = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 10_000).ok_or(Error::EigenNonconvergence(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
    let values = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let v = dec.eigenvectors.column(i);
        let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::new(1.0, 0.0) };
        let norm = v.norm();
        vectors.set_column(col, &(v * (phase / norm)));
    }
    Ok(Eigh { values, vectors })
}

/// Sorted eigenvalues `κ_n(E)` and eigenvectors of `K(E)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenCurvePoint {
    pub energy: f64,
    pub kappa: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenCurvePoint {
    pub fn vector(&self, n: usize) -> DVector<Complex64> {
        self.vectors.column(n).into_owned()
    }

    /// `ω_top − κ_n`, the form in which the eigencurves are usually plotted.
    pub fn shifted(&self, omega_top: f64) -> Vec<f64> {
        self.kappa.iter().map(|k| omega_top - k).collect()
    }
}

/// The eigensystem of `K(E)` at one energy.
pub fn kappa_at(model: &FriedrichsModel, e: f64, settings: &NumericalSettings) -> Result<EigenCurvePoint> {
    let shift = shift_matrix(model, e, settings)?;
    let dec = eigh(&k_matrix(model, &shift)?)?;
    Ok(EigenCurvePoint {
        energy: e,
        kappa: dec.values,
        vectors: dec.vectors,
    })
}

/// Eigencurves over an ascending energy grid (`S` below 0, `D` from 0 on).
/// Grid points run concurrently; the level-shift entries inside each point are
/// then evaluated sequentially.
pub fn kappa_curve(model: &FriedrichsModel, grid: &[f64], settings: &NumericalSettings) -> Result<Vec<EigenCurvePoint>> {
    if grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Domain("energy grid must be ascending".into()));
    }
    let inner = settings.sequential();
    par::try_map(settings.execution, grid, |&e| kappa_at(model, e, &inner))
}

/// Rank-1 projector onto the `n`-th eigenvector.
pub fn projector(point: &EigenCurvePoint, n: usize) -> Result<CMatrix> {
    let dim = point.kappa.len();
    if n >= dim {
        return Err(Error::Domain(format!("eigen-index {n} out of range for dimension {dim}")));
    }
    let scale = point.kappa.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let gap = (0..dim)
        .filter(|&m| m != n)
        .map(|m| (point.kappa[m] - point.kappa[n]).abs())
        .fold(f64::INFINITY, f64::min);
    if gap <= 1e-12 * scale {
        return Err(Error::DegenerateEigenvalue { index: n, gap });
    }
    let v = point.vector(n);
    Ok(&v * v.adjoint())
}

/// Partial sums of the weak-coupling expansion of `P_n(E, λ)`.
#[derive(Clone, Debug)]
pub struct ProjectorSeries {
    /// `P_n^{(j)}` for `j = 0..=J` (without the `λ^{2j}` factor).
    pub terms: Vec<CMatrix>,
    /// `Σ_j λ^{2j} P_n^{(j)}`.
    pub sum: CMatrix,
    /// `λ² ‖D(E)‖ / (gap_n/3)`; the series is only guaranteed to converge
    /// below 1.
    pub ratio: f64,
}

impl ProjectorSeries {
    pub fn converges(&self) -> bool {
        self.ratio < 1.0
    }
}

const CONTOUR_NODES: usize = 256;

/// Expansion of the `n`-th projector in powers of `λ²`, each term by the
/// trapezoid rule on the circle of radius `gap_n/3` around `ω_n`.
pub fn projector_series(model: &FriedrichsModel, e: f64, n: usize, order: usize, settings: &NumericalSettings) -> Result<ProjectorSeries> {
    model.check_index(n)?;
    let levels = model.levels();
    let dim = model.n_levels();
    for m in 0..dim {
        if m != n && levels[m] == levels[n] {
            return Err(Error::DegenerateLevels(n.min(m), n.max(m)));
        }
    }
    let shift = shift_matrix(model, e, settings)?;
    let d = &shift.entries;
    let gap = model.level_gap(n).unwrap_or(1.0);
    let r = gap / 3.0;
    let l2 = model.lambda() * model.lambda();
    let ratio = l2 * shift.norm()? / r;

    let mut terms = vec![CMatrix::zeros(dim, dim); order + 1];
    for k in 0..CONTOUR_NODES {
        let theta = 2.0 * PI * k as f64 / CONTOUR_NODES as f64;
        let rot = Complex64::from_polar(1.0, theta);
        let zeta = levels[n] + r * rot;
        let r0 = DVector::from_iterator(dim, levels.iter().map(|w| Complex64::new(1.0, 0.0) / (w - zeta)));
        let weight = -rot * (r / CONTOUR_NODES as f64);
        // R₀ (D R₀)^j, built by repeated right multiplication.
        let mut acc = CMatrix::from_diagonal(&r0);
        for (j, term) in terms.iter_mut().enumerate() {
            if j > 0 {
                let mut next = &acc * d;
                for (c, mut col) in next.column_iter_mut().enumerate() {
                    col *= r0[c];
                }
                acc = next;
            }
            *term += &acc * weight;
        }
    }
    let mut sum = CMatrix::zeros(dim, dim);
    let mut power = 1.0;
    for t in &terms {
        sum += t * Complex64::new(power, 0.0);
        power *= l2;
    }
    Ok(ProjectorSeries { terms, sum, ratio })
}
