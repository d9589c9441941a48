//! Brute-force check: replace the continuum by quadrature nodes and look at
//! the spectrum of the resulting finite Hermitian matrix.
//!
//! The discretized matrix has arrowhead form
//!
//! ```text
//!     ⎡ diag(ω_n)   B         ⎤      B_{nj} = λ v_n*(ω_j) √w_j
//!     ⎣ B†          diag(ω_j) ⎦
//! ```
//!
//! For `E` below every node, the number of eigenvalues below `E` equals the
//! number of negative eigenvalues of the Schur complement
//! `diag(ω_n) − E − B (diag(ω_j) − E)⁻¹ B†` (Haynsworth inertia). Negative
//! eigenvalues are found by bisection on that count, which is exact and
//! scales linearly in the number of nodes. A dense eigensolve is available
//! for small grids as a cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FriedrichsModel;
use crate::par;
use crate::quad::NumericalSettings;
use crate::solver;
use crate::spectral::{self, CMatrix};
use num_complex::Complex64;

/// Eigenvalues below `−GAP_TOL` count as negative.
pub const GAP_TOL: f64 = 1e-8;
/// Largest grid for which the dense eigensolve is offered.
pub const DENSE_LIMIT: usize = 500;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on
/// `P_q` from the Chebyshev initial guesses.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=q {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if q == 0 { 1.0 } else { p1 };
            let pm = if q == 1 { 1.0 } else { p0 };
            dp = q as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[q - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[q - 1 - i] = wi;
    }
    (x, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRule {
    /// Composite Gauss–Legendre in `s = √ω` on `[0, ω_max]`, graded towards
    /// 0 and broken at each positive level, then in `t` for the tail
    /// `ω = ω_max + Λ t/(1 − t)`.
    GaussLegendreMapped { panel_order: usize },
}

impl Default for NodeRule {
    fn default() -> Self {
        NodeRule::GaussLegendreMapped { panel_order: 10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Requested node count; the rule rounds up to whole panels.
    pub m: usize,
    pub omega_max: f64,
    pub rule: NodeRule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedHamiltonian {
    pub levels: Vec<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `N × M` block `B`.
    pub coupling: CMatrix,
    pub grid: Option<GridSpec>,
}

/// Panel breakpoints in `s = √ω` on `[0, √ω_max]`.
fn near_panels(model: &FriedrichsModel, s_max: f64, count: usize) -> Vec<f64> {
    let mut b = vec![0.0, s_max];
    let grading = 14.min(count / 3);
    for k in 1..=grading {
        b.push(s_max * 0.5f64.powi(k as i32));
    }
    for &w in model.levels() {
        if w > 0.0 && w.sqrt() < s_max {
            b.push(w.sqrt());
        }
    }
    b.sort_by(f64::total_cmp);
    b.dedup();
    while b.len() - 1 < count {
        let (i, _) = b
            .windows(2)
            .map(|w| w[1] - w[0])
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let mid = 0.5 * (b[i] + b[i + 1]);
        b.insert(i + 1, mid);
    }
    b
}

/// Nodes and weights for `∫₀^∞ g(ω) dω`.
pub fn nodes_and_weights(model: &FriedrichsModel, spec: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let NodeRule::GaussLegendreMapped { panel_order } = spec.rule;
    if spec.m < 10 || panel_order == 0 {
        return Err(Error::InvalidSettings(format!("grid needs at least 10 nodes, got {}", spec.m)));
    }
    if !(spec.omega_max > 0.0) {
        return Err(Error::InvalidSettings("omega_max must be positive".into()));
    }
    let panels = spec.m.div_ceil(panel_order);
    let tail_panels = (panels / 10).max(1);
    let near = panels - tail_panels;
    let (gx, gw) = gauss_legendre(panel_order);
    let mut nodes = Vec::with_capacity(panels * panel_order);
    let mut weights = Vec::with_capacity(panels * panel_order);
    let s_max = spec.omega_max.sqrt();
    let bp = near_panels(model, s_max, near.max(1));
    for w in bp.windows(2) {
        let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (x, wt) in gx.iter().zip(&gw) {
            let s = c + h * x;
            nodes.push(s * s);
            weights.push(wt * h * 2.0 * s);
        }
    }
    let scale = model.max_cutoff();
    for k in 0..tail_panels {
        let (a, b) = (k as f64 / tail_panels as f64, (k + 1) as f64 / tail_panels as f64);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, wt) in gx.iter().zip(&gw) {
            let t = c + h * x;
            nodes.push(spec.omega_max + scale * t / (1.0 - t));
            weights.push(wt * h * scale / ((1.0 - t) * (1.0 - t)));
        }
    }
    Ok((nodes, weights))
}

/// Default grid: `ω_max` at the model's tail split.
pub fn default_grid(model: &FriedrichsModel, m: usize) -> GridSpec {
    GridSpec {
        m,
        omega_max: model.tail_split(),
        rule: NodeRule::default(),
    }
}

pub fn discretize(model: &FriedrichsModel, spec: &GridSpec) -> Result<DiscretizedHamiltonian> {
    let (nodes, weights) = nodes_and_weights(model, spec)?;
    let lambda = model.lambda();
    let coupling = CMatrix::from_fn(model.n_levels(), nodes.len(), |n, j| {
        model.form_factors()[n].value(nodes[j]).conj() * (lambda * weights[j].sqrt())
    });
    Ok(DiscretizedHamiltonian {
        levels: model.levels().to_vec(),
        nodes,
        weights,
        coupling,
        grid: Some(*spec),
    })
}

impl DiscretizedHamiltonian {
    /// A hand-built instance; `coupling` is the `N × M` block.
    pub fn from_parts(levels: Vec<f64>, nodes: Vec<f64>, weights: Vec<f64>, coupling: CMatrix) -> Result<Self> {
        if coupling.nrows() != levels.len() || coupling.ncols() != nodes.len() || weights.len() != nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: levels.len() * nodes.len(),
                found: coupling.nrows() * coupling.ncols(),
            });
        }
        Ok(DiscretizedHamiltonian {
            levels,
            nodes,
            weights,
            coupling,
            grid: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.levels.len() + self.nodes.len()
    }

    pub fn dense_matrix(&self) -> CMatrix {
        let (n, m) = (self.levels.len(), self.nodes.len());
        let mut h = CMatrix::zeros(n + m, n + m);
        for (i, w) in self.levels.iter().enumerate() {
            h[(i, i)] = Complex64::new(*w, 0.0);
        }
        for (j, w) in self.nodes.iter().enumerate() {
            h[(n + j, n + j)] = Complex64::new(*w, 0.0);
        }
        for i in 0..n {
            for j in 0..m {
                h[(i, n + j)] = self.coupling[(i, j)];
                h[(n + j, i)] = self.coupling[(i, j)].conj();
            }
        }
        h
    }

    /// All eigenvalues by dense diagonalization (small grids only).
    pub fn dense_eigenvalues(&self) -> Result<Vec<f64>> {
        if self.nodes.len() > DENSE_LIMIT {
            return Err(Error::InvalidSettings(format!(
                "dense eigensolve is limited to {DENSE_LIMIT} nodes, got {}",
                self.nodes.len()
            )));
        }
        Ok(spectral::eigh(&self.dense_matrix())?.values)
    }

    fn min_node(&self) -> f64 {
        self.nodes.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `diag(ω_n) − E − B (diag(ω_j) − E)⁻¹ B†`, for `E` below every node.
    pub fn schur_complement(&self, e: f64) -> CMatrix {
        let n = self.levels.len();
        let mut k = CMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, w) in self.nodes.iter().enumerate() {
                    acc += self.coupling[(a, j)] * self.coupling[(b, j)].conj() / (w - e);
                }
                k[(a, b)] = -acc;
                if a != b {
                    k[(b, a)] = -acc.conj();
                } else {
                    k[(a, a)] = Complex64::new(self.levels[a] - e - acc.re, 0.0);
                }
            }
        }
        k
    }

    /// Number of eigenvalues strictly below `e`.
    pub fn count_below(&self, e: f64) -> Result<usize> {
        if !(e < self.min_node()) {
            return Err(Error::Domain(format!("inertia counting needs E below every node, got {e}")));
        }
        let ev = spectral::eigh(&self.schur_complement(e))?.values;
        Ok(ev.iter().filter(|&&x| x < 0.0).count())
    }

    /// Eigenvalues below `top` (which must lie under every node), ascending.
    pub fn eigenvalues_below(&self, top: f64) -> Result<Vec<f64>> {
        let total = self.count_below(top)?;
        let radius: f64 = self.coupling.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
        let floor = self.levels.iter().copied().fold(top, f64::min) - radius * (self.levels.len() as f64).sqrt() - 1.0;
        (0..total)
            .map(|k| {
                let (mut lo, mut hi) = (floor, top);
                while hi - lo > 1e-15 * hi.abs().max(lo.abs()).max(1e-300) {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.count_below(mid)? > k {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            })
            .collect()
    }

    /// Normalized eigenvector at eigenvalue `e`, split into the level block
    /// and the continuum block.
    pub fn eigenvector(&self, e: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let dec = spectral::eigh(&self.schur_complement(e))?;
        let (i, _) = dec
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        let c: Vec<Complex64> = dec.vectors.column(i).iter().copied().collect();
        let x: Vec<Complex64> = (0..self.nodes.len())
            .map(|j| {
                let bc: Complex64 = (0..c.len()).map(|a| self.coupling[(a, j)].conj() * c[a]).sum();
                -bc / (self.nodes[j] - e)
            })
            .collect();
        let norm = (c.iter().chain(&x).map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        Ok((c.iter().map(|z| z / norm).collect(), x.iter().map(|z| z / norm).collect()))
    }
}

/// `|⟨a, b⟩|² / (‖a‖² ‖b‖²)`.
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    ip.norm_sqr() / (na * nb)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub count: usize,
    pub energies: Vec<f64>,
    /// `|E_disc − E_solver|` per root, when the counts agree.
    pub abs_errors: Vec<f64>,
    pub rel_errors: Vec<f64>,
    /// Alignment of the level block with the solver's `c`, per root.
    pub fidelity: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub solver_count: usize,
    pub solver_energies: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
    /// Final count matches and the energies settle as `M` grows.
    pub converged: bool,
}

/// Runs the discretized-Hamiltonian oracle on each grid size and compares
/// with the solver. Grid sizes run concurrently.
pub fn compare_negative_spectrum(model: &FriedrichsModel, schedule: &[usize], settings: &NumericalSettings) -> Result<ConvergenceTable> {
    let report = solver::solve(model, settings)?;
    let energies = report.energies();
    let mut sizes = schedule.to_vec();
    sizes.sort_unstable();
    let rows = par::try_map(settings.execution, &sizes, |&m| -> Result<ConvergenceRow> {
        let h = discretize(model, &default_grid(model, m))?;
        let disc = h.eigenvalues_below(-GAP_TOL)?;
        let matched = disc.len() == energies.len();
        let (mut abs_errors, mut rel_errors, mut fid) = (vec![], vec![], vec![]);
        if matched {
            for (k, (&d, &s)) in disc.iter().zip(&energies).enumerate() {
                abs_errors.push((d - s).abs());
                rel_errors.push((d - s).abs() / s.abs());
                let (c, _) = h.eigenvector(d)?;
                fid.push(fidelity(&c, &report.states[k].c));
            }
        }
        Ok(ConvergenceRow {
            m,
            count: disc.len(),
            energies: disc,
            abs_errors,
            rel_errors,
            fidelity: fid,
        })
    })?;
    let converged = cauchy(&rows, report.count);
    Ok(ConvergenceTable {
        solver_count: report.count,
        solver_energies: energies,
        rows,
        converged,
    })
}

/// The last row must have the solver's count, and the change between the
/// last two grids must not exceed the change before it (or be negligible).
fn cauchy(rows: &[ConvergenceRow], count: usize) -> bool {
    let Some(last) = rows.last() else { return false };
    if last.count != count {
        return false;
    }
    if rows.len() < 3 {
        return true;
    }
    let tail = &rows[rows.len() - 3..];
    if tail.iter().any(|r| r.count != count) {
        return false;
    }
    (0..count).all(|k| {
        let d1 = (tail[1].energies[k] - tail[0].energies[k]).abs();
        let d2 = (tail[2].energies[k] - tail[1].energies[k]).abs();
        d2 <= d1 || d2 <= 1e-10 * tail[2].energies[k].abs()
    })
}
