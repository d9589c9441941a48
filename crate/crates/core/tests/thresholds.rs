mod common;

use common::settings;
use friedrichs::model::{FormFactor, FriedrichsModel, UnitSystem};
use friedrichs::spectral::{self, CMatrix};
use friedrichs::thresholds::{self, Verdict};
use friedrichs::{presets, quad, solver};
use num_complex::Complex64;
use std::f64::consts::PI;

fn op_norm(m: &CMatrix) -> f64 {
    m.singular_values().max()
}

fn hydrogen() -> FriedrichsModel {
    presets::hydrogen_4level().unwrap()
}

fn grid() -> Vec<f64> {
    thresholds::log_grid(1e-5, 20.0, 60)
}

#[test]
fn zero_level_curve_is_pinned_by_d() {
    let s = settings();
    let ff = [(1, 0.0), (2, 2.0), (3, 1.0)]
        .into_iter()
        .map(|(n, a)| FormFactor::rational(n, a, 1.0).unwrap())
        .collect();
    let base = FriedrichsModel::new(vec![0.0, 0.3, 0.6], 0.0, ff, UnitSystem::natural()).unwrap();
    let rb = thresholds::r_b_lambda_b(&base, &s).unwrap();
    assert!(rb.r_b > 0.0, "{rb:?}");
    let m = base.with_lambda(0.9 * rb.lambda_b);
    let l2 = m.lambda().powi(2);
    for e in thresholds::log_grid(1e-4 * rb.r_b, 0.999 * rb.r_b, 40) {
        let d = quad::pv_matrix(&m, e, &s).unwrap().eigenvalues().unwrap();
        let k = spectral::kappa_at(&m, e, &s).unwrap().kappa[0];
        let slack = 1e-12 * (1.0 + l2 * d[2].abs());
        assert!(-l2 * d[2] <= k + slack, "E = {e}");
        assert!(k <= -l2 * d[0] + slack, "E = {e}");
        assert!(-l2 * d[0] <= slack, "E = {e}");
    }
}

#[test]
fn resolvent_ratio_stays_below_lambda_a() {
    let s = settings();
    let m = hydrogen();
    let c = thresholds::verdict(&m, &s).unwrap().constants.unwrap();
    let l2 = m.lambda().powi(2);
    let levels = m.levels();
    let mut worst = 0.0f64;
    for e in grid() {
        let dn = quad::pv_matrix(&m, e, &s).unwrap().norm().unwrap();
        for lc in &c.levels {
            let n = lc.index;
            let r = m.level_gap(n).unwrap() / 3.0;
            for k in 0..256 {
                let z = levels[n] + r * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 256.0);
                let res = levels.iter().map(|w| 1.0 / (w - z).norm()).fold(0.0, f64::max);
                let lhs = l2 * dn * res;
                let rhs = (c.lambda_a / lc.lambda_n).powi(2);
                assert!(lhs < rhs, "E = {e}, level {n}: {lhs} !< {rhs}");
                assert!(rhs <= 1.0 + 1e-12);
                worst = worst.max(lhs / rhs);
            }
        }
    }
    assert!(worst < 1.0);
}

#[test]
fn projector_close_to_unperturbed() {
    let s = settings();
    let m = hydrogen();
    let sup = thresholds::sup_d_norm(&m, &s).unwrap().value;
    for e in grid() {
        let p = spectral::kappa_at(&m, e, &s).unwrap();
        for n in 0..3 {
            let ln = thresholds::lambda_n(&m, n, sup).unwrap();
            let rho = (m.lambda() / ln).powi(2);
            let mut diff = spectral::projector(&p, n).unwrap();
            diff[(n, n)] -= Complex64::new(1.0, 0.0);
            assert!(op_norm(&diff) <= rho / (1.0 - rho), "E = {e}, n = {n}");
        }
    }
}

fn series_gap(m: &FriedrichsModel, e: f64, n: usize) -> f64 {
    let s = settings();
    let series = spectral::projector_series(m, e, n, 3, &s).unwrap();
    let exact = spectral::projector(&spectral::kappa_at(m, e, &s).unwrap(), n).unwrap();
    op_norm(&(series.sum - exact))
}

#[test]
fn third_order_series_tail() {
    let s = settings();
    let h = hydrogen();
    let sup = thresholds::sup_d_norm(&h, &s).unwrap().value;
    let lns: Vec<f64> = (0..3).map(|n| thresholds::lambda_n(&h, n, sup).unwrap()).collect();
    // At the physical coupling the bound sits far below roundoff.
    for e in [1e-4, 1e-2, 0.5] {
        for n in 0..3 {
            let bound = 2.0 * (h.lambda() / lns[n]).powi(8);
            assert!(series_gap(&h, e, n) <= bound + 1e-14, "E = {e}, n = {n}");
        }
    }
    let lmin = lns.iter().copied().fold(f64::INFINITY, f64::min);
    let strong = h.with_lambda(0.3 * lmin);
    for e in [1e-4, 1e-2, 0.5] {
        for n in 0..3 {
            let bound = 2.0 * (strong.lambda() / lns[n]).powi(8);
            let gap = series_gap(&strong, e, n);
            assert!(gap <= bound + 1e-14, "E = {e}, n = {n}: {gap} > {bound}");
        }
    }
}

#[test]
fn pv_meets_gram_at_threshold() {
    let s = settings();
    for m in [hydrogen(), presets::three_level_fig(1.0).unwrap()] {
        let s0 = quad::gram_matrix(&m, 0.0, &s).unwrap();
        let d = quad::pv_matrix(&m, 1e-6, &s).unwrap();
        let gap = op_norm(&(&d.entries - &s0.entries));
        assert!(gap <= 1e-4 * s0.norm().unwrap(), "{gap}");
    }
}

/// Simpson's rule on 10⁶ panels after `ω = (x/(1−x))²`.
fn dense_gram(m: &FriedrichsModel, e: f64) -> CMatrix {
    let n = m.n_levels();
    let panels = 1_000_000;
    let h = 1.0 / panels as f64;
    let mut out = CMatrix::zeros(n, n);
    for k in 0..=panels {
        let x = k as f64 * h;
        if x >= 1.0 {
            continue;
        }
        let u = x / (1.0 - x);
        let w = u * u;
        let jac = 2.0 * u / ((1.0 - x) * (1.0 - x));
        let weight = if k == 0 { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 } * h / 3.0 * jac / (w - e);
        let v: Vec<Complex64> = m.form_factors().iter().map(|f| f.value(w)).collect();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[i].conj() * v[j] * weight;
            }
        }
    }
    out
}

#[test]
fn hydrogen_gram_matches_dense_reference() {
    let m = hydrogen();
    let s = quad::gram_matrix(&m, -1.0, &settings()).unwrap().entries;
    let r = dense_gram(&m, -1.0);
    let gap = op_norm(&(&s - &r));
    assert!(gap <= 1e-8 * op_norm(&r), "{gap}");
}

#[test]
fn hydrogen_curves_stay_near_levels() {
    let s = settings();
    let m = hydrogen();
    let l2 = m.lambda().powi(2);
    let d = quad::pv_matrix(&m, 1.0, &s).unwrap();
    let k = spectral::k_matrix(&m, &d).unwrap();
    let kappa = spectral::eigh(&k).unwrap().values;
    for (n, kv) in kappa.iter().enumerate() {
        assert!((kv - m.levels()[n]).abs() <= l2 * d.norm().unwrap());
    }
}

#[test]
fn hydrogen_positive_scan_has_no_embedded_state() {
    let s = settings();
    let m = hydrogen();
    let mut grid = thresholds::log_grid(1e-5, 10.0, 400);
    for w in m.levels() {
        grid.extend((0..41).map(|k| w * (0.9 + 0.005 * k as f64)));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let hits = solver::positive_candidate_scan(&m, &grid, &s).unwrap();
    assert!(!hits.is_empty());
    assert!(hits.iter().all(|c| !c.below_tol), "{hits:?}");
}

#[test]
fn unperturbed_crossings_sit_on_levels() {
    let s = settings();
    let m = hydrogen().with_lambda(0.0);
    let grid = thresholds::log_grid(1e-4, 1e-1, 300);
    let hits = solver::positive_candidate_scan(&m, &grid, &s).unwrap();
    assert_eq!(hits.len(), 3);
    for c in hits {
        let w = m.levels()[c.branch];
        assert!((c.energy - w).abs() <= 1e-10 * w.max(1.0));
        let v = m.form_factors()[c.branch].value(w).norm();
        assert!((c.zero_defect - v).abs() <= 1e-8 * v);
    }
}

#[test]
fn verdict_follows_computed_bound() {
    let s = settings();
    let h = hydrogen();
    let r = thresholds::verdict(&h, &s).unwrap();
    assert_eq!(r.verdict, Verdict::Certified);
    let bound = r.constants.unwrap().bound;
    assert_eq!(thresholds::verdict(&h.with_lambda(0.0), &s).unwrap().verdict, Verdict::Certified);
    let mid = thresholds::verdict(&h.with_lambda(1e-3), &s).unwrap();
    assert_eq!(mid.verdict == Verdict::Certified, 1e-3 < bound);
    let strong = thresholds::verdict(&h.with_lambda(3.0 * bound), &s).unwrap();
    assert_eq!(strong.verdict, Verdict::NotCertified);
}

#[test]
fn scaling_covariance_on_hydrogen() {
    let s = settings();
    let h = hydrogen();
    let k = 2.0;
    let scaled = h
        .with_form_factors(h.form_factors().iter().map(|f| f.scaled(k).unwrap()).collect())
        .unwrap()
        .with_lambda(h.lambda() / k);
    let a = thresholds::verdict(&h, &s).unwrap();
    let b = thresholds::verdict(&scaled, &s).unwrap();
    assert_eq!(a.verdict, b.verdict);
    let (ca, cb) = (a.constants.unwrap(), b.constants.unwrap());
    assert!((cb.sup_d_norm.value / ca.sup_d_norm.value - k * k).abs() < 1e-6 * k * k);
    assert!((cb.lambda_a * k / ca.lambda_a - 1.0).abs() < 1e-6);
    assert!((cb.bound * k / ca.bound - 1.0).abs() < 1e-3);
}
