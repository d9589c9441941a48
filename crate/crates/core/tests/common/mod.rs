#![allow(dead_code)]

use friedrichs::model::{FormFactor, FriedrichsModel, UnitSystem};
use friedrichs::quad::{self, NumericalSettings};
use friedrichs::spectral::{self, CMatrix};
use friedrichs::thresholds;
use proptest::prelude::*;
use proptest::test_runner::{Config, FileFailurePersistence, RngSeed};

pub const CASES: u32 = 200;

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        failure_persistence: Some(Box::new(FileFailurePersistence::Off)),
        rng_seed: RngSeed::Fixed(0x5eed_f00d),
        ..Config::default()
    }
}

pub fn settings() -> NumericalSettings {
    NumericalSettings::default().sequential()
}

pub fn arb_form_factor() -> impl Strategy<Value = FormFactor> {
    prop_oneof![
        (1u32..=3, 0.0..3.0f64, 0.3..3.0f64).prop_map(|(n, a, c)| FormFactor::rational(n, a, c).unwrap()),
        (1u8..=3, 0.3..3.0f64).prop_map(|(i, c)| FormFactor::hydrogen(i, c).unwrap()),
    ]
}

pub fn arb_model_in(n: std::ops::RangeInclusive<usize>, level_lo: f64, level_hi: f64, lambda_max: f64) -> impl Strategy<Value = FriedrichsModel> {
    n.prop_flat_map(move |n| {
        (
            proptest::collection::vec(level_lo..level_hi, n),
            proptest::collection::vec(arb_form_factor(), n),
            0.0..lambda_max,
        )
    })
    .prop_map(|(mut levels, ff, lambda)| {
        levels.sort_by(f64::total_cmp);
        FriedrichsModel::new(levels, lambda, ff, UnitSystem::natural()).unwrap()
    })
}

pub fn arb_model() -> impl Strategy<Value = FriedrichsModel> {
    arb_model_in(1..=4, -0.5, 0.5, 2.0)
}

/// Distinct positive levels, at least two of them.
pub fn arb_positive_model() -> impl Strategy<Value = FriedrichsModel> {
    (2usize..=4)
        .prop_flat_map(|n| (proptest::collection::vec(0.01..1.0f64, n), proptest::collection::vec(arb_form_factor(), n)))
        .prop_filter("distinct levels", |(l, _)| {
            let mut s = l.clone();
            s.sort_by(f64::total_cmp);
            s.windows(2).all(|w| w[1] - w[0] > 1e-3)
        })
        .prop_map(|(mut levels, ff)| {
            levels.sort_by(f64::total_cmp);
            FriedrichsModel::new(levels, 0.01, ff, UnitSystem::natural()).unwrap()
        })
}

fn min_eig(m: &CMatrix) -> f64 {
    spectral::eigh(m).unwrap().values[0]
}

fn norm(m: &CMatrix) -> f64 {
    spectral::eigh(m).unwrap().values.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

pub type Check = Result<(), TestCaseError>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(TestCaseError::fail(format!($($fmt)*)));
        }
    };
}

/// `S(E) ⪰ 0`, `T(E, E′) ⪰ 0` and `S(E′) ≤ S(E)` for `E′ < E < 0`.
pub fn gram_psd_and_monotone(model: &FriedrichsModel, e: f64, gap: f64) -> Check {
    let s = settings();
    let e2 = e - gap;
    let a = quad::gram_matrix(model, e, &s).unwrap().entries;
    let b = quad::gram_matrix(model, e2, &s).unwrap().entries;
    let t = quad::t_matrix(model, e, e2, &s).unwrap().entries;
    let scale = norm(&a);
    ensure!(min_eig(&a) >= -1e-10 * scale, "S({e}) not PSD: {}", min_eig(&a));
    ensure!(min_eig(&t) >= -1e-10 * norm(&t), "T not PSD");
    let diff = &a - &b;
    ensure!(min_eig(&diff) >= -1e-10 * scale, "S({e}) - S({e2}) has eigenvalue {}", min_eig(&diff));
    let tr = friedrichs::model::total_l2_norm_sq(model, &s.quad).unwrap();
    ensure!(scale <= tr / e.abs() * (1.0 + 1e-9) + 1e-14, "‖S‖ = {scale} exceeds tr/|E| = {}", tr / e.abs());
    Ok(())
}

/// `κ_n` nonincreasing in `E` on a negative grid, `κ_n ≤ ω_n`, and
/// `ω_n − κ_n ≤ λ² tr S(E)`.
pub fn kappa_monotone_and_bounded(model: &FriedrichsModel, grid: &[f64]) -> Check {
    let s = settings();
    let pts = spectral::kappa_curve(model, grid, &s).unwrap();
    let l2 = model.lambda().powi(2);
    for w in pts.windows(2) {
        for n in 0..model.n_levels() {
            ensure!(
                w[0].kappa[n] >= w[1].kappa[n] - 1e-9,
                "κ_{n} increases from E={} to E={}",
                w[0].energy,
                w[1].energy
            );
        }
    }
    for p in &pts {
        let tr = quad::gram_matrix(model, p.energy, &s).unwrap().entries.trace().re;
        for (n, k) in p.kappa.iter().enumerate() {
            let w = model.levels()[n];
            ensure!(*k <= w + 1e-10, "κ_{n}({}) = {k} > ω_n = {w}", p.energy);
            ensure!(w - k <= l2 * tr * (1.0 + 1e-9) + 1e-12, "ω_n − κ_n exceeds λ² tr S");
        }
    }
    Ok(())
}

/// Both Weyl-type sandwiches at one `E < 0`.
pub fn weyl_sandwiches(model: &FriedrichsModel, e: f64) -> Check {
    let s = settings();
    let sigma = quad::gram_matrix(model, e, &s).unwrap().eigenvalues().unwrap();
    let kappa = spectral::kappa_at(model, e, &s).unwrap().kappa;
    let l2 = model.lambda().powi(2);
    let n_lv = model.n_levels();
    let w = model.levels();
    let slack = 1e-12 * (1.0 + l2 * sigma[n_lv - 1] + w.iter().fold(0.0f64, |a, x| a.max(x.abs())));
    for n in 0..n_lv {
        ensure!(w[n] - l2 * sigma[n_lv - 1] <= kappa[n] + slack, "lower Weyl bound fails at n={n}");
        ensure!(kappa[n] <= w[n] - l2 * sigma[0] + slack, "upper Weyl bound fails at n={n}");
        ensure!(w[0] - l2 * sigma[n_lv - 1 - n] <= kappa[n] + slack, "alternative sandwich fails at n={n}");
    }
    Ok(())
}

/// `|κ_n(E) − ω_n| ≤ λ² ‖D(E)‖` for `E > 0`.
pub fn d_perturbation_bound(model: &FriedrichsModel, e: f64) -> Check {
    let s = settings();
    let d = quad::pv_matrix(model, e, &s).unwrap();
    let dn = d.norm().unwrap();
    let kappa = spectral::kappa_at(model, e, &s).unwrap().kappa;
    let l2 = model.lambda().powi(2);
    for (n, k) in kappa.iter().enumerate() {
        let dev = (k - model.levels()[n]).abs();
        ensure!(dev <= l2 * dn * (1.0 + 1e-12) + 1e-14, "|κ_{n} − ω_{n}| = {dev} > λ²‖D‖ = {}", l2 * dn);
    }
    Ok(())
}

/// `λ̄_n < λ_n` for every positive level, with constants from the model.
pub fn lambda_bar_below_lambda_n(model: &FriedrichsModel, sup: f64) -> Check {
    let ra = thresholds::r_a(model).unwrap();
    for n in 0..model.n_levels() {
        let (a, b, g) = thresholds::alpha_beta_gamma(model, n, ra).unwrap();
        if a <= thresholds::ALPHA_TOL {
            continue;
        }
        let ln = thresholds::lambda_n(model, n, sup).unwrap();
        let lb = thresholds::lambda_bar_from_constants(ln, a, b, g).unwrap();
        ensure!(lb < ln, "λ̄ = {lb} !< λ_n = {ln} (α={a}, β={b}, γ={g})");
        ensure!(g >= a, "γ = {g} < α = {a}");
    }
    Ok(())
}

/// `‖D(ε) − S(0)‖` shrinks along ε = 1e-2, 1e-4, 1e-6.
pub fn pv_threshold_continuity(model: &FriedrichsModel) -> Check {
    let s = settings();
    let s0 = quad::gram_matrix(model, 0.0, &s).unwrap().entries;
    let mut last = f64::INFINITY;
    for eps in [1e-2, 1e-4, 1e-6] {
        let d = quad::pv_matrix(model, eps, &s).unwrap().entries;
        let gap = norm(&(&d - &s0));
        ensure!(gap < last, "‖D({eps}) − S(0)‖ = {gap} did not decrease (previous {last})");
        last = gap;
    }
    Ok(())
}
