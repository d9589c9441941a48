use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Estimate, QuadValue, QuadratureSettings};
use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    resabs: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Result<Panel<T>> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = T::zero();
    let mut resk = fc * WGK[10];
    let mut resabs = WGK[10] * fc.norm();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        resk = resk + sum * WGK[j];
        resabs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            resg = resg + sum * WG[j / 2];
        }
    }
    if !resk.is_finite() {
        return Err(Error::Domain(format!("integrand is not finite on [{a:e}, {b:e}]")));
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let dh = half.abs();
    let value = resk * half;
    resabs *= dh;
    resasc *= dh;
    let mut error = ((resk - resg) * half).norm();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        resabs,
    })
}

/// Adaptive integration over `[breaks[0], breaks.last()]`, starting from the
/// panels delimited by `breaks` (ascending, finite).
pub fn integrate<T, F>(f: F, breaks: &[f64], settings: &QuadratureSettings) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    settings.validate()?;
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] >= w[0])) || breaks.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("invalid integration breakpoints {breaks:?}")));
    }
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel<T>> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk21(&f, w[0], w[1])?);
        }
    }
    let mut evaluations = 21 * heap.len();
    let mut n_panels = heap.len();
    let totals = |heap: &BinaryHeap<Panel<T>>, frozen: &[Panel<T>]| {
        let mut v = T::zero();
        let mut e = 0.0;
        let mut r = 0.0;
        for p in heap.iter().chain(frozen.iter()) {
            v = v + p.value;
            e += p.error;
            r += p.resabs;
        }
        (v, e, r)
    };
    loop {
        let (value, error, resabs) = totals(&heap, &frozen);
        let tol = settings
            .abs_tol
            .max(settings.rel_tol * value.norm())
            .max(50.0 * f64::EPSILON * resabs);
        if error <= tol {
            return Ok(Estimate {
                value,
                error,
                evaluations,
                subdivisions: n_panels,
            });
        }
        if n_panels >= settings.max_subdivisions || heap.is_empty() {
            return Err(Error::QuadratureNonconvergence {
                subdivisions: n_panels,
                estimate: value.norm(),
                error,
                tolerance: tol,
            });
        }
        // Bisect the worst panels until the error budget would be met or a
        // batch is done; recomputing totals per split is wasteful.
        let mut budget = error - tol;
        let mut splits = 0;
        while budget > 0.0 && splits < 64 && n_panels < settings.max_subdivisions {
            let Some(p) = heap.pop() else { break };
            let mid = 0.5 * (p.a + p.b);
            if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 1e-15 * p.a.abs().max(p.b.abs()) {
                frozen.push(p);
                continue;
            }
            let left = gk21(&f, p.a, mid)?;
            let right = gk21(&f, mid, p.b)?;
            evaluations += 42;
            n_panels += 1;
            splits += 1;
            budget -= p.error - left.error - right.error;
            heap.push(left);
            heap.push(right);
        }
    }
}

/// `∫₀^∞ f(ω) dω` with the default split `10 Λ_ref`.
pub fn integrate_semiinf<T, F>(f: F, settings: &QuadratureSettings) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_semiinf_split(f, 10.0 * settings.tail_scale, &[], settings)
}

/// `∫₀^∞ f(ω) dω`: identity panels on `[0, split]` (with extra interior
/// breakpoints) and the algebraic tail map beyond `split`.
pub fn integrate_semiinf_split<T, F>(f: F, split: f64, interior: &[f64], settings: &QuadratureSettings) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(split > 0.0 && split.is_finite()) {
        return Err(Error::Domain(format!("tail split must be positive, got {split}")));
    }
    let scale = settings.tail_scale;
    let mapped = |s: f64| -> T {
        if s <= split {
            return f(s);
        }
        let t = s - split;
        if t >= 1.0 {
            return T::zero();
        }
        let one_minus = 1.0 - t;
        let w = split + scale * t / one_minus;
        if !w.is_finite() {
            return T::zero();
        }
        let v = f(w);
        if v.norm() == 0.0 {
            return T::zero();
        }
        v * (scale / (one_minus * one_minus))
    };
    let mut breaks = Vec::with_capacity(interior.len() + 3);
    breaks.push(0.0);
    let mut inner: Vec<f64> = interior.iter().copied().filter(|&x| x > 0.0 && x < split).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    breaks.extend(inner);
    breaks.push(split);
    breaks.push(split + 1.0);
    integrate(mapped, &breaks, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn s() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn exponential() {
        let r = integrate_semiinf(|w: f64| (-w).exp(), &s()).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
        assert!(r.error <= 1e-10);
    }

    #[test]
    fn zero_integrand() {
        let r = integrate_semiinf(|_| 0.0, &s()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn hydrogen_like_rational() {
        let r = integrate_semiinf(|w: f64| w / (1.0 + w * w).powi(4), &s()).unwrap();
        assert_relative_eq!(r.value, 1.0 / 6.0, max_relative = 1e-12);
    }

    #[test]
    fn inverse_sqrt_endpoint() {
        // ∫₀^∞ e^{-ω}/√ω = √π
        let r = integrate_semiinf(|w: f64| (-w).exp() / w.sqrt(), &s()).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn complex_values() {
        let r = integrate(|x: f64| Complex64::new(x.cos(), x.sin()), &[0.0, 1.0], &s()).unwrap();
        assert_relative_eq!(r.value.re, 1f64.sin(), max_relative = 1e-13);
        assert_relative_eq!(r.value.im, 1.0 - 1f64.cos(), max_relative = 1e-13);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let tight = QuadratureSettings {
            max_subdivisions: 10,
            ..s()
        };
        let r = integrate(|x: f64| (1.0 / x).sin() / x.sqrt(), &[0.0, 1.0], &tight);
        assert!(matches!(r, Err(Error::QuadratureNonconvergence { .. })));
    }

    #[test]
    fn rejects_bad_settings() {
        let bad = QuadratureSettings { rel_tol: 0.0, ..s() };
        assert!(integrate(|x: f64| x, &[0.0, 1.0], &bad).is_err());
        let bad = QuadratureSettings {
            max_subdivisions: 5,
            ..s()
        };
        assert!(integrate(|x: f64| x, &[0.0, 1.0], &bad).is_err());
    }
}
