use super::adaptive::integrate_semiinf_split;
use super::{Estimate, PvSettings, QuadValue, QuadratureSettings};
use crate::error::{Error, Result};

/// Smooth compactly supported bump with `φ(0) = 1` and support `(−δ, δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    delta: f64,
}

impl Bump {
    pub fn new(delta: f64) -> Self {
        assert!(delta > 0.0, "bump half-width must be positive");
        Bump { delta }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x / self.delta;
        let r = 1.0 - t * t;
        if r <= 0.0 {
            0.0
        } else {
            (1.0 - 1.0 / r).exp()
        }
    }
}

/// `P∫₀^∞ η(ω)/(ω − E) dω` for `E > 0`.
///
/// The bump subtraction removes the pole; the odd bump term integrates to zero
/// in the principal-value sense. `eta_e` and `deta_e` are `η(E)` and `η′(E)`,
/// used for the removable point.
pub fn principal_value<T, F>(
    eta: F,
    eta_e: T,
    deta_e: T,
    e: f64,
    split: f64,
    quad: &QuadratureSettings,
    pv: &PvSettings,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::Domain(format!("principal value needs E > 0, got {e}")));
    }
    let delta = pv.delta(e);
    let bump = Bump::new(delta);
    let window = 1e-8 * e.max(1.0);
    let split = split.max(2.0 * (e + delta));
    let g = |w: f64| -> T {
        let x = w - e;
        if x.abs() < window {
            deta_e
        } else {
            (eta(w) - eta_e * bump.eval(x)) * (1.0 / x)
        }
    };
    integrate_semiinf_split(g, split, &[e - delta, e, e + delta], quad)
}
