//! One-dimensional adaptive quadrature used by the continuous closure checks.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` on [a, b] with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::InvalidSpec(format!("bad quadrature request on [{a}, {b}] with tol {tol}")));
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergence { iterations: MAX_DEPTH as usize, residual: f64::NAN })
    }
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// ∫_ℝ f using x = s·tan(u), which maps Cauchy-like tails of width s onto a
/// bounded smooth integrand on (−π/2, π/2).
pub fn integrate_real_line(f: impl Fn(f64) -> f64, s: f64, tol: f64) -> Result<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let g = |u: f64| {
        let t = u.tan();
        let x = s * t;
        let v = f(x) * s * (1.0 + t * t);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adaptive_simpson(&g, -half_pi, half_pi, tol)
}
