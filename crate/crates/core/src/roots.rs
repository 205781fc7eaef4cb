//! Bracketed root finding for monotone scalar functions.

use crate::error::{Result, WqedError};

pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Finds a root of `f` on `[lo, hi]` given `f(lo) < 0 < f(hi)` (or the
/// reverse). Secant steps through the bracket are accepted only while they
/// halve the bracket at least every second step; otherwise the step bisects.
///
/// Stops when `|f(x)| <= tol(x)` or the bracket collapses to adjacent floats.
pub fn bracketed_root<F, T>(f: F, mut lo: f64, mut hi: f64, tol: T) -> Result<Root>
where
    F: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    if !(lo < hi) {
        return Err(WqedError::NumericalFailure(format!(
            "empty bracket [{lo}, {hi}]"
        )));
    }
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root { x: lo, fx: 0.0, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, fx: 0.0, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(WqedError::NumericalFailure(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"
        )));
    }

    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    let mut width_two_steps_ago = f64::INFINITY;
    let mut width_prev = hi - lo;

    for it in 1..=MAX_ITERATIONS {
        let width = hi - lo;
        let mid = lo + 0.5 * width;
        let force_bisect = width > 0.5 * width_two_steps_ago;
        let x = if force_bisect {
            mid
        } else {
            let s = hi - f_hi * (hi - lo) / (f_hi - f_lo);
            if s > lo && s < hi && s.is_finite() {
                s
            } else {
                mid
            }
        };
        if x <= lo || x >= hi {
            // bracket is down to adjacent floats
            return Ok(Root { x: best.0, fx: best.1, iterations: it });
        }
        let fx = f(x);
        if fx.is_nan() {
            return Err(WqedError::NumericalFailure(format!("f({x}) is NaN")));
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 || fx.abs() <= tol(x) {
            return Ok(Root { x, fx, iterations: it });
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        width_two_steps_ago = width_prev;
        width_prev = width;
    }
    Err(WqedError::NumericalFailure(format!(
        "root finder did not converge in {MAX_ITERATIONS} iterations (best |f| = {})",
        best.1.abs()
    )))
}
