//! Bracketed bisection for monotone non-decreasing scalar functions.

use core::fmt;

/// Stopping rules and bracket-growth limits for [`bisect_increasing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketing {
    /// Accept `x` as soon as `|f(x)| <= ftol`.
    pub ftol: f64,
    /// Stop once the bracket is narrower than `xtol_abs + xtol_rel * max(|lo|, |hi|)`.
    pub xtol_abs: f64,
    pub xtol_rel: f64,
    /// How many times the bracket may be doubled outward before giving up.
    pub max_expansions: u32,
    pub max_iter: u32,
}

impl Default for Bracketing {
    fn default() -> Self {
        Bracketing { ftol: 0.0, xtol_abs: 0.0, xtol_rel: 4.0 * f64::EPSILON, max_expansions: 64, max_iter: 2_200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootError {
    /// No sign change could be found, even after expanding the bracket.
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// The function returned NaN or an infinity at `x`.
    NotFinite { x: f64 },
}

impl fmt::Display for RootError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootError::NoBracket { lo, hi, f_lo, f_hi } => {
                write!(f, "no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})")
            }
            RootError::NotFinite { x } => write!(f, "function is not finite at {x}"),
        }
    }
}

impl core::error::Error for RootError {}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64, RootError> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(RootError::NotFinite { x })
    }
}

/// Finds `x` with `f(x) = 0` for a non-decreasing `f`, starting from `[lo, hi]`.
///
/// The bracket is widened geometrically on whichever side fails to straddle
/// zero. After a single secant step, bisection runs until one of the
/// [`Bracketing`] stopping rules fires or the midpoint can no longer be
/// distinguished from an endpoint.
/// The returned point is whichever of the final candidates has the smallest
/// `|f|`.
pub fn bisect_increasing<F>(mut f: F, lo: f64, hi: f64, opts: &Bracketing) -> Result<Root, RootError>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = eval(&mut f, lo)?;
    let mut f_hi = eval(&mut f, hi)?;

    let mut expansions = 0;
    let mut width = (hi - lo).max(lo.abs().max(hi.abs()) * f64::EPSILON).max(f64::MIN_POSITIVE);
    while f_lo > 0.0 || f_hi < 0.0 {
        if expansions == opts.max_expansions {
            return Err(RootError::NoBracket { lo, hi, f_lo, f_hi });
        }
        if f_lo > 0.0 {
            hi = lo;
            f_hi = f_lo;
            lo -= width;
            f_lo = eval(&mut f, lo)?;
        } else {
            lo = hi;
            f_lo = f_hi;
            hi += width;
            f_hi = eval(&mut f, hi)?;
        }
        expansions += 1;
        width *= 2.0;
    }

    let mut best = if f_lo.abs() <= f_hi.abs() {
        Root { x: lo, fx: f_lo, iterations: 0 }
    } else {
        Root { x: hi, fx: f_hi, iterations: 0 }
    };
    if best.fx.abs() <= opts.ftol {
        return Ok(best);
    }

    let mut iterations = 0;
    let mut polished = false;
    while iterations < opts.max_iter {
        // One secant step first: exact for linear f, and it shrinks the
        // bracket for smooth f.
        if !polished && f_hi > f_lo {
            polished = true;
            let x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
            if x > lo && x < hi {
                iterations += 1;
                let fx = eval(&mut f, x)?;
                if fx.abs() < best.fx.abs() {
                    best = Root { x, fx, iterations };
                }
                if fx.abs() <= opts.ftol {
                    break;
                }
                if fx < 0.0 {
                    lo = x;
                    f_lo = fx;
                } else {
                    hi = x;
                    f_hi = fx;
                }
                continue;
            }
        }
        if hi - lo <= opts.xtol_abs + opts.xtol_rel * lo.abs().max(hi.abs()) {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let f_mid = eval(&mut f, mid)?;
        if f_mid.abs() < best.fx.abs() {
            best = Root { x: mid, fx: f_mid, iterations };
        }
        if f_mid.abs() <= opts.ftol {
            break;
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    best.iterations = iterations;
    Ok(best)
}
