//! Scalar root finding for strictly increasing functions.

use crate::error::{Error, Result};

/// Absolute tolerance on the residual of every scalar root find.
pub const TOL_ROOT: f64 = 1e-12;

/// Cap on bisection steps (and, separately, on bracket doublings).
pub const MAX_BISECTIONS: usize = 200;

/// Solves `f(u) = target` for a strictly increasing, continuous `f`.
///
/// The bracket is seeded from `start` using `lower_slope` (a lower bound on
/// the slope of `f`; pass 0 when none is known) and doubled until it
/// contains the root. Bisection then runs until the bracket collapses to
/// adjacent floats, so the result is as accurate as `f` allows.
pub fn solve_increasing(
    f: impl Fn(f64) -> f64,
    target: f64,
    start: f64,
    lower_slope: f64,
) -> Result<f64> {
    if !target.is_finite() || !start.is_finite() {
        return Err(Error::InvalidInput(format!(
            "cannot invert at target {target} from start {start}"
        )));
    }
    let f0 = f(start) - target;
    if f0 == 0.0 {
        return Ok(start);
    }

    let mut width = if lower_slope > 0.0 {
        (f0.abs() / lower_slope) * (1.0 + 1e-9) + f64::EPSILON * (1.0 + start.abs())
    } else {
        1.0
    };
    let (mut lo, mut hi);
    let mut doublings = 0;
    if f0 < 0.0 {
        lo = start;
        hi = start + width;
        while f(hi) < target {
            lo = hi;
            width *= 2.0;
            hi = start + width;
            doublings += 1;
            if doublings > MAX_BISECTIONS || !hi.is_finite() {
                return Err(bracket_failure(target, start));
            }
        }
    } else {
        hi = start;
        lo = start - width;
        while f(lo) > target {
            hi = lo;
            width *= 2.0;
            lo = start - width;
            doublings += 1;
            if doublings > MAX_BISECTIONS || !lo.is_finite() {
                return Err(bracket_failure(target, start));
            }
        }
    }

    for _ in 0..MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid) - target;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let (rl, rh) = ((f(lo) - target).abs(), (f(hi) - target).abs());
    let (best, residual) = if rl <= rh { (lo, rl) } else { (hi, rh) };
    if residual <= TOL_ROOT {
        Ok(best)
    } else {
        Err(Error::RootFailure(format!(
            "residual {residual:e} above tolerance when solving for {target}"
        )))
    }
}

fn bracket_failure(target: f64, start: f64) -> Error {
    Error::RootFailure(format!(
        "no bracket for target {target} found from {start} within {MAX_BISECTIONS} doublings"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let u = solve_increasing(|u| u + u * u * u, 2.0, 0.0, 1.0).unwrap();
        assert!((u - 1.0).abs() < 1e-14);
    }

    #[test]
    fn no_slope_hint_still_brackets() {
        let u = solve_increasing(|u| u * u.abs(), -50.0, 0.0, 0.0).unwrap();
        assert!((u + 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bounded_function_fails() {
        let e = solve_increasing(f64::atan, 10.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(e, Error::RootFailure(_)));
    }
}
