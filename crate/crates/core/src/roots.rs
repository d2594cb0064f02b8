//! Bracketing root finder for functions monotone on a bracket.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops once the bracket is narrower than `xtol` or cannot be split further
/// in floating point. The endpoints may be poles of `f`; only the signs of
/// interior samples are used.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::Precondition(format!("empty bracket [{lo}, {hi}]")));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    let s_lo = f_lo.signum();
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if s_lo == f_hi.signum() {
        return Err(Error::Precondition(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo:e}, {f_hi:e}"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= xtol {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Next representable double above `x`.
pub(crate) fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

pub(crate) fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 4e-16);
    }

    #[test]
    fn pole_at_endpoint() {
        // 1 - 1/x on (0, 2] has its root at 1 and a pole at 0.
        let r = bisect(|x| 1.0 - 1.0 / x, next_up(0.0), 2.0, 0.0).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn no_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ulp_steps() {
        assert!(next_up(1.0) > 1.0);
        assert!(next_down(1.0) < 1.0);
        assert!(next_up(-1.0) > -1.0);
    }
}
