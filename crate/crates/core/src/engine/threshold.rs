use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};
use crate::scalar::Real;

use super::optimize::{optimize_rate, GridSpec, RateProblem};

/// Signal count where the search starts.
pub const START_SIGNALS: f64 = 1e3;
/// No positive rate above this signal count is an error.
pub const MAX_SIGNALS: f64 = 1e16;
/// Relative width of the final bracket.
pub const RELATIVE_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold<T> {
    /// Smallest bracketed `N` with a positive optimized rate.
    pub n0: T,
    /// `N₀·log₂d`.
    pub n0_scaled: T,
    pub optimizations: usize,
}

/// Smallest total signal number with a positive optimized key rate.
///
/// `problem.n_total` is ignored. The bracket grows by factors of two from
/// 10³ (or shrinks, if 10³ is already positive) and is then bisected in
/// `log N`.
pub fn find_threshold_n0<T: Real>(
    problem: &RateProblem<T>,
    grid: &GridSpec,
) -> Result<Threshold<T>> {
    let mut calls = 0usize;
    let mut positive = |n: f64| -> Result<bool> {
        calls += 1;
        let p = RateProblem {
            n_total: T::lit(n),
            ..*problem
        };
        match optimize_rate(&p, grid) {
            Ok(o) => Ok(o.best.rate > T::zero()),
            // too few signals for a single estimation round
            Err(QkdError::Constraint(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };

    let (mut lo, mut hi);
    if positive(START_SIGNALS)? {
        hi = START_SIGNALS;
        lo = hi / 2.0;
        while positive(lo)? {
            hi = lo;
            lo /= 2.0;
            if lo < 1.0 {
                return Err(QkdError::Constraint(
                    "positive rate below one signal".into(),
                ));
            }
        }
    } else {
        lo = START_SIGNALS;
        hi = lo * 2.0;
        while !positive(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > MAX_SIGNALS {
                return Err(QkdError::NoPositiveRate { limit: MAX_SIGNALS });
            }
        }
    }
    while hi / lo - 1.0 > RELATIVE_WIDTH {
        let mid = (lo * hi).sqrt();
        if positive(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let n0 = T::lit(hi);
    Ok(Threshold {
        n0,
        n0_scaled: n0 * problem.protocol.log2_dimension::<T>(),
        optimizations: calls,
    })
}
