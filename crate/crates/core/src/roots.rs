//! Bracketing root finders for monotone scalar equations.

use crate::error::{Error, Result};

/// Upper limit for bracket expansion, `2^60`.
pub const BRACKET_CAP: f64 = 1_152_921_504_606_846_976.0;

/// Solution of `f(x) = target` for a nonincreasing `f` on `[0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneRoot {
    pub x: f64,
    /// `f(x)` at the returned point.
    pub value: f64,
    /// Final bracket; `lo == hi == 0` when the target already holds at zero.
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

impl MonotoneRoot {
    pub fn at_zero(&self) -> bool {
        self.x == 0.0
    }
}

/// Finds the smallest-residual `x >= 0` with `f(x) = target`, where `f` is
/// nonincreasing.
///
/// If `f(0) <= target` the equation needs no pricing and `x = 0` is
/// returned. Otherwise the bracket is grown by doubling (or shrunk by
/// halving) from `x = 1` until it straddles `target`, then bisected until
/// its width is below `rel_tol` times its upper end. Of the two final
/// endpoints the one with the smaller residual wins, which matters when `f`
/// is a step function.
pub fn solve_nonincreasing<F>(
    mut f: F,
    target: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<MonotoneRoot>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut evaluations = 1;
    let f0 = f(0.0)?;
    if f0 <= target {
        return Ok(MonotoneRoot {
            x: 0.0,
            value: f0,
            lo: 0.0,
            hi: 0.0,
            evaluations,
        });
    }
    let (mut lo, mut flo, mut hi, mut fhi);
    let f1 = f(1.0)?;
    evaluations += 1;
    if f1 > target {
        lo = 1.0;
        flo = f1;
        hi = 2.0;
        loop {
            fhi = f(hi)?;
            evaluations += 1;
            if fhi <= target {
                break;
            }
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            if hi > BRACKET_CAP {
                return Err(Error::NonConvergence {
                    what: "bracket expansion",
                    iterations: evaluations,
                });
            }
        }
    } else {
        hi = 1.0;
        fhi = f1;
        lo = 0.5;
        loop {
            flo = f(lo)?;
            evaluations += 1;
            if flo > target {
                break;
            }
            hi = lo;
            fhi = flo;
            lo *= 0.5;
            if lo < 1.0 / BRACKET_CAP {
                lo = 0.0;
                flo = f0;
                break;
            }
        }
    }
    let mut steps = 0;
    while hi - lo > rel_tol * hi {
        if steps >= max_iter {
            return Err(Error::NonConvergence {
                what: "bisection",
                iterations: steps,
            });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        evaluations += 1;
        steps += 1;
        if fm > target {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let (x, value) = if (flo - target).abs() < (fhi - target).abs() && lo > 0.0 {
        (lo, flo)
    } else {
        (hi, fhi)
    };
    Ok(MonotoneRoot {
        x,
        value,
        lo,
        hi,
        evaluations,
    })
}

/// Bisection for a nondecreasing `f` on `[lo, hi]` in log space, returning
/// `x` with `f(x) = target`. Requires `f(lo) <= target <= f(hi)`.
pub fn bisect_increasing_log<F>(
    mut f: F,
    target: f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid("bracket", "need 0 < lo < hi"));
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..400 {
        if b - a <= rel_tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if f(mid.exp())? < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((0.5 * (a + b)).exp())
}
