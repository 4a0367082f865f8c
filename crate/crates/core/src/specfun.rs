//! Special functions used by the closed-form capacity and outage expressions.
//!
//! Everything here is evaluated in double precision with real arguments
//! only. The hypergeometric function is restricted to `z <= 0`, which is the
//! only region the outage formulas ever touch.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Truncation controls for series and iterative evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecfunAccuracy {
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for SpecfunAccuracy {
    fn default() -> Self {
        SpecfunAccuracy {
            abs_tol: 1e-16,
            max_iter: 1_000_000,
        }
    }
}

impl SpecfunAccuracy {
    pub fn new(abs_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(Error::invalid("abs_tol", "must be positive"));
        }
        if max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        Ok(SpecfunAccuracy { abs_tol, max_iter })
    }
}

/// Natural log of the Gamma function for `x > 0`.
///
/// Small arguments are shifted up with the recurrence until the Stirling
/// series is accurate to machine precision.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            func: "ln_gamma",
            arg: x,
        });
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x.fract() == 0.0 && x <= 20.0 {
        let fact: f64 = (2..x as u32).map(f64::from).product();
        return Ok(fact.ln());
    }
    let mut z = x;
    let mut prod = 1.0;
    while z < 10.0 {
        prod *= z;
        z += 1.0;
    }
    Ok(stirling_ln_gamma(z) - prod.ln())
}

fn stirling_ln_gamma(z: f64) -> f64 {
    // B_{2k} / (2k (2k - 1)) for k = 1..8
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * inv2 + c;
    }
    series *= inv;
    (z - 0.5) * (z.ln() - 1.0) + (HALF_LN_2PI - 0.5) + series
}

/// Beta function `Γ(a)Γ(b)/Γ(a+b)`, via `ln_gamma`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain {
            func: "beta",
            arg: a,
        });
    }
    if !(b > 0.0) {
        return Err(Error::Domain {
            func: "beta",
            arg: b,
        });
    }
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

/// Complementary error function.
pub fn erfc(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t < 0.0 {
        return 2.0 - erfc(-t);
    }
    if t < 3.0 {
        return 1.0 - erf_series(t);
    }
    erfc_continued_fraction(t)
}

/// Error function.
pub fn erf(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t < 0.0 {
        return -erf(-t);
    }
    if t < 3.0 {
        erf_series(t)
    } else {
        1.0 - erfc_continued_fraction(t)
    }
}

// erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (2n+1)!!, all terms positive.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

// Modified Lentz evaluation of x + (1/2)/(x + 1/(x + (3/2)/(x + ...))), x >= 3.
fn erfc_continued_fraction(x: f64) -> f64 {
    if x > 27.3 {
        return 0.0;
    }
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..2000 {
        let a = n as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * PI.sqrt())
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile for `p` in `(0, 1)`.
///
/// Rational starting point refined with one Halley step against `erfc`.
pub fn norm_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if p == 1.0 {
            return Ok(f64::INFINITY);
        }
        return Err(Error::Domain {
            func: "norm_quantile",
            arg: p,
        });
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = norm_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn reg_gamma_p(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain {
            func: "reg_gamma_p",
            arg: a,
        });
    }
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain {
            func: "reg_gamma_p",
            arg: x,
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let log_prefix = -x + a * x.ln() - ln_gamma(a)?;
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..10_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-16 {
                return Ok((sum.ln() + log_prefix).exp().min(1.0));
            }
        }
        Err(Error::NonConvergence {
            what: "reg_gamma_p series",
            iterations: 10_000,
        })
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                return Ok((1.0 - (log_prefix.exp() * h)).max(0.0));
            }
        }
        Err(Error::NonConvergence {
            what: "reg_gamma_p continued fraction",
            iterations: 10_000,
        })
    }
}

/// Quantile of the unit-scale Gamma distribution with the given shape.
pub fn gamma_quantile(shape: f64, p: f64) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::Domain {
            func: "gamma_quantile",
            arg: shape,
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            func: "gamma_quantile",
            arg: p,
        });
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    let mut lo = 0.0;
    let mut hi = shape.max(1.0);
    while reg_gamma_p(shape, hi)? < p {
        lo = hi;
        hi *= 2.0;
    }
    let ln_g = ln_gamma(shape)?;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = reg_gamma_p(shape, x)? - p;
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = (-x + (shape - 1.0) * x.ln() - ln_g).exp();
        let mut next = x - f / dens;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` for `z <= 0`.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_with(a, b, c, z, &SpecfunAccuracy::default())
}

/// `hyp2f1` with explicit truncation controls.
///
/// Negative arguments are mapped into `[0, 1)` with a Pfaff transformation
/// before summing, since the raw series diverges for `z < -1`. When one of
/// the transformed numerator parameters is a nonpositive integer the series
/// terminates and the result is a finite polynomial.
pub fn hyp2f1_with(a: f64, b: f64, c: f64, z: f64, acc: &SpecfunAccuracy) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Domain {
            func: "hyp2f1",
            arg: c,
        });
    }
    if z.is_nan() || z > 0.0 {
        return Err(Error::Domain {
            func: "hyp2f1",
            arg: z,
        });
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return gauss_series(a, b, c, z, acc);
    }
    if z.is_infinite() {
        return Err(Error::Domain {
            func: "hyp2f1",
            arg: z,
        });
    }
    let w = z / (z - 1.0);
    let one_minus_z = 1.0 - z;
    // Pfaff on b: (1-z)^{-b} 2F1(c-a, b; c; w). Pfaff on a: (1-z)^{-a} 2F1(a, c-b; c; w).
    if is_nonpositive_integer(c - b) {
        return Ok(one_minus_z.powf(-a) * gauss_series(a, c - b, c, w, acc)?);
    }
    Ok(one_minus_z.powf(-b) * gauss_series(c - a, b, c, w, acc)?)
}

fn is_nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v == v.round()
}

fn gauss_series(a: f64, b: f64, c: f64, w: f64, acc: &SpecfunAccuracy) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let tail_factor = if w.abs() < 1.0 {
        1.0 / (1.0 - w.abs())
    } else {
        1.0
    };
    let settle = (a.abs() + b.abs() + c.abs()).ceil() as usize + 2;
    for n in 0..acc.max_iter {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * w;
        if term == 0.0 {
            return Ok(sum);
        }
        sum += term;
        if n >= settle && term.abs() * tail_factor <= acc.abs_tol * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        what: "hyp2f1 series",
        iterations: acc.max_iter,
    })
}

/// Principal branch `W0` of the Lambert-W function, `x >= -1/e`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch - 4.0 * f64::EPSILON {
        return Err(Error::Domain {
            func: "lambert_w0",
            arg: x,
        });
    }
    if x <= branch {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p() * (1.0 - 0.3 * x.ln_1p() / (1.0 + x.ln_1p()))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if w < -1.0 {
            w = -1.0;
        }
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}
