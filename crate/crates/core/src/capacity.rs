//! Ergodic, delay-limited and outage capacities.

use crate::dual::{expect, solve_dual_on, DualSolution, EstimatorConfig, SolverOptions, StateSet};
use crate::error::{Error, Result};
use crate::fading::{moment_inverse_g1, moment_ratio, ratio_cdf, FadingKind, FadingModel};
use crate::policy::{inversion_cost, ConstraintSet, DualVariables, Objective, PolicyContext};
use crate::roots::bisect_increasing_log;
use crate::specfun;

/// Ergodic capacity in bits per complex dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
    pub duals_used: DualVariables,
    pub dual: DualSolution,
}

/// Maximizes `E[log2(1 + g1 P / N0)]` under `cs`, solving the dual
/// variables on the states drawn from `cfg`.
pub fn ergodic_capacity(
    cs: &ConstraintSet,
    m0: &FadingModel,
    m1: &FadingModel,
    cfg: &EstimatorConfig,
) -> Result<CapacityResult> {
    let states = cfg.states(m0, m1)?;
    let mut r = ergodic_capacity_on(cs, &states, &SolverOptions::default())?;
    if !cfg.report_se {
        r.std_error = 0.0;
    }
    Ok(r)
}

pub fn ergodic_capacity_on(
    cs: &ConstraintSet,
    states: &StateSet,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    let dual = solve_dual_on(cs, Objective::Ergodic, states, opts)?;
    let ctx = PolicyContext::new(*cs, dual.duals, Objective::Ergodic);
    let ex = expect(&ctx, states);
    Ok(CapacityResult {
        value: ex.rate.mean,
        std_error: ex.objective_std_error(&ctx),
        n: ex.n,
        duals_used: dual.duals,
        dual,
    })
}

/// Convention for `E[1/g1]` under unit-mean Nakagami fading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentConvention {
    /// `m / (m - 1)`, consistent with `E[g0/g1]` for independent gains.
    #[default]
    Exact,
    /// `1`, the unit-mean shortcut, for side-by-side comparison.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    Transmit,
    Interference,
    Both,
    /// A required moment diverges and no constant rate is sustainable.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayLimitedResult {
    /// `log2(1 + gamma_max)`.
    pub value: f64,
    /// Largest constant received SNR.
    pub gamma_max: f64,
    pub binding: Binding,
    /// SNR allowed by the average transmit limit alone.
    pub gamma_transmit: f64,
    /// SNR allowed by the average interference limit alone.
    pub gamma_interference: f64,
}

fn divergent_as_infinite(m: Result<f64>) -> Result<f64> {
    match m {
        Err(Error::UndefinedMoment(_)) => Ok(f64::INFINITY),
        other => other,
    }
}

/// Largest constant rate supported in every fading block under average
/// transmit and interference limits.
///
/// Channel inversion at constant SNR `gamma` costs `gamma N0 E[1/g1]` in
/// average transmit power and `gamma N0 E[g0/g1]` in average interference,
/// so `gamma_max` is the smaller of the two ratios. A divergent moment
/// forces that ratio to zero; an infinite limit drops its term.
pub fn delay_limited_capacity(
    p_av: f64,
    q_av: f64,
    n0: f64,
    m0: &FadingModel,
    m1: &FadingModel,
) -> Result<DelayLimitedResult> {
    delay_limited_capacity_with(p_av, q_av, n0, m0, m1, MomentConvention::Exact)
}

pub fn delay_limited_capacity_with(
    p_av: f64,
    q_av: f64,
    n0: f64,
    m0: &FadingModel,
    m1: &FadingModel,
    convention: MomentConvention,
) -> Result<DelayLimitedResult> {
    if !(p_av > 0.0) || !(q_av > 0.0) {
        return Err(Error::invalid(
            "limits",
            "average limits must be positive or +inf",
        ));
    }
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::invalid(
            "n0",
            "noise power must be positive and finite",
        ));
    }
    if p_av.is_infinite() && q_av.is_infinite() {
        return Err(Error::Infeasible("both average limits absent".into()));
    }
    let (inv_g1, ratio) = match (convention, m1.kind()) {
        (MomentConvention::Unit, FadingKind::Nakagami { .. }) => (
            1.0 / m1.scale(),
            divergent_as_infinite(moment_ratio(m0, m1))?,
        ),
        _ => (
            divergent_as_infinite(moment_inverse_g1(m1))?,
            divergent_as_infinite(moment_ratio(m0, m1))?,
        ),
    };
    let term = |limit: f64, moment: f64| {
        if limit.is_infinite() {
            f64::INFINITY
        } else if moment.is_infinite() {
            0.0
        } else {
            limit / (n0 * moment)
        }
    };
    let gamma_transmit = term(p_av, inv_g1);
    let gamma_interference = term(q_av, ratio);
    let gamma_max = gamma_transmit.min(gamma_interference);
    let binding = if gamma_max == 0.0 {
        Binding::Zero
    } else if gamma_transmit == gamma_interference {
        Binding::Both
    } else if gamma_transmit < gamma_interference {
        Binding::Transmit
    } else {
        Binding::Interference
    };
    Ok(DelayLimitedResult {
        value: gamma_max.ln_1p() / std::f64::consts::LN_2,
        gamma_max,
        binding,
        gamma_transmit,
        gamma_interference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageResult {
    pub r0: f64,
    pub p_out: f64,
    pub std_error: f64,
    /// Inversion threshold on `g0/g1` for average-only closed forms;
    /// `+inf` when outage is zero.
    pub omega_star: Option<f64>,
    /// Mean of the per-sample outage indicator (Monte Carlo only).
    pub indicator_mean: Option<f64>,
    /// Sample count, zero for closed forms.
    pub n: usize,
    pub duals: DualVariables,
    pub dual: Option<DualSolution>,
}

/// Minimum outage probability at rate `r0` under `cs`, estimated as the
/// mean of the outage indicator under truncated channel inversion.
pub fn outage_probability(
    cs: &ConstraintSet,
    r0: f64,
    m0: &FadingModel,
    m1: &FadingModel,
    cfg: &EstimatorConfig,
) -> Result<OutageResult> {
    let states = cfg.states(m0, m1)?;
    let mut r = outage_probability_on(cs, r0, &states, &SolverOptions::default())?;
    if !cfg.report_se {
        r.std_error = 0.0;
    }
    Ok(r)
}

pub fn outage_probability_on(
    cs: &ConstraintSet,
    r0: f64,
    states: &StateSet,
    opts: &SolverOptions,
) -> Result<OutageResult> {
    let objective = Objective::outage(r0)?;
    let dual = solve_dual_on(cs, objective, states, opts)?;
    let ctx = PolicyContext::new(*cs, dual.duals, objective);
    let ex = expect(&ctx, states);
    Ok(OutageResult {
        r0,
        p_out: ex.outage.mean.clamp(0.0, 1.0),
        std_error: ex.objective_std_error(&ctx),
        omega_star: None,
        indicator_mean: Some(ex.outage.mean),
        n: ex.n,
        duals: dual.duals,
        dual: Some(dual),
    })
}

/// Interference-only regimes with analytical outage probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// Peak interference limit `Q_pk`, no transmit limit.
    PeakOnly(f64),
    /// Average interference limit `Q_av`, no transmit limit.
    AvgOnly(f64),
}

/// `E[R 1{R <= w}]` for the unit-scale ratio `R = g0/g1` of two iid gains
/// of `kind`.
pub fn ratio_partial_mean(kind: FadingKind, w: f64) -> Result<f64> {
    if !(w >= 0.0) {
        return Err(Error::Domain {
            func: "ratio_partial_mean",
            arg: w,
        });
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    match kind {
        FadingKind::Rayleigh => {
            if w.is_infinite() {
                return Ok(f64::INFINITY);
            }
            Ok(w.ln_1p() - w / (1.0 + w))
        }
        FadingKind::Nakagami { m } => {
            if w.is_infinite() {
                return Ok(ratio_mean_limit(kind));
            }
            let b = specfun::beta(m, m)?;
            let f = specfun::hyp2f1(2.0 * m, m + 1.0, m + 2.0, -w)?;
            Ok(((m + 1.0) * w.ln()).exp() * f / ((m + 1.0) * b))
        }
        FadingKind::LogNormal { sigma2 } => {
            let mean = sigma2.exp();
            if w.is_infinite() {
                return Ok(mean);
            }
            let s = (2.0 * sigma2).sqrt();
            Ok(mean * specfun::norm_cdf((w.ln() - 2.0 * sigma2) / s))
        }
        FadingKind::Constant => Err(Error::Unsupported("ratio of constant gains".into())),
    }
}

/// `E[g0/g1]` for iid unit-scale gains of `kind`.
fn ratio_mean_limit(kind: FadingKind) -> f64 {
    match kind {
        FadingKind::Rayleigh => f64::INFINITY,
        FadingKind::Nakagami { m } if m > 1.0 => m / (m - 1.0),
        FadingKind::Nakagami { .. } => f64::INFINITY,
        FadingKind::LogNormal { sigma2 } => sigma2.exp(),
        FadingKind::Constant => 1.0,
    }
}

/// Analytical outage probability at rate `r0` when only an interference
/// limit applies and `g0`, `g1` are iid draws of `model`.
///
/// Under a peak limit the state is inverted iff `g0/g1 <= Q_pk / T` with
/// `T = N0 (2^r0 - 1)`. Under an average limit it is inverted iff
/// `g0/g1 <= omega*`, where `omega*` solves `E[R 1{R <= omega*}] = Q_av/T`;
/// when `Q_av/T` reaches `E[R]` every state is inverted and the outage
/// probability is zero. Rayleigh fading has the explicit solution
/// `p_out = -W0(-e^{-1-q})`.
pub fn outage_closed_form(
    regime: Regime,
    model: &FadingModel,
    r0: f64,
    n0: f64,
) -> Result<OutageResult> {
    Objective::outage(r0)?;
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::invalid(
            "n0",
            "noise power must be positive and finite",
        ));
    }
    let kind = model.kind();
    if kind == FadingKind::Constant {
        return Err(Error::Unsupported(
            "closed-form outage needs a fading model".into(),
        ));
    }
    let unit = FadingModel::new(kind, 1.0)?;
    let t = inversion_cost(r0, n0);
    let (p_out, omega_star) = match regime {
        Regime::PeakOnly(q_pk) => {
            if !(q_pk > 0.0) {
                return Err(Error::invalid("q_pk", "must be positive"));
            }
            let x = t / q_pk;
            // g1/g0 has the same law as g0/g1
            let p = match kind {
                FadingKind::Rayleigh => x / (1.0 + x),
                _ => ratio_cdf(&unit, &unit, x)?,
            };
            (p, None)
        }
        Regime::AvgOnly(q_av) => {
            if !(q_av > 0.0) {
                return Err(Error::invalid("q_av", "must be positive"));
            }
            let q = q_av / t;
            if let FadingKind::Nakagami { m } = kind {
                if m <= 1.0 {
                    return Err(Error::invalid("m", "average-only closed form needs m > 1"));
                }
            }
            if q >= ratio_mean_limit(kind) {
                (0.0, Some(f64::INFINITY))
            } else if kind == FadingKind::Rayleigh {
                let w = specfun::lambert_w0(-(-1.0 - q).exp())?;
                let omega = (w + 1.0 + q).exp() - 1.0;
                (-w, Some(omega))
            } else {
                let omega = solve_threshold(kind, q)?;
                let p = 1.0 - ratio_cdf(&unit, &unit, omega)?;
                (p, Some(omega))
            }
        }
    };
    Ok(OutageResult {
        r0,
        p_out: p_out.clamp(0.0, 1.0),
        std_error: 0.0,
        omega_star,
        indicator_mean: None,
        n: 0,
        duals: DualVariables::zero(),
        dual: None,
    })
}

fn solve_threshold(kind: FadingKind, q: f64) -> Result<f64> {
    let f = |w: f64| ratio_partial_mean(kind, w);
    let mut lo = 1e-12;
    while f(lo)? > q {
        lo *= 1e-6;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    let mut hi = 2.0;
    while f(hi)? < q {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NonConvergence {
                what: "zero-outage threshold bracket",
                iterations: 0,
            });
        }
    }
    bisect_increasing_log(f, q, lo, hi, 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn delay_limited_examples() {
        let r = delay_limited_capacity(
            10.0,
            4.0,
            1.0,
            &FadingModel::rayleigh(),
            &FadingModel::rayleigh(),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.binding, Binding::Zero);
        let n = FadingModel::nakagami(2.0).unwrap();
        let r = delay_limited_capacity(10.0, 4.0, 1.0, &n, &n).unwrap();
        assert!((r.value - 3f64.log2()).abs() < 1e-12);
        assert_eq!(r.binding, Binding::Interference);
        let l = FadingModel::lognormal(1.0).unwrap();
        let r = delay_limited_capacity(f64::INFINITY, E, 1.0, &l, &l).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_convention_changes_transmit_term_only() {
        let n = FadingModel::nakagami(2.0).unwrap();
        let exact = delay_limited_capacity(1.0, f64::INFINITY, 1.0, &n, &n).unwrap();
        let unit =
            delay_limited_capacity_with(1.0, f64::INFINITY, 1.0, &n, &n, MomentConvention::Unit)
                .unwrap();
        assert!((exact.value - 1.5f64.log2()).abs() < 1e-12);
        assert!((unit.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_anchor() {
        let t = inversion_cost(1.0, 1.0);
        let r =
            outage_closed_form(Regime::PeakOnly(t), &FadingModel::rayleigh(), 1.0, 1.0).unwrap();
        assert!((r.p_out - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rayleigh_avg_only_at_unit_q() {
        let r =
            outage_closed_form(Regime::AvgOnly(1.0), &FadingModel::rayleigh(), 1.0, 1.0).unwrap();
        let w = r.omega_star.unwrap();
        assert!((w - 5.3049).abs() < 1e-3);
        assert!((r.p_out - 1.0 / (1.0 + w)).abs() < 1e-12);
        assert!((r.p_out - 0.1586).abs() < 1e-4);
    }

    #[test]
    fn nakagami_m2_partial_mean_is_cubic() {
        let k = FadingKind::Nakagami { m: 2.0 };
        for &w in &[0.01, 0.5, 3.0, 40.0] {
            let t: f64 = w / (1.0 + w);
            let pm = ratio_partial_mean(k, w).unwrap();
            assert!((pm - 2.0 * t.powi(3)).abs() < 1e-12 * pm.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn saturated_average_limit_gives_zero() {
        let n = FadingModel::nakagami(2.0).unwrap();
        let r = outage_closed_form(Regime::AvgOnly(2.5), &n, 1.0, 1.0).unwrap();
        assert_eq!(r.p_out, 0.0);
        assert_eq!(r.omega_star, Some(f64::INFINITY));
    }
}
