//! Optimal instantaneous power allocation.
//!
//! Each constraint set combines one transmit-power limit with one
//! interference-power limit, each either peak (per fading state) or
//! average (over the fading distribution):
//!
//! | variant | transmit | interference |
//! |---------|----------|--------------|
//! | `F1`    | peak     | peak         |
//! | `F2`    | peak     | average      |
//! | `F3`    | average  | peak         |
//! | `F4`    | average  | average      |
//!
//! Average limits are priced by the dual variables in [`DualVariables`];
//! the `dual` module picks them so that the limits hold.

use std::f64::consts::{LN_2, LOG2_E};
use std::fmt;

use crate::error::{Error, Result};
use crate::fading::ChannelState;

/// `log2(e)`, the slope of `log2(1 + x)` at zero.
pub const K: f64 = LOG2_E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintVariant {
    F1,
    F2,
    F3,
    F4,
}

impl fmt::Display for ConstraintVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstraintVariant::F1 => "F1",
            ConstraintVariant::F2 => "F2",
            ConstraintVariant::F3 => "F3",
            ConstraintVariant::F4 => "F4",
        };
        f.write_str(s)
    }
}

/// Power limits of one constraint set. Limits that do not belong to the
/// variant are stored as `+inf`; a `+inf` on a variant's own limit means
/// that constraint is absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSet {
    variant: ConstraintVariant,
    p_pk: f64,
    p_av: f64,
    q_pk: f64,
    q_av: f64,
    n0: f64,
}

fn check_limit(name: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive or +inf, got {v}"),
        ))
    }
}

impl ConstraintSet {
    /// Builds a constraint set from a transmit limit and an interference
    /// limit, interpreted as peak or average according to `variant`.
    pub fn new(
        variant: ConstraintVariant,
        transmit: f64,
        interference: f64,
        n0: f64,
    ) -> Result<Self> {
        if !(n0 > 0.0) || !n0.is_finite() {
            return Err(Error::invalid(
                "n0",
                "noise power must be positive and finite",
            ));
        }
        let inf = f64::INFINITY;
        let (p_pk, p_av, q_pk, q_av) = match variant {
            ConstraintVariant::F1 => (
                check_limit("p_pk", transmit)?,
                inf,
                check_limit("q_pk", interference)?,
                inf,
            ),
            ConstraintVariant::F2 => (
                check_limit("p_pk", transmit)?,
                inf,
                inf,
                check_limit("q_av", interference)?,
            ),
            ConstraintVariant::F3 => (
                inf,
                check_limit("p_av", transmit)?,
                check_limit("q_pk", interference)?,
                inf,
            ),
            ConstraintVariant::F4 => (
                inf,
                check_limit("p_av", transmit)?,
                inf,
                check_limit("q_av", interference)?,
            ),
        };
        Ok(ConstraintSet {
            variant,
            p_pk,
            p_av,
            q_pk,
            q_av,
            n0,
        })
    }

    pub fn f1(p_pk: f64, q_pk: f64, n0: f64) -> Result<Self> {
        Self::new(ConstraintVariant::F1, p_pk, q_pk, n0)
    }

    pub fn f2(p_pk: f64, q_av: f64, n0: f64) -> Result<Self> {
        Self::new(ConstraintVariant::F2, p_pk, q_av, n0)
    }

    pub fn f3(p_av: f64, q_pk: f64, n0: f64) -> Result<Self> {
        Self::new(ConstraintVariant::F3, p_av, q_pk, n0)
    }

    pub fn f4(p_av: f64, q_av: f64, n0: f64) -> Result<Self> {
        Self::new(ConstraintVariant::F4, p_av, q_av, n0)
    }

    pub fn variant(&self) -> ConstraintVariant {
        self.variant
    }
    pub fn p_pk(&self) -> f64 {
        self.p_pk
    }
    pub fn p_av(&self) -> f64 {
        self.p_av
    }
    pub fn q_pk(&self) -> f64 {
        self.q_pk
    }
    pub fn q_av(&self) -> f64 {
        self.q_av
    }
    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// True when at least one finite average limit is present.
    pub fn has_average_constraint(&self) -> bool {
        self.p_av.is_finite() || self.q_av.is_finite()
    }

    /// Rejects sets under which the ergodic-optimal power is unbounded.
    pub fn ensure_bounded(&self) -> Result<()> {
        let unbounded = match self.variant {
            ConstraintVariant::F1 => self.p_pk.is_infinite() && self.q_pk.is_infinite(),
            ConstraintVariant::F2 => self.p_pk.is_infinite() && self.q_av.is_infinite(),
            ConstraintVariant::F3 => self.p_av.is_infinite() && self.q_pk.is_infinite(),
            ConstraintVariant::F4 => self.p_av.is_infinite() && self.q_av.is_infinite(),
        };
        if unbounded {
            Err(Error::Infeasible(format!(
                "{} with both limits absent has unbounded power",
                self.variant
            )))
        } else {
            Ok(())
        }
    }
}

/// Nonnegative multipliers on the average constraints.
///
/// `lambda` prices the average constraint of F2 (interference) or F3
/// (transmit), and the average transmit constraint of F4. `mu` prices the
/// average interference constraint of F4 and is zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualVariables {
    pub lambda: f64,
    pub mu: f64,
}

impl DualVariables {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::invalid("lambda", "must be finite and nonnegative"));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite and nonnegative"));
        }
        Ok(DualVariables { lambda, mu })
    }

    pub fn zero() -> Self {
        DualVariables::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    Ergodic,
    /// Minimize outage at a target rate in bits per complex dimension.
    Outage {
        r0: f64,
    },
}

impl Objective {
    pub fn outage(r0: f64) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::invalid("r0", "target rate must be positive"));
        }
        Ok(Objective::Outage { r0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyContext {
    pub constraints: ConstraintSet,
    pub duals: DualVariables,
    pub objective: Objective,
}

impl PolicyContext {
    pub fn new(constraints: ConstraintSet, duals: DualVariables, objective: Objective) -> Self {
        PolicyContext {
            constraints,
            duals,
            objective,
        }
    }

    pub fn power(&self, state: ChannelState) -> f64 {
        match self.objective {
            Objective::Ergodic => ergodic_power(self, state),
            Objective::Outage { .. } => outage_power(self, state),
        }
    }

    /// Per-state price of one unit of transmit power in the Lagrangian.
    pub fn price(&self, g0: f64) -> f64 {
        let DualVariables { lambda, mu } = self.duals;
        match self.constraints.variant {
            ConstraintVariant::F1 => 0.0,
            ConstraintVariant::F2 => lambda * g0,
            ConstraintVariant::F3 => lambda,
            ConstraintVariant::F4 => lambda + mu * g0,
        }
    }

    /// Largest power allowed by the peak constraints in state `g0`.
    pub fn peak_cap(&self, g0: f64) -> f64 {
        let cs = &self.constraints;
        cs.p_pk.min(interference_cap(cs.q_pk, g0))
    }
}

/// Largest `p` with `g0 * p <= q` in floating point.
pub fn interference_cap(q: f64, g0: f64) -> f64 {
    if g0 == 0.0 || q.is_infinite() {
        return f64::INFINITY;
    }
    let mut p = q / g0;
    while p * g0 > q {
        p = p.next_down();
    }
    p
}

/// Interference `g0 * p` with `0 * inf` read as zero.
pub fn interference(g0: f64, p: f64) -> f64 {
    if g0 == 0.0 || p == 0.0 {
        0.0
    } else {
        g0 * p
    }
}

/// Instantaneous rate `log2(1 + g1 p / n0)`.
pub fn rate(state: ChannelState, p: f64, n0: f64) -> f64 {
    if p == 0.0 || state.g1 == 0.0 {
        return 0.0;
    }
    (state.g1 * p / n0).ln_1p() * LOG2_E
}

/// Received SNR needed for rate `r0`, times the noise power: `n0 (2^r0 - 1)`.
pub fn inversion_cost(r0: f64, n0: f64) -> f64 {
    n0 * (r0 * LN_2).exp_m1()
}

/// Which piece of the ergodic water-filling rule a state falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// No transmission.
    Silent,
    /// Power set by the water level.
    WaterFilling,
    /// Power clipped by a peak constraint.
    Capped,
}

/// Region of the ergodic policy that `state` falls in.
pub fn ergodic_region(ctx: &PolicyContext, state: ChannelState) -> Region {
    let cs = &ctx.constraints;
    let ChannelState { g0, g1 } = state;
    if g1 == 0.0 {
        return Region::Silent;
    }
    let lambda = ctx.duals.lambda;
    match cs.variant {
        ConstraintVariant::F1 => Region::Capped,
        ConstraintVariant::F2 => {
            if lambda == 0.0 {
                return Region::Capped;
            }
            if g0 >= K * g1 / (lambda * cs.n0) {
                Region::Silent
            } else if g0 <= K / (lambda * (cs.p_pk + cs.n0 / g1)) {
                Region::Capped
            } else {
                Region::WaterFilling
            }
        }
        ConstraintVariant::F3 => {
            if lambda == 0.0 {
                return Region::Capped;
            }
            if g1 <= lambda * cs.n0 / K {
                return Region::Silent;
            }
            let level = K / lambda - cs.n0 / g1;
            if g0 < cs.q_pk / level {
                Region::WaterFilling
            } else {
                Region::Capped
            }
        }
        ConstraintVariant::F4 => {
            let price = ctx.price(g0);
            if price == 0.0 {
                return Region::Capped;
            }
            if K / price - cs.n0 / g1 > 0.0 {
                Region::WaterFilling
            } else {
                Region::Silent
            }
        }
    }
}

/// Ergodic-capacity-optimal power for one fading state.
///
/// F1 transmits at the tightest peak limit. F2 and F3 water-fill against
/// the priced constraint and clip at the peak limit. F4 water-fills with
/// the combined price `lambda + mu g0`. States with `g1 = 0` stay silent.
pub fn ergodic_power(ctx: &PolicyContext, state: ChannelState) -> f64 {
    let cs = &ctx.constraints;
    let ChannelState { g0, g1 } = state;
    match ergodic_region(ctx, state) {
        Region::Silent => 0.0,
        Region::Capped => ctx.peak_cap(g0),
        Region::WaterFilling => {
            let level = match cs.variant {
                ConstraintVariant::F1 => unreachable!(),
                ConstraintVariant::F2 => K / (ctx.duals.lambda * g0),
                ConstraintVariant::F3 => K / ctx.duals.lambda,
                ConstraintVariant::F4 => K / ctx.price(g0),
            };
            (level - cs.n0 / g1).max(0.0).min(ctx.peak_cap(g0))
        }
    }
}

/// Outage-optimal power for one fading state: two-dimensional truncated
/// channel inversion.
///
/// The state is inverted (received SNR exactly `2^r0 - 1`) when the
/// inversion power fits under the peak limits and its Lagrangian price is
/// below the unit cost of an outage; otherwise the transmitter stays
/// silent. Ergodic contexts fall back to [`ergodic_power`].
pub fn outage_power(ctx: &PolicyContext, state: ChannelState) -> f64 {
    let r0 = match ctx.objective {
        Objective::Outage { r0 } => r0,
        Objective::Ergodic => return ergodic_power(ctx, state),
    };
    let cs = &ctx.constraints;
    let ChannelState { g0, g1 } = state;
    if g1 == 0.0 {
        return 0.0;
    }
    let p = inversion_cost(r0, cs.n0) / g1;
    let within_peak = p <= cs.p_pk && interference(g0, p) <= cs.q_pk;
    let priced_ok = match cs.variant {
        ConstraintVariant::F1 => true,
        _ => ctx.price(g0) * p < 1.0,
    };
    if within_peak && priced_ok {
        p
    } else {
        0.0
    }
}
