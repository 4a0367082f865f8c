//! Optimal power allocation and capacity of a secondary-user fading channel
//! sharing spectrum with a primary receiver.
//!
//! The secondary transmitter sees two power gains per fading block: `g0`
//! towards the primary receiver and `g1` towards its own receiver. Its
//! power is limited by a transmit constraint and by an interference
//! constraint on `g0 * P`, each either peak or average (see
//! [`ConstraintVariant`]). The crate provides
//!
//! - closed-form optimal policies ([`policy`]),
//! - Monte Carlo and quadrature expectations with dual-variable solvers and
//!   a KKT checker ([`dual`]),
//! - ergodic, delay-limited and outage capacities, including analytical
//!   outage probabilities for interference-only regimes ([`capacity`]),
//! - the special functions these need ([`specfun`]).
//!
//! ```
//! use specshare::{ConstraintSet, EstimatorConfig, FadingModel, RngStream, ergodic_capacity};
//!
//! let cs = ConstraintSet::f2(10.0, 0.3, 1.0)?;
//! let cfg = EstimatorConfig::monte_carlo(20_000, RngStream::new(1, 0))?;
//! let ray = FadingModel::rayleigh();
//! let c = ergodic_capacity(&cs, &ray, &ray, &cfg)?;
//! assert!(c.value > 0.0 && c.duals_used.lambda > 0.0);
//! # Ok::<(), specshare::Error>(())
//! ```

pub mod capacity;
pub mod dual;
pub mod error;
pub mod fading;
pub mod policy;
pub mod quadrature;
pub mod roots;
pub mod specfun;

pub use capacity::{
    delay_limited_capacity, delay_limited_capacity_with, ergodic_capacity, ergodic_capacity_on,
    outage_closed_form, outage_probability, outage_probability_on, Binding, CapacityResult,
    DelayLimitedResult, MomentConvention, OutageResult, Regime,
};
pub use dual::{
    expect, kkt_verify, solve_dual, solve_dual_on, DualSolution, Estimate, EstimatorConfig,
    Expectations, KktReport, KktViolation, Method, SolverOptions, StateSet, ViolationKind,
};
pub use error::{Error, Result};
pub use fading::{
    moment_inverse_g1, moment_ratio, ratio_cdf, ratio_pdf, sample_pair, ChannelState, FadingKind,
    FadingModel, RngStream,
};
pub use policy::{
    ergodic_power, outage_power, ConstraintSet, ConstraintVariant, DualVariables, Objective,
    PolicyContext, Region, K,
};
