//! Expectations over the fading pair, dual-variable solvers, and a KKT
//! checker for solved policies.
//!
//! All expectations run over a fixed [`StateSet`]. During one solve the
//! same states are reused for every trial multiplier, so the constraint
//! functions seen by the bisection are exactly monotone even under Monte
//! Carlo. Reductions are sharded over fixed-size chunks and summed in chunk
//! order, so results are bit-identical from run to run regardless of the
//! thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::{sample_pair, ChannelState, FadingKind, FadingModel, RngStream};
use crate::policy::{
    interference, inversion_cost, rate, ConstraintSet, ConstraintVariant, DualVariables, Objective,
    PolicyContext, K,
};
use crate::quadrature::gauss_legendre_unit;
use crate::roots::{solve_nonincreasing, MonotoneRoot};

const CHUNK: usize = 16_384;

/// Relative slack on the received-SNR comparison used by the outage
/// indicator. Inverted states hit `2^r0 - 1` up to rounding.
pub const INDICATOR_REL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    MonteCarlo { n: usize, rng: RngStream },
    Quadrature { nodes_per_axis: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub method: Method,
    pub report_se: bool,
}

impl EstimatorConfig {
    pub fn monte_carlo(n: usize, rng: RngStream) -> Result<Self> {
        let cfg = EstimatorConfig {
            method: Method::MonteCarlo { n, rng },
            report_se: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn quadrature(nodes_per_axis: usize) -> Result<Self> {
        let cfg = EstimatorConfig {
            method: Method::Quadrature { nodes_per_axis },
            report_se: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::MonteCarlo { n, .. } if n < 1000 => Err(Error::invalid(
                "samples",
                "Monte Carlo needs at least 1000 samples",
            )),
            Method::Quadrature { nodes_per_axis } if nodes_per_axis < 16 => Err(Error::invalid(
                "nodes_per_axis",
                "quadrature needs at least 16 nodes per axis",
            )),
            _ => Ok(()),
        }
    }

    pub fn states(&self, m0: &FadingModel, m1: &FadingModel) -> Result<StateSet> {
        self.validate()?;
        match self.method {
            Method::MonteCarlo { n, rng } => Ok(StateSet::monte_carlo(sample_pair(m0, m1, rng, n))),
            Method::Quadrature { nodes_per_axis } => StateSet::quadrature(m0, m1, nodes_per_axis),
        }
    }
}

/// Channel states with optional probability weights.
///
/// Unweighted sets are Monte Carlo samples; weighted sets come from a
/// deterministic rule and carry no sampling error.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet {
    states: Vec<ChannelState>,
    weights: Option<Vec<f64>>,
}

impl StateSet {
    pub fn monte_carlo(states: Vec<ChannelState>) -> Self {
        StateSet {
            states,
            weights: None,
        }
    }

    pub fn weighted(states: Vec<ChannelState>, weights: Vec<f64>) -> Result<Self> {
        if states.len() != weights.len() {
            return Err(Error::invalid("weights", "length must match the states"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("weights", "must be nonnegative"));
        }
        Ok(StateSet {
            states,
            weights: Some(weights),
        })
    }

    /// Tensor-product Gauss-Legendre rule in probability space: node `u`
    /// on each axis is mapped through the gain's quantile function.
    pub fn quadrature(m0: &FadingModel, m1: &FadingModel, nodes_per_axis: usize) -> Result<Self> {
        let axis = |m: &FadingModel| -> Result<(Vec<f64>, Vec<f64>)> {
            if m.kind() == FadingKind::Constant {
                return Ok((vec![m.scale()], vec![1.0]));
            }
            let (u, w) = gauss_legendre_unit(nodes_per_axis);
            let g = u
                .iter()
                .map(|&u| m.quantile(u))
                .collect::<Result<Vec<_>>>()?;
            Ok((g, w))
        };
        let (g0s, w0s) = axis(m0)?;
        let (g1s, w1s) = axis(m1)?;
        let mut states = Vec::with_capacity(g0s.len() * g1s.len());
        let mut weights = Vec::with_capacity(states.capacity());
        for (g0, w0) in g0s.iter().zip(&w0s) {
            for (g1, w1) in g1s.iter().zip(&w1s) {
                states.push(ChannelState { g0: *g0, g1: *g1 });
                weights.push(w0 * w1);
            }
        }
        StateSet::weighted(states, weights)
    }

    pub fn states(&self) -> &[ChannelState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_monte_carlo(&self) -> bool {
        self.weights.is_none()
    }

    /// Weighted mean of `f` over the set.
    pub fn mean<const N: usize, F>(&self, f: F) -> [f64; N]
    where
        F: Fn(ChannelState) -> [f64; N] + Sync,
    {
        let partial: Vec<[f64; N]> = match &self.weights {
            None => self
                .states
                .par_chunks(CHUNK)
                .map(|c| {
                    let mut acc = [0.0; N];
                    for s in c {
                        let v = f(*s);
                        for k in 0..N {
                            acc[k] += v[k];
                        }
                    }
                    acc
                })
                .collect(),
            Some(w) => self
                .states
                .par_chunks(CHUNK)
                .zip(w.par_chunks(CHUNK))
                .map(|(c, w)| {
                    let mut acc = [0.0; N];
                    for (s, wi) in c.iter().zip(w) {
                        if *wi == 0.0 {
                            continue;
                        }
                        let v = f(*s);
                        for k in 0..N {
                            acc[k] += wi * v[k];
                        }
                    }
                    acc
                })
                .collect(),
        };
        let mut total = [0.0; N];
        for p in &partial {
            for k in 0..N {
                total[k] += p[k];
            }
        }
        if self.weights.is_none() {
            let n = self.states.len() as f64;
            for t in &mut total {
                *t /= n;
            }
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Per-state quantities tracked by [`expect`], in this order.
pub const QUANTITIES: [&str; 4] = ["power", "interference", "rate", "outage"];

/// Expectations of transmit power, interference, rate and the outage
/// indicator under one policy, with the sample covariance needed to form
/// standard errors of linear combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectations {
    pub power: Estimate,
    pub interference: Estimate,
    pub rate: Estimate,
    pub outage: Estimate,
    pub n: usize,
    monte_carlo: bool,
    cov: [[f64; 4]; 4],
}

impl Expectations {
    /// Standard error of `sum_k coeffs[k] * quantity_k` (0 for weighted sets).
    pub fn std_error_of(&self, coeffs: [f64; 4]) -> f64 {
        if !self.monte_carlo {
            return 0.0;
        }
        let mut var = 0.0;
        for i in 0..4 {
            if coeffs[i] == 0.0 {
                continue;
            }
            for j in 0..4 {
                if coeffs[j] == 0.0 {
                    continue;
                }
                var += coeffs[i] * coeffs[j] * self.cov[i][j];
            }
        }
        (var.max(0.0) / self.n as f64).sqrt()
    }

    /// Standard error of the policy objective with the dual variables held
    /// at their solved values.
    ///
    /// When the multipliers are fitted on the same states, the first-order
    /// error of the objective estimate equals the error of the per-state
    /// Lagrangian (envelope argument), so the standard error is taken from
    /// that combination instead of the objective alone.
    pub fn objective_std_error(&self, ctx: &PolicyContext) -> f64 {
        let DualVariables { lambda, mu } = ctx.duals;
        let (lp, lq) = match ctx.constraints.variant() {
            ConstraintVariant::F1 => (0.0, 0.0),
            ConstraintVariant::F2 => (0.0, lambda),
            ConstraintVariant::F3 => (lambda, 0.0),
            ConstraintVariant::F4 => (lambda, mu),
        };
        match ctx.objective {
            Objective::Ergodic => self.std_error_of([-lp, -lq, 1.0, 0.0]),
            Objective::Outage { .. } => self.std_error_of([lp, lq, 0.0, 1.0]),
        }
    }

    pub fn objective(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Ergodic => self.rate.mean,
            Objective::Outage { .. } => self.outage.mean,
        }
    }
}

/// Outage indicator: 1 when the block rate falls below `r0`.
pub fn outage_indicator(state: ChannelState, p: f64, r0: f64, n0: f64) -> f64 {
    let needed = inversion_cost(r0, n0);
    let received = if p == 0.0 { 0.0 } else { state.g1 * p };
    if received < needed * (1.0 - INDICATOR_REL_SLACK) {
        1.0
    } else {
        0.0
    }
}

fn per_state(ctx: &PolicyContext, s: ChannelState) -> [f64; 4] {
    let n0 = ctx.constraints.n0();
    let p = ctx.power(s);
    let chi = match ctx.objective {
        Objective::Outage { r0 } => outage_indicator(s, p, r0, n0),
        Objective::Ergodic => 0.0,
    };
    [p, interference(s.g0, p), rate(s, p, n0), chi]
}

/// Expectations of `P`, `g0 P`, `log2(1 + g1 P / N0)` and the outage
/// indicator under the policy `ctx`.
pub fn expect(ctx: &PolicyContext, states: &StateSet) -> Expectations {
    let mean: [f64; 4] = states.mean(|s| per_state(ctx, s));
    let n = states.len();
    let mut cov = [[0.0; 4]; 4];
    if states.is_monte_carlo() {
        let sums: [f64; 10] = states.mean(|s| {
            let v = per_state(ctx, s);
            let d = [
                v[0] - mean[0],
                v[1] - mean[1],
                v[2] - mean[2],
                v[3] - mean[3],
            ];
            let mut out = [0.0; 10];
            let mut k = 0;
            for i in 0..4 {
                for j in i..4 {
                    out[k] = d[i] * d[j];
                    k += 1;
                }
            }
            out
        });
        let bessel = if n > 1 {
            n as f64 / (n as f64 - 1.0)
        } else {
            1.0
        };
        let mut k = 0;
        #[allow(clippy::needless_range_loop)]
        for i in 0..4 {
            for j in i..4 {
                cov[i][j] = sums[k] * bessel;
                cov[j][i] = cov[i][j];
                k += 1;
            }
        }
    }
    let monte_carlo = states.is_monte_carlo();
    let est = |i: usize| Estimate {
        mean: mean[i],
        std_error: if monte_carlo {
            (cov[i][i].max(0.0) / n as f64).sqrt()
        } else {
            0.0
        },
    };
    Expectations {
        power: est(0),
        interference: est(1),
        rate: est(2),
        outage: est(3),
        n,
        monte_carlo,
        cov,
    }
}

/// Tolerances for [`solve_dual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest acceptable relative residual on an active constraint.
    pub residual_tol: f64,
    /// Bisection stops when the bracket is narrower than this fraction of
    /// its upper end.
    pub bracket_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            residual_tol: 1e-3,
            bracket_tol: 1e-10,
            max_iter: 400,
        }
    }
}

/// Solved dual variables and the constraint values they achieve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualSolution {
    pub duals: DualVariables,
    /// Achieved `E[P]`.
    pub achieved_ep: f64,
    /// Achieved `E[g0 P]`.
    pub achieved_egp: f64,
    /// Largest relative residual over the active (priced) constraints.
    pub residual: f64,
    /// Relative residual of the average transmit constraint, if present.
    pub residual_p: Option<f64>,
    /// Relative residual of the average interference constraint, if present.
    pub residual_q: Option<f64>,
    /// `(transmit, interference)` average constraints met with strict
    /// inequality (or absent).
    pub slack: (bool, bool),
    /// Final bisection bracket of the last multiplier solved.
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

impl DualSolution {
    /// True when every active constraint meets `residual_tol`.
    pub fn converged(&self, residual_tol: f64) -> bool {
        self.residual <= residual_tol
    }
}

fn rel(a: f64, target: f64) -> f64 {
    (a - target).abs() / target
}

fn relative_residuals(cs: &ConstraintSet, ep: f64, egp: f64) -> (Option<f64>, Option<f64>) {
    let rp = cs.p_av().is_finite().then(|| rel(ep, cs.p_av()));
    let rq = cs.q_av().is_finite().then(|| rel(egp, cs.q_av()));
    (rp, rq)
}

/// Builds the state set from `cfg` and solves the dual variables on it.
pub fn solve_dual(
    cs: &ConstraintSet,
    objective: Objective,
    m0: &FadingModel,
    m1: &FadingModel,
    cfg: &EstimatorConfig,
) -> Result<DualSolution> {
    let states = cfg.states(m0, m1)?;
    solve_dual_on(cs, objective, &states, &SolverOptions::default())
}

/// Picks the multipliers for the average constraints of `cs` so that each
/// one binds, or is left unpriced when it is already slack.
///
/// F2 prices `E[g0 P]` with `lambda`, F3 prices `E[P]` with `lambda`, and F4
/// prices both (`lambda` on `E[P]`, `mu` on `E[g0 P]`) by nested bisection:
/// the outer loop on `mu`, with `lambda(mu)` re-solved inside. F1 has no
/// average constraint and returns zero multipliers with both slack flags
/// set.
pub fn solve_dual_on(
    cs: &ConstraintSet,
    objective: Objective,
    states: &StateSet,
    opts: &SolverOptions,
) -> Result<DualSolution> {
    if states.is_empty() {
        return Err(Error::invalid("states", "empty state set"));
    }
    if matches!(objective, Objective::Ergodic) {
        cs.ensure_bounded()?;
    }
    let ctx_for = |duals: DualVariables| PolicyContext::new(*cs, duals, objective);
    let moments = |duals: DualVariables| -> [f64; 2] {
        let ctx = ctx_for(duals);
        states.mean(|s| {
            let p = ctx.power(s);
            [p, interference(s.g0, p)]
        })
    };
    let mut evaluations = 0usize;
    let (duals, bracket) = match cs.variant() {
        ConstraintVariant::F1 => (DualVariables::zero(), (0.0, 0.0)),
        ConstraintVariant::F2 => {
            let root = solve_single(cs.q_av(), opts, &mut evaluations, |l| {
                moments(DualVariables { lambda: l, mu: 0.0 })[1]
            })?;
            (
                DualVariables {
                    lambda: root.x,
                    mu: 0.0,
                },
                (root.lo, root.hi),
            )
        }
        ConstraintVariant::F3 => {
            let root = solve_single(cs.p_av(), opts, &mut evaluations, |l| {
                moments(DualVariables { lambda: l, mu: 0.0 })[0]
            })?;
            (
                DualVariables {
                    lambda: root.x,
                    mu: 0.0,
                },
                (root.lo, root.hi),
            )
        }
        ConstraintVariant::F4 => {
            let inner = |mu: f64, evals: &mut usize| -> Result<MonotoneRoot> {
                solve_single(cs.p_av(), opts, evals, |l| {
                    moments(DualVariables { lambda: l, mu })[0]
                })
            };
            let mut evals = 0usize;
            let outer = if cs.q_av().is_finite() {
                let mut inner_evals = 0usize;
                let root = solve_nonincreasing(
                    |mu| {
                        let lam = inner(mu, &mut inner_evals)?;
                        Ok(moments(DualVariables { lambda: lam.x, mu })[1])
                    },
                    cs.q_av(),
                    opts.bracket_tol,
                    opts.max_iter,
                )?;
                evals += root.evaluations + inner_evals;
                root
            } else {
                MonotoneRoot {
                    x: 0.0,
                    value: f64::NAN,
                    lo: 0.0,
                    hi: 0.0,
                    evaluations: 0,
                }
            };
            let mu = outer.x;
            let lam = inner(mu, &mut evals)?;
            evaluations += evals;
            (
                DualVariables { lambda: lam.x, mu },
                (outer.lo.min(lam.lo), outer.hi.max(lam.hi)),
            )
        }
    };
    let [ep, egp] = moments(duals);
    evaluations += 1;
    let (residual_p, residual_q) = relative_residuals(cs, ep, egp);
    let (lp, lq) = match cs.variant() {
        ConstraintVariant::F1 => (0.0, 0.0),
        ConstraintVariant::F2 => (0.0, duals.lambda),
        ConstraintVariant::F3 => (duals.lambda, 0.0),
        ConstraintVariant::F4 => (duals.lambda, duals.mu),
    };
    let slack = (lp == 0.0, lq == 0.0);
    let mut residual: f64 = 0.0;
    if !slack.0 {
        residual = residual.max(residual_p.unwrap_or(0.0));
    }
    if !slack.1 {
        residual = residual.max(residual_q.unwrap_or(0.0));
    }
    Ok(DualSolution {
        duals,
        achieved_ep: ep,
        achieved_egp: egp,
        residual,
        residual_p,
        residual_q,
        slack,
        bracket,
        evaluations,
    })
}

fn solve_single<F>(
    limit: f64,
    opts: &SolverOptions,
    evaluations: &mut usize,
    f: F,
) -> Result<MonotoneRoot>
where
    F: Fn(f64) -> f64,
{
    if limit.is_infinite() {
        return Ok(MonotoneRoot {
            x: 0.0,
            value: f(0.0),
            lo: 0.0,
            hi: 0.0,
            evaluations: 1,
        });
    }
    let root = solve_nonincreasing(|x| Ok(f(x)), limit, opts.bracket_tol, opts.max_iter)?;
    *evaluations += root.evaluations;
    Ok(root)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Power outside `[0, peak cap]`.
    PeakFeasibility,
    /// Interior state whose marginal utility differs from its price.
    Stationarity,
    /// Silent state that would gain from transmitting.
    SilentSign,
    /// Capped state that would gain from transmitting less.
    CappedSign,
    /// Outage policy chose the costlier of silence and inversion.
    InversionChoice,
    /// Average constraint exceeded.
    PrimalFeasibility,
    /// Priced constraint not met with equality.
    ComplementarySlackness,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktViolation {
    /// Index into the state set, or `None` for global conditions.
    pub index: Option<usize>,
    pub state: Option<ChannelState>,
    pub power: f64,
    pub kind: ViolationKind,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    pub passed: bool,
    pub states_checked: usize,
    pub violation_count: usize,
    /// First violations found, capped at [`KktReport::MAX_LISTED`].
    pub violations: Vec<KktViolation>,
    pub max_stationarity_gap: f64,
    /// `|dual * (achieved - limit)| / (dual * limit)` for the transmit and
    /// interference averages; zero where the multiplier is zero.
    pub slackness_gap: (f64, f64),
}

impl KktReport {
    pub const MAX_LISTED: usize = 64;

    fn push(&mut self, v: KktViolation) {
        self.violation_count += 1;
        if self.violations.len() < Self::MAX_LISTED {
            self.violations.push(v);
        }
    }
}

/// Checks the optimality conditions of the policy priced by `solution`.
///
/// Per state, the ergodic rule must satisfy the sub-problem conditions on
/// the marginal utility `K g1 / (g1 P + N0)`: equal to the price in the
/// interior, no larger at zero power, no smaller at the peak cap. The
/// outage rule must pick the cheaper of silence (cost 1) and inversion
/// (cost `price * P`). Globally, every average constraint must hold and
/// every positive multiplier must come with a binding constraint. All
/// expectations are recomputed over `states`.
pub fn kkt_verify(
    solution: &DualSolution,
    cs: &ConstraintSet,
    objective: Objective,
    states: &StateSet,
    tol: f64,
) -> KktReport {
    let ctx = PolicyContext::new(*cs, solution.duals, objective);
    let n0 = cs.n0();
    let mut report = KktReport {
        passed: true,
        states_checked: states.len(),
        violation_count: 0,
        violations: Vec::new(),
        max_stationarity_gap: 0.0,
        slackness_gap: (0.0, 0.0),
    };
    let mut max_gap: f64 = 0.0;
    for (i, &s) in states.states().iter().enumerate() {
        let p = ctx.power(s);
        let cap = ctx.peak_cap(s.g0);
        let price = ctx.price(s.g0);
        let mut flag = |kind, magnitude| {
            report.push(KktViolation {
                index: Some(i),
                state: Some(s),
                power: p,
                kind,
                magnitude,
            })
        };
        if !(p >= 0.0) || p > cap || interference(s.g0, p) > cs.q_pk() {
            flag(ViolationKind::PeakFeasibility, p);
            continue;
        }
        if s.g1 == 0.0 {
            if p != 0.0 {
                flag(ViolationKind::SilentSign, p);
            }
            continue;
        }
        match objective {
            Objective::Ergodic => {
                if p.is_infinite() {
                    continue;
                }
                let marginal = K * s.g1 / (s.g1 * p + n0);
                let scale = 1f64.max(price).max(marginal);
                let gap = marginal - price;
                if p == 0.0 {
                    if gap > tol * scale {
                        flag(ViolationKind::SilentSign, gap);
                    }
                } else if p >= cap {
                    if gap < -tol * scale {
                        flag(ViolationKind::CappedSign, gap);
                    }
                } else {
                    max_gap = max_gap.max(gap.abs() / scale);
                    if gap.abs() > tol * scale {
                        flag(ViolationKind::Stationarity, gap);
                    }
                }
            }
            Objective::Outage { r0 } => {
                let p_inv = inversion_cost(r0, n0) / s.g1;
                let feasible = p_inv <= cap && interference(s.g0, p_inv) <= cs.q_pk();
                let cost = if cs.variant() == ConstraintVariant::F1 {
                    0.0
                } else {
                    price * p_inv
                };
                if p > 0.0 {
                    let wrong_level = (p - p_inv).abs() > 1e-12 * p_inv;
                    if wrong_level || !feasible || cost > 1.0 + tol {
                        flag(ViolationKind::InversionChoice, cost);
                    }
                } else if feasible && cost < 1.0 - tol {
                    flag(ViolationKind::InversionChoice, cost);
                }
            }
        }
    }
    report.max_stationarity_gap = max_gap;
    let ex = expect(&ctx, states);
    let (lp, lq) = match cs.variant() {
        ConstraintVariant::F1 => (0.0, 0.0),
        ConstraintVariant::F2 => (0.0, solution.duals.lambda),
        ConstraintVariant::F3 => (solution.duals.lambda, 0.0),
        ConstraintVariant::F4 => (solution.duals.lambda, solution.duals.mu),
    };
    let mut global = |dual: f64, achieved: f64, limit: f64| -> f64 {
        if limit.is_infinite() {
            return 0.0;
        }
        if achieved > limit * (1.0 + tol) {
            report.push(KktViolation {
                index: None,
                state: None,
                power: achieved,
                kind: ViolationKind::PrimalFeasibility,
                magnitude: achieved / limit - 1.0,
            });
        }
        if dual == 0.0 {
            return 0.0;
        }
        let gap = (dual * (achieved - limit)).abs() / (dual * limit);
        if gap > tol {
            report.push(KktViolation {
                index: None,
                state: None,
                power: achieved,
                kind: ViolationKind::ComplementarySlackness,
                magnitude: gap,
            });
        }
        gap
    };
    let gp = global(lp, ex.power.mean, cs.p_av());
    let gq = global(lq, ex.interference.mean, cs.q_av());
    report.slackness_gap = (gp, gq);
    report.passed = report.violation_count == 0;
    report
}
