//! Sweep execution.

use rayon::prelude::*;
use specshare::{
    delay_limited_capacity, ergodic_capacity_on, outage_closed_form, outage_probability_on,
    ConstraintSet, ConstraintVariant, DualSolution, EstimatorConfig, Regime, RngStream,
    SolverOptions, StateSet,
};

use crate::error::CliError;
use crate::scenario::{to_db, variant_params, MethodKind, ObjectiveKind, Param, Scale, Scenario};

/// One CSV row. `None` fields are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_db: Option<f64>,
    pub sweep_linear: f64,
    pub value: f64,
    pub std_error: f64,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub residual_p: Option<f64>,
    pub residual_q: Option<f64>,
    /// Empty, or `residual` when an active constraint misses the solver
    /// tolerance.
    pub flag: &'static str,
}

pub const CSV_HEADER: &str =
    "sweep_db,sweep_linear,value,std_error,lambda,mu,residual_P,residual_Q,flag";

/// Shortest round-trip form, switching to exponent notation for very
/// small or large magnitudes.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

impl Row {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            opt(self.sweep_db),
            fmt_num(self.sweep_linear),
            fmt_num(self.value),
            fmt_num(self.std_error),
            opt(self.lambda),
            opt(self.mu),
            opt(self.residual_p),
            opt(self.residual_q),
            self.flag
        )
    }
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

struct Point {
    p_pk: f64,
    p_av: f64,
    q_pk: f64,
    q_av: f64,
    r0: Option<f64>,
}

fn point(s: &Scenario, x: f64) -> Point {
    let pick = |p: Param, fixed: Option<f64>| {
        if s.sweep.param == p {
            x
        } else {
            fixed.unwrap_or(f64::INFINITY)
        }
    };
    Point {
        p_pk: pick(Param::PPk, s.p_pk),
        p_av: pick(Param::PAv, s.p_av),
        q_pk: pick(Param::QPk, s.q_pk),
        q_av: pick(Param::QAv, s.q_av),
        r0: if s.sweep.param == Param::R0 {
            Some(x)
        } else {
            s.r0
        },
    }
}

fn constraint_set(s: &Scenario, pt: &Point) -> Result<ConstraintSet, CliError> {
    let value = |p: Param| match p {
        Param::PPk => pt.p_pk,
        Param::PAv => pt.p_av,
        Param::QPk => pt.q_pk,
        Param::QAv => pt.q_av,
        Param::R0 => unreachable!(),
    };
    let (tp, ip) = variant_params(s.variant);
    Ok(ConstraintSet::new(s.variant, value(tp), value(ip), s.n0)?)
}

fn states(s: &Scenario, index: usize) -> Result<StateSet, CliError> {
    let cfg = match s.method {
        MethodKind::MonteCarlo => {
            EstimatorConfig::monte_carlo(s.samples, RngStream::new(s.seed, index as u64))?
        }
        MethodKind::Quadrature => EstimatorConfig::quadrature(s.nodes)?,
    };
    Ok(cfg.states(&s.g0, &s.g1)?)
}

fn dual_columns(
    variant: ConstraintVariant,
    d: &DualSolution,
    tol: f64,
) -> (
    Option<f64>,
    Option<f64>,
    Option<f64>,
    Option<f64>,
    &'static str,
) {
    let (lambda, mu) = match variant {
        ConstraintVariant::F1 => (None, None),
        ConstraintVariant::F2 | ConstraintVariant::F3 => (Some(d.duals.lambda), None),
        ConstraintVariant::F4 => (Some(d.duals.lambda), Some(d.duals.mu)),
    };
    let flag = if d.converged(tol) { "" } else { "residual" };
    (lambda, mu, d.residual_p, d.residual_q, flag)
}

fn run_point(s: &Scenario, index: usize, opts: &SolverOptions) -> Result<Row, CliError> {
    let x = s.sweep.linear(index);
    let pt = point(s, x);
    let mut row = Row {
        sweep_db: match s.sweep.scale {
            Scale::Db => Some(s.sweep.points[index]),
            Scale::Linear if s.sweep.param != Param::R0 => Some(to_db(x)),
            Scale::Linear => None,
        },
        sweep_linear: x,
        value: 0.0,
        std_error: 0.0,
        lambda: None,
        mu: None,
        residual_p: None,
        residual_q: None,
        flag: "",
    };
    match s.objective {
        ObjectiveKind::Ergodic => {
            let cs = constraint_set(s, &pt)?;
            let c = ergodic_capacity_on(&cs, &states(s, index)?, opts)?;
            row.value = c.value;
            row.std_error = c.std_error;
            (row.lambda, row.mu, row.residual_p, row.residual_q, row.flag) =
                dual_columns(s.variant, &c.dual, opts.residual_tol);
        }
        ObjectiveKind::DelayLimited => {
            let d = delay_limited_capacity(pt.p_av, pt.q_av, s.n0, &s.g0, &s.g1)?;
            row.value = d.value;
        }
        ObjectiveKind::Outage => {
            let r0 = pt.r0.expect("validated");
            if s.closed_form {
                let regime = match s.variant {
                    ConstraintVariant::F1 => Regime::PeakOnly(pt.q_pk),
                    _ => Regime::AvgOnly(pt.q_av),
                };
                row.value = outage_closed_form(regime, &s.g0, r0, s.n0)?.p_out;
            } else {
                let cs = constraint_set(s, &pt)?;
                let o = outage_probability_on(&cs, r0, &states(s, index)?, opts)?;
                row.value = o.p_out;
                row.std_error = o.std_error;
                let d = o
                    .dual
                    .expect("Monte Carlo outage carries its dual solution");
                (row.lambda, row.mu, row.residual_p, row.residual_q, row.flag) =
                    dual_columns(s.variant, &d, opts.residual_tol);
            }
        }
    }
    Ok(row)
}

/// Evaluates every sweep point. Points run in parallel, each on its own
/// random stream `(seed, index)`; rows come back in sweep order.
pub fn run_scenario(s: &Scenario) -> Result<Vec<Row>, CliError> {
    let opts = SolverOptions::default();
    (0..s.sweep.points.len())
        .into_par_iter()
        .map(|i| run_point(s, i, &opts))
        .collect()
}
