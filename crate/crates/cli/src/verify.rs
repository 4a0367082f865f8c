//! Quick invariant checks run by `specshare verify`.

use specshare::policy::interference;
use specshare::specfun::{erfc, lambert_w0, ln_gamma};
use specshare::{
    delay_limited_capacity, ergodic_power, kkt_verify, outage_closed_form, outage_power,
    outage_probability_on, sample_pair, solve_dual_on, ConstraintSet, DualVariables,
    EstimatorConfig, FadingModel, Objective, PolicyContext, Regime, RngStream, SolverOptions,
};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> Check {
    match f() {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn special_functions() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for k in 0..=2000 {
        let x = -1.0 / std::f64::consts::E
            + (1e6 + 1.0 / std::f64::consts::E) * (k as f64 / 2000.0).powi(6);
        let w = lambert_w0(x).map_err(|e| e.to_string())?;
        worst = worst.max((w * w.exp() - x).abs() / x.abs().max(1.0));
    }
    if worst > 1e-12 {
        return Err(format!("Lambert-W residual {worst:e}"));
    }
    for k in 0..=600 {
        let t = -30.0 + 0.1 * k as f64;
        if (erfc(t) + erfc(-t) - 2.0).abs() > 1e-15 {
            return Err(format!("erfc reflection fails at {t}"));
        }
    }
    for k in 1..=500 {
        let x = k as f64 * 0.731;
        let d = ln_gamma(x + 1.0).unwrap() - ln_gamma(x).unwrap() - x.ln();
        if d.abs() > 1e-12 * ln_gamma(x + 1.0).unwrap().abs().max(1.0) {
            return Err(format!("ln_gamma recurrence fails at {x}"));
        }
    }
    Ok(format!("max Lambert-W residual {worst:.1e}"))
}

fn constraint_sets() -> Vec<ConstraintSet> {
    vec![
        ConstraintSet::f1(3.0, 0.4, 1.0).unwrap(),
        ConstraintSet::f2(3.0, 0.4, 1.0).unwrap(),
        ConstraintSet::f3(3.0, 0.4, 1.0).unwrap(),
        ConstraintSet::f4(3.0, 0.4, 1.0).unwrap(),
    ]
}

fn peak_feasibility() -> Result<String, String> {
    let r = FadingModel::rayleigh();
    let states = sample_pair(&r, &r, RngStream::new(1, 0), 20_000);
    let duals = DualVariables::new(0.7, 0.3).unwrap();
    for cs in constraint_sets() {
        let d = if cs.variant() == specshare::ConstraintVariant::F1 {
            DualVariables::zero()
        } else {
            duals
        };
        for obj in [Objective::Ergodic, Objective::Outage { r0: 1.0 }] {
            let ctx = PolicyContext::new(cs, d, obj);
            for s in &states {
                let p = match obj {
                    Objective::Ergodic => ergodic_power(&ctx, *s),
                    Objective::Outage { .. } => outage_power(&ctx, *s),
                };
                if !(p >= 0.0) || p > cs.p_pk() || interference(s.g0, p) > cs.q_pk() {
                    return Err(format!(
                        "{} {obj:?} violates a peak limit at {s:?}",
                        cs.variant()
                    ));
                }
            }
        }
    }
    Ok(format!("{} states x 4 sets x 2 objectives", states.len()))
}

fn dual_and_kkt() -> Result<String, String> {
    let r = FadingModel::rayleigh();
    let states = EstimatorConfig::monte_carlo(10_000, RngStream::new(2, 0))
        .and_then(|c| c.states(&r, &r))
        .map_err(|e| e.to_string())?;
    let opts = SolverOptions::default();
    let mut worst: f64 = 0.0;
    for cs in constraint_sets() {
        let sol =
            solve_dual_on(&cs, Objective::Ergodic, &states, &opts).map_err(|e| e.to_string())?;
        if !sol.converged(opts.residual_tol) {
            return Err(format!("{} residual {:e}", cs.variant(), sol.residual));
        }
        worst = worst.max(sol.residual);
        let report = kkt_verify(&sol, &cs, Objective::Ergodic, &states, 1e-6);
        if !report.passed {
            return Err(format!(
                "{} KKT: {} violations",
                cs.variant(),
                report.violation_count
            ));
        }
    }
    Ok(format!("max residual {worst:.1e}"))
}

fn closed_forms() -> Result<String, String> {
    let r = FadingModel::rayleigh();
    let states = EstimatorConfig::monte_carlo(200_000, RngStream::new(3, 0))
        .and_then(|c| c.states(&r, &r))
        .map_err(|e| e.to_string())?;
    let opts = SolverOptions::default();
    let mut worst: f64 = 0.0;
    for &q in &[0.3, 1.0, 3.0] {
        for (cs, regime) in [
            (
                ConstraintSet::f1(f64::INFINITY, q, 1.0).unwrap(),
                Regime::PeakOnly(q),
            ),
            (
                ConstraintSet::f2(f64::INFINITY, q, 1.0).unwrap(),
                Regime::AvgOnly(q),
            ),
        ] {
            let mc = outage_probability_on(&cs, 1.0, &states, &opts).map_err(|e| e.to_string())?;
            let exact = outage_closed_form(regime, &r, 1.0, 1.0)
                .map_err(|e| e.to_string())?
                .p_out;
            let z = (mc.p_out - exact).abs() / mc.std_error;
            worst = worst.max(z);
            if z > 4.0 {
                return Err(format!("{regime:?}: {} vs {exact}", mc.p_out));
            }
        }
    }
    Ok(format!("max deviation {worst:.2} SE"))
}

fn delay_limited() -> Result<String, String> {
    let n = FadingModel::nakagami(2.0).unwrap();
    let r = FadingModel::rayleigh();
    let a = delay_limited_capacity(10.0, 4.0, 1.0, &n, &n)
        .map_err(|e| e.to_string())?
        .value;
    let b = delay_limited_capacity(10.0, 4.0, 1.0, &r, &r)
        .map_err(|e| e.to_string())?
        .value;
    if (a - 3f64.log2()).abs() > 1e-12 || b != 0.0 {
        return Err(format!("Nakagami {a}, Rayleigh {b}"));
    }
    Ok("Nakagami m=2 gives log2(3), Rayleigh gives 0".into())
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("special functions", special_functions),
        check("peak feasibility", peak_feasibility),
        check("dual solver and KKT", dual_and_kkt),
        check("closed-form outage vs Monte Carlo", closed_forms),
        check("delay-limited capacity", delay_limited),
    ]
}
