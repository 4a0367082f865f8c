//! Built-in figure definitions.
//!
//! Each figure is a list of named series, each series a complete scenario.
//! Where the curve parameters are not pinned down by the figure itself the
//! chosen grid is recorded in the manifest written next to the data.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::run::{run_scenario, to_csv};
use crate::scenario::{Overrides, ScenarioFile, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

pub const DEFAULT_FIGURE_SEED: u64 = 1;

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Figure::Fig2 => {
                "Ergodic capacity vs. P_pk with Q_pk = -5 dB for AWGN and Rayleigh links"
            }
            Figure::Fig3 => "Ergodic capacity vs. Q_av under a peak transmit limit",
            Figure::Fig4 => "Ergodic capacity vs. P_av under peak or average interference limits",
            Figure::Fig5 => "Delay-limited capacity vs. Q_av with P_av = 10 dB",
            Figure::Fig6 => "Outage probability vs. Q_pk, r0 = 1, P_pk = 10 dB, Rayleigh g1",
            Figure::Fig7 => "Outage probability under peak or average interference limits, r0 = 1",
            Figure::Fig8 => "Outage probability under a peak interference limit only, r0 = 1",
            Figure::Fig9 => "Outage probability under an average interference limit only, r0 = 1",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Model {
    label: &'static str,
    kind: &'static str,
    m: Option<f64>,
    sigma2: Option<f64>,
}

const AWGN: Model = Model {
    label: "awgn",
    kind: "constant",
    m: None,
    sigma2: None,
};
const RAYLEIGH: Model = Model {
    label: "rayleigh",
    kind: "rayleigh",
    m: None,
    sigma2: None,
};
const NAKAGAMI: Model = Model {
    label: "nakagami2",
    kind: "nakagami",
    m: Some(2.0),
    sigma2: None,
};
const LOGNORMAL: Model = Model {
    label: "lognormal1",
    kind: "lognormal",
    m: None,
    sigma2: Some(1.0),
};

fn base(
    name: String,
    objective: &str,
    constraint: &str,
    g0: Model,
    g1: Model,
    (sweep, from, to): (&str, f64, f64),
) -> ScenarioFile {
    ScenarioFile {
        format_version: Some(FORMAT_VERSION),
        name: Some(name),
        objective: Some(objective.into()),
        constraint: Some(constraint.into()),
        n0: Some(1.0),
        g0: Some(g0.kind.into()),
        g0_m: g0.m,
        g0_sigma2: g0.sigma2,
        g1: Some(g1.kind.into()),
        g1_m: g1.m,
        g1_sigma2: g1.sigma2,
        sweep: Some(sweep.into()),
        sweep_from: Some(from),
        sweep_to: Some(to),
        sweep_step: Some(1.0),
        sweep_scale: Some("db".into()),
        seed: Some(DEFAULT_FIGURE_SEED),
        ..ScenarioFile::default()
    }
}

fn outage(mut s: ScenarioFile) -> ScenarioFile {
    s.r0 = Some(1.0);
    s
}

/// Series of `fig`, as `(series name, scenario)`.
pub fn series(fig: Figure) -> Vec<(String, ScenarioFile)> {
    let mut out = Vec::new();
    match fig {
        Figure::Fig2 => {
            for (g0, g1) in [(AWGN, AWGN), (AWGN, RAYLEIGH), (RAYLEIGH, RAYLEIGH)] {
                let name = format!("{}-{}", g0.label, g1.label);
                let mut s = base(name.clone(), "ergodic", "F1", g0, g1, ("p_pk", -20.0, 15.0));
                s.q_pk_db = Some(-5.0);
                out.push((name, s));
            }
        }
        Figure::Fig3 => {
            for p in [Some(0.0), Some(5.0), Some(10.0), Some(15.0), None] {
                let name = match p {
                    Some(p) => format!("p_pk_{p}db"),
                    None => "p_pk_inf".to_string(),
                };
                let mut s = base(
                    name.clone(),
                    "ergodic",
                    "F2",
                    RAYLEIGH,
                    RAYLEIGH,
                    ("q_av", -20.0, 10.0),
                );
                match p {
                    Some(p) => s.p_pk_db = Some(p),
                    None => s.p_pk = Some(f64::INFINITY),
                }
                out.push((name, s));
            }
        }
        Figure::Fig4 => {
            for q in [-5.0, 5.0] {
                for (constraint, kind) in [("F3", "peak"), ("F4", "avg")] {
                    let name = format!("{kind}_q_{q}db");
                    let mut s = base(
                        name.clone(),
                        "ergodic",
                        constraint,
                        RAYLEIGH,
                        RAYLEIGH,
                        ("p_av", -10.0, 20.0),
                    );
                    if constraint == "F3" {
                        s.q_pk_db = Some(q);
                    } else {
                        s.q_av_db = Some(q);
                    }
                    out.push((name, s));
                }
            }
        }
        Figure::Fig5 => {
            for m in [RAYLEIGH, NAKAGAMI, LOGNORMAL] {
                let mut s = base(
                    m.label.to_string(),
                    "delay_limited",
                    "F4",
                    m,
                    m,
                    ("q_av", -10.0, 30.0),
                );
                s.p_av_db = Some(10.0);
                out.push((m.label.to_string(), s));
            }
        }
        Figure::Fig6 => {
            for g0 in [AWGN, NAKAGAMI, RAYLEIGH] {
                let name = format!("g0_{}", g0.label);
                let mut s = outage(base(
                    name.clone(),
                    "outage",
                    "F1",
                    g0,
                    RAYLEIGH,
                    ("q_pk", -10.0, 20.0),
                ));
                s.p_pk_db = Some(10.0);
                out.push((name, s));
            }
        }
        Figure::Fig7 => {
            for p in [0.0, 10.0] {
                for (constraint, kind, sweep) in [("F1", "peak", "q_pk"), ("F2", "avg", "q_av")] {
                    let name = format!("{kind}_p_pk_{p}db");
                    let mut s = outage(base(
                        name.clone(),
                        "outage",
                        constraint,
                        RAYLEIGH,
                        RAYLEIGH,
                        (sweep, -10.0, 20.0),
                    ));
                    s.p_pk_db = Some(p);
                    out.push((name, s));
                }
            }
        }
        Figure::Fig8 | Figure::Fig9 => {
            let (constraint, sweep) = if fig == Figure::Fig8 {
                ("F1", "q_pk")
            } else {
                ("F2", "q_av")
            };
            for m in [RAYLEIGH, NAKAGAMI, LOGNORMAL] {
                for analytic in [true, false] {
                    let name = format!("{}-{}", m.label, if analytic { "analytic" } else { "mc" });
                    let mut s = outage(base(
                        name.clone(),
                        "outage",
                        constraint,
                        m,
                        m,
                        (sweep, -10.0, 20.0),
                    ));
                    s.p_pk = Some(f64::INFINITY);
                    if analytic {
                        s.closed_form = Some(true);
                    }
                    out.push((name, s));
                }
            }
        }
    }
    out
}

#[derive(Serialize)]
struct Manifest<'a> {
    format_version: u32,
    figure: &'a str,
    description: &'a str,
    series: Vec<ManifestSeries<'a>>,
}

#[derive(Serialize)]
struct ManifestSeries<'a> {
    name: &'a str,
    file: String,
    scenario: &'a ScenarioFile,
}

/// Runs every series of `fig` and writes `<out>/<fig>/<series>.csv` plus
/// `manifest.toml` describing the scenarios used. Returns the files
/// written, in order.
pub fn write_figure(
    fig: Figure,
    overrides: &Overrides,
    out: &Path,
) -> Result<Vec<std::path::PathBuf>, CliError> {
    let dir = out.join(fig.name());
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut all = series(fig);
    for (_, s) in &mut all {
        overrides.apply(s);
    }
    let mut written = Vec::new();
    for (name, s) in &all {
        let scenario = s.validate()?;
        let rows = run_scenario(&scenario)?;
        let path = dir.join(format!("{name}.csv"));
        std::fs::write(&path, to_csv(&rows))
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        figure: fig.name(),
        description: fig.description(),
        series: all
            .iter()
            .map(|(name, s)| ManifestSeries {
                name,
                file: format!("{name}.csv"),
                scenario: s,
            })
            .collect(),
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    let path = dir.join("manifest.toml");
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    written.push(path);
    Ok(written)
}

/// Manifest for a single scenario run.
pub fn scenario_manifest(s: &ScenarioFile) -> Result<String, CliError> {
    let mut text = String::new();
    let _ = writeln!(text, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(text, "csv_header = \"{}\"", crate::run::CSV_HEADER);
    text.push_str("\n[scenario]\n");
    text.push_str(&toml::to_string(s).map_err(|e| CliError::Io(e.to_string()))?);
    Ok(text)
}
