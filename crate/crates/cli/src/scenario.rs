//! Scenario files.
//!
//! A scenario is a flat TOML document. Powers are given either in dB
//! (`p_pk_db = 10`) or linear (`p_pk = 10.0`), never both. `inf` marks an
//! absent limit.
//!
//! ```toml
//! format_version = 1
//! name = "peak-rayleigh"
//! objective = "ergodic"
//! constraint = "F1"
//! q_pk_db = -5
//! g0 = "rayleigh"
//! g1 = "rayleigh"
//! sweep = "p_pk"
//! sweep_from = -20
//! sweep_to = 15
//! sweep_step = 1
//! sweep_scale = "db"
//! samples = 100000
//! seed = 7
//! ```

use serde::{Deserialize, Serialize};
use specshare::{ConstraintVariant, FadingKind, FadingModel};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// Scenario exactly as written on disk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: Option<u32>,
    pub name: Option<String>,
    pub objective: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    pub constraint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_pk: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_pk_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_av: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_av_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_pk: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_pk_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_av: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_av_db: Option<f64>,
    pub g0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0_sigma2: Option<f64>,
    pub g1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g1_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g1_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g1_sigma2: Option<f64>,
    pub sweep: Option<String>,
    pub sweep_from: Option<f64>,
    pub sweep_to: Option<f64>,
    pub sweep_step: Option<f64>,
    pub sweep_scale: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Use the analytical interference-only outage formula.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Ergodic,
    DelayLimited,
    Outage,
}

impl ObjectiveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::Ergodic => "ergodic",
            ObjectiveKind::DelayLimited => "delay_limited",
            ObjectiveKind::Outage => "outage",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    PPk,
    PAv,
    QPk,
    QAv,
    R0,
}

impl Param {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "p_pk" => Param::PPk,
            "p_av" => Param::PAv,
            "q_pk" => Param::QPk,
            "q_av" => Param::QAv,
            "r0" => Param::R0,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Param::PPk => "p_pk",
            Param::PAv => "p_av",
            Param::QPk => "q_pk",
            Param::QAv => "q_av",
            Param::R0 => "r0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Db,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: Param,
    pub scale: Scale,
    /// Sweep points in the sweep's own scale.
    pub points: Vec<f64>,
}

impl Sweep {
    pub fn linear(&self, i: usize) -> f64 {
        match self.scale {
            Scale::Db => from_db(self.points[i]),
            Scale::Linear => self.points[i],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    MonteCarlo,
    Quadrature,
}

impl MethodKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "monte-carlo" | "monte_carlo" => Some(MethodKind::MonteCarlo),
            "quadrature" => Some(MethodKind::Quadrature),
            _ => None,
        }
    }
}

/// Validated scenario with every limit in linear scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub objective: ObjectiveKind,
    pub r0: Option<f64>,
    pub variant: ConstraintVariant,
    pub n0: f64,
    /// Fixed limits; the swept one is `None`.
    pub p_pk: Option<f64>,
    pub p_av: Option<f64>,
    pub q_pk: Option<f64>,
    pub q_av: Option<f64>,
    pub g0: FadingModel,
    pub g1: FadingModel,
    pub sweep: Sweep,
    pub method: MethodKind,
    pub samples: usize,
    pub nodes: usize,
    pub seed: u64,
    pub closed_form: bool,
    /// The file form, with command-line overrides applied.
    pub source: ScenarioFile,
}

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_NODES: usize = 64;
const MAX_POINTS: usize = 100_000;

pub fn from_db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub method: Option<MethodKind>,
}

impl Overrides {
    pub fn apply(&self, file: &mut ScenarioFile) {
        if let Some(s) = self.seed {
            file.seed = Some(s);
        }
        if let Some(n) = self.samples {
            file.samples = Some(n);
        }
        if let Some(m) = self.method {
            file.method = Some(
                match m {
                    MethodKind::MonteCarlo => "monte-carlo",
                    MethodKind::Quadrature => "quadrature",
                }
                .to_string(),
            );
        }
    }
}

/// Parses TOML text; parse errors carry the line and column.
pub fn parse(text: &str) -> Result<ScenarioFile, CliError> {
    toml::from_str(text).map_err(|e| {
        let location = e
            .span()
            .map(|s| {
                let line = text[..s.start].matches('\n').count() + 1;
                let col = s.start - text[..s.start].rfind('\n').map_or(0, |p| p + 1) + 1;
                format!("line {line}, column {col}: ")
            })
            .unwrap_or_default();
        CliError::Validation(format!("{location}{}", e.message()))
    })
}

fn field(name: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("field `{name}`: {reason}"))
}

fn required<T: Clone>(v: &Option<T>, name: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| field(name, "is required"))
}

fn power(lin: Option<f64>, db: Option<f64>, name: &str) -> Result<Option<f64>, CliError> {
    match (lin, db) {
        (Some(_), Some(_)) => Err(field(
            name,
            format!("given both as `{name}` and `{name}_db`"),
        )),
        (Some(x), None) if x > 0.0 => Ok(Some(x)),
        (None, Some(d)) if !d.is_nan() && d > f64::NEG_INFINITY => Ok(Some(from_db(d))),
        (None, None) => Ok(None),
        _ => Err(field(name, "must be a positive power (or +inf)")),
    }
}

fn model(
    kind: &str,
    mean: Option<f64>,
    m: Option<f64>,
    sigma2: Option<f64>,
    prefix: &str,
) -> Result<FadingModel, CliError> {
    let k = match kind {
        "constant" | "awgn" => FadingKind::Constant,
        "rayleigh" => FadingKind::Rayleigh,
        "nakagami" => FadingKind::Nakagami {
            m: m.ok_or_else(|| field(&format!("{prefix}_m"), "is required for Nakagami fading"))?,
        },
        "lognormal" => FadingKind::LogNormal {
            sigma2: sigma2.ok_or_else(|| {
                field(
                    &format!("{prefix}_sigma2"),
                    "is required for log-normal fading",
                )
            })?,
        },
        other => return Err(field(prefix, format!("unknown fading model `{other}`"))),
    };
    if m.is_some() && !matches!(k, FadingKind::Nakagami { .. }) {
        return Err(field(
            &format!("{prefix}_m"),
            "only applies to Nakagami fading",
        ));
    }
    if sigma2.is_some() && !matches!(k, FadingKind::LogNormal { .. }) {
        return Err(field(
            &format!("{prefix}_sigma2"),
            "only applies to log-normal fading",
        ));
    }
    FadingModel::new(k, mean.unwrap_or(1.0)).map_err(|e| field(prefix, e))
}

fn variant(s: &str) -> Option<ConstraintVariant> {
    Some(match s {
        "F1" | "f1" => ConstraintVariant::F1,
        "F2" | "f2" => ConstraintVariant::F2,
        "F3" | "f3" => ConstraintVariant::F3,
        "F4" | "f4" => ConstraintVariant::F4,
        _ => return None,
    })
}

/// Limits used by each variant, as (transmit, interference).
pub fn variant_params(v: ConstraintVariant) -> (Param, Param) {
    match v {
        ConstraintVariant::F1 => (Param::PPk, Param::QPk),
        ConstraintVariant::F2 => (Param::PPk, Param::QAv),
        ConstraintVariant::F3 => (Param::PAv, Param::QPk),
        ConstraintVariant::F4 => (Param::PAv, Param::QAv),
    }
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<Scenario, CliError> {
        let version = required(&self.format_version, "format_version")?;
        if version != FORMAT_VERSION {
            return Err(field(
                "format_version",
                format!("unsupported version {version}, expected {FORMAT_VERSION}"),
            ));
        }
        let name = required(&self.name, "name")?;
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(field("name", "must be a non-empty file-name-safe string"));
        }
        let seed = required(&self.seed, "seed")?;
        let objective = match required(&self.objective, "objective")?.as_str() {
            "ergodic" => ObjectiveKind::Ergodic,
            "delay_limited" | "delay-limited" => ObjectiveKind::DelayLimited,
            "outage" => ObjectiveKind::Outage,
            other => return Err(field("objective", format!("unknown objective `{other}`"))),
        };
        let constraint = required(&self.constraint, "constraint")?;
        let variant = variant(&constraint).ok_or_else(|| {
            field(
                "constraint",
                format!("unknown constraint set `{constraint}`"),
            )
        })?;
        if objective == ObjectiveKind::DelayLimited && variant != ConstraintVariant::F4 {
            return Err(field(
                "constraint",
                "delay-limited capacity uses average limits only (F4)",
            ));
        }
        let n0 = self.n0.unwrap_or(1.0);
        if !(n0 > 0.0) || !n0.is_finite() {
            return Err(field("n0", "must be positive and finite"));
        }

        let p_pk = power(self.p_pk, self.p_pk_db, "p_pk")?;
        let p_av = power(self.p_av, self.p_av_db, "p_av")?;
        let q_pk = power(self.q_pk, self.q_pk_db, "q_pk")?;
        let q_av = power(self.q_av, self.q_av_db, "q_av")?;

        let sweep_name = required(&self.sweep, "sweep")?;
        let param = Param::parse(&sweep_name)
            .ok_or_else(|| field("sweep", format!("unknown parameter `{sweep_name}`")))?;
        let (tp, ip) = variant_params(variant);
        let given = |p: Param| match p {
            Param::PPk => p_pk,
            Param::PAv => p_av,
            Param::QPk => q_pk,
            Param::QAv => q_av,
            Param::R0 => self.r0,
        };
        for p in [Param::PPk, Param::PAv, Param::QPk, Param::QAv] {
            if p != tp && p != ip && given(p).is_some() {
                return Err(field(
                    p.as_str(),
                    format!("is not a limit of constraint set {variant}"),
                ));
            }
        }
        if param == Param::R0 {
            if objective != ObjectiveKind::Outage {
                return Err(field(
                    "sweep",
                    "`r0` can only be swept for the outage objective",
                ));
            }
        } else if param != tp && param != ip {
            return Err(field(
                "sweep",
                format!(
                    "`{}` is not a limit of constraint set {variant}",
                    param.as_str()
                ),
            ));
        }
        if given(param).is_some() {
            return Err(field(param.as_str(), "is swept and must not also be fixed"));
        }
        for p in [tp, ip] {
            if p != param && given(p).is_none() {
                return Err(field(
                    p.as_str(),
                    format!(
                        "is required by constraint set {variant} (use `inf` for an absent limit)"
                    ),
                ));
            }
        }

        let r0 = match objective {
            ObjectiveKind::Outage => {
                if param != Param::R0 {
                    let r0 = required(&self.r0, "r0")?;
                    if !(r0 > 0.0) || !r0.is_finite() {
                        return Err(field("r0", "must be positive and finite"));
                    }
                    Some(r0)
                } else {
                    None
                }
            }
            _ => {
                if self.r0.is_some() {
                    return Err(field("r0", "only applies to the outage objective"));
                }
                None
            }
        };

        let scale = match required(&self.sweep_scale, "sweep_scale")?.as_str() {
            "db" | "dB" => Scale::Db,
            "linear" => Scale::Linear,
            other => return Err(field("sweep_scale", format!("unknown scale `{other}`"))),
        };
        if param == Param::R0 && scale == Scale::Db {
            return Err(field("sweep_scale", "`r0` is swept on a linear scale"));
        }
        let from = required(&self.sweep_from, "sweep_from")?;
        let to = required(&self.sweep_to, "sweep_to")?;
        let step = required(&self.sweep_step, "sweep_step")?;
        if !from.is_finite() || !to.is_finite() {
            return Err(field("sweep_from", "sweep bounds must be finite"));
        }
        if to < from {
            return Err(field("sweep_to", "must not be below `sweep_from`"));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(field("sweep_step", "must be positive"));
        }
        let count = ((to - from) / step + 1e-9).floor() as usize + 1;
        if count > MAX_POINTS {
            return Err(field(
                "sweep_step",
                format!("gives {count} points, more than {MAX_POINTS}"),
            ));
        }
        let points: Vec<f64> = (0..count).map(|i| from + step * i as f64).collect();
        if scale == Scale::Linear && points.iter().any(|&x| !(x > 0.0)) {
            return Err(field("sweep_from", "linear sweeps must stay positive"));
        }

        let g0 = model(
            &required(&self.g0, "g0")?,
            self.g0_mean,
            self.g0_m,
            self.g0_sigma2,
            "g0",
        )?;
        let g1 = model(
            &required(&self.g1, "g1")?,
            self.g1_mean,
            self.g1_m,
            self.g1_sigma2,
            "g1",
        )?;

        let method = match &self.method {
            None => MethodKind::MonteCarlo,
            Some(s) => MethodKind::parse(s)
                .ok_or_else(|| field("method", format!("unknown method `{s}`")))?,
        };
        let samples = self.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples < 1000 {
            return Err(field("samples", "must be at least 1000"));
        }
        let nodes = self.nodes.unwrap_or(DEFAULT_NODES);
        if nodes < 16 {
            return Err(field("nodes", "must be at least 16"));
        }

        let closed_form = self.closed_form.unwrap_or(false);
        if closed_form {
            if objective != ObjectiveKind::Outage {
                return Err(field("closed_form", "only applies to the outage objective"));
            }
            if !matches!(variant, ConstraintVariant::F1 | ConstraintVariant::F2)
                || param == Param::PPk
                || p_pk != Some(f64::INFINITY)
            {
                return Err(field(
                    "closed_form",
                    "needs F1 or F2 with `p_pk = inf` (interference limit only)",
                ));
            }
            if g0.kind() != g1.kind() || g0.kind() == FadingKind::Constant {
                return Err(field(
                    "closed_form",
                    "needs g0 and g1 of the same fading kind",
                ));
            }
        }

        Ok(Scenario {
            name,
            objective,
            r0,
            variant,
            n0,
            p_pk,
            p_av,
            q_pk,
            q_av,
            g0,
            g1,
            sweep: Sweep {
                param,
                scale,
                points,
            },
            method,
            samples,
            nodes,
            seed,
            closed_form,
            source: self.clone(),
        })
    }
}

/// Reads, overrides and validates a scenario file.
pub fn load(path: &std::path::Path, overrides: &Overrides) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut file = parse(&text).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })?;
    overrides.apply(&mut file);
    file.validate().map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}
