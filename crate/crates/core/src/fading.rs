//! Channel power-gain distributions.
//!
//! A [`FadingModel`] describes the law of one power gain: the SU-Tx to PU-Rx
//! link `g0` or the SU link `g1`. The two links are always drawn
//! independently. Every model carries a `scale` which is the mean gain for
//! constant, Rayleigh and Nakagami channels. For log-normal shadowing the
//! gain is `scale * e^X` with `X ~ Normal(0, sigma2)`, so its mean is
//! `scale * e^{sigma2 / 2}`; unit scale therefore does not mean unit mean
//! there.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::specfun;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingKind {
    Constant,
    Rayleigh,
    /// Nakagami-m power gain, Gamma distributed with shape `m`.
    Nakagami {
        m: f64,
    },
    /// Log-normal shadowing with log-domain variance `sigma2`.
    LogNormal {
        sigma2: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingModel {
    kind: FadingKind,
    scale: f64,
}

impl FadingModel {
    pub fn new(kind: FadingKind, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::invalid("mean_gain", "must be positive and finite"));
        }
        match kind {
            FadingKind::Nakagami { m } if !(m >= 1.0) || !m.is_finite() => {
                return Err(Error::invalid("m", "Nakagami shape must satisfy m >= 1"));
            }
            FadingKind::LogNormal { sigma2 } if !(sigma2 > 0.0) || !sigma2.is_finite() => {
                return Err(Error::invalid("sigma2", "must be positive"));
            }
            _ => {}
        }
        Ok(FadingModel { kind, scale })
    }

    /// Non-fading (AWGN) link with a fixed gain.
    pub fn constant(gain: f64) -> Result<Self> {
        Self::new(FadingKind::Constant, gain)
    }

    /// Unit-mean Rayleigh fading (exponential power gain).
    pub fn rayleigh() -> Self {
        FadingModel {
            kind: FadingKind::Rayleigh,
            scale: 1.0,
        }
    }

    /// Unit-mean Nakagami-m fading.
    pub fn nakagami(m: f64) -> Result<Self> {
        Self::new(FadingKind::Nakagami { m }, 1.0)
    }

    /// Unit-scale log-normal shadowing `e^X`, `X ~ Normal(0, sigma2)`.
    pub fn lognormal(sigma2: f64) -> Result<Self> {
        Self::new(FadingKind::LogNormal { sigma2 }, 1.0)
    }

    pub fn with_scale(self, scale: f64) -> Result<Self> {
        Self::new(self.kind, scale)
    }

    pub fn kind(&self) -> FadingKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            FadingKind::LogNormal { sigma2 } => self.scale * (0.5 * sigma2).exp(),
            _ => self.scale,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let unit = match self.kind {
            FadingKind::Constant => 1.0,
            FadingKind::Rayleigh => {
                let e: f64 = Exp1.sample(rng);
                e
            }
            FadingKind::Nakagami { m } => {
                // shape and scale already validated
                Gamma::new(m, 1.0 / m).expect("valid gamma").sample(rng)
            }
            FadingKind::LogNormal { sigma2 } => {
                let z: f64 = StandardNormal.sample(rng);
                (sigma2.sqrt() * z).exp()
            }
        };
        self.scale * unit
    }

    /// Inverse CDF of the gain, used by the tensor-product quadrature.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain {
                func: "FadingModel::quantile",
                arg: u,
            });
        }
        let unit = match self.kind {
            FadingKind::Constant => 1.0,
            FadingKind::Rayleigh => -(-u).ln_1p(),
            FadingKind::Nakagami { m } => specfun::gamma_quantile(m, u)? / m,
            FadingKind::LogNormal { sigma2 } => (sigma2.sqrt() * specfun::norm_quantile(u)?).exp(),
        };
        Ok(self.scale * unit)
    }
}

/// Instantaneous power gains of one fading block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    /// SU-Tx to PU-Rx gain.
    pub g0: f64,
    /// SU-Tx to SU-Rx gain.
    pub g1: f64,
}

impl ChannelState {
    pub fn new(g0: f64, g1: f64) -> Result<Self> {
        if !(g0 >= 0.0) || !(g1 >= 0.0) {
            return Err(Error::invalid("ChannelState", "gains must be nonnegative"));
        }
        Ok(ChannelState { g0, g1 })
    }
}

/// Identifies a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// ChaCha8 generator on sub-stream `sub` of this stream.
    pub fn rng(&self, sub: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id.wrapping_mul(2).wrapping_add(sub));
        rng
    }
}

/// Draws `n` independent channel states.
///
/// `g0` and `g1` use separate sub-streams, so changing the `g0` model
/// leaves the `g1` draws untouched.
pub fn sample_pair(
    m0: &FadingModel,
    m1: &FadingModel,
    rng: RngStream,
    n: usize,
) -> Vec<ChannelState> {
    let mut r0 = rng.rng(0);
    let mut r1 = rng.rng(1);
    (0..n)
        .map(|_| ChannelState {
            g0: m0.sample(&mut r0),
            g1: m1.sample(&mut r1),
        })
        .collect()
}

// Ratio g0/g1 = (s0/s1) R where R is the ratio of the unit-scale gains.
fn ratio_params(m0: &FadingModel, m1: &FadingModel) -> Result<(FadingKind, f64)> {
    if m0.kind != m1.kind {
        return Err(Error::Unsupported(format!(
            "ratio distribution of {:?} over {:?}",
            m0.kind, m1.kind
        )));
    }
    if m0.kind == FadingKind::Constant {
        return Err(Error::Unsupported("ratio density of constant gains".into()));
    }
    Ok((m0.kind, m0.scale / m1.scale))
}

/// Density of `g0 / g1` at `x` for independent gains of the same kind.
pub fn ratio_pdf(m0: &FadingModel, m1: &FadingModel, x: f64) -> Result<f64> {
    let (kind, s) = ratio_params(m0, m1)?;
    if !(x >= 0.0) {
        return Err(Error::Domain {
            func: "ratio_pdf",
            arg: x,
        });
    }
    let y = x / s;
    let unit = match kind {
        FadingKind::Rayleigh => 1.0 / ((y + 1.0) * (y + 1.0)),
        FadingKind::Nakagami { m } => {
            if y == 0.0 {
                if m == 1.0 {
                    1.0
                } else {
                    0.0
                }
            } else if y.is_infinite() {
                0.0
            } else {
                let ln_b = specfun::ln_gamma(m)? * 2.0 - specfun::ln_gamma(2.0 * m)?;
                ((m - 1.0) * y.ln() - 2.0 * m * y.ln_1p() - ln_b).exp()
            }
        }
        FadingKind::LogNormal { sigma2 } => {
            if y == 0.0 || y.is_infinite() {
                0.0
            } else {
                let var = 2.0 * sigma2;
                let ly = y.ln();
                (-ly * ly / (2.0 * var)).exp() / ((2.0 * PI * var).sqrt() * y)
            }
        }
        FadingKind::Constant => unreachable!(),
    };
    Ok(unit / s)
}

/// CDF of `g0 / g1`, i.e. `Pr{g0 / g1 <= x}`.
pub fn ratio_cdf(m0: &FadingModel, m1: &FadingModel, x: f64) -> Result<f64> {
    let (kind, s) = ratio_params(m0, m1)?;
    if !(x >= 0.0) {
        return Err(Error::Domain {
            func: "ratio_cdf",
            arg: x,
        });
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let y = x / s;
    let v = match kind {
        FadingKind::Rayleigh => y / (1.0 + y),
        FadingKind::Nakagami { m } => {
            if y == 0.0 {
                0.0
            } else {
                y.powf(m) / (m * specfun::beta(m, m)?) * specfun::hyp2f1(2.0 * m, m, m + 1.0, -y)?
            }
        }
        FadingKind::LogNormal { sigma2 } => {
            if y == 0.0 {
                0.0
            } else {
                0.5 * specfun::erfc(-y.ln() / (2.0 * sigma2.sqrt()))
            }
        }
        FadingKind::Constant => unreachable!(),
    };
    Ok(v.clamp(0.0, 1.0))
}

/// `E[1 / g1]`, with `f64::INFINITY` standing for a divergent moment.
pub fn moment_inverse_g1(m1: &FadingModel) -> Result<f64> {
    let unit = match m1.kind {
        FadingKind::Constant => 1.0,
        FadingKind::Rayleigh => f64::INFINITY,
        FadingKind::Nakagami { m } => {
            if m == 1.0 {
                return Err(Error::UndefinedMoment("E[1/g1] for Nakagami m = 1"));
            }
            m / (m - 1.0)
        }
        FadingKind::LogNormal { sigma2 } => (0.5 * sigma2).exp(),
    };
    Ok(unit / m1.scale)
}

/// `E[g0 / g1]` for independent gains.
pub fn moment_ratio(m0: &FadingModel, m1: &FadingModel) -> Result<f64> {
    Ok(m0.mean() * moment_inverse_g1(m1)?)
}
