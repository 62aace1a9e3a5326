//! Modulation, power normalization, noise channels and channel LLRs.
//!
//! SNR convention: unit average symbol energy, `σ = 10^(−SNR_dB / 20)`.
//! Codewords are scaled to ‖x‖² = n so BPSK and real-valued neural
//! codewords face the same per-symbol noise.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bits::{bpsk, BitWord};
use crate::error::{Error, Result};

pub fn snr_to_sigma(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

pub fn sigma_to_snr(sigma: f64) -> f64 {
    -20.0 * sigma.log10()
}

/// Channel effect on one symbol: `y = gain · x + noise`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolDraw {
    pub gain: f64,
    pub noise: f64,
    /// Whether the burst component was active (bursty channel only).
    pub burst: bool,
}

/// Real channel input with energy n.
#[derive(Clone, Debug, PartialEq)]
pub struct RealCodeword(Vec<f64>);

impl RealCodeword {
    /// BPSK image of a binary word; already has energy n.
    pub fn from_bits(w: &BitWord) -> Self {
        Self(bpsk(w))
    }

    /// Rescales a nonzero real word to √n · c / ‖c‖₂.
    pub fn normalize(c: &[f64]) -> Result<Self> {
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero or non-finite word".into()));
        }
        let scale = (c.len() as f64).sqrt() / norm;
        Ok(Self(c.iter().map(|x| x * scale).collect()))
    }

    /// Wraps symbols that already satisfy the power constraint.
    pub(crate) fn from_normalized(symbols: Vec<f64>) -> Self {
        Self(symbols)
    }

    pub fn symbols(&self) -> &[f64] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<f64> {
        self.0
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Input accepted by [`modulate_normalize`].
pub enum ChannelInput<'a> {
    Bits(&'a BitWord),
    Real(&'a [f64]),
}

pub fn modulate_normalize(input: ChannelInput<'_>) -> Result<RealCodeword> {
    match input {
        ChannelInput::Bits(w) => Ok(RealCodeword::from_bits(w)),
        ChannelInput::Real(c) => RealCodeword::normalize(c),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    /// y = x + n, n ~ N(0, σ²).
    Awgn { sigma: f64 },
    /// y_i = a_i x_i + n_i with Rayleigh a_i, E[a²] = 1. The receiver does
    /// not see a_i.
    RayleighFast { sigma: f64 },
    /// y_i = x_i + n_i + w_i, w_i ~ N(0, σ_b²) with probability ρ_b, else 0.
    Bursty { sigma: f64, burst_prob: f64, burst_sigma: f64 },
}

/// Default burst probability for the bursty channel.
pub const DEFAULT_BURST_PROB: f64 = 0.1;
/// Default ratio σ_b / σ for the bursty channel.
pub const DEFAULT_BURST_SIGMA_MULT: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
    Bursty,
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "awgn" => Ok(Self::Awgn),
            "rayleigh" => Ok(Self::Rayleigh),
            "bursty" => Ok(Self::Bursty),
            other => Err(Error::InvalidParameter(format!("unknown channel {other:?}"))),
        }
    }
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Rayleigh => "rayleigh",
            ChannelKind::Bursty => "bursty",
        }
    }
}

impl ChannelModel {
    pub fn awgn(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self::Awgn { sigma })
    }

    pub fn rayleigh(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self::RayleighFast { sigma })
    }

    pub fn bursty(sigma: f64, burst_prob: f64, burst_sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        check_sigma(burst_sigma)?;
        if !(0.0..=1.0).contains(&burst_prob) {
            return Err(Error::InvalidParameter(format!("burst probability {burst_prob} outside [0, 1]")));
        }
        Ok(Self::Bursty { sigma, burst_prob, burst_sigma })
    }

    /// Builds a channel of the given family at `snr_db`; the burst noise
    /// deviation is `burst_sigma_mult · σ`.
    pub fn at_snr(kind: ChannelKind, snr_db: f64, burst_prob: f64, burst_sigma_mult: f64) -> Result<Self> {
        let sigma = snr_to_sigma(snr_db);
        match kind {
            ChannelKind::Awgn => Self::awgn(sigma),
            ChannelKind::Rayleigh => Self::rayleigh(sigma),
            ChannelKind::Bursty => Self::bursty(sigma, burst_prob, burst_sigma_mult * sigma),
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            ChannelModel::Awgn { sigma } | ChannelModel::RayleighFast { sigma } | ChannelModel::Bursty { sigma, .. } => {
                sigma
            }
        }
    }

    pub fn kind(&self) -> ChannelKind {
        match self {
            ChannelModel::Awgn { .. } => ChannelKind::Awgn,
            ChannelModel::RayleighFast { .. } => ChannelKind::Rayleigh,
            ChannelModel::Bursty { .. } => ChannelKind::Bursty,
        }
    }

    /// Draws the channel effect on one symbol. Draw order is fixed: the
    /// thermal normal, then the fading coefficient (two normals) or the burst
    /// indicator (uniform, then the burst normal if active).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SymbolDraw {
        let n: f64 = rng.sample(StandardNormal);
        match *self {
            ChannelModel::Awgn { sigma } => SymbolDraw { gain: 1.0, noise: sigma * n, burst: false },
            ChannelModel::RayleighFast { sigma } => {
                SymbolDraw { gain: rayleigh_coefficient(rng), noise: sigma * n, burst: false }
            }
            ChannelModel::Bursty { sigma, burst_prob, burst_sigma } => {
                let mut noise = sigma * n;
                let burst = rng.random::<f64>() < burst_prob;
                if burst {
                    let b: f64 = rng.sample(StandardNormal);
                    noise += burst_sigma * b;
                }
                SymbolDraw { gain: 1.0, noise, burst }
            }
        }
    }

    /// `(gain, additive)` such that `y = gain · x + additive`.
    pub fn draw_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let d = self.draw(rng);
        (d.gain, d.noise)
    }

    /// Corrupts `x` in place, symbol by symbol in order.
    pub fn corrupt_in_place<R: Rng + ?Sized>(&self, x: &mut [f64], rng: &mut R) {
        for xi in x.iter_mut() {
            let (a, w) = self.draw_symbol(rng);
            *xi = a * *xi + w;
        }
    }

    pub fn transmit<R: Rng + ?Sized>(&self, x: &RealCodeword, rng: &mut R) -> Vec<f64> {
        let mut y = x.symbols().to_vec();
        self.corrupt_in_place(&mut y, rng);
        y
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("noise deviation {sigma} must be positive and finite")))
    }
}

/// Rayleigh sample with scale 1/√2, so that E[a²] = 1.
pub fn rayleigh_coefficient<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    ((g1 * g1 + g2 * g2) * 0.5).sqrt()
}

/// AWGN channel LLRs, 2y/σ². Positive values favour bit 0.
pub fn channel_llr(y: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("σ = {sigma} must be positive")));
    }
    let scale = 2.0 / (sigma * sigma);
    Ok(y.iter().map(|v| scale * v).collect())
}
