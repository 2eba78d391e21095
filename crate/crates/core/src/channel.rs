//! BPSK over block-fading channels with perfect CSI at the receiver.
//!
//! SNR convention: `ebn0_db` is Eb/N0 per information bit. With unit symbol
//! energy the noise variance is `1 / (2 r γb)`, so different-rate codes are
//! compared at equal energy per information bit.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use thiserror::Error;

use crate::gf2::BitVector;
use crate::lifting::LiftedCode;
use crate::protograph::Rate;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("Nakagami shape must be at least 0.5, got {0}")]
    InvalidShape(f64),
    #[error("code rate must lie in (0, 1], got {0}")]
    InvalidRate(Rate),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fading {
    Nakagami { m: f64 },
    Rayleigh,
    AwgnOnly,
}

impl Fading {
    pub fn nakagami(m: f64) -> Result<Self, ChannelError> {
        if m.is_nan() || m < 0.5 {
            return Err(ChannelError::InvalidShape(m));
        }
        Ok(Fading::Nakagami { m })
    }

    /// Nakagami shape parameter, `None` for the no-fading channel.
    pub fn shape(&self) -> Option<f64> {
        match *self {
            Fading::Nakagami { m } => Some(m),
            Fading::Rayleigh => Some(1.0),
            Fading::AwgnOnly => None,
        }
    }

    /// Draws one fading power `α²` with unit mean.
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.shape() {
            Some(m) => Gamma::new(m, 1.0 / m)
                .expect("validated Nakagami shape")
                .sample(rng),
            None => 1.0,
        }
    }
}

impl std::fmt::Display for Fading {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fading::Nakagami { m } => write!(f, "nakagami({m})"),
            Fading::Rayleigh => f.write_str("rayleigh"),
            Fading::AwgnOnly => f.write_str("awgn"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelConfig {
    pub fading: Fading,
    pub ebn0_db: f64,
    pub rate: Rate,
}

impl ChannelConfig {
    pub fn new(fading: Fading, ebn0_db: f64, rate: Rate) -> Result<Self, ChannelError> {
        if let Some(m) = fading.shape() {
            if m.is_nan() || m < 0.5 {
                return Err(ChannelError::InvalidShape(m));
            }
        }
        if *rate.numer() == 0 || rate > Rate::from_integer(1) {
            return Err(ChannelError::InvalidRate(rate));
        }
        Ok(Self {
            fading,
            ebn0_db,
            rate,
        })
    }

    /// Linear Eb/N0.
    pub fn gamma_b(&self) -> f64 {
        10f64.powf(self.ebn0_db / 10.0)
    }

    pub fn rate_f64(&self) -> f64 {
        *self.rate.numer() as f64 / *self.rate.denom() as f64
    }

    /// Per-symbol SNR `1/σ² = 2 r γb`. Infinite Eb/N0 gives a noiseless channel.
    pub fn symbol_snr(&self) -> f64 {
        2.0 * self.rate_f64() * self.gamma_b()
    }

    pub fn noise_var(&self) -> f64 {
        1.0 / self.symbol_snr()
    }

    /// Same channel with the SNR shifted by `offset_db`.
    pub fn with_offset(&self, offset_db: f64) -> Self {
        Self {
            ebn0_db: self.ebn0_db + offset_db,
            ..*self
        }
    }

    /// Draws gains for `num_blocks` blocks.
    pub fn realize<T: Real, R: Rng + ?Sized>(
        &self,
        num_blocks: usize,
        rng: &mut R,
    ) -> ChannelRealization<T> {
        ChannelRealization {
            gains: sample_fading(self.fading, num_blocks, rng),
            noise_var: T::lit(self.noise_var()),
        }
    }
}

/// Fading amplitudes for one transmission period plus the noise variance.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization<T> {
    pub gains: Vec<T>,
    pub noise_var: T,
}

/// Independent amplitudes `α = sqrt(g)`, `g ~ Gamma(m, 1/m)`.
pub fn sample_fading<T: Real, R: Rng + ?Sized>(
    fading: Fading,
    num_gains: usize,
    rng: &mut R,
) -> Vec<T> {
    (0..num_gains)
        .map(|_| T::lit(fading.sample_power(rng).sqrt()))
        .collect()
}

/// BPSK (`0 -> +1`, `1 -> -1`) through the per-block gains plus Gaussian noise.
pub fn transmit<T: Real, R: Rng + ?Sized>(
    x: &BitVector,
    block_map: &[usize],
    real: &ChannelRealization<T>,
    rng: &mut R,
) -> Vec<T> {
    assert_eq!(x.len(), block_map.len(), "block map must cover every bit");
    let sigma = real.noise_var.sqrt();
    let mut y = Vec::with_capacity(x.len());
    transmit_into(x.iter(), block_map, real, sigma, rng, &mut y);
    y
}

/// Transmits only the bits at `positions`, returning their received values.
pub fn transmit_positions<T: Real, R: Rng + ?Sized>(
    x: &BitVector,
    positions: &[usize],
    gain: T,
    noise_var: T,
    rng: &mut R,
) -> Vec<T> {
    let sigma = noise_var.sqrt();
    positions
        .iter()
        .map(|&p| {
            let s = if x.get(p) { -T::one() } else { T::one() };
            gain * s + sigma * T::standard_normal(rng)
        })
        .collect()
}

fn transmit_into<T: Real, R: Rng + ?Sized>(
    bits: impl Iterator<Item = bool>,
    block_map: &[usize],
    real: &ChannelRealization<T>,
    sigma: T,
    rng: &mut R,
    out: &mut Vec<T>,
) {
    for (bit, &b) in bits.zip(block_map) {
        let s = if bit { -T::one() } else { T::one() };
        out.push(real.gains[b] * s + sigma * T::standard_normal(rng));
    }
}

/// Channel LLR `2 α y / σ²`, positive favouring bit 0.
pub fn llr_value<T: Real>(y: T, gain: T, noise_var: T) -> T {
    if noise_var > T::zero() {
        return T::lit(2.0) * gain * y / noise_var;
    }
    let v = gain * y;
    if v > T::zero() {
        T::infinity()
    } else if v < T::zero() {
        T::neg_infinity()
    } else {
        T::zero()
    }
}

pub fn llrs<T: Real>(received: &[T], block_map: &[usize], real: &ChannelRealization<T>) -> Vec<T> {
    assert_eq!(received.len(), block_map.len());
    received
        .iter()
        .zip(block_map)
        .map(|(&y, &b)| llr_value(y, real.gains[b], real.noise_var))
        .collect()
}

/// Bit-to-block map for point-to-point transmission: one fading block per
/// base-matrix block.
pub fn block_map_p2p(code: &LiftedCode) -> Vec<usize> {
    code.block_map().to_vec()
}
