//! BI-AWGN channel: BPSK mapping, Gaussian noise and LLRs.
//!
//! Unit-energy BPSK (`0 → +1`, `1 → −1`) with noise variance `1/snr`, so the
//! channel LLR `2·snr·y` has variance `4·snr` given the input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Linear SNR; `f64::INFINITY` gives a noiseless channel.
    pub snr: f64,
    pub rng_seed: u64,
}

impl ChannelParams {
    pub fn linear(snr: f64, rng_seed: u64) -> Result<Self> {
        if snr.is_nan() || snr <= 0.0 {
            return Err(Error::Domain(format!("snr must be positive, got {snr}")));
        }
        Ok(Self { snr, rng_seed })
    }

    pub fn from_db(snr_db: f64, rng_seed: u64) -> Result<Self> {
        Self::linear(db_to_linear(snr_db), rng_seed)
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr.log10()
    }

    pub fn noise_var(&self) -> f64 {
        1.0 / self.snr
    }

    pub fn rng(&self) -> SplitMix64 {
        SplitMix64::new(self.rng_seed)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn modulate(x: &[u8]) -> Vec<f64> {
    x.iter()
        .map(|&b| if b & 1 == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// Hard decision back to bits; zero maps to bit 0.
pub fn demodulate(y: &[f64]) -> Vec<u8> {
    y.iter().map(|&v| (v < 0.0) as u8).collect()
}

pub fn add_noise(symbols: &[f64], params: &ChannelParams, rng: &mut SplitMix64) -> Vec<f64> {
    if params.snr.is_infinite() {
        return symbols.to_vec();
    }
    let sd = params.noise_var().sqrt();
    symbols.iter().map(|&s| s + sd * rng.normal()).collect()
}

/// `log P(y|0) − log P(y|1) = 2·snr·y`.
pub fn llr_map(y: &[f64], params: &ChannelParams) -> Vec<f64> {
    y.iter()
        .map(|&v| if v == 0.0 { 0.0 } else { 2.0 * params.snr * v })
        .collect()
}
