//! BPSK over AWGN and LLR quantization.
//!
//! The mapping is bit 0 -> +1, bit 1 -> -1, so a positive LLR favours 0.
//! SNR values are Es/N0 per BPSK symbol unless a [`SnrConvention`] says
//! otherwise: `sigma^2 = 1 / (2 * 10^(snr_db / 10))`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::codec::Bit;
use crate::error::{invalid, Error, Result};

/// Received samples together with the noise level that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelObservation {
    pub y: Vec<f64>,
    pub sigma: f64,
}

/// How an SNR axis value in dB is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrConvention {
    /// Energy per transmitted BPSK symbol over N0.
    #[default]
    EsN0,
    /// Energy per payload bit over N0, `Es/N0 = Eb/N0 + 10 log10(R)`.
    EbN0,
}

impl SnrConvention {
    /// Converts an axis value to Es/N0 in dB for a code of effective rate `rate`.
    pub fn to_es_n0_db(self, snr_db: f64, rate: f64) -> f64 {
        match self {
            SnrConvention::EsN0 => snr_db,
            SnrConvention::EbN0 => snr_db + 10.0 * rate.log10(),
        }
    }

    pub fn from_es_n0_db(self, es_n0_db: f64, rate: f64) -> f64 {
        match self {
            SnrConvention::EsN0 => es_n0_db,
            SnrConvention::EbN0 => es_n0_db - 10.0 * rate.log10(),
        }
    }
}

impl FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "esn0" | "es/n0" => Ok(Self::EsN0),
            "ebn0" | "eb/n0" => Ok(Self::EbN0),
            other => Err(invalid(format!("unknown SNR convention `{other}`"))),
        }
    }
}

impl fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SnrConvention::EsN0 => "esn0",
            SnrConvention::EbN0 => "ebn0",
        })
    }
}

/// Noise standard deviation for an Es/N0 in dB. `+inf` gives a noiseless channel.
pub fn noise_sigma(es_n0_db: f64) -> f64 {
    (1.0 / (2.0 * 10f64.powf(es_n0_db / 10.0))).sqrt()
}

/// Modulates `x` and adds white Gaussian noise drawn from `rng`.
pub fn bpsk_awgn_with<R: Rng + ?Sized>(x: &[Bit], es_n0_db: f64, rng: &mut R) -> ChannelObservation {
    let sigma = noise_sigma(es_n0_db);
    let y = x
        .iter()
        .map(|&b| {
            let s = if b == 0 { 1.0 } else { -1.0 };
            if sigma > 0.0 {
                s + sigma * rng.sample::<f64, _>(StandardNormal)
            } else {
                s
            }
        })
        .collect();
    ChannelObservation { y, sigma }
}

/// Seeded variant: identical seeds give identical observations.
pub fn bpsk_awgn(x: &[Bit], es_n0_db: f64, seed: u64) -> ChannelObservation {
    bpsk_awgn_with(x, es_n0_db, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Exact BPSK-AWGN LLRs, `2 y / sigma^2`.
pub fn channel_llr(obs: &ChannelObservation) -> Result<Vec<f64>> {
    if !(obs.sigma > 0.0) {
        return Err(invalid("channel LLRs need a positive noise level"));
    }
    let k = 2.0 / (obs.sigma * obs.sigma);
    Ok(obs.y.iter().map(|&y| k * y).collect())
}

/// Saturation bounds of a `q`-bit two's-complement value.
#[inline]
pub fn fixed_range(q: u32) -> (i32, i32) {
    let max = (1i32 << (q - 1)) - 1;
    (-max - 1, max)
}

/// `round(llr * scale)` (half away from zero) saturated to `q` bits.
pub fn quantize_llr(llr: f64, q: u32, scale: f64) -> i32 {
    let (lo, hi) = fixed_range(q);
    let v = (llr * scale).round();
    if v.is_nan() {
        0
    } else {
        v.clamp(f64::from(lo), f64::from(hi)) as i32
    }
}
