//! Polar encoding over GF(2) and CRC concatenation.
//!
//! Bits are stored one per `u8` (0 or 1). Indexing is natural throughout, so
//! `x = u * F^{(x)n}` with `F = [[1, 0], [1, 1]]` and no bit reversal.

use crate::construction::PolarCodeSpec;
use crate::error::{invalid, Result};

pub type Bit = u8;

/// In-place butterfly evaluation of `u * F^{(x)n}`. The transform is its own
/// inverse.
pub fn polar_transform_in_place(bits: &mut [Bit]) -> Result<()> {
    let n = bits.len();
    if !n.is_power_of_two() {
        return Err(invalid(format!("polar transform length {n} is not a power of two")));
    }
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
    Ok(())
}

pub fn polar_transform(u: &[Bit]) -> Result<Vec<Bit>> {
    let mut x = u.to_vec();
    polar_transform_in_place(&mut x)?;
    Ok(x)
}

/// Transform for blocks of at most 32 bits packed LSB-first (bit `i` of the
/// word is element `i`).
#[inline]
pub(crate) fn polar_transform_word(mut w: u32, len: usize) -> u32 {
    // Masks select the lower element of each butterfly pair at each level.
    const MASKS: [u32; 5] = [0x5555_5555, 0x3333_3333, 0x0F0F_0F0F, 0x00FF_00FF, 0x0000_FFFF];
    let mut level = 0;
    while (1usize << level) < len {
        let half = 1u32 << level;
        w ^= (w >> half) & MASKS[level];
        level += 1;
    }
    w
}

/// CRC parameters: MSB-first shift register, zero initial value, no
/// reflection and no final XOR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrcConfig {
    pub width: u32,
    /// Generator polynomial without the leading `x^width` term.
    pub generator: u32,
}

/// CRC-24 with generator 0x864cfb.
pub const CRC24: CrcConfig = CrcConfig {
    width: 24,
    generator: 0x86_4cfb,
};

impl CrcConfig {
    fn mask(&self) -> u32 {
        if self.width == 32 {
            u32::MAX
        } else {
            (1 << self.width) - 1
        }
    }

    /// Remainder of `message * x^width` divided by the generator.
    pub fn compute(&self, message: &[Bit]) -> u32 {
        let top = self.width - 1;
        let mask = self.mask();
        message.iter().fold(0u32, |reg, &b| {
            let feedback = ((reg >> top) & 1) ^ u32::from(b & 1);
            let reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^ self.generator
            } else {
                reg
            }
        })
    }

    /// Checksum as `width` bits, MSB first.
    pub fn checksum_bits(&self, message: &[Bit]) -> Vec<Bit> {
        let crc = self.compute(message);
        (0..self.width).rev().map(|i| ((crc >> i) & 1) as Bit).collect()
    }

    /// `true` iff the trailing `width` bits are the checksum of the rest.
    pub fn check(&self, message_with_crc: &[Bit]) -> bool {
        let w = self.width as usize;
        if message_with_crc.len() < w {
            return false;
        }
        // Appending the checksum makes the full register run to zero.
        self.compute(message_with_crc) == 0
    }
}

pub fn crc24_compute(message: &[Bit]) -> u32 {
    CRC24.compute(message)
}

/// CRC used by a code with `crc_len` check bits; `None` when the CRC is off.
pub fn crc_for(crc_len: usize) -> Result<Option<CrcConfig>> {
    match crc_len {
        0 => Ok(None),
        24 => Ok(Some(CRC24)),
        r => Err(invalid(format!(
            "unsupported CRC length r={r}; only 0 and 24 are available"
        ))),
    }
}

/// Places payload and CRC on the information set; frozen bits are zero.
pub fn assemble_source_word(info: &[Bit], spec: &PolarCodeSpec) -> Result<Vec<Bit>> {
    if info.len() != spec.payload_len() {
        return Err(invalid(format!(
            "payload has {} bits but the code carries K - r = {}",
            info.len(),
            spec.payload_len()
        )));
    }
    let crc = crc_for(spec.crc_len())?;
    let mut u = vec![0; spec.block_len()];
    let checksum = crc.map(|c| c.checksum_bits(info)).unwrap_or_default();
    for (&pos, &bit) in spec.info_set().iter().zip(info.iter().chain(checksum.iter())) {
        u[pos] = bit;
    }
    Ok(u)
}

pub fn encode(info: &[Bit], spec: &PolarCodeSpec) -> Result<Vec<Bit>> {
    let mut u = assemble_source_word(info, spec)?;
    polar_transform_in_place(&mut u)?;
    Ok(u)
}

/// Reads the K information bits (payload followed by CRC) out of a source word.
pub fn info_bits(u: &[Bit], spec: &PolarCodeSpec) -> Vec<Bit> {
    spec.info_set().iter().map(|&i| u[i]).collect()
}

/// Payload of a decoded source word and whether its CRC passes. A code
/// without CRC always passes.
pub fn extract_payload(u: &[Bit], spec: &PolarCodeSpec) -> (Vec<Bit>, bool) {
    let bits = info_bits(u, spec);
    let pass = match crc_for(spec.crc_len()) {
        Ok(Some(crc)) => crc.check(&bits),
        Ok(None) => true,
        Err(_) => false,
    };
    let mut payload = bits;
    payload.truncate(spec.payload_len());
    (payload, pass)
}
