//! Polar code construction.
//!
//! Bit-channel reliabilities come from density evolution under the Gaussian
//! approximation over the BI-AWGN channel. All intermediate quantities are
//! tracked in the log domain so that very reliable bit-channels, whose error
//! probabilities underflow `f64`, still keep a strict ordering.

use std::fmt::Write as _;
use std::path::Path;

use statrs::function::erf::erfc;

use crate::error::{invalid, io_err, Result};

/// Largest supported tree depth.
pub const MAX_DEPTH: u32 = 20;

/// Per-bit error probabilities of the synthetic bit-channels under
/// genie-aided SC decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityProfile {
    pub n: u32,
    /// Design SNR as Es/N0 in dB.
    pub design_snr_db: f64,
    /// Error probability of each source bit, `pe[i] = Q(sqrt(mean_llr[i] / 2))`.
    pub pe: Vec<f64>,
    /// `ln(pe[i])`, finite even where `pe[i]` underflows to zero.
    pub ln_pe: Vec<f64>,
    /// Mean of the bit-channel LLR.
    pub mean_llr: Vec<f64>,
}

impl ReliabilityProfile {
    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    /// Bit indices from the most to the least reliable. Ties go to the
    /// larger index.
    pub fn reliability_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.block_len()).collect();
        order.sort_by(|&a, &b| self.ln_pe[a].total_cmp(&self.ln_pe[b]).then_with(|| b.cmp(&a)));
        order
    }
}

// Chung's approximation of the GA transfer function, in the log domain.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        -0.4527 * x.powf(0.86) + 0.0218
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

fn ln_phi_inv(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while ln_phi(hi) > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean LLR of the check-node (F) child given the parent mean.
fn ga_check_mean(mean: f64) -> f64 {
    // 1 - (1 - phi)^2 = phi * (2 - phi), evaluated without cancellation.
    let lp = ln_phi(mean);
    ln_phi_inv(lp + (2.0 - lp.exp()).ln())
}

/// `ln Q(x)` for the Gaussian tail function.
pub(crate) fn ln_q_function(x: f64) -> f64 {
    if x < 25.0 {
        (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        let x2 = x * x;
        -0.5 * x2 - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}

/// Density evolution by Gaussian approximation for a length-`2^n` code.
///
/// `design_snr_db` is Es/N0 of the BPSK-AWGN channel, so the channel LLR mean
/// is `4 * 10^(snr/10)`. Bit indices are natural (no bit reversal).
pub fn gaussian_approx_reliabilities(n: u32, design_snr_db: f64) -> Result<ReliabilityProfile> {
    if n < 1 {
        return Err(invalid("tree depth n must be at least 1"));
    }
    if n > MAX_DEPTH {
        return Err(invalid(format!("tree depth n={n} exceeds the limit of {MAX_DEPTH}")));
    }
    if !design_snr_db.is_finite() {
        return Err(invalid("design SNR must be finite"));
    }

    let mut means = vec![4.0 * 10f64.powf(design_snr_db / 10.0)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(means.len() * 2);
        for &mu in &means {
            next.push(ga_check_mean(mu));
            next.push(2.0 * mu);
        }
        means = next;
    }

    let ln_pe: Vec<f64> = means.iter().map(|&mu| ln_q_function((mu / 2.0).sqrt())).collect();
    let pe = ln_pe.iter().map(|lp| lp.exp()).collect();
    Ok(ReliabilityProfile {
        n,
        design_snr_db,
        pe,
        ln_pe,
        mean_llr: means,
    })
}

/// Code dimensions together with the information and frozen sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarCodeSpec {
    n: u32,
    k: usize,
    crc_len: usize,
    info_set: Vec<usize>,
    frozen: Vec<bool>,
}

impl PolarCodeSpec {
    /// Builds a spec from an explicit information set.
    pub fn from_info_set(n: u32, crc_len: usize, mut info_set: Vec<usize>) -> Result<Self> {
        if n > MAX_DEPTH {
            return Err(invalid(format!("tree depth n={n} exceeds the limit of {MAX_DEPTH}")));
        }
        let block_len = 1usize << n;
        info_set.sort_unstable();
        if info_set.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("information set contains duplicate indices"));
        }
        if let Some(&last) = info_set.last() {
            if last >= block_len {
                return Err(invalid(format!(
                    "information index {last} out of range for N={block_len}"
                )));
            }
        }
        let k = info_set.len();
        if crc_len > 0 && crc_len >= k {
            return Err(invalid(format!("CRC length r={crc_len} must be smaller than K={k}")));
        }
        let mut frozen = vec![true; block_len];
        for &i in &info_set {
            frozen[i] = false;
        }
        Ok(Self {
            n,
            k,
            crc_len,
            info_set,
            frozen,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    /// Number of information bits K, CRC bits included.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn crc_len(&self) -> usize {
        self.crc_len
    }

    /// Payload length `K - r`.
    pub fn payload_len(&self) -> usize {
        self.k - self.crc_len
    }

    /// Information set A, ascending.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    /// Frozen mask indexed by source bit; `true` marks A^c.
    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.block_len()).filter(|&i| self.frozen[i]).collect()
    }

    /// Effective rate `(K - r) / N`.
    pub fn rate(&self) -> f64 {
        self.payload_len() as f64 / self.block_len() as f64
    }
}

/// Picks the `k` most reliable bits as the information set.
pub fn build_code_spec(profile: &ReliabilityProfile, k: usize, crc_len: usize) -> Result<PolarCodeSpec> {
    let block_len = profile.block_len();
    if k > block_len {
        return Err(invalid(format!("K={k} exceeds N={block_len}")));
    }
    let info: Vec<usize> = profile.reliability_order().into_iter().take(k).collect();
    PolarCodeSpec::from_info_set(profile.n, crc_len, info)
}

/// Split of the information set into bits that expand the list (`A_u`) and
/// bits that are resolved without expansion (`A_r`).
#[derive(Debug, Clone, PartialEq)]
pub struct SePartition {
    pub eta: f64,
    pub unreliable: Vec<usize>,
    pub reliable: Vec<usize>,
}

impl SePartition {
    /// Every information bit expands.
    pub fn all_unreliable(spec: &PolarCodeSpec) -> Self {
        Self {
            eta: 0.0,
            unreliable: spec.info_set().to_vec(),
            reliable: Vec::new(),
        }
    }

    /// Role of every source bit, indexed by bit position.
    pub fn roles(&self, spec: &PolarCodeSpec) -> Vec<LeafRole> {
        let mut roles = vec![LeafRole::Frozen; spec.block_len()];
        for &i in &self.unreliable {
            roles[i] = LeafRole::Unreliable;
        }
        for &i in &self.reliable {
            roles[i] = LeafRole::Reliable;
        }
        roles
    }

    /// Checks that the partition covers exactly the information set of `spec`.
    pub fn validate(&self, spec: &PolarCodeSpec) -> Result<()> {
        let mut all: Vec<usize> = self.unreliable.iter().chain(&self.reliable).copied().collect();
        all.sort_unstable();
        if all != spec.info_set() {
            return Err(invalid(
                "selective-expansion partition does not match the information set",
            ));
        }
        Ok(())
    }
}

/// What a source bit is inside a subtree block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeafRole {
    Frozen,
    Unreliable,
    Reliable,
}

/// Relative threshold cut: `i` is unreliable iff `pe[i] >= eta * max_{j in A} pe[j]`.
pub fn partition_selective_expansion(
    spec: &PolarCodeSpec,
    profile: &ReliabilityProfile,
    eta: f64,
) -> Result<SePartition> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("eta={eta} must lie in [0, 1]")));
    }
    if profile.block_len() != spec.block_len() {
        return Err(invalid("reliability profile and code spec have different lengths"));
    }
    let info = spec.info_set();
    let max_ln = info.iter().map(|&i| profile.ln_pe[i]).fold(f64::NEG_INFINITY, f64::max);
    let cut = eta.ln() + max_ln;
    let (unreliable, reliable) = info.iter().partition(|&&i| profile.ln_pe[i] >= cut);
    Ok(SePartition {
        eta,
        unreliable,
        reliable,
    })
}

/// Role counts of one `2^m`-leaf block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubtreeCounts {
    pub leaves: usize,
    pub unreliable: usize,
    pub reliable: usize,
    pub frozen: usize,
}

pub fn subtree_profile(spec: &PolarCodeSpec, part: &SePartition, m: u32) -> Result<Vec<SubtreeCounts>> {
    if m > spec.n() {
        return Err(invalid(format!("subtree depth m={m} exceeds n={}", spec.n())));
    }
    let roles = part.roles(spec);
    Ok(roles
        .chunks(1 << m)
        .map(|block| {
            let mut c = SubtreeCounts {
                leaves: block.len(),
                unreliable: 0,
                reliable: 0,
                frozen: 0,
            };
            for role in block {
                match role {
                    LeafRole::Frozen => c.frozen += 1,
                    LeafRole::Unreliable => c.unreliable += 1,
                    LeafRole::Reliable => c.reliable += 1,
                }
            }
            c
        })
        .collect())
}

/// Plain-text `key = value` record of a constructed code, sufficient to
/// reproduce a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpecFile {
    pub spec: PolarCodeSpec,
    pub design_snr_db: f64,
    pub eta: f64,
}

impl CodeSpecFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.spec.n());
        let _ = writeln!(out, "K = {}", self.spec.k());
        let _ = writeln!(out, "r = {}", self.spec.crc_len());
        let _ = writeln!(out, "design_snr_db = {}", self.design_snr_db);
        let _ = writeln!(out, "eta = {}", self.eta);
        let list: Vec<String> = self.spec.info_set().iter().map(usize::to_string).collect();
        let _ = writeln!(out, "info_set = {}", list.join(","));
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let kv = crate::kv::KeyValues::parse(text, path)?;
        let n: u32 = kv.require("n")?;
        let k: usize = kv.require("K")?;
        let r: usize = kv.require("r")?;
        let design_snr_db: f64 = kv.require("design_snr_db")?;
        let eta: f64 = kv.require("eta")?;
        let info: Vec<usize> = kv.require_list("info_set")?;
        kv.reject_unknown()?;
        if info.len() != k {
            return Err(invalid(format!("info_set has {} entries but K={k}", info.len())));
        }
        let spec = PolarCodeSpec::from_info_set(n, r, info)?;
        Ok(Self {
            spec,
            design_snr_db,
            eta,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(io_err(path))
    }
}

impl From<CodeSpecFile> for PolarCodeSpec {
    fn from(f: CodeSpecFile) -> Self {
        f.spec
    }
}
