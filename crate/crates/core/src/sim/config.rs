//! Simulation configuration as plain `key = value` text.
//!
//! ```text
//! n = 10
//! K = 512
//! r = 24
//! decoder = lclm        # sc | lscd | lclm
//! L = 8
//! m = 2
//! eta = 0.3
//! quant = fixed         # float | fixed
//! snr_db = 1.5, 2.0, 2.5
//! snr_convention = ebn0
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::arith::FixedPoint;
use crate::channel::SnrConvention;
use crate::construction::{
    build_code_spec, gaussian_approx_reliabilities, partition_selective_expansion, PolarCodeSpec, SePartition,
};
use crate::decoder::{DecoderKind, MAX_SUBTREE_DEPTH};
use crate::error::{invalid, io_err, Error, Result};
use crate::kv::KeyValues;
use crate::latency::{pfsg_lscd_latency, unreliable_per_block, ArchParams, LatencyReport, LmCosts};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderChoice {
    Sc,
    /// Bit-by-bit list decoding.
    Lscd,
    /// List decoding with multi-bit decisions and selective expansion.
    Lclm,
}

impl FromStr for DecoderChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Self::Sc),
            "lscd" => Ok(Self::Lscd),
            "lclm" => Ok(Self::Lclm),
            other => Err(invalid(format!(
                "unknown decoder `{other}` (expected sc, lscd or lclm)"
            ))),
        }
    }
}

impl fmt::Display for DecoderChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sc => "sc",
            Self::Lscd => "lscd",
            Self::Lclm => "lclm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantMode {
    Float,
    Fixed,
}

impl FromStr for QuantMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "float" => Ok(Self::Float),
            "fixed" => Ok(Self::Fixed),
            other => Err(invalid(format!(
                "unknown quantization `{other}` (expected float or fixed)"
            ))),
        }
    }
}

impl fmt::Display for QuantMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Float => "float",
            Self::Fixed => "fixed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: u32,
    pub k: usize,
    pub crc_len: usize,
    /// Construction SNR, on the same axis as `snr_db`.
    pub design_snr_db: f64,
    pub eta: f64,
    pub m: u32,
    pub decoder: DecoderChoice,
    pub list_size: usize,
    pub quant: QuantMode,
    pub q: u32,
    pub q_pm: u32,
    pub scale: f64,
    /// Keep fixed-point path metrics relative to the best survivor.
    pub pm_normalize: bool,
    pub snr_db: Vec<f64>,
    pub snr_convention: SnrConvention,
    pub max_trials: u64,
    pub min_errors: u64,
    pub seed: u64,
    /// Sends codewords without noise; a test hook.
    pub noiseless: bool,
    pub banks: usize,
    pub pe_width: usize,
    pub epsilon: u32,
    pub c_mbd: u64,
    pub c_sort: u64,
}

impl Default for SimConfig {
    /// The N = 4096, L = 32 hardware configuration with a single 2 dB point.
    fn default() -> Self {
        let arch = ArchParams::hardware_default();
        Self {
            n: 12,
            k: 2048,
            crc_len: 24,
            design_snr_db: 2.0,
            eta: 0.3,
            m: 2,
            decoder: DecoderChoice::Lclm,
            list_size: 32,
            quant: QuantMode::Fixed,
            q: 8,
            q_pm: 9,
            scale: 4.0,
            pm_normalize: true,
            snr_db: vec![2.0],
            snr_convention: SnrConvention::EbN0,
            max_trials: 1_000_000,
            min_errors: 100,
            seed: 1,
            noiseless: false,
            banks: arch.banks,
            pe_width: arch.pe_width,
            epsilon: arch.epsilon,
            // Calibrated against the 16019-cycle target.
            c_mbd: 2,
            c_sort: 4,
        }
    }
}

/// Code and decoder derived from a [`SimConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedCode {
    pub spec: PolarCodeSpec,
    pub partition: SePartition,
    pub kind: DecoderKind,
}

/// Largest power of two up to `preferred` that divides `list_size`.
fn default_banks(preferred: usize, list_size: usize) -> usize {
    let mut b = preferred.min(list_size.max(1)).max(1);
    b = 1 << b.ilog2();
    while list_size % b != 0 {
        b /= 2;
    }
    b
}

impl SimConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let kv = KeyValues::parse(text, path)?;
        let d = Self::default();
        let list_size: Option<usize> = kv.get("L")?;
        let decoder: DecoderChoice = kv.get("decoder")?.unwrap_or(d.decoder);
        let list = list_size.unwrap_or(if decoder == DecoderChoice::Sc { 1 } else { d.list_size });
        let cfg = Self {
            n: kv.require("n")?,
            k: kv.require("K")?,
            crc_len: kv.get("r")?.unwrap_or(d.crc_len),
            design_snr_db: kv.get("design_snr_db")?.unwrap_or(d.design_snr_db),
            eta: kv.get("eta")?.unwrap_or(d.eta),
            m: kv.get("m")?.unwrap_or(d.m),
            decoder,
            list_size: list,
            quant: kv.get("quant")?.unwrap_or(d.quant),
            q: kv.get("Q")?.unwrap_or(d.q),
            q_pm: kv.get("Q_PM")?.unwrap_or(d.q_pm),
            scale: kv.get("scale")?.unwrap_or(d.scale),
            pm_normalize: kv.get("pm_normalize")?.unwrap_or(d.pm_normalize),
            snr_db: kv.require_list("snr_db")?,
            snr_convention: kv.get("snr_convention")?.unwrap_or(d.snr_convention),
            max_trials: kv.get("max_trials")?.unwrap_or(d.max_trials),
            min_errors: kv.get("min_errors")?.unwrap_or(d.min_errors),
            seed: kv.get("seed")?.unwrap_or(d.seed),
            noiseless: kv.get("noiseless")?.unwrap_or(d.noiseless),
            banks: kv.get("L_beta")?.unwrap_or_else(|| default_banks(d.banks, list)),
            pe_width: kv.get("P")?.unwrap_or(d.pe_width),
            epsilon: kv.get("epsilon")?.unwrap_or(d.epsilon),
            c_mbd: kv.get("c_mbd")?.unwrap_or(d.c_mbd),
            c_sort: kv.get("c_sort")?.unwrap_or(d.c_sort),
        };
        kv.reject_unknown()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let snr: Vec<String> = self.snr_db.iter().map(f64::to_string).collect();
        format!(
            "n = {}\nK = {}\nr = {}\ndesign_snr_db = {}\neta = {}\nm = {}\ndecoder = {}\nL = {}\n\
             quant = {}\nQ = {}\nQ_PM = {}\nscale = {}\npm_normalize = {}\nsnr_db = {}\nsnr_convention = {}\n\
             max_trials = {}\nmin_errors = {}\nseed = {}\nnoiseless = {}\n\
             L_beta = {}\nP = {}\nepsilon = {}\nc_mbd = {}\nc_sort = {}\n",
            self.n,
            self.k,
            self.crc_len,
            self.design_snr_db,
            self.eta,
            self.m,
            self.decoder,
            self.list_size,
            self.quant,
            self.q,
            self.q_pm,
            self.scale,
            self.pm_normalize,
            snr.join(", "),
            self.snr_convention,
            self.max_trials,
            self.min_errors,
            self.seed,
            self.noiseless,
            self.banks,
            self.pe_width,
            self.epsilon,
            self.c_mbd,
            self.c_sort,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=20).contains(&self.n) {
            return Err(invalid(format!("n={} must lie in [1, 20]", self.n)));
        }
        if self.k > 1 << self.n || self.k <= self.crc_len {
            return Err(invalid(format!(
                "K={} must exceed r={} and not exceed N={}",
                self.k,
                self.crc_len,
                1u64 << self.n
            )));
        }
        crate::codec::crc_for(self.crc_len)?;
        if self.snr_db.is_empty() {
            return Err(invalid("the SNR list is empty"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) || !self.design_snr_db.is_finite() {
            return Err(invalid("SNR values must be finite"));
        }
        if self.max_trials == 0 {
            return Err(invalid("the trial budget is empty"));
        }
        if self.min_errors == 0 {
            return Err(invalid("min_errors must be at least 1"));
        }
        if self.list_size == 0 {
            return Err(invalid("L must be at least 1"));
        }
        if self.decoder == DecoderChoice::Sc && self.list_size != 1 {
            return Err(invalid(format!(
                "the SC decoder keeps one path, but L={}",
                self.list_size
            )));
        }
        if self.decoder == DecoderChoice::Lclm && (self.m > self.n || self.m > MAX_SUBTREE_DEPTH) {
            return Err(invalid(format!(
                "m={} must not exceed n={} or {MAX_SUBTREE_DEPTH}",
                self.m, self.n
            )));
        }
        if self.quant == QuantMode::Fixed {
            FixedPoint::new(self.q, self.q_pm, self.scale)?;
        }
        self.arch()?;
        Ok(())
    }

    /// Payload rate `(K - r) / N`.
    pub fn rate(&self) -> f64 {
        (self.k - self.crc_len) as f64 / (1u64 << self.n) as f64
    }

    pub fn es_n0_db(&self, snr_db: f64) -> f64 {
        self.snr_convention.to_es_n0_db(snr_db, self.rate())
    }

    pub fn fixed_point(&self) -> Result<FixedPoint> {
        Ok(FixedPoint::new(self.q, self.q_pm, self.scale)?.with_normalization(self.pm_normalize))
    }

    pub fn arch(&self) -> Result<ArchParams> {
        let m = if self.decoder == DecoderChoice::Lclm { self.m } else { 0 };
        ArchParams::new(self.list_size, self.banks, self.pe_width, self.epsilon, m)
    }

    pub fn lm_costs(&self) -> LmCosts {
        LmCosts {
            c_mbd: self.c_mbd,
            c_sort: self.c_sort,
        }
    }

    /// Switches the decoder; SC forces a single path and a single bank.
    pub fn set_decoder(&mut self, decoder: DecoderChoice) {
        self.decoder = decoder;
        if decoder == DecoderChoice::Sc {
            self.list_size = 1;
            self.banks = 1;
        }
    }

    /// Cycle count of the configured decoder on the configured code.
    pub fn latency(&self) -> Result<LatencyReport> {
        let code = self.prepare()?;
        let arch = self.arch()?;
        let unreliable = unreliable_per_block(&code.spec, &code.partition, arch.m)?;
        pfsg_lscd_latency(self.n, &arch, &unreliable, self.lm_costs())
    }

    /// Builds the code, its selective-expansion partition and the decoder.
    pub fn prepare(&self) -> Result<PreparedCode> {
        self.validate()?;
        let profile = gaussian_approx_reliabilities(self.n, self.es_n0_db(self.design_snr_db))?;
        let spec = build_code_spec(&profile, self.k, self.crc_len)?;
        let (partition, kind) = match self.decoder {
            DecoderChoice::Sc => (SePartition::all_unreliable(&spec), DecoderKind::Sc),
            DecoderChoice::Lscd => (
                SePartition::all_unreliable(&spec),
                DecoderKind::Bitwise {
                    list_size: self.list_size,
                },
            ),
            DecoderChoice::Lclm => {
                let partition = partition_selective_expansion(&spec, &profile, self.eta)?;
                let kind = DecoderKind::Lclm {
                    list_size: self.list_size,
                    m: self.m,
                    partition: partition.clone(),
                };
                (partition, kind)
            }
        };
        Ok(PreparedCode { spec, partition, kind })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SimConfig> {
        SimConfig::parse(text, Path::new("test.cfg"))
    }

    #[test]
    fn minimal_file_takes_defaults() {
        let c = parse("n = 6\nK = 40\nsnr_db = 1, 2\n").unwrap();
        assert_eq!(c.snr_db, vec![1.0, 2.0]);
        assert_eq!(c.list_size, 32);
        assert_eq!(c.min_errors, 100);
        assert_eq!(c.max_trials, 1_000_000);
    }

    #[test]
    fn text_round_trip() {
        let c = parse("n = 7\nK = 64\nr = 0\ndecoder = sc\nquant = float\nsnr_db = 0.5\nseed = 9\n").unwrap();
        assert_eq!(c.list_size, 1);
        assert_eq!(parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn validation_errors() {
        assert!(parse("n = 6\nK = 40\nsnr_db = \n").is_err());
        assert!(parse("n = 6\nK = 40\nsnr_db = 1\nmax_trials = 0\n").is_err());
        assert!(parse("n = 6\nK = 40\nsnr_db = 1\nmin_errors = 0\n").is_err());
        assert!(parse("n = 6\nK = 40\nsnr_db = 1\ndecoder = sc\nL = 4\n").is_err());
        assert!(parse("n = 6\nK = 20\nsnr_db = 1\n").is_err());
        assert!(parse("n = 6\nK = 40\nsnr_db = 1\nr = 16\n").is_err());
        assert!(parse("n = 6\nK = 40\nsnr_db = 1\nm = 5\n").is_err());
        assert!(parse("n = 6\nK = 40\nsnr_db = 1\nQ = 1\n").is_err());
        assert!(parse("n = 6\nK = 40\nsnr_db = 1\nL = 8\nL_beta = 16\n").is_err());
        assert!(parse("n = 6\nK = 40\nsnr_db = 1\nbogus = 1\n").is_err());
    }

    #[test]
    fn prepare_builds_matching_decoder() {
        let c = parse("n = 6\nK = 40\nsnr_db = 1\nL = 4\n").unwrap();
        let p = c.prepare().unwrap();
        assert_eq!(p.spec.k(), 40);
        assert!(matches!(p.kind, DecoderKind::Lclm { list_size: 4, m: 2, .. }));
        p.partition.validate(&p.spec).unwrap();
    }

    #[test]
    fn bank_default_follows_list_size() {
        assert_eq!(default_banks(4, 1), 1);
        assert_eq!(default_banks(4, 2), 2);
        assert_eq!(default_banks(4, 6), 2);
        assert_eq!(default_banks(4, 32), 4);
    }

    #[test]
    fn default_is_the_full_hardware_configuration() {
        let c = SimConfig::default();
        c.validate().unwrap();
        assert!((c.rate() - 0.494).abs() < 1e-3);
    }

    #[test]
    fn switching_to_sc_keeps_the_config_valid() {
        let mut c = parse("n = 6\nK = 40\nsnr_db = 1\nL = 8\n").unwrap();
        c.set_decoder(DecoderChoice::Sc);
        c.validate().unwrap();
        assert_eq!(c.list_size, 1);
    }

    #[test]
    fn table_configuration_latency() {
        let r = SimConfig::default().latency().unwrap();
        assert_eq!(r.total, r.f_cycles + r.g_cycles + r.mbd_cycles + r.sort_cycles);
        assert_eq!(r.blocks, 1024);
    }
}
