//! Monte-Carlo block-error-rate measurement.
//!
//! Every trial draws its payload and noise from its own generator, seeded by
//! the base seed, the SNR point and the trial index. Trials run in parallel
//! batches and are then scanned in index order, so the stop rule ends at the
//! same trial whatever the number of workers.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{FloatingPoint, LlrDomain};
use crate::channel::{bpsk_awgn_with, channel_llr};
use crate::codec::{encode, Bit};
use crate::decoder::BlockDecoder;
use crate::error::{invalid, io_err, Result};
use crate::sim::config::{PreparedCode, QuantMode, SimConfig};

/// Exact CSV header of a sweep.
pub const CSV_HEADER: &str = "snr_db,trials,block_errors,bler,seed";

const BATCH: u64 = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    /// Decodes whose selected path failed the CRC.
    pub crc_fail: u64,
    /// Block errors whose selected path passed the CRC.
    pub undetected: u64,
    pub seed: u64,
    pub wall_time: Duration,
}

impl BlerPoint {
    pub fn bler(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.block_errors as f64 / self.trials as f64
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.snr_db,
            self.trials,
            self.block_errors,
            self.bler(),
            self.seed
        )
    }
}

/// SplitMix64 finalizer, used to derive independent seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the trials at one SNR point.
pub fn point_seed(base: u64, snr_db: f64) -> u64 {
    mix(base ^ mix(snr_db.to_bits()))
}

/// Seed of a single trial.
pub fn trial_seed(point_seed: u64, trial: u64) -> u64 {
    mix(point_seed ^ mix(trial.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    error: bool,
    crc_fail: bool,
}

struct Trial<D: LlrDomain> {
    domain: D,
    decoder: BlockDecoder<D>,
    llr: Vec<D::Llr>,
}

fn run_trial<D: LlrDomain>(
    t: &mut Trial<D>,
    code: &PreparedCode,
    es_n0_db: f64,
    noiseless: bool,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payload: Vec<Bit> = (0..code.spec.payload_len()).map(|_| rng.random_range(0..=1)).collect();
    let x = encode(&payload, &code.spec)?;
    t.llr.clear();
    if noiseless {
        t.llr.extend(x.iter().map(|&b| t.domain.certain(b)));
    } else {
        let obs = bpsk_awgn_with(&x, es_n0_db, &mut rng);
        t.llr
            .extend(channel_llr(&obs)?.into_iter().map(|l| t.domain.from_channel(l)));
    }
    let decision = t.decoder.decode(&t.llr)?;
    Ok(Outcome {
        error: decision.payload != payload,
        crc_fail: !decision.crc_pass,
    })
}

fn run_point_in<D: LlrDomain>(domain: D, cfg: &SimConfig, code: &PreparedCode, snr_db: f64) -> Result<BlerPoint> {
    let start = Instant::now();
    let seed = point_seed(cfg.seed, snr_db);
    let es_n0_db = cfg.es_n0_db(snr_db);
    // One decoder per worker; built up front so configuration errors surface here.
    BlockDecoder::new(domain.clone(), &code.spec, &code.kind)?;
    let mut point = BlerPoint {
        snr_db,
        trials: 0,
        block_errors: 0,
        crc_fail: 0,
        undetected: 0,
        seed: cfg.seed,
        wall_time: Duration::ZERO,
    };
    let mut next = 0u64;
    'outer: while next < cfg.max_trials {
        let end = (next + BATCH).min(cfg.max_trials);
        let outcomes: Vec<Outcome> = (next..end)
            .into_par_iter()
            .map_init(
                || Trial {
                    domain: domain.clone(),
                    decoder: BlockDecoder::new(domain.clone(), &code.spec, &code.kind).expect("checked above"),
                    llr: Vec::new(),
                },
                |t, i| run_trial(t, code, es_n0_db, cfg.noiseless, trial_seed(seed, i)),
            )
            .collect::<Result<_>>()?;
        for o in outcomes {
            point.trials += 1;
            if o.crc_fail {
                point.crc_fail += 1;
            }
            if o.error {
                point.block_errors += 1;
                if !o.crc_fail {
                    point.undetected += 1;
                }
                if point.block_errors >= cfg.min_errors {
                    break 'outer;
                }
            }
        }
        next = end;
    }
    point.wall_time = start.elapsed();
    log::info!(
        "snr {snr_db} dB: {} errors / {} trials ({} undetected) in {:.1?}",
        point.block_errors,
        point.trials,
        point.undetected,
        point.wall_time
    );
    Ok(point)
}

/// A validated configuration with its code built once.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    code: PreparedCode,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        let code = cfg.prepare()?;
        Ok(Self { cfg, code })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn code(&self) -> &PreparedCode {
        &self.code
    }

    pub fn run_point(&self, snr_db: f64) -> Result<BlerPoint> {
        match self.cfg.quant {
            QuantMode::Float => run_point_in(FloatingPoint, &self.cfg, &self.code, snr_db),
            QuantMode::Fixed => run_point_in(self.cfg.fixed_point()?, &self.cfg, &self.code, snr_db),
        }
    }

    pub fn run_all(&self) -> Result<Vec<BlerPoint>> {
        self.cfg.snr_db.iter().map(|&s| self.run_point(s)).collect()
    }
}

pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<BlerPoint> {
    Simulation::new(cfg.clone())?.run_point(snr_db)
}

pub fn sweep_csv(points: &[BlerPoint]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for p in points {
        let _ = writeln!(s, "{}", p.csv_row());
    }
    s
}

/// Two columns, SNR and BLER, for plotting.
pub fn sweep_plot_data(points: &[BlerPoint]) -> String {
    let mut s = String::from("# snr_db bler\n");
    for p in points {
        let _ = writeln!(s, "{} {}", p.snr_db, p.bler());
    }
    s
}

/// The plot-data file written next to a CSV: same stem, `.dat` extension.
pub fn plot_path(csv: &Path) -> PathBuf {
    csv.with_extension("dat")
}

/// Runs every SNR point and writes `out` (CSV) and its `.dat` companion.
/// Both files are created before the first trial so an unwritable path
/// fails immediately.
pub fn run_sweep(cfg: &SimConfig, out: &Path) -> Result<Vec<BlerPoint>> {
    let sim = Simulation::new(cfg.clone())?;
    let dat = plot_path(out);
    if dat == out {
        return Err(invalid(format!(
            "output {} must not have a .dat extension",
            out.display()
        )));
    }
    let mut csv_file = File::create(out).map_err(io_err(out))?;
    let mut dat_file = File::create(&dat).map_err(io_err(&dat))?;
    let points = sim.run_all()?;
    csv_file.write_all(sweep_csv(&points).as_bytes()).map_err(io_err(out))?;
    dat_file
        .write_all(sweep_plot_data(&points).as_bytes())
        .map_err(io_err(&dat))?;
    Ok(points)
}
