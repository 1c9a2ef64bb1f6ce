//! Command-line front end: BLER sweeps, cycle estimates and curve
//! comparison.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polar_lscd::latency::scd_latency;
use polar_lscd::sim::{compare_runs, run_sweep, DecoderChoice, QuantMode, SimConfig};

#[derive(Parser, Debug)]
#[command(
    name = "polar-lscd",
    version,
    about = "Polar list decoding simulator and latency model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a BLER sweep and write `<out>` plus a `.dat` plot file next to it.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// sc, lscd or lclm.
        #[arg(long)]
        decoder: Option<DecoderChoice>,
        /// float or fixed.
        #[arg(long)]
        quant: Option<QuantMode>,
    },
    /// Print the cycle breakdown of the configured decoder.
    Latency {
        #[arg(long)]
        config: PathBuf,
        /// Also write the breakdown as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// SNR gap between two sweeps at a target BLER.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        target_bler: f64,
    },
}

fn run(cli: Cli) -> polar_lscd::Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            decoder,
            quant,
        } => {
            let mut cfg = SimConfig::read(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = decoder {
                cfg.set_decoder(d);
            }
            if let Some(q) = quant {
                cfg.quant = q;
            }
            cfg.validate()?;
            let points = run_sweep(&cfg, &out)?;
            for p in &points {
                eprintln!(
                    "{} dB: bler {:.3e} ({} / {}), crc_fail {}, undetected {}, {:.1?}",
                    p.snr_db,
                    p.bler(),
                    p.block_errors,
                    p.trials,
                    p.crc_fail,
                    p.undetected,
                    p.wall_time
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Latency { config, csv } => {
            let cfg = SimConfig::read(&config)?;
            let report = cfg.latency()?;
            print!("{}", report.to_table());
            let sc = scd_latency(cfg.n, cfg.pe_width);
            println!(
                "single-path SC {sc:>10}  (ratio {:.2})",
                report.total as f64 / sc as f64
            );
            if let Some(path) = csv {
                std::fs::write(&path, report.to_csv(cfg.arch()?.m)).map_err(|source| polar_lscd::Error::Io {
                    path: path.clone(),
                    source,
                })?;
            }
        }
        Command::Compare { a, b, target_bler } => {
            let r = compare_runs(&a, &b, target_bler)?;
            println!(
                "target bler {:e}: A {:.4} dB, B {:.4} dB, gap {:+.4} dB",
                r.target_bler, r.snr_a, r.snr_b, r.gap_db
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
