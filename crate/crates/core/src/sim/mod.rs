//! Monte-Carlo BLER simulation.

pub mod compare;
pub mod config;
pub mod harness;
pub mod stats;

pub use compare::{compare_curves, compare_runs, BlerCurve, GapReport};
pub use config::{DecoderChoice, PreparedCode, QuantMode, SimConfig};
pub use harness::{run_point, run_sweep, sweep_csv, BlerPoint, Simulation, CSV_HEADER};
