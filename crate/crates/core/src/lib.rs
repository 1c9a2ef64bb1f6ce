//! Polar codes with successive-cancellation list decoding and low-complexity
//! list management, plus a cycle model of the decoder and a Monte-Carlo BLER
//! harness.

pub mod arith;
pub mod channel;
pub mod codec;
pub mod construction;
pub mod decoder;
mod error;
mod kv;
pub mod latency;
pub mod sim;

pub use arith::{FixedPoint, FloatingPoint, LlrDomain};
pub use channel::SnrConvention;
pub use codec::Bit;
pub use construction::{LeafRole, PolarCodeSpec, ReliabilityProfile, SePartition};
pub use decoder::{BlockDecoder, DecoderKind};
pub use error::{Error, Result};
pub use latency::{ArchParams, LatencyReport, LmCosts};
pub use sim::{BlerPoint, SimConfig};
