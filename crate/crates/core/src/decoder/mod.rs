//! Successive-cancellation family decoders.

pub mod lclm;
pub mod list;
pub mod sc;

use crate::arith::LlrDomain;
use crate::codec::{extract_payload, Bit};
use crate::construction::{PolarCodeSpec, SePartition};
use crate::error::Result;

pub use lclm::{
    decode_lscd_lclm, expand_block, lclm_expand, mbd_metric, serial_prune, sorter_rounds, ExpansionCandidate,
    SubtreeBlock,
};
pub use list::{
    candidate_order, decode_lscd_bitwise, expand_leaf, pmu, prune_to_list, select_output, Candidate, CrcStatus,
    DecodedPath, ListDecoder, PathList, PruneRecord, Selection, MAX_SUBTREE_DEPTH,
};
pub use sc::{decode_sc, decode_sc_traced, ScDecoder, StageMemory, TraceEvent};

/// Which decoder a [`BlockDecoder`] runs.
#[derive(Debug, Clone, PartialEq)]
pub enum DecoderKind {
    Sc,
    /// Bit-by-bit list decoding.
    Bitwise {
        list_size: usize,
    },
    /// Multi-bit list decoding on `2^m`-leaf blocks.
    Lclm {
        list_size: usize,
        m: u32,
        partition: SePartition,
    },
}

/// Decodes channel LLRs of one codeword to a payload estimate.
#[derive(Debug, Clone)]
pub enum BlockDecoder<D: LlrDomain> {
    Sc(ScDecoder<D>, PolarCodeSpec),
    List(Box<ListDecoder<D>>, PolarCodeSpec),
}

/// Payload estimate and CRC outcome of one decode.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub payload: Vec<Bit>,
    pub crc_pass: bool,
}

impl<D: LlrDomain> BlockDecoder<D> {
    pub fn new(domain: D, spec: &PolarCodeSpec, kind: &DecoderKind) -> Result<Self> {
        Ok(match kind {
            DecoderKind::Sc => BlockDecoder::Sc(ScDecoder::new(domain, spec), spec.clone()),
            DecoderKind::Bitwise { list_size } => {
                BlockDecoder::List(Box::new(ListDecoder::bitwise(domain, spec, *list_size)?), spec.clone())
            }
            DecoderKind::Lclm {
                list_size,
                m,
                partition,
            } => BlockDecoder::List(
                Box::new(ListDecoder::lclm(domain, spec, partition, *list_size, *m)?),
                spec.clone(),
            ),
        })
    }

    pub fn decode(&mut self, channel: &[D::Llr]) -> Result<Decision> {
        match self {
            BlockDecoder::Sc(dec, spec) => {
                let u = dec.decode(channel)?;
                let (payload, crc_pass) = extract_payload(&u, spec);
                Ok(Decision { payload, crc_pass })
            }
            BlockDecoder::List(dec, spec) => {
                let list = dec.decode(channel)?;
                let sel = select_output(dec.domain(), &list, spec)?;
                Ok(Decision {
                    payload: sel.payload,
                    crc_pass: sel.status == CrcStatus::Pass,
                })
            }
        }
    }
}
