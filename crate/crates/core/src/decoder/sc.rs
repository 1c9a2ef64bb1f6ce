//! Successive cancellation decoding as a depth-first walk of the scheduling
//! tree.
//!
//! Stage `s` of the tree holds `2^s` LLRs: the root (stage `n`) holds the
//! channel LLRs and stage 0 the leaf LLR. A node "at stage `s`" below means
//! the F or G computation that reads stage `s` and writes stage `s - 1`.

use crate::arith::LlrDomain;
use crate::codec::Bit;
use crate::construction::PolarCodeSpec;
use crate::error::{invalid, Error, Result};

/// Writes `f(in[i], in[i + half])` into `out`.
#[inline]
pub(crate) fn f_layer<D: LlrDomain>(d: &D, input: &[D::Llr], out: &mut [D::Llr]) {
    let (a, b) = input.split_at(out.len());
    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
        *o = d.f(x, y);
    }
}

/// Writes `g(s[i], in[i], in[i + half])` into `out`.
#[inline]
pub(crate) fn g_layer<D: LlrDomain>(d: &D, input: &[D::Llr], sums: &[Bit], out: &mut [D::Llr]) {
    let (a, b) = input.split_at(out.len());
    for (((o, &x), &y), &s) in out.iter_mut().zip(a).zip(b).zip(sums) {
        *o = d.g(s, x, y);
    }
}

/// Partial sums of a parent from those of its two children: `[l ^ r, r]`.
#[inline]
pub(crate) fn combine_sums(left: &[Bit], right: &[Bit], out: &mut [Bit]) {
    let half = left.len();
    let (lo, hi) = out.split_at_mut(half);
    for ((o, &l), &r) in lo.iter_mut().zip(left).zip(right) {
        *o = l ^ r;
    }
    hi.copy_from_slice(right);
}

/// Step of the scheduling-tree walk, recorded by [`decode_sc_traced`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    F {
        stage: u32,
    },
    G {
        stage: u32,
    },
    /// Leaf decision (list management in a list decoder).
    Leaf {
        index: usize,
    },
}

impl TraceEvent {
    pub fn label(&self) -> &'static str {
        match self {
            TraceEvent::F { .. } => "F",
            TraceEvent::G { .. } => "G",
            TraceEvent::Leaf { .. } => "LM",
        }
    }
}

/// One buffer of `2^s` LLRs per stage and two partial-sum buffers per stage
/// (results of a completed left and right child).
#[derive(Debug, Clone)]
pub struct StageMemory<T> {
    n: u32,
    llr: Vec<Vec<T>>,
    sums: Vec<[Vec<Bit>; 2]>,
    next_leaf: usize,
}

impl<T: Copy + Default> StageMemory<T> {
    pub fn new(n: u32) -> Self {
        Self {
            n,
            llr: (0..=n).map(|s| vec![T::default(); 1 << s]).collect(),
            sums: (0..=n).map(|s| [vec![0; 1 << s], vec![0; 1 << s]]).collect(),
            next_leaf: 0,
        }
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    /// Loads channel LLRs into the root stage and forgets previous decisions.
    pub fn reset(&mut self, channel: &[T]) -> Result<()> {
        let root = &mut self.llr[self.n as usize];
        if channel.len() != root.len() {
            return Err(invalid(format!(
                "expected {} channel LLRs, got {}",
                root.len(),
                channel.len()
            )));
        }
        root.copy_from_slice(channel);
        self.next_leaf = 0;
        Ok(())
    }

    pub fn llrs(&self, stage: u32) -> &[T] {
        &self.llr[stage as usize]
    }

    /// Partial sums produced by the most recent node at `stage` on `side`
    /// (0 = left child, 1 = right child).
    pub fn partial_sums(&self, stage: u32, side: usize) -> &[Bit] {
        &self.sums[stage as usize][side]
    }

    /// Index of the next leaf that may be decided.
    pub fn next_leaf(&self) -> usize {
        self.next_leaf
    }

    /// Records `bit` for `leaf` and folds it into the partial sums of every
    /// subtree it completes. Leaves must arrive in index order.
    pub fn partial_sum_update(&mut self, leaf: usize, bit: Bit) -> Result<()> {
        if leaf != self.next_leaf || leaf >= 1 << self.n {
            return Err(Error::ContractViolation(format!(
                "leaf {leaf} decided out of order (expected {})",
                self.next_leaf
            )));
        }
        self.sums[0][leaf & 1][0] = bit;
        let mut s = 1;
        while s <= self.n && (leaf >> (s - 1)) & 1 == 1 {
            let (below, above) = self.sums.split_at_mut(s as usize);
            let [left, right] = &below[s as usize - 1];
            let side = (leaf >> s) & 1;
            combine_sums(left, right, &mut above[0][side]);
            s += 1;
        }
        self.next_leaf += 1;
        Ok(())
    }

    /// Runs the F/G steps that lead from the previous leaf to `leaf` and
    /// returns the leaf LLR.
    pub fn descend<D: LlrDomain<Llr = T>>(&mut self, d: &D, leaf: usize, mut trace: Option<&mut Vec<TraceEvent>>) -> T {
        let top = if leaf == 0 {
            self.n
        } else {
            let t = leaf.trailing_zeros();
            let (lower, upper) = self.llr.split_at_mut(t as usize + 1);
            g_layer(d, &upper[0], &self.sums[t as usize][0], &mut lower[t as usize]);
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(TraceEvent::G { stage: t + 1 });
            }
            t
        };
        for s in (1..=top).rev() {
            let (lower, upper) = self.llr.split_at_mut(s as usize);
            f_layer(d, &upper[0], &mut lower[s as usize - 1]);
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(TraceEvent::F { stage: s });
            }
        }
        self.llr[0][0]
    }
}

/// Single-path SC decoder with reusable stage memory.
#[derive(Debug, Clone)]
pub struct ScDecoder<D: LlrDomain> {
    domain: D,
    frozen: Vec<bool>,
    mem: StageMemory<D::Llr>,
}

impl<D: LlrDomain> ScDecoder<D> {
    pub fn new(domain: D, spec: &PolarCodeSpec) -> Self {
        Self {
            domain,
            frozen: spec.frozen_mask().to_vec(),
            mem: StageMemory::new(spec.n()),
        }
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    /// Decodes the source word `u_hat`; frozen positions are forced to 0.
    pub fn decode(&mut self, channel: &[D::Llr]) -> Result<Vec<Bit>> {
        self.run(channel, None)
    }

    fn run(&mut self, channel: &[D::Llr], mut trace: Option<&mut Vec<TraceEvent>>) -> Result<Vec<Bit>> {
        self.mem.reset(channel)?;
        let mut u_hat = vec![0; self.frozen.len()];
        for i in 0..u_hat.len() {
            let llr = self.mem.descend(&self.domain, i, trace.as_deref_mut());
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(TraceEvent::Leaf { index: i });
            }
            let bit = if self.frozen[i] {
                0
            } else {
                self.domain.hard_decision(llr)
            };
            u_hat[i] = bit;
            self.mem.partial_sum_update(i, bit)?;
        }
        Ok(u_hat)
    }

    /// Stage memory after the last decode; root-stage partial sums equal the
    /// re-encoded decision vector.
    pub fn memory(&self) -> &StageMemory<D::Llr> {
        &self.mem
    }
}

pub fn decode_sc<D: LlrDomain>(d: &D, channel: &[D::Llr], spec: &PolarCodeSpec) -> Result<Vec<Bit>> {
    ScDecoder::new(d.clone(), spec).decode(channel)
}

/// As [`decode_sc`], also returning every F, G and leaf step in visit order.
pub fn decode_sc_traced<D: LlrDomain>(
    d: &D,
    channel: &[D::Llr],
    spec: &PolarCodeSpec,
) -> Result<(Vec<Bit>, Vec<TraceEvent>)> {
    let mut trace = Vec::new();
    let u = ScDecoder::new(d.clone(), spec).run(channel, Some(&mut trace))?;
    Ok((u, trace))
}
