//! CRC-aided list successive cancellation decoding.
//!
//! Paths share stage buffers through reference counts. A path that is about to
//! overwrite a buffer it shares with a sibling gets a fresh buffer instead;
//! every write covers the whole buffer, so nothing is ever copied. Decided
//! bits are kept in an append-only history and only materialized for the
//! surviving paths at the end.

use std::cmp::Ordering;

use crate::arith::LlrDomain;
use crate::codec::{extract_payload, polar_transform_word, Bit};
use crate::construction::{LeafRole, PolarCodeSpec, SePartition};
use crate::decoder::lclm::{self, BlockPlan, Scratch};
use crate::decoder::sc::{combine_sums, f_layer, g_layer};
use crate::error::{invalid, Error, Result};

const NONE: u32 = u32::MAX;

/// Largest supported subtree depth for multi-bit decisions.
pub const MAX_SUBTREE_DEPTH: u32 = 4;

/// One expanded path before pruning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<M> {
    pub metric: M,
    /// Index of the surviving path this candidate extends.
    pub parent: usize,
    /// Position among the siblings of `parent`; the `u = 0` branch of a single
    /// leaf is 0.
    pub branch: u32,
    /// Decided leaf bits of the block, bit `i` is leaf `i`.
    pub leaves: u32,
}

/// Ordering used by every pruning step: metric, then parent, then branch.
pub fn candidate_order<D: LlrDomain>(d: &D, a: &Candidate<D::Metric>, b: &Candidate<D::Metric>) -> Ordering {
    d.cmp_metric(a.metric, b.metric)
        .then(a.parent.cmp(&b.parent))
        .then(a.branch.cmp(&b.branch))
}

/// Path-metric update of a single leaf.
pub fn pmu<D: LlrDomain>(d: &D, gamma: D::Metric, leaf_llr: D::Llr, u_hat: Bit) -> D::Metric {
    d.pmu(gamma, leaf_llr, u_hat)
}

#[inline]
pub(crate) fn push_leaf_candidates<D: LlrDomain>(
    d: &D,
    parent: usize,
    gamma: D::Metric,
    llr: D::Llr,
    frozen: bool,
    out: &mut Vec<Candidate<D::Metric>>,
) {
    let branches: u32 = if frozen { 1 } else { 2 };
    for bit in 0..branches {
        out.push(Candidate {
            metric: d.pmu(gamma, llr, bit as Bit),
            parent,
            branch: bit,
            leaves: bit,
        });
    }
}

/// Expands every path on one leaf: one candidate per path on a frozen leaf,
/// two (`u = 0` then `u = 1`) on an information leaf.
pub fn expand_leaf<D: LlrDomain>(
    d: &D,
    metrics: &[D::Metric],
    leaf_llrs: &[D::Llr],
    frozen: bool,
) -> Vec<Candidate<D::Metric>> {
    assert_eq!(metrics.len(), leaf_llrs.len(), "one leaf LLR per path");
    let mut out = Vec::with_capacity(metrics.len() * 2);
    for (p, (&g, &l)) in metrics.iter().zip(leaf_llrs).enumerate() {
        push_leaf_candidates(d, p, g, l, frozen, &mut out);
    }
    out
}

pub(crate) fn prune_in_place<D: LlrDomain>(d: &D, candidates: &mut Vec<Candidate<D::Metric>>, l: usize) {
    if candidates.len() > l {
        candidates.select_nth_unstable_by(l - 1, |a, b| candidate_order(d, a, b));
        candidates.truncate(l);
    }
    candidates.sort_unstable_by(|a, b| candidate_order(d, a, b));
}

/// Keeps the `l` best candidates, ordered by [`candidate_order`].
pub fn prune_to_list<D: LlrDomain>(
    d: &D,
    mut candidates: Vec<Candidate<D::Metric>>,
    l: usize,
) -> Vec<Candidate<D::Metric>> {
    assert!(l >= 1, "list size must be positive");
    prune_in_place(d, &mut candidates, l);
    candidates
}

/// Fixed-width buffers with reference counts.
#[derive(Debug, Clone)]
struct Pool<T> {
    width: usize,
    data: Vec<T>,
    refs: Vec<u32>,
    free: Vec<u32>,
}

impl<T: Copy + Default> Pool<T> {
    fn new(width: usize) -> Self {
        Self {
            width,
            data: Vec::new(),
            refs: Vec::new(),
            free: Vec::new(),
        }
    }

    fn clear(&mut self) {
        self.data.clear();
        self.refs.clear();
        self.free.clear();
    }

    fn alloc(&mut self) -> u32 {
        if let Some(id) = self.free.pop() {
            self.refs[id as usize] = 1;
            id
        } else {
            let id = self.refs.len() as u32;
            self.refs.push(1);
            self.data.resize(self.data.len() + self.width, T::default());
            id
        }
    }

    #[inline]
    fn retain(&mut self, id: u32) {
        if id != NONE {
            self.refs[id as usize] += 1;
        }
    }

    #[inline]
    fn release(&mut self, id: u32) {
        if id != NONE {
            let r = &mut self.refs[id as usize];
            *r -= 1;
            if *r == 0 {
                self.free.push(id);
            }
        }
    }

    /// Makes `slot` point at a buffer owned only by the caller.
    #[inline]
    fn make_unique(&mut self, slot: &mut u32) -> u32 {
        if *slot == NONE {
            *slot = self.alloc();
        } else if self.refs[*slot as usize] > 1 {
            self.refs[*slot as usize] -= 1;
            *slot = self.alloc();
        }
        *slot
    }

    #[inline]
    fn get(&self, id: u32) -> &[T] {
        let start = id as usize * self.width;
        &self.data[start..start + self.width]
    }

    #[inline]
    fn get_mut(&mut self, id: u32) -> &mut [T] {
        let start = id as usize * self.width;
        &mut self.data[start..start + self.width]
    }

    fn live(&self) -> usize {
        self.refs.len() - self.free.len()
    }
}

#[derive(Debug, Clone)]
struct PathSlot<M> {
    metric: M,
    hist: u32,
    /// LLR buffer per stage below the root.
    llr: Vec<u32>,
    /// Partial-sum buffers per stage below the root, left and right child.
    sums: Vec<[u32; 2]>,
}

impl<M: Default> PathSlot<M> {
    fn empty(n: u32) -> Self {
        Self {
            metric: M::default(),
            hist: NONE,
            llr: vec![NONE; n as usize],
            sums: vec![[NONE; 2]; n as usize],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct HistNode {
    prev: u32,
    leaves: u32,
}

/// Record of one list-management step, for inspection in tests and tools.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneRecord<M> {
    pub block: usize,
    pub parent_metrics: Vec<M>,
    pub candidates: usize,
    /// Whether a pruning step ran (false for frozen leaves and blocks without
    /// unreliable bits).
    pub pruned: bool,
    /// 2L-to-L sorter passes this step would take in hardware.
    pub rounds: usize,
    /// `(parent, metric)` of every survivor, in list order.
    pub survivors: Vec<(usize, M)>,
}

/// A completed decoding path.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPath<M> {
    pub metric: M,
    pub u_hat: Vec<Bit>,
}

/// Final list of a list decoder, in list order.
#[derive(Debug, Clone, PartialEq)]
pub struct PathList<M> {
    pub paths: Vec<DecodedPath<M>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrcStatus {
    Pass,
    Fail,
}

/// Payload chosen from a path list.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<M> {
    pub payload: Vec<Bit>,
    pub status: CrcStatus,
    pub index: usize,
    pub metric: M,
}

/// Picks the smallest-metric path among those passing the CRC, or the
/// smallest-metric path overall if none passes. Ties go to the earlier path.
pub fn select_output<D: LlrDomain>(
    d: &D,
    list: &PathList<D::Metric>,
    spec: &PolarCodeSpec,
) -> Result<Selection<D::Metric>> {
    if list.paths.is_empty() {
        return Err(Error::ContractViolation("cannot select from an empty list".into()));
    }
    let mut best_pass: Option<(usize, Vec<Bit>)> = None;
    let mut best_any = 0;
    for (i, p) in list.paths.iter().enumerate() {
        if d.cmp_metric(p.metric, list.paths[best_any].metric) == Ordering::Less {
            best_any = i;
        }
        let better = match &best_pass {
            None => true,
            Some((j, _)) => d.cmp_metric(p.metric, list.paths[*j].metric) == Ordering::Less,
        };
        if better {
            let (payload, pass) = extract_payload(&p.u_hat, spec);
            if pass {
                best_pass = Some((i, payload));
            }
        }
    }
    Ok(match best_pass {
        Some((index, payload)) => Selection {
            payload,
            status: CrcStatus::Pass,
            index,
            metric: list.paths[index].metric,
        },
        None => Selection {
            payload: extract_payload(&list.paths[best_any].u_hat, spec).0,
            status: CrcStatus::Fail,
            index: best_any,
            metric: list.paths[best_any].metric,
        },
    })
}

#[derive(Debug, Clone)]
enum Mode {
    /// Bit-by-bit expansion on every information leaf.
    Bitwise { frozen: Vec<bool> },
    /// Multi-bit decisions on `2^m`-leaf blocks with selective expansion.
    Lclm { plans: Vec<BlockPlan> },
}

/// Reusable list decoder; one instance decodes one codeword at a time.
#[derive(Debug, Clone)]
pub struct ListDecoder<D: LlrDomain> {
    domain: D,
    n: u32,
    m: u32,
    list_size: usize,
    mode: Mode,
    channel: Vec<D::Llr>,
    llr_pools: Vec<Pool<D::Llr>>,
    sum_pools: Vec<Pool<Bit>>,
    paths: Vec<PathSlot<D::Metric>>,
    next: Vec<PathSlot<D::Metric>>,
    hist: Vec<HistNode>,
    cands: Vec<Candidate<D::Metric>>,
    children: Vec<u32>,
    root: Vec<D::Llr>,
    scratch: Scratch<D::Metric>,
    trace: Option<Vec<PruneRecord<D::Metric>>>,
}

impl<D: LlrDomain> ListDecoder<D> {
    fn with_mode(domain: D, n: u32, m: u32, list_size: usize, mode: Mode) -> Result<Self> {
        if list_size == 0 {
            return Err(invalid("list size must be at least 1"));
        }
        Ok(Self {
            domain,
            n,
            m,
            list_size,
            mode,
            channel: Vec::with_capacity(1 << n),
            llr_pools: (0..n).map(|s| Pool::new(1 << s)).collect(),
            sum_pools: (0..n).map(|s| Pool::new(1 << s)).collect(),
            paths: Vec::new(),
            next: Vec::new(),
            hist: Vec::new(),
            cands: Vec::new(),
            children: Vec::new(),
            root: Vec::with_capacity(1 << m),
            scratch: Scratch::default(),
            trace: None,
        })
    }

    /// Bit-by-bit list decoder.
    pub fn bitwise(domain: D, spec: &PolarCodeSpec, list_size: usize) -> Result<Self> {
        let mode = Mode::Bitwise {
            frozen: spec.frozen_mask().to_vec(),
        };
        Self::with_mode(domain, spec.n(), 0, list_size, mode)
    }

    /// Low-complexity list management on `2^m`-leaf blocks.
    pub fn lclm(domain: D, spec: &PolarCodeSpec, partition: &SePartition, list_size: usize, m: u32) -> Result<Self> {
        if m > MAX_SUBTREE_DEPTH {
            return Err(invalid(format!("subtree depth m={m} exceeds {MAX_SUBTREE_DEPTH}")));
        }
        if m > spec.n() {
            return Err(invalid(format!("subtree depth m={m} exceeds n={}", spec.n())));
        }
        partition.validate(spec)?;
        let roles = partition.roles(spec);
        let plans = roles.chunks(1 << m).map(BlockPlan::new).collect();
        Self::with_mode(domain, spec.n(), m, list_size, Mode::Lclm { plans })
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    /// Records a [`PruneRecord`] for every block of the following decodes.
    pub fn enable_trace(&mut self, on: bool) {
        self.trace = on.then(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<PruneRecord<D::Metric>> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Live stage buffers after the last decode (diagnostics).
    pub fn live_buffers(&self) -> usize {
        self.llr_pools.iter().map(Pool::live).sum::<usize>() + self.sum_pools.iter().map(Pool::live).sum::<usize>()
    }

    pub fn decode(&mut self, channel: &[D::Llr]) -> Result<PathList<D::Metric>> {
        if channel.len() != 1 << self.n {
            return Err(invalid(format!(
                "expected {} channel LLRs, got {}",
                1usize << self.n,
                channel.len()
            )));
        }
        self.reset(channel);
        let blocks = 1usize << (self.n - self.m);
        for b in 0..blocks {
            self.descend(b);
            self.expand_and_prune(b);
            self.advance(b);
        }
        Ok(self.collect())
    }

    fn reset(&mut self, channel: &[D::Llr]) {
        self.channel.clear();
        self.channel.extend_from_slice(channel);
        for p in &mut self.llr_pools {
            p.clear();
        }
        for p in &mut self.sum_pools {
            p.clear();
        }
        self.hist.clear();
        self.paths.clear();
        self.paths.push(PathSlot::empty(self.n));
        if let Some(t) = self.trace.as_mut() {
            t.clear();
        }
    }

    /// Computes the stage-`m` LLRs of block `b` for every path.
    fn descend(&mut self, b: usize) {
        let Self {
            domain: d,
            n,
            m,
            channel,
            llr_pools,
            sum_pools,
            paths,
            ..
        } = self;
        let (n, m) = (*n, *m);
        let top = if b == 0 { n } else { b.trailing_zeros() + m };
        for path in paths.iter_mut() {
            if b != 0 {
                let t = top as usize;
                let (lower, upper) = llr_pools.split_at_mut(t + 1);
                let input = if t + 1 == n as usize {
                    &channel[..]
                } else {
                    upper[0].get(path.llr[t + 1])
                };
                let sums = sum_pools[t].get(path.sums[t][0]);
                let out = lower[t].make_unique(&mut path.llr[t]);
                g_layer(d, input, sums, lower[t].get_mut(out));
            }
            for s in (m + 1..=top).rev() {
                let s = s as usize;
                let (lower, upper) = llr_pools.split_at_mut(s);
                let input = if s == n as usize {
                    &channel[..]
                } else {
                    upper[0].get(path.llr[s])
                };
                let out = lower[s - 1].make_unique(&mut path.llr[s - 1]);
                f_layer(d, input, lower[s - 1].get_mut(out));
            }
        }
    }

    fn root_llrs(&self, path: &PathSlot<D::Metric>) -> &[D::Llr] {
        if self.m == self.n {
            &self.channel
        } else {
            self.llr_pools[self.m as usize].get(path.llr[self.m as usize])
        }
    }

    fn expand_and_prune(&mut self, b: usize) {
        let mut cands = std::mem::take(&mut self.cands);
        cands.clear();
        let (prune, m_u) = match &self.mode {
            Mode::Bitwise { frozen } => {
                let frozen = frozen[b];
                for (p, path) in self.paths.iter().enumerate() {
                    let llr = self.root_llrs(path)[0];
                    push_leaf_candidates(&self.domain, p, path.metric, llr, frozen, &mut cands);
                }
                (!frozen, usize::from(!frozen))
            }
            Mode::Lclm { plans } => {
                let plan = &plans[b];
                let mut root = std::mem::take(&mut self.root);
                for (p, path) in self.paths.iter().enumerate() {
                    root.clear();
                    root.extend_from_slice(self.root_llrs(path));
                    lclm::push_block_candidates(
                        &self.domain,
                        p,
                        path.metric,
                        &root,
                        plan,
                        &mut self.scratch,
                        &mut cands,
                    );
                }
                self.root = root;
                (plan.unreliable_count() > 0, plan.unreliable_count())
            }
        };
        let produced = cands.len();
        if prune {
            prune_in_place(&self.domain, &mut cands, self.list_size);
        }
        let d = &self.domain;
        if let Some(floor) = cands.iter().map(|c| c.metric).min_by(|a, b| d.cmp_metric(*a, *b)) {
            for c in &mut cands {
                c.metric = d.rebase(c.metric, floor);
            }
        }
        if let Some(trace) = self.trace.as_mut() {
            trace.push(PruneRecord {
                block: b,
                parent_metrics: self.paths.iter().map(|p| p.metric).collect(),
                candidates: produced,
                pruned: prune,
                rounds: if prune { lclm::sorter_rounds(m_u) } else { 0 },
                survivors: cands.iter().map(|c| (c.parent, c.metric)).collect(),
            });
        }
        self.cands = cands;
    }

    /// Replaces the list by the survivors and folds their decisions into the
    /// partial sums.
    fn advance(&mut self, b: usize) {
        let n = self.n;
        let m = self.m;
        let in_place =
            self.cands.len() == self.paths.len() && self.cands.iter().enumerate().all(|(i, c)| c.parent == i);
        if in_place {
            for (path, c) in self.paths.iter_mut().zip(&self.cands) {
                path.metric = c.metric;
                self.hist.push(HistNode {
                    prev: path.hist,
                    leaves: c.leaves,
                });
                path.hist = (self.hist.len() - 1) as u32;
            }
        } else {
            self.replace_paths();
        }
        if m == n {
            return;
        }
        let block_len = 1usize << m;
        let side = b & 1;
        for (path, c) in self.paths.iter_mut().zip(&self.cands) {
            let pool = &mut self.sum_pools[m as usize];
            let id = pool.make_unique(&mut path.sums[m as usize][side]);
            let v = polar_transform_word(c.leaves, block_len);
            for (i, o) in pool.get_mut(id).iter_mut().enumerate() {
                *o = ((v >> i) & 1) as Bit;
            }
            let mut s = m as usize + 1;
            while s < n as usize && (b >> (s - m as usize - 1)) & 1 == 1 {
                let (lower, upper) = self.sum_pools.split_at_mut(s);
                let [l, r] = path.sums[s - 1];
                let out_side = (b >> (s - m as usize)) & 1;
                let out = upper[0].make_unique(&mut path.sums[s][out_side]);
                combine_sums(lower[s - 1].get(l), lower[s - 1].get(r), upper[0].get_mut(out));
                s += 1;
            }
        }
    }

    /// Builds the survivor list in `next`, sharing parent buffers, and swaps
    /// it in.
    fn replace_paths(&mut self) {
        let n = self.n;
        self.next.resize_with(self.cands.len(), || PathSlot::empty(n));
        let mut children = std::mem::take(&mut self.children);
        children.clear();
        children.resize(self.paths.len(), 0);
        for c in &self.cands {
            children[c.parent] += 1;
        }
        for (slot, c) in self.next.iter_mut().zip(&self.cands) {
            let parent = &mut self.paths[c.parent];
            children[c.parent] -= 1;
            if children[c.parent] == 0 {
                // Last child inherits the parent's buffers.
                std::mem::swap(&mut slot.llr, &mut parent.llr);
                std::mem::swap(&mut slot.sums, &mut parent.sums);
            } else {
                slot.llr.clone_from(&parent.llr);
                slot.sums.clone_from(&parent.sums);
                for s in 0..n as usize {
                    self.llr_pools[s].retain(slot.llr[s]);
                    self.sum_pools[s].retain(slot.sums[s][0]);
                    self.sum_pools[s].retain(slot.sums[s][1]);
                }
            }
            slot.metric = c.metric;
            self.hist.push(HistNode {
                prev: parent.hist,
                leaves: c.leaves,
            });
            slot.hist = (self.hist.len() - 1) as u32;
        }
        let mut orphans = children;
        orphans.clear();
        orphans.resize(self.paths.len(), 0);
        for c in &self.cands {
            orphans[c.parent] = 1;
        }
        for (path, _) in self.paths.iter().zip(&orphans).filter(|(_, &k)| k == 0) {
            for s in 0..n as usize {
                self.llr_pools[s].release(path.llr[s]);
                self.sum_pools[s].release(path.sums[s][0]);
                self.sum_pools[s].release(path.sums[s][1]);
            }
        }
        self.children = orphans;
        std::mem::swap(&mut self.paths, &mut self.next);
    }

    fn collect(&self) -> PathList<D::Metric> {
        let block_len = 1usize << self.m;
        let blocks = 1usize << (self.n - self.m);
        let paths = self
            .paths
            .iter()
            .map(|p| {
                let mut u_hat = vec![0; 1 << self.n];
                let mut node = p.hist;
                for b in (0..blocks).rev() {
                    let h = self.hist[node as usize];
                    for i in 0..block_len {
                        u_hat[b * block_len + i] = ((h.leaves >> i) & 1) as Bit;
                    }
                    node = h.prev;
                }
                DecodedPath {
                    metric: p.metric,
                    u_hat,
                }
            })
            .collect();
        PathList { paths }
    }
}

/// Bit-by-bit CRC-aided list decoding with list size `l`.
pub fn decode_lscd_bitwise<D: LlrDomain>(
    d: &D,
    channel: &[D::Llr],
    spec: &PolarCodeSpec,
    l: usize,
) -> Result<PathList<D::Metric>> {
    ListDecoder::bitwise(d.clone(), spec, l)?.decode(channel)
}

/// Role of each leaf of a code in bit-by-bit decoding.
pub fn bitwise_roles(spec: &PolarCodeSpec) -> Vec<LeafRole> {
    spec.frozen_mask()
        .iter()
        .map(|&f| if f { LeafRole::Frozen } else { LeafRole::Unreliable })
        .collect()
}
