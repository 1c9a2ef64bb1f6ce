//! Multi-bit decisions with selective expansion.
//!
//! A block is the set of `M = 2^m` leaves under one stage-`m` node. Only the
//! unreliable information leaves of a block are branched on; for each of
//! their assignments the reliable leaves are filled in by minimizing the
//! block's path metric. Blocks without unreliable leaves keep the list size
//! unchanged and need no sorting.

use crate::arith::LlrDomain;
use crate::codec::{polar_transform_word, Bit};
use crate::construction::{LeafRole, PolarCodeSpec, SePartition};
use crate::decoder::list::{prune_in_place, Candidate, ListDecoder, PathList, MAX_SUBTREE_DEPTH};
use crate::error::{invalid, Error, Result};

/// Leaf positions of one block, grouped by role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BlockPlan {
    len: usize,
    unreliable: Vec<u8>,
    reliable: Vec<u8>,
    /// Re-encoded contribution of each reliable leaf, indexed by its bit in
    /// the reliable assignment (bit 0 is the last reliable leaf).
    reliable_rows: Vec<u32>,
    /// Whether a penalty table over all `2^len` words is cheaper than
    /// summing penalties word by word.
    tabulate: bool,
}

impl BlockPlan {
    pub(crate) fn new(roles: &[LeafRole]) -> Self {
        let pick = |want: LeafRole| -> Vec<u8> {
            roles
                .iter()
                .enumerate()
                .filter(|&(_, &r)| r == want)
                .map(|(i, _)| i as u8)
                .collect()
        };
        let len = roles.len();
        let unreliable = pick(LeafRole::Unreliable);
        let reliable = pick(LeafRole::Reliable);
        let reliable_rows = reliable
            .iter()
            .rev()
            .map(|&p| polar_transform_word(1 << p, len))
            .collect();
        let words = unreliable.len() + reliable.len();
        let tabulate = (1usize << words) * len.max(2) / 2 > 1 << len;
        Self {
            len,
            unreliable,
            reliable,
            reliable_rows,
            tabulate,
        }
    }

    pub(crate) fn unreliable_count(&self) -> usize {
        self.unreliable.len()
    }
}

/// Scatters the bits of `assignment` onto `positions`, first position taking
/// the most significant bit.
#[inline]
fn scatter(assignment: u32, positions: &[u8]) -> u32 {
    let k = positions.len();
    positions
        .iter()
        .enumerate()
        .fold(0, |w, (j, &p)| w | (((assignment >> (k - 1 - j)) & 1) << p))
}

/// Hard decisions of a block root, packed LSB-first.
#[inline]
fn hard_word<D: LlrDomain>(d: &D, root: &[D::Llr]) -> u32 {
    root.iter()
        .enumerate()
        .fold(0, |w, (i, &l)| w | (u32::from(d.hard_decision(l)) << i))
}

#[inline]
fn penalty<D: LlrDomain>(d: &D, gamma: D::Metric, root: &[D::Llr], mut disagree: u32) -> D::Metric {
    let mut pm = gamma;
    while disagree != 0 {
        let i = disagree.trailing_zeros() as usize;
        pm = d.penalize(pm, root[i]);
        disagree &= disagree - 1;
    }
    pm
}

/// Penalty of every disagreement word. Each entry adds its highest
/// disagreeing position last, the same order [`penalty`] uses, so entries
/// match it exactly.
fn fill_penalty_table<D: LlrDomain>(d: &D, gamma: D::Metric, root: &[D::Llr], table: &mut Vec<D::Metric>) {
    table.clear();
    table.push(gamma);
    for w in 1..1u32 << root.len() {
        let top = 31 - w.leading_zeros();
        let pm = d.penalize(table[(w ^ (1 << top)) as usize], root[top as usize]);
        table.push(pm);
    }
}

/// Best completion of the reliable leaves for a fixed unreliable assignment:
/// `(metric, leaves)`. Ties keep the lexicographically first completion.
///
/// Reliable assignments are visited in Gray-code order so each step flips
/// one leaf and one row of the re-encoded word.
#[inline]
fn best_completion<D: LlrDomain>(
    d: &D,
    gamma: D::Metric,
    root: &[D::Llr],
    hard: u32,
    plan: &BlockPlan,
    table: Option<&[D::Metric]>,
    assignment: u32,
) -> (D::Metric, u32) {
    let eval = |v: u32| match table {
        Some(t) => t[(v ^ hard) as usize],
        None => penalty(d, gamma, root, v ^ hard),
    };
    let base = scatter(assignment, &plan.unreliable);
    let mut v = polar_transform_word(base, plan.len);
    let mut best = (eval(v), 0u32);
    for i in 1..1u32 << plan.reliable.len() {
        v ^= plan.reliable_rows[i.trailing_zeros() as usize];
        let r = i ^ (i >> 1);
        let pm = eval(v);
        let order = d.cmp_metric(pm, best.0);
        if order.is_lt() || (order.is_eq() && r < best.1) {
            best = (pm, r);
        }
    }
    (best.0, base | scatter(best.1, &plan.reliable))
}

/// Reusable buffers of block expansion.
#[derive(Debug, Clone, Default)]
pub(crate) struct Scratch<M> {
    table: Vec<M>,
}

pub(crate) fn push_block_candidates<D: LlrDomain>(
    d: &D,
    parent: usize,
    gamma: D::Metric,
    root: &[D::Llr],
    plan: &BlockPlan,
    scratch: &mut Scratch<D::Metric>,
    out: &mut Vec<Candidate<D::Metric>>,
) {
    let hard = hard_word(d, root);
    let table = if plan.tabulate {
        fill_penalty_table(d, gamma, root, &mut scratch.table);
        Some(scratch.table.as_slice())
    } else {
        None
    };
    for a in 0..1u32 << plan.unreliable.len() {
        let (metric, leaves) = best_completion(d, gamma, root, hard, plan, table, a);
        out.push(Candidate {
            metric,
            parent,
            branch: a,
            leaves,
        });
    }
}

/// Passes of a 2L-to-L sorter needed to reduce `2^m_u * L` candidates to `L`.
pub fn sorter_rounds(m_u: usize) -> usize {
    ((1usize << m_u) - 1).max(1)
}

/// A block as seen by one path: its root LLRs and the role of each leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtreeBlock<L> {
    pub root_llrs: Vec<L>,
    pub roles: Vec<LeafRole>,
}

impl<L> SubtreeBlock<L> {
    fn check(&self) -> Result<()> {
        let len = self.root_llrs.len();
        if !len.is_power_of_two() || len > 1 << MAX_SUBTREE_DEPTH {
            return Err(invalid(format!("block of {len} leaves is not a power of two up to 16")));
        }
        if self.roles.len() != len {
            return Err(invalid("one role per leaf is required"));
        }
        Ok(())
    }
}

/// Candidate of a single-path block expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCandidate<M> {
    pub metric: M,
    /// Assignment of the unreliable leaves, in leaf order.
    pub unreliable: Vec<Bit>,
    /// All decided leaves of the block.
    pub leaves: Vec<Bit>,
}

fn unpack(w: u32, len: usize) -> Vec<Bit> {
    (0..len).map(|i| ((w >> i) & 1) as Bit).collect()
}

/// Block path metric: `gamma` plus `|L_i|` for every position where the
/// re-encoded leaves disagree with the hard decision of the root LLRs.
pub fn mbd_metric<D: LlrDomain>(d: &D, gamma: D::Metric, root_llrs: &[D::Llr], leaves: &[Bit]) -> Result<D::Metric> {
    let len = root_llrs.len();
    if leaves.len() != len || !len.is_power_of_two() || len > 32 {
        return Err(invalid(format!("{} leaves for a block of {len}", leaves.len())));
    }
    let w = leaves
        .iter()
        .enumerate()
        .fold(0u32, |w, (i, &b)| w | (u32::from(b & 1) << i));
    let v = polar_transform_word(w, len);
    Ok(penalty(d, gamma, root_llrs, v ^ hard_word(d, root_llrs)))
}

/// Completes a block for one assignment of its unreliable leaves.
pub fn lclm_expand<D: LlrDomain>(
    d: &D,
    gamma: D::Metric,
    block: &SubtreeBlock<D::Llr>,
    unreliable: &[Bit],
) -> Result<ExpansionCandidate<D::Metric>> {
    block.check()?;
    let plan = BlockPlan::new(&block.roles);
    if unreliable.len() != plan.unreliable.len() {
        return Err(invalid(format!(
            "{} bits given for {} unreliable leaves",
            unreliable.len(),
            plan.unreliable.len()
        )));
    }
    let a = unreliable.iter().fold(0u32, |a, &b| (a << 1) | u32::from(b & 1));
    let hard = hard_word(d, &block.root_llrs);
    let (metric, leaves) = best_completion(d, gamma, &block.root_llrs, hard, &plan, None, a);
    Ok(ExpansionCandidate {
        metric,
        unreliable: unreliable.to_vec(),
        leaves: unpack(leaves, plan.len),
    })
}

/// Expands every path on its block; `blocks[p]` belongs to the path with
/// metric `metrics[p]`. Emits `2^{M_u}` candidates per path, grouped by path.
pub fn expand_block<D: LlrDomain>(
    d: &D,
    metrics: &[D::Metric],
    blocks: &[SubtreeBlock<D::Llr>],
) -> Result<Vec<Candidate<D::Metric>>> {
    if metrics.len() != blocks.len() {
        return Err(invalid("one block per path is required"));
    }
    let mut out = Vec::new();
    let mut scratch = Scratch::default();
    let mut roles: Option<&[LeafRole]> = None;
    for (p, (&g, block)) in metrics.iter().zip(blocks).enumerate() {
        block.check()?;
        if *roles.get_or_insert(&block.roles) != block.roles.as_slice() {
            return Err(Error::ContractViolation(
                "paths disagree on the block's leaf roles".into(),
            ));
        }
        push_block_candidates(
            d,
            p,
            g,
            &block.root_llrs,
            &BlockPlan::new(&block.roles),
            &mut scratch,
            &mut out,
        );
    }
    Ok(out)
}

/// Reduces `2^m_u * L` candidates to `L` and reports the number of sorter
/// passes the reduction takes.
pub fn serial_prune<D: LlrDomain>(
    d: &D,
    mut candidates: Vec<Candidate<D::Metric>>,
    l: usize,
    m_u: usize,
) -> Result<(Vec<Candidate<D::Metric>>, usize)> {
    if l == 0 {
        return Err(invalid("list size must be at least 1"));
    }
    if m_u == 0 {
        return Err(Error::ContractViolation(
            "a block without unreliable leaves is not pruned".into(),
        ));
    }
    prune_in_place(d, &mut candidates, l);
    Ok((candidates, sorter_rounds(m_u)))
}

/// List decoding with multi-bit decisions on `2^m`-leaf blocks.
pub fn decode_lscd_lclm<D: LlrDomain>(
    d: &D,
    channel: &[D::Llr],
    spec: &PolarCodeSpec,
    partition: &SePartition,
    l: usize,
    m: u32,
) -> Result<PathList<D::Metric>> {
    ListDecoder::lclm(d.clone(), spec, partition, l, m)?.decode(channel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{FixedPoint, FloatingPoint};
    use crate::codec::polar_transform;
    use LeafRole::{Frozen as F, Reliable as R, Unreliable as U};

    fn q8() -> FixedPoint {
        FixedPoint::hardware_default()
    }

    /// Metric by direct re-encoding, no packed words.
    fn oracle_metric(gamma: f64, root: &[f64], leaves: &[Bit]) -> f64 {
        let v = polar_transform(leaves).unwrap();
        gamma
            + root
                .iter()
                .zip(&v)
                .filter(|&(&l, &b)| b != u8::from(l < 0.0))
                .map(|(l, _)| l.abs())
                .sum::<f64>()
    }

    #[test]
    fn metric_examples() {
        let d = q8();
        let root = [3, -2, 5, -1];
        assert_eq!(mbd_metric(&d, 0, &root, &[0, 1, 0, 0]).unwrap(), 4);
        assert_eq!(mbd_metric(&d, 0, &root, &[1, 0, 1, 1]).unwrap(), 3);
        assert_eq!(mbd_metric(&d, 4, &[-1], &[1]).unwrap(), 4);
        assert_eq!(mbd_metric(&d, 4, &[-1], &[0]).unwrap(), 5);
        assert!(mbd_metric(&d, 0, &root, &[0, 1]).is_err());
    }

    #[test]
    fn metric_matches_reencoding_oracle() {
        let root = [0.7, -1.3, 2.2, -0.1, 0.4, -3.0, 1.1, 0.9];
        for w in 0..256u32 {
            let leaves = unpack(w, 8);
            let got = mbd_metric(&FloatingPoint, 1.5, &root, &leaves).unwrap();
            assert!((got - oracle_metric(1.5, &root, &leaves)).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_saturates() {
        let d = q8();
        assert_eq!(mbd_metric(&d, 500, &[-128, 127], &[0, 1]).unwrap(), 511);
    }

    #[test]
    fn expand_picks_best_reliable_completion() {
        let d = q8();
        let block = SubtreeBlock {
            root_llrs: vec![3, -2, 5, -1],
            roles: vec![F, U, R, R],
        };
        for a in [0u8, 1] {
            let got = lclm_expand(&d, 0, &block, &[a]).unwrap();
            let mut best = u32::MAX;
            for r in 0..4u8 {
                let leaves = [0, a, r >> 1, r & 1];
                best = best.min(mbd_metric(&d, 0, &block.root_llrs, &leaves).unwrap());
            }
            assert_eq!(got.metric, best);
            assert_eq!(got.leaves[1], a);
            assert_eq!(got.leaves[0], 0);
        }
    }

    #[test]
    fn ties_keep_lexicographically_first_completion() {
        let d = q8();
        let block = SubtreeBlock {
            root_llrs: vec![0, 0],
            roles: vec![R, R],
        };
        let got = lclm_expand(&d, 0, &block, &[]).unwrap();
        assert_eq!(got.leaves, vec![0, 0]);
    }

    #[test]
    fn all_frozen_block_has_a_single_completion() {
        let d = q8();
        let block = SubtreeBlock {
            root_llrs: vec![-4, 3, 2, -1],
            roles: vec![F; 4],
        };
        let got = lclm_expand(&d, 2, &block, &[]).unwrap();
        assert_eq!(got.leaves, vec![0; 4]);
        assert_eq!(got.metric, 2 + 4 + 1);
    }

    #[test]
    fn expansion_count_and_rounds() {
        let d = q8();
        let roles = vec![F, U, U, R];
        let blocks: Vec<_> = (0..4)
            .map(|p| SubtreeBlock {
                root_llrs: vec![p, -p, 1, 2],
                roles: roles.clone(),
            })
            .collect();
        let cands = expand_block(&d, &[0, 1, 2, 3], &blocks).unwrap();
        assert_eq!(cands.len(), 4 * 4);
        let (kept, rounds) = serial_prune(&d, cands, 4, 2).unwrap();
        assert_eq!(kept.len(), 4);
        assert_eq!(rounds, 3);
        assert_eq!(sorter_rounds(1), 1);
        assert_eq!(sorter_rounds(3), 7);
    }

    #[test]
    fn selective_expansion_never_beats_full_expansion() {
        // Minimum over fewer candidates is at least the minimum over more.
        let d = q8();
        let root = vec![5, -3, 1, -7];
        let se = SubtreeBlock {
            root_llrs: root.clone(),
            roles: vec![F, U, R, R],
        };
        let full = SubtreeBlock {
            root_llrs: root,
            roles: vec![F, U, U, U],
        };
        let se_best = expand_block(&d, &[0], &[se]).unwrap().iter().map(|c| c.metric).min();
        let full_best = expand_block(&d, &[0], &[full]).unwrap().iter().map(|c| c.metric).min();
        assert_eq!(se_best, full_best);
    }

    #[test]
    fn mismatched_roles_are_rejected() {
        let d = q8();
        let a = SubtreeBlock {
            root_llrs: vec![1, 1],
            roles: vec![F, U],
        };
        let b = SubtreeBlock {
            root_llrs: vec![1, 1],
            roles: vec![U, U],
        };
        assert!(expand_block(&d, &[0, 0], &[a, b]).is_err());
        assert!(serial_prune(&d, vec![], 2, 0).is_err());
    }

    /// Completion by trying every reliable assignment in numeric order.
    fn brute_completion(d: &FixedPoint, gamma: u32, root: &[i32], plan: &BlockPlan, a: u32) -> (u32, u32) {
        let base = scatter(a, &plan.unreliable);
        let mut best: Option<(u32, u32)> = None;
        for r in 0..1u32 << plan.reliable.len() {
            let leaves = base | scatter(r, &plan.reliable);
            let pm = mbd_metric(d, gamma, root, &unpack(leaves, plan.len)).unwrap();
            if best.is_none_or(|(b, _)| pm < b) {
                best = Some((pm, leaves));
            }
        }
        best.unwrap()
    }

    proptest::proptest! {
        #[test]
        fn gray_search_matches_brute_force(
            m in 0u32..=4,
            seed in proptest::prelude::any::<u64>(),
            gamma in 0u32..400,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = q8();
            let len = 1usize << m;
            // Small LLRs make ties common.
            let root: Vec<i32> = (0..len).map(|_| rng.random_range(-3..=3)).collect();
            let roles: Vec<LeafRole> = (0..len).map(|_| [F, U, R, R][rng.random_range(0..4)]).collect();
            let plan = BlockPlan::new(&roles);
            let hard = hard_word(&d, &root);
            let mut table = Vec::new();
            fill_penalty_table(&d, gamma, &root, &mut table);
            for a in 0..1u32 << plan.unreliable.len() {
                let want = brute_completion(&d, gamma, &root, &plan, a);
                proptest::prop_assert_eq!(best_completion(&d, gamma, &root, hard, &plan, None, a), want);
                proptest::prop_assert_eq!(best_completion(&d, gamma, &root, hard, &plan, Some(&table), a), want);
            }
        }
    }
}
