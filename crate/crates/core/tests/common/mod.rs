//! Independent reference computations for integration tests. Nothing here
//! calls into the decoder internals: encoding, LLR propagation and metrics
//! are recomputed from their definitions with plain `f64` arithmetic.

#![allow(dead_code)]

use rand::Rng;

/// `u * F^{(x)n}` by the recursive definition `[enc(a) ^ enc(b), enc(b)]`.
pub fn encode_ref(u: &[u8]) -> Vec<u8> {
    if u.len() == 1 {
        return u.to_vec();
    }
    let half = u.len() / 2;
    let a = encode_ref(&u[..half]);
    let b = encode_ref(&u[half..]);
    a.iter().zip(&b).map(|(x, y)| x ^ y).chain(b.iter().copied()).collect()
}

pub fn f_ref(a: f64, b: f64) -> f64 {
    let mag = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -mag
    } else {
        mag
    }
}

pub fn g_ref(s: u8, a: f64, b: f64) -> f64 {
    if s == 0 {
        b + a
    } else {
        b - a
    }
}

/// Leaf LLRs seen by a successive-cancellation walk that decides `u`.
pub fn leaf_llrs_ref(root: &[f64], u: &[u8]) -> Vec<f64> {
    if root.len() == 1 {
        return root.to_vec();
    }
    let half = root.len() / 2;
    let (a, b) = root.split_at(half);
    let left_in: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| f_ref(x, y)).collect();
    let mut out = leaf_llrs_ref(&left_in, &u[..half]);
    let s = encode_ref(&u[..half]);
    let right_in: Vec<f64> = a.iter().zip(b).zip(&s).map(|((&x, &y), &s)| g_ref(s, x, y)).collect();
    out.extend(leaf_llrs_ref(&right_in, &u[half..]));
    out
}

/// Accumulated per-leaf penalty of deciding `u`: `|lambda_i|` wherever
/// `u_i` disagrees with the sign of its leaf LLR.
pub fn sequential_metric_ref(gamma: f64, root: &[f64], u: &[u8]) -> f64 {
    gamma
        + leaf_llrs_ref(root, u)
            .iter()
            .zip(u)
            .filter(|&(&l, &b)| b != u8::from(l < 0.0))
            .map(|(l, _)| l.abs())
            .sum::<f64>()
}

/// Successive cancellation that hard-decides every leaf not in `fixed`,
/// which maps a leaf index to its forced value. Returns the decided leaves
/// and their accumulated penalty.
pub fn sc_with_forced_ref(gamma: f64, root: &[f64], fixed: &dyn Fn(usize) -> Option<u8>) -> (Vec<u8>, f64) {
    fn walk(root: &[f64], offset: usize, fixed: &dyn Fn(usize) -> Option<u8>, u: &mut Vec<u8>, pm: &mut f64) {
        if root.len() == 1 {
            let l = root[0];
            let hard = u8::from(l < 0.0);
            let bit = fixed(offset).unwrap_or(hard);
            if bit != hard {
                *pm += l.abs();
            }
            u.push(bit);
            return;
        }
        let half = root.len() / 2;
        let (a, b) = root.split_at(half);
        let left_in: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| f_ref(x, y)).collect();
        let start = u.len();
        walk(&left_in, offset, fixed, u, pm);
        let s = encode_ref(&u[start..start + half]);
        let right_in: Vec<f64> = a.iter().zip(b).zip(&s).map(|((&x, &y), &s)| g_ref(s, x, y)).collect();
        walk(&right_in, offset + half, fixed, u, pm);
    }
    let mut u = Vec::with_capacity(root.len());
    let mut pm = gamma;
    walk(root, 0, fixed, &mut u, &mut pm);
    (u, pm)
}

pub fn random_bits<R: Rng>(rng: &mut R, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..=1)).collect()
}

/// Random subset of `0..n` with `k` elements, sorted.
pub fn random_subset<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        all.swap(i, j);
    }
    let mut s = all[..k].to_vec();
    s.sort_unstable();
    s
}
