use polar_lscd::construction::{build_code_spec, gaussian_approx_reliabilities, partition_selective_expansion};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Exact check-node combination.
fn boxplus(a: f64, b: f64) -> f64 {
    let t = (a / 2.0).tanh() * (b / 2.0).tanh();
    2.0 * t.clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh()
}

/// Genie-aided SC on the all-zero codeword: leaf LLRs with every earlier
/// bit known to be 0.
fn genie_leaves(root: &[f64], out: &mut Vec<f64>) {
    if root.len() == 1 {
        out.push(root[0]);
        return;
    }
    let half = root.len() / 2;
    let (a, b) = root.split_at(half);
    let left: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| boxplus(x, y)).collect();
    genie_leaves(&left, out);
    let right: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x + y).collect();
    genie_leaves(&right, out);
}

#[test]
fn gaussian_approximation_tracks_monte_carlo() {
    let n = 3;
    let es_n0_db = 0.0;
    let profile = gaussian_approx_reliabilities(n, es_n0_db).unwrap();
    let sigma = (0.5 / 10f64.powf(es_n0_db / 10.0)).sqrt();
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 200_000;
    let mut errors = [0.0f64; 8];
    let mut leaves = Vec::with_capacity(8);
    for _ in 0..trials {
        let root: Vec<f64> = (0..8)
            .map(|_| 2.0 * (1.0 + noise.sample(&mut rng)) / (sigma * sigma))
            .collect();
        leaves.clear();
        genie_leaves(&root, &mut leaves);
        for (e, &l) in errors.iter_mut().zip(&leaves) {
            if l < 0.0 {
                *e += 1.0;
            } else if l == 0.0 {
                *e += 0.5;
            }
        }
    }
    let mut checked = 0;
    for (i, &e) in errors.iter().enumerate() {
        let measured = e / trials as f64;
        let predicted = profile.pe[i];
        // Only bits with enough observed errors for a meaningful ratio.
        if measured * trials as f64 >= 200.0 {
            let ratio = predicted / measured;
            assert!(
                (1.0 / 3.0..=3.0).contains(&ratio),
                "bit {i}: GA {predicted:.3e} vs MC {measured:.3e}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 4, "only {checked} bits had enough errors");
}

#[test]
fn small_code_information_set() {
    let profile = gaussian_approx_reliabilities(3, 2.0).unwrap();
    let spec = build_code_spec(&profile, 4, 0).unwrap();
    assert_eq!(spec.info_set(), &[3, 5, 6, 7]);
}

proptest! {
    /// Setting an index bit moves a bit-channel to a G branch, which never
    /// degrades it.
    #[test]
    fn reliability_respects_the_partial_order(n in 1u32..=10, snr in -5.0f64..8.0) {
        let p = gaussian_approx_reliabilities(n, snr).unwrap();
        for i in 0..p.block_len() {
            for b in 0..n {
                let j = i | (1 << b);
                if j != i {
                    prop_assert!(p.ln_pe[j] <= p.ln_pe[i] + 1e-9, "ln_pe[{}] > ln_pe[{}]", j, i);
                }
            }
        }
    }

    #[test]
    fn partition_splits_the_information_set(n in 2u32..=10, snr in -2.0f64..5.0, eta in 0.0f64..=1.0, frac in 0.1f64..0.9) {
        let p = gaussian_approx_reliabilities(n, snr).unwrap();
        let k = ((p.block_len() as f64 * frac) as usize).max(1);
        let spec = build_code_spec(&p, k, 0).unwrap();
        let part = partition_selective_expansion(&spec, &p, eta).unwrap();
        prop_assert_eq!(part.unreliable.len() + part.reliable.len(), k);
        prop_assert!(!part.unreliable.is_empty());
        let worst_reliable = part.reliable.iter().map(|&i| p.ln_pe[i]).fold(f64::NEG_INFINITY, f64::max);
        let best_unreliable = part.unreliable.iter().map(|&i| p.ln_pe[i]).fold(f64::INFINITY, f64::min);
        prop_assert!(worst_reliable < best_unreliable);
    }
}
