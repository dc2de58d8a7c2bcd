//! Property tests for the measure, alignment, stability and shuffle
//! invariants that must hold for *every* input, not just fixtures.

use std::collections::HashSet;

use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use topicstab::alignment::greedy_match;
use topicstab::inference::shuffle_corpus;
use topicstab::measures::{jis, jss, rbo, top_n, TopNList};
use topicstab::stability::instability;
use topicstab::types::{Corpus, Vocabulary};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Random point on the probability simplex of the given dimension.
fn simplex(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6..1.0f64, dim).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    })
}

fn simplex_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=8).prop_flat_map(|dim| (simplex(dim), simplex(dim)))
}

/// Ranked list of distinct indices, built from a seeded shuffle so lists of
/// equal content but different order are exercised.
fn ranking(len: usize, universe: usize, seed: u64) -> TopNList {
    let mut pool: Vec<usize> = (0..universe).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..pool.len()).rev() {
        let j = rng.random_range(0..=i);
        pool.swap(i, j);
    }
    pool.truncate(len);
    TopNList::new(pool).expect("distinct by construction")
}

fn ranking_pair() -> impl Strategy<Value = (TopNList, TopNList)> {
    (1usize..=10, 1usize..=10, any::<u64>(), any::<u64>()).prop_map(|(la, lb, sa, sb)| {
        (ranking(la, 20, sa), ranking(lb, 20, sb))
    })
}

/// Equal-length pair, as produced by `top_n` at a fixed depth (the only
/// shape `rbo` accepts).
fn equal_ranking_pair() -> impl Strategy<Value = (TopNList, TopNList)> {
    (1usize..=10, any::<u64>(), any::<u64>())
        .prop_map(|(len, sa, sb)| (ranking(len, 20, sa), ranking(len, 20, sb)))
}

proptest! {
    #[test]
    fn jss_is_symmetric_bounded_and_one_on_identity((p, q) in simplex_pair()) {
        let s = jss(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s.to_bits(), jss(&q, &p).unwrap().to_bits());
        prop_assert!((jss(&p, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jis_is_symmetric_bounded_and_one_on_identity((a, b) in ranking_pair()) {
        let s = jis(&a, &b);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, jis(&b, &a));
        prop_assert_eq!(jis(&a, &a), 1.0);
    }

    #[test]
    fn rbo_is_symmetric_bounded_and_one_on_identity(
        (a, b) in equal_ranking_pair(),
        p in 0.05f64..=0.95,
    ) {
        let s = rbo(&a, &b, p).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s.to_bits(), rbo(&b, &a, p).unwrap().to_bits());
        prop_assert!((rbo(&a, &a, p).unwrap() - 1.0).abs() < 1e-12);
    }

    /// As p -> 1 the extrapolated RBO tends to X_n/n: the truncation term
    /// (X_n/n)p^n dominates while the (1-p)/p weighted sum vanishes.
    #[test]
    fn rbo_limit_is_final_overlap_over_depth(seeds in (any::<u64>(), any::<u64>()), len in 1usize..=10) {
        let a = ranking(len, 20, seeds.0);
        let b = ranking(len, 20, seeds.1);
        let sa: HashSet<usize> = a.as_slice().iter().copied().collect();
        let sb: HashSet<usize> = b.as_slice().iter().copied().collect();
        let expected = sa.intersection(&sb).count() as f64 / len as f64;
        let got = rbo(&a, &b, 0.9999).unwrap();
        prop_assert!((got - expected).abs() < 1e-3,
            "rbo at p->1 was {got}, expected ~{expected}");
    }

    /// On a matrix whose diagonal strictly dominates every off-diagonal
    /// entry the identity permutation is the unique optimum, and greedy
    /// must find it.
    #[test]
    fn greedy_finds_the_planted_diagonal(
        k in 2usize..=6,
        raw in prop::collection::vec(0.0f64..1.0, 36),
    ) {
        let mut sim = vec![vec![0.0; k]; k];
        for r in 0..k {
            for c in 0..k {
                let u = raw[r * 6 + c];
                sim[r][c] = if r == c { 0.7 + 0.3 * u } else { 0.5 * u };
            }
        }
        let matching = greedy_match(&sim).unwrap();
        prop_assert_eq!(matching.len(), k);
        for &(r, c) in matching.pairs() {
            prop_assert_eq!(r, c);
        }
        // Any deviation set S swaps diagonal mass >= 0.7|S| for <= 0.5|S|,
        // so the greedy total is the exhaustive maximum.
        let greedy_total: f64 = matching.scores().iter().sum();
        let brute = brute_force_total(&sim);
        prop_assert!((greedy_total - brute).abs() < 1e-12);
    }

    #[test]
    fn instability_is_bounded_order_free_and_improved_by_ideal_points(
        points in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..12),
    ) {
        let value = instability(&points).unwrap();
        prop_assert!((0.0..=SQRT_2 + 1e-12).contains(&value));

        let mut reversed = points.clone();
        reversed.reverse();
        prop_assert!((instability(&reversed).unwrap() - value).abs() < 1e-12);

        let mut with_ideal = points.clone();
        with_ideal.push((1.0, 0.0));
        prop_assert!(instability(&with_ideal).unwrap() <= value + 1e-15);
    }

    #[test]
    fn document_shuffle_preserves_the_document_multiset(
        vocab_and_docs in (2usize..=9).prop_flat_map(|v| {
            (Just(v), prop::collection::vec(
                prop::collection::vec(0u32..v as u32, 1..8), 1..8))
        }),
        seed in any::<u64>(),
    ) {
        let (v, docs) = vocab_and_docs;
        let corpus = Corpus::new(Vocabulary::synthetic(v).unwrap(), docs.clone()).unwrap();
        let shuffled = shuffle_corpus(&corpus, seed);
        let again = shuffle_corpus(&corpus, seed);
        prop_assert_eq!(&shuffled, &again); // same seed, same order

        let mut original = docs;
        let mut permuted: Vec<Vec<u32>> = shuffled.documents().to_vec();
        prop_assert_eq!(permuted.len(), original.len());
        original.sort();
        permuted.sort();
        prop_assert_eq!(original, permuted);
    }

    #[test]
    fn top_n_sorts_by_value_then_index(
        values in prop::collection::vec(0.0f64..1.0, 1..12),
        n_frac in 0.0f64..1.0,
    ) {
        let n = 1 + (n_frac * (values.len() - 1) as f64) as usize;
        let got = top_n(&values, n).unwrap();

        let mut expected: Vec<usize> = (0..values.len()).collect();
        expected.sort_by(|&i, &j| {
            values[j].total_cmp(&values[i]).then(i.cmp(&j))
        });
        expected.truncate(n);
        prop_assert_eq!(got.as_slice(), &expected[..]);
    }
}

fn brute_force_total(sim: &[Vec<f64>]) -> f64 {
    fn rec(perm: &mut Vec<usize>, i: usize, sim: &[Vec<f64>], best: &mut f64) {
        let k = perm.len();
        if i == k {
            let total: f64 = (0..k).map(|r| sim[r][perm[r]]).sum();
            if total > *best {
                *best = total;
            }
            return;
        }
        for j in i..k {
            perm.swap(i, j);
            rec(perm, i + 1, sim, best);
            perm.swap(i, j);
        }
    }
    let mut perm: Vec<usize> = (0..sim.len()).collect();
    let mut best = f64::NEG_INFINITY;
    rec(&mut perm, 0, sim, &mut best);
    best
}
