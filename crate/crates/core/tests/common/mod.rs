//! Shared helpers for the integration tests.
#![allow(dead_code)]

pub mod enumerate;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinsq_core::schemes::{PairPatternDataset, PairSeries, Pattern};
use spinsq_core::Direction;

/// Uniformly random +-1 outcomes in the layout of `pattern`.
pub fn random_dataset(pattern: Pattern, n: usize, k: usize, l: usize, seed: u64) -> PairPatternDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reps = if matches!(pattern, Pattern::SplitSingle | Pattern::RandomSplit) {
        k / 2
    } else {
        k
    };
    let blocks = Direction::ALL.map(|d| {
        let pairs: Vec<(u32, u32)> = match pattern {
            Pattern::AllPairs => (0..n as u32)
                .flat_map(|i| (0..n as u32).filter(move |&j| j != i).map(move |j| (i, j)))
                .collect(),
            Pattern::SplitSingle => (0..n as u32).flat_map(|i| (0..n as u32).map(move |j| (i, j))).collect(),
            Pattern::RandomPairs => (0..l)
                .map(|_| loop {
                    let (i, j) = (rng.gen_range(0..n as u32), rng.gen_range(0..n as u32));
                    if i != j {
                        break (i, j);
                    }
                })
                .collect(),
            Pattern::RandomSplit => (0..l)
                .map(|_| (rng.gen_range(0..n as u32), rng.gen_range(0..n as u32)))
                .collect(),
        };
        let len = pairs.len() * reps;
        let mut sign = || if rng.gen::<bool>() { 1i8 } else { -1 };
        let first = (0..len).map(|_| sign()).collect();
        let second = (0..len).map(|_| sign()).collect();
        Some(PairSeries {
            id: d.index() as u64,
            direction: d,
            pairs,
            reps,
            first,
            second,
        })
    });
    PairPatternDataset {
        pattern,
        n_qubits: n,
        k,
        blocks,
    }
}

fn at(s: &PairSeries, slot: usize, rep: usize) -> (i128, i128) {
    let idx = slot * s.reps + rep;
    (s.first[idx] as i128, s.second[idx] as i128)
}

/// `sum_{P,Q} sum_{k != l} e1(P,k) e2(Q,l)` by the literal quadruple sum.
pub fn naive_ap_cross(s: &PairSeries) -> i128 {
    let mut acc = 0;
    for p in 0..s.pairs.len() {
        for q in 0..s.pairs.len() {
            for k in 0..s.reps {
                for l in 0..s.reps {
                    if k != l {
                        acc += at(s, p, k).0 * at(s, q, l).1;
                    }
                }
            }
        }
    }
    acc
}

/// `sum_{l != m} sum_{k, q} e1(l,k) e2(m,q)` by the literal quadruple sum.
pub fn naive_rp_cross(s: &PairSeries) -> i128 {
    let mut acc = 0;
    for l in 0..s.pairs.len() {
        for m in 0..s.pairs.len() {
            if l == m {
                continue;
            }
            for k in 0..s.reps {
                for q in 0..s.reps {
                    acc += at(s, l, k).0 * at(s, m, q).1;
                }
            }
        }
    }
    acc
}

fn naive_products(s: &PairSeries) -> i128 {
    let mut acc = 0;
    for slot in 0..s.pairs.len() {
        for rep in 0..s.reps {
            let (a, b) = at(s, slot, rep);
            acc += a * b;
        }
    }
    acc
}

/// The all-pairs variance estimator written term by term from its
/// definition: `N/4 + (1/4K) sum_P sum_k e1 e2 - (1/4K(K-1)(N-1)^2) cross`.
pub fn naive_delta_j2_ap(ds: &PairPatternDataset, d: Direction) -> f64 {
    let s = ds.blocks[d.index()].as_ref().unwrap();
    let (n, k) = (ds.n_qubits as i128, s.reps as i128);
    let w = (n - 1) * (n - 1);
    let num = n * k * (k - 1) * w + naive_products(s) * (k - 1) * w - naive_ap_cross(s);
    num as f64 / (4 * k * (k - 1) * w) as f64
}

pub fn naive_delta_j2_rp(ds: &PairPatternDataset, d: Direction) -> f64 {
    let s = ds.blocks[d.index()].as_ref().unwrap();
    let (n, k, l) = (ds.n_qubits as i128, s.reps as i128, s.pairs.len() as i128);
    let num = n * l * (l - 1) * k * k + n * (n - 1) * naive_products(s) * (l - 1) * k - n * n * naive_rp_cross(s);
    num as f64 / (4 * l * (l - 1) * k * k) as f64
}
