//! Exhaustive enumeration of outcome records for small systems.

use spinsq_core::schemes::{PairPatternDataset, PairSeries, Pattern};
use spinsq_core::states::DirectionMoments;
use spinsq_core::Direction;

/// Walks every combination of per-shot outcomes, skipping zero-probability
/// branches, and returns `(E[f], Var[f])`.
pub fn enumerate<F>(shots: &[Vec<(f64, (i8, i8))>], mut write: F, eval: &mut dyn FnMut() -> f64) -> (f64, f64)
where
    F: FnMut(usize, (i8, i8)),
{
    fn dfs<F: FnMut(usize, (i8, i8))>(
        i: usize,
        prob: f64,
        shots: &[Vec<(f64, (i8, i8))>],
        write: &mut F,
        eval: &mut dyn FnMut() -> f64,
        acc: &mut (f64, f64),
    ) {
        if i == shots.len() {
            let v = eval();
            acc.0 += prob * v;
            acc.1 += prob * v * v;
            return;
        }
        for &(p, outcome) in &shots[i] {
            if p == 0.0 {
                continue;
            }
            write(i, outcome);
            dfs(i + 1, prob * p, shots, write, eval, acc);
        }
    }
    let mut acc = (0.0, 0.0);
    dfs(0, 1.0, shots, &mut write, eval, &mut acc);
    (acc.0, acc.1 - acc.0 * acc.0)
}

pub fn joint(dm: &DirectionMoments, n: usize, i: usize, j: usize) -> Vec<(f64, (i8, i8))> {
    let (ei, ej, c) = (dm.singles[i], dm.singles[j], dm.pairs[i * n + j]);
    [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)]
        .into_iter()
        .map(|(a, b)| {
            let (af, bf) = (a as f64, b as f64);
            (((1.0 + af * ei + bf * ej + af * bf * c) / 4.0).max(0.0), (a, b))
        })
        .collect()
}

pub fn single(dm: &DirectionMoments, i: usize) -> Vec<(f64, (i8, i8))> {
    let e = dm.singles[i];
    vec![((1.0 + e) / 2.0, (1, 0)), ((1.0 - e) / 2.0, (-1, 0))]
}

pub fn pair_dataset(pattern: Pattern, n: usize, k: usize, d: Direction, pairs: Vec<(u32, u32)>) -> PairPatternDataset {
    let reps = if pattern == Pattern::SplitSingle || pattern == Pattern::RandomSplit {
        k / 2
    } else {
        k
    };
    let len = pairs.len() * reps;
    let mut blocks = [None, None, None];
    blocks[d.index()] = Some(PairSeries {
        id: 0,
        direction: d,
        pairs,
        reps,
        first: vec![1; len],
        second: vec![1; len],
    });
    PairPatternDataset {
        pattern,
        n_qubits: n,
        k,
        blocks,
    }
}

pub fn ordered_pairs(n: usize) -> Vec<(u32, u32)> {
    (0..n as u32)
        .flat_map(|i| (0..n as u32).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}
