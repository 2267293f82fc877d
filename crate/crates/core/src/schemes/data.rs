use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{Direction, StateSampler};

/// `K` total-spin outcomes along one axis, each stored as `2m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalSpinSeries {
    /// Identity of the physical data run. Two blocks of one estimate must
    /// never share it.
    pub id: u64,
    pub direction: Direction,
    pub outcomes: Vec<i32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalSpinDataset {
    pub n_qubits: usize,
    pub blocks: [Option<TotalSpinSeries>; 3],
}

impl TotalSpinDataset {
    pub fn block(&self, direction: Direction) -> Result<&TotalSpinSeries> {
        let series = self.blocks[direction.index()].as_ref().ok_or(Error::MissingBlock {
            pattern: "total-spin",
            direction,
        })?;
        if series.direction != direction {
            return Err(Error::DatasetMismatch(format!(
                "block in the {direction} slot holds {} data",
                series.direction
            )));
        }
        Ok(series)
    }
}

/// How the qubit pairs of a [`PairSeries`] are laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    /// Every ordered pair `i != j`, each measured jointly `K` times.
    AllPairs,
    /// Every ordered `(i, j)` including `i == j`; qubit `i` alone in `K/2`
    /// runs and qubit `j` alone in `K/2` other runs.
    SplitSingle,
    /// `L` ordered pairs `i != j` drawn uniformly, each measured jointly `K`
    /// times.
    RandomPairs,
    /// `L` ordered `(i, j)` drawn uniformly from all `N^2`, measured as in
    /// [`Pattern::SplitSingle`].
    RandomSplit,
}

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::AllPairs => "all-pairs",
            Pattern::SplitSingle => "split-single",
            Pattern::RandomPairs => "random-pairs",
            Pattern::RandomSplit => "random-split",
        }
    }

    pub fn is_split(self) -> bool {
        matches!(self, Pattern::SplitSingle | Pattern::RandomSplit)
    }

    pub fn is_random(self) -> bool {
        matches!(self, Pattern::RandomPairs | Pattern::RandomSplit)
    }

    /// Preparations spent per stored `(first, second)` entry.
    pub fn preparations_per_entry(self) -> u64 {
        if self.is_split() {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcomes for a list of qubit pairs along one axis.
///
/// Entry `slot * reps + rep` holds the `rep`-th outcome pair of
/// `pairs[slot]`. For joint patterns both values come from the same shot;
/// for split patterns they come from two different shots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSeries {
    pub id: u64,
    pub direction: Direction,
    pub pairs: Vec<(u32, u32)>,
    pub reps: usize,
    pub first: Vec<i8>,
    pub second: Vec<i8>,
}

impl PairSeries {
    pub fn slot(&self, slot: usize) -> (&[i8], &[i8]) {
        let range = slot * self.reps..(slot + 1) * self.reps;
        (&self.first[range.clone()], &self.second[range])
    }
}

/// Pair or split data for up to three axes, all with the same layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairPatternDataset {
    pub pattern: Pattern,
    pub n_qubits: usize,
    /// Repetitions per pair. For split patterns this is the full `K`; each
    /// qubit of a slot gets `K/2` shots.
    pub k: usize,
    pub blocks: [Option<PairSeries>; 3],
}

impl PairPatternDataset {
    /// The block for `direction`, checked for shape and pattern coverage.
    pub fn block(&self, direction: Direction) -> Result<&PairSeries> {
        let series = self.blocks[direction.index()].as_ref().ok_or(Error::MissingBlock {
            pattern: self.pattern.name(),
            direction,
        })?;
        self.check(series, direction)?;
        Ok(series)
    }

    fn check(&self, s: &PairSeries, direction: Direction) -> Result<()> {
        let bad = |msg: String| Err(Error::DatasetMismatch(format!("{} {direction}: {msg}", self.pattern)));
        let n = self.n_qubits;
        if s.direction != direction {
            return bad(format!("block holds {} data", s.direction));
        }
        let expected_reps = if self.pattern.is_split() { self.k / 2 } else { self.k };
        if s.reps != expected_reps || s.reps == 0 {
            return bad(format!("{} repetitions per pair, expected {expected_reps}", s.reps));
        }
        if s.first.len() != s.pairs.len() * s.reps || s.second.len() != s.first.len() {
            return bad("outcome count does not match pairs x repetitions".into());
        }
        if s.first.iter().chain(&s.second).any(|&v| v != 1 && v != -1) {
            return bad("outcomes must be +1 or -1".into());
        }
        let distinct = !self.pattern.is_split();
        for &(i, j) in &s.pairs {
            if i as usize >= n || j as usize >= n {
                return bad(format!("pair ({i}, {j}) out of range for {n} qubits"));
            }
            if distinct && i == j {
                return Err(Error::InvalidPair(i as usize, j as usize));
            }
        }
        match self.pattern {
            Pattern::AllPairs | Pattern::SplitSingle => {
                let expected = if distinct { n * (n - 1) } else { n * n };
                let mut seen = vec![false; n * n];
                for &(i, j) in &s.pairs {
                    let idx = i as usize * n + j as usize;
                    if std::mem::replace(&mut seen[idx], true) {
                        return bad(format!("pair ({i}, {j}) appears twice"));
                    }
                }
                if s.pairs.len() != expected {
                    return bad(format!("{} pairs, expected {expected}", s.pairs.len()));
                }
            }
            Pattern::RandomPairs | Pattern::RandomSplit => {
                if s.pairs.len() < 2 {
                    return bad("at least two random pairs are needed".into());
                }
            }
        }
        Ok(())
    }

    /// Number of pair slots `L` (or `N(N-1)`, `N^2` for exhaustive patterns).
    pub fn slots(&self) -> Option<usize> {
        self.blocks.iter().flatten().map(|s| s.pairs.len()).next()
    }
}

pub fn collect_total_spin<R: Rng + ?Sized>(sampler: &StateSampler, k: usize, rng: &mut R) -> TotalSpinDataset {
    let blocks = Direction::ALL.map(|d| {
        let id = rng.gen();
        let outcomes = (0..k).map(|_| sampler.sample_total_spin(d, rng)).collect();
        Some(TotalSpinSeries {
            id,
            direction: d,
            outcomes,
        })
    });
    TotalSpinDataset {
        n_qubits: sampler.n_qubits(),
        blocks,
    }
}

/// Ordered pairs `(i, j)`, `i != j`, in row-major order.
pub(crate) fn ordered_pairs(n: usize) -> Vec<(u32, u32)> {
    (0..n as u32)
        .flat_map(|i| (0..n as u32).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

fn all_cells(n: usize) -> Vec<(u32, u32)> {
    (0..n as u32).flat_map(|i| (0..n as u32).map(move |j| (i, j))).collect()
}

fn joint_series<R: Rng + ?Sized>(
    sampler: &StateSampler,
    direction: Direction,
    pairs: Vec<(u32, u32)>,
    reps: usize,
    id: u64,
    rng: &mut R,
) -> PairSeries {
    let mut first = Vec::with_capacity(pairs.len() * reps);
    let mut second = Vec::with_capacity(pairs.len() * reps);
    for &(i, j) in &pairs {
        for _ in 0..reps {
            let (a, b) = sampler.sample_pair(direction, i as usize, j as usize, rng);
            first.push(a);
            second.push(b);
        }
    }
    PairSeries {
        id,
        direction,
        pairs,
        reps,
        first,
        second,
    }
}

fn split_series<R: Rng + ?Sized>(
    sampler: &StateSampler,
    direction: Direction,
    pairs: Vec<(u32, u32)>,
    reps: usize,
    id: u64,
    rng: &mut R,
) -> PairSeries {
    let mut first = Vec::with_capacity(pairs.len() * reps);
    let mut second = Vec::with_capacity(pairs.len() * reps);
    for &(i, j) in &pairs {
        for _ in 0..reps {
            first.push(sampler.sample_single(direction, i as usize, rng));
            second.push(sampler.sample_single(direction, j as usize, rng));
        }
    }
    PairSeries {
        id,
        direction,
        pairs,
        reps,
        first,
        second,
    }
}

fn check_even(k: usize) -> Result<()> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidBudget(format!(
            "split patterns need an even K >= 2, got {k}"
        )));
    }
    Ok(())
}

fn check_pairs(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidState(format!("pair patterns need N >= 2, got {n}")));
    }
    Ok(())
}

pub fn collect_all_pairs<R: Rng + ?Sized>(sampler: &StateSampler, k: usize, rng: &mut R) -> Result<PairPatternDataset> {
    let n = sampler.n_qubits();
    check_pairs(n)?;
    let blocks = Direction::ALL.map(|d| {
        let id = rng.gen();
        Some(joint_series(sampler, d, ordered_pairs(n), k, id, rng))
    });
    Ok(PairPatternDataset {
        pattern: Pattern::AllPairs,
        n_qubits: n,
        k,
        blocks,
    })
}

/// Split-single data for the given axes only; the others stay empty.
pub fn collect_split_single<R: Rng + ?Sized>(
    sampler: &StateSampler,
    k: usize,
    directions: &[Direction],
    rng: &mut R,
) -> Result<PairPatternDataset> {
    check_even(k)?;
    let n = sampler.n_qubits();
    let mut blocks = [None, None, None];
    for &d in directions {
        let id = rng.gen();
        blocks[d.index()] = Some(split_series(sampler, d, all_cells(n), k / 2, id, rng));
    }
    Ok(PairPatternDataset {
        pattern: Pattern::SplitSingle,
        n_qubits: n,
        k,
        blocks,
    })
}

pub fn collect_random_pairs<R: Rng + ?Sized>(
    sampler: &StateSampler,
    l: usize,
    k: usize,
    rng: &mut R,
) -> Result<PairPatternDataset> {
    let n = sampler.n_qubits();
    check_pairs(n)?;
    let blocks = Direction::ALL.map(|d| {
        let id = rng.gen();
        let pairs = (0..l)
            .map(|_| loop {
                let i = rng.gen_range(0..n as u32);
                let j = rng.gen_range(0..n as u32);
                if i != j {
                    break (i, j);
                }
            })
            .collect();
        Some(joint_series(sampler, d, pairs, k, id, rng))
    });
    Ok(PairPatternDataset {
        pattern: Pattern::RandomPairs,
        n_qubits: n,
        k,
        blocks,
    })
}

/// Random split data for the given axes only; the others stay empty.
pub fn collect_random_split<R: Rng + ?Sized>(
    sampler: &StateSampler,
    l: usize,
    k: usize,
    directions: &[Direction],
    rng: &mut R,
) -> Result<PairPatternDataset> {
    check_even(k)?;
    let n = sampler.n_qubits() as u32;
    let mut blocks = [None, None, None];
    for &d in directions {
        let id = rng.gen();
        let pairs = (0..l).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        blocks[d.index()] = Some(split_series(sampler, d, pairs, k / 2, id, rng));
    }
    Ok(PairPatternDataset {
        pattern: Pattern::RandomSplit,
        n_qubits: n as usize,
        k,
        blocks,
    })
}
