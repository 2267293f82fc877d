use serde::{Deserialize, Serialize};

use super::mixture::maximally_mixed_moment;
use super::Direction;
use crate::error::{Error, Result};

/// State functionals along one axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionMoments {
    /// `<J_a^n>` for n = 1..=4.
    pub moments: [f64; 4],
    /// `<sigma_a^(i)>`.
    pub singles: Vec<f64>,
    /// Row-major `N x N` matrix of `<sigma_a^(i) sigma_a^(j)>`, diagonal 1.
    pub pairs: Vec<f64>,
}

/// Everything the analytic variance engine needs to know about a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub n_qubits: usize,
    pub directions: [DirectionMoments; 3],
}

/// O(N^2) sums over a [`DirectionMoments`] entry that the variance formulas
/// consume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub n_qubits: usize,
    /// `<J>`, `<J^2>`, `<J^3>`, `<J^4>`.
    pub moments: [f64; 4],
    /// `sum_i <sigma_i>^2`.
    pub sum_single_sq: f64,
    /// `sum_{i!=j} <sigma_i sigma_j>^2`.
    pub sum_pair_sq: f64,
    /// `sum_{i!=j} <sigma_i sigma_j> (<sigma_i> + <sigma_j>)`.
    pub sum_pair_single: f64,
}

impl Aggregates {
    pub fn mean(&self) -> f64 {
        self.moments[0]
    }

    pub fn second(&self) -> f64 {
        self.moments[1]
    }

    pub fn third(&self) -> f64 {
        self.moments[2]
    }

    pub fn fourth(&self) -> f64 {
        self.moments[3]
    }

    /// `sum_{i,j} <sigma_i>^2 <sigma_j>^2`.
    pub fn sum_single_sq_products(&self) -> f64 {
        self.sum_single_sq * self.sum_single_sq
    }

    /// Aggregates of `p rho + (1-p) 1/2^N`. Moments are linear in the state;
    /// single expectations and correlators of the identity part vanish, so
    /// every quadratic sum scales with `p^2`.
    pub fn depolarized(&self, visibility: f64) -> Aggregates {
        let p = visibility;
        let mut moments = self.moments;
        for (k, m) in moments.iter_mut().enumerate() {
            *m = p * *m + (1.0 - p) * maximally_mixed_moment(self.n_qubits, k as u32 + 1);
        }
        Aggregates {
            n_qubits: self.n_qubits,
            moments,
            sum_single_sq: p * p * self.sum_single_sq,
            sum_pair_sq: p * p * self.sum_pair_sq,
            sum_pair_single: p * p * self.sum_pair_single,
        }
    }
}

impl MomentTable {
    pub fn direction(&self, direction: Direction) -> &DirectionMoments {
        &self.directions[direction.index()]
    }

    pub fn moment(&self, direction: Direction, order: u32) -> f64 {
        self.direction(direction).moments[order as usize - 1]
    }

    pub fn pair(&self, direction: Direction, i: usize, j: usize) -> f64 {
        self.direction(direction).pairs[i * self.n_qubits + j]
    }

    pub fn aggregates(&self, direction: Direction) -> Aggregates {
        let n = self.n_qubits;
        let dm = self.direction(direction);
        let sum_single_sq = dm.singles.iter().map(|e| e * e).sum();
        let mut sum_pair_sq = 0.0;
        let mut sum_pair_single = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let c = dm.pairs[i * n + j];
                sum_pair_sq += c * c;
                sum_pair_single += c * (dm.singles[i] + dm.singles[j]);
            }
        }
        Aggregates {
            n_qubits: n,
            moments: dm.moments,
            sum_single_sq,
            sum_pair_sq,
            sum_pair_single,
        }
    }

    /// Table of `p rho + (1-p) 1/2^N`.
    pub fn depolarized(&self, visibility: f64) -> MomentTable {
        let p = visibility;
        let n = self.n_qubits;
        let directions = self.directions.clone().map(|mut dm| {
            for (k, m) in dm.moments.iter_mut().enumerate() {
                *m = p * *m + (1.0 - p) * maximally_mixed_moment(n, k as u32 + 1);
            }
            dm.singles.iter_mut().for_each(|e| *e *= p);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        dm.pairs[i * n + j] *= p;
                    }
                }
            }
            dm
        });
        MomentTable {
            n_qubits: n,
            directions,
        }
    }

    /// Largest absolute entrywise difference; infinite if the shapes differ.
    pub fn max_abs_diff(&self, other: &MomentTable) -> f64 {
        if self.n_qubits != other.n_qubits {
            return f64::INFINITY;
        }
        self.directions
            .iter()
            .zip(&other.directions)
            .flat_map(|(a, b)| {
                let moments = a.moments.iter().zip(&b.moments);
                let singles = a.singles.iter().zip(&b.singles);
                let pairs = a.pairs.iter().zip(&b.pairs);
                moments.chain(singles).chain(pairs).map(|(x, y)| (x - y).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Checks the structural invariants: bounded expectations, unit diagonal,
    /// symmetric correlators, the pair decomposition of `<J^2>`, a
    /// non-negative variance and `sum_a <J_a^2> <= N(N+2)/4`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let n = self.n_qubits;
        let nf = n as f64;
        let fail = |msg: String| Err(Error::InvalidState(msg));
        let mut total_second = 0.0;
        for d in Direction::ALL {
            let dm = self.direction(d);
            if dm.singles.len() != n || dm.pairs.len() != n * n {
                return fail(format!("{d}: table shape does not match {n} qubits"));
            }
            if let Some(e) = dm.singles.iter().find(|e| e.abs() > 1.0 + tol) {
                return fail(format!("{d}: |<sigma>| = {e} exceeds 1"));
            }
            let mut off_diagonal = 0.0;
            for i in 0..n {
                if (dm.pairs[i * n + i] - 1.0).abs() > tol {
                    return fail(format!("{d}: diagonal entry {i} is not 1"));
                }
                for j in 0..n {
                    let c = dm.pairs[i * n + j];
                    if c.abs() > 1.0 + tol || (c - dm.pairs[j * n + i]).abs() > tol {
                        return fail(format!("{d}: correlator ({i},{j}) = {c} invalid"));
                    }
                    if i != j {
                        off_diagonal += c;
                    }
                }
            }
            let [j1, j2, _, _] = dm.moments;
            let from_pairs = nf / 4.0 + off_diagonal / 4.0;
            if (from_pairs - j2).abs() > tol * nf.max(1.0) * nf.max(1.0) {
                return fail(format!(
                    "{d}: <J^2> = {j2} but the pair decomposition gives {from_pairs}"
                ));
            }
            if j2 < j1 * j1 - tol {
                return fail(format!("{d}: <J^2> = {j2} < <J>^2 = {}", j1 * j1));
            }
            total_second += j2;
        }
        if total_second > nf * (nf + 2.0) / 4.0 + tol {
            return fail(format!("sum of <J_a^2> = {total_second} exceeds N(N+2)/4"));
        }
        Ok(())
    }
}
