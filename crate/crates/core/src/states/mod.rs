//! Benchmark N-qubit states.
//!
//! Every state exposes the collective moments `<J_a^n>` (n <= 4), the
//! single-qubit expectations `<sigma_a^(i)>`, the two-point correlators
//! `<sigma_a^(i) sigma_a^(j)>` and exact Born-rule distributions of the
//! total-spin measurement. Qubit outcome `|0>` is spin up (+1/2) so that
//! `<J_z>` of a Dicke state with `m` excitations is `N/2 - m`.
//!
//! Outcomes are kept as integers: a total-spin result `m` is stored as `2m`
//! and a single-qubit result `s = +-1/2` as `2s = +-1`.

mod dense;
mod dicke;
mod mixture;
mod sampler;
mod singlet;
mod table;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dense::DenseState;
pub use dicke::DickeState;
pub use mixture::DepolarizedMixture;
pub use sampler::StateSampler;
pub use singlet::ManyBodySinglet;
pub use table::{Aggregates, DirectionMoments, MomentTable};

/// Measurement axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    X,
    Y,
    Z,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::X, Direction::Y, Direction::Z];

    pub fn index(self) -> usize {
        match self {
            Direction::X => 0,
            Direction::Y => 1,
            Direction::Z => 2,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::X => "x",
            Direction::Y => "y",
            Direction::Z => "z",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Direction::X),
            "y" => Ok(Direction::Y),
            "z" => Ok(Direction::Z),
            other => Err(Error::Parse(format!("unknown direction '{other}'"))),
        }
    }
}

/// A benchmark state: moment provider plus exact outcome distributions.
#[derive(Clone, Debug)]
pub enum StateModel {
    Dicke(DickeState),
    Singlet(ManyBodySinglet),
    Mixture(DepolarizedMixture),
    Dense(DenseState),
}

impl StateModel {
    pub fn dicke(n_qubits: usize, excitations: usize) -> Result<Self> {
        DickeState::new(n_qubits, excitations).map(StateModel::Dicke)
    }

    pub fn singlet(n_qubits: usize) -> Result<Self> {
        ManyBodySinglet::new(n_qubits).map(StateModel::Singlet)
    }

    pub fn depolarized(base: StateModel, visibility: f64) -> Result<Self> {
        DepolarizedMixture::new(base, visibility).map(StateModel::Mixture)
    }

    /// `1/2^N`, written as the zero-visibility mixture of `|D_{N,0}>`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        Self::depolarized(Self::dicke(n_qubits, 0)?, 0.0)
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            StateModel::Dicke(s) => s.n_qubits(),
            StateModel::Singlet(s) => s.n_qubits(),
            StateModel::Mixture(s) => s.n_qubits(),
            StateModel::Dense(s) => s.n_qubits(),
        }
    }

    /// `<J_a^order>` for `order` in 1..=4.
    pub fn moment(&self, direction: Direction, order: u32) -> Result<f64> {
        check_order(order)?;
        Ok(match self {
            StateModel::Dicke(s) => s.moment(direction, order),
            StateModel::Singlet(_) => 0.0,
            StateModel::Mixture(s) => s.moment(direction, order)?,
            StateModel::Dense(s) => s.moment(direction, order),
        })
    }

    /// `<sigma_a^(i)>`.
    pub fn single_expectation(&self, direction: Direction, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        Ok(self.single_unchecked(direction, qubit))
    }

    /// `<sigma_a^(i) sigma_a^(j)>` for `i != j`.
    pub fn pair_correlation(&self, direction: Direction, i: usize, j: usize) -> Result<f64> {
        self.check_pair(i, j)?;
        Ok(self.pair_unchecked(direction, i, j))
    }

    /// Born-rule distribution of a `J_a` measurement. Entry `u` is the
    /// probability of outcome `m = u - N/2`, `u = 0..=N`.
    pub fn total_spin_distribution(&self, direction: Direction) -> Vec<f64> {
        match self {
            StateModel::Dicke(s) => s.total_spin_distribution(direction),
            StateModel::Singlet(s) => s.total_spin_distribution(),
            StateModel::Mixture(s) => s.total_spin_distribution(direction),
            StateModel::Dense(s) => s.total_spin_distribution(direction),
        }
    }

    /// Draws one `J_a` outcome, returned as `2m`.
    pub fn sample_total_spin<R: Rng + ?Sized>(&self, direction: Direction, rng: &mut R) -> i32 {
        let probs = self.total_spin_distribution(direction);
        let u = sampler::draw_index(&sampler::cumulative(&probs), rng);
        2 * u as i32 - self.n_qubits() as i32
    }

    /// Draws the joint outcome `(2s_i, 2s_j)` of measuring qubits `i` and
    /// `j` along `direction` in one shot.
    pub fn sample_pair<R: Rng + ?Sized>(
        &self,
        direction: Direction,
        i: usize,
        j: usize,
        rng: &mut R,
    ) -> Result<(i8, i8)> {
        self.check_pair(i, j)?;
        if let StateModel::Mixture(m) = self {
            if !m.draw_base(rng) {
                return Ok((sampler::fair_sign(rng), sampler::fair_sign(rng)));
            }
            return m.base().sample_pair(direction, i, j, rng);
        }
        let cdf = sampler::pair_cdf(
            self.single_unchecked(direction, i),
            self.single_unchecked(direction, j),
            self.pair_unchecked(direction, i, j),
        );
        Ok(sampler::draw_pair(&cdf, rng))
    }

    /// Draws the outcome `2s_i` of measuring qubit `i` alone.
    pub fn sample_single<R: Rng + ?Sized>(&self, direction: Direction, qubit: usize, rng: &mut R) -> Result<i8> {
        self.check_qubit(qubit)?;
        if let StateModel::Mixture(m) = self {
            if !m.draw_base(rng) {
                return Ok(sampler::fair_sign(rng));
            }
            return m.base().sample_single(direction, qubit, rng);
        }
        let up = 0.5 * (1.0 + self.single_unchecked(direction, qubit));
        Ok(if rng.gen::<f64>() < up { 1 } else { -1 })
    }

    /// Every functional the variance engine consumes.
    pub fn moment_table(&self) -> Result<MomentTable> {
        match self {
            StateModel::Dense(s) => Ok(s.moment_table()),
            StateModel::Mixture(m) => Ok(m.base().moment_table()?.depolarized(m.visibility())),
            _ => {
                let n = self.n_qubits();
                let directions = Direction::ALL.map(|d| {
                    let moments = [1, 2, 3, 4].map(|k| self.moment(d, k).unwrap_or(0.0));
                    let singles = (0..n).map(|i| self.single_unchecked(d, i)).collect();
                    let mut pairs = vec![1.0; n * n];
                    for i in 0..n {
                        for j in 0..n {
                            if i != j {
                                pairs[i * n + j] = self.pair_unchecked(d, i, j);
                            }
                        }
                    }
                    DirectionMoments {
                        moments,
                        singles,
                        pairs,
                    }
                });
                Ok(MomentTable {
                    n_qubits: n,
                    directions,
                })
            }
        }
    }

    /// Compact textual form, the same grammar [`FromStr`] accepts.
    pub fn label(&self) -> String {
        match self {
            StateModel::Dicke(s) => format!("dicke:{}:{}", s.n_qubits(), s.excitations()),
            StateModel::Singlet(s) => format!("singlet:{}", s.n_qubits()),
            StateModel::Mixture(m) => {
                if m.visibility() == 0.0 {
                    format!("mixed:{}", m.n_qubits())
                } else {
                    format!("{}:{}", m.base().label(), m.visibility())
                }
            }
            StateModel::Dense(s) => format!("dense:{}", s.n_qubits()),
        }
    }

    fn single_unchecked(&self, direction: Direction, qubit: usize) -> f64 {
        match self {
            StateModel::Dicke(s) => s.single_expectation(direction),
            StateModel::Singlet(_) => 0.0,
            StateModel::Mixture(m) => m.visibility() * m.base().single_unchecked(direction, qubit),
            StateModel::Dense(s) => s.single_expectation(direction, qubit),
        }
    }

    fn pair_unchecked(&self, direction: Direction, i: usize, j: usize) -> f64 {
        match self {
            StateModel::Dicke(s) => s.pair_correlation(direction),
            StateModel::Singlet(s) => s.pair_correlation(direction, i, j),
            StateModel::Mixture(m) => m.visibility() * m.base().pair_unchecked(direction, i, j),
            StateModel::Dense(s) => s.pair_correlation(direction, i, j),
        }
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        let n_qubits = self.n_qubits();
        if qubit >= n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits });
        }
        Ok(())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_qubit(i)?;
        self.check_qubit(j)?;
        if i == j {
            return Err(Error::InvalidPair(i, j));
        }
        Ok(())
    }
}

/// Parses `dicke:N:m[:p]`, `singlet:N[:p]` and `mixed:N`; a trailing `p`
/// wraps the pure state into a depolarized mixture with visibility `p`.
impl FromStr for StateModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let int = |k: usize, what: &str| -> Result<usize> {
            parts
                .get(k)
                .ok_or_else(|| Error::Parse(format!("state '{s}' is missing {what}")))?
                .parse()
                .map_err(|_| Error::Parse(format!("state '{s}': {what} is not an integer")))
        };
        let visibility = |k: usize| -> Result<Option<f64>> {
            match parts.get(k) {
                None => Ok(None),
                Some(v) => v
                    .parse()
                    .map(Some)
                    .map_err(|_| Error::Parse(format!("state '{s}': visibility is not a number"))),
            }
        };
        let (pure, p, arity) = match parts[0].to_ascii_lowercase().as_str() {
            "dicke" => (Self::dicke(int(1, "N")?, int(2, "m")?)?, visibility(3)?, 4),
            "singlet" => (Self::singlet(int(1, "N")?)?, visibility(2)?, 3),
            "mixed" => (Self::maximally_mixed(int(1, "N")?)?, None, 2),
            other => return Err(Error::Parse(format!("unknown state family '{other}'"))),
        };
        if parts.len() > arity {
            return Err(Error::Parse(format!("state '{s}' has too many fields")));
        }
        match p {
            Some(p) => Self::depolarized(pure, p),
            None => Ok(pure),
        }
    }
}

fn check_order(order: u32) -> Result<()> {
    if (1..=4).contains(&order) {
        Ok(())
    } else {
        Err(Error::OrderOutOfRange(order))
    }
}

/// Pascal-triangle row `C(n, 0..=n)`.
pub(crate) fn binomial_row(n: usize) -> Vec<u128> {
    let mut row = vec![1u128; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as u128 / k as u128;
    }
    row
}

/// Distribution of `J_a` for the maximally mixed state: binomial over the
/// number of down spins.
pub(crate) fn binomial_distribution(n_qubits: usize) -> Vec<f64> {
    let scale = 0.5f64.powi(n_qubits as i32);
    binomial_row(n_qubits).into_iter().map(|c| c as f64 * scale).collect()
}
