use num_complex::Complex64;

use super::{binomial_row, Direction, DirectionMoments, MomentTable, StateModel};
use crate::error::{Error, Result};

/// Explicit state vector over `2^N` amplitudes. Qubit `i` is bit `i` of the
/// basis index; bit value 0 is spin up.
///
/// Independent backend used to cross-check the closed-form providers.
#[derive(Clone, Debug)]
pub struct DenseState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
    /// Bitstring distribution after rotating every qubit's `a` axis onto z.
    basis_probs: [Vec<f64>; 3],
}

impl DenseState {
    pub const MAX_QUBITS: usize = 14;

    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > Self::MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits,
                max: Self::MAX_QUBITS,
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("state vector norm {norm} differs from 1")));
        }
        let basis_probs = Direction::ALL.map(|d| {
            let mut rotated = amplitudes.clone();
            for q in 0..n_qubits {
                rotate_qubit(&mut rotated, q, d);
            }
            rotated.iter().map(|a| a.norm_sqr()).collect()
        });
        Ok(Self {
            n_qubits,
            amplitudes,
            basis_probs,
        })
    }

    /// Expands a pure closed-form state into its amplitude vector.
    pub fn from_model(state: &StateModel) -> Result<Self> {
        let n = state.n_qubits();
        if n > Self::MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits: n,
                max: Self::MAX_QUBITS,
            });
        }
        let dim = 1usize << n;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        match state {
            StateModel::Dicke(d) => {
                let m = d.excitations();
                let amp = 1.0 / (binomial_row(n)[m] as f64).sqrt();
                for (idx, a) in amps.iter_mut().enumerate() {
                    if idx.count_ones() as usize == m {
                        *a = Complex64::new(amp, 0.0);
                    }
                }
            }
            StateModel::Singlet(_) => {
                // (|01> - |10>)/sqrt2 on each pair (2k, 2k+1): in every
                // nonzero component the pair bits differ; the sign flips
                // once per pair whose lower qubit carries the 1.
                let amp = 0.5f64.powi(n as i32 / 2).sqrt();
                'outer: for (idx, a) in amps.iter_mut().enumerate() {
                    let mut sign = 1.0;
                    for pair in 0..n / 2 {
                        let lo = (idx >> (2 * pair)) & 1;
                        let hi = (idx >> (2 * pair + 1)) & 1;
                        if lo == hi {
                            continue 'outer;
                        }
                        if lo == 1 {
                            sign = -sign;
                        }
                    }
                    *a = Complex64::new(sign * amp, 0.0);
                }
            }
            StateModel::Dense(d) => return Ok(d.clone()),
            StateModel::Mixture(_) => {
                return Err(Error::InvalidState("a depolarized mixture has no state vector".into()))
            }
        }
        Self::new(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Probability of each bitstring when every qubit is measured along `direction`.
    pub fn basis_probabilities(&self, direction: Direction) -> &[f64] {
        &self.basis_probs[direction.index()]
    }

    pub(super) fn total_spin_distribution(&self, direction: Direction) -> Vec<f64> {
        let n = self.n_qubits;
        let mut probs = vec![0.0; n + 1];
        for (idx, p) in self.basis_probabilities(direction).iter().enumerate() {
            probs[n - idx.count_ones() as usize] += p;
        }
        probs
    }

    pub(super) fn moment(&self, direction: Direction, order: u32) -> f64 {
        let half = self.n_qubits as f64 / 2.0;
        self.total_spin_distribution(direction)
            .iter()
            .enumerate()
            .map(|(u, p)| p * (u as f64 - half).powi(order as i32))
            .sum()
    }

    pub(super) fn single_expectation(&self, direction: Direction, qubit: usize) -> f64 {
        self.basis_probabilities(direction)
            .iter()
            .enumerate()
            .map(|(idx, p)| p * spin_sign(idx, qubit))
            .sum()
    }

    pub(super) fn pair_correlation(&self, direction: Direction, i: usize, j: usize) -> f64 {
        self.basis_probabilities(direction)
            .iter()
            .enumerate()
            .map(|(idx, p)| p * spin_sign(idx, i) * spin_sign(idx, j))
            .sum()
    }

    pub(super) fn moment_table(&self) -> MomentTable {
        let n = self.n_qubits;
        let directions = Direction::ALL.map(|d| {
            let moments = [1, 2, 3, 4].map(|k| self.moment(d, k));
            let probs = self.basis_probabilities(d);
            let mut singles = vec![0.0; n];
            let mut pairs = vec![0.0; n * n];
            for (idx, &p) in probs.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for i in 0..n {
                    let si = spin_sign(idx, i);
                    singles[i] += p * si;
                    for j in 0..n {
                        pairs[i * n + j] += p * si * spin_sign(idx, j);
                    }
                }
            }
            DirectionMoments {
                moments,
                singles,
                pairs,
            }
        });
        MomentTable {
            n_qubits: n,
            directions,
        }
    }
}

fn spin_sign(idx: usize, qubit: usize) -> f64 {
    if (idx >> qubit) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies the single-qubit unitary mapping the `direction` eigenbasis onto
/// the computational basis (`+1` eigenvector to `|0>`).
fn rotate_qubit(amps: &mut [Complex64], qubit: usize, direction: Direction) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::new(0.0, 1.0);
    // rows of U: x -> H, y -> H S^dagger
    let (u00, u01, u10, u11) = match direction {
        Direction::Z => return,
        Direction::X => (r.into(), r.into(), r.into(), (-r).into()),
        Direction::Y => (Complex64::from(r), -i * r, Complex64::from(r), i * r),
    };
    let bit = 1usize << qubit;
    for idx in 0..amps.len() {
        if idx & bit != 0 {
            continue;
        }
        let (a0, a1) = (amps[idx], amps[idx | bit]);
        amps[idx] = u00 * a0 + u01 * a1;
        amps[idx | bit] = u10 * a0 + u11 * a1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_oversized_and_unnormalized() {
        let too_big = vec![Complex64::new(0.0, 0.0); 1 << 15];
        assert!(matches!(
            DenseState::new(too_big),
            Err(Error::TooManyQubits { n_qubits: 15, .. })
        ));
        let unnormalized = vec![Complex64::new(1.0, 0.0); 4];
        assert!(DenseState::new(unnormalized).is_err());
        assert!(DenseState::new(vec![Complex64::new(1.0, 0.0); 3]).is_err());
        let dicke = StateModel::dicke(15, 3).unwrap();
        assert!(matches!(
            DenseState::from_model(&dicke),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn single_qubit_eigenstates() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // +1 eigenvector of sigma_y
        let plus_y = DenseState::new(vec![Complex64::new(r, 0.0), Complex64::new(0.0, r)]).unwrap();
        assert!((plus_y.single_expectation(Direction::Y, 0) - 1.0).abs() < 1e-15);
        assert!(plus_y.single_expectation(Direction::X, 0).abs() < 1e-15);
        assert!(plus_y.single_expectation(Direction::Z, 0).abs() < 1e-15);
        // -1 eigenvector of sigma_x
        let minus_x = DenseState::new(vec![Complex64::new(r, 0.0), Complex64::new(-r, 0.0)]).unwrap();
        assert!((minus_x.single_expectation(Direction::X, 0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_singlet_is_a_singlet() {
        let dense = DenseState::from_model(&StateModel::singlet(4).unwrap()).unwrap();
        for d in Direction::ALL {
            let probs = dense.total_spin_distribution(d);
            assert!((probs[2] - 1.0).abs() < 1e-12, "{d}: {probs:?}");
        }
        let expected = [(Direction::X, -1.0), (Direction::Y, -1.0), (Direction::Z, -1.0)];
        for (d, c) in expected {
            assert!((dense.pair_correlation(d, 2, 3) - c).abs() < 1e-12);
            assert!(dense.pair_correlation(d, 1, 2).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_fourth_moment_of_dicke_10_5() {
        let dense = DenseState::from_model(&StateModel::dicke(10, 5).unwrap()).unwrap();
        assert!((dense.moment(Direction::X, 4) - 330.0).abs() < 1e-9);
        assert!((dense.moment(Direction::Y, 2) - 15.0).abs() < 1e-10);
    }
}
