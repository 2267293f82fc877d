use super::Direction;
use crate::error::{Error, Result};

/// `|Psi^->`: product of two-qubit singlets on the pairs `(0,1), (2,3), ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ManyBodySinglet {
    n_qubits: usize,
}

impl ManyBodySinglet {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits % 2 != 0 {
            return Err(Error::InvalidState(format!(
                "many-body singlet needs an even positive qubit count, got {n_qubits}"
            )));
        }
        Ok(Self { n_qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Singlet partner of `qubit`.
    pub fn partner(qubit: usize) -> usize {
        qubit ^ 1
    }

    /// `sigma_a (x) sigma_a |psi^-> = -|psi^->` on every axis, which is what
    /// makes `<J_a^2>` vanish.
    pub(super) fn pair_correlation(&self, _direction: Direction, i: usize, j: usize) -> f64 {
        if Self::partner(i) != j {
            return 0.0;
        }
        -1.0
    }

    /// `J_a |Psi^-> = 0`: point mass at `m = 0`.
    pub(super) fn total_spin_distribution(&self) -> Vec<f64> {
        let mut probs = vec![0.0; self.n_qubits + 1];
        probs[self.n_qubits / 2] = 1.0;
        probs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::StateModel;

    #[test]
    fn correlators() {
        let s = StateModel::singlet(8).unwrap();
        assert_eq!(s.pair_correlation(Direction::Y, 0, 1).unwrap(), -1.0);
        assert_eq!(s.pair_correlation(Direction::X, 1, 0).unwrap(), -1.0);
        assert_eq!(s.pair_correlation(Direction::Z, 6, 7).unwrap(), -1.0);
        assert_eq!(s.pair_correlation(Direction::X, 0, 2).unwrap(), 0.0);
        assert_eq!(s.pair_correlation(Direction::X, 1, 2).unwrap(), 0.0);
        assert_eq!(s.single_expectation(Direction::X, 3).unwrap(), 0.0);
        assert_eq!(s.moment(Direction::Y, 3).unwrap(), 0.0);
    }

    #[test]
    fn odd_sizes_rejected() {
        assert!(ManyBodySinglet::new(7).is_err());
        assert!(ManyBodySinglet::new(0).is_err());
    }
}
