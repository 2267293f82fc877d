use super::{binomial_row, Direction};
use crate::error::{Error, Result};

/// Symmetric Dicke state `|D_{N,m}>` with `m` excitations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DickeState {
    n_qubits: usize,
    excitations: usize,
}

impl DickeState {
    /// Limit of the exact integer Wigner-d evaluation used for the x/y
    /// outcome distributions.
    pub const MAX_QUBITS: usize = 100;

    pub fn new(n_qubits: usize, excitations: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > Self::MAX_QUBITS {
            return Err(Error::InvalidState(format!(
                "Dicke state needs 1..={} qubits, got {n_qubits}",
                Self::MAX_QUBITS
            )));
        }
        if excitations > n_qubits {
            return Err(Error::InvalidState(format!(
                "Dicke state with {excitations} excitations on {n_qubits} qubits"
            )));
        }
        Ok(Self { n_qubits, excitations })
    }

    /// `|D_{N,N/2}>`.
    pub fn half(n_qubits: usize) -> Result<Self> {
        if n_qubits % 2 != 0 {
            return Err(Error::InvalidState(format!("|D_(N,N/2)> needs even N, got {n_qubits}")));
        }
        Self::new(n_qubits, n_qubits / 2)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn excitations(&self) -> usize {
        self.excitations
    }

    /// `<J_z> = N/2 - m`.
    fn jz(&self) -> f64 {
        self.n_qubits as f64 / 2.0 - self.excitations as f64
    }

    /// `f_{N,m} = N/4 + m(N-m)/2`.
    fn transverse_second(&self) -> f64 {
        let (n, m) = (self.n_qubits as f64, self.excitations as f64);
        n / 4.0 + m * (n - m) / 2.0
    }

    fn transverse_fourth(&self) -> f64 {
        let (n, m) = (self.n_qubits as i128, self.excitations as i128);
        let sum = n * (3 * n - 2) + 4 * (3 * n - 4) * m * (n - m) + 6 * m * (m - 1) * (n - m - 1) * (n - m);
        sum as f64 / 16.0
    }

    pub(super) fn moment(&self, direction: Direction, order: u32) -> f64 {
        match (direction, order) {
            (Direction::Z, k) => self.jz().powi(k as i32),
            (_, 2) => self.transverse_second(),
            (_, 4) => self.transverse_fourth(),
            _ => 0.0,
        }
    }

    /// By permutation symmetry every qubit carries `2<J_a>/N`.
    pub(super) fn single_expectation(&self, direction: Direction) -> f64 {
        match direction {
            Direction::Z => 2.0 * self.jz() / self.n_qubits as f64,
            _ => 0.0,
        }
    }

    /// Same value for every pair: `2m(N-m)/(N(N-1))` transverse, and from
    /// `<J_z^2> = N/4 + (1/4) sum_{i!=j} <sigma_z sigma_z>` along z.
    pub(super) fn pair_correlation(&self, direction: Direction) -> f64 {
        let (n, m) = (self.n_qubits as f64, self.excitations as f64);
        match direction {
            Direction::Z => (4.0 * self.jz() * self.jz() - n) / (n * (n - 1.0)),
            _ => 2.0 * m * (n - m) / (n * (n - 1.0)),
        }
    }

    pub(super) fn total_spin_distribution(&self, direction: Direction) -> Vec<f64> {
        let n = self.n_qubits;
        match direction {
            Direction::Z => {
                let mut probs = vec![0.0; n + 1];
                probs[n - self.excitations] = 1.0;
                probs
            }
            _ => self.rotated_distribution(),
        }
    }

    /// `|d^j_{m',m}(pi/2)|^2` over `m'`, with `j = N/2` and `m = N/2 - m_exc`.
    ///
    /// Writing `a = j + m`, `b = j - m` and `u = j + m'`:
    /// `P(u) = C(N,a) / C(N,u) * S(u)^2 / 2^N` with the integer sum
    /// `S(u) = sum_k (-1)^k C(a,k) C(b, k - a + u)`.
    /// `S` is accumulated exactly in `i128`; for `N <= 100` every term is
    /// bounded by `C(N, N/2)` so no overflow occurs.
    fn rotated_distribution(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let a = n - self.excitations;
        let b = self.excitations;
        let row_n = binomial_row(n);
        let row_a = binomial_row(a);
        let row_b = binomial_row(b);
        let scale = 0.5f64.powi(n as i32);
        (0..=n)
            .map(|u| {
                let mut sum: i128 = 0;
                for (k, &ra) in row_a.iter().enumerate() {
                    // second index k - a + u must lie in 0..=b
                    let idx = k as i64 - a as i64 + u as i64;
                    if idx < 0 || idx > b as i64 {
                        continue;
                    }
                    let term = (ra * row_b[idx as usize]) as i128;
                    if k % 2 == 0 {
                        sum += term;
                    } else {
                        sum -= term;
                    }
                }
                let s = sum as f64;
                row_n[a] as f64 / row_n[u] as f64 * s * s * scale
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::StateModel;

    #[test]
    fn known_moments() {
        let d = StateModel::dicke(10, 5).unwrap();
        assert_eq!(d.moment(Direction::X, 2).unwrap(), 15.0);
        assert_eq!(d.moment(Direction::Y, 2).unwrap(), 15.0);
        assert_eq!(d.moment(Direction::X, 4).unwrap(), 330.0);
        assert_eq!(d.moment(Direction::Z, 2).unwrap(), 0.0);
        assert_eq!(d.pair_correlation(Direction::X, 0, 7).unwrap(), 5.0 / 9.0);
    }

    #[test]
    fn z_marginals_follow_collective_moments() {
        let d = StateModel::dicke(6, 2).unwrap();
        let e = d.single_expectation(Direction::Z, 4).unwrap();
        assert!((e - 1.0 / 3.0).abs() < 1e-15);
        // <J_z^2> = 1 = 6/4 + 30 c / 4  ->  c = -1/15
        let c = d.pair_correlation(Direction::Z, 1, 3).unwrap();
        assert!((c + 1.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn rotated_distribution_of_triplet() {
        let probs = DickeState::new(2, 1).unwrap().total_spin_distribution(Direction::X);
        assert_eq!(probs, vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn rotated_distribution_is_normalized_up_to_max_size() {
        for n in [1, 7, 20, 63, 100] {
            for m in [0, n / 3, n / 2, n] {
                let probs = DickeState::new(n, m).unwrap().total_spin_distribution(Direction::Y);
                let total: f64 = probs.iter().sum();
                assert!((total - 1.0).abs() < 1e-12, "N={n} m={m}: {total}");
                assert!(probs.iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DickeState::new(0, 0).is_err());
        assert!(DickeState::new(4, 5).is_err());
        assert!(DickeState::new(101, 3).is_err());
        assert!(DickeState::half(5).is_err());
        assert_eq!(DickeState::half(8).unwrap().excitations(), 4);
    }
}
