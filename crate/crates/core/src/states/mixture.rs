use rand::Rng;

use super::{binomial_distribution, Direction, StateModel};
use crate::error::{Error, Result};

/// `p |base><base| + (1-p) 1/2^N`.
#[derive(Clone, Debug)]
pub struct DepolarizedMixture {
    base: Box<StateModel>,
    visibility: f64,
}

impl DepolarizedMixture {
    pub fn new(base: StateModel, visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidState(format!("visibility {visibility} outside [0, 1]")));
        }
        Ok(Self {
            base: Box::new(base),
            visibility,
        })
    }

    pub fn base(&self) -> &StateModel {
        &self.base
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn n_qubits(&self) -> usize {
        self.base.n_qubits()
    }

    pub(super) fn moment(&self, direction: Direction, order: u32) -> Result<f64> {
        let p = self.visibility;
        Ok(p * self.base.moment(direction, order)? + (1.0 - p) * maximally_mixed_moment(self.n_qubits(), order))
    }

    pub(super) fn total_spin_distribution(&self, direction: Direction) -> Vec<f64> {
        let p = self.visibility;
        let base = self.base.total_spin_distribution(direction);
        base.into_iter()
            .zip(binomial_distribution(self.n_qubits()))
            .map(|(b, w)| p * b + (1.0 - p) * w)
            .collect()
    }

    /// Per-shot coin: `true` means the shot comes from the base state.
    pub(super) fn draw_base<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.gen::<f64>() < self.visibility
    }
}

/// `<J_a^n>` of `1/2^N`: the sum of `N` independent fair `+-1/2` spins.
pub(crate) fn maximally_mixed_moment(n_qubits: usize, order: u32) -> f64 {
    let n = n_qubits as f64;
    match order {
        2 => n / 4.0,
        4 => (3.0 * n * n - 2.0 * n) / 16.0,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_visibility_is_maximally_mixed() {
        let s = StateModel::depolarized(StateModel::dicke(10, 5).unwrap(), 0.0).unwrap();
        assert_eq!(s.moment(Direction::X, 2).unwrap(), 2.5);
        assert_eq!(s.pair_correlation(Direction::X, 0, 1).unwrap(), 0.0);
        assert_eq!(s.single_expectation(Direction::Z, 0).unwrap(), 0.0);
    }

    #[test]
    fn mixed_moments_match_binomial_distribution() {
        let probs = binomial_distribution(6);
        for order in 1..=4u32 {
            let direct: f64 = probs
                .iter()
                .enumerate()
                .map(|(u, p)| p * (u as f64 - 3.0).powi(order as i32))
                .sum();
            assert!((direct - maximally_mixed_moment(6, order)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_visibility_outside_unit_interval() {
        let base = StateModel::singlet(2).unwrap();
        assert!(DepolarizedMixture::new(base.clone(), 1.5).is_err());
        assert!(DepolarizedMixture::new(base, -0.1).is_err());
    }
}
