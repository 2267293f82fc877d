use rand::Rng;

use super::{Direction, StateModel};
use crate::error::Result;

/// Precomputed outcome distributions of a [`StateModel`] for fast repeated
/// sampling. Immutable; the RNG is supplied per call.
#[derive(Clone, Debug)]
pub struct StateSampler {
    n_qubits: usize,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Exact {
        total_spin_cdf: [Vec<f64>; 3],
        /// P(2s_i = +1) per direction.
        up_prob: [Vec<f64>; 3],
        /// Cumulative joint pair distribution per direction, row-major
        /// over (i, j).
        pair_cdf: [Vec<[f64; 3]>; 3],
    },
    /// Per shot: base state with probability `visibility`, otherwise
    /// independent fair coins.
    Mixture { base: Box<StateSampler>, visibility: f64 },
}

impl StateSampler {
    pub fn new(state: &StateModel) -> Result<Self> {
        let n = state.n_qubits();
        if let StateModel::Mixture(m) = state {
            return Ok(Self {
                n_qubits: n,
                kind: Kind::Mixture {
                    base: Box::new(Self::new(m.base())?),
                    visibility: m.visibility(),
                },
            });
        }
        let table = state.moment_table()?;
        let total_spin_cdf = Direction::ALL.map(|d| cumulative(&state.total_spin_distribution(d)));
        let up_prob = Direction::ALL.map(|d| table.direction(d).singles.iter().map(|e| 0.5 * (1.0 + e)).collect());
        let pair_cdf = Direction::ALL.map(|d| {
            let dm = table.direction(d);
            let mut cdfs = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    cdfs.push(pair_cdf(dm.singles[i], dm.singles[j], dm.pairs[i * n + j]));
                }
            }
            cdfs
        });
        Ok(Self {
            n_qubits: n,
            kind: Kind::Exact {
                total_spin_cdf,
                up_prob,
                pair_cdf,
            },
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// One `J_a` outcome encoded as `2m`.
    pub fn sample_total_spin<R: Rng + ?Sized>(&self, direction: Direction, rng: &mut R) -> i32 {
        let n = self.n_qubits as i32;
        match &self.kind {
            Kind::Exact { total_spin_cdf, .. } => 2 * draw_index(&total_spin_cdf[direction.index()], rng) as i32 - n,
            Kind::Mixture { base, visibility } => {
                if rng.gen::<f64>() < *visibility {
                    base.sample_total_spin(direction, rng)
                } else {
                    (0..self.n_qubits).map(|_| fair_sign(rng) as i32).sum()
                }
            }
        }
    }

    /// Joint outcome `(2s_i, 2s_j)`; the caller guarantees `i != j < N`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, direction: Direction, i: usize, j: usize, rng: &mut R) -> (i8, i8) {
        match &self.kind {
            Kind::Exact { pair_cdf, .. } => draw_pair(&pair_cdf[direction.index()][i * self.n_qubits + j], rng),
            Kind::Mixture { base, visibility } => {
                if rng.gen::<f64>() < *visibility {
                    base.sample_pair(direction, i, j, rng)
                } else {
                    (fair_sign(rng), fair_sign(rng))
                }
            }
        }
    }

    /// Single-qubit outcome `2s_i`.
    pub fn sample_single<R: Rng + ?Sized>(&self, direction: Direction, qubit: usize, rng: &mut R) -> i8 {
        match &self.kind {
            Kind::Exact { up_prob, .. } => {
                if rng.gen::<f64>() < up_prob[direction.index()][qubit] {
                    1
                } else {
                    -1
                }
            }
            Kind::Mixture { base, visibility } => {
                if rng.gen::<f64>() < *visibility {
                    base.sample_single(direction, qubit, rng)
                } else {
                    fair_sign(rng)
                }
            }
        }
    }
}

pub(super) fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p.max(0.0);
            acc
        })
        .collect()
}

pub(super) fn draw_index<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let total = *cdf.last().expect("non-empty distribution");
    let u = rng.gen::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Cumulative weights of `(+,+)`, `(+,-)`, `(-,+)` from
/// `P(a,b) = (1 + a e_i + b e_j + ab c_ij)/4`.
pub(super) fn pair_cdf(ei: f64, ej: f64, cij: f64) -> [f64; 3] {
    let pp = (0.25 * (1.0 + ei + ej + cij)).max(0.0);
    let pm = (0.25 * (1.0 + ei - ej - cij)).max(0.0);
    let mp = (0.25 * (1.0 - ei + ej - cij)).max(0.0);
    [pp, pp + pm, pp + pm + mp]
}

pub(super) fn draw_pair<R: Rng + ?Sized>(cdf: &[f64; 3], rng: &mut R) -> (i8, i8) {
    let u = rng.gen::<f64>();
    if u < cdf[0] {
        (1, 1)
    } else if u < cdf[1] {
        (1, -1)
    } else if u < cdf[2] {
        (-1, 1)
    } else {
        (-1, -1)
    }
}

pub(super) fn fair_sign<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    if rng.gen::<bool>() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_masses_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let singlet = StateSampler::new(&StateModel::singlet(8).unwrap()).unwrap();
        let dicke = StateSampler::new(&StateModel::dicke(10, 5).unwrap()).unwrap();
        for _ in 0..200 {
            assert_eq!(singlet.sample_total_spin(Direction::X, &mut rng), 0);
            assert_eq!(dicke.sample_total_spin(Direction::Z, &mut rng), 0);
            let (a, b) = singlet.sample_pair(Direction::Z, 0, 1, &mut rng);
            assert_eq!(a * b, -1);
            let (a, b) = singlet.sample_pair(Direction::Y, 3, 2, &mut rng);
            assert_eq!(a * b, -1);
        }
    }

    #[test]
    fn total_spin_parity_matches_qubit_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for state in ["dicke:7:3", "dicke:7:3:0.4", "mixed:5"] {
            let s: StateModel = state.parse().unwrap();
            let n = s.n_qubits() as i32;
            let sampler = StateSampler::new(&s).unwrap();
            for _ in 0..100 {
                let v = sampler.sample_total_spin(Direction::X, &mut rng);
                assert!(v.abs() <= n && (v - n) % 2 == 0, "{state}: {v}");
            }
        }
    }
}
