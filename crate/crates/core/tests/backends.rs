//! Closed-form state tables against the dense state-vector backend, and the
//! samplers against their exact distributions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinsq_core::states::{DenseState, StateSampler};
use spinsq_core::{Direction, StateModel};

#[test]
fn dense_tables_match_closed_forms() {
    for n in 1..=10 {
        let mut states: Vec<StateModel> = (0..=n).map(|m| StateModel::dicke(n, m).unwrap()).collect();
        if n % 2 == 0 {
            states.push(StateModel::singlet(n).unwrap());
        }
        for state in states {
            let analytic = state.moment_table().unwrap();
            let dense = StateModel::Dense(DenseState::from_model(&state).unwrap())
                .moment_table()
                .unwrap();
            let diff = analytic.max_abs_diff(&dense);
            assert!(diff < 1e-10, "{}: {diff}", state.label());
            analytic.check_invariants(1e-10).unwrap();
        }
    }
}

#[test]
fn total_spin_distributions_match_dense() {
    for (n, m) in [(5, 2), (8, 3), (10, 5)] {
        let state = StateModel::dicke(n, m).unwrap();
        let dense = StateModel::Dense(DenseState::from_model(&state).unwrap());
        for d in Direction::ALL {
            let a = state.total_spin_distribution(d);
            let b = dense.total_spin_distribution(d);
            let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "D_{n},{m} {d}: {diff}");
        }
    }
}

#[test]
fn mixture_table_is_convex_combination() {
    let base = StateModel::dicke(6, 2).unwrap();
    let mixed = StateModel::depolarized(base.clone(), 0.3).unwrap();
    let direct = mixed.moment_table().unwrap();
    let via = base.moment_table().unwrap().depolarized(0.3);
    assert!(direct.max_abs_diff(&via) < 1e-14);
    direct.check_invariants(1e-12).unwrap();
    let agg = base.moment_table().unwrap().aggregates(Direction::Z).depolarized(0.3);
    let want = direct.aggregates(Direction::Z);
    assert!((agg.sum_single_sq - want.sum_single_sq).abs() < 1e-12);
    assert!((agg.sum_pair_sq - want.sum_pair_sq).abs() < 1e-12);
    assert!((agg.sum_pair_single - want.sum_pair_single).abs() < 1e-12);
    for (x, y) in agg.moments.iter().zip(&want.moments) {
        assert!((x - y).abs() < 1e-12);
    }
}

/// Pearson statistic over cells with expected count >= 5.
fn chi_square(counts: &[u64], probs: &[f64], total: u64) -> (f64, usize) {
    let mut stat = 0.0;
    let mut cells = 0;
    for (&c, &p) in counts.iter().zip(probs) {
        let e = p * total as f64;
        if e >= 5.0 {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    (stat, cells)
}

/// Loose upper quantile of chi-square with `dof` degrees of freedom,
/// `dof + 6 sqrt(2 dof)`, far beyond the 99.9% point for these sizes.
fn critical(dof: usize) -> f64 {
    dof as f64 + 6.0 * (2.0 * dof as f64).sqrt() + 10.0
}

#[test]
fn samplers_follow_exact_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws = 200_000u64;
    for spec in ["dicke:10:5", "dicke:7:2", "dicke:6:1:0.4", "mixed:5"] {
        let state: StateModel = spec.parse().unwrap();
        let sampler = StateSampler::new(&state).unwrap();
        let n = state.n_qubits();
        let table = state.moment_table().unwrap();
        for d in Direction::ALL {
            let probs = state.total_spin_distribution(d);
            let mut counts = vec![0u64; n + 1];
            for _ in 0..draws {
                let v = sampler.sample_total_spin(d, &mut rng);
                counts[((v + n as i32) / 2) as usize] += 1;
            }
            let (stat, cells) = chi_square(&counts, &probs, draws);
            assert!(
                stat < critical(cells.saturating_sub(1).max(1)),
                "{spec} {d}: chi2 {stat} over {cells} cells"
            );

            let (i, j) = (0, n - 1);
            let (ei, ej, c) = (
                table.direction(d).singles[i],
                table.direction(d).singles[j],
                table.pair(d, i, j),
            );
            let joint: Vec<f64> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
                .iter()
                .map(|(a, b)| (1.0 + a * ei + b * ej + a * b * c) / 4.0)
                .collect();
            let mut counts = [0u64; 4];
            for _ in 0..draws {
                let (a, b) = sampler.sample_pair(d, i, j, &mut rng);
                counts[(if a == 1 { 0 } else { 2 }) + (if b == 1 { 0 } else { 1 })] += 1;
            }
            let (stat, cells) = chi_square(&counts, &joint, draws);
            assert!(
                stat < critical(cells.saturating_sub(1).max(1)),
                "{spec} {d} pair: chi2 {stat}"
            );
        }
    }
}
