//! Unbiased estimators. Sums are accumulated exactly in integers and divided
//! once at the end, so results do not depend on summation order.

use super::data::{PairPatternDataset, PairSeries, Pattern, TotalSpinDataset};
use crate::error::{Error, Result};
use crate::states::Direction;

fn ratio(num: i128, den: i128) -> f64 {
    num as f64 / den as f64
}

fn need_reps(have: usize, need: usize, what: &str) -> Result<()> {
    if have < need {
        return Err(Error::InvalidBudget(format!(
            "{what} needs at least {need} repetitions, got {have}"
        )));
    }
    Ok(())
}

fn expect_pattern(ds: &PairPatternDataset, pattern: Pattern) -> Result<()> {
    if ds.pattern != pattern {
        return Err(Error::DatasetMismatch(format!(
            "expected {pattern} data, got {}",
            ds.pattern
        )));
    }
    Ok(())
}

fn product_sum(s: &PairSeries) -> i128 {
    s.first
        .iter()
        .zip(&s.second)
        .map(|(&a, &b)| (a * b) as i64)
        .sum::<i64>() as i128
}

/// `(sum_g A_g)(sum_g B_g) - sum_g A_g B_g` for group sums `A`, `B`: the
/// sum of `a * b` over all pairs of entries from different groups.
fn cross_groups(a: &[i64], b: &[i64]) -> i128 {
    let sa: i128 = a.iter().map(|&v| v as i128).sum();
    let sb: i128 = b.iter().map(|&v| v as i128).sum();
    let diag: i128 = a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum();
    sa * sb - diag
}

/// `sum_{P,Q} sum_{k != l} e1(P, k) e2(Q, l)` over all slots `P`, `Q` and
/// repetitions, computed in O(#entries) by grouping on the repetition index.
pub fn ap_cross_sum(s: &PairSeries) -> i128 {
    let mut a = vec![0i64; s.reps];
    let mut b = vec![0i64; s.reps];
    for slot in 0..s.pairs.len() {
        let (f, g) = s.slot(slot);
        for k in 0..s.reps {
            a[k] += f[k] as i64;
            b[k] += g[k] as i64;
        }
    }
    cross_groups(&a, &b)
}

/// `sum_{l != m} sum_{k, q} e1(l, k) e2(m, q)` over slots `l`, `m`,
/// grouping on the slot index.
pub fn rp_cross_sum(s: &PairSeries) -> i128 {
    let mut a = Vec::with_capacity(s.pairs.len());
    let mut b = Vec::with_capacity(s.pairs.len());
    for slot in 0..s.pairs.len() {
        let (f, g) = s.slot(slot);
        a.push(f.iter().map(|&v| v as i64).sum());
        b.push(g.iter().map(|&v| v as i64).sum());
    }
    cross_groups(&a, &b)
}

/// `<J^2>` as `sum (2m)^2 / 4K`.
pub fn est_j2_ts(ds: &TotalSpinDataset, direction: Direction) -> Result<f64> {
    let s = ds.block(direction)?;
    need_reps(s.outcomes.len(), 1, "TS <J^2>")?;
    let sq: i128 = s.outcomes.iter().map(|&v| (v as i128) * (v as i128)).sum();
    Ok(ratio(sq, 4 * s.outcomes.len() as i128))
}

/// Sample variance of the total-spin outcomes with the `K-1` normalization.
pub fn est_delta_j2_ts(ds: &TotalSpinDataset, direction: Direction) -> Result<f64> {
    let s = ds.block(direction)?;
    let k = s.outcomes.len() as i128;
    need_reps(s.outcomes.len(), 2, "TS variance")?;
    let sum: i128 = s.outcomes.iter().map(|&v| v as i128).sum();
    let sq: i128 = s.outcomes.iter().map(|&v| (v as i128) * (v as i128)).sum();
    Ok(ratio(k * sq - sum * sum, 4 * k * (k - 1)))
}

/// `N/4 + sum_{i!=j} c_ij / 4` with `c_ij` the mean pair product.
pub fn est_j2_ap(ds: &PairPatternDataset, direction: Direction) -> Result<f64> {
    expect_pattern(ds, Pattern::AllPairs)?;
    let s = ds.block(direction)?;
    let (n, k) = (ds.n_qubits as i128, s.reps as i128);
    Ok(ratio(n * k + product_sum(s), 4 * k))
}

/// `<J^2>` minus an unbiased estimate of `<J>^2` built from products of
/// single-qubit outcomes taken in different repetitions.
pub fn est_delta_j2_ap(ds: &PairPatternDataset, direction: Direction) -> Result<f64> {
    expect_pattern(ds, Pattern::AllPairs)?;
    let s = ds.block(direction)?;
    need_reps(s.reps, 2, "AP1 variance")?;
    let (n, k) = (ds.n_qubits as i128, s.reps as i128);
    let w = (n - 1) * (n - 1);
    let num = n * k * (k - 1) * w + product_sum(s) * (k - 1) * w - ap_cross_sum(s);
    Ok(ratio(num, 4 * k * (k - 1) * w))
}

/// `<J>^2` from split single-qubit runs: `sum_{i,j} mean(s_i) mean(s_j) / 4`
/// with the two means taken over disjoint shots.
pub fn est_jsq_split(ds: &PairPatternDataset, direction: Direction) -> Result<f64> {
    expect_pattern(ds, Pattern::SplitSingle)?;
    let s = ds.block(direction)?;
    Ok(ratio(product_sum(s), 4 * s.reps as i128))
}

pub fn est_j2_rp(ds: &PairPatternDataset, direction: Direction) -> Result<f64> {
    expect_pattern(ds, Pattern::RandomPairs)?;
    let s = ds.block(direction)?;
    let (n, k, l) = (ds.n_qubits as i128, s.reps as i128, s.pairs.len() as i128);
    Ok(ratio(n * k * l + n * (n - 1) * product_sum(s), 4 * k * l))
}

pub fn est_delta_j2_rp(ds: &PairPatternDataset, direction: Direction) -> Result<f64> {
    expect_pattern(ds, Pattern::RandomPairs)?;
    let s = ds.block(direction)?;
    let (n, k, l) = (ds.n_qubits as i128, s.reps as i128, s.pairs.len() as i128);
    let num = n * l * (l - 1) * k * k + n * (n - 1) * product_sum(s) * (l - 1) * k - n * n * rp_cross_sum(s);
    Ok(ratio(num, 4 * l * (l - 1) * k * k))
}

pub fn est_jsq_rsplit(ds: &PairPatternDataset, direction: Direction) -> Result<f64> {
    expect_pattern(ds, Pattern::RandomSplit)?;
    let s = ds.block(direction)?;
    let (n, h, l) = (ds.n_qubits as i128, s.reps as i128, s.pairs.len() as i128);
    Ok(ratio(n * n * product_sum(s), 4 * l * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::data::TotalSpinSeries;

    fn naive_ap_cross(s: &PairSeries) -> i128 {
        let mut acc = 0i128;
        for p in 0..s.pairs.len() {
            for q in 0..s.pairs.len() {
                for k in 0..s.reps {
                    for l in 0..s.reps {
                        if k != l {
                            acc += (s.slot(p).0[k] * s.slot(q).1[l]) as i128;
                        }
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn ts_estimators_on_fixed_data() {
        let ds = TotalSpinDataset {
            n_qubits: 4,
            blocks: [
                Some(TotalSpinSeries {
                    id: 1,
                    direction: Direction::X,
                    outcomes: vec![2, -2, 4, 0],
                }),
                None,
                None,
            ],
        };
        // J values 1, -1, 2, 0
        assert_eq!(est_j2_ts(&ds, Direction::X).unwrap(), 1.5);
        let mean = 0.5;
        let var = [1.0f64, -1.0, 2.0, 0.0]
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / 3.0;
        assert!((est_delta_j2_ts(&ds, Direction::X).unwrap() - var).abs() < 1e-15);
        assert!(est_j2_ts(&ds, Direction::Y).is_err());
    }

    #[test]
    fn factored_cross_matches_naive() {
        let s = PairSeries {
            id: 0,
            direction: Direction::Z,
            pairs: vec![(0, 1), (1, 0)],
            reps: 3,
            first: vec![1, -1, 1, 1, 1, -1],
            second: vec![-1, -1, 1, 1, -1, 1],
        };
        assert_eq!(ap_cross_sum(&s), naive_ap_cross(&s));
    }
}
