//! Exact variances of the estimators, computed from state functionals.
//!
//! Every block formula takes the [`Aggregates`] of one axis, so a variance
//! costs O(1) once the table is built and does not depend on the budget.

mod closed;

use serde::{Deserialize, Serialize};

pub use closed::{closed_form, closed_form_f64, StateFamily};

use crate::error::{Error, Result};
use crate::schemes::{Budget, Parameter, Role, Scheme};
use crate::states::{Aggregates, Direction, MomentTable};

fn need(k: u64, min: u64, what: &str) -> Result<f64> {
    if k < min {
        return Err(Error::InvalidBudget(format!("{what} needs at least {min}, got {k}")));
    }
    Ok(k as f64)
}

/// `(<J^4> - <J^2>^2) / K`.
pub fn var_j2_ts(a: &Aggregates, k: u64) -> Result<f64> {
    let k = need(k, 1, "K")?;
    Ok((a.fourth() - a.second().powi(2)) / k)
}

/// Variance of the unbiased sample variance of `K` total-spin outcomes.
pub fn var_delta_j2_ts(a: &Aggregates, k: u64) -> Result<f64> {
    let k = need(k, 2, "K")?;
    let [j1, j2, j3, j4] = a.moments;
    let c = (2.0 * k - 3.0) / (k - 1.0);
    Ok((j4 - j2 * j2 - 4.0 * j3 * j1 + 2.0 * j2 * j2 / (k - 1.0) + 4.0 * c * j2 * j1 * j1 - 2.0 * c * j1.powi(4)) / k)
}

/// `(N(N-1) - sum_{i!=j} c_ij^2) / 16K`.
pub fn var_j2_ap(a: &Aggregates, k: u64) -> Result<f64> {
    let k = need(k, 1, "K")?;
    let n = a.n_qubits as f64;
    Ok((n * (n - 1.0) - a.sum_pair_sq) / (16.0 * k))
}

/// Variance of the all-pairs `(dJ)^2` estimator: the pair term, the
/// cross-repetition term and their covariance.
pub fn var_delta_j2_ap(a: &Aggregates, k: u64) -> Result<f64> {
    let kf = need(k, 2, "K")?;
    let n = a.n_qubits as f64;
    if a.n_qubits < 2 {
        return Err(Error::InvalidState("pair schemes need N >= 2".into()));
    }
    let (j1, j2) = (a.mean(), a.second());
    let w = n - 1.0;
    let s1 = a.sum_single_sq;
    // per-repetition sums: E[A B] and E[A^2] in J units
    let cross_a = w * j1 * j1 + n / 4.0 - s1 / 4.0;
    let cross_b = j2 + n * (n - 2.0) * j1 * j1 - n / 4.0 + s1 / 4.0;
    let k1 = kf * (kf - 1.0);
    let k2 = k1 * (kf - 2.0);
    let k3 = k2 * (kf - 3.0);
    let w2 = w * w;
    let w4 = w2 * w2;
    let j1_2 = j1 * j1;
    let var_cross = k3 * w4 * j1_2 * j1_2
        + k2 * w2 * j1_2 * (2.0 * w * cross_a + 2.0 * cross_b)
        + k1 * (w2 * cross_a * cross_a + cross_b * cross_b)
        - k1 * k1 * w4 * j1_2 * j1_2;
    let cov = k1 * w * j1 * (w * j1 / 2.0 - a.sum_pair_single / 8.0);
    Ok(var_j2_ap(a, k)? + var_cross / (k1 * k1 * w4) - 2.0 * cov / (kf * k1 * w2))
}

/// `(N^2 - (sum_i e_i^2)^2) / 8K` for split data with `K/2` runs per qubit.
pub fn var_jsq_split(a: &Aggregates, k: u64) -> Result<f64> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidBudget(format!(
            "split patterns need an even K >= 2, got {k}"
        )));
    }
    let n = a.n_qubits as f64;
    Ok((n * n - a.sum_single_sq_products()) / (8.0 * k as f64))
}

/// `(N^3(N-2)/16 - <J^2>^2 + N<J^2>/2) / KL`.
pub fn var_j2_rp(a: &Aggregates, l: u64, k: u64) -> Result<f64> {
    let kl = need(l, 1, "L")? * need(k, 1, "K")?;
    let n = a.n_qubits as f64;
    let j2 = a.second();
    Ok((n.powi(3) * (n - 2.0) / 16.0 - j2 * j2 + n * j2 / 2.0) / kl)
}

/// Random-pair `(dJ)^2` variance, available for one repetition per pair.
pub fn var_delta_j2_rp(a: &Aggregates, l: u64) -> Result<f64> {
    let lf = need(l, 2, "L")?;
    let n = a.n_qubits as f64;
    let (j1, j2) = (a.mean(), a.second());
    let w = n - 1.0;
    let g = lf * w * w - 2.0 * n * w - 1.0;
    let poly = -32.0 * j1.powi(4) * (2.0 * lf - 3.0) * w * w
        - 8.0 * j1 * j1 * w * (4.0 * j2 * (-3.0 * lf * n + 2.0 * lf + 4.0 * n - 2.0) + n * n * (lf * n - 2.0))
        - 16.0 * j2 * j2 * g
        + 8.0 * j2 * n * g
        + n.powi(3) * (lf * (n - 2.0) * w * w + n * (2.0 * n - 3.0) + 2.0);
    Ok(poly / (16.0 * (lf - 1.0) * lf * w * w))
}

/// `(N^4/8 - 2<J>^4) / KL`.
pub fn var_jsq_rsplit(a: &Aggregates, l: u64, k: u64) -> Result<f64> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidBudget(format!(
            "split patterns need an even K >= 2, got {k}"
        )));
    }
    let kl = need(l, 1, "L")? * k as f64;
    let n = a.n_qubits as f64;
    Ok((n.powi(4) / 8.0 - 2.0 * a.mean().powi(4)) / kl)
}

/// Analytic variance of a parameter estimate, broken down by axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub scheme: Scheme,
    pub parameter: Parameter,
    pub n_qubits: usize,
    pub budget: Budget,
    pub value: f64,
    /// Weighted contribution of the x, y and z blocks.
    pub contributions: [f64; 3],
    pub aggregates: [Aggregates; 3],
}

/// Variance of one block estimate.
pub fn block_variance(scheme: Scheme, role: Role, a: &Aggregates, budget: Budget) -> Result<f64> {
    let k = budget.k;
    let l = budget.l.unwrap_or(0);
    match (scheme, role) {
        (Scheme::Ts, Role::SecondMoment) => var_j2_ts(a, k),
        (Scheme::Ts, Role::Variance) => var_delta_j2_ts(a, k),
        (Scheme::Ap1 | Scheme::Ap2, Role::SecondMoment) => var_j2_ap(a, k),
        (Scheme::Ap1, Role::Variance) => var_delta_j2_ap(a, k),
        (Scheme::Ap2, Role::Variance) => Ok(var_j2_ap(a, k)? + var_jsq_split(a, k)?),
        (Scheme::Rp1 | Scheme::Rp2, Role::SecondMoment) => var_j2_rp(a, l, k),
        (Scheme::Rp1, Role::Variance) => {
            if k != 1 {
                return Err(Error::UnsupportedAnalytic(format!(
                    "RP1 variance estimator is only covered for K = 1, got K = {k}; use Monte Carlo"
                )));
            }
            var_delta_j2_rp(a, l)
        }
        (Scheme::Rp2, Role::Variance) => Ok(var_j2_rp(a, l, k)? + var_jsq_rsplit(a, l, k)?),
    }
}

/// Variance of the parameter estimate from per-axis aggregates.
pub fn var_parameter_from_aggregates(
    aggregates: &[Aggregates; 3],
    scheme: Scheme,
    parameter: &Parameter,
    budget: Budget,
) -> Result<VarianceReport> {
    budget.validate(scheme)?;
    let n = aggregates[0].n_qubits;
    let mut contributions = [0.0; 3];
    for term in parameter.terms(n) {
        let idx = term.direction.index();
        let v = block_variance(scheme, term.role, &aggregates[idx], budget)?;
        contributions[idx] += term.weight * term.weight * v;
    }
    let value = contributions.iter().sum::<f64>().max(0.0);
    Ok(VarianceReport {
        scheme,
        parameter: *parameter,
        n_qubits: n,
        budget,
        value,
        contributions,
        aggregates: *aggregates,
    })
}

pub fn var_parameter(
    table: &MomentTable,
    scheme: Scheme,
    parameter: &Parameter,
    budget: Budget,
) -> Result<VarianceReport> {
    let aggregates = Direction::ALL.map(|d| table.aggregates(d));
    var_parameter_from_aggregates(&aggregates, scheme, parameter, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ParameterKind, StateModel};

    fn table(spec: &str) -> MomentTable {
        spec.parse::<StateModel>().unwrap().moment_table().unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn block_examples() {
        let d = table("dicke:10:5");
        let x = d.aggregates(Direction::X);
        let z = d.aggregates(Direction::Z);
        assert!(close(var_j2_ts(&x, 7400).unwrap(), 105.0 / 7400.0, 1e-14));
        assert_eq!(var_j2_ts(&z, 3).unwrap(), 0.0);
        assert_eq!(var_delta_j2_ts(&z, 3).unwrap(), 0.0);
        assert!(close(
            var_j2_ap(&x, 82).unwrap(),
            (90.0 - 90.0 * 25.0 / 81.0) / (16.0 * 82.0),
            1e-14
        ));
        assert!(close(var_jsq_split(&z, 60).unwrap(), 100.0 / 480.0, 1e-14));
        assert!(close(var_j2_rp(&x, 7400, 1).unwrap(), 350.0 / 7400.0, 1e-14));
        let s = table("singlet:8").aggregates(Direction::Y);
        assert!(close(var_j2_ap(&s, 1).unwrap(), 3.0, 1e-14));
        assert!(close(var_jsq_split(&s, 10).unwrap(), 0.8, 1e-14));
        assert!(close(var_jsq_rsplit(&s, 10, 2).unwrap(), 25.6, 1e-14));
        assert!(var_delta_j2_ts(&s, 1).is_err());
        assert!(var_jsq_split(&s, 3).is_err());
    }

    #[test]
    fn ts_variance_matches_central_moment_form() {
        for spec in ["dicke:7:2", "dicke:9:4:0.3", "mixed:6"] {
            let t = table(spec);
            for d in Direction::ALL {
                let a = t.aggregates(d);
                let [j1, j2, j3, j4] = a.moments;
                let mu2 = j2 - j1 * j1;
                let mu4 = j4 - 4.0 * j3 * j1 + 6.0 * j2 * j1 * j1 - 3.0 * j1.powi(4);
                for k in [2u64, 3, 10, 100] {
                    let kf = k as f64;
                    let expected = mu4 / kf - mu2 * mu2 * (kf - 3.0) / (kf * (kf - 1.0));
                    assert!(
                        close(var_delta_j2_ts(&a, k).unwrap(), expected, 1e-12),
                        "{spec} {d} {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn table_two() {
        let t = table("dicke:10:5");
        let c = Parameter::new(ParameterKind::C);
        let cases = [
            (Scheme::Ts, Budget::repetitions(7400), 0.0284),
            (Scheme::Ap1, Budget::repetitions(82), 5.5836),
            (Scheme::Ap2, Budget::repetitions(60), 24.5046),
            (Scheme::Rp1, Budget::random(7400, 1), 5.5685),
            (Scheme::Rp2, Budget::random(2775, 2), 25.6667),
        ];
        for (scheme, budget, expected) in cases {
            let v = var_parameter(&t, scheme, &c, budget).unwrap().value;
            assert!((v - expected).abs() < 5e-5, "{scheme}: {v} vs {expected}");
        }
    }

    #[test]
    fn rp1_needs_single_repetition() {
        let t = table("dicke:6:3");
        let c = Parameter::new(ParameterKind::C);
        assert!(matches!(
            var_parameter(&t, Scheme::Rp1, &c, Budget::random(10, 2)),
            Err(Error::UnsupportedAnalytic(_))
        ));
        // xi_a needs no variance block, so any K is fine
        let a = Parameter::new(ParameterKind::A);
        assert!(var_parameter(&t, Scheme::Rp1, &a, Budget::random(10, 2)).is_ok());
    }

    #[test]
    fn contributions_sum_to_value() {
        let t = table("dicke:8:3:0.7");
        for kind in [ParameterKind::A, ParameterKind::B, ParameterKind::C, ParameterKind::D] {
            let r = var_parameter(&t, Scheme::Ap1, &Parameter::new(kind), Budget::repetitions(5)).unwrap();
            assert!(close(r.contributions.iter().sum(), r.value, 1e-14));
            assert!(r.value >= 0.0);
        }
    }

    #[test]
    fn variances_decrease_with_budget() {
        let t = table("dicke:8:3:0.6");
        let p = Parameter::new(ParameterKind::B);
        for scheme in [Scheme::Ts, Scheme::Ap1, Scheme::Ap2] {
            let mut prev = f64::INFINITY;
            for k in (2..40).step_by(2) {
                let v = var_parameter(&t, scheme, &p, Budget::repetitions(k)).unwrap().value;
                assert!(v <= prev * (1.0 + 1e-12), "{scheme} K={k}");
                prev = v;
            }
        }
        for (scheme, k) in [(Scheme::Rp1, 1), (Scheme::Rp2, 2)] {
            let mut prev = f64::INFINITY;
            for l in 2..60 {
                let v = var_parameter(&t, scheme, &p, Budget::random(l, k)).unwrap().value;
                assert!(v <= prev * (1.0 + 1e-12), "{scheme} L={l}");
                prev = v;
            }
        }
    }
}
