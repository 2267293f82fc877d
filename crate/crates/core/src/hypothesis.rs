//! Separable bounds, Cantelli p-value bounds and sample-size planning.
//!
//! Planning is worst case over the depolarized half-excitation Dicke family
//! `p |D_{N,N/2}><D_{N,N/2}| + (1-p) 1/2^N`: the variance is maximized over
//! `p in [0, 1]` and the budget is chosen so that Cantelli's inequality
//! bounds the p-value of a violation by `t` at `1 - gamma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schemes::{sample_cost, Budget, Parameter, ParameterKind, Scheme};
use crate::states::{Aggregates, Direction, StateModel};
use crate::variance::var_parameter_from_aggregates;

/// Side of the separable bound on which an entangled state shows up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationSide {
    Above,
    Below,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableBound {
    pub parameter: Parameter,
    pub n_qubits: usize,
    pub bound: f64,
    pub violation_side: ViolationSide,
}

impl SeparableBound {
    /// Signed distance past the bound; positive means violated.
    pub fn margin(&self, estimate: f64) -> f64 {
        match self.violation_side {
            ViolationSide::Above => estimate - self.bound,
            ViolationSide::Below => self.bound - estimate,
        }
    }

    pub fn is_violated(&self, estimate: f64) -> bool {
        self.margin(estimate) > 0.0
    }
}

/// `xi_a <= N(N+2)/4` holds for every state and only serves as a
/// consistency check; `xi_b >= N/2`, `xi_c <= N/2` and
/// `xi_d >= N(N-2)/4` hold for fully separable states.
pub fn separable_bound(parameter: &Parameter, n_qubits: usize) -> Result<SeparableBound> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!("bounds need N >= 2, got {n_qubits}")));
    }
    let n = n_qubits as f64;
    let (bound, violation_side) = match parameter.kind {
        ParameterKind::A => (n * (n + 2.0) / 4.0, ViolationSide::Above),
        ParameterKind::B => (n / 2.0, ViolationSide::Below),
        ParameterKind::C => (n / 2.0, ViolationSide::Above),
        ParameterKind::D => (n * (n - 2.0) / 4.0, ViolationSide::Below),
    };
    Ok(SeparableBound {
        parameter: *parameter,
        n_qubits,
        bound,
        violation_side,
    })
}

/// `V / (V + t^2)`: bound on the probability that an estimate deviates from
/// its mean by `t` or more in a given direction.
pub fn cantelli_bound(variance: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidArgument(format!("margin t must be positive, got {t}")));
    }
    if variance.is_nan() || variance < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "variance must be non-negative, got {variance}"
        )));
    }
    Ok(variance / (variance + t * t))
}

/// Upper bound on the p-value of the observed violation, or 1 when the
/// estimate does not violate the bound.
pub fn p_value_bound(estimate: f64, bound: &SeparableBound, variance: f64) -> Result<f64> {
    let t = bound.margin(estimate);
    if t <= 0.0 {
        return Ok(1.0);
    }
    cantelli_bound(variance, t)
}

/// Visibility above which the depolarized `|D_{N,N/2}>` violates the
/// `xi_c` inequality: `(N-1)/(2N-1)`.
pub fn critical_noise(n_qubits: usize) -> f64 {
    let n = n_qubits as f64;
    (n - 1.0) / (2.0 * n - 1.0)
}

const GRID_STEP: f64 = 1e-3;
const REFINE_TOL: f64 = 1e-6;

/// Maximizes `f` over `[0, 1]` on a grid of step `1e-3`, then refines by
/// golden-section search inside the neighbouring grid cells. Returns
/// `(argmax, max)`; ties go to the smallest argument.
pub fn maximize_on_unit_interval<F>(f: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let steps = (1.0 / GRID_STEP).round() as usize;
    let mut best = (0.0, f(0.0)?);
    let mut best_idx = 0;
    for i in 1..=steps {
        let p = i as f64 / steps as f64;
        let v = f(p)?;
        if v > best.1 {
            best = (p, v);
            best_idx = i;
        }
    }
    let mut lo = best_idx.saturating_sub(1) as f64 / steps as f64;
    let mut hi = (best_idx + 1).min(steps) as f64 / steps as f64;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    while hi - lo > REFINE_TOL {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b)?;
        }
    }
    for (p, v) in [(a, fa), (b, fb)] {
        if v > best.1 {
            best = (p, v);
        }
    }
    Ok(best)
}

fn dicke_half_aggregates(n_qubits: usize) -> Result<[Aggregates; 3]> {
    if n_qubits < 2 || n_qubits % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "noise planning uses |D_(N,N/2)>, which needs an even N >= 2, got {n_qubits}"
        )));
    }
    let table = StateModel::dicke(n_qubits, n_qubits / 2)?.moment_table()?;
    Ok(Direction::ALL.map(|d| table.aggregates(d)))
}

fn worst_case(base: &[Aggregates; 3], scheme: Scheme, parameter: &Parameter, budget: Budget) -> Result<(f64, f64)> {
    maximize_on_unit_interval(|p| {
        let mixed = base.map(|a| a.depolarized(p));
        Ok(var_parameter_from_aggregates(&mixed, scheme, parameter, budget)?.value)
    })
}

/// Worst-case estimator variance over the depolarized `|D_{N,N/2}>` family.
pub fn max_variance_over_noise(
    scheme: Scheme,
    parameter: &Parameter,
    n_qubits: usize,
    budget: Budget,
) -> Result<(f64, f64)> {
    let base = dicke_half_aggregates(n_qubits)?;
    worst_case(&base, scheme, parameter, budget)
}

/// How the violation margin `t` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TRule {
    /// A fixed margin.
    Absolute(f64),
    /// `fraction * N/2`.
    FractionOfHalfN(f64),
}

impl TRule {
    pub fn margin(&self, n_qubits: usize) -> f64 {
        match *self {
            TRule::Absolute(t) => t,
            TRule::FractionOfHalfN(f) => f * n_qubits as f64 / 2.0,
        }
    }
}

impl Default for TRule {
    fn default() -> Self {
        TRule::FractionOfHalfN(0.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeResult {
    pub scheme: Scheme,
    pub parameter: Parameter,
    pub n_qubits: usize,
    pub t: f64,
    pub gamma: f64,
    pub worst_case_p: f64,
    pub worst_case_variance: f64,
    pub cantelli: f64,
    /// Smallest passing budget. RP2 fixes `K = 2` and searches `L`.
    pub budget: Budget,
    /// `K` for TS/AP, `L` for RP1, `K L` for RP2.
    pub budget_value: u64,
    pub total_preparations: u64,
}

/// Budget with search index `i`: `K = i` (TS, AP1), `K = 2i` (AP2),
/// `L = i` with `K = 1` (RP1) or `K = 2` (RP2).
fn budget_at(scheme: Scheme, i: u64) -> Budget {
    match scheme {
        Scheme::Ts | Scheme::Ap1 => Budget::repetitions(i),
        Scheme::Ap2 => Budget::repetitions(2 * i),
        Scheme::Rp1 => Budget::random(i, 1),
        Scheme::Rp2 => Budget::random(i, 2),
    }
}

fn min_index(scheme: Scheme) -> u64 {
    match scheme {
        Scheme::Ts | Scheme::Ap1 | Scheme::Rp1 | Scheme::Rp2 => 2,
        Scheme::Ap2 => 1,
    }
}

/// Smallest budget whose worst-case Cantelli bound is at most `1 - gamma`.
pub fn required_budget(
    scheme: Scheme,
    parameter: &Parameter,
    n_qubits: usize,
    t: f64,
    gamma: f64,
) -> Result<SampleSizeResult> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidArgument(format!("margin t must be positive, got {t}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let base = dicke_half_aggregates(n_qubits)?;
    let passes = |i: u64| -> Result<(bool, f64, f64, f64)> {
        let (p, v) = worst_case(&base, scheme, parameter, budget_at(scheme, i))?;
        let bound = cantelli_bound(v, t)?;
        Ok((bound <= 1.0 - gamma, p, v, bound))
    };
    let mut lo = min_index(scheme);
    let mut hi = lo;
    if !passes(lo)?.0 {
        // exponential search for a passing index, then bisect on (lo, hi]
        loop {
            lo = hi;
            hi = hi
                .checked_mul(2)
                .ok_or_else(|| Error::InvalidArgument("variance does not shrink with the budget".into()))?;
            if passes(hi)?.0 {
                break;
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if passes(mid)?.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let (_, p, v, bound) = passes(hi)?;
    let budget = budget_at(scheme, hi);
    let budget_value = match scheme {
        Scheme::Ts | Scheme::Ap1 | Scheme::Ap2 => budget.k,
        Scheme::Rp1 => budget.l.unwrap_or(0),
        Scheme::Rp2 => budget.k * budget.l.unwrap_or(0),
    };
    Ok(SampleSizeResult {
        scheme,
        parameter: *parameter,
        n_qubits,
        t,
        gamma,
        worst_case_p: p,
        worst_case_variance: v,
        cantelli: bound,
        budget,
        budget_value,
        total_preparations: sample_cost(scheme, parameter, n_qubits, budget),
    })
}

/// Worst-case Cantelli bound at one explicit budget.
pub fn bound_at_budget(scheme: Scheme, parameter: &Parameter, n_qubits: usize, budget: Budget, t: f64) -> Result<f64> {
    let (_, v) = max_variance_over_noise(scheme, parameter, n_qubits, budget)?;
    cantelli_bound(v, t)
}

/// The budget one search step below `result.budget`, if it is valid.
pub fn previous_budget(result: &SampleSizeResult) -> Option<Budget> {
    let scheme = result.scheme;
    let i = match scheme {
        Scheme::Ts | Scheme::Ap1 => result.budget.k,
        Scheme::Ap2 => result.budget.k / 2,
        Scheme::Rp1 | Scheme::Rp2 => result.budget.l?,
    };
    (i > min_index(scheme)).then(|| budget_at(scheme, i - 1))
}
