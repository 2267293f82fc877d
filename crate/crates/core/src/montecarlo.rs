//! Seeded Monte Carlo trials of the full collect-and-estimate pipeline.
//!
//! Trial `i` draws from `ChaCha8Rng::seed_from_u64(mix64(seed, i))` and
//! results are gathered in trial order, so a run is bit-identical for every
//! thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{required_budget, SampleSizeResult, TRule};
use crate::schemes::{
    collect_all_pairs, collect_random_pairs, collect_random_split, collect_split_single, collect_total_spin,
    estimate_parameter, Budget, Parameter, Role, Scheme, SchemeData,
};
use crate::states::{Direction, StateModel, StateSampler};
use crate::variance::{var_parameter, VarianceReport};

/// SplitMix64 finalizer applied to `master + (index + 1) * golden`.
pub fn mix64(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sets the size of the global worker pool. `0` picks one thread per core.
/// Only the first call has an effect.
#[cfg(feature = "parallel")]
pub fn configure_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .or(Ok(()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub state: String,
    pub n_qubits: usize,
    pub scheme: Scheme,
    pub parameter: Parameter,
    pub budget: Budget,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub config: TrialConfig,
    pub trials: usize,
    pub mean: f64,
    /// Sample variance with `T - 1` normalization.
    pub empirical_variance: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub histogram: Option<Histogram>,
    /// Per-trial estimates in trial order.
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl TrialStats {
    fn from_values(config: TrialConfig, values: Vec<f64>) -> Self {
        let t = values.len() as f64;
        let mean = values.iter().sum::<f64>() / t;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Self {
            trials: values.len(),
            seed: config.seed,
            config,
            mean,
            empirical_variance: if values.len() > 1 { ss / (t - 1.0) } else { 0.0 },
            histogram: None,
            values,
        }
    }

    /// Standard error of the mean from the empirical variance.
    pub fn standard_error(&self) -> f64 {
        (self.empirical_variance / self.trials as f64).sqrt()
    }
}

/// One trial: fresh data for every block, then every parameter estimated on
/// that data.
fn one_trial(
    sampler: &StateSampler,
    scheme: Scheme,
    parameters: &[Parameter],
    split_axes: &[Direction],
    budget: Budget,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = budget.k as usize;
    let l = budget.l.unwrap_or(0) as usize;
    let estimate = |data: SchemeData<'_>| -> Result<Vec<f64>> {
        parameters
            .iter()
            .map(|p| estimate_parameter(scheme, p, data).map(|r| r.value))
            .collect()
    };
    match scheme {
        Scheme::Ts => estimate(SchemeData::TotalSpin(&collect_total_spin(sampler, k, &mut rng))),
        Scheme::Ap1 => estimate(SchemeData::AllPairs(&collect_all_pairs(sampler, k, &mut rng)?)),
        Scheme::Ap2 => {
            let pairs = collect_all_pairs(sampler, k, &mut rng)?;
            let split = collect_split_single(sampler, k, split_axes, &mut rng)?;
            estimate(SchemeData::AllPairsSplit {
                pairs: &pairs,
                split: &split,
            })
        }
        Scheme::Rp1 => estimate(SchemeData::RandomPairs(&collect_random_pairs(sampler, l, k, &mut rng)?)),
        Scheme::Rp2 => {
            let pairs = collect_random_pairs(sampler, l, k, &mut rng)?;
            let split = collect_random_split(sampler, l, k, split_axes, &mut rng)?;
            estimate(SchemeData::RandomPairsSplit {
                pairs: &pairs,
                split: &split,
            })
        }
    }
}

#[cfg(feature = "parallel")]
fn map_trials<F>(trials: usize, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync + Send,
{
    use rayon::prelude::*;
    (0..trials as u64).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_trials<F>(trials: usize, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(u64) -> Result<Vec<f64>>,
{
    (0..trials as u64).map(f).collect()
}

/// Runs `trials` independent simulations and estimates every parameter in
/// each of them. The parameters of one trial share its data, so their
/// estimates are correlated with each other but each is distributed exactly
/// as in a single-parameter run.
pub fn run_trials_multi(
    state: &StateModel,
    scheme: Scheme,
    parameters: &[Parameter],
    budget: Budget,
    trials: usize,
    seed: u64,
) -> Result<Vec<TrialStats>> {
    if trials < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 trials, got {trials}")));
    }
    if parameters.is_empty() {
        return Err(Error::InvalidArgument("no parameters to estimate".into()));
    }
    budget.validate(scheme)?;
    let n = state.n_qubits();
    let mut split_axes: Vec<Direction> = Vec::new();
    for p in parameters {
        for term in p.terms(n) {
            if term.role == Role::Variance && !split_axes.contains(&term.direction) {
                split_axes.push(term.direction);
            }
        }
    }
    split_axes.sort_by_key(|d| d.index());
    let sampler = StateSampler::new(state)?;
    let per_trial = map_trials(trials, |i| {
        one_trial(&sampler, scheme, parameters, &split_axes, budget, mix64(seed, i))
    })?;
    Ok(parameters
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let config = TrialConfig {
                state: state.label(),
                n_qubits: n,
                scheme,
                parameter: *p,
                budget,
                trials,
                seed,
            };
            TrialStats::from_values(config, per_trial.iter().map(|v| v[j]).collect())
        })
        .collect())
}

pub fn run_trials(
    state: &StateModel,
    scheme: Scheme,
    parameter: &Parameter,
    budget: Budget,
    trials: usize,
    seed: u64,
) -> Result<TrialStats> {
    let mut all = run_trials_multi(state, scheme, std::slice::from_ref(parameter), budget, trials, seed)?;
    Ok(all.remove(0))
}

/// Left-closed bins `[anchor + i w, anchor + (i+1) w)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub anchor: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.counts.len())
            .map(|i| self.anchor + i as f64 * self.bin_width)
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

pub fn histogram(values: &[f64], bin_count: usize, bin_width: f64, anchor: f64) -> Result<Histogram> {
    if bin_count == 0 || bin_width.is_nan() || bin_width <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "histogram needs at least one bin of positive width, got {bin_count} x {bin_width}"
        )));
    }
    let mut h = Histogram {
        anchor,
        bin_width,
        counts: vec![0; bin_count],
        underflow: 0,
        overflow: 0,
    };
    for &v in values {
        let pos = ((v - anchor) / bin_width).floor();
        if pos < 0.0 {
            h.underflow += 1;
        } else if pos >= bin_count as f64 {
            h.overflow += 1;
        } else {
            h.counts[pos as usize] += 1;
        }
    }
    Ok(h)
}

/// Anchor that centers `bin_count` bins on `center`.
pub fn centered_anchor(center: f64, bin_count: usize, bin_width: f64) -> f64 {
    center - bin_count as f64 / 2.0 * bin_width
}

pub const DEFAULT_TOLERANCE: f64 = 0.10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub scheme: Scheme,
    pub parameter: Parameter,
    pub budget: Budget,
    pub trials: usize,
    pub empirical_variance: f64,
    pub analytic_variance: f64,
    /// `empirical / analytic - 1`; zero when both vanish.
    pub relative_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn compare_analytic(stats: &TrialStats, report: &VarianceReport, tolerance: f64) -> Result<Comparison> {
    let c = &stats.config;
    if c.scheme != report.scheme
        || c.parameter != report.parameter
        || c.budget != report.budget
        || c.n_qubits != report.n_qubits
    {
        return Err(Error::ConfigMismatch(format!(
            "trials ran {} {} {} N={}, report covers {} {} {} N={}",
            c.scheme,
            c.parameter,
            c.budget,
            c.n_qubits,
            report.scheme,
            report.parameter,
            report.budget,
            report.n_qubits
        )));
    }
    let (emp, ana) = (stats.empirical_variance, report.value);
    let relative_deviation = if emp == 0.0 && ana == 0.0 {
        0.0
    } else if ana == 0.0 {
        f64::INFINITY
    } else {
        emp / ana - 1.0
    };
    Ok(Comparison {
        scheme: c.scheme,
        parameter: c.parameter,
        budget: c.budget,
        trials: stats.trials,
        empirical_variance: emp,
        analytic_variance: ana,
        relative_deviation,
        tolerance,
        pass: relative_deviation.abs() <= tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub p: f64,
    pub analytic_variance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub empirical_variance: Option<f64>,
}

/// Variance of the estimate along the depolarized `|D_{N,N/2}>` family.
/// With `empirical = Some((trials, seed))` each grid point is also
/// simulated.
pub fn sweep_noise(
    scheme: Scheme,
    parameter: &Parameter,
    n_qubits: usize,
    budget: Budget,
    p_grid: &[f64],
    empirical: Option<(usize, u64)>,
) -> Result<Vec<NoiseRow>> {
    if n_qubits % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "noise sweeps use |D_(N,N/2)>, N = {n_qubits} is odd"
        )));
    }
    let base = StateModel::dicke(n_qubits, n_qubits / 2)?;
    let table = base.moment_table()?;
    p_grid
        .iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("visibility {p} outside [0, 1]")));
            }
            let analytic_variance = var_parameter(&table.depolarized(p), scheme, parameter, budget)?.value;
            let empirical_variance = match empirical {
                Some((trials, seed)) => {
                    let state = StateModel::depolarized(base.clone(), p)?;
                    Some(run_trials(&state, scheme, parameter, budget, trials, seed)?.empirical_variance)
                }
                None => None,
            };
            Ok(NoiseRow {
                p,
                analytic_variance,
                empirical_variance,
            })
        })
        .collect()
}

/// Required budgets for every scheme at every `N`, in `(N, scheme)` order.
pub fn sweep_sample_size(
    parameter: &Parameter,
    t_rule: TRule,
    gamma: f64,
    n_list: &[usize],
) -> Result<Vec<SampleSizeResult>> {
    let mut rows = Vec::with_capacity(n_list.len() * Scheme::ALL.len());
    for &n in n_list {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("N must be even and >= 4, got {n}")));
        }
        for scheme in Scheme::ALL {
            rows.push(required_budget(scheme, parameter, n, t_rule.margin(n), gamma)?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ParameterKind;

    #[test]
    fn mix64_spreads_indices() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| mix64(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(mix64(0, 0), mix64(1, 0));
    }

    #[test]
    fn singlet_ts_is_deterministic_zero() {
        let state = StateModel::singlet(8).unwrap();
        let p = Parameter::new(ParameterKind::B);
        let stats = run_trials(&state, Scheme::Ts, &p, Budget::repetitions(100), 100, 1).unwrap();
        assert!(stats.values.iter().all(|&v| v == 0.0));
        assert_eq!(stats.empirical_variance, 0.0);
    }

    #[test]
    fn reruns_are_identical() {
        let state = StateModel::dicke(4, 2).unwrap();
        let p = Parameter::new(ParameterKind::C);
        let a = run_trials(&state, Scheme::Ap2, &p, Budget::repetitions(4), 50, 11).unwrap();
        let b = run_trials(&state, Scheme::Ap2, &p, Budget::repetitions(4), 50, 11).unwrap();
        assert_eq!(a, b);
        let c = run_trials(&state, Scheme::Ap2, &p, Budget::repetitions(4), 50, 12).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn multi_matches_single_runs() {
        let state = StateModel::dicke(4, 1).unwrap();
        let params = [Parameter::new(ParameterKind::B), Parameter::new(ParameterKind::D)];
        let multi = run_trials_multi(&state, Scheme::Rp2, &params, Budget::random(5, 2), 20, 3).unwrap();
        // a single-parameter run collects split data only on its own axes,
        // so only xi_b (all axes) reproduces the multi run bit for bit
        let single = run_trials(&state, Scheme::Rp2, &params[0], Budget::random(5, 2), 20, 3).unwrap();
        assert_eq!(multi[0].values, single.values);
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&[1.0, 1.0, 1.0], 5, 0.1, 1.0).unwrap();
        assert_eq!(h.counts[0], 3);
        let values: Vec<f64> = (0..100).map(|i| i as f64 * 0.037 - 1.0).collect();
        let h = histogram(&values, 7, 0.2, 0.0).unwrap();
        assert_eq!(h.total(), 100);
        assert!(h.underflow > 0 && h.overflow > 0);
        assert!(histogram(&values, 0, 0.2, 0.0).is_err());
        assert_eq!(centered_anchor(30.0, 99, 0.02), 30.0 - 0.99);
    }

    #[test]
    fn comparison_checks_config() {
        let state = StateModel::singlet(4).unwrap();
        let p = Parameter::new(ParameterKind::B);
        let stats = run_trials(&state, Scheme::Ts, &p, Budget::repetitions(5), 10, 0).unwrap();
        let table = state.moment_table().unwrap();
        let report = var_parameter(&table, Scheme::Ts, &p, Budget::repetitions(5)).unwrap();
        let cmp = compare_analytic(&stats, &report, DEFAULT_TOLERANCE).unwrap();
        assert!(cmp.pass && cmp.relative_deviation == 0.0);
        let other = var_parameter(&table, Scheme::Ts, &p, Budget::repetitions(6)).unwrap();
        assert!(matches!(
            compare_analytic(&stats, &other, 0.1),
            Err(Error::ConfigMismatch(_))
        ));
    }
}
