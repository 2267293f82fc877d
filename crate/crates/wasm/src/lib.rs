//! Browser bindings for the demo page in `www/`. Every export takes plain
//! numbers and strings and returns a JSON document, so the page needs no
//! generated TypeScript types.

use serde_json::{json, Value};
use spinsq_core::hypothesis::{critical_noise, TRule};
use spinsq_core::montecarlo::{centered_anchor, histogram, run_trials, sweep_noise, sweep_sample_size};
use spinsq_core::variance::var_parameter;
use spinsq_core::{Budget, Parameter, Scheme, StateModel};
use wasm_bindgen::prelude::*;

/// Budgets of the Dicke-state variance table, one per scheme.
const REFERENCE_BUDGETS: [(Scheme, Budget); 5] = [
    (Scheme::Ts, Budget { k: 7400, l: None }),
    (Scheme::Ap1, Budget { k: 82, l: None }),
    (Scheme::Ap2, Budget { k: 60, l: None }),
    (Scheme::Rp1, Budget { k: 1, l: Some(7400) }),
    (Scheme::Rp2, Budget { k: 2, l: Some(2775) }),
];

type Result<T> = std::result::Result<T, String>;

fn err(e: spinsq_core::Error) -> String {
    e.to_string()
}

/// Variance of every scheme along `p |D_{N,N/2}><D_{N,N/2}| + (1-p) 1/2^N`
/// on `points + 1` evenly spaced visibilities.
pub fn noise_curve_json(param: &str, n_qubits: usize, points: usize) -> Result<Value> {
    let parameter: Parameter = param.parse().map_err(err)?;
    if points == 0 || points > 1000 {
        return Err(format!("points must lie in 1..=1000, got {points}"));
    }
    let grid: Vec<f64> = (0..=points).map(|i| i as f64 / points as f64).collect();
    let mut curves = Vec::new();
    for (scheme, budget) in REFERENCE_BUDGETS {
        let rows = sweep_noise(scheme, &parameter, n_qubits, budget, &grid, None).map_err(err)?;
        curves.push(json!({
            "scheme": scheme,
            "budget": budget,
            "variance": rows.iter().map(|r| r.analytic_variance).collect::<Vec<_>>(),
        }));
    }
    Ok(json!({ "n": n_qubits, "p": grid, "p_star": critical_noise(n_qubits), "curves": curves }))
}

/// Total state preparations each scheme needs for every even `N` in range.
pub fn sample_size_json(param: &str, n_min: usize, n_max: usize, gamma: f64, t_fraction: f64) -> Result<Value> {
    let parameter: Parameter = param.parse().map_err(err)?;
    if n_max > 64 || n_min > n_max {
        return Err(format!("need n_min <= n_max <= 64, got {n_min}..{n_max}"));
    }
    let ns: Vec<usize> = (n_min.max(4)..=n_max).filter(|n| n % 2 == 0).collect();
    let rows = sweep_sample_size(&parameter, TRule::FractionOfHalfN(t_fraction), gamma, &ns).map_err(err)?;
    Ok(json!({ "n": ns, "rows": rows }))
}

/// Monte Carlo histogram of one estimator next to its analytic mean and
/// variance. `l = 0` means no `L` (total-spin and all-pairs schemes).
#[allow(clippy::too_many_arguments)]
pub fn mc_histogram_json(
    state: &str,
    scheme: &str,
    param: &str,
    k: u64,
    l: u64,
    trials: usize,
    seed: u64,
    bins: usize,
) -> Result<Value> {
    let state: StateModel = state.parse().map_err(err)?;
    let scheme: Scheme = scheme.parse().map_err(err)?;
    let parameter: Parameter = param.parse().map_err(err)?;
    if trials > 20_000 {
        return Err("at most 20000 trials in the browser".into());
    }
    let budget = if l == 0 {
        Budget::repetitions(k)
    } else {
        Budget::random(l, k)
    };
    let table = state.moment_table().map_err(err)?;
    let analytic = var_parameter(&table, scheme, &parameter, budget).ok().map(|r| r.value);
    let stats = run_trials(&state, scheme, &parameter, budget, trials, seed).map_err(err)?;
    let center = parameter.value(&table);
    let sd = analytic.unwrap_or(stats.empirical_variance).sqrt();
    let width = if sd > 0.0 { 8.0 * sd / bins.max(1) as f64 } else { 1.0 };
    let h = histogram(&stats.values, bins, width, centered_anchor(center, bins, width)).map_err(err)?;
    Ok(json!({
        "state": state.label(),
        "scheme": scheme,
        "parameter": parameter.to_string(),
        "budget": budget,
        "trials": stats.trials,
        "seed": seed,
        "mean": stats.mean,
        "empirical_variance": stats.empirical_variance,
        "analytic_mean": center,
        "analytic_variance": analytic,
        "edges": h.edges(),
        "histogram": h,
    }))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn noise_curve(param: &str, n_qubits: usize, points: usize) -> std::result::Result<String, JsError> {
    to_js(noise_curve_json(param, n_qubits, points))
}

#[wasm_bindgen]
pub fn sample_size_table(
    param: &str,
    n_min: usize,
    n_max: usize,
    gamma: f64,
    t_fraction: f64,
) -> std::result::Result<String, JsError> {
    to_js(sample_size_json(param, n_min, n_max, gamma, t_fraction))
}

/// Seeds arrive from JavaScript as doubles; integers up to 2^53 are exact.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn mc_histogram(
    state: &str,
    scheme: &str,
    param: &str,
    k: u32,
    l: u32,
    trials: usize,
    seed: f64,
    bins: usize,
) -> std::result::Result<String, JsError> {
    to_js(mc_histogram_json(
        state,
        scheme,
        param,
        k as u64,
        l as u64,
        trials,
        seed as u64,
        bins,
    ))
}
