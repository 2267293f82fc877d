use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use spinsq_core::hypothesis::{self, TRule};
use spinsq_core::montecarlo::{self, TrialStats};
use spinsq_core::schemes::io::{read_dataset, write_dataset, Dataset, Metadata};
use spinsq_core::schemes::{
    collect_all_pairs, collect_random_pairs, collect_random_split, collect_split_single, collect_total_spin,
    estimate_parameter, sample_cost, Pattern, SchemeData,
};
use spinsq_core::states::StateSampler;
use spinsq_core::variance::{closed_form, var_parameter, StateFamily};
use spinsq_core::{Budget, Direction, Parameter, Scheme, StateModel};

use crate::args::*;
use crate::output::{config_hash, invalid, write_bytes, CliError, CliResult, Report, Table};

/// Reference budgets behind `sweep --figure table2`, reused by the
/// noise figure.
pub const REFERENCE_BUDGETS: [(Scheme, Budget); 5] = [
    (Scheme::Ts, Budget { k: 7400, l: None }),
    (Scheme::Ap1, Budget { k: 82, l: None }),
    (Scheme::Ap2, Budget { k: 60, l: None }),
    (Scheme::Rp1, Budget { k: 1, l: Some(7400) }),
    (Scheme::Rp2, Budget { k: 2, l: Some(2775) }),
];

fn parse<T: std::str::FromStr<Err = spinsq_core::Error>>(s: &str) -> CliResult<T> {
    Ok(s.parse::<T>()?)
}

/// The effective configuration, without the seed, for hashing and echoing.
fn config_of<T: Serialize>(args: &T) -> CliResult<Value> {
    let mut v = serde_json::to_value(args)?;
    if let Value::Object(map) = &mut v {
        map.remove("seed");
    }
    Ok(v)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let nanos = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        montecarlo::mix64(nanos, std::process::id() as u64)
    })
}

/// Builds the budget a scheme needs from `--k`/`--l`. Random schemes default
/// to `K = 1` (RP1) or `K = 2` (RP2).
pub fn budget_for(scheme: Scheme, k: Option<u64>, l: Option<u64>) -> CliResult<Budget> {
    let budget = if scheme.is_random() {
        let Some(l) = l else {
            return invalid(format!("{scheme} needs --l"));
        };
        Budget::random(l, k.unwrap_or(if scheme == Scheme::Rp2 { 2 } else { 1 }))
    } else {
        if l.is_some() {
            return invalid(format!("{scheme} takes no --l"));
        }
        let Some(k) = k else {
            return invalid(format!("{scheme} needs --k"));
        };
        Budget::repetitions(k)
    };
    budget.validate(scheme)?;
    Ok(budget)
}

fn parse_axes(s: &str) -> CliResult<Vec<Direction>> {
    let mut axes = Vec::new();
    for c in s.chars() {
        let d: Direction = parse(&c.to_string())?;
        if axes.contains(&d) {
            return invalid(format!("direction {d} repeated in --axes {s}"));
        }
        axes.push(d);
    }
    if axes.is_empty() {
        return invalid("--axes is empty");
    }
    Ok(axes)
}

/// `0.1halfN` means `0.1 * N/2`; a plain number is an absolute margin.
pub fn parse_t_rule(s: &str) -> CliResult<TRule> {
    let s = s.trim();
    let (number, rule): (&str, fn(f64) -> TRule) = match s.strip_suffix("halfN") {
        Some(f) => (f, TRule::FractionOfHalfN),
        None => (s, TRule::Absolute),
    };
    match number.trim().parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(rule(x)),
        _ => invalid(format!(
            "--t-rule must be a positive number or <fraction>halfN, got '{s}'"
        )),
    }
}

fn check_format(format: Option<Format>, allowed: Format, what: &str) -> CliResult<()> {
    match format {
        Some(f) if f != allowed => invalid(format!("{what} is only available as {allowed:?}").to_lowercase()),
        _ => Ok(()),
    }
}

fn family_of(state: &StateModel) -> Option<StateFamily> {
    match state {
        StateModel::Singlet(_) => Some(StateFamily::Singlet),
        StateModel::Dicke(d) if 2 * d.excitations() == d.n_qubits() => Some(StateFamily::DickeHalf),
        _ => None,
    }
}

pub fn sample(args: &SampleArgs) -> CliResult<()> {
    check_format(args.output.format, Format::Csv, "dataset output")?;
    let state: StateModel = parse(&args.state)?;
    let sampler = StateSampler::new(&state)?;
    let seed = resolve_seed(args.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes = parse_axes(&args.axes)?;
    let k = args.k as usize;
    let random = matches!(args.pattern, PatternArg::Rp | PatternArg::RpSplit);
    let l = match (random, args.l) {
        (true, Some(l)) => l as usize,
        (true, None) => return invalid("random patterns need --l"),
        (false, Some(_)) => return invalid("--l applies to random patterns only"),
        (false, None) => 0,
    };
    if k == 0 {
        return invalid("--k must be at least 1");
    }
    let dataset = match args.pattern {
        PatternArg::Ts => Dataset::TotalSpin(collect_total_spin(&sampler, k, &mut rng)),
        PatternArg::Ap => Dataset::Pairs(collect_all_pairs(&sampler, k, &mut rng)?),
        PatternArg::ApSplit => Dataset::Pairs(collect_split_single(&sampler, k, &axes, &mut rng)?),
        PatternArg::Rp => Dataset::Pairs(collect_random_pairs(&sampler, l, k, &mut rng)?),
        PatternArg::RpSplit => Dataset::Pairs(collect_random_split(&sampler, l, k, &axes, &mut rng)?),
    };
    let mut meta = Metadata::new();
    meta.insert("state".into(), state.label());
    meta.insert("seed".into(), seed.to_string());
    meta.insert("config_hash".into(), config_hash(&config_of(args)?));
    let mut bytes = Vec::new();
    write_dataset(&dataset, &meta, &mut bytes)?;
    write_bytes(args.output.out.as_deref(), &bytes)
}

fn load(path: &PathBuf) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    read_dataset(BufReader::new(file))
        .map(|(ds, _)| ds)
        .map_err(|e| match e {
            spinsq_core::Error::Io(m) => CliError::Runtime(format!("{}: {m}", path.display())),
            other => CliError::Validation(format!("{}: {other}", path.display())),
        })
}

/// Assigns each loaded dataset to its role in the scheme. Every file must be
/// used exactly once.
fn scheme_data<'a>(scheme: Scheme, datasets: &'a [Dataset]) -> CliResult<SchemeData<'a>> {
    let find = |want: &str| -> CliResult<&'a Dataset> {
        let hits: Vec<&Dataset> = datasets.iter().filter(|d| d.pattern_name() == want).collect();
        match hits.as_slice() {
            [one] => Ok(one),
            [] => invalid(format!("{scheme} needs a {want} dataset")),
            _ => invalid(format!("more than one {want} dataset given")),
        }
    };
    let pairs = |d: &'a Dataset| match d {
        Dataset::Pairs(p) => p,
        Dataset::TotalSpin(_) => unreachable!("pattern names are distinct"),
    };
    let (data, needed) = match scheme {
        Scheme::Ts => match find("total-spin")? {
            Dataset::TotalSpin(ts) => (SchemeData::TotalSpin(ts), 1),
            Dataset::Pairs(_) => unreachable!("pattern names are distinct"),
        },
        Scheme::Ap1 => (SchemeData::AllPairs(pairs(find(Pattern::AllPairs.name())?)), 1),
        Scheme::Ap2 => (
            SchemeData::AllPairsSplit {
                pairs: pairs(find(Pattern::AllPairs.name())?),
                split: pairs(find(Pattern::SplitSingle.name())?),
            },
            2,
        ),
        Scheme::Rp1 => (SchemeData::RandomPairs(pairs(find(Pattern::RandomPairs.name())?)), 1),
        Scheme::Rp2 => (
            SchemeData::RandomPairsSplit {
                pairs: pairs(find(Pattern::RandomPairs.name())?),
                split: pairs(find(Pattern::RandomSplit.name())?),
            },
            2,
        ),
    };
    if datasets.len() != needed {
        return invalid(format!(
            "{scheme} uses {needed} dataset(s), got {}: {}",
            datasets.len(),
            datasets.iter().map(|d| d.pattern_name()).collect::<Vec<_>>().join(", ")
        ));
    }
    Ok(data)
}

pub fn estimate(args: &EstimateArgs) -> CliResult<Report> {
    let scheme: Scheme = parse(&args.scheme)?;
    let parameter: Parameter = parse(&args.param)?;
    let datasets = args.files.iter().map(load).collect::<CliResult<Vec<_>>>()?;
    let result = estimate_parameter(scheme, &parameter, scheme_data(scheme, &datasets)?)?;
    let n = result.n_qubits;
    let bound = hypothesis::separable_bound(&parameter, n)?;
    let (variance, source) = match (&args.state, args.variance) {
        (Some(spec), _) => {
            let state: StateModel = parse(spec)?;
            if state.n_qubits() != n {
                return invalid(format!("state has {} qubits, data has {n}", state.n_qubits()));
            }
            let v = var_parameter(&state.moment_table()?, scheme, &parameter, result.budget)?.value;
            (Some(v), Some(state.label()))
        }
        (None, Some(v)) => (Some(v), Some("user".to_string())),
        (None, None) => (None, None),
    };
    let p_value = variance
        .map(|v| hypothesis::p_value_bound(result.value, &bound, v))
        .transpose()?;
    let mut table = Table::new(vec![
        "scheme",
        "parameter",
        "n",
        "k",
        "l",
        "value",
        "samples_used",
        "bound",
        "margin",
        "variance",
        "p_value_bound",
    ]);
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    table.push(vec![
        scheme.to_string(),
        parameter.to_string(),
        n.to_string(),
        result.budget.k.to_string(),
        result.budget.l.map(|l| l.to_string()).unwrap_or_default(),
        result.value.to_string(),
        result.samples_used.to_string(),
        bound.bound.to_string(),
        bound.margin(result.value).to_string(),
        opt(variance),
        opt(p_value),
    ]);
    Ok(Report {
        command: "estimate",
        config: config_of(args)?,
        seed: None,
        result: json!({
            "estimate": result,
            "separable_bound": bound,
            "margin": bound.margin(result.value),
            "violated": bound.is_violated(result.value),
            "variance": variance,
            "variance_source": source,
            "p_value_bound": p_value,
        }),
        table,
        default_format: Format::Json,
        notes: vec![],
    })
}

pub fn variance(args: &VarianceArgs) -> CliResult<Report> {
    let state: StateModel = parse(&args.state)?;
    let scheme: Scheme = parse(&args.scheme)?;
    let parameter: Parameter = parse(&args.param)?;
    let budget = budget_for(scheme, args.k, args.l)?;
    let n = state.n_qubits();
    let report = var_parameter(&state.moment_table()?, scheme, &parameter, budget)?;
    let exact = family_of(&state).and_then(|f| closed_form(scheme, &parameter, f, n, budget).ok());
    let mut table = Table::new(vec![
        "scheme",
        "parameter",
        "n",
        "k",
        "l",
        "variance",
        "total_preparations",
    ]);
    table.push(vec![
        scheme.to_string(),
        parameter.to_string(),
        n.to_string(),
        budget.k.to_string(),
        budget.l.map(|l| l.to_string()).unwrap_or_default(),
        report.value.to_string(),
        sample_cost(scheme, &parameter, n, budget).to_string(),
    ]);
    Ok(Report {
        command: "variance",
        config: config_of(args)?,
        seed: None,
        result: json!({
            "state": state.label(),
            "report": report,
            "total_preparations": sample_cost(scheme, &parameter, n, budget),
            "closed_form": exact.map(|r| json!({
                "rational": format!("{}/{}", r.numer(), r.denom()),
                "value": *r.numer() as f64 / *r.denom() as f64,
            })),
        }),
        table,
        default_format: Format::Json,
        notes: vec![],
    })
}

fn sample_size_rows(results: &[hypothesis::SampleSizeResult]) -> CliResult<(Vec<Value>, Table)> {
    let mut table = Table::new(vec![
        "n",
        "scheme",
        "k",
        "l",
        "budget_value",
        "total_preparations",
        "worst_case_p",
        "worst_case_variance",
        "cantelli",
        "previous_cantelli",
    ]);
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let previous = hypothesis::previous_budget(r)
            .map(|b| hypothesis::bound_at_budget(r.scheme, &r.parameter, r.n_qubits, b, r.t))
            .transpose()?;
        table.push(vec![
            r.n_qubits.to_string(),
            r.scheme.to_string(),
            r.budget.k.to_string(),
            r.budget.l.map(|l| l.to_string()).unwrap_or_default(),
            r.budget_value.to_string(),
            r.total_preparations.to_string(),
            r.worst_case_p.to_string(),
            r.worst_case_variance.to_string(),
            r.cantelli.to_string(),
            previous.map(|p| p.to_string()).unwrap_or_default(),
        ]);
        let mut v = serde_json::to_value(r)?;
        v["previous_cantelli"] = json!(previous);
        rows.push(v);
    }
    Ok((rows, table))
}

pub fn samplesize(args: &SampleSizeArgs) -> CliResult<Report> {
    let parameter: Parameter = parse(&args.param)?;
    let margin = parse_t_rule(&args.t_rule)?.margin(args.n);
    let schemes = match &args.scheme {
        Some(s) => vec![parse::<Scheme>(s)?],
        None => Scheme::ALL.to_vec(),
    };
    let results = schemes
        .iter()
        .map(|&s| hypothesis::required_budget(s, &parameter, args.n, margin, args.gamma))
        .collect::<Result<Vec<_>, _>>()?;
    let (rows, table) = sample_size_rows(&results)?;
    Ok(Report {
        command: "samplesize",
        config: config_of(args)?,
        seed: None,
        result: Value::Array(rows),
        table,
        default_format: Format::Json,
        notes: vec![],
    })
}

fn set_threads(threads: usize) -> CliResult<()> {
    montecarlo::configure_threads(threads)?;
    Ok(())
}

pub fn mc(args: &McArgs) -> CliResult<Report> {
    set_threads(args.threads)?;
    let state: StateModel = parse(&args.state)?;
    let scheme: Scheme = parse(&args.scheme)?;
    let parameter: Parameter = parse(&args.param)?;
    let budget = budget_for(scheme, args.k, args.l)?;
    if args.bins == 0 {
        return invalid("--bins must be at least 1");
    }
    let seed = resolve_seed(args.seed);
    let table = state.moment_table()?;
    let analytic = match var_parameter(&table, scheme, &parameter, budget) {
        Ok(r) => Some(r),
        Err(spinsq_core::Error::UnsupportedAnalytic(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut stats: TrialStats = montecarlo::run_trials(&state, scheme, &parameter, budget, args.trials, seed)?;
    let center = parameter.value(&table);
    let spread = analytic.as_ref().map_or(stats.empirical_variance, |r| r.value).sqrt();
    let width = match args.bin_width {
        Some(w) => w,
        None if spread > 0.0 => 8.0 * spread / args.bins as f64,
        None => 1.0,
    };
    let h = montecarlo::histogram(
        &stats.values,
        args.bins,
        width,
        montecarlo::centered_anchor(center, args.bins, width),
    )?;
    let comparison = analytic
        .as_ref()
        .map(|r| montecarlo::compare_analytic(&stats, r, args.tolerance))
        .transpose()?;

    let mut rows = Table::new(vec!["bin_low", "bin_high", "count"]);
    let edges = h.edges();
    for (i, c) in h.counts.iter().enumerate() {
        rows.push(vec![edges[i].to_string(), edges[i + 1].to_string(), c.to_string()]);
    }
    let notes = vec![
        ("underflow".to_string(), h.underflow.to_string()),
        ("overflow".to_string(), h.overflow.to_string()),
        ("mean".to_string(), stats.mean.to_string()),
        ("empirical_variance".to_string(), stats.empirical_variance.to_string()),
    ];
    stats.histogram = Some(h);
    Ok(Report {
        command: "mc",
        config: config_of(args)?,
        seed: Some(seed),
        result: json!({
            "stats": stats,
            "analytic_mean": center,
            "analytic_variance": analytic.as_ref().map(|r| r.value),
            "comparison": comparison,
        }),
        table: rows,
        default_format: Format::Json,
        notes,
    })
}

fn table2(parameter: &Parameter) -> CliResult<(Vec<Value>, Table)> {
    let state = StateModel::dicke(10, 5)?;
    let moments = state.moment_table()?;
    let mut table = Table::new(vec!["scheme", "k", "l", "variance", "total_preparations"]);
    let mut rows = Vec::new();
    for (scheme, budget) in REFERENCE_BUDGETS {
        let v = var_parameter(&moments, scheme, parameter, budget)?.value;
        let cost = sample_cost(scheme, parameter, 10, budget);
        table.push(vec![
            scheme.to_string(),
            budget.k.to_string(),
            budget.l.map(|l| l.to_string()).unwrap_or_default(),
            v.to_string(),
            cost.to_string(),
        ]);
        rows.push(json!({ "scheme": scheme, "budget": budget, "variance": v, "total_preparations": cost }));
    }
    Ok((rows, table))
}

fn fig8(args: &SweepArgs, parameter: &Parameter, seed: u64) -> CliResult<(Vec<Value>, Table)> {
    if !(args.p_step > 0.0 && args.p_step <= 1.0) {
        return invalid("--p-step must lie in (0, 1]");
    }
    let steps = (1.0 / args.p_step).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| (i as f64 * args.p_step).min(1.0)).collect();
    let mut header = vec!["scheme", "p", "analytic_variance"];
    if args.trials.is_some() {
        header.push("empirical_variance");
    }
    let mut table = Table::new(header);
    let mut rows = Vec::new();
    for (scheme, budget) in REFERENCE_BUDGETS {
        let curve = montecarlo::sweep_noise(scheme, parameter, args.n, budget, &grid, args.trials.map(|t| (t, seed)))?;
        for r in curve {
            let mut row = vec![scheme.to_string(), r.p.to_string(), r.analytic_variance.to_string()];
            if let Some(e) = r.empirical_variance {
                row.push(e.to_string());
            }
            table.push(row);
            rows.push(json!({ "scheme": scheme, "row": r }));
        }
    }
    Ok((rows, table))
}

fn fig9(args: &SweepArgs, parameter: &Parameter) -> CliResult<(Vec<Value>, Table)> {
    if args.n_min > args.n_max {
        return invalid("--n-min exceeds --n-max");
    }
    let ns: Vec<usize> = (args.n_min..=args.n_max).filter(|n| n % 2 == 0).collect();
    let rule = parse_t_rule(&args.t_rule)?;
    let results = montecarlo::sweep_sample_size(parameter, rule, args.gamma, &ns)?;
    sample_size_rows(&results)
}

pub fn sweep(args: &SweepArgs) -> CliResult<Report> {
    set_threads(args.threads)?;
    let parameter: Parameter = parse(&args.param)?;
    let seed = args.trials.map(|_| resolve_seed(args.seed));
    let (rows, table) = match args.figure {
        Figure::Table2 => table2(&parameter)?,
        Figure::Fig8 => fig8(args, &parameter, seed.unwrap_or(0))?,
        Figure::Fig9 => fig9(args, &parameter)?,
    };
    Ok(Report {
        command: "sweep",
        config: config_of(args)?,
        seed,
        result: Value::Array(rows),
        table,
        default_format: Format::Csv,
        notes: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_rules() {
        assert_eq!(parse_t_rule("0.1halfN").unwrap(), TRule::FractionOfHalfN(0.1));
        assert_eq!(parse_t_rule("0.5").unwrap(), TRule::Absolute(0.5));
        assert!(parse_t_rule("-1").is_err());
        assert!(parse_t_rule("halfN").is_err());
    }

    #[test]
    fn budgets() {
        assert_eq!(
            budget_for(Scheme::Rp1, None, Some(7400)).unwrap(),
            Budget::random(7400, 1)
        );
        assert_eq!(
            budget_for(Scheme::Rp2, None, Some(2775)).unwrap(),
            Budget::random(2775, 2)
        );
        assert!(budget_for(Scheme::Ts, Some(10), Some(3)).is_err());
        assert!(budget_for(Scheme::Ap2, Some(7), None).is_err());
        assert!(budget_for(Scheme::Rp1, Some(1), None).is_err());
        for (scheme, budget) in REFERENCE_BUDGETS {
            budget.validate(scheme).unwrap();
        }
    }

    #[test]
    fn axes() {
        assert_eq!(parse_axes("zx").unwrap(), vec![Direction::Z, Direction::X]);
        assert!(parse_axes("xx").is_err());
        assert!(parse_axes("q").is_err());
    }
}
