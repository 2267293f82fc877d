use serde::{Deserialize, Serialize};

use super::data::{PairPatternDataset, Pattern, TotalSpinDataset};
use super::estimators::*;
use super::{Budget, Parameter, Role, Scheme};
use crate::error::{Error, Result};
use crate::states::Direction;

/// The data a scheme consumes. The split datasets of AP2 and RP2 need blocks
/// only on the axes whose variance is estimated.
#[derive(Clone, Copy, Debug)]
pub enum SchemeData<'a> {
    TotalSpin(&'a TotalSpinDataset),
    AllPairs(&'a PairPatternDataset),
    AllPairsSplit {
        pairs: &'a PairPatternDataset,
        split: &'a PairPatternDataset,
    },
    RandomPairs(&'a PairPatternDataset),
    RandomPairsSplit {
        pairs: &'a PairPatternDataset,
        split: &'a PairPatternDataset,
    },
}

impl SchemeData<'_> {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeData::TotalSpin(_) => Scheme::Ts,
            SchemeData::AllPairs(_) => Scheme::Ap1,
            SchemeData::AllPairsSplit { .. } => Scheme::Ap2,
            SchemeData::RandomPairs(_) => Scheme::Rp1,
            SchemeData::RandomPairsSplit { .. } => Scheme::Rp2,
        }
    }

    fn n_qubits(&self) -> Result<usize> {
        match self {
            SchemeData::TotalSpin(ds) => Ok(ds.n_qubits),
            SchemeData::AllPairs(ds) | SchemeData::RandomPairs(ds) => Ok(ds.n_qubits),
            SchemeData::AllPairsSplit { pairs, split } | SchemeData::RandomPairsSplit { pairs, split } => {
                if pairs.n_qubits != split.n_qubits {
                    return Err(Error::DatasetMismatch(format!(
                        "pair data has {} qubits, split data {}",
                        pairs.n_qubits, split.n_qubits
                    )));
                }
                Ok(pairs.n_qubits)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub scheme: Scheme,
    pub parameter: Parameter,
    pub n_qubits: usize,
    pub value: f64,
    pub budget: Budget,
    /// State preparations behind the blocks that entered the estimate.
    pub samples_used: u64,
}

struct Ledger {
    ids: Vec<u64>,
    samples: u64,
    budget: Option<Budget>,
}

impl Ledger {
    fn use_block(&mut self, id: u64, samples: u64, budget: Budget) -> Result<()> {
        if self.ids.contains(&id) {
            return Err(Error::SharedDataset(format!("{id:016x}")));
        }
        self.ids.push(id);
        self.samples += samples;
        match self.budget {
            Some(b) if b != budget => Err(Error::DatasetMismatch(format!(
                "blocks collected with different budgets ({b} and {budget})"
            ))),
            _ => {
                self.budget = Some(budget);
                Ok(())
            }
        }
    }

    fn use_pairs(&mut self, ds: &PairPatternDataset, d: Direction) -> Result<()> {
        let s = ds.block(d)?;
        let entries = (s.pairs.len() * s.reps) as u64;
        let budget = match ds.pattern {
            Pattern::AllPairs | Pattern::SplitSingle => Budget::repetitions(ds.k as u64),
            Pattern::RandomPairs | Pattern::RandomSplit => Budget::random(s.pairs.len() as u64, ds.k as u64),
        };
        self.use_block(s.id, entries * ds.pattern.preparations_per_entry(), budget)
    }
}

/// Combines independent per-axis block estimates into the parameter.
///
/// Each block of data may back only one term: reusing a series (same id)
/// for two terms fails with [`Error::SharedDataset`].
pub fn estimate_parameter(scheme: Scheme, parameter: &Parameter, data: SchemeData<'_>) -> Result<EstimateResult> {
    if data.scheme() != scheme {
        return Err(Error::DatasetMismatch(format!(
            "{scheme} cannot use data collected for {}",
            data.scheme()
        )));
    }
    let n = data.n_qubits()?;
    let mut ledger = Ledger {
        ids: Vec::new(),
        samples: 0,
        budget: None,
    };
    let mut value = 0.0;
    for term in parameter.terms(n) {
        let d = term.direction;
        let block = match (data, term.role) {
            (SchemeData::TotalSpin(ds), role) => {
                let s = ds.block(d)?;
                let k = s.outcomes.len() as u64;
                ledger.use_block(s.id, k, Budget::repetitions(k))?;
                match role {
                    Role::SecondMoment => est_j2_ts(ds, d)?,
                    Role::Variance => est_delta_j2_ts(ds, d)?,
                }
            }
            (SchemeData::AllPairs(ds), role) => {
                ledger.use_pairs(ds, d)?;
                match role {
                    Role::SecondMoment => est_j2_ap(ds, d)?,
                    Role::Variance => est_delta_j2_ap(ds, d)?,
                }
            }
            (SchemeData::RandomPairs(ds), role) => {
                ledger.use_pairs(ds, d)?;
                match role {
                    Role::SecondMoment => est_j2_rp(ds, d)?,
                    Role::Variance => est_delta_j2_rp(ds, d)?,
                }
            }
            (SchemeData::AllPairsSplit { pairs, .. }, Role::SecondMoment) => {
                ledger.use_pairs(pairs, d)?;
                est_j2_ap(pairs, d)?
            }
            (SchemeData::AllPairsSplit { pairs, split }, Role::Variance) => {
                ledger.use_pairs(pairs, d)?;
                ledger.use_pairs(split, d)?;
                est_j2_ap(pairs, d)? - est_jsq_split(split, d)?
            }
            (SchemeData::RandomPairsSplit { pairs, .. }, Role::SecondMoment) => {
                ledger.use_pairs(pairs, d)?;
                est_j2_rp(pairs, d)?
            }
            (SchemeData::RandomPairsSplit { pairs, split }, Role::Variance) => {
                ledger.use_pairs(pairs, d)?;
                ledger.use_pairs(split, d)?;
                est_j2_rp(pairs, d)? - est_jsq_rsplit(split, d)?
            }
        };
        value += term.weight * block;
    }
    let budget = ledger.budget.expect("every parameter has at least one term");
    budget.validate(scheme)?;
    Ok(EstimateResult {
        scheme,
        parameter: *parameter,
        n_qubits: n,
        value,
        budget,
        samples_used: ledger.samples,
    })
}
