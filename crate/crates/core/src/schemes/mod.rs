//! Measurement patterns, data collection and the unbiased estimators.
//!
//! The four parameters are
//!
//! ```text
//! xi_a = <J_x^2> + <J_y^2> + <J_z^2>
//! xi_b = (dJ_x)^2 + (dJ_y)^2 + (dJ_z)^2
//! xi_c = <J_k^2> + <J_l^2> - (N-1) (dJ_m)^2
//! xi_d = (N-1) [(dJ_k)^2 + (dJ_l)^2] - <J_m^2>
//! ```
//!
//! Each parameter is a weighted sum of per-axis blocks, either a second
//! moment or a variance ([`Term`]). Every block is estimated from its own
//! independently collected data, so estimates and variances compose
//! linearly over the terms.

mod compose;
mod data;
mod estimators;
pub mod io;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{Direction, MomentTable};

pub use compose::{estimate_parameter, EstimateResult, SchemeData};
pub use data::{
    collect_all_pairs, collect_random_pairs, collect_random_split, collect_split_single, collect_total_spin,
    PairPatternDataset, PairSeries, Pattern, TotalSpinDataset, TotalSpinSeries,
};
pub use estimators::{
    ap_cross_sum, est_delta_j2_ap, est_delta_j2_rp, est_delta_j2_ts, est_j2_ap, est_j2_rp, est_j2_ts, est_jsq_rsplit,
    est_jsq_split, rp_cross_sum,
};

/// Estimation scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Total spin measured collectively.
    Ts,
    /// All ordered pairs; variance from the pair data alone.
    Ap1,
    /// All ordered pairs plus split single-qubit runs for `<J>^2`.
    Ap2,
    /// Random pairs; variance from the pair data alone.
    Rp1,
    /// Random pairs plus random split single-qubit runs for `<J>^2`.
    Rp2,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Ts, Scheme::Ap1, Scheme::Ap2, Scheme::Rp1, Scheme::Rp2];

    pub fn is_random(self) -> bool {
        matches!(self, Scheme::Rp1 | Scheme::Rp2)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ts => "ts",
            Scheme::Ap1 => "ap1",
            Scheme::Ap2 => "ap2",
            Scheme::Rp1 => "rp1",
            Scheme::Rp2 => "rp2",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ts" => Ok(Scheme::Ts),
            "ap1" => Ok(Scheme::Ap1),
            "ap2" => Ok(Scheme::Ap2),
            "rp1" => Ok(Scheme::Rp1),
            "rp2" => Ok(Scheme::Rp2),
            other => Err(Error::Parse(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParameterKind {
    A,
    B,
    C,
    D,
}

/// Which quantity a block estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// `<J_a^2>`.
    SecondMoment,
    /// `(dJ_a)^2`.
    Variance,
}

/// `weight * block(direction, role)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub direction: Direction,
    pub role: Role,
    pub weight: f64,
}

/// A spin-squeezing parameter with its axis assignment `(k, l, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Parameter {
    pub kind: ParameterKind,
    pub axes: [Direction; 3],
}

impl Parameter {
    /// Default axes `k = x, l = y, m = z`.
    pub fn new(kind: ParameterKind) -> Self {
        Self {
            kind,
            axes: Direction::ALL,
        }
    }

    pub fn with_axes(kind: ParameterKind, axes: [Direction; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for d in axes {
            seen[d.index()] = true;
        }
        if seen.contains(&false) {
            return Err(Error::InvalidArgument(format!(
                "axes {axes:?} are not a permutation of (x, y, z)"
            )));
        }
        Ok(Self { kind, axes })
    }

    /// Decomposition into independently estimated blocks.
    pub fn terms(&self, n_qubits: usize) -> Vec<Term> {
        let w = n_qubits as f64 - 1.0;
        let [k, l, m] = self.axes;
        let t = |direction, role, weight| Term {
            direction,
            role,
            weight,
        };
        use Role::*;
        match self.kind {
            ParameterKind::A => Direction::ALL.map(|d| t(d, SecondMoment, 1.0)).to_vec(),
            ParameterKind::B => Direction::ALL.map(|d| t(d, Variance, 1.0)).to_vec(),
            ParameterKind::C => vec![t(k, SecondMoment, 1.0), t(l, SecondMoment, 1.0), t(m, Variance, -w)],
            ParameterKind::D => vec![t(k, Variance, w), t(l, Variance, w), t(m, SecondMoment, -1.0)],
        }
    }

    /// Number of axes whose variance is needed.
    pub fn variance_axes(&self) -> u64 {
        match self.kind {
            ParameterKind::A => 0,
            ParameterKind::B => 3,
            ParameterKind::C => 1,
            ParameterKind::D => 2,
        }
    }

    /// Exact value of the parameter for a state.
    pub fn value(&self, table: &MomentTable) -> f64 {
        self.terms(table.n_qubits)
            .iter()
            .map(|t| {
                let second = table.moment(t.direction, 2);
                let block = match t.role {
                    Role::SecondMoment => second,
                    Role::Variance => second - table.moment(t.direction, 1).powi(2),
                };
                t.weight * block
            })
            .sum()
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ParameterKind::A => "a",
            ParameterKind::B => "b",
            ParameterKind::C => "c",
            ParameterKind::D => "d",
        };
        if self.axes == Direction::ALL {
            f.write_str(kind)
        } else {
            let [k, l, m] = self.axes;
            write!(f, "{kind}:k{k}l{l}m{m}")
        }
    }
}

/// `a|b|c|d[:kxlymz]`; the axis suffix may also be written `xyz`.
impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (kind, axes) = match s.split_once(':') {
            Some((kind, axes)) => (kind, Some(axes)),
            None => (s.as_str(), None),
        };
        let kind = match kind {
            "a" => ParameterKind::A,
            "b" => ParameterKind::B,
            "c" => ParameterKind::C,
            "d" => ParameterKind::D,
            other => return Err(Error::Parse(format!("unknown parameter '{other}'"))),
        };
        let Some(axes) = axes else {
            return Ok(Self::new(kind));
        };
        let letters: String = match axes.len() {
            6 if axes.starts_with('k') && &axes[2..3] == "l" && &axes[4..5] == "m" => {
                [&axes[1..2], &axes[3..4], &axes[5..6]].concat()
            }
            3 => axes.to_string(),
            _ => return Err(Error::Parse(format!("axis assignment '{axes}' not understood"))),
        };
        let mut dirs = [Direction::X; 3];
        for (slot, c) in dirs.iter_mut().zip(letters.chars()) {
            *slot = c.to_string().parse()?;
        }
        Self::with_axes(kind, dirs)
    }
}

/// Repetitions `K` and, for the random-pair schemes, the pair count `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    pub k: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l: Option<u64>,
}

impl Budget {
    pub fn repetitions(k: u64) -> Self {
        Self { k, l: None }
    }

    pub fn random(l: u64, k: u64) -> Self {
        Self { k, l: Some(l) }
    }

    /// Checks the minimal sizes each scheme's estimators need: `K >= 2` for
    /// the sample variance and the pair cross term, even `K` for split
    /// patterns and `L >= 2` for random patterns.
    pub fn validate(&self, scheme: Scheme) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidBudget(msg));
        match (scheme, self.l) {
            (Scheme::Rp1 | Scheme::Rp2, None) => return bad(format!("{scheme} needs L")),
            (Scheme::Rp1 | Scheme::Rp2, Some(l)) if l < 2 => return bad(format!("{scheme} needs L >= 2, got {l}")),
            (Scheme::Ts | Scheme::Ap1 | Scheme::Ap2, Some(_)) => return bad(format!("{scheme} takes no L")),
            _ => {}
        }
        match scheme {
            Scheme::Ts | Scheme::Ap1 if self.k < 2 => bad(format!("{scheme} needs K >= 2")),
            Scheme::Ap2 | Scheme::Rp2 if self.k < 2 || self.k % 2 != 0 => {
                bad(format!("{scheme} needs an even K >= 2, got {}", self.k))
            }
            Scheme::Rp1 if self.k < 1 => bad("RP1 needs K >= 1".into()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.l {
            Some(l) => write!(f, "L={l},K={}", self.k),
            None => write!(f, "K={}", self.k),
        }
    }
}

/// Total state preparations consumed by one estimate.
///
/// The `xi_c` costs are `3K` (TS), `3N(N-1)K` (AP1), `(4N-3)NK` (AP2),
/// `3LK` (RP1) and `4LK` (RP2). For the other parameters the split
/// patterns are needed only on the axes whose variance enters: AP2 adds
/// `N^2 K` and RP2 adds `LK` per such axis.
pub fn sample_cost(scheme: Scheme, parameter: &Parameter, n_qubits: usize, budget: Budget) -> u64 {
    let n = n_qubits as u64;
    let k = budget.k;
    let l = budget.l.unwrap_or(0);
    let splits = parameter.variance_axes();
    match scheme {
        Scheme::Ts => 3 * k,
        Scheme::Ap1 => 3 * n * (n - 1) * k,
        Scheme::Ap2 => 3 * n * (n - 1) * k + splits * n * n * k,
        Scheme::Rp1 => 3 * l * k,
        Scheme::Rp2 => 3 * l * k + splits * l * k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_formulas() {
        let c = Parameter::new(ParameterKind::C);
        assert_eq!(sample_cost(Scheme::Ts, &c, 10, Budget::repetitions(7400)), 22200);
        assert_eq!(sample_cost(Scheme::Ap1, &c, 10, Budget::repetitions(82)), 22140);
        assert_eq!(sample_cost(Scheme::Ap2, &c, 10, Budget::repetitions(60)), 22200);
        assert_eq!(sample_cost(Scheme::Rp1, &c, 10, Budget::random(7400, 1)), 22200);
        assert_eq!(sample_cost(Scheme::Rp2, &c, 10, Budget::random(2775, 2)), 22200);
        let b = Parameter::new(ParameterKind::B);
        let d = Parameter::new(ParameterKind::D);
        assert_eq!(
            sample_cost(Scheme::Ap2, &b, 10, Budget::repetitions(2)),
            3 * 90 * 2 + 3 * 100 * 2
        );
        assert_eq!(
            sample_cost(Scheme::Ap2, &d, 10, Budget::repetitions(2)),
            3 * 90 * 2 + 2 * 100 * 2
        );
    }

    #[test]
    fn ts_cost_ignores_parameter() {
        for kind in [ParameterKind::A, ParameterKind::B, ParameterKind::C, ParameterKind::D] {
            assert_eq!(
                sample_cost(Scheme::Ts, &Parameter::new(kind), 6, Budget::repetitions(9)),
                27
            );
        }
    }

    #[test]
    fn pair_costs_strictly_increase() {
        let c = Parameter::new(ParameterKind::C);
        for scheme in [Scheme::Ap1, Scheme::Ap2] {
            for n in 2..12 {
                for k in [2u64, 4, 6] {
                    let base = sample_cost(scheme, &c, n, Budget::repetitions(k));
                    assert!(sample_cost(scheme, &c, n + 1, Budget::repetitions(k)) > base);
                    assert!(sample_cost(scheme, &c, n, Budget::repetitions(k + 2)) > base);
                }
            }
        }
        for scheme in [Scheme::Rp1, Scheme::Rp2] {
            let base = sample_cost(scheme, &c, 5, Budget::random(10, 2));
            assert!(sample_cost(scheme, &c, 5, Budget::random(11, 2)) > base);
            assert!(sample_cost(scheme, &c, 5, Budget::random(10, 4)) > base);
        }
    }

    #[test]
    fn parameter_grammar() {
        let p: Parameter = "c".parse().unwrap();
        assert_eq!(p, Parameter::new(ParameterKind::C));
        let p: Parameter = "d:kzlxmy".parse().unwrap();
        assert_eq!(p.axes, [Direction::Z, Direction::X, Direction::Y]);
        assert_eq!(p.to_string(), "d:kzlxmy");
        assert_eq!("b:yzx".parse::<Parameter>().unwrap().axes[0], Direction::Y);
        assert!("c:kxlxmz".parse::<Parameter>().is_err());
        assert!("e".parse::<Parameter>().is_err());
    }

    #[test]
    fn budget_validation() {
        assert!(Budget::repetitions(1).validate(Scheme::Ts).is_err());
        assert!(Budget::repetitions(2).validate(Scheme::Ap1).is_ok());
        assert!(Budget::repetitions(3).validate(Scheme::Ap2).is_err());
        assert!(Budget::repetitions(4).validate(Scheme::Rp1).is_err());
        assert!(Budget::random(1, 1).validate(Scheme::Rp1).is_err());
        assert!(Budget::random(2, 1).validate(Scheme::Rp1).is_ok());
        assert!(Budget::random(2, 1).validate(Scheme::Rp2).is_err());
        assert!(Budget::random(2, 2).validate(Scheme::Ts).is_err());
    }

    #[test]
    fn parameter_values_for_benchmarks() {
        let dicke = crate::StateModel::dicke(10, 5).unwrap().moment_table().unwrap();
        assert_eq!(Parameter::new(ParameterKind::A).value(&dicke), 30.0);
        assert_eq!(Parameter::new(ParameterKind::C).value(&dicke), 30.0);
        let singlet = crate::StateModel::singlet(8).unwrap().moment_table().unwrap();
        assert_eq!(Parameter::new(ParameterKind::B).value(&singlet), 0.0);
        assert_eq!(Parameter::new(ParameterKind::D).value(&singlet), 0.0);
    }
}
