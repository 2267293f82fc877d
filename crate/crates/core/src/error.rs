use crate::states::Direction;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("moment order {0} is out of range (supported: 1..=4)")]
    OrderOutOfRange(u32),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("pair ({0}, {1}) is not a pair of distinct qubits")]
    InvalidPair(usize, usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dense backend supports at most {max} qubits, got {n_qubits}")]
    TooManyQubits { n_qubits: usize, max: usize },

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("{pattern} data has no block for direction {direction}")]
    MissingBlock {
        pattern: &'static str,
        direction: Direction,
    },

    #[error("dataset {0} backs two estimator blocks that must be independent")]
    SharedDataset(String),

    #[error("dataset mismatch: {0}")]
    DatasetMismatch(String),

    #[error("no analytic variance for this case: {0}")]
    UnsupportedAnalytic(String),

    #[error("no closed form for this case: {0}")]
    UnsupportedClosedForm(String),

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}
