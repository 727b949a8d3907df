use std::path::PathBuf;

/// Errors produced by the core library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two objects that must agree on the number of qubits (or matrix size) do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// A qubit index outside `0..n_qubits`, or a repeated index in a gate.
    #[error("invalid qubit index {index} for a {n_qubits}-qubit register")]
    QubitIndex { index: usize, n_qubits: usize },

    /// A problem size exceeds the configured cap.
    #[error("{what}: {size} exceeds the limit of {limit}")]
    Size {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    /// A gate matrix that is not unitary within tolerance.
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    /// Rotation axis equal to the identity monomial.
    #[error("rotation axis must contain at least one non-identity letter")]
    InvalidAxis,

    /// A product of Hermitian monomials produced an imaginary coefficient.
    #[error("non-real phase while combining Pauli monomials")]
    NonRealPhase,

    /// Estimation over an empty snapshot set.
    #[error("snapshot set is empty")]
    EmptySet,

    /// An observable without any non-identity term where one is required.
    #[error("observable has no non-identity terms to sample")]
    EmptySupport,

    /// Symbolic propagation produced more terms than allowed.
    #[error("term budget exceeded: {count} terms, cap is {cap}")]
    TermBudget { count: usize, cap: usize },

    /// Malformed text input.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn ensure_same(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
