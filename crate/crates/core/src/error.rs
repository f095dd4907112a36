use std::path::PathBuf;

/// Errors produced by the classification engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("p must be prime (got {0})")]
    NotPrime(u64),
    #[error("residue {value} is out of range for F_{p}")]
    ResidueOutOfRange { value: u64, p: u32 },
    #[error("0 has no multiplicative inverse")]
    ZeroInverse,
    #[error("matrix is singular over F_{0}")]
    SingularMatrix(u32),
    #[error("unsupported tensor order {0}")]
    UnsupportedOrder(usize),
    #[error("p^(2^k) does not fit in 64 bits for p={p}, k={order}")]
    CodeOverflow { p: u32, order: usize },
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("tensor is not symmetric")]
    Asymmetric,
    #[error("the zero vector does not give a rank-1 tensor")]
    ZeroVector,
    #[error("mode {mode} is out of range for an order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },
    #[error("slices are only defined for order-3 tensors")]
    SlicesNeedOrder3,
    #[error("code {code} is out of range (must be < {limit})")]
    CodeOutOfRange { code: u64, limit: u64 },
    #[error("cannot parse {what}: {msg}")]
    Parse { what: &'static str, msg: String },
    #[error("budget exceeded: {needed} codes needed, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("stratification is for F_{expected_p} order {expected_k}, tensor is F_{p} order {k}")]
    FieldMismatch {
        expected_p: u32,
        expected_k: usize,
        p: u32,
        k: usize,
    },
    #[error("no symmetric decomposition exists over F_{0}")]
    Undecomposable(u32),
    #[error("this stratification does not record decomposition witnesses")]
    NoWitnesses,
    #[error("no fixture for p={p}, k={k}")]
    MissingFixture { p: u32, k: usize },
    #[error("malformed fixture {name} line {line}: {msg}")]
    MalformedFixture { name: String, line: usize, msg: String },
    #[error("unknown output format {0:?}")]
    UnknownFormat(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
