use thiserror::Error;

/// Coarse classification used to map failures onto process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed types, non-units, unsupported instances.
    Validation,
    /// Requested work exceeds the configured budget.
    Budget,
    /// A proven invariant failed to hold. Always a bug or a finding.
    Invariant,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("{a} is divisible by the modulus {m}")]
    ZeroResidue { a: i128, m: u64 },
    #[error("{c} is not a unit modulo {m}")]
    NotAUnit { c: u64, m: u64 },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("exponent a_{index} = {value} is not strictly between 0 and {m}")]
    BadEntry { index: usize, value: u64, m: u64 },
    #[error("exponent sum {sum} is not divisible by {m}")]
    BadSum { sum: u64, m: u64 },
    #[error("gcd of m and all exponents is {gcd}: the cover is disconnected")]
    Disconnected { gcd: u64 },
    #[error("a cover type needs at least 2 branch points, got {0}")]
    TooFewPoints(usize),
    #[error("class modulus {class_m} does not match type modulus {type_m}")]
    ClassMismatch { type_m: u64, class_m: u64 },
    #[error("bad subset: {0}")]
    BadSubset(String),
    #[error("f = {0} is not an odd prime")]
    BadExponent(u64),
    #[error("order {order} of {alpha} mod {m} does not divide {half}")]
    BadOrder {
        m: u64,
        alpha: u64,
        order: u64,
        half: u64,
    },
    #[error("bad class: {0}")]
    BadClass(String),
    #[error("bad instance: {0}")]
    BadInstance(String),
    #[error("ramification index not maximal at a branch point (gcd(a_i, m) > 1); use the cartier strategy")]
    UnsupportedRamification,
    #[error("work estimate {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("search domain estimate {needed} exceeds budget {budget}")]
    DomainTooLarge { needed: u128, budget: u64 },
    #[error("cartier strategy disabled: {0}")]
    NotValidated(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::BudgetExceeded { .. } | Error::DomainTooLarge { .. } => ErrorKind::Budget,
            Error::Invariant(_) => ErrorKind::Invariant,
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure_invariant {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Invariant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure_invariant;
