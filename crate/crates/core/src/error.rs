//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong in the exact-arithmetic layers.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("element is not a unit")]
    NotUnit,
    #[error("residue is not a square in the residue field")]
    NonResidue,
    #[error("working precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("operands belong to different rings")]
    RingMismatch,
    #[error("ℓ must differ from p")]
    BadPrime,
    #[error("measure is not supported on Z_p^× (deplete first)")]
    NotDepleted,
    #[error("invariants undecidable at this precision: {0}")]
    Undecidable(String),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("form is not primitive")]
    NotPrimitive,
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error("forms have different discriminants")]
    DiscriminantMismatch,
    #[error("invalid discriminant {0}")]
    BadDiscriminant(i64),
    #[error("prime {0} does not split at discriminant {1}")]
    NotSplit(u64, i64),
    #[error("p-Sylow subgroup is not cyclic")]
    SylowNotCyclic,
    #[error("p divides the class number h_K")]
    ClassNumberDivisible,
    #[error("no permutation recorded for ℓ = {0}")]
    MissingPermutation(u64),
    #[error("model components disagree: {0}")]
    ModelMismatch(String),
    #[error("input families are not congruent at the requested modulus")]
    NotCongruentInputs,
    #[error("character table incomplete: {0}")]
    IncompleteCharacterTable(String),
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("invalid ring descriptor: {0}")]
    BadRing(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::SchemaError(e.to_string())
    }
}
