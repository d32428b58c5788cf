use num_rational::Rational64 as Q;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("element is not a unit")]
    NonUnit,
    /// The computation needs the working field enlarged by the given
    /// ramification and residue-degree multipliers.
    #[error("field extension required (e x{e_mult}, f x{f_mult})")]
    ExtensionRequired { e_mult: u32, f_mult: u32 },
    #[error("extension cap exceeded: e={e}, f={f}, cap on e*f is {cap}")]
    ExtensionCapExceeded { e: u32, f: u32, cap: u32 },
    #[error("not a p-th power")]
    NotAPthPower,
    #[error("tail certificate does not bound the series at r = {0}")]
    TailUnbounded(Q),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("unsupported target slope m = {0}")]
    UnsupportedSlope(i64),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("connectedness of the preimage not established at r = {0}")]
    ConnectednessNotEstablished(Q),
    #[error("grid too coarse between r = {0} and r = {1}")]
    GridTooCoarse(Q, Q),
    #[error("profile domains do not match")]
    DomainMismatch,
    #[error("series mismatch: {0}")]
    SeriesMismatch(String),
    #[error("level {0} of the tower is not a disk")]
    NotADiskBelow(usize),
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),
    #[error("witness ({member}, r = {r}) fails its disk check")]
    WitnessInvalid { member: String, r: Q },
    #[error("lambda({member}) = {lambda} is not below witness radius {r}")]
    TheoremViolated { member: String, r: Q, lambda: Q },
    #[error("residual pure inseparability unverified at r = {0}")]
    InseparabilityUnverified(Q),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn inconsistency(msg: impl Into<String>) -> Self {
        Error::InternalInconsistency(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
