use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient horizon: set `{set}` only queryable up to {horizon}, need {needed}")]
    InsufficientHorizon {
        set: String,
        horizon: u64,
        needed: u64,
    },
    #[error("horizon {0} too small, need at least {1}")]
    HorizonTooSmall(u64, u64),
    #[error("universe too large: bound {0} exceeds {1}")]
    UniverseTooLarge(u32, u32),
    #[error("requires hereditary family; witness: {member:?} contains {subset:?} which is missing")]
    NotHereditary { member: Vec<u32>, subset: Vec<u32> },
    #[error("empty weight product range: n={0} > k={1}")]
    EmptyProductRange(u64, u64),
    #[error("vector not materializable at index {0} (horizon {1})")]
    VectorHorizon(u64, u64),
    #[error("missing finite-norm certificate")]
    MissingNormCertificate,
    #[error("exact arithmetic unavailable for this weight rule")]
    NotExact,
    #[error("no FHC certificate: Bayart-Ruzsa criterion reported {0}")]
    NoFhcCertificate(String),
    #[error("horizon exhausted at stage {stage}: {reason}")]
    HorizonExhausted { stage: u64, reason: String },
    #[error("weight below one at n={0}: tm construction requires w_n >= 1")]
    WeightBelowOne(u64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("literal plan exceeds big-integer budget: i_max {0} > {1}")]
    PlanBudget(usize, usize),
    #[error("schedule overlap between blocks {0} and {1}")]
    ScheduleOverlap(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
