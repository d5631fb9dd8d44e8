use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("denominator {den} is divisible by the characteristic {p}")]
    DenominatorNotCoprime { den: String, p: u32 },

    #[error("denominator must be positive")]
    ZeroDenominator,

    #[error("{p} is not a prime")]
    NotPrime { p: u32 },

    #[error("{p} and {m} are not coprime")]
    NotCoprime { p: String, m: String },

    #[error("duplicate character {0} in character set")]
    DuplicateCharacter(String),

    #[error("product set is not duplicate-free: {0} arises twice")]
    ProductCollision(String),

    #[error("upstairs and downstairs characters overlap at {0}")]
    Overlap(String),

    #[error("hypergeometric datum needs D > M, got D = {d}, M = {m}")]
    RankOrder { d: u128, m: u128 },

    #[error("invalid product profile: {0}")]
    InvalidProfile(String),

    #[error("invalid torus element: {0}")]
    InvalidTorus(String),

    #[error("spec is not classified by any m2sp case")]
    Unclassified,

    #[error(
        "sweep needs {required} points but the budget is {budget} (completed bound m = {completed_bound})"
    )]
    BudgetExceeded {
        required: u128,
        budget: u64,
        completed_bound: u32,
        /// Human-readable note about work done before the budget was hit.
        partial: String,
    },

    #[error("witness at {0} does not violate the inequality on re-evaluation")]
    WitnessMismatch(String),

    #[error("unknown lemma suite `{0}`")]
    UnknownSuite(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
