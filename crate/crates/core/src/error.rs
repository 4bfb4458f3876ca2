use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: field `{field}`: {message}")]
    Field { line: usize, field: String, message: String },

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("line {line}: duplicate review_id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("review `{review_id}` has no helpfulness votes")]
    NoVotes { review_id: String },

    #[error("review `{review_id}` has {total} votes, below the analysis floor of {floor}")]
    BelowVoteFloor { review_id: String, total: u64, floor: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("density plateau near x = {x}: adjacent grid values equal over {cells} cells")]
    Plateau { x: f64, cells: usize },

    #[error("no regime change for alpha in [0, {alpha_max}]; retry with a larger alpha_max")]
    NoRegimeChange { alpha_max: f64 },

    #[error("regime is not monotone in alpha on [0, {alpha_max}]")]
    NonMonotoneRegime { alpha_max: f64 },

    #[error("odds ratio undefined: every stratum has a*d = 0 and b*c = 0")]
    UndefinedOddsRatio,

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}
