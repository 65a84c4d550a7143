use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column `{0}` has zero variance and cannot be standardized")]
    ZeroVarianceColumn(String),

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("stratum (group `{group}`, outcome {outcome}) has no rows")]
    EmptyStratum { group: String, outcome: u8 },

    #[error("cannot build {k} folds from {n} rows")]
    TooFewRows { n: usize, k: usize },

    #[error("no feature has a finite, positive penalty factor")]
    NoPenalizedFeatures,

    #[error("solver diverged: {0}")]
    Diverged(String),

    #[error("outcome must be binary (0/1)")]
    NonBinaryOutcome,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no feature is flagged as an interaction candidate")]
    NoCandidates,

    #[error("group `{0}` lacks one of the two outcome classes")]
    DegenerateGroup(String),

    #[error("training part of fold {0} lacks one of the two outcome classes")]
    DegenerateFold(usize),

    #[error("labels contain a single class")]
    SingleClass,

    #[error("no baseline run for data `{data}`, outcome `{outcome}`")]
    MissingBaseline { data: String, outcome: String },

    #[error("unpaired evaluation: {0}")]
    Unpaired(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
