use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two policies never succeed in the same scenario, so their pairwise
    /// diversity is undefined.
    #[error("policies `{0}` and `{1}` share no successful scenario")]
    NoSharedScenario(String, String),

    /// A scenario in which no policy of the evaluated set reached the goal;
    /// the overall-diversity term for it is undefined.
    #[error("scenario `{0}` has no successful policy in the evaluated set")]
    EmptySuccessSet(String),

    #[error("no candidate policies remain after filtering")]
    NoCandidates,

    #[error("reference generation accepted no trace in {attempts} attempts")]
    InfeasibleReference { attempts: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error("training loss became non-finite in session {session} at step {step}")]
    NonFiniteLoss { session: u32, step: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
