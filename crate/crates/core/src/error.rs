use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid fire zone: {0}")]
    InvalidZone(String),

    #[error("grid resolution {0} is below the minimum of 16 cells per axis")]
    GridTooCoarse(usize),

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid requirement: {0}")]
    InvalidRequirement(String),

    #[error("empty task list")]
    NoTasks,

    #[error("coalition has no members")]
    EmptyCoalition,

    #[error("length mismatch: {members} members for {anchors} anchors")]
    SectorMismatch { members: usize, anchors: usize },

    #[error("exhaustive search too large: {0}")]
    SearchTooLarge(String),

    #[error("uav {0} is not a member of the coalition")]
    NotAMember(u32),

    #[error("coalition of leader {0} has no living members and is dissolved")]
    CoalitionDissolved(u32),

    #[error("leader-to-leader message from {from} to {to}")]
    LeaderToLeader { from: u32, to: u32 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("run with seed {seed} failed: {source}")]
    RunFailed { seed: u64, source: Box<Error> },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
