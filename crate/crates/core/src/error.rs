use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("machine index {index} out of range for {machines} machines")]
    MachineOutOfRange { index: usize, machines: usize },

    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),

    #[error("job {job} has no eligible machine")]
    NoEligibleMachine { job: usize },

    #[error("job order is not a permutation of the {jobs} jobs")]
    NotAPermutation { jobs: usize },

    #[error("{what}: size {size} exceeds limit {limit}")]
    LimitExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("assignment space of {size} schedules exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: u64 },

    #[error("instance has no feasible assignment")]
    NoFeasibleAssignment,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("construction needs {jobs} jobs, above the configured cap of {cap}")]
    TooLarge { jobs: u128, cap: usize },

    #[error("machine {machine} has load below {t} times the optimum")]
    InsufficientLoad { machine: usize, t: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
