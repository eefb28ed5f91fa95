use thiserror::Error;

/// Failures raised by the simulator and the observables built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("population budget of {max_particles} exceeded at t={time}")]
    PopulationBudgetExceeded { time: f64, max_particles: usize },

    #[error("pruning is forbidden while lead tracking is active")]
    PruningForbidden,

    #[error("population was truncated by the particle budget")]
    TruncatedPopulation,

    #[error("cannot advance backwards from t={now} to t={target}")]
    TimeReversal { now: f64, target: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Domain violations of the closed-form formulas.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in {function}: {reason}")]
pub struct DomainError {
    pub function: &'static str,
    pub reason: String,
}

impl DomainError {
    pub(crate) fn new(function: &'static str, reason: impl Into<String>) -> Self {
        Self {
            function,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("population budget exceeded in {0} replicate(s)")]
    BudgetExceeded(usize),

    #[error("degenerate regression design: {0}")]
    DegenerateDesign(String),

    #[error("invalid estimator input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Failures of the batch runner. Each maps to a process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("malformed input {path}: {reason}")]
    Input { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Invalid(_) => 3,
            _ => 1,
        }
    }
}

impl From<SimError> for HarnessError {
    fn from(e: SimError) -> Self {
        HarnessError::Invalid(e.to_string())
    }
}
