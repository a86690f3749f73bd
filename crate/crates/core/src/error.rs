use thiserror::Error;

use crate::model::Time;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("empty instance")]
    EmptyInstance,
    #[error("observation interval must be at least 1")]
    InvalidHorizon,
    #[error("task {id}: {reason}")]
    InvalidTask { id: u32, reason: String },
    #[error("duplicate task id {0}")]
    DuplicateTaskId(u32),
    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    /// No job can be dispatched from this vertex under the chosen
    /// eligibility rules.
    #[error("analysis stuck at vertex v{vertex} (interval [{eft}, {lft}]): no job can be dispatched next")]
    Stuck { vertex: u32, eft: Time, lft: Time },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("scenario space has {count} scenarios, above the cap of {cap}")]
    TooManyScenarios { count: u128, cap: u128 },
    /// The policy idles and no further release can wake the scheduler.
    #[error("scheduler idles forever at time {time} with {pending} unfinished jobs")]
    Stuck { time: Time, pending: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("no feasible task set found after {attempts} attempts")]
    Infeasible { attempts: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}
