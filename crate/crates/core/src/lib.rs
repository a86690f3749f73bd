//! Schedulability analysis of non-preemptive periodic tasks on one
//! processor with schedule-abstraction graphs.

pub mod error;
pub mod format;
pub mod gen;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod sag;

pub use error::{AnalysisError, GenError, ModelError, OracleError};
pub use model::{ExecutionScenario, Job, JobId, ProblemInstance, Task, Time};
pub use policy::PolicyKind;
pub use sag::{generate, AnalysisOptions, AnalysisResult, Mode, ScheduleGraph};
