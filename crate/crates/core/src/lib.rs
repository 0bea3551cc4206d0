//! Priority-first activity scheduler for rover operations, with an explainer
//! that localizes and diagnoses every activity that fails to schedule.

pub mod error;
pub mod explain;
pub mod interval;
pub mod io;
pub mod model;
pub mod scheduler;
pub mod synth;

pub use explain::{explain, Explanation, FailurePhase};
pub use io::{parse_plan, serialize_plan, Strictness};
pub use error::{ExplainError, Issue, PlanError};
pub use interval::{Duration, Interval, IntervalSet, TimePoint};
pub use model::{Activity, ConstraintKind, Plan, PlanConfig, UhfInteraction, UhfMode, Window};
pub use scheduler::{run_scheduler, Phase2Reason, Schedule, StepOutcome, StepRecord};
