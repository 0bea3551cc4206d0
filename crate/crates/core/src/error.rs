use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("interval [{start}, {end}) is empty")]
    Empty { start: i64, end: i64 },
}

/// One validation problem, located by a JSON path such as
/// `$.activities[2].dependencies[0]`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl Issue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// A plan or config that failed to parse or validate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct PlanError {
    pub issues: Vec<Issue>,
}

impl PlanError {
    pub fn single(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            issues: vec![Issue::new(path, message)],
        }
    }
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid plan")?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExplainError {
    #[error("unknown activity `{0}`")]
    UnknownActivity(String),
    #[error("`{0}` is not a failed activity")]
    NotFailed(String),
    #[error("not a phase-1 failure: the final valid intervals are non-empty")]
    NotPhase1Failure,
    #[error(transparent)]
    Plan(#[from] PlanError),
}
