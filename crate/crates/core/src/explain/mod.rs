//! Why an activity failed to schedule.
//!
//! An explanation finds the earliest scheduling step at which the activity
//! can no longer be placed, then reports either the smallest sets of
//! constraint kinds whose valid intervals cannot intersect (phase 1) or the
//! reasons every candidate start time was rejected (phase 2).

mod attribution;
mod conflict;
mod failure_step;
mod notes;
mod subsets;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::ExplainError;
use crate::interval::IntervalSet;
use crate::model::{Activity, ConstraintKind, Plan, PlanConfig};
use crate::scheduler::{final_valid_intervals, phase2_sweep, CandidateTrace, Phase2Reason, Schedule, StepOutcome};

pub use attribution::{energy_consumers, peak_power_users, ConsumerKind, EnergyConsumer, PowerUser};
pub use conflict::{conflict_details, ConflictEntity};
pub use failure_step::{find_failure_step, gate_constraints, probe, FailureStepResult, GatedConstraints, Probe};
pub use subsets::{find_failing_subsets, FailingSubsets};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePhase {
    Phase1,
    Phase2,
}

impl FailurePhase {
    pub fn tag(self) -> &'static str {
        match self {
            FailurePhase::Phase1 => "phase1",
            FailurePhase::Phase2 => "phase2",
        }
    }
}

/// Rejections of every phase-2 candidate, plus the distinct reasons.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Phase2Summary {
    pub reasons: Vec<Phase2Reason>,
    pub trace: Vec<CandidateTrace>,
}

/// Re-runs the phase-2 sweep for `act` against `partial`. Returns `None`
/// when phase 1 already fails or some candidate succeeds.
pub fn collect_phase2_reasons(act: &Activity, partial: &Schedule, cfg: &PlanConfig) -> Option<Phase2Summary> {
    let valid = final_valid_intervals(act, partial, cfg);
    if valid.final_windows.is_empty() {
        return None;
    }
    let trace = phase2_sweep(act, &valid.final_windows, partial, cfg).err()?;
    let mut reasons: Vec<Phase2Reason> = trace.iter().flat_map(|c| c.reasons.iter().map(|r| r.reason)).collect();
    reasons.sort();
    reasons.dedup();
    Some(Phase2Summary { reasons, trace })
}

#[derive(Clone, Debug, Serialize)]
pub struct Explanation {
    pub activity: String,
    pub phase: FailurePhase,
    pub failure_step: usize,
    /// Activity attempted at the failure step.
    pub step_activity: String,
    pub gated: GatedConstraints,
    /// Valid start windows per constraint kind the activity carries, against
    /// the partial schedule at the failure step.
    pub valid: BTreeMap<ConstraintKind, IntervalSet>,
    #[serde(rename = "final")]
    pub final_windows: IntervalSet,
    pub failing_subsets: FailingSubsets,
    pub conflicts: Vec<ConflictEntity>,
    pub phase2: Option<Phase2Summary>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub partial: Schedule,
    #[serde(skip)]
    pub probes: usize,
}

/// Explains one failed activity of `plan`.
pub fn explain(plan: &Plan, failed_id: &str) -> Result<Explanation, ExplainError> {
    let cfg = plan.config();
    let found = find_failure_step(plan, failed_id)?;
    let act = found.gated.apply(plan.get(failed_id).expect("checked by search"));
    let valid = found.record.valid.constrained(&act);
    let final_windows = found.record.valid.final_windows.clone();

    let (phase, failing_subsets, conflicts, phase2) = match &found.record.outcome {
        StepOutcome::FailedPhase1 => {
            let subsets = find_failing_subsets(&valid, act.duration, cfg.plan_bounds)?;
            let conflicts = conflict_details(&act, &subsets, &found.partial, cfg);
            (FailurePhase::Phase1, subsets, conflicts, None)
        }
        StepOutcome::FailedPhase2 { .. } => {
            let summary = collect_phase2_reasons(&act, &found.partial, cfg)
                .expect("phase-2 failure reproduces on the same partial schedule");
            (FailurePhase::Phase2, Vec::new(), Vec::new(), Some(summary))
        }
        StepOutcome::Scheduled { .. } => unreachable!("search returns a failing probe"),
    };

    let mut explanation = Explanation {
        activity: failed_id.to_string(),
        phase,
        failure_step: found.step,
        step_activity: found.step_activity,
        gated: found.gated,
        valid,
        final_windows,
        failing_subsets,
        conflicts,
        phase2,
        notes: Vec::new(),
        partial: found.partial,
        probes: found.probes,
    };
    explanation.notes = notes::notes(&explanation, &act);
    Ok(explanation)
}

/// Explanations for every failed activity of a completed run, keyed by id.
pub fn explain_all(plan: &Plan, schedule: &Schedule) -> Result<BTreeMap<String, Explanation>, ExplainError> {
    schedule
        .failed()
        .map(|rec| explain(plan, &rec.activity).map(|e| (rec.activity.clone(), e)))
        .collect()
}
