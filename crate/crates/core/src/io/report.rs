use std::collections::BTreeMap;

use serde::Serialize;

use super::{to_canonical_string, FORMAT_VERSION};
use crate::error::ExplainError;
use crate::explain::{explain, Explanation};
use crate::interval::{Interval, IntervalSet, TimePoint};
use crate::model::{Plan, PlanConfig};
use crate::scheduler::{
    loads_of, power_profile, simulate_soc, GeneratedKind, Phase2Reason, PlacedActivity, Schedule, StepOutcome,
    ValidIntervals,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratedEntry {
    pub id: String,
    pub kind: GeneratedKind,
    pub interval: Interval,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instrument: Option<String>,
    pub power: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlacedEntry {
    pub id: String,
    pub step: usize,
    pub start: TimePoint,
    pub end: TimePoint,
    pub generated: Vec<GeneratedEntry>,
}

impl From<&PlacedActivity> for PlacedEntry {
    fn from(p: &PlacedActivity) -> Self {
        Self {
            id: p.activity.id.clone(),
            step: p.step,
            start: p.start,
            end: p.end,
            generated: p
                .generated
                .iter()
                .map(|g| GeneratedEntry {
                    id: g.id(),
                    kind: g.kind,
                    interval: g.interval,
                    instrument: g.instrument.clone(),
                    power: g.power,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepSummary {
    pub step: usize,
    pub activity: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<TimePoint>,
    pub phase2_reasons: Vec<Phase2Reason>,
}

fn step_summaries(schedule: &Schedule) -> Vec<StepSummary> {
    schedule
        .steps()
        .iter()
        .map(|s| StepSummary {
            step: s.step,
            activity: s.activity.clone(),
            outcome: s.outcome.tag().to_string(),
            start: match s.outcome {
                StepOutcome::Scheduled { start } => Some(start),
                _ => None,
            },
            phase2_reasons: s.phase2_reasons(),
        })
        .collect()
}

/// Headline numbers of the energy and power profiles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileDigest {
    pub soc_min: f64,
    pub soc_min_at: TimePoint,
    pub soc_max: f64,
    pub soc_final: f64,
    pub clipped_wh: f64,
    pub peak_power_max: f64,
    pub awake_seconds: i64,
}

impl ProfileDigest {
    pub fn of(schedule: &Schedule, cfg: &PlanConfig) -> Self {
        let soc = simulate_soc(schedule, cfg);
        let (soc_min_at, soc_min) = soc.min();
        Self {
            soc_min,
            soc_min_at,
            soc_max: soc.max(),
            soc_final: soc.final_soc(),
            clipped_wh: soc.clipped_total(),
            peak_power_max: power_profile(cfg, &loads_of(schedule)).max(),
            awake_seconds: schedule.awake_blocks().measure(),
        }
    }
}

/// Everything the scheduler decided, as written to `.sched.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleDocument {
    pub format_version: u32,
    pub plan_bounds: Interval,
    pub complete: bool,
    pub placed: Vec<PlacedEntry>,
    pub awake: IntervalSet,
    pub steps: Vec<StepSummary>,
    pub failed: Vec<String>,
    pub valid: BTreeMap<String, ValidIntervals>,
    /// `(time, Wh)` at every breakpoint of the state-of-charge profile.
    pub soc: Vec<(TimePoint, f64)>,
    /// `(time, W)` at every change of total peak power.
    pub power: Vec<(TimePoint, f64)>,
    pub digest: ProfileDigest,
}

pub fn schedule_document(schedule: &Schedule, cfg: &PlanConfig) -> ScheduleDocument {
    ScheduleDocument {
        format_version: FORMAT_VERSION,
        plan_bounds: schedule.plan_bounds(),
        complete: schedule.is_complete(),
        placed: schedule.placed().iter().map(PlacedEntry::from).collect(),
        awake: schedule.awake_blocks().clone(),
        steps: step_summaries(schedule),
        failed: schedule.failed().map(|s| s.activity.clone()).collect(),
        valid: schedule
            .valid_intervals()
            .into_iter()
            .map(|(id, v)| (id.to_string(), v.clone()))
            .collect(),
        soc: simulate_soc(schedule, cfg).breakpoints(),
        power: power_profile(cfg, &loads_of(schedule)).steps,
        digest: ProfileDigest::of(schedule, cfg),
    }
}

pub fn serialize_schedule(schedule: &Schedule, cfg: &PlanConfig) -> String {
    to_canonical_string(&schedule_document(schedule, cfg))
}

/// Explanations for failed activities, as written to `.explain.json`.
#[derive(Clone, Debug, Serialize)]
pub struct ExplanationReport {
    pub format_version: u32,
    pub explanations: BTreeMap<String, Explanation>,
    pub steps: Vec<StepSummary>,
    pub profiles: ProfileDigest,
}

/// Explains every failed activity of `schedule`, or only `only` when given.
pub fn build_report(plan: &Plan, schedule: &Schedule, only: Option<&str>) -> Result<ExplanationReport, ExplainError> {
    let mut explanations = BTreeMap::new();
    for rec in schedule.failed() {
        if only.is_some_and(|id| id != rec.activity) {
            continue;
        }
        explanations.insert(rec.activity.clone(), explain(plan, &rec.activity)?);
    }
    if let Some(id) = only {
        if !explanations.contains_key(id) {
            return Err(match plan.get(id) {
                None => ExplainError::UnknownActivity(id.to_string()),
                Some(_) => ExplainError::NotFailed(id.to_string()),
            });
        }
    }
    Ok(ExplanationReport {
        format_version: FORMAT_VERSION,
        explanations,
        steps: step_summaries(schedule),
        profiles: ProfileDigest::of(schedule, plan.config()),
    })
}

pub fn serialize_explanation(report: &ExplanationReport) -> String {
    to_canonical_string(report)
}
