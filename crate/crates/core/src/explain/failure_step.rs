//! Earliest failure step by binary search over priority prefixes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::ExplainError;
use crate::model::{Activity, Plan, UhfInteraction, UhfMode};
use crate::scheduler::{run_scheduler, Schedule, StepRecord};

/// The constraints of a failed activity that other activities must satisfy,
/// as kept for one probe plan.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GatedConstraints {
    pub dependencies: BTreeSet<String>,
    pub state_requirements: BTreeMap<String, String>,
    pub uhf_interactions: Vec<UhfInteraction>,
}

impl GatedConstraints {
    /// Copy of `act` carrying only the kept constraints.
    pub fn apply(&self, act: &Activity) -> Activity {
        let mut gated = act.clone();
        gated.dependencies = self.dependencies.clone();
        gated.state_requirements = self.state_requirements.clone();
        gated.uhf_interactions = self.uhf_interactions.clone();
        gated
    }
}

/// Keeps a dependency only when its parent is included, a state requirement
/// only when every higher-priority activity whose effect could satisfy it is
/// included, and a required UHF concurrency only when every higher-priority
/// pass of that type is included. Forbidden concurrencies are always kept.
pub fn gate_constraints(act: &Activity, included: &BTreeSet<String>, plan: &Plan) -> GatedConstraints {
    let earlier_all_included = |pred: &dyn Fn(&Activity) -> bool| {
        plan.activities()
            .iter()
            .filter(|a| a.priority < act.priority && pred(a))
            .all(|a| included.contains(&a.id))
    };
    let dependencies = act
        .dependencies
        .iter()
        .filter(|d| included.contains(*d))
        .cloned()
        .collect();
    let state_requirements = act
        .state_requirements
        .iter()
        .filter(|(var, want)| earlier_all_included(&|a| a.state_effects.get(*var) == Some(*want)))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let uhf_interactions = act
        .uhf_interactions
        .iter()
        .filter(|rule| match rule.mode {
            UhfMode::ForbiddenConcurrent => true,
            UhfMode::RequiredConcurrent => {
                earlier_all_included(&|a| a.uhf_type.as_deref() == Some(rule.uhf_type.as_str()))
            }
        })
        .cloned()
        .collect();
    GatedConstraints {
        dependencies,
        state_requirements,
        uhf_interactions,
    }
}

/// Scheduler run on one priority prefix plus the gated failed activity.
#[derive(Clone, Debug)]
pub struct Probe {
    pub step: usize,
    pub gated: GatedConstraints,
    pub schedule: Schedule,
}

impl Probe {
    /// The failed activity's record in this probe run.
    pub fn record(&self, failed_id: &str) -> &StepRecord {
        self.schedule
            .step_record(failed_id)
            .expect("probe always contains the failed activity")
    }

    pub fn fails(&self, failed_id: &str) -> bool {
        !self.record(failed_id).outcome.is_scheduled()
    }

    /// Schedule of the prefix activities, without the failed activity.
    pub fn partial(&self) -> Schedule {
        self.schedule.at_step(self.schedule.steps().len() - 1)
    }
}

/// Runs the scheduler on the activities of steps `1..=step` (minus the failed
/// one) together with the failed activity under gated constraints.
pub fn probe(plan: &Plan, failed: &Activity, step: usize) -> Probe {
    let prefix: Vec<Activity> = plan
        .activities()
        .iter()
        .take(step)
        .filter(|a| a.id != failed.id)
        .cloned()
        .collect();
    let included: BTreeSet<String> = prefix.iter().map(|a| a.id.clone()).collect();
    let gated = gate_constraints(failed, &included, plan);
    let mut acts = prefix;
    acts.push(gated.apply(failed));
    let probe_plan = Plan::new_unchecked(plan.config().clone(), acts);
    Probe {
        step,
        gated,
        schedule: run_scheduler(&probe_plan),
    }
}

#[derive(Clone, Debug)]
pub struct FailureStepResult {
    pub activity: String,
    /// Earliest step, 1-based, at which the activity fails.
    pub step: usize,
    /// Activity attempted at that step in the full plan.
    pub step_activity: String,
    /// Partial schedule of the prefix at the failure step.
    pub partial: Schedule,
    pub gated: GatedConstraints,
    pub record: StepRecord,
    /// Number of scheduler runs the search needed.
    pub probes: usize,
}

/// Binary search for the earliest step at which `failed_id` fails to
/// schedule. The search keeps the failure step inside `[low, high]`.
pub fn find_failure_step(plan: &Plan, failed_id: &str) -> Result<FailureStepResult, ExplainError> {
    let failed = plan
        .get(failed_id)
        .ok_or_else(|| ExplainError::UnknownActivity(failed_id.to_string()))?;
    let own_step = plan.step_of(failed_id).expect("activity is in plan");

    let mut cache: HashMap<usize, Probe> = HashMap::new();
    let mut run = |k: usize| -> bool {
        cache
            .entry(k)
            .or_insert_with(|| probe(plan, failed, k))
            .fails(failed_id)
    };

    if !run(own_step) {
        return Err(ExplainError::NotFailed(failed_id.to_string()));
    }
    let (mut low, mut high) = (1usize, own_step);
    while low != high {
        let mid = low + (high - low) / 2;
        if run(mid) {
            high = mid;
        } else {
            low = mid + 1;
        }
    }
    run(low);
    let probes = cache.len();
    let found = cache.remove(&low).expect("probe cached");
    Ok(FailureStepResult {
        activity: failed_id.to_string(),
        step: low,
        step_activity: plan.activities()[low - 1].id.clone(),
        partial: found.partial(),
        gated: found.gated.clone(),
        record: found.record(failed_id).clone(),
        probes,
    })
}
