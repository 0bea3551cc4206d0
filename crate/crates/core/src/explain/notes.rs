use std::collections::BTreeSet;

use super::{Explanation, FailurePhase};
use crate::model::{Activity, ConstraintKind};
use crate::scheduler::Phase2Reason;

fn join(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(", ")
    }
}

/// Plain-language summary lines followed by relaxation suggestions.
pub(super) fn notes(e: &Explanation, act: &Activity) -> Vec<String> {
    let mut out = Vec::new();
    let at_step = format!("first fails at step {}, when {} is scheduled", e.failure_step, e.step_activity);
    match e.phase {
        FailurePhase::Phase1 => {
            out.push(format!(
                "{} {at_step}: its valid intervals have no common start time.",
                e.activity
            ));
            for subset in &e.failing_subsets {
                let labels: Vec<&str> = subset.iter().map(|k| k.label()).collect();
                out.push(format!("Conflicting constraints: {}.", labels.join(" + ")));
            }
            let kinds: BTreeSet<ConstraintKind> = e.failing_subsets.iter().flatten().copied().collect();
            for kind in kinds {
                out.extend(kind_guidance(e, act, kind));
            }
        }
        FailurePhase::Phase2 => {
            let summary = e.phase2.clone().unwrap_or_default();
            out.push(format!(
                "{} {at_step}: it has valid start times but all {} candidates were rejected.",
                e.activity,
                summary.trace.len()
            ));
            for reason in summary.reasons {
                out.push(reason_guidance(&e.activity, reason));
                let first = summary.trace.iter().flat_map(|c| &c.reasons).find(|r| r.reason == reason);
                if let Some(r) = first {
                    out.push(format!("At t={}: {}.", r.time, r.detail));
                }
            }
        }
    }
    out
}

fn kind_guidance(e: &Explanation, act: &Activity, kind: ConstraintKind) -> Vec<String> {
    let entities = e.conflicts.iter().filter(|c| c.kind == kind);
    match kind {
        ConstraintKind::Execution => vec![format!(
            "Widen the execution windows of {} (currently {}).",
            act.id,
            e.valid.get(&kind).map(|w| w.to_string()).unwrap_or_default()
        )],
        ConstraintKind::Dependency => entities
            .map(|c| {
                if c.activities.is_empty() {
                    format!("Dependency {} is not scheduled; schedule it or drop the dependency.", c.name)
                } else {
                    format!("Move dependency {} earlier or allow {} to start later.", c.name, act.id)
                }
            })
            .collect(),
        ConstraintKind::UnitResource => entities
            .map(|c| format!("Resource {} is held by {}; move them or free the resource.", c.name, join(&c.activities)))
            .collect(),
        ConstraintKind::StateRequirement => entities
            .map(|c| {
                let satisfiers = c.satisfiers.clone().unwrap_or_default();
                if satisfiers.is_empty() {
                    format!(
                        "No activity scheduled before {1} sets {0}; add one or raise the priority of one that does.",
                        c.name, act.id
                    )
                } else {
                    format!(
                        "State {} is set by {} but changed by {}; reorder these activities.",
                        c.name,
                        join(&satisfiers),
                        join(&c.activities)
                    )
                }
            })
            .collect(),
        ConstraintKind::StateEffect => entities
            .map(|c| {
                format!(
                    "Changing {} would break the state required by {}; schedule {} outside their spans.",
                    c.name,
                    join(&c.activities),
                    act.id
                )
            })
            .collect(),
        ConstraintKind::DataVolume => vec![format!(
            "Onboard data capacity is exhausted by {}; reduce data volume or downlink earlier.",
            join(&entities.flat_map(|c| c.activities.clone()).collect::<Vec<_>>())
        )],
        ConstraintKind::UhfInteraction => entities
            .map(|c| format!("UHF constraint {} against passes {}; adjust the pass times or windows.", c.name, join(&c.activities)))
            .collect(),
    }
}

fn reason_guidance(id: &str, reason: Phase2Reason) -> String {
    match reason {
        Phase2Reason::InsufficientEnergy => {
            format!("Battery would drop below its minimum; reduce the energy of {id} or earlier activities.")
        }
        Phase2Reason::PeakPowerExceeded => {
            format!("Concurrent power demand is too high; move overlapping activities away from {id}.")
        }
        Phase2Reason::MinSleepViolation => {
            "Waking for this activity would leave too short a sleep period; align it with an existing awake block."
                .to_string()
        }
        Phase2Reason::MinAwakeViolation => {
            "The awake block would be shorter than the minimum awake time; lengthen it or combine activities.".to_string()
        }
        Phase2Reason::PreheatOutsideOperability => {
            format!("Preheating for {id} would fall outside the instrument's operability windows; change its execution windows so the preheat fits inside one.")
        }
        Phase2Reason::PreheatOutsidePlanBounds => {
            format!("Preheating for {id} would begin before the plan starts; start it later.")
        }
    }
}
