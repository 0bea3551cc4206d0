//! Inputs shared by the benchmarks.

use crosscheck_core::synth::{random_plan, rng, PlanShape};
use crosscheck_core::{parse_plan, run_scheduler, Plan, Strictness};

pub fn desk_plan() -> Plan {
    let text = include_str!("../../core/tests/data/desk.plan.json");
    parse_plan(text.as_bytes(), Strictness::Strict).expect("desk plan is valid").plan
}

/// First seeded plan of `activities` activities that leaves something
/// unscheduled, with the id of its lowest-priority failure.
pub fn failing_plan(activities: usize) -> (Plan, String) {
    let shape = PlanShape {
        activities,
        ..PlanShape::default()
    };
    (0..)
        .find_map(|seed| {
            let plan = random_plan(&mut rng(seed), &shape);
            let failed = run_scheduler(&plan).failed().last().map(|r| r.activity.clone())?;
            Some((plan, failed))
        })
        .expect("some seed produces a failure")
}

pub fn random_plans(activities: usize, count: u64) -> Vec<Plan> {
    let shape = PlanShape {
        activities,
        ..PlanShape::default()
    };
    (0..count).map(|seed| random_plan(&mut rng(seed), &shape)).collect()
}
