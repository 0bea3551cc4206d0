//! Priority-first, non-backtracking scheduler.
//!
//! Each activity is attempted once, in priority order. Phase 1 intersects the
//! per-constraint valid start windows; phase 2 walks candidate start times and
//! accepts the first one that keeps energy, peak power, wake/sleep and heater
//! constraints satisfied. Placements are never moved afterwards.

mod awake;
mod place;
mod profile;
mod thermal;
pub(crate) mod valid;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::interval::{Interval, IntervalSet, TimePoint};
use crate::model::Activity;

pub use awake::{place_awake, AwakeFailure};
pub use place::{
    candidate_starts, phase2_sweep, run_scheduler, schedule_activity, try_place, CandidateTrace,
};
pub use profile::{
    loads_of, power_profile, simulate_loads, simulate_soc, Load, PowerProfile, SocProfile,
    SocSegment,
};
pub use thermal::generate_thermal;
pub use valid::{constraint_valid_intervals, final_valid_intervals, ValidIntervals};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratedKind {
    Preheat,
    Maintenance,
    Awake,
    Wakeup,
    Shutdown,
}

impl GeneratedKind {
    pub fn tag(self) -> &'static str {
        match self {
            GeneratedKind::Preheat => "preheat",
            GeneratedKind::Maintenance => "maintenance",
            GeneratedKind::Awake => "awake",
            GeneratedKind::Wakeup => "wakeup",
            GeneratedKind::Shutdown => "shutdown",
        }
    }

    pub fn is_heater(self) -> bool {
        matches!(self, GeneratedKind::Preheat | GeneratedKind::Maintenance)
    }
}

/// Preheat, maintenance or wake/sleep companion created for a placed activity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedActivity {
    pub kind: GeneratedKind,
    pub interval: Interval,
    pub instrument: Option<String>,
    /// Watts drawn while active.
    pub power: f64,
    pub parent: String,
}

impl GeneratedActivity {
    /// Display id, e.g. `drill/preheat/mastcam` or `drill/awake`.
    pub fn id(&self) -> String {
        match &self.instrument {
            Some(inst) => format!("{}/{}/{}", self.parent, self.kind.tag(), inst),
            None => format!("{}/{}", self.parent, self.kind.tag()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlacedActivity {
    pub activity: Activity,
    pub step: usize,
    pub start: TimePoint,
    pub end: TimePoint,
    pub generated: Vec<GeneratedActivity>,
}

impl PlacedActivity {
    pub fn id(&self) -> &str {
        &self.activity.id
    }

    pub fn interval(&self) -> Interval {
        Interval::raw(self.start, self.end)
    }

    pub fn heaters(&self) -> impl Iterator<Item = &GeneratedActivity> {
        self.generated.iter().filter(|g| g.kind.is_heater())
    }

    fn awake_pieces(&self) -> impl Iterator<Item = Interval> + '_ {
        self.generated
            .iter()
            .filter(|g| !g.kind.is_heater())
            .map(|g| g.interval)
    }
}

/// Why a phase-2 candidate start time was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase2Reason {
    InsufficientEnergy,
    PeakPowerExceeded,
    MinSleepViolation,
    MinAwakeViolation,
    PreheatOutsideOperability,
    PreheatOutsidePlanBounds,
}

impl Phase2Reason {
    pub const ALL: [Phase2Reason; 6] = [
        Phase2Reason::InsufficientEnergy,
        Phase2Reason::PeakPowerExceeded,
        Phase2Reason::MinSleepViolation,
        Phase2Reason::MinAwakeViolation,
        Phase2Reason::PreheatOutsideOperability,
        Phase2Reason::PreheatOutsidePlanBounds,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Phase2Reason::InsufficientEnergy => "insufficient_energy",
            Phase2Reason::PeakPowerExceeded => "peak_power_exceeded",
            Phase2Reason::MinSleepViolation => "min_sleep_violation",
            Phase2Reason::MinAwakeViolation => "min_awake_violation",
            Phase2Reason::PreheatOutsideOperability => "preheat_outside_operability",
            Phase2Reason::PreheatOutsidePlanBounds => "preheat_outside_plan_bounds",
        }
    }
}

impl fmt::Display for Phase2Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A phase-2 rejection observed at one candidate start time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReasonAt {
    pub time: TimePoint,
    pub reason: Phase2Reason,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    Scheduled { start: TimePoint },
    FailedPhase1,
    FailedPhase2 { trace: Vec<CandidateTrace> },
}

impl StepOutcome {
    pub fn tag(&self) -> &'static str {
        match self {
            StepOutcome::Scheduled { .. } => "scheduled",
            StepOutcome::FailedPhase1 => "failed_phase1",
            StepOutcome::FailedPhase2 { .. } => "failed_phase2",
        }
    }

    pub fn is_scheduled(&self) -> bool {
        matches!(self, StepOutcome::Scheduled { .. })
    }
}

/// Record of one scheduling step: which activity was attempted, its valid
/// intervals against the partial schedule, and what happened.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// 1-based step index, equal to the activity's rank in priority order.
    pub step: usize,
    pub activity: String,
    pub valid: ValidIntervals,
    pub outcome: StepOutcome,
}

impl StepRecord {
    /// Distinct phase-2 reasons across all candidates, in enum order.
    pub fn phase2_reasons(&self) -> Vec<Phase2Reason> {
        match &self.outcome {
            StepOutcome::FailedPhase2 { trace } => {
                let mut v: Vec<Phase2Reason> = trace
                    .iter()
                    .flat_map(|c| c.reasons.iter().map(|r| r.reason))
                    .collect();
                v.sort();
                v.dedup();
                v
            }
            _ => Vec::new(),
        }
    }
}

/// Output of a scheduler run, or a snapshot of one after some step.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    plan_bounds: Interval,
    placed: Vec<PlacedActivity>,
    steps: Vec<StepRecord>,
    awake: IntervalSet,
}

impl Schedule {
    pub fn new(plan_bounds: Interval) -> Self {
        Self {
            plan_bounds,
            placed: Vec::new(),
            steps: Vec::new(),
            awake: IntervalSet::empty(),
        }
    }

    pub fn plan_bounds(&self) -> Interval {
        self.plan_bounds
    }

    /// Placed activities in step order.
    pub fn placed(&self) -> &[PlacedActivity] {
        &self.placed
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    /// Merged awake blocks; everything else in the plan is asleep.
    pub fn awake_blocks(&self) -> &IntervalSet {
        &self.awake
    }

    pub fn get(&self, id: &str) -> Option<&PlacedActivity> {
        self.placed.iter().find(|p| p.activity.id == id)
    }

    pub fn step_record(&self, id: &str) -> Option<&StepRecord> {
        self.steps.iter().find(|s| s.activity == id)
    }

    pub fn failed(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|s| !s.outcome.is_scheduled())
    }

    pub fn is_complete(&self) -> bool {
        self.failed().next().is_none()
    }

    /// Partial schedule as it stood right after step `k` (step 0 is empty).
    pub fn at_step(&self, k: usize) -> Schedule {
        let k = k.min(self.steps.len());
        let placed: Vec<PlacedActivity> =
            self.placed.iter().filter(|p| p.step <= k).cloned().collect();
        let awake = IntervalSet::from_spans(
            placed
                .iter()
                .flat_map(|p| p.awake_pieces())
                .map(|iv| (iv.start, iv.end)),
        );
        Schedule {
            plan_bounds: self.plan_bounds,
            placed,
            steps: self.steps[..k].to_vec(),
            awake,
        }
    }

    /// Appends one step's outcome; used by the scheduler loop.
    pub fn commit(&mut self, record: StepRecord, placed: Option<PlacedActivity>) {
        if let Some(p) = placed {
            self.awake = self
                .awake
                .union(&IntervalSet::from_spans(p.awake_pieces().map(|iv| (iv.start, iv.end))));
            self.placed.push(p);
        }
        self.steps.push(record);
    }

    /// Per-kind and final valid intervals recorded for every attempted activity.
    pub fn valid_intervals(&self) -> BTreeMap<&str, &ValidIntervals> {
        self.steps
            .iter()
            .map(|s| (s.activity.as_str(), &s.valid))
            .collect()
    }
}
