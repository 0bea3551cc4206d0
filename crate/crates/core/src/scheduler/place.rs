//! Phase 2: choosing a start time inside the final valid intervals.

use serde::Serialize;

use super::awake::{place_awake, AwakeFailure};
use super::profile::{loads_of, power_profile, simulate_loads, simulate_soc, Load};
use super::thermal::generate_thermal;
use super::valid::final_valid_intervals;
use super::{
    GeneratedActivity, GeneratedKind, Phase2Reason, PlacedActivity, ReasonAt, Schedule, StepOutcome,
    StepRecord,
};
use crate::interval::{Interval, IntervalSet, TimePoint};
use crate::model::{Activity, Plan, PlanConfig};

/// Tolerance for energy and power comparisons.
const EPS: f64 = 1e-9;

/// Every reason a single candidate start time was rejected.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateTrace {
    pub time: TimePoint,
    pub reasons: Vec<ReasonAt>,
}

/// Precomputed view of a partial schedule, shared by all candidates of one
/// step.
struct Partial<'a> {
    schedule: &'a Schedule,
    cfg: &'a PlanConfig,
    loads: Vec<Load>,
}

impl<'a> Partial<'a> {
    fn new(schedule: &'a Schedule, cfg: &'a PlanConfig) -> Self {
        Self {
            schedule,
            cfg,
            loads: loads_of(schedule),
        }
    }

    fn try_place(&self, act: &Activity, t: TimePoint) -> Result<PlacedActivity, Vec<ReasonAt>> {
        let cfg = self.cfg;
        let span = act.interval_at(t);
        let reason = |reason, detail: String| ReasonAt {
            time: t,
            reason,
            detail,
        };

        let heaters = generate_thermal(act, t, cfg)?;
        let need_start = if cfg.heaters_require_awake {
            heaters.iter().map(|h| h.interval.start).min().unwrap_or(t).min(t)
        } else {
            t
        };
        let need = Interval::raw(need_start, span.end);
        let awake = match place_awake(self.schedule.awake_blocks(), need, cfg) {
            Ok(a) => a,
            Err(AwakeFailure::OutsidePlanBounds) => {
                return Err(vec![reason(
                    Phase2Reason::PreheatOutsidePlanBounds,
                    format!("awake span {need} leaves the plan bounds"),
                )])
            }
            Err(AwakeFailure::Violations(v)) => {
                return Err(v
                    .into_iter()
                    .map(|r| {
                        let detail = match r {
                            Phase2Reason::MinSleepViolation => format!(
                                "awake block for {need} leaves a sleep period shorter than {} s",
                                cfg.c_sleep_min
                            ),
                            _ => format!(
                                "awake block for {need} is shorter than {} s",
                                cfg.c_awake_min
                            ),
                        };
                        reason(r, detail)
                    })
                    .collect())
            }
        };

        let mut loads = self.loads.clone();
        loads.push(Load {
            id: act.id.clone(),
            interval: span,
            energy_rate: act.energy_rate,
            peak: act.peak_power,
        });
        for h in &heaters {
            loads.push(Load {
                id: h.id(),
                interval: h.interval,
                energy_rate: h.power,
                peak: h.power,
            });
        }

        let mut reasons = Vec::new();
        let soc = simulate_loads(cfg, &awake, &loads);
        if let Some((when, value)) = soc.first_below(cfg.c_soc_min - EPS) {
            reasons.push(reason(
                Phase2Reason::InsufficientEnergy,
                format!(
                    "state of charge would fall to {value:.3} Wh at t={when}, below the minimum {:.3} Wh",
                    cfg.c_soc_min
                ),
            ));
        }

        let own_span = heaters
            .iter()
            .map(|h| h.interval)
            .fold(span, |acc, iv| Interval::raw(acc.start.min(iv.start), acc.end.max(iv.end)));
        let power = power_profile(cfg, &loads);
        let (when, peak) = power.max_over(own_span);
        if peak > cfg.c_peak_power_max + EPS {
            reasons.push(reason(
                Phase2Reason::PeakPowerExceeded,
                format!(
                    "total peak power would reach {peak:.3} W at t={when}, above the maximum {:.3} W",
                    cfg.c_peak_power_max
                ),
            ));
        }

        for (res, usage) in &act.nondepletable {
            let capacity = cfg.nondepletable_capacities.get(res).copied().unwrap_or(0.0);
            let others: Vec<Load> = self
                .schedule
                .placed()
                .iter()
                .filter_map(|p| {
                    p.activity.nondepletable.get(res).map(|u| Load {
                        id: p.activity.id.clone(),
                        interval: p.interval(),
                        energy_rate: 0.0,
                        peak: *u,
                    })
                })
                .collect();
            let (when, used) = power_profile(cfg, &others).max_over(span);
            if used + usage > capacity + EPS {
                reasons.push(reason(
                    Phase2Reason::PeakPowerExceeded,
                    format!(
                        "non-depletable resource {res} would reach {:.3} at t={when}, above its capacity {capacity:.3}",
                        used + usage
                    ),
                ));
            }
        }

        if !reasons.is_empty() {
            return Err(reasons);
        }

        let mut generated = heaters;
        generated.extend(awake_pieces(act, need, cfg));
        Ok(PlacedActivity {
            activity: act.clone(),
            step: self.schedule.steps().len() + 1,
            start: t,
            end: span.end,
            generated,
        })
    }
}

fn awake_pieces(act: &Activity, need: Interval, cfg: &PlanConfig) -> Vec<GeneratedActivity> {
    let wake_start = (need.start - cfg.wakeup_dur).max(cfg.plan_start());
    let shut_end = (need.end + cfg.shutdown_dur).min(cfg.plan_end());
    [
        (GeneratedKind::Wakeup, wake_start, need.start),
        (GeneratedKind::Awake, need.start, need.end),
        (GeneratedKind::Shutdown, need.end, shut_end),
    ]
    .into_iter()
    .filter(|(_, s, e)| s < e)
    .map(|(kind, s, e)| GeneratedActivity {
        kind,
        interval: Interval::raw(s, e),
        instrument: None,
        power: cfg.awake_idle_power,
        parent: act.id.clone(),
    })
    .collect()
}

/// Tentatively places `act` at `t` on top of `partial`.
///
/// Accepts when thermal and wake/sleep generation succeed and the resulting
/// SOC, peak power and non-depletable usage stay within limits; otherwise
/// returns every reason observed at `t`.
pub fn try_place(
    act: &Activity,
    t: TimePoint,
    partial: &Schedule,
    cfg: &PlanConfig,
) -> Result<PlacedActivity, Vec<ReasonAt>> {
    Partial::new(partial, cfg).try_place(act, t)
}

/// Candidate start times in the order they are tried: preferred times of
/// each window first, then event boundaries ascending.
pub fn candidate_starts(
    act: &Activity,
    final_windows: &IntervalSet,
    partial: &Schedule,
    cfg: &PlanConfig,
) -> Vec<TimePoint> {
    let mut preferred: Vec<TimePoint> = Vec::new();
    for w in &act.windows {
        let p = w.preferred_start();
        if final_windows.contains(p) && !preferred.contains(&p) {
            preferred.push(p);
        }
    }

    let d = act.duration;
    let mut events: Vec<TimePoint> = Vec::new();
    for iv in final_windows {
        events.push(iv.start);
        events.push(iv.end - 1);
    }
    for p in partial.placed() {
        events.push(p.start);
        events.push(p.end);
        for g in &p.generated {
            events.push(g.interval.start);
            events.push(g.interval.end);
        }
    }
    events.extend(simulate_soc(partial, cfg).breakpoints().into_iter().map(|(t, _)| t));
    for b in partial.awake_blocks() {
        events.extend([
            b.start,
            b.end,
            // Merge by touching either side of the block.
            b.end + cfg.wakeup_dur,
            b.start - cfg.shutdown_dur - d,
            // Leave exactly the minimum sleep gap.
            b.end + cfg.c_sleep_min + cfg.wakeup_dur,
            b.start - cfg.c_sleep_min - cfg.shutdown_dur - d,
        ]);
    }
    for inst in &act.thermal {
        if let Some(table) = cfg.thermal_tables.get(inst) {
            for bin in &table.bins {
                events.push(cfg.plan_start() + bin.preheat);
                for op in &table.operability_windows {
                    events.push(op.start + bin.preheat);
                }
            }
        }
    }
    events.retain(|t| final_windows.contains(*t) && !preferred.contains(t));
    events.sort_unstable();
    events.dedup();
    preferred.extend(events);
    preferred
}

/// Walks every candidate in order, returning the first placement or the
/// full per-candidate rejection trace.
pub fn phase2_sweep(
    act: &Activity,
    final_windows: &IntervalSet,
    partial: &Schedule,
    cfg: &PlanConfig,
) -> Result<PlacedActivity, Vec<CandidateTrace>> {
    let ctx = Partial::new(partial, cfg);
    let mut trace = Vec::new();
    for t in candidate_starts(act, final_windows, partial, cfg) {
        match ctx.try_place(act, t) {
            Ok(placed) => return Ok(placed),
            Err(reasons) => trace.push(CandidateTrace { time: t, reasons }),
        }
    }
    Err(trace)
}

/// Attempts one activity against the partial schedule.
pub fn schedule_activity(
    act: &Activity,
    partial: &Schedule,
    cfg: &PlanConfig,
) -> (StepRecord, Option<PlacedActivity>) {
    let valid = final_valid_intervals(act, partial, cfg);
    let step = partial.steps().len() + 1;
    let (outcome, placed) = if valid.final_windows.is_empty() {
        (StepOutcome::FailedPhase1, None)
    } else {
        match phase2_sweep(act, &valid.final_windows, partial, cfg) {
            Ok(p) => (StepOutcome::Scheduled { start: p.start }, Some(p)),
            Err(trace) => (StepOutcome::FailedPhase2 { trace }, None),
        }
    };
    let record = StepRecord {
        step,
        activity: act.id.clone(),
        valid,
        outcome,
    };
    (record, placed)
}

/// Schedules every activity once, in priority order, never revisiting a
/// placement.
pub fn run_scheduler(plan: &Plan) -> Schedule {
    let cfg = plan.config();
    let mut schedule = Schedule::new(cfg.plan_bounds);
    for act in plan.activities() {
        let (record, placed) = schedule_activity(act, &schedule, cfg);
        schedule.commit(record, placed);
    }
    schedule
}
