//! Phase-1 valid intervals, expressed as start-time windows.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::{PlacedActivity, Schedule};
use crate::interval::{Duration, Interval, IntervalSet, TimePoint};
use crate::model::{Activity, ConstraintKind, PlanConfig, UhfMode};

/// Per-kind valid start windows and their intersection.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidIntervals {
    pub per_kind: BTreeMap<ConstraintKind, IntervalSet>,
    #[serde(rename = "final")]
    pub final_windows: IntervalSet,
}

impl ValidIntervals {
    /// Per-kind map restricted to the kinds the activity actually carries.
    pub fn constrained(&self, act: &Activity) -> BTreeMap<ConstraintKind, IntervalSet> {
        self.per_kind
            .iter()
            .filter(|(k, _)| act.has_constraint(**k))
            .map(|(k, v)| (*k, v.clone()))
            .collect()
    }
}

pub fn final_valid_intervals(act: &Activity, partial: &Schedule, cfg: &PlanConfig) -> ValidIntervals {
    let mut per_kind = BTreeMap::new();
    let mut acc = cfg.start_windows(act.duration);
    for kind in ConstraintKind::ALL {
        let vi = constraint_valid_intervals(act, kind, partial, cfg);
        acc = acc.intersect(&vi);
        per_kind.insert(kind, vi);
    }
    ValidIntervals {
        per_kind,
        final_windows: acc,
    }
}

/// Start windows at which `act` satisfies one constraint kind against the
/// activities already placed in `partial`.
pub fn constraint_valid_intervals(
    act: &Activity,
    kind: ConstraintKind,
    partial: &Schedule,
    cfg: &PlanConfig,
) -> IntervalSet {
    let d = act.duration;
    let plan = IntervalSet::single(cfg.plan_bounds);
    let full = plan.occupancy_to_start_windows(d);
    let windows = match kind {
        ConstraintKind::Execution => execution(act, &full),
        ConstraintKind::Dependency => dependency(act, partial, cfg),
        ConstraintKind::UnitResource => {
            if act.unit_resources.is_empty() {
                return full;
            }
            let busy = IntervalSet::from_spans(
                partial
                    .placed()
                    .iter()
                    .filter(|p| !p.activity.unit_resources.is_disjoint(&act.unit_resources))
                    .map(|p| (p.start, p.end)),
            );
            plan.subtract(&busy).occupancy_to_start_windows(d)
        }
        ConstraintKind::StateRequirement => {
            let mut acc = full.clone();
            for (var, want) in &act.state_requirements {
                let timeline = StateTimeline::build(var, partial, cfg);
                let occ = IntervalSet::from_spans(
                    timeline
                        .runs
                        .iter()
                        .filter(|r| r.value.as_deref() == Some(want.as_str()))
                        .map(|r| (r.start, r.end)),
                );
                acc = acc.intersect(&occ.occupancy_to_start_windows(d));
            }
            acc
        }
        ConstraintKind::StateEffect => state_effect(act, partial, cfg, &full),
        ConstraintKind::DataVolume => data_volume(act, partial, cfg),
        ConstraintKind::UhfInteraction => {
            let mut acc = full.clone();
            for rule in &act.uhf_interactions {
                let passes = IntervalSet::from_spans(
                    partial
                        .placed()
                        .iter()
                        .filter(|p| p.activity.uhf_type.as_deref() == Some(rule.uhf_type.as_str()))
                        .map(|p| (p.start, p.end)),
                );
                let occ = match rule.mode {
                    UhfMode::RequiredConcurrent => passes,
                    UhfMode::ForbiddenConcurrent => plan.subtract(&passes),
                };
                acc = acc.intersect(&occ.occupancy_to_start_windows(d));
            }
            acc
        }
    };
    windows.intersect(&full)
}

fn execution(act: &Activity, full: &IntervalSet) -> IntervalSet {
    if act.windows.is_empty() {
        return full.clone();
    }
    IntervalSet::from_spans(act.windows.iter().map(|w| (w.start, w.end + 1)))
}

fn dependency(act: &Activity, partial: &Schedule, cfg: &PlanConfig) -> IntervalSet {
    let mut earliest = cfg.plan_start();
    for dep in &act.dependencies {
        match partial.get(dep) {
            Some(p) => earliest = earliest.max(p.end),
            None => return IntervalSet::empty(),
        }
    }
    IntervalSet::from_spans([(earliest, cfg.plan_end())]).occupancy_to_start_windows(act.duration)
}

/// A maximal span over which a state variable holds one value.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct StateRun {
    pub start: TimePoint,
    pub end: TimePoint,
    pub value: Option<String>,
    /// Activity whose effect established the value; `None` for the
    /// incoming state.
    pub setter: Option<String>,
}

/// Value of one state variable over the plan. Effects take hold at the end of
/// the activity that sets them; on equal end times the later step wins.
#[derive(Clone, Debug)]
pub(crate) struct StateTimeline {
    pub runs: Vec<StateRun>,
}

impl StateTimeline {
    pub fn build(var: &str, partial: &Schedule, cfg: &PlanConfig) -> Self {
        let mut effects: Vec<(TimePoint, usize, &PlacedActivity, &String)> = partial
            .placed()
            .iter()
            .filter_map(|p| p.activity.state_effects.get(var).map(|v| (p.end, p.step, p, v)))
            .collect();
        effects.sort_by_key(|e| (e.0, e.1));

        let mut runs: Vec<StateRun> = Vec::new();
        let mut cur = StateRun {
            start: cfg.plan_start(),
            end: cfg.plan_end(),
            value: cfg.initial_states.get(var).cloned(),
            setter: None,
        };
        for (t, _, p, v) in effects {
            if t >= cfg.plan_end() {
                break;
            }
            if t > cur.start {
                let mut done = cur.clone();
                done.end = t;
                runs.push(done);
                cur.start = t;
            }
            cur.value = Some(v.clone());
            cur.setter = Some(p.activity.id.clone());
        }
        runs.push(cur);
        Self { runs }
    }

    pub fn run_at(&self, t: TimePoint) -> Option<&StateRun> {
        self.runs.iter().find(|r| r.start <= t && t < r.end)
    }
}

/// Start windows at which `act`'s effects break no requirement already
/// satisfied for a placed activity.
fn state_effect(act: &Activity, partial: &Schedule, cfg: &PlanConfig, full: &IntervalSet) -> IntervalSet {
    let forbidden = IntervalSet::from_spans(
        state_effect_conflicts(act, partial, cfg)
            .into_iter()
            .map(|c| (c.forbidden.start, c.forbidden.end)),
    );
    full.subtract(&forbidden)
}

/// A placed activity whose requirement `act`'s effect would break, and the
/// start times of `act` that would break it.
#[derive(Clone, Debug)]
pub(crate) struct EffectConflict {
    pub var: String,
    pub blocked: String,
    pub forbidden: Interval,
}

pub(crate) fn state_effect_conflicts(
    act: &Activity,
    partial: &Schedule,
    cfg: &PlanConfig,
) -> Vec<EffectConflict> {
    let d = act.duration;
    let mut out = Vec::new();
    for (var, value) in &act.state_effects {
        let effect_times: Vec<TimePoint> = partial
            .placed()
            .iter()
            .filter(|p| p.activity.state_effects.contains_key(var))
            .map(|p| p.end)
            .collect();
        let timeline = StateTimeline::build(var, partial, cfg);
        for b in partial.placed() {
            let Some(required) = b.activity.state_requirements.get(var) else {
                continue;
            };
            if required == value {
                continue;
            }
            let satisfied = timeline
                .run_at(b.start)
                .is_some_and(|r| r.value.as_deref() == Some(required.as_str()));
            if !satisfied {
                continue;
            }
            // An effect landing in [established, b.end) overrides the value
            // b relies on.
            let established = effect_times
                .iter()
                .copied()
                .filter(|&t| t <= b.start)
                .max()
                .unwrap_or(cfg.plan_start());
            if let Ok(forbidden) = Interval::new(established - d, b.end - d) {
                out.push(EffectConflict {
                    var: var.clone(),
                    blocked: b.activity.id.clone(),
                    forbidden,
                });
            }
        }
    }
    out
}

/// Cumulative data volume at every integer second of the plan.
pub(crate) fn data_profile(partial: &Schedule, cfg: &PlanConfig) -> Vec<f64> {
    let ps = cfg.plan_start();
    let h = (cfg.plan_end() - ps) as usize;
    let mut slope = vec![0.0f64; h + 1];
    for p in partial.placed() {
        let dv = p.activity.data_rate;
        if dv == 0.0 {
            continue;
        }
        let s = (p.start - ps).clamp(0, h as i64) as usize;
        let e = (p.end - ps).clamp(0, h as i64) as usize;
        slope[s] += dv;
        slope[e] -= dv;
    }
    let mut cum = vec![0.0f64; h + 1];
    let mut rate = 0.0;
    for i in 0..h {
        rate += slope[i];
        cum[i + 1] = cum[i] + rate;
    }
    cum
}

/// Starts at which adding `act` keeps cumulative data within capacity at
/// every later time.
fn data_volume(act: &Activity, partial: &Schedule, cfg: &PlanConfig) -> IntervalSet {
    let d: Duration = act.duration;
    let dv = act.data_rate;
    let ps = cfg.plan_start();
    let h = cfg.plan_end() - ps;
    if dv == 0.0 || d > h {
        return cfg.start_windows(d);
    }
    let base = data_profile(partial, cfg);
    let cap = cfg.data_capacity + 1e-6;
    let n = base.len();
    let du = d as usize;

    let mut suffix_max = vec![f64::NEG_INFINITY; n + 1];
    for j in (0..n).rev() {
        suffix_max[j] = suffix_max[j + 1].max(base[j]);
    }
    let g: Vec<f64> = base.iter().enumerate().map(|(j, b)| b + dv * j as f64).collect();

    let mut ok = Vec::new();
    let mut window: VecDeque<usize> = VecDeque::new();
    let mut next = 0usize;
    for i in 0..=(h - d) as usize {
        // Sliding max of g over [i, i + d].
        while next <= i + du {
            while window.back().is_some_and(|&k| g[k] <= g[next]) {
                window.pop_back();
            }
            window.push_back(next);
            next += 1;
        }
        while window.front().is_some_and(|&k| k < i) {
            window.pop_front();
        }
        let during = g[window[0]] - dv * i as f64;
        let after = suffix_max[i + du] + dv * d as f64;
        if during <= cap && after <= cap {
            let s = ps + i as i64;
            ok.push((s, s + 1));
        }
    }
    IntervalSet::from_spans(ok)
}
