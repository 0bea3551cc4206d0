//! Independent reference implementations used as test oracles. They favour
//! directness over speed: everything is evaluated second by second or by
//! exhaustive enumeration.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use crosscheck_core::explain::probe;
use crosscheck_core::io::{parse_plan, Strictness};
use crosscheck_core::scheduler::{try_place, PlacedActivity, StepOutcome, StepRecord, ValidIntervals};
use crosscheck_core::{
    Activity, ConstraintKind, Interval, IntervalSet, Plan, PlanConfig, Schedule, TimePoint, UhfMode,
};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

pub fn load_plan(name: &str) -> Plan {
    let path = data_dir().join(format!("{name}.plan.json"));
    let bytes = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_plan(&bytes, Strictness::Strict).expect("test plan is valid").plan
}

/// Compares `actual` with the checked-in golden file, or rewrites the golden
/// when `CROSSCHECK_BLESS` is set.
pub fn check_golden(file: &str, actual: &str) -> bool {
    let path = data_dir().join(file);
    if std::env::var_os("CROSSCHECK_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return true;
    }
    match std::fs::read_to_string(&path) {
        Ok(expected) => expected == actual,
        Err(_) => false,
    }
}

/// Builds an interval set from per-second membership over `[lo, hi)`.
pub fn from_membership(lo: TimePoint, hi: TimePoint, ok: impl Fn(TimePoint) -> bool) -> IntervalSet {
    IntervalSet::from_spans((lo..hi).filter(|&s| ok(s)).map(|s| (s, s + 1)))
}

// ---------------------------------------------------------------- energy

/// Awake seconds as a boolean per second of the plan.
fn awake_mask(schedule: &Schedule, cfg: &PlanConfig) -> Vec<bool> {
    let ps = cfg.plan_start();
    let n = (cfg.plan_end() - ps) as usize;
    let mut mask = vec![false; n];
    for p in schedule.placed() {
        for g in p.generated.iter().filter(|g| !g.kind.is_heater()) {
            for t in g.interval.start.max(ps)..g.interval.end.min(cfg.plan_end()) {
                mask[(t - ps) as usize] = true;
            }
        }
    }
    mask
}

/// Watts drawn by activities and heaters in each second of the plan.
fn load_per_second(schedule: &Schedule, cfg: &PlanConfig, rate: impl Fn(&PlacedActivity) -> f64) -> Vec<f64> {
    let ps = cfg.plan_start();
    let n = (cfg.plan_end() - ps) as usize;
    let mut load = vec![0.0; n];
    for p in schedule.placed() {
        let mut add = |iv: Interval, w: f64| {
            for t in iv.start.max(ps)..iv.end.min(cfg.plan_end()) {
                load[(t - ps) as usize] += w;
            }
        };
        add(p.interval(), rate(p));
        for h in p.heaters() {
            add(h.interval, h.power);
        }
    }
    load
}

/// Forward-Euler integration with 1 s steps. Entry `i` is the SOC at
/// `plan_start + i`; the second vector is energy clipped in each second.
pub fn euler_soc(schedule: &Schedule, cfg: &PlanConfig) -> (Vec<f64>, Vec<f64>) {
    let awake = awake_mask(schedule, cfg);
    let load = load_per_second(schedule, cfg, |p| p.activity.energy_rate);
    let mut soc = vec![cfg.initial_soc];
    let mut clipped = Vec::with_capacity(awake.len());
    let mut cur = cfg.initial_soc;
    for i in 0..awake.len() {
        let base = if awake[i] { cfg.awake_idle_power } else { cfg.sleep_power };
        let next = cur + (cfg.gen_power - base - load[i]) / 3600.0;
        if next > cfg.soc_max {
            clipped.push(next - cfg.soc_max);
            cur = cfg.soc_max;
        } else {
            clipped.push(0.0);
            cur = next;
        }
        soc.push(cur);
    }
    (soc, clipped)
}

/// Total peak watts in each second of the plan.
pub fn peak_per_second(schedule: &Schedule, cfg: &PlanConfig) -> Vec<f64> {
    load_per_second(schedule, cfg, |p| p.activity.peak_power)
}

/// Energy attribution by direct summation over seconds in `[plan_start, t)`.
pub fn euler_consumers(schedule: &Schedule, cfg: &PlanConfig, t: TimePoint) -> BTreeMap<String, f64> {
    let ps = cfg.plan_start();
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for s in ps..t {
        for p in schedule.placed() {
            if p.interval().contains(s) {
                *out.entry(p.activity.id.clone()).or_default() += p.activity.energy_rate / 3600.0;
            }
            for h in p.heaters().filter(|h| h.interval.contains(s)) {
                *out.entry(h.id()).or_default() += h.power / 3600.0;
            }
        }
        match schedule.awake_blocks().iter().find(|b| b.contains(s)) {
            Some(b) => *out.entry(format!("awake@{}", b.start)).or_default() += cfg.awake_idle_power / 3600.0,
            None => *out.entry("asleep".into()).or_default() += cfg.sleep_power / 3600.0,
        }
    }
    out.retain(|_, v| *v > 0.0);
    out
}

// ---------------------------------------------------------------- subsets

/// All subsets (by kind) whose intersection with the plan start windows is
/// empty and which contain no smaller empty subset.
pub fn brute_force_minimal(
    map: &BTreeMap<ConstraintKind, IntervalSet>,
    d: i64,
    bounds: Interval,
) -> Vec<BTreeSet<ConstraintKind>> {
    let kinds: Vec<(&ConstraintKind, &IntervalSet)> = map.iter().collect();
    let base = IntervalSet::single(bounds).occupancy_to_start_windows(d);
    let n = kinds.len();
    let empty: Vec<bool> = (0u32..(1 << n))
        .map(|mask| {
            mask != 0
                && (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .fold(base.clone(), |acc, i| acc.intersect(kinds[i].1))
                    .is_empty()
        })
        .collect();
    (1u32..(1 << n))
        .filter(|&mask| empty[mask as usize])
        .filter(|&mask| (0..n).all(|i| mask & (1 << i) == 0 || !empty[(mask & !(1 << i)) as usize]))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| *kinds[i].0).collect())
        .collect()
}

/// Minimal subsets of the smallest size only.
pub fn brute_force_minimum(
    map: &BTreeMap<ConstraintKind, IntervalSet>,
    d: i64,
    bounds: Interval,
) -> Vec<BTreeSet<ConstraintKind>> {
    let all = brute_force_minimal(map, d, bounds);
    let min = all.iter().map(|s| s.len()).min().unwrap_or(0);
    all.into_iter().filter(|s| s.len() == min).collect()
}

// ---------------------------------------------------------------- failure step

/// Smallest `k` whose probe plan fails the activity.
pub fn linear_failure_step(plan: &Plan, id: &str) -> usize {
    let act = plan.get(id).unwrap();
    let own = plan.step_of(id).unwrap();
    (1..=own)
        .find(|&k| probe(plan, act, k).fails(id))
        .expect("failed activity fails at its own step")
}

// ---------------------------------------------------------------- phase 1

/// State of `var` at time `tau` given the placed activities, with an
/// optional extra effect `(end, value)` treated as the latest step.
fn state_at(
    var: &str,
    tau: TimePoint,
    placed: &[PlacedActivity],
    cfg: &PlanConfig,
    extra: Option<(TimePoint, &str)>,
) -> Option<String> {
    let mut best: Option<(TimePoint, usize, String)> = None;
    let mut consider = |end: TimePoint, step: usize, value: &str| {
        if end <= tau && end < cfg.plan_end() && best.as_ref().is_none_or(|b| (end, step) >= (b.0, b.1)) {
            best = Some((end, step, value.to_string()));
        }
    };
    for p in placed {
        if let Some(v) = p.activity.state_effects.get(var) {
            consider(p.end, p.step, v);
        }
    }
    if let Some((end, v)) = extra {
        consider(end, usize::MAX, v);
    }
    best.map(|b| b.2).or_else(|| cfg.initial_states.get(var).cloned())
}

/// Cumulative data volume at integer time `tau`, optionally with `act`
/// placed at `s`.
fn data_at(tau: TimePoint, placed: &[PlacedActivity], extra: Option<(&Activity, TimePoint)>) -> f64 {
    let mut total = 0.0;
    let mut add = |start: TimePoint, end: TimePoint, rate: f64| {
        let secs = (tau.min(end) - start).max(0);
        total += rate * secs as f64;
    };
    for p in placed {
        add(p.start, p.end, p.activity.data_rate);
    }
    if let Some((a, s)) = extra {
        add(s, s + a.duration, a.data_rate);
    }
    total
}

/// Whether start `s` satisfies constraint `kind` for `act`, by definition.
pub fn pointwise_ok(act: &Activity, kind: ConstraintKind, s: TimePoint, partial: &Schedule, cfg: &PlanConfig) -> bool {
    let d = act.duration;
    let span = Interval::new(s, s + d).unwrap();
    if !cfg.plan_bounds.contains_interval(&span) {
        return false;
    }
    let placed = partial.placed();
    match kind {
        ConstraintKind::Execution => act.windows.is_empty() || act.windows.iter().any(|w| w.start <= s && s <= w.end),
        ConstraintKind::Dependency => act
            .dependencies
            .iter()
            .all(|dep| partial.get(dep).is_some_and(|p| p.end <= s)),
        ConstraintKind::UnitResource => placed
            .iter()
            .filter(|p| !p.activity.unit_resources.is_disjoint(&act.unit_resources))
            .all(|p| !p.interval().overlaps(&span)),
        ConstraintKind::StateRequirement => act.state_requirements.iter().all(|(var, want)| {
            (s..s + d).all(|tau| state_at(var, tau, placed, cfg, None).as_deref() == Some(want.as_str()))
        }),
        ConstraintKind::StateEffect => act.state_effects.iter().all(|(var, value)| {
            placed.iter().all(|b| {
                let Some(req) = b.activity.state_requirements.get(var) else {
                    return true;
                };
                let held = |extra| (b.start..b.end).all(|tau| state_at(var, tau, placed, cfg, extra).as_deref() == Some(req.as_str()));
                !held(None) || held(Some((s + d, value.as_str())))
            })
        }),
        ConstraintKind::DataVolume => {
            act.data_rate == 0.0
                || (cfg.plan_start()..=cfg.plan_end())
                    .all(|tau| data_at(tau, placed, Some((act, s))) <= cfg.data_capacity + 1e-6)
        }
        ConstraintKind::UhfInteraction => act.uhf_interactions.iter().all(|rule| {
            let passes: Vec<Interval> = placed
                .iter()
                .filter(|p| p.activity.uhf_type.as_deref() == Some(rule.uhf_type.as_str()))
                .map(|p| p.interval())
                .collect();
            match rule.mode {
                UhfMode::RequiredConcurrent => (s..s + d).all(|tau| passes.iter().any(|p| p.contains(tau))),
                UhfMode::ForbiddenConcurrent => passes.iter().all(|p| !p.overlaps(&span)),
            }
        }),
    }
}

// ---------------------------------------------------------------- scheduler

/// Reference scheduler: phase 1 by per-second membership, phase 2 by trying
/// each window's preferred time, then every valid second in ascending order.
pub fn dense_scan_schedule(plan: &Plan) -> Vec<(String, Option<TimePoint>)> {
    let cfg = plan.config();
    let mut schedule = Schedule::new(cfg.plan_bounds);
    let mut out = Vec::new();
    for act in plan.activities() {
        let valid: Vec<TimePoint> = (cfg.plan_start()..cfg.plan_end())
            .filter(|&s| ConstraintKind::ALL.iter().all(|&k| pointwise_ok(act, k, s, &schedule, cfg)))
            .collect();
        let mut order: Vec<TimePoint> = Vec::new();
        for w in &act.windows {
            let p = w.preferred_start();
            if valid.binary_search(&p).is_ok() && !order.contains(&p) {
                order.push(p);
            }
        }
        order.extend(valid.iter().copied().filter(|s| !order.contains(s)).collect::<Vec<_>>());
        let placed = order.iter().find_map(|&s| try_place(act, s, &schedule, cfg).ok());
        out.push((act.id.clone(), placed.as_ref().map(|p| p.start)));
        let outcome = match &placed {
            Some(p) => StepOutcome::Scheduled { start: p.start },
            None => StepOutcome::FailedPhase1,
        };
        let record = StepRecord {
            step: schedule.steps().len() + 1,
            activity: act.id.clone(),
            valid: ValidIntervals::default(),
            outcome,
        };
        schedule.commit(record, placed);
    }
    out
}
