//! Seeded random plans and valid-interval maps for tests and benchmarks.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::interval::{Duration, Interval, IntervalSet};
use crate::model::{
    Activity, ConstraintKind, Plan, PlanConfig, ThermalBin, ThermalTable, UhfInteraction, UhfMode, Window, DAY_SECONDS,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct PlanShape {
    pub activities: usize,
    pub horizon: i64,
    /// Probability that an activity depends on an earlier one.
    pub dependency_rate: f64,
    /// Probability that an activity touches the shared state variable.
    pub state_rate: f64,
    pub thermal_rate: f64,
    pub uhf_rate: f64,
    pub data_rate: f64,
}

impl Default for PlanShape {
    fn default() -> Self {
        Self {
            activities: 12,
            horizon: 10_000,
            dependency_rate: 0.25,
            state_rate: 0.3,
            thermal_rate: 0.2,
            uhf_rate: 0.15,
            data_rate: 0.2,
        }
    }
}

const RESOURCES: [&str; 3] = ["arm", "mast", "drill_unit"];
const VALUES: [&str; 2] = ["stowed", "deployed"];

fn config<R: Rng>(rng: &mut R, horizon: i64) -> PlanConfig {
    let mut cfg = PlanConfig {
        plan_bounds: Interval::raw(0, horizon),
        initial_soc: rng.random_range(400.0..900.0),
        soc_max: 1000.0,
        c_soc_min: 200.0,
        c_peak_power_max: rng.random_range(400.0..800.0),
        c_sleep_min: *[0, 300, 600].choose(rng).unwrap(),
        c_awake_min: *[0, 0, 200].choose(rng).unwrap(),
        wakeup_dur: rng.random_range(0..=60),
        shutdown_dur: rng.random_range(0..=60),
        gen_power: 100.0,
        awake_idle_power: 150.0,
        sleep_power: 20.0,
        data_capacity: rng.random_range(2.0e5..1.0e6),
        ..PlanConfig::default()
    };
    cfg.initial_states.insert("drill".into(), "stowed".into());
    cfg.nondepletable_capacities.insert("bus".into(), 10.0);
    let split = rng.random_range(1..DAY_SECONDS);
    let mut ops = Vec::new();
    let mut t = 0;
    while t < horizon {
        let len = rng.random_range(500..3000);
        ops.push((t, (t + len).min(horizon)));
        t += len + rng.random_range(200..2000);
    }
    cfg.thermal_tables.insert(
        "cam".into(),
        ThermalTable {
            bins: vec![
                ThermalBin {
                    time_of_day: Interval::raw(0, split),
                    preheat: rng.random_range(0..600),
                },
                ThermalBin {
                    time_of_day: Interval::raw(split, DAY_SECONDS),
                    preheat: rng.random_range(0..600),
                },
            ],
            operability_windows: IntervalSet::from_spans(ops),
            preheat_power: rng.random_range(20.0..80.0),
            maintenance_power: rng.random_range(5.0..20.0),
        },
    );
    cfg
}

/// A valid random plan. Priorities are a permutation of `1..=n`, and each
/// dependency points at a higher-priority activity.
pub fn random_plan<R: Rng>(rng: &mut R, shape: &PlanShape) -> Plan {
    let h = shape.horizon;
    let cfg = config(rng, h);
    let n = shape.activities;
    let mut acts: Vec<Activity> = Vec::with_capacity(n);
    for step in 0..n {
        let duration: Duration = rng.random_range(100..=(h / 6).max(101));
        let mut a = Activity::new(format!("a{:02}", step + 1), step as u32 + 1, duration);
        a.energy_rate = rng.random_range(0.0..300.0);
        a.peak_power = rng.random_range(0.0..350.0);
        if rng.random_bool(0.6) {
            let start = rng.random_range(0..h - duration);
            let width = rng.random_range(0..=(h - duration - start).min(3000));
            let preferred = rng.random_bool(0.3).then(|| rng.random_range(start..=start + width));
            a.windows.push(Window {
                start,
                preferred,
                end: start + width,
            });
            if rng.random_bool(0.2) {
                let s2 = rng.random_range(0..h - duration);
                a.windows.push(Window::new(s2, (s2 + 500).min(h - duration)));
            }
        }
        for r in RESOURCES {
            if rng.random_bool(0.25) {
                a.unit_resources.insert(r.to_string());
            }
        }
        if step > 0 && rng.random_bool(shape.dependency_rate) {
            let parent = rng.random_range(0..step);
            a.dependencies.insert(acts[parent].id.clone());
        }
        if rng.random_bool(shape.state_rate) {
            let v = VALUES.choose(rng).unwrap().to_string();
            if rng.random_bool(0.5) {
                a.state_effects.insert("drill".into(), v);
            } else {
                a.state_requirements.insert("drill".into(), v);
            }
        }
        if rng.random_bool(shape.thermal_rate) {
            a.thermal.push("cam".into());
        }
        if rng.random_bool(shape.uhf_rate) {
            if step < n / 3 {
                a.uhf_type = Some("relay".into());
            } else {
                let mode = if rng.random_bool(0.5) {
                    UhfMode::RequiredConcurrent
                } else {
                    UhfMode::ForbiddenConcurrent
                };
                a.uhf_interactions.push(UhfInteraction {
                    uhf_type: "relay".into(),
                    mode,
                });
            }
        }
        if rng.random_bool(shape.data_rate) {
            a.data_rate = rng.random_range(50.0..200.0);
        }
        if rng.random_bool(0.15) {
            a.nondepletable.insert("bus".into(), rng.random_range(2.0..8.0));
        }
        acts.push(a);
    }
    // Scramble input order; the plan sorts by priority.
    acts.shuffle(rng);
    Plan::new(cfg, acts).expect("generated plans are valid")
}

/// A random per-kind valid-interval map whose full intersection (within the
/// plan start windows) is empty, for activities of duration `d`.
pub fn random_failing_map<R: Rng>(
    rng: &mut R,
    kinds: usize,
    horizon: i64,
) -> (BTreeMap<ConstraintKind, IntervalSet>, Duration, Interval) {
    let bounds = Interval::raw(0, horizon);
    loop {
        let d = rng.random_range(1..=horizon / 10);
        let base = IntervalSet::single(bounds).occupancy_to_start_windows(d);
        let mut chosen = ConstraintKind::ALL.to_vec();
        chosen.shuffle(rng);
        chosen.truncate(kinds);
        let mut map = BTreeMap::new();
        for k in chosen {
            let pieces = rng.random_range(0..=4);
            let spans: Vec<(i64, i64)> = (0..pieces)
                .map(|_| {
                    let s = rng.random_range(0..horizon);
                    let len = rng.random_range(1..=horizon / 2);
                    (s, (s + len).min(horizon))
                })
                .collect();
            map.insert(k, IntervalSet::from_spans(spans).intersect(&base));
        }
        let all = map.values().fold(base, |acc, v| acc.intersect(v));
        if all.is_empty() {
            return (map, d, bounds);
        }
    }
}
