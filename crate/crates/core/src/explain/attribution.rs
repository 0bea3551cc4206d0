//! Who used the energy and the peak power.

use serde::Serialize;

use crate::interval::{Interval, TimePoint};
use crate::model::PlanConfig;
use crate::scheduler::{GeneratedKind, Schedule};

const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsumerKind {
    Activity,
    Preheat,
    Maintenance,
    Awake,
    Asleep,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyConsumer {
    pub id: String,
    pub kind: ConsumerKind,
    pub energy_wh: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerUser {
    pub id: String,
    pub kind: ConsumerKind,
    pub watts: f64,
}

fn heater_kind(kind: GeneratedKind) -> ConsumerKind {
    match kind {
        GeneratedKind::Preheat => ConsumerKind::Preheat,
        _ => ConsumerKind::Maintenance,
    }
}

/// Energy drawn in `[plan_start, t)`, broken down by activity, heater, awake
/// block and sleep baseline. Largest first, ties by id; zero entries omitted.
pub fn energy_consumers(schedule: &Schedule, cfg: &PlanConfig, t: TimePoint) -> Vec<EnergyConsumer> {
    let upto = Interval::raw(cfg.plan_start(), t.clamp(cfg.plan_start(), cfg.plan_end()));
    let wh = |watts: f64, iv: Interval| watts * upto.overlap_len(&iv) as f64 / SECONDS_PER_HOUR;

    let mut out = Vec::new();
    for p in schedule.placed() {
        out.push(EnergyConsumer {
            id: p.activity.id.clone(),
            kind: ConsumerKind::Activity,
            energy_wh: wh(p.activity.energy_rate, p.interval()),
        });
        for g in p.heaters() {
            out.push(EnergyConsumer {
                id: g.id(),
                kind: heater_kind(g.kind),
                energy_wh: wh(g.power, g.interval),
            });
        }
    }
    let mut awake_secs = 0;
    for block in schedule.awake_blocks() {
        awake_secs += upto.overlap_len(block);
        out.push(EnergyConsumer {
            id: format!("awake@{}", block.start),
            kind: ConsumerKind::Awake,
            energy_wh: wh(cfg.awake_idle_power, *block),
        });
    }
    out.push(EnergyConsumer {
        id: "asleep".into(),
        kind: ConsumerKind::Asleep,
        energy_wh: cfg.sleep_power * (upto.len() - awake_secs) as f64 / SECONDS_PER_HOUR,
    });

    out.retain(|c| c.energy_wh > 0.0);
    out.sort_by(|a, b| b.energy_wh.total_cmp(&a.energy_wh).then_with(|| a.id.cmp(&b.id)));
    out
}

/// Activities and heaters whose interval covers `t`, largest draw first.
pub fn peak_power_users(schedule: &Schedule, t: TimePoint) -> Vec<PowerUser> {
    let mut out = Vec::new();
    for p in schedule.placed() {
        if p.interval().contains(t) {
            out.push(PowerUser {
                id: p.activity.id.clone(),
                kind: ConsumerKind::Activity,
                watts: p.activity.peak_power,
            });
        }
        for g in p.heaters().filter(|g| g.interval.contains(t)) {
            out.push(PowerUser {
                id: g.id(),
                kind: heater_kind(g.kind),
                watts: g.power,
            });
        }
    }
    out.sort_by(|a, b| b.watts.total_cmp(&a.watts).then_with(|| a.id.cmp(&b.id)));
    out
}
