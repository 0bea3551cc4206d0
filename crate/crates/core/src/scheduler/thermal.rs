use super::{GeneratedActivity, GeneratedKind, Phase2Reason, ReasonAt};
use crate::interval::{Interval, TimePoint};
use crate::model::{Activity, PlanConfig};

/// Preheat and maintenance heaters for `act` starting at `t`.
///
/// The preheat length comes from the time-of-day bin containing `t` and the
/// preheat must end exactly at `t`. Every instrument is checked, so all
/// failures at `t` are reported together.
pub fn generate_thermal(
    act: &Activity,
    t: TimePoint,
    cfg: &PlanConfig,
) -> Result<Vec<GeneratedActivity>, Vec<ReasonAt>> {
    let mut out = Vec::new();
    let mut reasons = Vec::new();
    for instrument in &act.thermal {
        let Some(table) = cfg.thermal_tables.get(instrument) else {
            debug_assert!(false, "unvalidated instrument {instrument}");
            continue;
        };
        let preheat = table.preheat_for(t).unwrap_or(0);
        if preheat > 0 {
            let iv = Interval::raw(t - preheat, t);
            if iv.start < cfg.plan_start() {
                reasons.push(ReasonAt {
                    time: t,
                    reason: Phase2Reason::PreheatOutsidePlanBounds,
                    detail: format!(
                        "{instrument} preheat of {preheat} s would start at {} before the plan start {}",
                        iv.start,
                        cfg.plan_start()
                    ),
                });
            } else if !table.operability_windows.covers(&iv) {
                reasons.push(ReasonAt {
                    time: t,
                    reason: Phase2Reason::PreheatOutsideOperability,
                    detail: format!(
                        "{instrument} preheat {iv} is outside its operability windows {}",
                        table.operability_windows
                    ),
                });
            } else {
                out.push(GeneratedActivity {
                    kind: GeneratedKind::Preheat,
                    interval: iv,
                    instrument: Some(instrument.clone()),
                    power: table.preheat_power,
                    parent: act.id.clone(),
                });
            }
        }
        out.push(GeneratedActivity {
            kind: GeneratedKind::Maintenance,
            interval: act.interval_at(t),
            instrument: Some(instrument.clone()),
            power: table.maintenance_power,
            parent: act.id.clone(),
        });
    }
    if reasons.is_empty() {
        Ok(out)
    } else {
        Err(reasons)
    }
}
