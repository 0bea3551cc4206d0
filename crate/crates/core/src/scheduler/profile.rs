//! Battery state-of-charge and peak-power profiles.

use serde::Serialize;

use super::{GeneratedKind, Schedule};
use crate::interval::{Interval, IntervalSet, TimePoint};
use crate::model::PlanConfig;

const SECONDS_PER_HOUR: f64 = 3600.0;

/// A constant draw over an interval: an activity or one of its heaters.
#[derive(Clone, Debug, PartialEq)]
pub struct Load {
    pub id: String,
    pub interval: Interval,
    /// Average watts, integrated into the energy profile.
    pub energy_rate: f64,
    /// Instantaneous watts, summed into the peak-power profile.
    pub peak: f64,
}

/// Every load contributed by the placed activities and their heaters.
/// Awake blocks are not loads; their idle draw is part of the battery model.
pub fn loads_of(schedule: &Schedule) -> Vec<Load> {
    let mut out = Vec::new();
    for p in schedule.placed() {
        out.push(Load {
            id: p.activity.id.clone(),
            interval: p.interval(),
            energy_rate: p.activity.energy_rate,
            peak: p.activity.peak_power,
        });
        for g in p.heaters() {
            debug_assert!(matches!(g.kind, GeneratedKind::Preheat | GeneratedKind::Maintenance));
            out.push(Load {
                id: g.id(),
                interval: g.interval,
                energy_rate: g.power,
                peak: g.power,
            });
        }
    }
    out
}

/// Piece of the SOC profile over which the net rate is constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SocSegment {
    pub start: TimePoint,
    pub end: TimePoint,
    /// Net watts into the battery: generation minus all draws.
    pub rate: f64,
    pub soc_start: f64,
    pub soc_end: f64,
    /// Generation discarded because the battery was full.
    pub clipped: f64,
}

/// Piecewise-linear state of charge over the plan, clipped at `soc_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SocProfile {
    pub initial: f64,
    pub soc_max: f64,
    pub segments: Vec<SocSegment>,
}

impl SocProfile {
    /// `(time, soc)` at every segment boundary, including the plan end.
    pub fn breakpoints(&self) -> Vec<(TimePoint, f64)> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        for seg in &self.segments {
            out.push((seg.start, seg.soc_start));
        }
        if let Some(last) = self.segments.last() {
            out.push((last.end, last.soc_end));
        }
        out
    }

    pub fn value_at(&self, t: TimePoint) -> f64 {
        let idx = self.segments.partition_point(|s| s.end <= t);
        match self.segments.get(idx) {
            Some(seg) if seg.start <= t => {
                let raw = seg.soc_start + seg.rate * (t - seg.start) as f64 / SECONDS_PER_HOUR;
                raw.min(self.soc_max.max(seg.soc_start))
            }
            _ => self.final_soc(),
        }
    }

    /// Lowest value and the first time it is reached. Each segment is
    /// monotone, so the minimum sits on a breakpoint.
    pub fn min(&self) -> (TimePoint, f64) {
        self.breakpoints()
            .into_iter()
            .fold((0, f64::INFINITY), |best, bp| if bp.1 < best.1 { bp } else { best })
    }

    pub fn max(&self) -> f64 {
        self.breakpoints()
            .into_iter()
            .map(|b| b.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn final_soc(&self) -> f64 {
        self.segments.last().map_or(self.initial, |s| s.soc_end)
    }

    pub fn clipped_total(&self) -> f64 {
        self.segments.iter().map(|s| s.clipped).sum()
    }

    /// First breakpoint below `floor`, if any.
    pub fn first_below(&self, floor: f64) -> Option<(TimePoint, f64)> {
        self.breakpoints().into_iter().find(|&(_, v)| v < floor)
    }
}

pub fn simulate_soc(schedule: &Schedule, cfg: &PlanConfig) -> SocProfile {
    simulate_loads(cfg, schedule.awake_blocks(), &loads_of(schedule))
}

/// Integrates the battery over the plan for the given awake blocks and loads.
pub fn simulate_loads(cfg: &PlanConfig, awake: &IntervalSet, loads: &[Load]) -> SocProfile {
    let bounds = cfg.plan_bounds;
    let mut deltas: Vec<(TimePoint, f64)> = Vec::with_capacity(loads.len() * 2);
    for l in loads {
        if let Some(iv) = l.interval.intersection(&bounds) {
            deltas.push((iv.start, -l.energy_rate));
            deltas.push((iv.end, l.energy_rate));
        }
    }
    let mut cuts: Vec<TimePoint> = deltas.iter().map(|d| d.0).collect();
    for iv in awake.intersect(&IntervalSet::single(bounds)).iter() {
        cuts.push(iv.start);
        cuts.push(iv.end);
    }
    cuts.push(bounds.start);
    cuts.push(bounds.end);
    cuts.sort_unstable();
    cuts.dedup();
    deltas.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut segments = Vec::with_capacity(cuts.len());
    let mut soc = cfg.initial_soc;
    let mut draw = 0.0;
    let mut di = 0;
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        while di < deltas.len() && deltas[di].0 <= t0 {
            draw -= deltas[di].1;
            di += 1;
        }
        let base = if awake.contains(t0) {
            cfg.awake_idle_power
        } else {
            cfg.sleep_power
        };
        let rate = cfg.gen_power - base - draw;
        let raw = soc + rate * (t1 - t0) as f64 / SECONDS_PER_HOUR;
        let cap = cfg.soc_max.max(soc);
        let (soc_end, clipped) = if raw > cap { (cap, raw - cap) } else { (raw, 0.0) };
        segments.push(SocSegment {
            start: t0,
            end: t1,
            rate,
            soc_start: soc,
            soc_end,
            clipped,
        });
        soc = soc_end;
    }
    SocProfile {
        initial: cfg.initial_soc,
        soc_max: cfg.soc_max,
        segments,
    }
}

/// Total peak watts as a step function: each entry holds from its time until
/// the next entry (the last one until the plan end).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerProfile {
    pub steps: Vec<(TimePoint, f64)>,
}

impl PowerProfile {
    pub fn value_at(&self, t: TimePoint) -> f64 {
        let idx = self.steps.partition_point(|s| s.0 <= t);
        if idx == 0 {
            0.0
        } else {
            self.steps[idx - 1].1
        }
    }

    pub fn max(&self) -> f64 {
        self.steps.iter().map(|s| s.1).fold(0.0, f64::max)
    }

    /// Highest level over any point of `span`, with the time it starts.
    pub fn max_over(&self, span: Interval) -> (TimePoint, f64) {
        let mut best = (span.start, self.value_at(span.start));
        for &(t, v) in &self.steps {
            if t > span.start && t < span.end && v > best.1 {
                best = (t, v);
            }
        }
        best
    }
}

pub fn power_profile(cfg: &PlanConfig, loads: &[Load]) -> PowerProfile {
    let bounds = cfg.plan_bounds;
    let mut deltas: Vec<(TimePoint, f64)> = Vec::new();
    for l in loads {
        if let Some(iv) = l.interval.intersection(&bounds) {
            deltas.push((iv.start, l.peak));
            deltas.push((iv.end, -l.peak));
        }
    }
    deltas.push((bounds.start, 0.0));
    deltas.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut steps: Vec<(TimePoint, f64)> = Vec::new();
    let mut level = 0.0;
    let mut i = 0;
    while i < deltas.len() {
        let t = deltas[i].0;
        while i < deltas.len() && deltas[i].0 == t {
            level += deltas[i].1;
            i += 1;
        }
        if t >= bounds.end {
            break;
        }
        // Snap accumulated rounding back to zero when everything has ended.
        let v = if level.abs() < 1e-9 { 0.0 } else { level };
        match steps.last_mut() {
            Some(last) if last.1 == v => {}
            _ => steps.push((t, v)),
        }
    }
    PowerProfile { steps }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PlanConfig {
        PlanConfig {
            plan_bounds: Interval::raw(0, 7200),
            initial_soc: 1000.0,
            soc_max: 1000.0,
            c_soc_min: 100.0,
            gen_power: 100.0,
            awake_idle_power: 300.0,
            sleep_power: 20.0,
            ..PlanConfig::default()
        }
    }

    #[test]
    fn asleep_and_full_stays_flat() {
        let p = simulate_loads(&cfg(), &IntervalSet::empty(), &[]);
        assert_eq!(p.breakpoints(), vec![(0, 1000.0), (7200, 1000.0)]);
        // 80 W surplus for two hours, all discarded.
        assert!((p.clipped_total() - 160.0).abs() < 1e-9);
    }

    #[test]
    fn awake_idle_hour_drains_200_wh() {
        let awake = IntervalSet::single(Interval::raw(0, 3600));
        let p = simulate_loads(&cfg(), &awake, &[]);
        assert!((p.value_at(3600) - 800.0).abs() < 1e-9);
        assert!((p.value_at(1800) - 900.0).abs() < 1e-9);
        // Recharges at 80 W afterwards.
        assert!((p.final_soc() - 880.0).abs() < 1e-9);
        assert_eq!(p.min(), (3600, 800.0));
    }

    #[test]
    fn recharge_clips_inside_segment() {
        let awake = IntervalSet::single(Interval::raw(0, 360));
        let p = simulate_loads(&cfg(), &awake, &[]);
        // -20 Wh, then +80 W for 6840 s would be +152 Wh, so it clips.
        assert!((p.value_at(360) - 980.0).abs() < 1e-9);
        assert!((p.value_at(360 + 900) - 1000.0).abs() < 1e-9);
        assert!((p.clipped_total() - 132.0).abs() < 1e-9);
    }

    #[test]
    fn power_profile_sums_overlaps() {
        let loads = vec![
            Load {
                id: "a".into(),
                interval: Interval::raw(100, 300),
                energy_rate: 0.0,
                peak: 300.0,
            },
            Load {
                id: "b".into(),
                interval: Interval::raw(200, 400),
                energy_rate: 0.0,
                peak: 200.0,
            },
        ];
        let p = power_profile(&cfg(), &loads);
        assert_eq!(
            p.steps,
            vec![(0, 0.0), (100, 300.0), (200, 500.0), (300, 200.0), (400, 0.0)]
        );
        assert_eq!(p.value_at(250), 500.0);
        assert_eq!(p.max_over(Interval::raw(0, 150)), (100, 300.0));
        assert_eq!(p.max_over(Interval::raw(350, 1000)).1, 200.0);
    }
}
