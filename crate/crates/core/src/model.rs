//! Plan inputs: activities with their constraints and the plan-wide config.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Issue, PlanError};
use crate::interval::{Duration, Interval, IntervalSet, TimePoint};

/// Length of one time-of-day cycle in seconds. The plan epoch is midnight.
pub const DAY_SECONDS: i64 = 86_400;

/// Allowed start window: the activity may start at any second in
/// `[start, end]` (both inclusive).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: TimePoint,
    #[serde(default)]
    pub preferred: Option<TimePoint>,
    pub end: TimePoint,
}

impl Window {
    pub fn new(start: TimePoint, end: TimePoint) -> Self {
        Self {
            start,
            preferred: None,
            end,
        }
    }

    /// Preferred start, defaulting to the window start.
    pub fn preferred_start(&self) -> TimePoint {
        self.preferred.unwrap_or(self.start)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UhfMode {
    RequiredConcurrent,
    ForbiddenConcurrent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UhfInteraction {
    pub uhf_type: String,
    pub mode: UhfMode,
}

/// One schedulable task and all of its constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub id: String,
    /// Lower number means scheduled earlier.
    pub priority: u32,
    pub duration: Duration,
    #[serde(default)]
    pub unit_resources: BTreeSet<String>,
    /// Average draw in watts while executing.
    #[serde(default)]
    pub energy_rate: f64,
    /// Bits per second; negative for downlinks.
    #[serde(default)]
    pub data_rate: f64,
    /// Maximum instantaneous draw in watts.
    #[serde(default)]
    pub peak_power: f64,
    #[serde(default)]
    pub nondepletable: BTreeMap<String, f64>,
    #[serde(default)]
    pub windows: Vec<Window>,
    #[serde(default)]
    pub dependencies: BTreeSet<String>,
    #[serde(default)]
    pub state_requirements: BTreeMap<String, String>,
    #[serde(default)]
    pub state_effects: BTreeMap<String, String>,
    #[serde(default)]
    pub uhf_interactions: Vec<UhfInteraction>,
    /// Marks this activity itself as a UHF pass of the given type.
    #[serde(default)]
    pub uhf_type: Option<String>,
    /// Instruments that need preheat and maintenance heating.
    #[serde(default)]
    pub thermal: Vec<String>,
}

impl Activity {
    pub fn new(id: impl Into<String>, priority: u32, duration: Duration) -> Self {
        Self {
            id: id.into(),
            priority,
            duration,
            unit_resources: BTreeSet::new(),
            energy_rate: 0.0,
            data_rate: 0.0,
            peak_power: 0.0,
            nondepletable: BTreeMap::new(),
            windows: Vec::new(),
            dependencies: BTreeSet::new(),
            state_requirements: BTreeMap::new(),
            state_effects: BTreeMap::new(),
            uhf_interactions: Vec::new(),
            uhf_type: None,
            thermal: Vec::new(),
        }
    }

    pub fn interval_at(&self, start: TimePoint) -> Interval {
        Interval::raw(start, start + self.duration)
    }

    /// Whether this activity carries a constraint of the given kind at all.
    pub fn has_constraint(&self, kind: ConstraintKind) -> bool {
        match kind {
            ConstraintKind::Execution => true,
            ConstraintKind::Dependency => !self.dependencies.is_empty(),
            ConstraintKind::UnitResource => !self.unit_resources.is_empty(),
            ConstraintKind::StateRequirement => !self.state_requirements.is_empty(),
            ConstraintKind::StateEffect => !self.state_effects.is_empty(),
            ConstraintKind::DataVolume => self.data_rate != 0.0,
            ConstraintKind::UhfInteraction => !self.uhf_interactions.is_empty(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThermalBin {
    /// Time-of-day span, in seconds after midnight.
    pub time_of_day: Interval,
    pub preheat: Duration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalTable {
    pub bins: Vec<ThermalBin>,
    pub operability_windows: IntervalSet,
    pub preheat_power: f64,
    pub maintenance_power: f64,
}

impl ThermalTable {
    /// Preheat duration for an activity starting at `t`.
    pub fn preheat_for(&self, t: TimePoint) -> Option<Duration> {
        let tod = t.rem_euclid(DAY_SECONDS);
        self.bins
            .iter()
            .find(|b| b.time_of_day.contains(tod))
            .map(|b| b.preheat)
    }
}

/// Plan-wide constraints and the battery/power model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanConfig {
    pub plan_bounds: Interval,
    /// Watt-hours.
    pub initial_soc: f64,
    pub soc_max: f64,
    pub c_soc_min: f64,
    /// Watts.
    pub c_peak_power_max: f64,
    pub c_sleep_min: Duration,
    pub c_awake_min: Duration,
    pub wakeup_dur: Duration,
    pub shutdown_dur: Duration,
    pub gen_power: f64,
    pub awake_idle_power: f64,
    pub sleep_power: f64,
    /// Bits.
    pub data_capacity: f64,
    pub initial_states: BTreeMap<String, String>,
    pub nondepletable_capacities: BTreeMap<String, f64>,
    pub thermal_tables: BTreeMap<String, ThermalTable>,
    /// When set, preheats also keep the CPU awake.
    pub heaters_require_awake: bool,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            plan_bounds: Interval::raw(0, DAY_SECONDS),
            initial_soc: 1000.0,
            soc_max: 1000.0,
            c_soc_min: 200.0,
            c_peak_power_max: 1000.0,
            c_sleep_min: 600,
            c_awake_min: 0,
            wakeup_dur: 60,
            shutdown_dur: 60,
            gen_power: 100.0,
            awake_idle_power: 150.0,
            sleep_power: 20.0,
            data_capacity: 1.0e12,
            initial_states: BTreeMap::new(),
            nondepletable_capacities: BTreeMap::new(),
            thermal_tables: BTreeMap::new(),
            heaters_require_awake: false,
        }
    }
}

impl PlanConfig {
    pub fn plan_start(&self) -> TimePoint {
        self.plan_bounds.start
    }

    pub fn plan_end(&self) -> TimePoint {
        self.plan_bounds.end
    }

    /// Start times at which an activity of duration `d` fits in the plan.
    pub fn start_windows(&self, d: Duration) -> IntervalSet {
        IntervalSet::single(self.plan_bounds).occupancy_to_start_windows(d)
    }

    fn validate(&self, issues: &mut Vec<Issue>) {
        let p = "$.config";
        if self.awake_idle_power <= self.gen_power {
            issues.push(Issue::new(
                format!("{p}.awake_idle_power"),
                "awake idle power must exceed generated power",
            ));
        }
        if self.gen_power <= self.sleep_power {
            issues.push(Issue::new(
                format!("{p}.gen_power"),
                "generated power must exceed sleep power",
            ));
        }
        if !(self.c_soc_min < self.initial_soc && self.initial_soc <= self.soc_max) {
            issues.push(Issue::new(
                format!("{p}.initial_soc"),
                "require c_soc_min < initial_soc <= soc_max",
            ));
        }
        for (name, v) in [
            ("c_sleep_min", self.c_sleep_min),
            ("c_awake_min", self.c_awake_min),
            ("wakeup_dur", self.wakeup_dur),
            ("shutdown_dur", self.shutdown_dur),
        ] {
            if v < 0 {
                issues.push(Issue::new(format!("{p}.{name}"), "must be non-negative"));
            }
        }
        if self.sleep_power < 0.0 {
            issues.push(Issue::new(format!("{p}.sleep_power"), "must be non-negative"));
        }
        for (name, table) in &self.thermal_tables {
            let tp = format!("{p}.thermal_tables.{name}");
            let mut bins: Vec<&ThermalBin> = table.bins.iter().collect();
            bins.sort_by_key(|b| b.time_of_day.start);
            let mut cursor = 0;
            let mut ok = true;
            for b in &bins {
                if b.time_of_day.start != cursor || b.preheat < 0 {
                    ok = false;
                }
                cursor = b.time_of_day.end;
            }
            if !ok || cursor != DAY_SECONDS {
                issues.push(Issue::new(
                    format!("{tp}.bins"),
                    "time-of-day bins must partition [0, 86400) with non-negative preheats",
                ));
            }
            if table.preheat_power < 0.0 || table.maintenance_power < 0.0 {
                issues.push(Issue::new(tp, "heater powers must be non-negative"));
            }
        }
    }
}

/// The seven constraint kinds whose valid intervals are intersected in the
/// first scheduling phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Execution,
    Dependency,
    UnitResource,
    StateRequirement,
    StateEffect,
    DataVolume,
    UhfInteraction,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 7] = [
        ConstraintKind::Execution,
        ConstraintKind::Dependency,
        ConstraintKind::UnitResource,
        ConstraintKind::StateRequirement,
        ConstraintKind::StateEffect,
        ConstraintKind::DataVolume,
        ConstraintKind::UhfInteraction,
    ];

    /// Stable string tag used in every file format.
    pub fn tag(self) -> &'static str {
        match self {
            ConstraintKind::Execution => "execution",
            ConstraintKind::Dependency => "dependency",
            ConstraintKind::UnitResource => "unit_resource",
            ConstraintKind::StateRequirement => "state_requirement",
            ConstraintKind::StateEffect => "state_effect",
            ConstraintKind::DataVolume => "data_volume",
            ConstraintKind::UhfInteraction => "uhf_interaction",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ConstraintKind::Execution => "execution",
            ConstraintKind::Dependency => "dependency",
            ConstraintKind::UnitResource => "unit resource",
            ConstraintKind::StateRequirement => "state requirement",
            ConstraintKind::StateEffect => "state effect",
            ConstraintKind::DataVolume => "data volume",
            ConstraintKind::UhfInteraction => "UHF interaction",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ConstraintKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConstraintKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| format!("unknown constraint kind `{s}`"))
    }
}

/// A validated plan. Activities are held in priority order, so index `i`
/// is scheduling step `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    config: PlanConfig,
    activities: Vec<Activity>,
    index: HashMap<String, usize>,
}

impl Plan {
    pub fn new(config: PlanConfig, activities: Vec<Activity>) -> Result<Self, PlanError> {
        let mut issues = Vec::new();
        config.validate(&mut issues);
        validate_activities(&config, &activities, &mut issues);
        if !issues.is_empty() {
            return Err(PlanError { issues });
        }
        Ok(Self::new_unchecked(config, activities))
    }

    /// Builds a plan from activities already known to be consistent.
    pub(crate) fn new_unchecked(config: PlanConfig, mut activities: Vec<Activity>) -> Self {
        activities.sort_by_key(|a| a.priority);
        let index = activities
            .iter()
            .enumerate()
            .map(|(i, a)| (a.id.clone(), i))
            .collect();
        Self {
            config,
            activities,
            index,
        }
    }

    pub fn config(&self) -> &PlanConfig {
        &self.config
    }

    /// Activities in priority order.
    pub fn activities(&self) -> &[Activity] {
        &self.activities
    }

    pub fn get(&self, id: &str) -> Option<&Activity> {
        self.index.get(id).map(|&i| &self.activities[i])
    }

    /// 1-based scheduling step of an activity.
    pub fn step_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&i| i + 1)
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn into_parts(self) -> (PlanConfig, Vec<Activity>) {
        (self.config, self.activities)
    }

    /// Returns a copy of this plan without the given activity.
    pub fn without(&self, id: &str) -> Plan {
        let acts = self
            .activities
            .iter()
            .filter(|a| a.id != id)
            .cloned()
            .collect();
        Plan::new_unchecked(self.config.clone(), acts)
    }
}

fn validate_activities(cfg: &PlanConfig, acts: &[Activity], issues: &mut Vec<Issue>) {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut priorities: HashMap<u32, usize> = HashMap::new();
    for (i, a) in acts.iter().enumerate() {
        let p = format!("$.activities[{i}]");
        if a.id.is_empty() {
            issues.push(Issue::new(format!("{p}.id"), "id must not be empty"));
        }
        if let Some(prev) = ids.insert(&a.id, i) {
            issues.push(Issue::new(
                format!("{p}.id"),
                format!("duplicate id `{}` (also at activities[{prev}])", a.id),
            ));
        }
        if a.priority == 0 {
            issues.push(Issue::new(format!("{p}.priority"), "priority must be positive"));
        }
        if let Some(prev) = priorities.insert(a.priority, i) {
            issues.push(Issue::new(
                format!("{p}.priority"),
                format!("duplicate priority {} (also at activities[{prev}])", a.priority),
            ));
        }
        if a.duration <= 0 {
            issues.push(Issue::new(format!("{p}.duration"), "duration must be positive"));
        }
        for (w, win) in a.windows.iter().enumerate() {
            let pref = win.preferred_start();
            if !(win.start <= pref && pref <= win.end) {
                issues.push(Issue::new(
                    format!("{p}.windows[{w}]"),
                    "window must satisfy start <= preferred <= end",
                ));
            }
        }
        for (name, v) in [
            ("energy_rate", a.energy_rate),
            ("peak_power", a.peak_power),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                issues.push(Issue::new(format!("{p}.{name}"), "must be finite and non-negative"));
            }
        }
        if !a.data_rate.is_finite() {
            issues.push(Issue::new(format!("{p}.data_rate"), "must be finite"));
        }
        for name in a.nondepletable.keys() {
            if !cfg.nondepletable_capacities.contains_key(name) {
                issues.push(Issue::new(
                    format!("{p}.nondepletable.{name}"),
                    format!("unknown non-depletable resource `{name}`"),
                ));
            }
        }
        for (t, instrument) in a.thermal.iter().enumerate() {
            if !cfg.thermal_tables.contains_key(instrument) {
                issues.push(Issue::new(
                    format!("{p}.thermal[{t}]"),
                    format!("unknown instrument `{instrument}`"),
                ));
            }
        }
    }

    let known_states: BTreeSet<&str> = cfg
        .initial_states
        .keys()
        .map(String::as_str)
        .chain(acts.iter().flat_map(|a| a.state_effects.keys().map(String::as_str)))
        .collect();

    for (i, a) in acts.iter().enumerate() {
        let p = format!("$.activities[{i}]");
        for (d, dep) in a.dependencies.iter().enumerate() {
            let path = format!("{p}.dependencies[{d}]");
            match ids.get(dep.as_str()) {
                None => issues.push(Issue::new(path, format!("unknown activity `{dep}`"))),
                Some(&j) if acts[j].priority >= a.priority => issues.push(Issue::new(
                    path,
                    format!("dependency `{dep}` must have a higher scheduling priority"),
                )),
                Some(_) => {}
            }
        }
        for var in a.state_requirements.keys() {
            if !known_states.contains(var.as_str()) {
                issues.push(Issue::new(
                    format!("{p}.state_requirements.{var}"),
                    format!("unknown state variable `{var}`"),
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(id: &str, p: u32) -> Activity {
        Activity::new(id, p, 100)
    }

    #[test]
    fn sorts_by_priority() {
        let plan = Plan::new(PlanConfig::default(), vec![act("b", 2), act("a", 1)]).unwrap();
        assert_eq!(plan.activities()[0].id, "a");
        assert_eq!(plan.step_of("b"), Some(2));
    }

    #[test]
    fn rejects_duplicate_priority_and_bad_dependency() {
        let mut b = act("b", 1);
        b.dependencies.insert("a".into());
        b.dependencies.insert("ghost".into());
        let err = Plan::new(PlanConfig::default(), vec![act("a", 1), b]).unwrap_err();
        let paths: Vec<&str> = err.issues.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"$.activities[1].priority"));
        assert!(paths.contains(&"$.activities[1].dependencies[0]"));
        assert!(paths.contains(&"$.activities[1].dependencies[1]"));
    }

    #[test]
    fn rejects_bad_window_and_unknown_state() {
        let mut a = act("a", 1);
        a.windows.push(Window {
            start: 10,
            preferred: Some(5),
            end: 20,
        });
        a.state_requirements.insert("drill".into(), "stowed".into());
        let err = Plan::new(PlanConfig::default(), vec![a]).unwrap_err();
        assert_eq!(err.issues.len(), 2);
    }

    #[test]
    fn rejects_inconsistent_power_model() {
        let cfg = PlanConfig {
            awake_idle_power: 50.0,
            ..PlanConfig::default()
        };
        assert!(Plan::new(cfg, vec![]).is_err());
    }

    #[test]
    fn preheat_lookup_uses_time_of_day() {
        let table = ThermalTable {
            bins: vec![
                ThermalBin {
                    time_of_day: Interval::raw(0, 43_200),
                    preheat: 1800,
                },
                ThermalBin {
                    time_of_day: Interval::raw(43_200, DAY_SECONDS),
                    preheat: 600,
                },
            ],
            operability_windows: IntervalSet::empty(),
            preheat_power: 10.0,
            maintenance_power: 5.0,
        };
        assert_eq!(table.preheat_for(100), Some(1800));
        assert_eq!(table.preheat_for(50_000), Some(600));
        assert_eq!(table.preheat_for(DAY_SECONDS + 100), Some(1800));
    }

    #[test]
    fn kind_tags_round_trip() {
        for k in ConstraintKind::ALL {
            assert_eq!(k.tag().parse::<ConstraintKind>().unwrap(), k);
        }
    }
}
