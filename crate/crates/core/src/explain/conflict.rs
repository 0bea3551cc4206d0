//! Entities behind each failing constraint kind.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::model::{Activity, ConstraintKind, PlanConfig, UhfMode};
use crate::scheduler::valid::state_effect_conflicts;
use crate::scheduler::Schedule;

/// A resource, state variable, parent or pass type that ties the failed
/// activity to activities already in the partial schedule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConflictEntity {
    pub kind: ConstraintKind,
    pub name: String,
    /// Placed activities on the other side of the conflict.
    pub activities: Vec<String>,
    /// For state requirements: placed activities whose effect sets the
    /// required value. Empty when nothing earlier can satisfy it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub satisfiers: Option<Vec<String>>,
}

impl ConflictEntity {
    fn new(kind: ConstraintKind, name: impl Into<String>, activities: Vec<String>) -> Self {
        Self {
            kind,
            name: name.into(),
            activities,
            satisfiers: None,
        }
    }
}

/// Entities for every kind appearing in at least one failing subset.
pub fn conflict_details(
    act: &Activity,
    subsets: &[BTreeSet<ConstraintKind>],
    partial: &Schedule,
    cfg: &PlanConfig,
) -> Vec<ConflictEntity> {
    let kinds: BTreeSet<ConstraintKind> = subsets.iter().flatten().copied().collect();
    let placed_ids = |pred: &dyn Fn(&Activity) -> bool| -> Vec<String> {
        partial
            .placed()
            .iter()
            .filter(|p| pred(&p.activity))
            .map(|p| p.activity.id.clone())
            .collect()
    };

    let mut out = Vec::new();
    for kind in kinds {
        match kind {
            ConstraintKind::Execution => {}
            ConstraintKind::Dependency => {
                for parent in &act.dependencies {
                    let placed: Vec<String> = partial.get(parent).map(|p| p.activity.id.clone()).into_iter().collect();
                    out.push(ConflictEntity::new(kind, parent.clone(), placed));
                }
            }
            ConstraintKind::UnitResource => {
                for res in &act.unit_resources {
                    let holders = placed_ids(&|a| a.unit_resources.contains(res));
                    if !holders.is_empty() {
                        out.push(ConflictEntity::new(kind, res.clone(), holders));
                    }
                }
            }
            ConstraintKind::StateRequirement => {
                for (var, want) in &act.state_requirements {
                    let mut entity = ConflictEntity::new(
                        kind,
                        format!("{var}={want}"),
                        placed_ids(&|a| a.state_effects.get(var).is_some_and(|v| v != want)),
                    );
                    entity.satisfiers = Some(placed_ids(&|a| a.state_effects.get(var) == Some(want)));
                    out.push(entity);
                }
            }
            ConstraintKind::StateEffect => {
                let mut by_var: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
                for c in state_effect_conflicts(act, partial, cfg) {
                    by_var.entry(c.var).or_default().insert(c.blocked);
                }
                for (var, blocked) in by_var {
                    out.push(ConflictEntity::new(kind, var, blocked.into_iter().collect()));
                }
            }
            ConstraintKind::DataVolume => {
                out.push(ConflictEntity::new(kind, "data_volume", placed_ids(&|a| a.data_rate > 0.0)));
            }
            ConstraintKind::UhfInteraction => {
                for rule in &act.uhf_interactions {
                    let passes = placed_ids(&|a| a.uhf_type.as_deref() == Some(rule.uhf_type.as_str()));
                    let name = match rule.mode {
                        UhfMode::RequiredConcurrent => format!("{} (required)", rule.uhf_type),
                        UhfMode::ForbiddenConcurrent => format!("{} (forbidden)", rule.uhf_type),
                    };
                    out.push(ConflictEntity::new(kind, name, passes));
                }
            }
        }
    }
    out
}
