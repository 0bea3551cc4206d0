use super::Phase2Reason;
use crate::interval::{Interval, IntervalSet};
use crate::model::PlanConfig;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AwakeFailure {
    /// The span that must be awake is not inside the plan.
    OutsidePlanBounds,
    Violations(Vec<Phase2Reason>),
}

/// Adds an awake block covering `needed` plus wakeup and shutdown, merging it
/// with blocks it overlaps or touches. A resulting sleep gap shorter than
/// `c_sleep_min`, or awake block shorter than `c_awake_min`, fails.
pub fn place_awake(
    awake: &IntervalSet,
    needed: Interval,
    cfg: &PlanConfig,
) -> Result<IntervalSet, AwakeFailure> {
    if !cfg.plan_bounds.contains_interval(&needed) {
        return Err(AwakeFailure::OutsidePlanBounds);
    }
    let block = Interval::raw(
        (needed.start - cfg.wakeup_dur).max(cfg.plan_start()),
        (needed.end + cfg.shutdown_dur).min(cfg.plan_end()),
    );
    let merged = awake.union(&IntervalSet::single(block));
    let blocks = merged.intervals();
    let idx = blocks
        .iter()
        .position(|b| b.contains_interval(&block))
        .expect("merged set covers the new block");
    let host = blocks[idx];

    let mut reasons = Vec::new();
    let gap_before = idx.checked_sub(1).map(|i| host.start - blocks[i].end);
    let gap_after = blocks.get(idx + 1).map(|next| next.start - host.end);
    if [gap_before, gap_after]
        .into_iter()
        .flatten()
        .any(|gap| gap > 0 && gap < cfg.c_sleep_min)
    {
        reasons.push(Phase2Reason::MinSleepViolation);
    }
    if host.len() < cfg.c_awake_min {
        reasons.push(Phase2Reason::MinAwakeViolation);
    }
    if reasons.is_empty() {
        Ok(merged)
    } else {
        Err(AwakeFailure::Violations(reasons))
    }
}
