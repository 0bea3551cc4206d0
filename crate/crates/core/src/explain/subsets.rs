//! Minimal sets of constraint kinds whose valid intervals cannot intersect.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::ExplainError;
use crate::interval::{Duration, Interval, IntervalSet};
use crate::model::ConstraintKind;

pub type FailingSubsets = Vec<BTreeSet<ConstraintKind>>;

struct Search<'a> {
    kinds: Vec<(ConstraintKind, &'a IntervalSet)>,
    /// Intersection of the plan-bounds windows with the kinds in a bitmask.
    memo: HashMap<u32, IntervalSet>,
    failed: Vec<u32>,
}

impl Search<'_> {
    /// Visits every combination of `depth + 1` more kinds taken from
    /// `kinds[from..]`, recording the empty intersections at the last level.
    fn visit(&mut self, prev: u32, from: usize, depth: usize) {
        for ind in from..self.kinds.len() {
            let mask = prev | (1 << ind);
            let empty = self.intersection(prev, ind, mask).is_empty();
            if empty && depth == 0 {
                self.failed.push(mask);
            } else if depth > 0 {
                self.visit(mask, ind + 1, depth - 1);
            }
        }
    }

    fn intersection(&mut self, prev: u32, ind: usize, mask: u32) -> &IntervalSet {
        if !self.memo.contains_key(&mask) {
            let joined = self.memo[&prev].intersect(self.kinds[ind].1);
            self.memo.insert(mask, joined);
        }
        &self.memo[&mask]
    }
}

/// Iterative deepening over subset size: singletons first, then pairs, and
/// so on, stopping at the first size where some subset has an empty
/// intersection. Every subset of that size with an empty intersection is
/// returned, so all results are minimal and share one cardinality.
///
/// Only the kinds the activity actually carries should be passed in; each
/// kind's map entry is already the intersection of its individual
/// constraints.
pub fn find_failing_subsets(
    valid: &BTreeMap<ConstraintKind, IntervalSet>,
    duration: Duration,
    plan_bounds: Interval,
) -> Result<FailingSubsets, ExplainError> {
    let base = IntervalSet::single(plan_bounds).occupancy_to_start_windows(duration);
    let all = valid.values().fold(base.clone(), |acc, v| acc.intersect(v));
    if !all.is_empty() {
        return Err(ExplainError::NotPhase1Failure);
    }

    let mut search = Search {
        kinds: valid.iter().map(|(k, v)| (*k, v)).collect(),
        memo: HashMap::from([(0u32, base)]),
        failed: Vec::new(),
    };
    let mut depth = 0;
    while search.failed.is_empty() && depth < search.kinds.len() {
        search.visit(0, 0, depth);
        depth += 1;
    }

    Ok(search
        .failed
        .iter()
        .map(|mask| {
            search
                .kinds
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, (k, _))| *k)
                .collect()
        })
        .collect())
}
