//! Half-open integer-second intervals and canonical interval sets.
//!
//! Every time value in the crate is an integer number of seconds since the
//! plan epoch. An [`IntervalSet`] is always kept sorted, pairwise disjoint and
//! with touching neighbours merged, so two sets are equal exactly when they
//! cover the same points.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::IntervalError;

/// Seconds since the plan epoch.
pub type TimePoint = i64;
/// Non-negative number of seconds.
pub type Duration = i64;

/// Half-open interval `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct Interval {
    pub start: TimePoint,
    pub end: TimePoint,
}

impl Interval {
    pub fn new(start: TimePoint, end: TimePoint) -> Result<Self, IntervalError> {
        if start < end {
            Ok(Self { start, end })
        } else {
            Err(IntervalError::Empty { start, end })
        }
    }

    /// Builds an interval without checking `start < end`.
    ///
    /// Callers must uphold the invariant themselves.
    pub(crate) const fn raw(start: TimePoint, end: TimePoint) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> Duration {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn contains(&self, t: TimePoint) -> bool {
        self.start <= t && t < self.end
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Length of the overlap with `other`, zero when disjoint.
    pub fn overlap_len(&self, other: &Interval) -> Duration {
        (self.end.min(other.end) - self.start.max(other.start)).max(0)
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start < end).then_some(Interval { start, end })
    }
}

impl TryFrom<[i64; 2]> for Interval {
    type Error = IntervalError;

    fn try_from([start, end]: [i64; 2]) -> Result<Self, Self::Error> {
        Interval::new(start, end)
    }
}

impl From<Interval> for [i64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.start, iv.end]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Sorted, disjoint, non-touching set of half-open intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(iv: Interval) -> Self {
        Self { intervals: vec![iv] }
    }

    /// Sorts and merges arbitrary intervals into canonical form.
    pub fn normalize(intervals: impl IntoIterator<Item = Interval>) -> Result<Self, IntervalError> {
        let mut v: Vec<Interval> = intervals.into_iter().collect();
        if let Some(bad) = v.iter().find(|iv| iv.is_empty()) {
            return Err(IntervalError::Empty {
                start: bad.start,
                end: bad.end,
            });
        }
        v.sort_unstable();
        Ok(Self::merge_sorted(v))
    }

    /// Same as [`normalize`](Self::normalize) but silently drops empty
    /// intervals instead of rejecting them.
    pub fn from_spans(spans: impl IntoIterator<Item = (TimePoint, TimePoint)>) -> Self {
        let mut v: Vec<Interval> = spans
            .into_iter()
            .filter(|(s, e)| s < e)
            .map(|(s, e)| Interval::raw(s, e))
            .collect();
        v.sort_unstable();
        Self::merge_sorted(v)
    }

    fn merge_sorted(sorted: Vec<Interval>) -> Self {
        let mut out: Vec<Interval> = Vec::with_capacity(sorted.len());
        for iv in sorted {
            match out.last_mut() {
                Some(last) if iv.start <= last.end => last.end = last.end.max(iv.end),
                _ => out.push(iv),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.intervals.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    /// Total number of seconds covered.
    pub fn measure(&self) -> Duration {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn first_point(&self) -> Option<TimePoint> {
        self.intervals.first().map(|iv| iv.start)
    }

    pub fn contains(&self, t: TimePoint) -> bool {
        // First interval whose end is past t.
        let idx = self.intervals.partition_point(|iv| iv.end <= t);
        self.intervals.get(idx).is_some_and(|iv| iv.start <= t)
    }

    /// True when `iv` lies entirely inside a single member interval.
    pub fn covers(&self, iv: &Interval) -> bool {
        let idx = self.intervals.partition_point(|m| m.end <= iv.start);
        self.intervals
            .get(idx)
            .is_some_and(|m| m.contains_interval(iv))
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.intervals, &other.intervals);
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if let Some(x) = a[i].intersection(&b[j]) {
                out.push(x);
            }
            if a[i].end < b[j].end {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Pieces of canonical inputs never touch each other.
        IntervalSet { intervals: out }
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.intervals);
        v.extend_from_slice(&other.intervals);
        v.sort_unstable();
        Self::merge_sorted(v)
    }

    pub fn subtract(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let b = &other.intervals;
        let mut j = 0;
        for iv in &self.intervals {
            let mut cur = iv.start;
            while j < b.len() && b[j].end <= cur {
                j += 1;
            }
            let mut k = j;
            while k < b.len() && b[k].start < iv.end {
                if b[k].start > cur {
                    out.push(Interval::raw(cur, b[k].start));
                }
                cur = cur.max(b[k].end);
                k += 1;
            }
            if cur < iv.end {
                out.push(Interval::raw(cur, iv.end));
            }
        }
        IntervalSet { intervals: out }
    }

    /// Converts "the constraint holds over these spans" into "an activity of
    /// duration `d` may start here": `s` is kept iff `[s, s + d)` fits inside
    /// one member interval.
    pub fn occupancy_to_start_windows(&self, d: Duration) -> IntervalSet {
        debug_assert!(d > 0);
        let intervals = self
            .intervals
            .iter()
            .filter(|iv| iv.len() >= d)
            .map(|iv| Interval::raw(iv.start, iv.end - d + 1))
            .collect();
        IntervalSet { intervals }
    }

    /// Shifts every interval by `delta` seconds.
    pub fn shift(&self, delta: i64) -> IntervalSet {
        IntervalSet {
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval::raw(iv.start + delta, iv.end + delta))
                .collect(),
        }
    }
}

impl TryFrom<Vec<Interval>> for IntervalSet {
    type Error = IntervalError;

    fn try_from(v: Vec<Interval>) -> Result<Self, Self::Error> {
        IntervalSet::normalize(v)
    }
}

impl From<IntervalSet> for Vec<Interval> {
    fn from(s: IntervalSet) -> Self {
        s.intervals
    }
}

impl From<Interval> for IntervalSet {
    fn from(iv: Interval) -> Self {
        IntervalSet::single(iv)
    }
}

impl<'a> IntoIterator for &'a IntervalSet {
    type Item = &'a Interval;
    type IntoIter = std::slice::Iter<'a, Interval>;

    fn into_iter(self) -> Self::IntoIter {
        self.intervals.iter()
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{iv}")?;
        }
        f.write_str("}")
    }
}

/// Free-function forms used throughout the scheduler.
pub fn normalize(intervals: impl IntoIterator<Item = Interval>) -> Result<IntervalSet, IntervalError> {
    IntervalSet::normalize(intervals)
}

pub fn intersect(a: &IntervalSet, b: &IntervalSet) -> IntervalSet {
    a.intersect(b)
}

pub fn subtract(a: &IntervalSet, b: &IntervalSet) -> IntervalSet {
    a.subtract(b)
}

pub fn occupancy_to_start_windows(occ: &IntervalSet, d: Duration) -> IntervalSet {
    occ.occupancy_to_start_windows(d)
}
