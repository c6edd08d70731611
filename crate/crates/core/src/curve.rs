//! Univariate polygonal curves and the interval arithmetic used to build
//! candidate grids.
//!
//! A [`Curve`] stores the canonical representative of its Fréchet
//! equivalence class: the alternating sequence of strict local extrema.
//! Two raw series with the same extrema sequence are at Fréchet distance 0,
//! so collapsing to this form loses nothing.

use std::fmt;

use crate::error::{FrescoError, Result};

/// A normalized univariate curve.
///
/// Invariants: at least one vertex, no two consecutive values equal, and
/// every interior vertex is a strict local extremum of its neighbours.
#[derive(Clone, PartialEq)]
pub struct Curve {
    values: Vec<f64>,
}

impl Curve {
    /// Normalizes `raw` into its canonical form. See [`normalize`].
    pub fn new(raw: &[f64]) -> Result<Self> {
        normalize(raw)
    }

    /// Builds a curve from values that are already alternating extrema.
    ///
    /// Only checked in debug builds; callers inside the crate use it for
    /// vertex subsets that are alternating by construction.
    pub(crate) fn from_normalized(values: Vec<f64>) -> Self {
        debug_assert!(is_normalized(&values), "not normalized: {values:?}");
        Curve { values }
    }

    /// [`Curve::from_normalized`] for signature vertex subsets, which can
    /// only degenerate when both endpoints of a two-vertex subset tie.
    pub(crate) fn from_signature(mut values: Vec<f64>) -> Self {
        if values.len() == 2 && values[0] == values[1] {
            values.pop();
        }
        Self::from_normalized(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of vertices (the curve's complexity).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a curve has at least one vertex.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Smallest and largest vertex value.
    pub fn value_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve{:?}", self.values)
    }
}

/// True iff `x` lies in the closed interval spanned by `a` and `b`.
#[inline]
pub(crate) fn between(x: f64, a: f64, b: f64) -> bool {
    a.min(b) <= x && x <= a.max(b)
}

fn is_normalized(values: &[f64]) -> bool {
    if values.is_empty() {
        return false;
    }
    values.windows(2).all(|w| w[0] != w[1])
        && values.windows(3).all(|w| !between(w[1], w[0], w[2]))
}

/// Reduces a raw series to its alternating extrema.
///
/// Repeated values are dropped, and any interior vertex lying in the closed
/// interval spanned by its neighbours is removed, cascading until every
/// interior vertex is a strict local extremum.
pub fn normalize(raw: &[f64]) -> Result<Curve> {
    if raw.is_empty() {
        return Err(FrescoError::invalid("a curve needs at least one value"));
    }
    if let Some(pos) = raw.iter().position(|v| !v.is_finite()) {
        return Err(FrescoError::invalid(format!(
            "non-finite value {} at position {pos}",
            raw[pos]
        )));
    }
    let mut out: Vec<f64> = Vec::with_capacity(raw.len());
    for &x in raw {
        loop {
            match out.as_slice() {
                [.., last] if *last == x => break,
                [.., prev, last] if between(*last, *prev, x) => {
                    out.pop();
                }
                _ => {
                    out.push(x);
                    break;
                }
            }
        }
    }
    Ok(Curve { values: out })
}

/// Concatenates two curves sharing an endpoint value.
pub fn concat(a: &Curve, b: &Curve) -> Result<Curve> {
    if a.last() != b.first() {
        return Err(FrescoError::invalid(format!(
            "cannot concatenate: {} != {}",
            a.last(),
            b.first()
        )));
    }
    let mut raw = a.values.clone();
    raw.extend_from_slice(&b.values[1..]);
    normalize(&raw)
}

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A finite union of disjoint closed intervals, sorted by lower end.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl IntervalUnion {
    /// Builds the union of arbitrary closed intervals; overlapping or
    /// touching intervals are merged.
    pub fn from_intervals(mut raw: Vec<Interval>) -> Self {
        raw.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(raw.len());
        for iv in raw {
            match merged.last_mut() {
                Some(cur) if iv.lo <= cur.hi => cur.hi = cur.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        IntervalUnion { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Number of maximal intervals.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure of the union.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.hi < x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
    }
}

/// Union of the ranges `[c - r, c + r]`.
pub fn union_of_ranges(centers_radii: &[(f64, f64)]) -> Result<IntervalUnion> {
    let mut raw = Vec::with_capacity(centers_radii.len());
    for &(c, r) in centers_radii {
        if !(r >= 0.0) || !c.is_finite() || !r.is_finite() {
            return Err(FrescoError::invalid(format!(
                "range ({c}, {r}) needs a finite center and non-negative radius"
            )));
        }
        raw.push(Interval { lo: c - r, hi: c + r });
    }
    Ok(IntervalUnion::from_intervals(raw))
}

/// The points `lo, lo + β, lo + 2β, …, hi` of every interval of a union,
/// indexable without materializing them.
///
/// Grid points closer than `1e-9·β` to an interval's upper end are dropped
/// in favour of the endpoint itself.
#[derive(Debug, Clone)]
pub struct Grid {
    intervals: Vec<Interval>,
    beta: f64,
    // offsets[i] = number of grid points in intervals[..i]
    offsets: Vec<u64>,
}

impl Grid {
    pub fn new(union: &IntervalUnion, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(FrescoError::invalid(format!(
                "grid resolution must be positive, got {beta}"
            )));
        }
        let tol = 1e-9 * beta;
        let mut offsets = Vec::with_capacity(union.len() + 1);
        let mut total: u64 = 0;
        offsets.push(0);
        for iv in union.intervals() {
            total += Self::count_in(iv, beta, tol);
            offsets.push(total);
        }
        Ok(Grid {
            intervals: union.intervals().to_vec(),
            beta,
            offsets,
        })
    }

    fn steps_in(iv: &Interval, beta: f64, tol: f64) -> u64 {
        let span = iv.hi - iv.lo;
        if span <= tol {
            0
        } else {
            ((span - tol) / beta).ceil() as u64
        }
    }

    fn count_in(iv: &Interval, beta: f64, tol: f64) -> u64 {
        Self::steps_in(iv, beta, tol) + 1
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> u64 {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `idx`-th grid point in increasing order.
    pub fn get(&self, idx: u64) -> f64 {
        assert!(idx < self.len(), "grid index {idx} out of range");
        let slot = self.offsets.partition_point(|&o| o <= idx) - 1;
        let iv = &self.intervals[slot];
        let k = idx - self.offsets[slot];
        let steps = self.offsets[slot + 1] - self.offsets[slot] - 1;
        if k == steps {
            iv.hi
        } else {
            iv.lo + k as f64 * self.beta
        }
    }

    /// Index of the first grid point `>= x` (equals `len()` if none).
    pub fn lower_bound(&self, x: f64) -> u64 {
        let (mut lo, mut hi) = (0u64, self.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.get(mid) < x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Index of the first grid point `> x` (equals `len()` if none).
    pub fn upper_bound(&self, x: f64) -> u64 {
        let (mut lo, mut hi) = (0u64, self.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.get(mid) <= x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest(&self, x: f64) -> u64 {
        let n = self.len();
        assert!(n > 0, "empty grid");
        let i = self.lower_bound(x);
        if i == 0 {
            return 0;
        }
        if i == n {
            return n - 1;
        }
        if (self.get(i) - x) < (x - self.get(i - 1)) {
            i
        } else {
            i - 1
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}

/// Discretizes every maximal interval of `u` at resolution `beta`; both
/// endpoints of each interval are always emitted.
pub fn discretize(u: &IntervalUnion, beta: f64) -> Result<Vec<f64>> {
    Ok(Grid::new(u, beta)?.iter().collect())
}
