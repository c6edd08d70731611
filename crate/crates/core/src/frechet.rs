//! Exact continuous Fréchet distance between univariate curves.
//!
//! The decision procedure propagates reachable intervals through the
//! free-space cell grid, one column per vertex of the first curve. Positions
//! on an edge are kept symbolically as `base + k·δ` with `k ∈ {-1, 0, 1}`, so
//! every comparison reduces to `fl(x - y)` against `0`, `±δ` or `±2δ`. The
//! critical values used by [`distance`] are formed from the same differences,
//! which makes the decision at a critical value exact rather than subject to
//! rounding in interval endpoints.

use crate::curve::Curve;
use crate::error::{FrescoError, Result};

/// A point on an edge with value `base + off·δ`.
#[derive(Debug, Clone, Copy)]
struct Pos {
    base: f64,
    off: i8,
}

impl Pos {
    const fn vertex(base: f64) -> Self {
        Pos { base, off: 0 }
    }
}

/// `x` is at or before `y` when walking the edge in direction `dir`.
#[inline]
fn at_or_before(x: Pos, y: Pos, dir: i8, delta: f64) -> bool {
    let d = x.base - y.base;
    let k = f64::from(y.off - x.off);
    if dir > 0 {
        d <= k * delta
    } else {
        -d <= -k * delta
    }
}

/// Reachable (or free) part of one cell boundary, in edge order.
#[derive(Debug, Clone, Copy)]
struct Span {
    start: Pos,
    end: Pos,
}

#[inline]
fn direction(p: f64, q: f64) -> i8 {
    if q > p {
        1
    } else {
        -1
    }
}

/// Points of the edge `p -> q` within `delta` of the value `v`.
#[inline]
fn free_span(v: f64, p: f64, q: f64, delta: f64) -> Option<Span> {
    let dir = direction(p, q);
    let lower = Pos { base: v, off: -dir };
    let upper = Pos { base: v, off: dir };
    let start = if at_or_before(Pos::vertex(p), lower, dir, delta) {
        lower
    } else {
        Pos::vertex(p)
    };
    let end = if at_or_before(upper, Pos::vertex(q), dir, delta) {
        upper
    } else {
        Pos::vertex(q)
    };
    at_or_before(start, end, dir, delta).then_some(Span { start, end })
}

/// Restricts `free` to the part at or after `from`.
#[inline]
fn clip_from(free: Span, from: Pos, dir: i8, delta: f64) -> Option<Span> {
    let start = if at_or_before(free.start, from, dir, delta) {
        from
    } else {
        free.start
    };
    at_or_before(start, free.end, dir, delta).then_some(Span {
        start,
        end: free.end,
    })
}

#[inline]
fn within(x: f64, y: f64, delta: f64) -> bool {
    (x - y).abs() <= delta
}

/// Reachability state on the vertical line through one vertex of the
/// column curve, against every edge of a fixed row curve.
///
/// Advancing vertex by vertex lets callers prune prefixes of a curve that
/// can no longer be matched within `delta`.
#[derive(Debug, Clone)]
pub(crate) struct Column<'a> {
    row: &'a [f64],
    delta: f64,
    vertex: f64,
    // all column vertices so far lie within delta of row[0]
    bottom_open: bool,
    // reachable part of the boundary over row edge j
    spans: Vec<Option<Span>>,
}

impl<'a> Column<'a> {
    pub(crate) fn start(row: &'a [f64], first: f64, delta: f64) -> Self {
        let mut spans = Vec::with_capacity(row.len().saturating_sub(1));
        let mut open = within(first, row[0], delta);
        for j in 0..row.len().saturating_sub(1) {
            open = open && within(first, row[j], delta);
            spans.push(if open {
                free_span(first, row[j], row[j + 1], delta)
            } else {
                None
            });
        }
        Column {
            row,
            delta,
            vertex: first,
            bottom_open: within(first, row[0], delta),
            spans,
        }
    }

    /// Propagates through the column strip spanned by the edge from the
    /// current vertex to `next`.
    pub(crate) fn advance(&self, next: f64) -> Self {
        let (p, q, delta, row) = (self.vertex, next, self.delta, self.row);
        let dir = direction(p, q);
        let mut spans = Vec::with_capacity(self.spans.len());
        // reachable part of the bottom boundary of the current cell
        let mut bottom = if self.bottom_open {
            free_span(row[0], p, q, delta)
        } else {
            None
        };
        for (j, left) in self.spans.iter().enumerate() {
            let right_free = free_span(next, row[j], row[j + 1], delta);
            let right = match (bottom, left) {
                (Some(_), _) => right_free,
                (None, Some(l)) => right_free
                    .and_then(|f| clip_from(f, l.start, direction(row[j], row[j + 1]), delta)),
                (None, None) => None,
            };
            let top_free = free_span(row[j + 1], p, q, delta);
            bottom = match (left, bottom) {
                (Some(_), _) => top_free,
                (None, Some(b)) => top_free.and_then(|f| clip_from(f, b.start, dir, delta)),
                (None, None) => None,
            };
            spans.push(right);
        }
        Column {
            row,
            delta,
            vertex: next,
            bottom_open: self.bottom_open && within(next, row[0], delta),
            spans,
        }
    }

    /// Some point of this vertical line is reachable from the start.
    pub(crate) fn is_viable(&self) -> bool {
        if self.spans.is_empty() {
            self.bottom_open
        } else {
            self.spans.iter().any(Option::is_some)
        }
    }

    /// The upper-right corner is reachable when this vertex ends the curve.
    pub(crate) fn reaches_end(&self) -> bool {
        let end = self.row[self.row.len() - 1];
        if !within(self.vertex, end, self.delta) {
            return false;
        }
        match self.spans.last() {
            Some(last) => last.is_some(),
            None => self.bottom_open,
        }
    }
}

fn decide_values(a: &[f64], b: &[f64], delta: f64) -> bool {
    let mut col = Column::start(b, a[0], delta);
    for &v in &a[1..] {
        if !col.is_viable() {
            return false;
        }
        col = col.advance(v);
    }
    col.reaches_end()
}

/// Returns true iff `d_F(a, b) <= delta`.
pub fn decide(a: &Curve, b: &Curve, delta: f64) -> bool {
    if !(delta >= 0.0) {
        return false;
    }
    let (a, b) = (a.values(), b.values());
    if !within(a[0], b[0], delta) || !within(a[a.len() - 1], b[b.len() - 1], delta) {
        return false;
    }
    // iterate over the shorter curve's columns
    if a.len() >= b.len() {
        decide_values(a, b, delta)
    } else {
        decide_values(b, a, delta)
    }
}

/// Every value at which the reachability of the free space can change.
pub(crate) fn critical_values(a: &[f64], b: &[f64]) -> Vec<f64> {
    let floor = (a[0] - b[0]).abs().max((a[a.len() - 1] - b[b.len() - 1]).abs());
    let mut out = vec![floor];
    let mut push = |x: f64| {
        if x > floor {
            out.push(x);
        }
    };
    for &u in a {
        for &v in b {
            push((u - v).abs());
        }
    }
    for curve in [a, b] {
        for (i, &u) in curve.iter().enumerate() {
            for &w in &curve[i + 1..] {
                push((u - w).abs() / 2.0);
            }
        }
    }
    out.sort_unstable_by(f64::total_cmp);
    out.dedup();
    out
}

/// The exact Fréchet distance.
///
/// Binary search over the sorted critical values for the smallest one
/// accepted by [`decide`].
pub fn distance(a: &Curve, b: &Curve) -> f64 {
    let cands = critical_values(a.values(), b.values());
    // the largest vertex difference always suffices
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if decide(a, b, cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cands[lo]
}

/// Fréchet distance of two monotone curves: the larger endpoint gap.
pub fn monotone_distance(a: &Curve, b: &Curve) -> Result<f64> {
    if a.len() > 2 || b.len() > 2 {
        return Err(FrescoError::invalid(format!(
            "monotone_distance needs monotone curves, got {} and {} vertices",
            a.len(),
            b.len()
        )));
    }
    Ok((a.first() - b.first())
        .abs()
        .max((a.last() - b.last()).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[f64]) -> Curve {
        Curve::new(v).unwrap()
    }

    #[test]
    fn decide_examples() {
        let t = c(&[0.0, 10.0, 4.0, 9.0]);
        assert!(decide(&t, &t, 0.0));
        let (a, b) = (c(&[0.0, 5.0]), c(&[1.0, 3.0]));
        assert!(!decide(&a, &b, 1.9));
        assert!(decide(&a, &b, 2.0));
        let (a, b) = (c(&[0.0, 2.0, 1.0, 3.0]), c(&[0.0, 3.0]));
        assert!(!decide(&a, &b, 0.4));
        assert!(decide(&a, &b, 0.5));
        assert!(decide(&b, &a, 0.5));
        assert!(!decide(&b, &a, 0.49));
    }

    #[test]
    fn distance_examples() {
        let t = c(&[0.0, 10.0, 4.0, 9.0]);
        assert_eq!(distance(&t, &t), 0.0);
        assert_eq!(distance(&c(&[0.0, 5.0]), &c(&[1.0, 3.0])), 2.0);
        assert_eq!(distance(&c(&[0.0, 2.0, 1.0, 3.0]), &c(&[0.0, 3.0])), 0.5);
    }

    #[test]
    fn single_vertex_curves() {
        let p = c(&[1.0]);
        assert_eq!(distance(&p, &c(&[0.0, 4.0, -1.0])), 3.0);
        assert_eq!(distance(&c(&[0.0, 4.0, -1.0]), &p), 3.0);
        assert_eq!(distance(&p, &c(&[3.5])), 2.5);
        assert!(decide(&p, &c(&[0.0, 2.0]), 1.0));
        assert!(!decide(&p, &c(&[0.0, 2.5]), 1.0));
    }

    #[test]
    fn monotone_examples() {
        assert_eq!(monotone_distance(&c(&[0.0, 5.0]), &c(&[1.0, 3.0])).unwrap(), 2.0);
        assert_eq!(monotone_distance(&c(&[0.0, 5.0]), &c(&[0.0, 5.0])).unwrap(), 0.0);
        assert_eq!(monotone_distance(&c(&[2.0, -1.0]), &c(&[3.0, 0.0])).unwrap(), 1.0);
        assert!(monotone_distance(&c(&[0.0, 2.0, 1.0]), &c(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn opposite_directions() {
        // rising vs falling segment: endpoints dominate
        assert_eq!(distance(&c(&[0.0, 4.0]), &c(&[4.0, 0.0])), 4.0);
        // a dip of depth 6 inside a rise must be absorbed: (10 - 4) / 2
        assert_eq!(distance(&c(&[0.0, 10.0, 4.0, 9.0]), &c(&[0.0, 9.0])), 3.0);
    }

    #[test]
    fn column_prefix_pruning() {
        let row = [0.0, 10.0, 4.0, 9.0];
        let col = Column::start(&row, 0.5, 1.0);
        assert!(col.is_viable());
        let up = col.advance(9.5);
        assert!(up.is_viable());
        assert!(!up.reaches_end());
        let back = up.advance(4.2).advance(8.6);
        assert!(back.reaches_end());
        let far = Column::start(&row, 3.0, 1.0);
        assert!(!far.is_viable());
    }
}
