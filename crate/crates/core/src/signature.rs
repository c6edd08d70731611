//! δ-signatures: the multi-scale skeleton of a curve's extrema.
//!
//! [`delta_signature`] computes one signature in a single linear pass.
//! [`build_vertex_permutation`] simulates the full edge-contraction
//! hierarchy once, after which [`extract_signature`] answers size queries
//! and [`simplify`] yields a 2-approximate minimum-error simplification.
//! [`validate_signature`] checks the defining conditions directly and is
//! independent of both constructions.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::curve::{between, Curve};
use crate::error::{FrescoError, Result};

#[inline]
fn outside(x: f64, center: f64, delta: f64) -> bool {
    (x - center).abs() > delta
}

/// Indices of the vertices of a `delta`-signature of `tau`, in curve order.
pub fn delta_signature_indices(tau: &Curve, delta: f64) -> Vec<usize> {
    let w = tau.values();
    let m = w.len();
    if m == 1 {
        return vec![0];
    }
    let mut sig = vec![0usize];
    // first vertex leaving the delta-range around the start
    let mut j = 0;
    loop {
        j += 1;
        if outside(w[j], w[0], delta) || j >= m - 1 {
            break;
        }
    }
    let mut b = j;
    for i in j + 1..m {
        let anchor = w[*sig.last().unwrap()];
        if between(w[b], anchor, w[i]) {
            b = i;
        } else if (w[i] - w[b]).abs() > 2.0 * delta {
            sig.push(b);
            b = i;
        }
    }
    if outside(w[b], w[m - 1], delta) {
        sig.push(b);
    }
    sig.push(m - 1);
    sig
}

/// A `delta`-signature of `tau`, computed in one pass.
pub fn delta_signature(tau: &Curve, delta: f64) -> Curve {
    let w = tau.values();
    Curve::from_signature(delta_signature_indices(tau, delta).into_iter().map(|i| w[i]).collect())
}

/// One of the conditions a signature must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignatureCondition {
    /// The signature's vertices cannot be matched to an increasing
    /// subsequence of the curve's vertices that keeps both endpoints.
    Location,
    NonDegeneracy,
    DirectionPreserving,
    MinimumEdgeLength,
    Range,
}

/// A failed condition and the signature vertex or edge index where it failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub condition: SignatureCondition,
    pub location: usize,
}

/// Outcome of [`validate_signature`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignatureReport {
    pub violations: Vec<Violation>,
}

impl SignatureReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, condition: SignatureCondition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

/// Locates `sigma` as an increasing subsequence of `tau` that starts at the
/// first and ends at the last vertex. Interior vertices take the leftmost
/// match.
fn locate(sigma: &[f64], tau: &[f64]) -> std::result::Result<Vec<usize>, usize> {
    let (l, m) = (sigma.len(), tau.len());
    if sigma[0] != tau[0] {
        return Err(0);
    }
    if l == 1 {
        return if m == 1 { Ok(vec![0]) } else { Err(0) };
    }
    if m < l || sigma[l - 1] != tau[m - 1] {
        return Err(l - 1);
    }
    let mut idx = vec![0usize];
    let mut from = 1;
    for (k, &v) in sigma.iter().enumerate().take(l - 1).skip(1) {
        match (from..m - 1).find(|&i| tau[i] == v) {
            Some(i) => {
                idx.push(i);
                from = i + 1;
            }
            None => return Err(k),
        }
    }
    idx.push(m - 1);
    Ok(idx)
}

/// Checks every defining condition of a `delta`-signature of `tau`.
pub fn validate_signature(sigma: &Curve, tau: &Curve, delta: f64) -> SignatureReport {
    match locate(sigma.values(), tau.values()) {
        Ok(idx) => validate_signature_indices(&idx, tau, delta),
        Err(at) => SignatureReport {
            violations: vec![Violation {
                condition: SignatureCondition::Location,
                location: at,
            }],
        },
    }
}

/// [`validate_signature`] for a signature given by vertex indices of `tau`.
pub fn validate_signature_indices(idx: &[usize], tau: &Curve, delta: f64) -> SignatureReport {
    use SignatureCondition::*;
    let w = tau.values();
    let m = w.len();
    let l = idx.len();
    let mut violations = Vec::new();
    let mut fail = |condition, location| violations.push(Violation { condition, location });

    let located = !idx.is_empty()
        && idx[0] == 0
        && idx[l - 1] == m - 1
        && idx.windows(2).all(|p| p[0] < p[1]);
    if !located {
        fail(Location, 0);
        return SignatureReport { violations };
    }
    if m == 1 {
        return SignatureReport { violations };
    }
    let v: Vec<f64> = idx.iter().map(|&i| w[i]).collect();

    for i in 1..l.saturating_sub(1) {
        if between(v[i], v[i - 1], v[i + 1]) {
            fail(NonDegeneracy, i);
        }
    }

    for e in 0..l - 1 {
        let (s, t) = (idx[e], idx[e + 1]);
        let sub = &w[s..=t];
        let (a, b) = (v[e], v[e + 1]);

        // largest move against the edge's direction
        let mut extreme = sub[0];
        let mut counter = 0.0f64;
        for &x in sub {
            if a < b {
                extreme = extreme.max(x);
                counter = counter.max(extreme - x);
            } else {
                extreme = extreme.min(x);
                counter = counter.max(x - extreme);
            }
        }
        if counter > 2.0 * delta {
            fail(DirectionPreserving, e);
        }

        let len = (b - a).abs();
        let is_end = e == 0 || e == l - 2;
        // a two-vertex signature is forced whenever the curve has no
        // reversal above 2δ, whatever its length
        let long_enough = if l == 2 {
            true
        } else if is_end {
            len > delta
        } else {
            len > 2.0 * delta
        };
        if !long_enough {
            fail(MinimumEdgeLength, e);
        }

        let near = |x: f64, c: f64| !outside(x, c, delta);
        let in_range = |x: f64| {
            if l == 2 {
                between(x, a, b) || near(x, a) || near(x, b)
            } else if e == 0 {
                between(x, a, b) || near(x, a)
            } else if e == l - 2 {
                between(x, a, b) || near(x, b)
            } else {
                between(x, a, b)
            }
        };
        if !sub.iter().all(|&x| in_range(x)) {
            fail(Range, e);
        }
    }
    SignatureReport { violations }
}

/// An entry of a [`VertexPermutation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermEntry {
    Separator,
    Vertex(usize),
}

/// Canonical vertex permutation of a curve.
///
/// Vertices are listed in the order the contraction hierarchy removes them;
/// the vertices after separator `i` form the canonical signature of level
/// `i`, valid for `δ ∈ [thresholds[i], thresholds[i + 1])`.
#[derive(Debug, Clone)]
pub struct VertexPermutation {
    values: Vec<f64>,
    entries: Vec<PermEntry>,
    thresholds: Vec<f64>,
    // position in `entries` of each separator
    separators: Vec<usize>,
}

impl VertexPermutation {
    pub fn entries(&self) -> &[PermEntry] {
        &self.entries
    }

    /// Lower threshold of every level, followed by `+∞`.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn levels(&self) -> usize {
        self.separators.len()
    }

    pub fn source(&self) -> &[f64] {
        &self.values
    }

    /// Sorted vertex indices of level `level`.
    pub fn level_indices(&self, level: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.entries[self.separators[level] + 1..]
            .iter()
            .filter_map(|e| match e {
                PermEntry::Vertex(i) => Some(*i),
                PermEntry::Separator => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn level_size(&self, level: usize) -> usize {
        // entries after the separator minus the separators among them
        self.entries.len() - self.separators[level] - (self.levels() - level)
    }

    /// The level whose threshold range contains `delta`.
    pub fn level_for_delta(&self, delta: f64) -> usize {
        let i = self.thresholds.partition_point(|&t| t <= delta);
        i.saturating_sub(1).min(self.levels() - 1)
    }

    /// The finest level with at most `ell` vertices.
    pub fn level_for_size(&self, ell: usize) -> usize {
        (0..self.levels())
            .find(|&i| self.level_size(i) <= ell)
            .unwrap_or(self.levels() - 1)
    }

    fn curve_of(&self, level: usize) -> Curve {
        Curve::from_signature(self.level_indices(level).into_iter().map(|i| self.values[i]).collect())
    }
}

/// Monotone min-queue keyed by non-negative weights: every key pushed is
/// at least the last minimum taken out. Non-negative `f64` bit patterns
/// order like the values, so the queue buckets them by the highest bit
/// in which they differ from that minimum.
struct RadixQueue {
    last: u64,
    buckets: Vec<Vec<(u64, u32, u32)>>,
}

impl RadixQueue {
    fn new() -> Self {
        RadixQueue {
            last: 0,
            buckets: vec![Vec::new(); 65],
        }
    }

    fn bucket(&self, key: u64) -> usize {
        if key == self.last {
            0
        } else {
            64 - (key ^ self.last).leading_zeros() as usize
        }
    }

    fn push(&mut self, weight: f64, vertex: u32, version: u32) {
        let key = weight.to_bits();
        debug_assert!(key >= self.last, "queue key decreased");
        let b = self.bucket(key);
        self.buckets[b].push((key, vertex, version));
    }

    /// Moves every entry with the smallest key into `out` and returns
    /// that key, or `None` when the queue is empty.
    fn take_min(&mut self, out: &mut Vec<(u32, u32)>) -> Option<f64> {
        if self.buckets[0].is_empty() {
            let i = (1..65).find(|&i| !self.buckets[i].is_empty())?;
            let mut items = std::mem::take(&mut self.buckets[i]);
            self.last = items.iter().map(|e| e.0).min().unwrap();
            for &e in &items {
                let b = self.bucket(e.0);
                self.buckets[b].push(e);
            }
            items.clear();
            self.buckets[i] = items;
        }
        out.extend(self.buckets[0].drain(..).map(|e| (e.1, e.2)));
        Some(f64::from_bits(self.last))
    }
}

// version of a contracted vertex
const DEAD: u32 = u32::MAX;

/// Builds the canonical vertex permutation by simulating the edge
/// contractions with a min-heap over interior vertices.
///
/// # Panics
///
/// If `tau` has `u32::MAX` or more vertices.
pub fn build_vertex_permutation(tau: &Curve) -> VertexPermutation {
    let w = tau.values().to_vec();
    let m = w.len();
    assert!(m < DEAD as usize, "curve too long for a vertex permutation");
    if m == 1 {
        return VertexPermutation {
            values: w,
            entries: vec![PermEntry::Separator, PermEntry::Vertex(0)],
            thresholds: vec![0.0, f64::INFINITY],
            separators: vec![0],
        };
    }
    let last = m - 1;
    let mut prev: Vec<u32> = (0..m).map(|i| i.saturating_sub(1) as u32).collect();
    let mut next: Vec<u32> = (0..m).map(|i| (i + 1).min(last) as u32).collect();
    let mut version = vec![0u32; m];

    // weights of the two edges at v
    let edge_weights = |v: usize, prev: &[u32], next: &[u32]| -> (f64, f64) {
        let (p, n) = (prev[v] as usize, next[v] as usize);
        let left = if p == 0 { (w[v] - w[0]).abs() } else { (w[v] - w[p]).abs() / 2.0 };
        let right = if n == last { (w[last] - w[v]).abs() } else { (w[v] - w[n]).abs() / 2.0 };
        (left, right)
    };

    // contracting a lightest edge never creates a lighter one, so the
    // queue's keys are monotone; ties within a level go by vertex index
    let mut queue = RadixQueue::new();
    for v in 1..last {
        let (l, r) = edge_weights(v, &prev, &next);
        queue.push(l.min(r), v as u32, 0);
    }

    let mut entries = Vec::with_capacity(2 * m);
    let mut separators = Vec::new();
    let mut thresholds = vec![0.0];
    let mut remaining = m.saturating_sub(2);
    let mut batch = Vec::new();
    let mut level = BinaryHeap::new();

    while remaining > 0 {
        batch.clear();
        let Some(level_weight) = queue.take_min(&mut batch) else { break };
        level.extend(batch.iter().filter(|&&(v, ver)| version[v as usize] == ver).map(|&e| Reverse(e)));
        if level.is_empty() {
            continue;
        }
        separators.push(entries.len());
        entries.push(PermEntry::Separator);
        thresholds.push(level_weight);

        while let Some(Reverse((v, ver))) = level.pop() {
            let v = v as usize;
            if version[v] != ver {
                continue;
            }
            let (l, _) = edge_weights(v, &prev, &next);
            let (p, n) = (prev[v] as usize, next[v] as usize);
            // contract the edge realizing the weight; prefer the left one
            let (first, second) = if l == level_weight {
                if p == 0 { (v, None) } else { (p, Some(v)) }
            } else if n == last {
                (v, None)
            } else {
                (v, Some(n))
            };
            let lo = prev[first] as usize;
            let hi = next[second.unwrap_or(first)] as usize;
            for r in std::iter::once(first).chain(second) {
                version[r] = DEAD;
                entries.push(PermEntry::Vertex(r));
                remaining -= 1;
            }
            next[lo] = hi as u32;
            prev[hi] = lo as u32;
            for u in [lo, hi] {
                if u != 0 && u != last {
                    version[u] += 1;
                    let (l, r) = edge_weights(u, &prev, &next);
                    let key = l.min(r);
                    if key == level_weight {
                        level.push(Reverse((u as u32, version[u])));
                    } else {
                        queue.push(key, u as u32, version[u]);
                    }
                }
            }
        }
    }
    separators.push(entries.len());
    entries.push(PermEntry::Separator);
    entries.push(PermEntry::Vertex(0));
    entries.push(PermEntry::Vertex(last));
    thresholds.push(f64::INFINITY);

    VertexPermutation {
        values: w,
        entries,
        thresholds,
        separators,
    }
}

fn check_ell(ell: usize) -> Result<()> {
    if ell < 2 {
        return Err(FrescoError::invalid(format!("ell must be at least 2, got {ell}")));
    }
    Ok(())
}

/// The canonical signature with the largest vertex count not exceeding `ell`.
pub fn extract_signature(perm: &VertexPermutation, ell: usize) -> Result<Curve> {
    check_ell(ell)?;
    Ok(perm.curve_of(perm.level_for_size(ell)))
}

/// A curve of at most `ell` vertices whose distance to `tau` is at most
/// twice that of an optimal `ell`-vertex simplification.
pub fn simplify(tau: &Curve, ell: usize) -> Result<Curve> {
    check_ell(ell)?;
    if tau.len() <= ell {
        return Ok(tau.clone());
    }
    extract_signature(&build_vertex_permutation(tau), ell)
}
