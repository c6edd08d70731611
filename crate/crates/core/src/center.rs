//! (k,ℓ)-center clustering.
//!
//! [`constant_factor_center`] gives an 8-approximation and a bracket on the
//! optimum; [`refine_center`] narrows the bracket with signature-grid
//! candidate sets until the cost is within `1 + ε` of the lower end.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::curve::{union_of_ranges, Curve, Grid};
use crate::error::{FrescoError, Result};
use crate::frechet::{distance, Column};
use crate::signature::{delta_signature, simplify};
use crate::solution::{ClusteringSolution, Guarantee, Objective};

/// Default cap on the number of candidate curves examined by one cover search.
pub const DEFAULT_MAX_CANDIDATES: u64 = 10_000_000;

const MAX_PROBES: usize = 64;

/// Tunables for the center algorithms.
#[derive(Debug, Clone, Copy)]
pub struct CenterOptions {
    /// Cover searches fail with [`FrescoError::ResourceLimit`] once more
    /// candidate curves than this would have to be examined.
    pub max_candidates: u64,
}

impl Default for CenterOptions {
    fn default() -> Self {
        CenterOptions {
            max_candidates: DEFAULT_MAX_CANDIDATES,
        }
    }
}

fn check_inputs(p: &[Curve], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(FrescoError::invalid(format!("{what} must not be empty")));
    }
    Ok(())
}

/// Nearest center of `tau` and its distance; ties go to the lower index.
pub(crate) fn nearest(tau: &Curve, centers: &[Curve]) -> (usize, f64) {
    centers
        .iter()
        .enumerate()
        .map(|(j, c)| (j, distance(tau, c)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// The k-center cost `max_i min_j d_F(p_i, c_j)` and the assignment
/// realizing it.
pub fn cost_inf(p: &[Curve], c: &[Curve]) -> Result<(f64, Vec<usize>)> {
    check_inputs(p, "input set")?;
    check_inputs(c, "center set")?;
    let per: Vec<(usize, f64)> = p.par_iter().map(|tau| nearest(tau, c)).collect();
    let cost = per.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok((cost, per.into_iter().map(|x| x.0).collect()))
}

/// Farthest-first traversal from index 0; returns `k` distinct indices.
pub fn gonzalez(curves: &[Curve], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > curves.len() {
        return Err(FrescoError::invalid(format!(
            "k must be in 1..={}, got {k}",
            curves.len()
        )));
    }
    let mut chosen = vec![0usize];
    let mut taken = vec![false; curves.len()];
    taken[0] = true;
    let mut gap: Vec<f64> = curves.par_iter().map(|c| distance(c, &curves[0])).collect();
    while chosen.len() < k {
        let next = (0..curves.len())
            .filter(|&i| !taken[i])
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if gap[b] >= gap[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n leaves an unchosen curve");
        chosen.push(next);
        taken[next] = true;
        let fresh = &curves[next];
        gap.par_iter_mut()
            .zip(curves.par_iter())
            .for_each(|(g, c)| *g = g.min(distance(c, fresh)));
    }
    Ok(chosen)
}

/// Candidate centers: every curve with at most `ell` vertices drawn from a
/// grid. Members are enumerated lazily.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    grid: Option<Grid>,
    ell: usize,
    empty_means_infeasible: bool,
}

impl CandidateSet {
    pub fn from_grid(grid: Grid, ell: usize) -> Self {
        CandidateSet {
            grid: Some(grid),
            ell,
            empty_means_infeasible: false,
        }
    }

    /// The empty set returned when the candidate region is too large for
    /// any solution at the requested scale to exist.
    pub fn infeasible(ell: usize) -> Self {
        CandidateSet {
            grid: None,
            ell,
            empty_means_infeasible: true,
        }
    }

    pub fn empty_means_infeasible(&self) -> bool {
        self.empty_means_infeasible
    }

    pub fn is_empty(&self) -> bool {
        self.grid.as_ref().is_none_or(Grid::is_empty)
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Number of member curves, saturating at `u128::MAX`.
    pub fn len(&self) -> u128 {
        match &self.grid {
            Some(g) => count_alternating(g.len(), self.ell),
            None => 0,
        }
    }

    /// Whether `curve` has at most `ell` vertices, all on the grid.
    pub fn contains(&self, curve: &Curve) -> bool {
        let Some(g) = &self.grid else { return false };
        !g.is_empty()
            && curve.len() <= self.ell
            && curve.values().iter().all(|&x| g.get(g.nearest(x)) == x)
    }

    /// All members, in lexicographic order of grid indices.
    pub fn iter(&self) -> impl Iterator<Item = Curve> + '_ {
        AlternatingIter::new(self.grid.as_ref(), self.ell)
    }
}

/// Number of alternating index sequences of length `1..=ell` over `g`
/// ordered points.
fn count_alternating(g: u64, ell: usize) -> u128 {
    if g == 0 || ell == 0 {
        return 0;
    }
    if g > 1 << 20 {
        // rough but safe: every sequence of distinct neighbours
        let g = g as f64;
        let total: f64 = (0..ell as i32).map(|l| g * (g - 1.0).powi(l)).sum();
        return if total >= u128::MAX as f64 { u128::MAX } else { total as u128 };
    }
    let n = g as usize;
    // up[i]: sequences ending at point i whose last step went up
    let mut up = vec![0u128; n];
    let mut down = vec![0u128; n];
    let mut total = n as u128;
    let ones = vec![1u128; n];
    for len in 2..=ell {
        let (prev_up, prev_down) = (std::mem::take(&mut up), std::mem::take(&mut down));
        // a step up may follow a single point or a step down
        let rise_src: Vec<u128> = (0..n)
            .map(|i| if len == 2 { ones[i] } else { prev_down[i] })
            .collect();
        let fall_src: Vec<u128> = (0..n)
            .map(|i| if len == 2 { ones[i] } else { prev_up[i] })
            .collect();
        up = vec![0; n];
        down = vec![0; n];
        let mut acc = 0u128;
        for i in 0..n {
            up[i] = acc;
            acc = acc.saturating_add(rise_src[i]);
        }
        acc = 0;
        for i in (0..n).rev() {
            down[i] = acc;
            acc = acc.saturating_add(fall_src[i]);
        }
        for i in 0..n {
            total = total.saturating_add(up[i]).saturating_add(down[i]);
        }
    }
    total
}

/// Depth-first enumeration of alternating index sequences.
struct AlternatingIter<'a> {
    grid: Option<&'a Grid>,
    ell: usize,
    path: Vec<u64>,
    started: bool,
}

impl<'a> AlternatingIter<'a> {
    fn new(grid: Option<&'a Grid>, ell: usize) -> Self {
        AlternatingIter {
            grid: grid.filter(|g| !g.is_empty() && ell > 0),
            ell,
            path: Vec::new(),
            started: false,
        }
    }

    /// Admissible index range `[lo, hi)` for position `pos`, minus `skip`.
    fn bounds(&self, pos: usize, n: u64) -> (u64, u64, Option<u64>) {
        match pos {
            0 => (0, n, None),
            1 => (0, n, Some(self.path[0])),
            _ => {
                let (grand, parent) = (self.path[pos - 2], self.path[pos - 1]);
                if parent > grand {
                    (0, parent, None)
                } else {
                    (parent + 1, n, None)
                }
            }
        }
    }

    fn smallest_from(&self, pos: usize, from: u64, n: u64) -> Option<u64> {
        let (lo, hi, skip) = self.bounds(pos, n);
        let mut x = from.max(lo);
        if Some(x) == skip {
            x += 1;
        }
        (x < hi).then_some(x)
    }
}

impl Iterator for AlternatingIter<'_> {
    type Item = Curve;

    fn next(&mut self) -> Option<Curve> {
        let grid = self.grid?;
        let n = grid.len();
        if !self.started {
            self.started = true;
            self.path.push(0);
        } else if self.path.len() < self.ell {
            if let Some(c) = self.smallest_from(self.path.len(), 0, n) {
                self.path.push(c);
            } else {
                self.advance(n)?;
            }
        } else {
            self.advance(n)?;
        }
        let values = self.path.iter().map(|&i| grid.get(i)).collect();
        Some(Curve::from_normalized(values))
    }
}

impl AlternatingIter<'_> {
    fn advance(&mut self, n: u64) -> Option<()> {
        loop {
            let pos = self.path.len() - 1;
            let cur = self.path[pos];
            if let Some(s) = self.smallest_from(pos, cur + 1, n) {
                self.path[pos] = s;
                return Some(());
            }
            self.path.pop();
            if self.path.is_empty() {
                self.grid = None;
                return None;
            }
        }
    }
}

/// Candidate centers from the vertices of every input's `alpha`-signature.
///
/// Returns the infeasibility-flagged empty set when the union of
/// `[w ± 4α]` over signature vertices `w` has measure above `24·α·k·ℓ`;
/// otherwise the grid of resolution `beta` over that union.
pub fn generate_center_candidates(
    p: &[Curve],
    alpha: f64,
    beta: f64,
    k: usize,
    ell: usize,
) -> Result<CandidateSet> {
    if !(alpha > 0.0) || !(beta > 0.0) {
        return Err(FrescoError::invalid(format!(
            "alpha and beta must be positive, got {alpha} and {beta}"
        )));
    }
    check_inputs(p, "input set")?;
    let ranges: Vec<(f64, f64)> = p
        .iter()
        .flat_map(|tau| delta_signature(tau, alpha).into_values())
        .map(|w| (w, 4.0 * alpha))
        .collect();
    let u = union_of_ranges(&ranges)?;
    if u.measure() > 24.0 * alpha * k as f64 * ell as f64 {
        return Ok(CandidateSet::infeasible(ell));
    }
    Ok(CandidateSet::from_grid(Grid::new(&u, beta)?, ell))
}

/// Coverage of inputs as a bitset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Mask(Vec<u64>);

impl Mask {
    fn empty(n: usize) -> Self {
        Mask(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn subset_of(&self, other: &Mask) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn union_with(&mut self, other: &Mask) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn is_full(&self, n: usize) -> bool {
        (0..n).all(|i| self.get(i))
    }
}

struct CoverSearch<'a> {
    inputs: &'a [Curve],
    grid: &'a Grid,
    ell: usize,
    threshold: f64,
    // every input must stay reachable (single-center search)
    require_all: bool,
    examined: &'a AtomicU64,
    cap: u64,
}

enum Found {
    Full(Vec<u64>),
    Partial(Vec<(Mask, Vec<u64>)>),
}

impl<'a> CoverSearch<'a> {
    fn alive(&self, cols: &[Option<Column<'a>>]) -> bool {
        if self.require_all {
            cols.iter().all(|c| c.as_ref().is_some_and(Column::is_viable))
        } else {
            cols.iter().any(|c| c.as_ref().is_some_and(Column::is_viable))
        }
    }

    fn bump(&self) -> Result<()> {
        let seen = self.examined.fetch_add(1, Ordering::Relaxed) + 1;
        if seen > self.cap {
            return Err(FrescoError::ResourceLimit {
                what: "center candidate search",
                needed: u128::from(seen),
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// Visits the prefix `path` (already viable) and all its extensions.
    fn visit(
        &self,
        path: &mut Vec<u64>,
        cols: Vec<Option<Column<'a>>>,
        out: &mut Vec<(Mask, Vec<u64>)>,
    ) -> Result<Option<Vec<u64>>> {
        self.bump()?;
        let n = self.inputs.len();
        let mut mask = Mask::empty(n);
        for (i, c) in cols.iter().enumerate() {
            if c.as_ref().is_some_and(Column::reaches_end) {
                mask.set(i);
            }
        }
        if mask.is_full(n) {
            return Ok(Some(path.clone()));
        }
        if !mask.is_empty() && !self.require_all {
            out.push((mask, path.clone()));
        }
        if path.len() == self.ell {
            return Ok(None);
        }
        let last = *path.last().unwrap();
        let rising = match path.len() {
            1 => None,
            len => Some(path[len - 1] > path[len - 2]),
        };
        // walk outward from the last vertex; viability only shrinks with distance
        for go_up in [false, true] {
            if rising == Some(go_up) {
                continue;
            }
            let mut idx = last;
            loop {
                if go_up {
                    idx += 1;
                    if idx >= self.grid.len() {
                        break;
                    }
                } else {
                    if idx == 0 {
                        break;
                    }
                    idx -= 1;
                }
                let v = self.grid.get(idx);
                let next: Vec<Option<Column<'a>>> = cols
                    .iter()
                    .map(|c| c.as_ref().filter(|c| c.is_viable()).map(|c| c.advance(v)))
                    .collect();
                if !self.alive(&next) {
                    break;
                }
                path.push(idx);
                let hit = self.visit(path, next, out)?;
                path.pop();
                if hit.is_some() {
                    return Ok(hit);
                }
            }
        }
        Ok(None)
    }

    fn search_from(&self, idx: u64) -> Result<Found> {
        let v = self.grid.get(idx);
        let cols: Vec<Option<Column<'a>>> = self
            .inputs
            .iter()
            .map(|tau| Some(Column::start(tau.values(), v, self.threshold)))
            .collect();
        let mut out = Vec::new();
        if !self.alive(&cols) {
            return Ok(Found::Partial(out));
        }
        let mut path = vec![idx];
        Ok(match self.visit(&mut path, cols, &mut out)? {
            Some(full) => Found::Full(full),
            None => Found::Partial(out),
        })
    }
}

/// Branches on the lowest uncovered input; returns indices into `masks`.
fn set_cover(masks: &[Mask], n: usize, k: usize) -> Option<Vec<usize>> {
    fn go(masks: &[Mask], n: usize, k: usize, covered: &Mask, picked: &mut Vec<usize>) -> bool {
        let Some(u) = (0..n).find(|&i| !covered.get(i)) else {
            return true;
        };
        if picked.len() == k {
            return false;
        }
        for (j, m) in masks.iter().enumerate() {
            if m.get(u) {
                let mut next = covered.clone();
                next.union_with(m);
                picked.push(j);
                if go(masks, n, k, &next, picked) {
                    return true;
                }
                picked.pop();
            }
        }
        false
    }
    let mut picked = Vec::new();
    go(masks, n, k, &Mask::empty(n), &mut picked).then_some(picked)
}

/// Searches `gamma` for at most `k` curves covering every input within
/// `threshold`; uses the default candidate cap.
pub fn evaluate_cover(
    p: &[Curve],
    gamma: &CandidateSet,
    k: usize,
    threshold: f64,
) -> Result<Option<ClusteringSolution>> {
    evaluate_cover_with(p, gamma, k, threshold, &CenterOptions::default())
}

/// [`evaluate_cover`] with explicit options.
///
/// Prefixes of candidate curves are extended one grid vertex at a time and
/// dropped as soon as no input (or, for `k = 1`, some input) can still be
/// matched within `threshold`. Coverage sets are deduplicated and
/// dominated ones discarded before the exact cover search.
pub fn evaluate_cover_with(
    p: &[Curve],
    gamma: &CandidateSet,
    k: usize,
    threshold: f64,
    opts: &CenterOptions,
) -> Result<Option<ClusteringSolution>> {
    check_inputs(p, "input set")?;
    if k == 0 {
        return Err(FrescoError::invalid("k must be at least 1"));
    }
    let Some(grid) = gamma.grid().filter(|g| !g.is_empty()) else {
        return Ok(None);
    };
    if !(threshold >= 0.0) {
        return Ok(None);
    }
    let n = p.len();
    let examined = AtomicU64::new(0);
    let search = CoverSearch {
        inputs: p,
        grid,
        ell: gamma.ell().max(1),
        threshold,
        require_all: k == 1,
        examined: &examined,
        cap: opts.max_candidates,
    };
    // only grid points near some input's start can open a candidate
    let (lo, hi) = p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
        (lo.min(t.first()), hi.max(t.first()))
    });
    let first = grid.lower_bound(lo - threshold)..grid.upper_bound(hi + threshold);

    let results: Vec<Result<Found>> = if k == 1 {
        let hit = first
            .into_par_iter()
            .map(|i| search.search_from(i))
            .find_map_first(|r| match r {
                Ok(Found::Partial(_)) => None,
                other => Some(other),
            });
        hit.into_iter().collect()
    } else {
        first.into_par_iter().map(|i| search.search_from(i)).collect()
    };

    let mut partial = Vec::new();
    for r in results {
        match r? {
            Found::Full(path) => return finish(p, grid, &[path], k, threshold).map(Some),
            Found::Partial(v) => partial.extend(v),
        }
    }
    if k == 1 {
        return Ok(None);
    }

    // dedupe coverage sets, then drop dominated ones
    let mut seen: HashMap<Mask, usize> = HashMap::new();
    let mut uniq: Vec<(Mask, Vec<u64>)> = Vec::new();
    for (m, path) in partial {
        if !seen.contains_key(&m) {
            seen.insert(m.clone(), uniq.len());
            uniq.push((m, path));
        }
    }
    let keep: Vec<bool> = (0..uniq.len())
        .into_par_iter()
        .map(|i| {
            !uniq
                .iter()
                .enumerate()
                .any(|(j, (m, _))| j != i && uniq[i].0.subset_of(m) && uniq[i].0 != *m)
        })
        .collect();
    let kept: Vec<(Mask, Vec<u64>)> = uniq
        .into_iter()
        .zip(keep)
        .filter_map(|(x, k)| k.then_some(x))
        .collect();
    let masks: Vec<Mask> = kept.iter().map(|x| x.0.clone()).collect();
    match set_cover(&masks, n, k) {
        Some(picked) => {
            let paths: Vec<Vec<u64>> = picked.into_iter().map(|j| kept[j].1.clone()).collect();
            finish(p, grid, &paths, k, threshold).map(Some)
        }
        None => Ok(None),
    }
}

fn finish(p: &[Curve], grid: &Grid, paths: &[Vec<u64>], k: usize, threshold: f64) -> Result<ClusteringSolution> {
    let centers: Vec<Curve> = paths
        .iter()
        .map(|path| Curve::from_normalized(path.iter().map(|&i| grid.get(i)).collect()))
        .collect();
    debug_assert!(centers.len() <= k);
    let (cost, assignment) = cost_inf(p, &centers)?;
    if cost > threshold {
        return Err(FrescoError::Invariant(format!(
            "cover at threshold {threshold} has cost {cost}"
        )));
    }
    Ok(ClusteringSolution {
        centers,
        assignment,
        cost,
        guarantee: Guarantee {
            objective: Objective::Center,
            factor: f64::INFINITY,
            epsilon: None,
            seed: None,
            success_probability: None,
        },
    })
}

fn check_k_ell(n: usize, k: usize, ell: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(FrescoError::invalid(format!("k must be in 1..={n}, got {k}")));
    }
    if ell < 2 {
        return Err(FrescoError::invalid(format!("ell must be at least 2, got {ell}")));
    }
    Ok(())
}

/// 8-approximation: Gonzalez on the inputs' ℓ-simplifications.
///
/// Also returns `[D/8, D]`, which contains the optimal cost, where `D` is
/// the simplification error plus the Gonzalez radius.
pub fn constant_factor_center(p: &[Curve], k: usize, ell: usize) -> Result<(ClusteringSolution, (f64, f64))> {
    check_inputs(p, "input set")?;
    check_k_ell(p.len(), k, ell)?;
    let simplified: Vec<Curve> = p.par_iter().map(|t| simplify(t, ell)).collect::<Result<_>>()?;
    let err = p
        .par_iter()
        .zip(simplified.par_iter())
        .map(|(t, s)| distance(t, s))
        .reduce(|| 0.0, f64::max);
    let picks = gonzalez(&simplified, k)?;
    let centers: Vec<Curve> = picks.iter().map(|&i| simplified[i].clone()).collect();
    let (radius, _) = cost_inf(&simplified, &centers)?;
    let d = radius + err;
    let (cost, assignment) = cost_inf(p, &centers)?;
    if cost > d * (1.0 + 1e-12) {
        return Err(FrescoError::Invariant(format!(
            "constant-factor cost {cost} exceeds its bound {d}"
        )));
    }
    let solution = ClusteringSolution {
        centers,
        assignment,
        cost,
        guarantee: Guarantee {
            objective: Objective::Center,
            factor: 8.0,
            epsilon: None,
            seed: None,
            success_probability: None,
        },
    };
    Ok((solution, (d / 8.0, d)))
}

/// (1+ε)-approximation with the default options.
pub fn refine_center(p: &[Curve], k: usize, ell: usize, epsilon: f64) -> Result<ClusteringSolution> {
    refine_center_with(p, k, ell, epsilon, &CenterOptions::default())
}

/// Geometric search between the constant-factor bracket's ends.
///
/// Each probe `α` first tries candidates at scale `α/(1+e/2)` with
/// threshold `α`; failure proves the optimum exceeds `α/(1+e/2)`. It then
/// tries scale `α` with threshold `(1+e)α`, whose failure proves the
/// optimum exceeds `α`. The inner `e` solves `(1+e)(1+e/2) = 1+ε`, so a
/// probe whose second call succeeds certifies the target ratio. The
/// returned factor is the final ratio between the best cost found and the
/// proven lower bound.
pub fn refine_center_with(
    p: &[Curve],
    k: usize,
    ell: usize,
    epsilon: f64,
    opts: &CenterOptions,
) -> Result<ClusteringSolution> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(FrescoError::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let (mut best, (mut lo, _)) = constant_factor_center(p, k, ell)?;
    let guarantee = |factor: f64| Guarantee {
        objective: Objective::Center,
        factor,
        epsilon: Some(epsilon),
        seed: None,
        success_probability: None,
    };
    if best.cost == 0.0 {
        best.guarantee = guarantee(1.0);
        return Ok(best);
    }
    let e = ((9.0 + 8.0 * epsilon).sqrt() - 3.0) / 2.0;
    let mut probes = 0;
    while best.cost > (1.0 + epsilon) * lo && probes < MAX_PROBES {
        probes += 1;
        let alpha = (lo * best.cost).sqrt();
        let a1 = alpha / (1.0 + e / 2.0);
        let first = probe(p, a1, e / 2.0 * a1, k, ell, alpha, opts)?;
        if let Some(s) = first {
            if s.cost < best.cost {
                best = s;
            }
            continue;
        }
        lo = lo.max(a1);
        match probe(p, alpha, e * alpha, k, ell, (1.0 + e) * alpha, opts)? {
            Some(s) if s.cost < best.cost => best = s,
            Some(_) => {}
            None => lo = lo.max(alpha),
        }
    }
    best.guarantee = guarantee(best.cost / lo);
    Ok(best)
}

fn probe(
    p: &[Curve],
    alpha: f64,
    beta: f64,
    k: usize,
    ell: usize,
    threshold: f64,
    opts: &CenterOptions,
) -> Result<Option<ClusteringSolution>> {
    let gamma = generate_center_candidates(p, alpha, beta, k, ell)?;
    if gamma.empty_means_infeasible() {
        return Ok(None);
    }
    evaluate_cover_with(p, &gamma, k, threshold, opts)
}
