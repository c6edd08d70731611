//! (k,ℓ)-median clustering.
//!
//! [`constant_factor_median`] simplifies the inputs and solves the discrete
//! problem on the simplifications. [`one_median`] samples the input,
//! brackets the sample's optimum with the constant-factor algorithm and
//! searches the resulting signature grid for a center. [`k_median`]
//! repeats that search on shrinking subsets of the input.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::center::nearest;
use crate::curve::{union_of_ranges, Curve, Grid};
use crate::error::{FrescoError, Result};
use crate::frechet::distance;
use crate::signature::{build_vertex_permutation, extract_signature, simplify};
use crate::solution::{ClusteringSolution, Guarantee, Objective};
use crate::center::CandidateSet;

/// Above this many inputs the discrete solver uses local search.
pub const EXACT_DISCRETE_LIMIT: usize = 40;

// subset evaluations the exact discrete solver may spend
const EXACT_BUDGET: u128 = 20_000_000;

// pivots tried per level of the k-median driver
const PIVOTS: usize = 3;

// sweeps per stride level of the grid search
const MAX_SWEEPS: usize = 64;

/// Parameters of the sampling algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub epsilon: f64,
    /// Allowed failure probability of one repeat, in `(0, 1]`.
    pub lambda: f64,
    pub ell: usize,
    pub seed: u64,
    pub repeats: usize,
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(FrescoError::invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(FrescoError::invalid(format!("lambda must be in (0, 1], got {}", self.lambda)));
        }
        if self.ell < 2 {
            return Err(FrescoError::invalid(format!("ell must be at least 2, got {}", self.ell)));
        }
        if self.repeats == 0 {
            return Err(FrescoError::invalid("repeats must be at least 1"));
        }
        Ok(())
    }
}

/// Sample size for one repeat: the larger of the two sampling bounds at
/// `ε/4` and `λ/4`, with natural logarithms.
pub fn sample_size(cfg: &SampleConfig) -> Result<usize> {
    cfg.validate()?;
    let eps = cfg.epsilon / 4.0;
    let lam = cfg.lambda / 4.0;
    let ell = cfg.ell as f64;
    let spread = (8.0 * ell / eps * ((1.0 / lam).ln() + ell.ln())).ceil();
    let diameter = (5.0 * (1.0 / lam).ln()).ceil() + 1.0;
    Ok(spread.max(diameter) as usize)
}

fn check_inputs(p: &[Curve], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(FrescoError::invalid(format!("{what} must not be empty")));
    }
    Ok(())
}

/// The k-median cost `Σ_i min_j d_F(p_i, c_j)` and the assignment realizing it.
pub fn cost_1(p: &[Curve], c: &[Curve]) -> Result<(f64, Vec<usize>)> {
    check_inputs(p, "input set")?;
    check_inputs(c, "center set")?;
    let per: Vec<(usize, f64)> = p.par_iter().map(|tau| nearest(tau, c)).collect();
    let cost = per.iter().map(|x| x.1).sum();
    Ok((cost, per.into_iter().map(|x| x.0).collect()))
}

/// Weighted single-center cost, or `None` once it exceeds `bound`.
fn cost_1_bounded(p: &[Curve], weights: &[f64], c: &Curve, bound: f64) -> Option<f64> {
    let mut sum = 0.0;
    for (tau, &w) in p.iter().zip(weights) {
        sum += w * distance(tau, c);
        if sum > bound {
            return None;
        }
    }
    Some(sum)
}

/// Result of [`discrete_kmedian`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMedian {
    pub indices: Vec<usize>,
    pub cost: f64,
    /// 1 when exact, 5 for local search.
    pub factor: f64,
}

/// Best `k` centers chosen among the curves themselves.
pub fn discrete_kmedian(curves: &[Curve], k: usize) -> Result<DiscreteMedian> {
    discrete_kmedian_weighted(curves, &vec![1.0; curves.len()], k)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    r
}

/// [`discrete_kmedian`] where curve `i` counts `weights[i]` times.
///
/// Exact enumeration of all `k`-subsets when `n ≤ 40` and the subset count
/// is affordable; single-swap local search otherwise.
pub fn discrete_kmedian_weighted(curves: &[Curve], weights: &[f64], k: usize) -> Result<DiscreteMedian> {
    let n = curves.len();
    if k == 0 || k > n {
        return Err(FrescoError::invalid(format!("k must be in 1..={n}, got {k}")));
    }
    if weights.len() != n || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(FrescoError::invalid("weights must be finite, non-negative and one per curve"));
    }
    let dist: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { distance(&curves[i], &curves[j]) }).collect())
        .collect();
    let cost_of = |set: &[usize]| -> f64 {
        (0..n)
            .map(|i| weights[i] * set.iter().map(|&j| dist[i][j]).fold(f64::INFINITY, f64::min))
            .sum()
    };

    if n <= EXACT_DISCRETE_LIMIT && binomial(n, k).saturating_mul(n as u128) <= EXACT_BUDGET {
        let mut best = (f64::INFINITY, Vec::new());
        let mut set: Vec<usize> = (0..k).collect();
        loop {
            let c = cost_of(&set);
            if c < best.0 {
                best = (c, set.clone());
            }
            // next combination in lexicographic order
            let Some(pos) = (0..k).rev().find(|&i| set[i] < n - k + i) else { break };
            set[pos] += 1;
            for i in pos + 1..k {
                set[i] = set[i - 1] + 1;
            }
        }
        return Ok(DiscreteMedian {
            indices: best.1,
            cost: best.0,
            factor: 1.0,
        });
    }

    // greedy start, then swaps until none improves
    let mut set: Vec<usize> = Vec::with_capacity(k);
    while set.len() < k {
        let pick = (0..n)
            .filter(|j| !set.contains(j))
            .map(|j| {
                let mut s = set.clone();
                s.push(j);
                (j, cost_of(&s))
            })
            .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        set.push(pick.0);
    }
    let mut cost = cost_of(&set);
    loop {
        let swap = (0..k)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .collect::<Vec<_>>()
            .into_par_iter()
            .filter(|&(_, b)| !set.contains(&b))
            .map(|(a, b)| {
                let mut s = set.clone();
                s[a] = b;
                (a, b, cost_of(&s))
            })
            .reduce(
                || (usize::MAX, usize::MAX, f64::INFINITY),
                |x, y| if y.2 < x.2 || (y.2 == x.2 && (y.0, y.1) < (x.0, x.1)) { y } else { x },
            );
        if swap.2 < cost * (1.0 - 1e-12) {
            set[swap.0] = swap.1;
            cost = swap.2;
        } else {
            break;
        }
    }
    set.sort_unstable();
    Ok(DiscreteMedian {
        indices: set,
        cost,
        factor: 5.0,
    })
}

/// Constant-factor approximation: discrete k-median on the inputs'
/// ℓ-simplifications.
///
/// Returns the solution and `[D/f, D]`, which contains the optimal cost,
/// where `D` adds the simplification errors to the discrete cost and
/// `f` is 8 with the exact discrete solver and 32 with local search.
pub fn constant_factor_median(p: &[Curve], k: usize, ell: usize) -> Result<(ClusteringSolution, (f64, f64))> {
    constant_factor_median_weighted(p, &vec![1.0; p.len()], k, ell)
}

/// [`constant_factor_median`] where input `i` counts `weights[i]` times.
pub fn constant_factor_median_weighted(
    p: &[Curve],
    weights: &[f64],
    k: usize,
    ell: usize,
) -> Result<(ClusteringSolution, (f64, f64))> {
    check_inputs(p, "input set")?;
    if ell < 2 {
        return Err(FrescoError::invalid(format!("ell must be at least 2, got {ell}")));
    }
    let simplified: Vec<Curve> = p.par_iter().map(|t| simplify(t, ell)).collect::<Result<_>>()?;
    let err: f64 = p
        .par_iter()
        .zip(simplified.par_iter())
        .map(|(t, s)| distance(t, s))
        .collect::<Vec<_>>()
        .iter()
        .zip(weights)
        .map(|(d, w)| d * w)
        .sum();
    let discrete = discrete_kmedian_weighted(&simplified, weights, k)?;
    let centers: Vec<Curve> = discrete.indices.iter().map(|&i| simplified[i].clone()).collect();
    let d = discrete.cost + err;
    let beta = 2.0 * discrete.factor;
    let factor = 2.0 + beta + 2.0 * beta;
    let per: Vec<(usize, f64)> = p.par_iter().map(|t| nearest(t, &centers)).collect();
    let cost: f64 = per.iter().zip(weights).map(|(x, w)| x.1 * w).sum();
    if cost > d * (1.0 + 1e-9) + 1e-12 {
        return Err(FrescoError::Invariant(format!(
            "constant-factor median cost {cost} exceeds its bound {d}"
        )));
    }
    let solution = ClusteringSolution {
        centers,
        assignment: per.into_iter().map(|x| x.0).collect(),
        cost,
        guarantee: Guarantee {
            objective: Objective::Median,
            factor,
            epsilon: None,
            seed: None,
            success_probability: None,
        },
    };
    Ok((solution, (d / factor, d)))
}

/// Candidate medians from the signature vertices of sample curves.
///
/// Each curve contributes the vertices of its largest canonical signature
/// with at most `ell + 3` vertices; the union of `[v ± 8α]` is discretized
/// at resolution `beta`.
pub fn generate_median_candidates(s: &[Curve], alpha: f64, beta: f64, ell: usize) -> Result<CandidateSet> {
    if !(alpha > 0.0) || !(beta > 0.0) {
        return Err(FrescoError::invalid(format!(
            "alpha and beta must be positive, got {alpha} and {beta}"
        )));
    }
    check_inputs(s, "sample")?;
    let mut ranges = Vec::new();
    for tau in s {
        let sig = extract_signature(&build_vertex_permutation(tau), ell + 3)?;
        ranges.extend(sig.values().iter().map(|&v| (v, 8.0 * alpha)));
    }
    let u = union_of_ranges(&ranges)?;
    Ok(CandidateSet::from_grid(Grid::new(&u, beta)?, ell))
}

/// Coarse-to-fine search over curves whose vertices are grid points.
///
/// Every step moves one vertex, all vertices, or deletes a vertex, by
/// `stride` grid positions, keeping the best improving move; the stride
/// halves when no move improves.
struct GridSearch<'a> {
    inputs: &'a [Curve],
    weights: &'a [f64],
    grid: &'a Grid,
    ell: usize,
}

impl GridSearch<'_> {
    fn snap(&self, c: &Curve) -> Vec<u64> {
        c.values().iter().map(|&x| self.grid.nearest(x)).collect()
    }

    fn curve(&self, idx: &[u64]) -> Curve {
        let v: Vec<f64> = idx.iter().map(|&i| self.grid.get(i)).collect();
        Curve::new(&v).expect("grid points are finite")
    }

    fn cost(&self, c: &Curve, bound: f64) -> Option<f64> {
        cost_1_bounded(self.inputs, self.weights, c, bound)
    }

    fn moves(&self, idx: &[u64], stride: u64) -> Vec<Vec<u64>> {
        let top = self.grid.len() - 1;
        let step = |i: u64, up: bool| if up { (i + stride).min(top) } else { i.saturating_sub(stride) };
        let mut out = Vec::new();
        for j in 0..idx.len() {
            for up in [true, false] {
                let mut m = idx.to_vec();
                m[j] = step(m[j], up);
                out.push(m);
            }
        }
        for up in [true, false] {
            out.push(idx.iter().map(|&i| step(i, up)).collect());
        }
        if idx.len() > 1 {
            for j in 0..idx.len() {
                let mut m = idx.to_vec();
                m.remove(j);
                out.push(m);
            }
        }
        out.retain(|m| m.as_slice() != idx && m.len() <= self.ell);
        out
    }

    /// Local optimum reached from `start`, refining until a grid step of
    /// `stride·β` falls below `resolution`.
    fn descend(&self, start: &Curve, first_stride: u64, resolution: f64) -> (Curve, f64) {
        let mut idx = self.snap(start);
        let mut cur = self.curve(&idx);
        idx = self.snap(&cur);
        let mut cost = self.cost(&cur, f64::INFINITY).unwrap();
        let mut stride = first_stride.max(1);
        loop {
            for _ in 0..MAX_SWEEPS {
                let cands = self.moves(&idx, stride);
                let best = cands
                    .par_iter()
                    .enumerate()
                    .filter_map(|(n, m)| {
                        let c = self.curve(m);
                        self.cost(&c, cost).map(|v| (v, n, c))
                    })
                    .reduce_with(|a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
                match best {
                    Some((v, _, c)) if v < cost => {
                        cost = v;
                        idx = self.snap(&c);
                        cur = c;
                    }
                    _ => break,
                }
            }
            if stride == 1 || (stride as f64) * self.grid.beta() < resolution {
                break;
            }
            stride /= 2;
        }
        (cur, cost)
    }
}

/// Draws `size` indices of `0..n` with replacement; returns the distinct
/// indices and their multiplicities.
fn draw(rng: &mut ChaCha8Rng, n: usize, size: usize) -> (Vec<usize>, Vec<f64>) {
    let mut counts = vec![0u32; n];
    for _ in 0..size {
        counts[rng.gen_range(0..n)] += 1;
    }
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i, f64::from(c)))
        .unzip()
}

/// One sampling round of the 1-median algorithm on `p`.
fn median_round(p: &[Curve], cfg: &SampleConfig, rng: &mut ChaCha8Rng) -> Result<(Curve, f64)> {
    let size = sample_size(cfg)?;
    let (picked, weights) = draw(rng, p.len(), size);
    let sample: Vec<Curve> = picked.iter().map(|&i| p[i].clone()).collect();
    let (cf, (dmin, dmax)) = constant_factor_median_weighted(&sample, &weights, 1, cfg.ell)?;
    let unit = vec![1.0; p.len()];
    let fallback = cf.centers[0].clone();
    if !(dmin > 0.0) {
        let cost = cost_1_bounded(p, &unit, &fallback, f64::INFINITY).unwrap();
        return Ok((fallback, cost));
    }
    let eps = cfg.epsilon / 4.0;
    let lam = cfg.lambda / 4.0;
    let alpha = 6.0 * dmax / eps;
    let beta = eps * lam * dmin / size as f64;
    let gamma = generate_median_candidates(&sample, alpha, beta, cfg.ell)?;
    let grid = gamma.grid().expect("median candidates always have a grid");
    let search = GridSearch {
        inputs: p,
        weights: &unit,
        grid,
        ell: cfg.ell,
    };

    // seeds: the sample's constant-factor center and its two best
    // simplified members
    let mut seeds: Vec<(f64, Curve)> = sample
        .par_iter()
        .map(|t| {
            let s = simplify(t, cfg.ell).expect("ell >= 2");
            (cost_1_bounded(p, &unit, &s, f64::INFINITY).unwrap(), s)
        })
        .collect();
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.truncate(2);
    let mut starts = vec![fallback];
    starts.extend(seeds.into_iter().map(|s| s.1));

    // strides start at the typical per-curve distance of the sample and
    // stop below a small fraction of the current mean distance
    let per_curve = dmax / size as f64;
    let first_stride = ((per_curve / beta).ceil() as u64).clamp(1, grid.len());
    let mut best: Option<(Curve, f64)> = None;
    for s in &starts {
        let mean = cost_1_bounded(p, &unit, s, f64::INFINITY).unwrap() / p.len() as f64;
        let (c, v) = search.descend(s, first_stride, eps * mean / 8.0);
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((c, v));
        }
    }
    Ok(best.unwrap())
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// (1+ε)-approximate 1-median with probability at least `1 − λ` per repeat.
///
/// Each repeat draws its own sample from an independent stream of the
/// seeded generator; the best center over all repeats is returned.
pub fn one_median(p: &[Curve], ell: usize, cfg: &SampleConfig) -> Result<ClusteringSolution> {
    check_inputs(p, "input set")?;
    let cfg = SampleConfig { ell, ..*cfg };
    cfg.validate()?;
    let mut best: Option<(Curve, f64)> = None;
    for rep in 0..cfg.repeats {
        let mut rng = rng_for(cfg.seed, rep as u64);
        let (c, v) = median_round(p, &cfg, &mut rng)?;
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((c, v));
        }
    }
    let (center, _) = best.unwrap();
    finish(p, vec![center], &cfg, Some(1.0 - cfg.lambda.powi(cfg.repeats as i32)))
}

fn finish(p: &[Curve], centers: Vec<Curve>, cfg: &SampleConfig, prob: Option<f64>) -> Result<ClusteringSolution> {
    let (cost, assignment) = cost_1(p, &centers)?;
    Ok(ClusteringSolution {
        centers,
        assignment,
        cost,
        guarantee: Guarantee {
            objective: Objective::Median,
            factor: 1.0 + cfg.epsilon,
            epsilon: Some(cfg.epsilon),
            seed: Some(cfg.seed),
            success_probability: prob,
        },
    })
}

/// (1+ε)-approximate k-median by repeated sampling.
///
/// At each of `k` levels a few pivot inputs are drawn from the inputs not
/// yet pruned; for each pivot the 1-median search runs on the pivot's
/// nearest share of those inputs, and the closest half of them to the
/// centers chosen so far is pruned before the next level. The best
/// complete tuple by cost on all inputs wins, with the constant-factor
/// solution as a baseline.
pub fn k_median(p: &[Curve], k: usize, ell: usize, cfg: &SampleConfig) -> Result<ClusteringSolution> {
    check_inputs(p, "input set")?;
    let cfg = SampleConfig { ell, ..*cfg };
    cfg.validate()?;
    if k == 0 || k > p.len() {
        return Err(FrescoError::invalid(format!("k must be in 1..={}, got {k}", p.len())));
    }
    if k == 1 {
        return one_median(p, ell, &cfg);
    }
    let (base, _) = constant_factor_median(p, k, ell)?;
    let mut best = (base.cost, base.centers);
    for rep in 0..cfg.repeats {
        let mut rng = rng_for(cfg.seed, rep as u64);
        let all: Vec<usize> = (0..p.len()).collect();
        if let Some((cost, centers)) = branch(p, &all, Vec::new(), k, &cfg, &mut rng)? {
            if cost < best.0 {
                best = (cost, centers);
            }
        }
    }
    finish(p, best.1, &cfg, None)
}

fn branch(
    p: &[Curve],
    remaining: &[usize],
    chosen: Vec<Curve>,
    k: usize,
    cfg: &SampleConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(f64, Vec<Curve>)>> {
    if chosen.len() == k {
        let (cost, _) = cost_1(p, &chosen)?;
        return Ok(Some((cost, chosen)));
    }
    let pool: Vec<usize> = if remaining.is_empty() { (0..p.len()).collect() } else { remaining.to_vec() };
    let left = k - chosen.len();
    let share = pool.len().div_ceil(left);
    let mut best: Option<(f64, Vec<Curve>)> = None;
    for _ in 0..PIVOTS.min(pool.len()) {
        let pivot = &p[pool[rng.gen_range(0..pool.len())]];
        let mut near: Vec<(f64, usize)> = pool.par_iter().map(|&i| (distance(&p[i], pivot), i)).collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let group: Vec<Curve> = near.iter().take(share).map(|&(_, i)| p[i].clone()).collect();
        let (center, _) = median_round(&group, cfg, rng)?;
        let mut next = chosen.clone();
        next.push(center);
        // prune the half of the pool closest to the chosen centers
        let mut gaps: Vec<(f64, usize)> = pool.par_iter().map(|&i| (nearest(&p[i], &next).1, i)).collect();
        gaps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let keep: Vec<usize> = gaps[pool.len().div_ceil(2)..].iter().map(|x| x.1).collect();
        if let Some(found) = branch(p, &keep, next, k, cfg, rng)? {
            if best.as_ref().is_none_or(|b| found.0 < b.0) {
                best = Some(found);
            }
        }
    }
    Ok(best)
}
