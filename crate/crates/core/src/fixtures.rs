//! Generators for curve families with known distances and clustering costs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::Curve;
use crate::error::{FrescoError, Result};

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let d = points.first().map_or(0, Vec::len);
    if d < 2 {
        return Err(FrescoError::invalid(format!(
            "embedding needs points of dimension at least 2, got {d}"
        )));
    }
    if let Some(bad) = points.iter().find(|p| p.len() != d) {
        return Err(FrescoError::invalid(format!(
            "mixed dimensions {d} and {}",
            bad.len()
        )));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(FrescoError::invalid("coordinates must be finite"));
    }
    Ok(d)
}

/// Largest ∞-norm among `points`, or 1 when all are zero.
pub fn embedding_delta(points: &[Vec<f64>]) -> f64 {
    let d = points.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if d > 0.0 {
        d
    } else {
        1.0
    }
}

/// Translation `(6δ, −6δ, 6δ, …)` of length `d`.
fn translation(d: usize, delta: f64) -> impl Iterator<Item = f64> {
    (0..d).map(move |j| if j % 2 == 0 { 6.0 * delta } else { -6.0 * delta })
}

/// Maps points of ℓ∞^d to curves so that Fréchet distance equals ℓ∞
/// distance, using `δ = max ‖w‖_∞`.
pub fn embed_linf(points: &[Vec<f64>]) -> Result<Vec<Curve>> {
    embed_linf_with_bound(points, embedding_delta(points))
}

/// [`embed_linf`] with a caller-fixed `delta`, which must bound every
/// coordinate's magnitude. Lets point sets be embedded incrementally.
pub fn embed_linf_with_bound(points: &[Vec<f64>], delta: f64) -> Result<Vec<Curve>> {
    let d = check_points(points)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(FrescoError::invalid(format!("bound must be positive, got {delta}")));
    }
    if points.iter().flatten().any(|x| x.abs() > delta) {
        return Err(FrescoError::invalid(format!(
            "a coordinate exceeds the bound {delta}"
        )));
    }
    points
        .iter()
        .map(|w| {
            let v: Vec<f64> = w.iter().zip(translation(d, delta)).map(|(x, t)| x + t).collect();
            Curve::new(&v)
        })
        .collect()
}

/// Inverse of the embedding for a curve produced with bound `delta`.
pub fn unembed(curve: &Curve, delta: f64) -> Vec<f64> {
    curve
        .values()
        .iter()
        .zip(translation(curve.len(), delta))
        .map(|(x, t)| x - t)
        .collect()
}

/// `2^d + 1` curves pairwise at distance 1/4, all within 1/8 of the
/// returned center.
pub fn doubling_unbounded_fixture(d: u32) -> Result<(Vec<Curve>, Curve)> {
    if !(1..=20).contains(&d) {
        return Err(FrescoError::invalid(format!("d must be in 1..=20, got {d}")));
    }
    let count = (1u64 << d) + 1;
    let top = (1u64 << d) as f64 + 2.0;
    let curves = (1..=count)
        .map(|i| {
            let i = i as f64;
            Curve::new(&[0.0, i, i - 0.5, top])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut c = vec![0.0];
    for i in 1..=count {
        let i = i as f64;
        c.push(i - 0.125);
        c.push(i - 0.375);
    }
    c.push(top);
    Ok((curves, Curve::new(&c)?))
}

/// `2^d + 1` curves of at most `ell` vertices, each within 1/4 of
/// `(0, s(2^d + 2))` with `s = ⌊(ℓ−2)/2⌋`, whose 1/8-signatures are the
/// curves themselves.
pub fn doubling_bounded_fixture(d: u32, ell: usize) -> Result<Vec<Curve>> {
    if ell <= 3 {
        return Err(FrescoError::invalid(format!("ell must exceed 3, got {ell}")));
    }
    if !(1..=20).contains(&d) {
        return Err(FrescoError::invalid(format!("d must be in 1..=20, got {d}")));
    }
    let s = ((ell - 2) / 2) as u64;
    let count = (1u64 << d) + 1;
    (1..=count)
        .map(|i| {
            let mut v = vec![0.0];
            for j in 1..=s {
                let peak = (s * (i - 1) + j) as f64;
                v.push(peak);
                v.push(peak - 0.5);
            }
            v.push((s * ((1u64 << d) + 2)) as f64);
            Curve::new(&v)
        })
        .collect()
}

/// The center of [`doubling_bounded_fixture`].
pub fn doubling_bounded_center(d: u32, ell: usize) -> Result<Curve> {
    if ell <= 3 {
        return Err(FrescoError::invalid(format!("ell must exceed 3, got {ell}")));
    }
    let s = ((ell - 2) / 2) as f64;
    Curve::new(&[0.0, s * ((1u64 << d) as f64 + 2.0)])
}

/// A clustering instance with known centers.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub inputs: Vec<Curve>,
    pub centers: Vec<Curve>,
    /// Index of the center each input was generated from.
    pub labels: Vec<usize>,
    /// Every input lies within this distance of its center.
    pub bound: f64,
}

/// `n` inputs around `k` random centers of `ell` vertices.
///
/// Each input subdivides its center's edges to `m` vertices and moves
/// every vertex by at most `radius`, so it lies within `radius` of its
/// center. Consecutive center vertices differ by more than `separation`,
/// and centers are at least `separation` apart from each other. The
/// first `k` inputs use centers `0..k` in order.
pub fn planted_instance(
    k: usize,
    ell: usize,
    n: usize,
    m: usize,
    radius: f64,
    separation: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    if k == 0 || n < k {
        return Err(FrescoError::invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if ell < 2 || m < ell {
        return Err(FrescoError::invalid(format!(
            "need 2 <= ell <= m, got ell={ell}, m={m}"
        )));
    }
    if !(radius >= 0.0) || !radius.is_finite() || !separation.is_finite() || separation <= 8.0 * radius {
        return Err(FrescoError::invalid(format!(
            "need 0 <= radius and separation > 8 * radius, got {radius} and {separation}"
        )));
    }
    if separation <= 0.0 {
        return Err(FrescoError::invalid("separation must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Curve> = (0..k)
        .map(|j| {
            let mut v = Vec::with_capacity(ell);
            v.push(j as f64 * 2.0 * separation + rng.gen_range(0.0..separation / 2.0));
            let mut up = rng.gen_bool(0.5);
            for _ in 1..ell {
                let step = separation * rng.gen_range(1.1..2.0);
                let last = *v.last().unwrap();
                v.push(if up { last + step } else { last - step });
                up = !up;
            }
            Curve::new(&v)
        })
        .collect::<Result<_>>()?;

    let mut inputs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i < k { i } else { rng.gen_range(0..k) };
        let c = centers[label].values();
        // distribute the extra vertices over the edges
        let edges = c.len() - 1;
        let mut extra = vec![0usize; edges];
        for _ in 0..m - c.len() {
            extra[rng.gen_range(0..edges)] += 1;
        }
        let mut v = Vec::with_capacity(m);
        for (e, &cnt) in extra.iter().enumerate() {
            v.push(c[e]);
            let mut ts: Vec<f64> = (0..cnt).map(|_| rng.gen_range(0.0..1.0)).collect();
            ts.sort_by(f64::total_cmp);
            v.extend(ts.into_iter().map(|t| c[e] + t * (c[e + 1] - c[e])));
        }
        v.push(c[c.len() - 1]);
        for x in &mut v {
            if radius > 0.0 {
                *x += rng.gen_range(-radius..=radius);
            }
        }
        inputs.push(Curve::new(&v)?);
        labels.push(label);
    }
    Ok(PlantedInstance {
        inputs,
        centers,
        labels,
        bound: radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frechet::distance;

    fn c(v: &[f64]) -> Curve {
        Curve::new(v).unwrap()
    }

    #[test]
    fn embedding_examples() {
        let pts = vec![vec![1.0, 2.0], vec![3.0, -1.0]];
        let e = embed_linf(&pts).unwrap();
        assert_eq!(e[0], c(&[19.0, -16.0]));
        assert_eq!(e[1], c(&[21.0, -19.0]));
        assert_eq!(distance(&e[0], &e[1]), 3.0);
        assert_eq!(unembed(&e[1], 3.0), vec![3.0, -1.0]);

        let e = embed_linf(&[vec![0.0, 0.0, 0.0], vec![1.0, -2.0, 3.0]]).unwrap();
        assert_eq!(distance(&e[0], &e[1]), 3.0);
        let same = embed_linf(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(distance(&same[0], &same[1]), 0.0);
    }

    #[test]
    fn embedding_rejects_bad_input() {
        assert!(embed_linf(&[vec![1.0]]).is_err());
        assert!(embed_linf(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(embed_linf_with_bound(&[vec![5.0, 0.0]], 1.0).is_err());
        // the all-zero set still embeds with full complexity
        let z = embed_linf(&[vec![0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(z[0].len(), 3);
    }

    #[test]
    fn doubling_unbounded_examples() {
        let (p, center) = doubling_unbounded_fixture(1).unwrap();
        assert_eq!(p, vec![c(&[0.0, 1.0, 0.5, 4.0]), c(&[0.0, 2.0, 1.5, 4.0]), c(&[0.0, 3.0, 2.5, 4.0])]);
        assert_eq!(center.len(), 2 * 3 + 2);
        for (i, a) in p.iter().enumerate() {
            assert!(distance(a, &center) <= 0.125);
            for b in &p[i + 1..] {
                assert_eq!(distance(a, b), 0.25);
            }
        }
        assert_eq!(doubling_unbounded_fixture(2).unwrap().0.len(), 5);
    }

    #[test]
    fn doubling_bounded_examples() {
        let p = doubling_bounded_fixture(1, 4).unwrap();
        assert_eq!(p, vec![c(&[0.0, 1.0, 0.5, 4.0]), c(&[0.0, 2.0, 1.5, 4.0]), c(&[0.0, 3.0, 2.5, 4.0])]);
        let center = doubling_bounded_center(1, 4).unwrap();
        assert_eq!(center.values(), &[0.0, 4.0]);
        for t in &p {
            assert!(distance(t, &center) <= 0.25);
        }
        assert!(doubling_bounded_fixture(1, 3).is_err());
        let p = doubling_bounded_fixture(2, 8).unwrap();
        assert!(p.iter().all(|t| t.len() <= 8));
        assert_eq!(p[0].values(), &[0.0, 1.0, 0.5, 2.0, 1.5, 3.0, 2.5, 18.0]);
    }

    #[test]
    fn planted_examples() {
        let inst = planted_instance(2, 3, 6, 10, 0.0, 10.0, 7).unwrap();
        for (t, &l) in inst.inputs.iter().zip(&inst.labels) {
            assert_eq!(distance(t, &inst.centers[l]), 0.0);
        }
        let inst = planted_instance(1, 2, 5, 8, 0.1, 10.0, 1).unwrap();
        for t in &inst.inputs {
            assert!(distance(t, &inst.centers[0]) <= 0.1);
        }
        let inst = planted_instance(2, 3, 12, 15, 0.5, 10.0, 3).unwrap();
        assert_eq!(&inst.labels[..2], &[0, 1]);
        assert!(distance(&inst.centers[0], &inst.centers[1]) > 4.0);
        for (t, &l) in inst.inputs.iter().zip(&inst.labels) {
            assert!(distance(t, &inst.centers[l]) <= 0.5);
            assert!(distance(t, &inst.centers[1 - l]) > 0.5);
        }
    }

    #[test]
    fn planted_rejects_bad_parameters() {
        assert!(planted_instance(1, 2, 5, 8, 1.0, 8.0, 0).is_err());
        assert!(planted_instance(1, 1, 5, 8, 0.1, 8.0, 0).is_err());
        assert!(planted_instance(1, 4, 5, 3, 0.1, 8.0, 0).is_err());
        assert!(planted_instance(3, 2, 2, 8, 0.1, 8.0, 0).is_err());
    }
}
