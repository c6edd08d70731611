//! Reference implementations used only by tests. They share no code with
//! the library's decision procedure.
#![allow(dead_code)]

use fresco::Curve;
use proptest::prelude::*;

/// Free parameter range `[lo, hi] ⊆ [0, 1]` of the segment `p -> q`
/// within `delta` of `x`, or `None`.
fn free(x: f64, p: f64, q: f64, delta: f64) -> Option<(f64, f64)> {
    let d = q - p;
    if d == 0.0 {
        return ((x - p).abs() <= delta).then_some((0.0, 1.0));
    }
    // |p + t·d - x| <= delta
    let t1 = (x - delta - p) / d;
    let t2 = (x + delta - p) / d;
    let (lo, hi) = (t1.min(t2).max(0.0), t1.max(t2).min(1.0));
    (lo <= hi).then_some((lo, hi))
}

/// Textbook free-space reachability in parameter space.
pub fn decide_oracle(a: &[f64], b: &[f64], delta: f64) -> bool {
    if (a[0] - b[0]).abs() > delta || (a[a.len() - 1] - b[b.len() - 1]).abs() > delta {
        return false;
    }
    if a.len() == 1 {
        return b.iter().all(|&y| (y - a[0]).abs() <= delta);
    }
    if b.len() == 1 {
        return a.iter().all(|&x| (x - b[0]).abs() <= delta);
    }
    let (n, m) = (a.len() - 1, b.len() - 1);
    // left[i][j]: reachable part of the vertical boundary at a-vertex i over b-edge j
    // bottom[i][j]: reachable part of the horizontal boundary at b-vertex j over a-edge i
    let mut left = vec![vec![None; m]; n + 1];
    let mut bottom = vec![vec![None; m + 1]; n];
    let mut open = true;
    for j in 0..m {
        open = open && (a[0] - b[j]).abs() <= delta;
        left[0][j] = if open { free(a[0], b[j], b[j + 1], delta) } else { None };
    }
    open = true;
    for i in 0..n {
        open = open && (b[0] - a[i]).abs() <= delta;
        bottom[i][0] = if open { free(b[0], a[i], a[i + 1], delta) } else { None };
    }
    for i in 0..n {
        for j in 0..m {
            let l: Option<(f64, f64)> = left[i][j];
            let bt: Option<(f64, f64)> = bottom[i][j];
            let right = free(a[i + 1], b[j], b[j + 1], delta);
            left[i + 1][j] = match (bt, l) {
                (Some(_), _) => right,
                (None, Some((lo, _))) => right.and_then(|(r0, r1)| {
                    let s = r0.max(lo);
                    (s <= r1).then_some((s, r1))
                }),
                _ => None,
            };
            let top = free(b[j + 1], a[i], a[i + 1], delta);
            bottom[i][j + 1] = match (l, bt) {
                (Some(_), _) => top,
                (None, Some((lo, _))) => top.and_then(|(t0, t1)| {
                    let s = t0.max(lo);
                    (s <= t1).then_some((s, t1))
                }),
                _ => None,
            };
        }
    }
    matches!(left[n][m - 1], Some((_, hi)) if hi >= 1.0)
}

/// Bisection on [`decide_oracle`]; the result is within `1e-11` relative
/// of the true distance, up to rounding in the parameter computations.
pub fn distance_oracle(a: &[f64], b: &[f64]) -> f64 {
    let mut hi = a
        .iter()
        .flat_map(|&x| b.iter().map(move |&y| (x - y).abs()))
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if decide_oracle(a, b, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn raw_values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..=max_len)
}

/// Curves with small integer values, rich in ties and coincidences.
pub fn tied_values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-6i32..=6).prop_map(f64::from), 1..=max_len)
}

pub fn curve(max_len: usize) -> impl Strategy<Value = Curve> {
    raw_values(max_len).prop_map(|v| Curve::new(&v).unwrap())
}

pub fn tied_curve(max_len: usize) -> impl Strategy<Value = Curve> {
    tied_values(max_len).prop_map(|v| Curve::new(&v).unwrap())
}

/// Sum of the absolute differences between consecutive vertices of `tau`.
pub fn total_variation(tau: &Curve) -> f64 {
    tau.values().windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}
