mod support;

use fresco::fixtures::planted_instance;
use fresco::{
    constant_factor_median, cost_1, delta_signature, discrete_kmedian, distance, generate_median_candidates,
    k_median, one_median, Curve, SampleConfig,
};
use proptest::prelude::*;
use support::*;

fn inputs(max_n: usize, max_m: usize) -> impl Strategy<Value = Vec<Curve>> {
    prop::collection::vec(curve(max_m), 1..=max_n)
}

fn cfg(seed: u64, repeats: usize) -> SampleConfig {
    SampleConfig { epsilon: 0.5, lambda: 0.2, ell: 2, seed, repeats }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_matches_brute_force(p in inputs(6, 8), c in inputs(3, 5)) {
        let (cost, _) = cost_1(&p, &c).unwrap();
        let brute: f64 = p
            .iter()
            .map(|t| c.iter().map(|x| distance_oracle(t.values(), x.values())).fold(f64::INFINITY, f64::min))
            .sum();
        prop_assert!((cost - brute).abs() <= 1e-7 * brute.max(1.0));
    }

    #[test]
    fn adding_centers_never_hurts(p in inputs(6, 8), c in inputs(3, 5), extra in curve(5)) {
        let (before, _) = cost_1(&p, &c).unwrap();
        let mut more = c.clone();
        more.push(extra);
        let (after, _) = cost_1(&p, &more).unwrap();
        prop_assert!(after <= before);
    }

    #[test]
    fn omitting_far_vertices(p in inputs(6, 10), pi in curve(8), eps in 0.1f64..2.0, drop in any::<u64>()) {
        let mut x: Vec<(f64, &Curve)> = p.iter().map(|t| (distance(t, &pi), t)).collect();
        x.sort_by(|a, b| a.0.total_cmp(&b.0));
        prop_assume!(x[0].0 > 0.0);
        let cutoff = 2.0 * x[0].0 / eps;
        let mut ranges = Vec::new();
        for &(xi, t) in x.iter().filter(|e| e.0 <= cutoff) {
            for &v in delta_signature(t, xi).values() {
                ranges.push((v - 4.0 * xi, v + 4.0 * xi));
            }
        }
        let inside = |v: f64| ranges.iter().any(|&(lo, hi)| lo <= v && v <= hi);
        let kept: Vec<f64> = pi
            .values()
            .iter()
            .enumerate()
            .filter(|&(j, &v)| inside(v) || drop >> (j % 64) & 1 == 0)
            .map(|(_, &v)| v)
            .collect();
        prop_assert!(!kept.is_empty());
        let hat = Curve::new(&kept).unwrap();
        let (orig, _) = cost_1(&p, &[pi]).unwrap();
        let (omitted, _) = cost_1(&p, &[hat]).unwrap();
        prop_assert!(omitted <= (1.0 + eps) * orig + 1e-9, "{} > (1+{}) {}", omitted, eps, orig);
    }

    #[test]
    fn discrete_exact_matches_enumeration(p in inputs(7, 6), k in 1usize..=3) {
        prop_assume!(k <= p.len());
        let d = discrete_kmedian(&p, k).unwrap();
        prop_assert_eq!(d.indices.len(), k);
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << p.len()) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let c: Vec<Curve> = (0..p.len()).filter(|i| mask >> i & 1 == 1).map(|i| p[i].clone()).collect();
            best = best.min(cost_1(&p, &c).unwrap().0);
        }
        prop_assert!((d.cost - best).abs() <= 1e-9 * best.max(1.0));
    }

    #[test]
    fn constant_factor_bracket(p in inputs(6, 10), k in 1usize..=2, ell in 2usize..=4) {
        prop_assume!(k <= p.len());
        let (s, (lo, hi)) = constant_factor_median(&p, k, ell).unwrap();
        prop_assert!(lo <= hi);
        prop_assert!(s.cost <= hi + 1e-9);
        prop_assert!(s.centers.iter().all(|c| c.len() <= ell));
        // every exhibited solution costs at least the lower end
        let simplified: Vec<Curve> = p.iter().map(|t| fresco::simplify(t, ell).unwrap()).collect();
        let (other, _) = cost_1(&p, &simplified[..k]).unwrap();
        prop_assert!(other >= lo - 1e-9);
    }

    #[test]
    fn candidate_grid_size(s in inputs(3, 10), alpha in 0.5f64..5.0, ratio in 0.05f64..1.0, ell in 2usize..=4) {
        let beta = alpha * ratio;
        let g = generate_median_candidates(&s, alpha, beta, ell).unwrap();
        let bound = 16.0 * alpha * (s.len() * (ell + 3)) as f64 / beta;
        prop_assert!((g.grid().unwrap().len() as f64) <= bound + 2.0 * (s.len() * (ell + 3)) as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn one_median_respects_lower_bound(p in inputs(5, 8), seed in any::<u64>()) {
        let s = one_median(&p, 2, &cfg(seed, 1)).unwrap();
        let (_, (lo, _)) = constant_factor_median(&p, 1, 2).unwrap();
        prop_assert!(s.cost >= lo - 1e-9);
        let (again, assign) = cost_1(&p, &s.centers).unwrap();
        prop_assert_eq!(again, s.cost);
        prop_assert_eq!(assign, s.assignment);
        prop_assert!(s.centers[0].len() <= 2);
    }

    #[test]
    fn median_is_deterministic(p in inputs(5, 8), seed in any::<u64>(), k in 1usize..=2) {
        prop_assume!(k <= p.len());
        let a = k_median(&p, k, 3, &cfg(seed, 2)).unwrap();
        let b = k_median(&p, k, 3, &cfg(seed, 2)).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn two_groups_within_planted_cost() {
    let mut ok = 0;
    for seed in 0..50u64 {
        let inst = planted_instance(2, 3, 16, 20, 1.0, 10.0, 500 + seed % 5).unwrap();
        let planted = cost_1(&inst.inputs, &inst.centers).unwrap().0;
        let s = k_median(&inst.inputs, 2, 3, &cfg(seed, 1)).unwrap();
        if s.cost <= 1.5 * planted {
            ok += 1;
        }
    }
    assert!(ok >= 30, "{ok}/50");
}

#[test]
fn all_centers_gives_zero() {
    let p: Vec<Curve> = [[0.0, 5.0, 1.0], [10.0, 3.0, 8.0], [-4.0, 6.0, 2.0]]
        .iter()
        .map(|v| Curve::new(v).unwrap())
        .collect();
    let s = k_median(&p, 3, 3, &cfg(1, 1)).unwrap();
    assert_eq!(s.cost, 0.0);
}

#[test]
fn planted_bracket_is_within_eight_n_r() {
    for seed in 0..10u64 {
        let inst = planted_instance(1, 3, 20, 30, 1.0, 10.0, 900 + seed).unwrap();
        let (_, (_, d1)) = constant_factor_median(&inst.inputs, 1, 3).unwrap();
        assert!(d1 <= 8.0 * 20.0 * inst.bound, "{d1}");
    }
}
