//! Clustering of univariate time series under the continuous Fréchet
//! distance, with cluster centers restricted to at most `ℓ` vertices.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod center;
pub mod curve;
pub mod error;
pub mod fixtures;
pub mod frechet;
pub mod median;
pub mod signature;
pub mod solution;

pub use curve::{concat, discretize, normalize, union_of_ranges, Curve, Grid, Interval, IntervalUnion};
pub use error::{FrescoError, Result};
pub use frechet::{decide, distance, monotone_distance};
pub use signature::{
    build_vertex_permutation, delta_signature, delta_signature_indices, extract_signature, simplify,
    validate_signature, validate_signature_indices, PermEntry, SignatureCondition, SignatureReport,
    VertexPermutation, Violation,
};
pub use center::{
    constant_factor_center, cost_inf, evaluate_cover, evaluate_cover_with, generate_center_candidates, gonzalez,
    refine_center, refine_center_with, CandidateSet, CenterOptions, DEFAULT_MAX_CANDIDATES,
};
pub use solution::{ClusteringSolution, Guarantee, Objective};
pub use median::{
    constant_factor_median, constant_factor_median_weighted, cost_1, discrete_kmedian, discrete_kmedian_weighted,
    generate_median_candidates, k_median, one_median, sample_size, DiscreteMedian, SampleConfig,
};
