use crate::curve::Curve;

/// Which clustering objective a solution optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Maximum distance of an input to its nearest center.
    Center,
    /// Sum of distances of inputs to their nearest centers.
    Median,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Center => "center",
            Objective::Median => "median",
        }
    }
}

/// What is known about a solution's quality.
#[derive(Debug, Clone, PartialEq)]
pub struct Guarantee {
    pub objective: Objective,
    /// Bound on `cost / opt`, or `f64::INFINITY` when none holds. For the
    /// sampling algorithms this is the target ratio, met with
    /// `success_probability` when that is known.
    pub factor: f64,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub success_probability: Option<f64>,
}

/// Centers, the assignment of inputs to them, and the resulting cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringSolution {
    pub centers: Vec<Curve>,
    /// `assignment[i]` is the index of the center nearest to input `i`.
    pub assignment: Vec<usize>,
    pub cost: f64,
    pub guarantee: Guarantee,
}
