use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

/// JSON report of the `cluster` subcommand. Non-finite numbers are
/// written as `null`.
#[derive(Debug, Serialize)]
pub struct ClusterReport {
    pub algorithm: &'static str,
    pub objective: &'static str,
    pub k: usize,
    pub ell: usize,
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub cost: f64,
    pub guarantee_factor: f64,
    pub centers: Vec<Vec<f64>>,
    /// Series id to center index, in input order.
    #[serde(serialize_with = "ordered_map")]
    pub assignment: Vec<(String, usize)>,
    pub runtime_ms: f64,
}

fn ordered_map<S: Serializer>(pairs: &[(String, usize)], s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(pairs.len()))?;
    for (k, v) in pairs {
        map.serialize_entry(k, v)?;
    }
    map.end()
}
