//! Exhaustive optimum of the cohesion/coupling metric over all ways of
//! grouping features into classes.

use std::collections::BTreeMap;

use gtr_cra::{FeatureKind, FeatureModel};
use gtr_graph::TypedGraph;
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_BOUND: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{features} features exceed the exhaustive-search bound of {bound}")]
    BoundExceeded { features: usize, bound: usize },
    #[error("feature `{0}` is not contained in exactly one class")]
    Unassigned(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Optimum {
    /// Class index per feature, in feature order.
    pub assignment: Vec<usize>,
    #[serde(rename = "minViolations")]
    pub min_violations: usize,
    pub partitions: u64,
}

/// The metric of one grouping, straight from its definition:
/// same-class method pairs without a dependency either way, same-class
/// method/attribute pairs without a dependency, and every dependency that
/// crosses classes.
pub fn partition_metric(model: &FeatureModel, class_of: &[usize]) -> usize {
    let index: BTreeMap<&str, usize> = model.features.iter().enumerate().map(|(i, f)| (f.name.as_str(), i)).collect();
    let depends =
        |a: usize, b: usize| model.deps.iter().any(|d| index[d.from.as_str()] == a && index[d.to.as_str()] == b);
    let n = model.features.len();
    let mut v = 0;
    for a in 0..n {
        if model.features[a].kind != FeatureKind::Method {
            continue;
        }
        for b in 0..n {
            if a == b || class_of[a] != class_of[b] {
                continue;
            }
            let linked = match model.features[b].kind {
                FeatureKind::Method => depends(a, b) || depends(b, a),
                FeatureKind::Attribute => depends(a, b),
            };
            v += usize::from(!linked);
        }
    }
    v + model.deps.iter().filter(|d| class_of[index[d.from.as_str()]] != class_of[index[d.to.as_str()]]).count()
}

/// Reads the grouping off a class diagram; classes are numbered in node order.
pub fn assignment_of_graph(model: &FeatureModel, g: &TypedGraph) -> Result<Vec<usize>, OracleError> {
    model
        .features
        .iter()
        .map(|f| {
            let n = g.node_by_id(&f.name).ok_or_else(|| OracleError::Unassigned(f.name.clone()))?;
            let owners: Vec<usize> = g
                .in_edges(n)
                .iter()
                .map(|&e| g.edge(e))
                .filter(|e| g.node(e.src).ty == gtr_cra::CLASS)
                .map(|e| e.src)
                .collect();
            match owners.as_slice() {
                [c] => Ok(*c),
                _ => Err(OracleError::Unassigned(f.name.clone())),
            }
        })
        .collect()
}

/// Walks every set partition as a restricted growth string.
pub fn cra_optimal_assignment(model: &FeatureModel, bound: usize) -> Result<Optimum, OracleError> {
    let n = model.features.len();
    if n > bound {
        return Err(OracleError::BoundExceeded { features: n, bound });
    }
    if n == 0 {
        return Ok(Optimum { assignment: vec![], min_violations: 0, partitions: 1 });
    }
    let mut a = vec![0usize; n];
    let mut best = (usize::MAX, a.clone());
    let mut partitions = 0u64;
    loop {
        partitions += 1;
        let v = partition_metric(model, &a);
        if v < best.0 {
            best = (v, a.clone());
        }
        // next restricted growth string
        let mut i = n - 1;
        loop {
            let ceiling = a[..i].iter().copied().max().map_or(0, |m| m + 1);
            if i > 0 && a[i] < ceiling {
                a[i] += 1;
                for x in &mut a[i + 1..] {
                    *x = 0;
                }
                break;
            }
            if i <= 1 {
                return Ok(Optimum { assignment: best.1, min_violations: best.0, partitions });
            }
            i -= 1;
        }
    }
}
