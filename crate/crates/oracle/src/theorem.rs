//! Ground truth for one rule application: the real change in violations and
//! the direct sustaining/improving flags, both read off the result graph.

use gtr_graph::{Constraint, Morphism, Rule, TypedGraph};
use serde::Serialize;

use crate::apply::naive_apply;
use crate::semantics::{morphisms, oracle_nv, oracle_satisfies};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeltaCheck {
    pub predicted: i64,
    pub actual: i64,
    pub equal: bool,
}

/// Matches of `rule` in `host` that satisfy the dangling condition.
pub fn naive_matches(rule: &Rule, host: &TypedGraph) -> Vec<Morphism> {
    morphisms(&rule.lhs, host, &[], &[]).into_iter().filter(|m| naive_apply(rule, host, m).is_some()).collect()
}

/// `nv(H) − nv(G)`, or `None` if `rule` is not applicable at `m`.
pub fn actual_delta(host: &TypedGraph, rule: &Rule, m: &Morphism, c: &Constraint) -> Option<i64> {
    let step = naive_apply(rule, host, m)?;
    Some(oracle_nv(&step.result, c) as i64 - oracle_nv(host, c) as i64)
}

pub fn verify_delta_theorem(
    host: &TypedGraph,
    rule: &Rule,
    m: &Morphism,
    c: &Constraint,
    predicted: i64,
) -> Option<DeltaCheck> {
    let actual = actual_delta(host, rule, m, c)?;
    Some(DeltaCheck { predicted, actual, equal: predicted == actual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DirectFlags {
    pub sustaining: bool,
    pub improving: bool,
}

/// Searches repaired and impaired premise occurrences directly.
pub fn direct_flags(host: &TypedGraph, rule: &Rule, m: &Morphism, c: &Constraint) -> Option<DirectFlags> {
    let step = naive_apply(rule, host, m)?;
    let h = &step.result;
    let d = c.conclusion();
    let mut tracked = Vec::new();
    let mut impaired = false;
    let mut repaired = false;
    for p in morphisms(c.premise(), host, &[], &[]) {
        let before = oracle_satisfies(host, &p, d);
        match step.track(&p) {
            Some(t) => {
                let after = oracle_satisfies(h, &t, d);
                impaired |= before && !after;
                repaired |= !before && after;
                tracked.push(t);
            }
            None => repaired |= !before,
        }
    }
    for p in morphisms(c.premise(), h, &[], &[]) {
        if !tracked.contains(&p) && !oracle_satisfies(h, &p, d) {
            impaired = true;
        }
    }
    Some(DirectFlags { sustaining: !impaired, improving: !impaired && repaired })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub rule: String,
    #[serde(rename = "match")]
    pub matching: String,
    pub constraint: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub cases: usize,
    /// Individual comparisons made across all cases.
    pub checks: usize,
    pub failures: Vec<Failure>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, other: OracleReport) {
        self.cases += other.cases;
        self.checks += other.checks;
        self.failures.extend(other.failures);
    }
}
