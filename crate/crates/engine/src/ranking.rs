//! Gain prediction per match, match ranking and greedy repair.
//!
//! Sign convention: `delta = impair − repair = nv(H) − nv(G)`, so negative
//! is good; reports print `gain = −delta`.

use std::collections::BTreeMap;
use std::sync::Arc;

use gtr_graph::{applicable_matches, apply_rule, count_violations, Constraint, Morphism, Rule, TypedGraph};
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::repair_ac::{derive_bundle, fingerprint, AcBundle, ApplicationCondition, DeriveOptions};

pub type Weight = f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankingError {
    #[error("bundle for `{rule}`/`{constraint}` was derived from a different rule or constraint")]
    StaleBundle { rule: String, constraint: String },
    #[error("left-hand side of `{0}` does not match the domain of the match")]
    DomainMismatch(String),
    #[error(
        "predicted and actual change differ for `{rule}` at {matching} on `{constraint}`: predicted {predicted}, actual {actual}"
    )]
    TheoremViolation { rule: String, matching: String, constraint: String, predicted: i64, actual: i64 },
    #[error("step {step} (`{rule}` at {matching}) violates hard constraint `{constraint}`")]
    HardViolation { step: usize, rule: String, matching: String, constraint: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub sustaining: bool,
    pub improving: bool,
    #[serde(rename = "directSustaining")]
    pub direct_sustaining: bool,
    #[serde(rename = "directImproving")]
    pub direct_improving: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintScore {
    pub constraint: String,
    pub repair: usize,
    pub impair: usize,
}

impl ConstraintScore {
    pub fn delta(&self) -> i64 {
        self.impair as i64 - self.repair as i64
    }
}

#[derive(Debug, Clone)]
pub struct RankedMatch<W = Weight> {
    pub rule: String,
    pub rule_index: usize,
    pub matching: Morphism,
    /// Element ids of the image, `lhsId->hostId` in left-hand-side order.
    pub signature: String,
    pub per_constraint: Vec<ConstraintScore>,
    pub delta: W,
}

fn check_bundle(rule: &Rule, c: &Constraint, bundle: &AcBundle) -> Result<(), RankingError> {
    if bundle.fingerprint != fingerprint(rule, c) {
        return Err(RankingError::StaleBundle { rule: rule.name.clone(), constraint: c.name.clone() });
    }
    Ok(())
}

fn check_match(rule: &Rule, m: &Morphism) -> Result<(), RankingError> {
    if m.nodes.len() != rule.lhs.node_count() || m.edges.len() != rule.lhs.edge_count() {
        return Err(RankingError::DomainMismatch(rule.name.clone()));
    }
    Ok(())
}

fn total(acs: &[ApplicationCondition], host: &TypedGraph, m: &Morphism) -> usize {
    acs.iter().map(|ac| ac.count(host, m)).sum()
}

/// `nv_m(ac)`.
pub fn ac_violation_count(ac: &ApplicationCondition, host: &TypedGraph, m: &Morphism) -> Result<usize, RankingError> {
    if m.nodes.len() != ac.lhs.node_count() || m.edges.len() != ac.lhs.edge_count() {
        return Err(RankingError::DomainMismatch(ac.rule.clone()));
    }
    Ok(ac.count(host, m))
}

/// Repair and impairment counts of one constraint at `m`.
pub fn score_constraint(
    rule: &Rule,
    c: &Constraint,
    bundle: &AcBundle,
    host: &TypedGraph,
    m: &Morphism,
) -> Result<ConstraintScore, RankingError> {
    check_bundle(rule, c, bundle)?;
    check_match(rule, m)?;
    Ok(ConstraintScore {
        constraint: c.name.clone(),
        repair: total(&bundle.repair, host, m),
        impair: total(&bundle.impairment, host, m),
    })
}

/// `nv(H) − nv(G)` for the step at `m`, without performing it.
pub fn predicted_delta(
    rule: &Rule,
    c: &Constraint,
    bundle: &AcBundle,
    host: &TypedGraph,
    m: &Morphism,
) -> Result<i64, RankingError> {
    Ok(score_constraint(rule, c, bundle, host, m)?.delta())
}

pub fn classify_transformation(
    rule: &Rule,
    c: &Constraint,
    bundle: &AcBundle,
    host: &TypedGraph,
    m: &Morphism,
) -> Result<Classification, RankingError> {
    let delta = predicted_delta(rule, c, bundle, host, m)?;
    // direct flags look at individual impairments, which cancellation hides
    let direct_sustaining = bundle.impairment_all.iter().all(|ac| ac.count(host, m) == 0);
    let direct_improving = direct_sustaining && bundle.repair_all.iter().any(|ac| ac.count(host, m) > 0);
    Ok(Classification { sustaining: delta <= 0, improving: delta < 0, direct_sustaining, direct_improving })
}

#[derive(Debug, Clone, Copy)]
pub struct ScorerOptions {
    /// Hosts never contain parallel edges of one type.
    pub simple_hosts: bool,
    pub cancel: bool,
    pub merge_equivalent: bool,
}

impl Default for ScorerOptions {
    fn default() -> Self {
        ScorerOptions { simple_hosts: true, cancel: true, merge_equivalent: true }
    }
}

/// Rules, weighted weak constraints and the derived bundles for every pair.
#[derive(Debug, Clone)]
pub struct Scorer<W = Weight> {
    pub rules: Vec<Rule>,
    pub weak: Vec<Constraint>,
    pub hard: Vec<Constraint>,
    pub weights: Vec<W>,
    /// `bundles[rule][weak constraint]`.
    pub bundles: Vec<Vec<AcBundle>>,
    /// Hard constraints not of the forbidden-pattern form.
    pub skipped_hard: Vec<String>,
}

impl<W: Float> Scorer<W> {
    /// Weights default to one for constraints missing from `weights`.
    pub fn new(rules: &[Rule], constraints: &[Constraint], weights: &BTreeMap<String, W>, opts: ScorerOptions) -> Self {
        let (simplifier, skipped_hard) = crate::shift::Simplifier::from_hard(constraints, opts.simple_hosts);
        let derive = DeriveOptions { simplifier, merge_equivalent: opts.merge_equivalent };
        let weak: Vec<Constraint> = constraints.iter().filter(|c| !c.is_hard()).cloned().collect();
        let hard: Vec<Constraint> = constraints.iter().filter(|c| c.is_hard()).cloned().collect();
        let bundles =
            rules.iter().map(|r| weak.iter().map(|c| derive_bundle(r, c, &derive, opts.cancel)).collect()).collect();
        let weights = weak.iter().map(|c| weights.get(&c.name).copied().unwrap_or_else(W::one)).collect();
        Scorer { rules: rules.to_vec(), weak, hard, weights, bundles, skipped_hard }
    }

    pub fn weighted(&self, counts: impl IntoIterator<Item = i64>) -> W {
        counts
            .into_iter()
            .zip(&self.weights)
            .fold(W::zero(), |acc, (n, &w)| acc + w * W::from(n).expect("counts fit the weight type"))
    }

    pub fn score(&self, host: &TypedGraph, rule_index: usize, m: &Morphism) -> Result<RankedMatch<W>, RankingError> {
        let rule = &self.rules[rule_index];
        let per_constraint = self
            .weak
            .iter()
            .zip(&self.bundles[rule_index])
            .map(|(c, b)| score_constraint(rule, c, b, host, m))
            .collect::<Result<Vec<_>, _>>()?;
        let delta = self.weighted(per_constraint.iter().map(ConstraintScore::delta));
        Ok(RankedMatch {
            rule: rule.name.clone(),
            rule_index,
            matching: m.clone(),
            signature: m.describe(&rule.lhs, host),
            per_constraint,
            delta,
        })
    }

    /// Every applicable match of every rule, best (most negative delta) first.
    pub fn rank_all(&self, host: &TypedGraph) -> Vec<RankedMatch<W>> {
        let mut out = Vec::new();
        for (i, rule) in self.rules.iter().enumerate() {
            for m in applicable_matches(rule, host) {
                out.push(self.score(host, i, &m).expect("bundles were derived for these rules"));
            }
        }
        out.sort_by(|a, b| {
            a.delta
                .partial_cmp(&b.delta)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.rule.cmp(&b.rule))
                .then_with(|| a.signature.cmp(&b.signature))
        });
        out
    }

    pub fn violation_counts(&self, host: &TypedGraph) -> Vec<usize> {
        self.weak.iter().map(|c| count_violations(host, c)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairConfig<W = Weight> {
    pub weights: BTreeMap<String, W>,
    pub max_iterations: usize,
    pub restarts: usize,
    /// Steps at the start of a run that pick uniformly among the top `top_k`.
    pub impair_budget: usize,
    pub top_k: usize,
    pub seed: u64,
    /// Re-count hard constraints after every step.
    pub check_hard: bool,
}

impl<W> Default for RepairConfig<W> {
    fn default() -> Self {
        RepairConfig {
            weights: BTreeMap::new(),
            max_iterations: 10_000,
            restarts: 1,
            impair_budget: 0,
            top_k: 5,
            seed: 0,
            check_hard: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    NoImprovingMove,
    NoApplicableMatch,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepScore {
    pub constraint: String,
    pub repair: usize,
    pub impair: usize,
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: String,
    #[serde(rename = "match")]
    pub matching: String,
    pub delta: f64,
    pub exploratory: bool,
    #[serde(rename = "perConstraint")]
    pub per_constraint: Vec<StepScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairTrace {
    pub seed: u64,
    pub steps: Vec<TraceStep>,
    pub initial: BTreeMap<String, usize>,
    #[serde(rename = "final")]
    pub final_counts: BTreeMap<String, usize>,
    #[serde(rename = "initialWeighted")]
    pub initial_weighted: f64,
    #[serde(rename = "finalWeighted")]
    pub final_weighted: f64,
    pub termination: Termination,
}

impl RepairTrace {
    /// `final = initial + Σ step deltas`, per constraint.
    pub fn identity_holds(&self) -> bool {
        self.initial.iter().all(|(c, &init)| {
            let moved: i64 =
                self.steps.iter().flat_map(|s| &s.per_constraint).filter(|s| &s.constraint == c).map(|s| s.delta).sum();
            self.final_counts.get(c).map(|&f| f as i64) == Some(init as i64 + moved)
        })
    }
}

/// Runs the greedy loop and also returns the final graph.
pub fn greedy_repair_graph<W: Float>(
    host: &TypedGraph,
    scorer: &Scorer<W>,
    config: &RepairConfig<W>,
    seed: u64,
) -> Result<(RepairTrace, Arc<TypedGraph>), RankingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Arc::new(host.clone());
    let mut counts = scorer.violation_counts(&g);
    let names: Vec<String> = scorer.weak.iter().map(|c| c.name.clone()).collect();
    let as_map = |counts: &[usize]| names.iter().cloned().zip(counts.iter().copied()).collect::<BTreeMap<_, _>>();
    let weighted = |counts: &[usize]| scorer.weighted(counts.iter().map(|&n| n as i64)).to_f64().unwrap_or(f64::NAN);
    let hard_before: Vec<usize> = scorer.hard.iter().map(|c| count_violations(&g, c)).collect();
    let initial = as_map(&counts);
    let initial_weighted = weighted(&counts);
    let mut steps = Vec::new();
    let mut termination = Termination::MaxIterations;
    for step in 0..config.max_iterations {
        let ranked = scorer.rank_all(&g);
        if ranked.is_empty() {
            termination = Termination::NoApplicableMatch;
            break;
        }
        let exploratory = step < config.impair_budget;
        let pick = if exploratory {
            &ranked[rng.gen_range(0..config.top_k.max(1).min(ranked.len()))]
        } else {
            if ranked[0].delta >= W::zero() {
                termination = Termination::NoImprovingMove;
                break;
            }
            &ranked[0]
        };
        let rule = &scorer.rules[pick.rule_index];
        let t = apply_rule(rule, &g, &pick.matching, step).expect("ranked matches are applicable");
        let after = scorer.violation_counts(&t.result);
        let mut per_constraint = Vec::new();
        for (i, s) in pick.per_constraint.iter().enumerate() {
            let actual = after[i] as i64 - counts[i] as i64;
            if actual != s.delta() {
                return Err(RankingError::TheoremViolation {
                    rule: rule.name.clone(),
                    matching: pick.signature.clone(),
                    constraint: s.constraint.clone(),
                    predicted: s.delta(),
                    actual,
                });
            }
            per_constraint.push(StepScore {
                constraint: s.constraint.clone(),
                repair: s.repair,
                impair: s.impair,
                delta: actual,
            });
        }
        if config.check_hard {
            for (c, &before) in scorer.hard.iter().zip(&hard_before) {
                if count_violations(&t.result, c) > before {
                    return Err(RankingError::HardViolation {
                        step,
                        rule: rule.name.clone(),
                        matching: pick.signature.clone(),
                        constraint: c.name.clone(),
                    });
                }
            }
        }
        steps.push(TraceStep {
            rule: rule.name.clone(),
            matching: pick.signature.clone(),
            delta: pick.delta.to_f64().unwrap_or(f64::NAN),
            exploratory,
            per_constraint,
        });
        g = t.result.clone();
        counts = after;
    }
    let trace = RepairTrace {
        seed,
        steps,
        initial,
        final_counts: as_map(&counts),
        initial_weighted,
        final_weighted: weighted(&counts),
        termination,
    };
    Ok((trace, g))
}

pub fn greedy_repair<W: Float>(
    host: &TypedGraph,
    scorer: &Scorer<W>,
    config: &RepairConfig<W>,
) -> Result<RepairTrace, RankingError> {
    Ok(greedy_repair_graph(host, scorer, config, config.seed)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub restart: usize,
    pub seed: u64,
    #[serde(rename = "finalWeighted")]
    pub final_weighted: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartReport {
    pub best: RepairTrace,
    #[serde(rename = "bestRestart")]
    pub best_restart: usize,
    pub runs: Vec<RunSummary>,
    pub mean: f64,
    pub stddev: f64,
}

/// Independent runs seeded `seed, seed + 1, …`; the first run with the
/// lowest final weighted total wins.
pub fn repair_with_restarts<W: Float>(
    host: &TypedGraph,
    scorer: &Scorer<W>,
    config: &RepairConfig<W>,
) -> Result<RestartReport, RankingError> {
    let mut best: Option<(usize, RepairTrace)> = None;
    let mut runs = Vec::new();
    for r in 0..config.restarts.max(1) {
        let seed = config.seed.wrapping_add(r as u64);
        let (trace, _) = greedy_repair_graph(host, scorer, config, seed)?;
        runs.push(RunSummary { restart: r, seed, final_weighted: trace.final_weighted, steps: trace.steps.len() });
        if best.as_ref().is_none_or(|(_, b)| trace.final_weighted < b.final_weighted) {
            best = Some((r, trace));
        }
    }
    let n = runs.len() as f64;
    let mean = runs.iter().map(|r| r.final_weighted).sum::<f64>() / n;
    let var = runs.iter().map(|r| (r.final_weighted - mean).powi(2)).sum::<f64>() / n;
    let (best_restart, best) = best.expect("at least one run");
    Ok(RestartReport { best, best_restart, runs, mean, stddev: var.sqrt() })
}
