//! Subcommand bodies. Each returns the text destined for stdout; files named
//! with `-o` are written here. Diagnostics go to stderr in `main`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gtr_engine::ranking::{
    repair_with_restarts, RankedMatch, RankingError, RepairConfig, Scorer, ScorerOptions, Weight,
};
use gtr_engine::repair_ac::{derive_bundle_explained, BundleDoc, DeriveOptions};
use gtr_engine::shift::Simplifier;
use gtr_graph::io::{canonical_json, read_json, validate_graph, GraphDoc, IoError};
use gtr_graph::{count_violations, Constraint, Rule, TypedGraph};
use serde::Serialize;
use thiserror::Error;

use crate::checks;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    /// A prediction disagreed with what a step actually did.
    #[error("internal check failed: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<RankingError> for CliError {
    fn from(e: RankingError) -> Self {
        match e {
            RankingError::TheoremViolation { .. } | RankingError::HardViolation { .. } => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

pub type CliResult = Result<String, CliError>;

fn io_input(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_input(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_input(path, e))
}

pub fn load_graph(path: &Path) -> Result<TypedGraph, CliError> {
    let doc: GraphDoc = read_json(path).map_err(|e| io_input(path, e))?;
    let problems = validate_graph(&doc);
    if !problems.is_empty() {
        return Err(CliError::Input(format!("{}: {}", path.display(), problems.join("; "))));
    }
    doc.to_graph().map_err(|e| io_input(path, e))
}

pub fn load_constraints(path: &Path) -> Result<Vec<Constraint>, CliError> {
    gtr_graph::io::load_constraints(path).map_err(|e| io_input(path, e))
}

pub fn load_rules(path: &Path) -> Result<Vec<Rule>, CliError> {
    gtr_graph::io::load_rules(path).map_err(|e| io_input(path, e))
}

/// Constraint weights from the constraint file, overridden by `--weights`.
pub fn load_weights(constraints: &[Constraint], file: Option<&Path>) -> Result<BTreeMap<String, Weight>, CliError> {
    let mut w: BTreeMap<String, Weight> = constraints.iter().map(|c| (c.name.clone(), c.weight)).collect();
    if let Some(path) = file {
        let extra: BTreeMap<String, Weight> = read_json(path).map_err(|e| io_input(path, e))?;
        for (name, value) in extra {
            if !w.contains_key(&name) {
                return Err(CliError::Input(format!("{}: no constraint named `{name}`", path.display())));
            }
            if !value.is_finite() || value < 0.0 {
                return Err(CliError::Input(format!(
                    "{}: weight of `{name}` must be finite and non-negative",
                    path.display()
                )));
            }
            w.insert(name, value);
        }
    }
    Ok(w)
}

/// True when no two edges share type, source and target.
pub fn is_simple(g: &TypedGraph) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    g.edges().iter().all(|e| seen.insert((e.ty.as_str(), e.src, e.tgt)))
}

pub fn validate(graph: &Path) -> CliResult {
    let doc: GraphDoc = read_json(graph).map_err(|e| io_input(graph, e))?;
    let problems = validate_graph(&doc);
    if !problems.is_empty() {
        return Err(CliError::Input(
            problems.iter().map(|p| format!("{}: {p}", graph.display())).collect::<Vec<_>>().join("\n"),
        ));
    }
    let typed = if doc.typegraph.is_some() { "typed" } else { "untyped" };
    Ok(format!("ok: {} nodes, {} edges ({typed})\n", doc.nodes.len(), doc.edges.len()))
}

#[derive(Serialize)]
struct ViolationRow {
    constraint: String,
    kind: &'static str,
    weight: f64,
    violations: usize,
}

pub fn violations(graph: &Path, constraints: &Path, json: bool) -> CliResult {
    let g = load_graph(graph)?;
    let cs = load_constraints(constraints)?;
    let rows: Vec<ViolationRow> = cs
        .iter()
        .map(|c| ViolationRow {
            constraint: c.name.clone(),
            kind: if c.is_hard() { "hard" } else { "weak" },
            weight: c.weight,
            violations: count_violations(&g, c),
        })
        .collect();
    if json {
        return Ok(canonical_json(&rows));
    }
    let mut out = String::from("constraint  kind  weight  violations\n");
    for r in &rows {
        let _ = writeln!(out, "{:<10}  {:<4}  {:>6}  {:>10}", r.constraint, r.kind, r.weight, r.violations);
    }
    let weak: f64 = rows.iter().filter(|r| r.kind == "weak").map(|r| r.weight * r.violations as f64).sum();
    let _ = writeln!(out, "weighted weak total: {weak}");
    Ok(out)
}

pub struct DeriveArgs<'a> {
    pub rules: &'a Path,
    pub constraints: &'a Path,
    pub explain: bool,
    pub cancel: bool,
    pub multigraph: bool,
    pub output: Option<&'a Path>,
}

#[derive(Serialize)]
pub struct BundleSet {
    pub bundles: Vec<BundleDoc>,
    #[serde(rename = "skippedHard")]
    pub skipped_hard: Vec<String>,
}

/// Returns stdout text and, with `--explain`, the derivation log.
pub fn derive_ac(args: &DeriveArgs) -> Result<(String, Vec<String>), CliError> {
    let rules = load_rules(args.rules)?;
    let cs = load_constraints(args.constraints)?;
    let (simplifier, skipped_hard) = Simplifier::from_hard(&cs, !args.multigraph);
    let opts = DeriveOptions { simplifier, merge_equivalent: true };
    let mut log = Vec::new();
    let mut bundles = Vec::new();
    for r in &rules {
        for c in cs.iter().filter(|c| !c.is_hard()) {
            let mut local = Vec::new();
            let b = derive_bundle_explained(r, c, &opts, args.cancel, &mut local);
            if args.explain {
                log.push(format!("== {} / {}", r.name, c.name));
                log.extend(local);
            }
            bundles.push(BundleDoc::from_bundle(&b, args.cancel));
        }
    }
    let text = canonical_json(&BundleSet { bundles, skipped_hard });
    match args.output {
        Some(path) => {
            write_file(path, &text)?;
            Ok((format!("wrote {}\n", path.display()), log))
        }
        None => Ok((text, log)),
    }
}

pub struct RankArgs<'a> {
    pub graph: &'a Path,
    pub rules: &'a Path,
    pub constraints: &'a Path,
    pub weights: Option<&'a Path>,
    pub top: Option<usize>,
    pub json: bool,
    pub multigraph: bool,
}

fn scorer_for(
    g: &TypedGraph,
    rules: &[Rule],
    cs: &[Constraint],
    weights: &BTreeMap<String, Weight>,
    multigraph: bool,
) -> Scorer {
    let opts = ScorerOptions { simple_hosts: !multigraph && is_simple(g), ..Default::default() };
    Scorer::new(rules, cs, weights, opts)
}

#[derive(Serialize)]
struct RankRow {
    rank: usize,
    rule: String,
    #[serde(rename = "match")]
    matching: String,
    #[serde(rename = "perConstraint")]
    per_constraint: Vec<gtr_engine::ranking::ConstraintScore>,
    delta: f64,
    gain: f64,
}

fn rank_row(i: usize, r: &RankedMatch) -> RankRow {
    RankRow {
        rank: i + 1,
        rule: r.rule.clone(),
        matching: r.signature.clone(),
        per_constraint: r.per_constraint.clone(),
        delta: r.delta,
        gain: -r.delta + 0.0,
    }
}

pub fn rank(args: &RankArgs) -> CliResult {
    let g = load_graph(args.graph)?;
    let rules = load_rules(args.rules)?;
    let cs = load_constraints(args.constraints)?;
    let weights = load_weights(&cs, args.weights)?;
    let scorer = scorer_for(&g, &rules, &cs, &weights, args.multigraph);
    let ranked = scorer.rank_all(&g);
    let shown = args.top.unwrap_or(ranked.len()).min(ranked.len());
    let rows: Vec<RankRow> = ranked[..shown].iter().enumerate().map(|(i, r)| rank_row(i, r)).collect();
    if args.json {
        return Ok(canonical_json(&rows));
    }
    let mut out = String::new();
    let names: Vec<&str> = scorer.weak.iter().map(|c| c.name.as_str()).collect();
    let w = rows.iter().map(|r| r.matching.len()).max().unwrap_or(0).max(5);
    let _ = write!(out, "{:>4}  {:<14}  {:<w$}", "#", "rule", "match");
    for n in &names {
        let _ = write!(out, "  {:>9}", format!("{n} rep/imp"));
    }
    let _ = writeln!(out, "  {:>6}", "gain");
    for r in &rows {
        let _ = write!(out, "{:>4}  {:<14}  {:<w$}", r.rank, r.rule, r.matching);
        for s in &r.per_constraint {
            let _ = write!(out, "  {:>9}", format!("{}/{}", s.repair, s.impair));
        }
        let _ = writeln!(out, "  {:>6}", r.gain);
    }
    let _ = writeln!(out, "{} applicable matches", ranked.len());
    Ok(out)
}

pub struct RepairArgs<'a> {
    pub graph: &'a Path,
    pub rules: &'a Path,
    pub constraints: &'a Path,
    pub weights: Option<&'a Path>,
    pub restarts: usize,
    pub budget: usize,
    pub top_k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub check_hard: bool,
    pub multigraph: bool,
    pub output: Option<&'a Path>,
}

pub fn repair(args: &RepairArgs) -> CliResult {
    if args.restarts == 0 {
        return Err(CliError::Usage("--restarts must be at least 1".into()));
    }
    let g = load_graph(args.graph)?;
    let rules = load_rules(args.rules)?;
    let cs = load_constraints(args.constraints)?;
    let weights = load_weights(&cs, args.weights)?;
    let scorer = scorer_for(&g, &rules, &cs, &weights, args.multigraph);
    let config = RepairConfig {
        weights,
        max_iterations: args.max_iter,
        restarts: args.restarts,
        impair_budget: args.budget,
        top_k: args.top_k,
        seed: args.seed,
        check_hard: args.check_hard,
    };
    let report = repair_with_restarts(&g, &scorer, &config)?;
    let text = canonical_json(&report);
    match args.output {
        Some(path) => {
            write_file(path, &text)?;
            let b = &report.best;
            Ok(format!(
                "best restart {} (seed {}): {} steps, weighted violations {} -> {} ({:?}); mean {:.3}, stddev {:.3}\n",
                report.best_restart,
                b.seed,
                b.steps.len(),
                b.initial_weighted,
                b.final_weighted,
                b.termination,
                report.mean,
                report.stddev
            ))
        }
        None => Ok(text),
    }
}

#[derive(Serialize)]
struct SuiteSummary {
    checks: usize,
    failures: usize,
}

#[derive(Serialize)]
struct OracleOutput {
    cases: usize,
    seed: u64,
    manifest: gtr_oracle::GenParams,
    suites: BTreeMap<&'static str, SuiteSummary>,
    failures: Vec<gtr_oracle::theorem::Failure>,
}

/// Runs every cross-check; any failure is an internal error (exit 3) after
/// the report has been written.
pub fn oracle(cases: usize, seed: u64, output: Option<&Path>) -> CliResult {
    let mut suites = BTreeMap::new();
    let mut failures = Vec::new();
    for (name, run) in checks::SUITES {
        let r = run(cases, seed);
        suites.insert(*name, SuiteSummary { checks: r.checks, failures: r.failures.len() });
        failures.extend(r.failures);
    }
    let failed = failures.len();
    let text = canonical_json(&OracleOutput { cases, seed, manifest: gtr_oracle::MANIFEST, suites, failures });
    let out = match output {
        Some(path) => {
            write_file(path, &text)?;
            format!("wrote {}\n", path.display())
        }
        None => text,
    };
    if failed > 0 {
        print!("{out}");
        return Err(CliError::Internal(format!("{failed} oracle disagreements")));
    }
    Ok(out)
}

pub fn gen_cra(classes: usize, seed: u64, output: Option<&Path>) -> Result<(String, String), CliError> {
    let model = gtr_cra::generate_synthetic(classes, seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = canonical_json(&GraphDoc::from_graph(&model.graph).with_typegraph(&gtr_cra::type_graph()));
    let note = format!("{} nodes ({} counting a root container)\n", model.node_count, model.node_count_with_root);
    match output {
        Some(path) => {
            write_file(path, &text)?;
            Ok((format!("wrote {}\n", path.display()), note))
        }
        None => Ok((text, note)),
    }
}

pub fn gen_features(features: usize, seed: u64, output: Option<&Path>) -> CliResult {
    let text = canonical_json(&gtr_cra::generate_feature_model(features, seed));
    match output {
        Some(path) => {
            write_file(path, &text)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(text),
    }
}

pub fn import_features(model: &Path, output: Option<&Path>) -> CliResult {
    let g = gtr_cra::load_feature_model(model).map_err(|e| io_input(model, e))?;
    let text = canonical_json(&GraphDoc::from_graph(&g).with_typegraph(&gtr_cra::type_graph()));
    match output {
        Some(path) => {
            write_file(path, &text)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(text),
    }
}

pub struct BenchArgs<'a> {
    pub sizes: &'a [usize],
    pub seed: u64,
    pub steps: usize,
    pub restarts: usize,
    pub budget: usize,
    pub csv: Option<&'a PathBuf>,
}

#[derive(Serialize)]
struct BenchRow {
    classes: usize,
    nodes: usize,
    restart: usize,
    seed: u64,
    #[serde(rename = "initialViolations")]
    initial_violations: f64,
    #[serde(rename = "finalViolations")]
    final_violations: f64,
    steps: usize,
}

/// Synthetic models of each size, base constraints, `steps` greedy steps per
/// restart. The CSV holds only seed-determined columns; wall-clock times go
/// to the returned timing table.
pub fn bench(args: &BenchArgs) -> Result<(String, String), CliError> {
    let rules = gtr_cra::rules();
    let cs = gtr_cra::constraints(gtr_cra::Variant::Base);
    let mut rows = Vec::new();
    let mut timing = String::from("classes  nodes  init_s  repair_s\n");
    for &n in args.sizes {
        let model = gtr_cra::generate_synthetic(n, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;
        let t0 = Instant::now();
        let scorer: Scorer = Scorer::new(&rules, &cs, &BTreeMap::new(), ScorerOptions::default());
        let _ = scorer.rank_all(&model.graph);
        let init = t0.elapsed().as_secs_f64();
        let config = RepairConfig {
            max_iterations: args.steps,
            restarts: args.restarts.max(1),
            impair_budget: args.budget,
            seed: args.seed,
            ..Default::default()
        };
        let t1 = Instant::now();
        let report = repair_with_restarts(&model.graph, &scorer, &config)?;
        let run = t1.elapsed().as_secs_f64();
        let _ = writeln!(timing, "{n:>7}  {:>5}  {init:>6.3}  {run:>8.3}", model.node_count);
        for r in &report.runs {
            rows.push(BenchRow {
                classes: n,
                nodes: model.node_count,
                restart: r.restart,
                seed: r.seed,
                initial_violations: report.best.initial_weighted,
                final_violations: r.final_weighted,
                steps: r.steps,
            });
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?).expect("csv is utf-8");
    match args.csv {
        Some(path) => {
            write_file(path, &text)?;
            Ok((format!("wrote {}\n", path.display()), timing))
        }
        None => Ok((text, timing)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_edges_make_a_multigraph() {
        let g = TypedGraph::builder().node("a", "T").node("b", "T").edge("x", "r", "a", "b").build().unwrap();
        assert!(is_simple(&g));
        let g = g.to_builder().edge("y", "r", "a", "b").build().unwrap();
        assert!(!is_simple(&g));
    }

    #[test]
    fn exit_codes_follow_the_error_class() {
        assert_eq!(CliError::Usage(String::new()).exit_code(), 1);
        assert_eq!(CliError::Input(String::new()).exit_code(), 2);
        assert_eq!(CliError::Internal(String::new()).exit_code(), 3);
    }
}
