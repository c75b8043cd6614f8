//! Randomised cross-checks of the engine against the oracle. Every check
//! draws its instances from `gtr_oracle::generate` with consecutive seeds,
//! so a failure names the seed that reproduces it.

use gtr_engine::overlap::rule_overlaps;
use gtr_engine::ranking::{classify_transformation, predicted_delta};
use gtr_engine::repair_ac::{derive_bundle, DeriveOptions};
use gtr_engine::shift::{shift_along, shift_over_rule, Simplifier};
use gtr_graph::{count_violations, Condition, Morphism, Rule, TypedGraph};
use gtr_oracle::theorem::Failure;
use gtr_oracle::{
    direct_flags, instance, morphisms, naive_apply, naive_matches, oracle_nv, oracle_satisfies, oracle_violations,
    verify_delta_theorem, Gen, OracleReport,
};

fn plain() -> DeriveOptions {
    DeriveOptions { simplifier: Simplifier::none(), merge_equivalent: true }
}

fn fail(seed: u64, rule: &Rule, m: Option<(&Morphism, &TypedGraph)>, detail: String) -> Failure {
    Failure {
        seed,
        rule: rule.name.clone(),
        matching: m.map(|(m, g)| m.describe(&rule.lhs, g)).unwrap_or_default(),
        constraint: "c".into(),
        detail,
    }
}

/// Predicted change against the brute-force change, for every applicable
/// match of every instance. Also compares the two violation counters.
pub fn theorem_suite(cases: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport { cases, ..Default::default() };
    for s in seed..seed + cases as u64 {
        let inst = instance(s);
        let (g, rule, c) = (&inst.host, &inst.rule, &inst.constraint);
        let engine_nv = count_violations(g, c);
        let oracle = oracle_nv(g, c);
        report.checks += 1;
        if engine_nv != oracle {
            report.failures.push(fail(s, rule, None, format!("nv: engine {engine_nv}, oracle {oracle}")));
        }
        let bundle = derive_bundle(rule, c, &plain(), true);
        for m in naive_matches(rule, g) {
            report.checks += 1;
            let predicted = match predicted_delta(rule, c, &bundle, g, &m) {
                Ok(p) => p,
                Err(e) => {
                    report.failures.push(fail(s, rule, Some((&m, g)), e.to_string()));
                    continue;
                }
            };
            let check = verify_delta_theorem(g, rule, &m, c, predicted).expect("naive matches are applicable");
            if !check.equal {
                report.failures.push(fail(
                    s,
                    rule,
                    Some((&m, g)),
                    format!("predicted {}, actual {}", check.predicted, check.actual),
                ));
            }
        }
    }
    report
}

/// `p ⊨ Shift(b, c) ⇔ p ∘ b ⊨ c` for every `p: C' ↪ G`.
pub fn shift_suite(cases: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport { cases, ..Default::default() };
    for s in seed..seed + cases as u64 {
        let mut gen = Gen::new(s);
        let base = gen.graph(gen.params.premise_nodes, gen.params.premise_edges);
        let c = gen.condition(&base, gen.params.depth);
        let (target, b) = gen.extension(&base);
        let host = gen.host_around(&[&target]);
        let shifted = shift_along(&b, &target, &c, &Simplifier::none());
        for p in morphisms(&target, &host, &[], &[]) {
            report.checks += 1;
            let lhs = oracle_satisfies(&host, &p, &shifted);
            let rhs = oracle_satisfies(&host, &b.then(&p), &c);
            if lhs != rhs {
                let detail = format!("shifted {lhs}, original {rhs} at {}", p.describe(&target, &host));
                report.failures.push(Failure {
                    seed: s,
                    rule: "shift".into(),
                    matching: String::new(),
                    constraint: c.to_string(),
                    detail,
                });
            }
        }
    }
    report
}

/// `n ⊨ c ⇔ m ⊨ Left(ρ, c)`, and for universally quantified conditions over
/// `R` the violation counts at `n` and `m` agree.
pub fn left_suite(cases: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport { cases, ..Default::default() };
    for s in seed..seed + cases as u64 {
        let mut gen = Gen::new(s);
        let rule = gen.rule();
        let c = gen.condition(&rule.rhs, gen.params.depth);
        let (pr, ir) = gen.extension(&rule.rhs);
        let body = gen.condition(&pr, gen.params.depth - 1);
        let host = gen.host_around(&[&rule.lhs, &pr]);
        let ac = Condition::forall(pr, ir, body);
        let left = shift_over_rule(&rule, &c, &Simplifier::none());
        let left_ac = shift_over_rule(&rule, &ac, &Simplifier::none());
        for m in naive_matches(&rule, &host) {
            let step = naive_apply(&rule, &host, &m).expect("applicable");
            report.checks += 2;
            let after = oracle_satisfies(&step.result, &step.comatch, &c);
            let before = oracle_satisfies(&host, &m, &left);
            if after != before {
                report.failures.push(fail(
                    s,
                    &rule,
                    Some((&m, &host)),
                    format!("comatch {after}, Left at match {before}"),
                ));
            }
            let Condition::ForAll(q) = &ac else { unreachable!() };
            let nv_n = oracle_violations(&step.result, &step.comatch, q);
            let nv_m = match &left_ac {
                Condition::ForAll(q) => Some(oracle_violations(&host, &m, q)),
                Condition::True => Some(0),
                _ => None,
            };
            if nv_m != Some(nv_n) {
                report.failures.push(fail(
                    s,
                    &rule,
                    Some((&m, &host)),
                    format!("nv at comatch {nv_n}, at match {nv_m:?}"),
                ));
            }
        }
    }
    report
}

/// Every premise occurrence `p` at a match `m` factors as `q ∘ i_P` with
/// `q ∘ i_L = m` through exactly one overlap class and exactly one `q`.
pub fn overlap_suite(cases: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport { cases, ..Default::default() };
    for s in seed..seed + cases as u64 {
        let inst = instance(s);
        let (g, rule) = (&inst.host, &inst.rule);
        let p_graph = inst.constraint.premise();
        let overlaps = rule_overlaps(rule, p_graph);
        let premise_occurrences = morphisms(p_graph, g, &[], &[]);
        for m in naive_matches(rule, g) {
            for p in &premise_occurrences {
                report.checks += 1;
                let mut hits = 0;
                for o in &overlaps {
                    let (pl, il, ip) = (&o.overlap.graph, &o.overlap.left, &o.overlap.right);
                    let mut fixed_nodes = vec![None; pl.node_count()];
                    let mut fixed_edges = vec![None; pl.edge_count()];
                    let mut consistent = true;
                    let mut pin = |slot: &mut Option<usize>, v: usize| match *slot {
                        Some(w) if w != v => consistent = false,
                        _ => *slot = Some(v),
                    };
                    for (i, &x) in il.nodes.iter().enumerate() {
                        pin(&mut fixed_nodes[x], m.nodes[i]);
                    }
                    for (i, &x) in ip.nodes.iter().enumerate() {
                        pin(&mut fixed_nodes[x], p.nodes[i]);
                    }
                    for (i, &x) in il.edges.iter().enumerate() {
                        pin(&mut fixed_edges[x], m.edges[i]);
                    }
                    for (i, &x) in ip.edges.iter().enumerate() {
                        pin(&mut fixed_edges[x], p.edges[i]);
                    }
                    if consistent {
                        hits += morphisms(pl, g, &fixed_nodes, &fixed_edges).len();
                    }
                }
                if hits != 1 {
                    report.failures.push(fail(
                        s,
                        rule,
                        Some((&m, g)),
                        format!("premise occurrence {} factors {hits} times", p.describe(p_graph, g)),
                    ));
                }
            }
        }
    }
    report
}

/// Direct sustaining/improving flags from the application conditions
/// against a search for repaired and impaired occurrences.
pub fn direct_suite(cases: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport { cases, ..Default::default() };
    for s in seed..seed + cases as u64 {
        let inst = instance(s);
        let (g, rule, c) = (&inst.host, &inst.rule, &inst.constraint);
        let bundle = derive_bundle(rule, c, &plain(), true);
        for m in naive_matches(rule, g) {
            report.checks += 1;
            let engine = classify_transformation(rule, c, &bundle, g, &m).expect("fresh bundle");
            let truth = direct_flags(g, rule, &m, c).expect("applicable");
            if (engine.direct_sustaining, engine.direct_improving) != (truth.sustaining, truth.improving) {
                report.failures.push(fail(
                    s,
                    rule,
                    Some((&m, g)),
                    format!(
                        "engine ({}, {}), brute force ({}, {})",
                        engine.direct_sustaining, engine.direct_improving, truth.sustaining, truth.improving
                    ),
                ));
            }
        }
    }
    report
}

pub type Suite = fn(usize, u64) -> OracleReport;

pub const SUITES: &[(&str, Suite)] = &[
    ("theorem", theorem_suite),
    ("shift", shift_suite),
    ("left", left_suite),
    ("overlap", overlap_suite),
    ("direct", direct_suite),
];
