use std::collections::BTreeMap;

use gtr_engine::ranking::{classify_transformation, predicted_delta, Scorer, ScorerOptions};
use gtr_graph::{applicable_matches, apply_rule, count_violations};

fn scorer() -> Scorer {
    let cs = gtr_cra::constraints(gtr_cra::Variant::Base);
    Scorer::new(&gtr_cra::rules(), &cs, &BTreeMap::new(), ScorerOptions::default())
}

fn row(s: &Scorer, rule: &str, needle: &[&str]) -> (Vec<(usize, usize)>, f64) {
    let g = gtr_cra::fig1();
    let hits: Vec<_> = s
        .rank_all(&g)
        .into_iter()
        .filter(|r| r.rule == rule && needle.iter().all(|n| r.signature.contains(n)))
        .collect();
    assert_eq!(hits.len(), 1, "{rule} {needle:?}");
    let r = &hits[0];
    (r.per_constraint.iter().map(|c| (c.repair, c.impair)).collect(), r.delta)
}

#[test]
fn table_one_rows() {
    let s = scorer();
    assert_eq!(row(&s, "moveMethod", &["c1->Cart", "c2->Session", "m->checkout"]), (vec![(4, 0), (1, 0)], -5.0));
    assert_eq!(row(&s, "moveAttribute", &["c1->Session", "c2->Cart", "a->username"]), (vec![(2, 0), (2, 1)], -3.0));
    assert_eq!(row(&s, "moveMethod", &["c1->Cart", "c2->Session", "m->print"]), (vec![(2, 0), (1, 1)], -2.0));
    assert_eq!(row(&s, "moveMethod", &["c1->Cart", "c2->Session", "m->addItem"]), (vec![(2, 2), (0, 1)], 1.0));
}

#[test]
fn checkout_ranks_first() {
    let s = scorer();
    let top = &s.rank_all(&gtr_cra::fig1())[0];
    assert_eq!(top.rule, "moveMethod");
    assert!(top.signature.contains("m->checkout") && top.signature.contains("c2->Session"));
}

#[test]
fn prediction_matches_every_fixture_step() {
    let s = scorer();
    let g = std::sync::Arc::new(gtr_cra::fig1());
    for (ri, rule) in s.rules.iter().enumerate() {
        for m in applicable_matches(rule, &g) {
            let h = apply_rule(rule, &g, &m, 0).unwrap().result;
            for (ci, c) in s.weak.iter().enumerate() {
                let b = &s.bundles[ri][ci];
                let actual = count_violations(&h, c) as i64 - count_violations(&g, c) as i64;
                assert_eq!(predicted_delta(rule, c, b, &g, &m).unwrap(), actual);
                let f = classify_transformation(rule, c, b, &g, &m).unwrap();
                assert_eq!(f.sustaining, actual <= 0);
                assert_eq!(f.improving, actual < 0);
            }
        }
    }
}

#[test]
fn add_item_is_sustaining_but_not_directly() {
    let s = scorer();
    let g = gtr_cra::fig1();
    let rule = &s.rules[0];
    let m = applicable_matches(rule, &g)
        .into_iter()
        .find(|m| {
            let d = m.describe(&rule.lhs, &g);
            d.contains("m->addItem") && d.contains("c2->Session")
        })
        .unwrap();
    let f = classify_transformation(rule, &s.weak[0], &s.bundles[0][0], &g, &m).unwrap();
    assert!(f.sustaining && !f.improving && !f.direct_sustaining && !f.direct_improving);
}
