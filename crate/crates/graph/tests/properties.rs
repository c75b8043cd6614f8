use std::collections::BTreeSet;
use std::sync::Arc;

use gtr_graph::{
    applicable_matches, apply_rule, find_monomorphisms, graphs_isomorphic, parallel_independent, satisfies, Condition,
    Morphism, PartialMorphism, Rule, TypedGraph,
};
use proptest::prelude::*;

const NODE_TYPES: [&str; 2] = ["A", "B"];
const EDGE_TYPES: [&str; 2] = ["e", "f"];

type Shape = (Vec<usize>, Vec<(usize, usize, usize)>);

fn shape(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = Shape> {
    prop::collection::vec(0..2usize, 1..=max_nodes).prop_flat_map(move |types| {
        let n = types.len();
        let edges = prop::collection::vec((0..2usize, 0..n, 0..n), 0..=max_edges);
        (Just(types), edges)
    })
}

fn build(prefix: &str, (types, edges): &Shape) -> TypedGraph {
    let mut b = TypedGraph::builder();
    for (i, &t) in types.iter().enumerate() {
        b.add_node(&format!("{prefix}{i}"), NODE_TYPES[t]);
    }
    for (i, &(t, s, d)) in edges.iter().enumerate() {
        b.add_edge(&format!("{prefix}e{i}"), EDGE_TYPES[t], &format!("{prefix}{s}"), &format!("{prefix}{d}"));
    }
    b.build().unwrap()
}

/// `P` plus one extra edge, as a condition `∃(P ↪ Q, true)`.
fn edge_condition(p: &TypedGraph, (t, s, d): (usize, usize, usize)) -> Condition {
    let n = p.node_count();
    let q = p.to_builder().edge("extra", EDGE_TYPES[t], &p.node(s % n).id, &p.node(d % n).id).build().unwrap();
    let q = Arc::new(q);
    Condition::exists(q.clone(), Morphism::by_ids(p, &q).unwrap(), Condition::True)
}

/// `L` minus some of its edges, plus some new edges between its nodes.
fn rule_from(l: &TypedGraph, drop: &[bool], add: &[(usize, usize, usize)]) -> Rule {
    let mut r = l.to_builder();
    for (i, e) in l.edges().iter().enumerate() {
        if drop.get(i).copied().unwrap_or(false) {
            r.remove_edge(&e.id);
        }
    }
    let n = l.node_count();
    for (i, &(t, s, d)) in add.iter().enumerate() {
        r.add_edge(&format!("new{i}"), EDGE_TYPES[t], &l.node(s % n).id, &l.node(d % n).id);
    }
    Rule::new("r", Arc::new(l.clone()), Arc::new(r.build().unwrap())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn anchored_search_equals_filtered_search(p in shape(3, 2), g in shape(6, 8)) {
        let (p, g) = (build("p", &p), build("g", &g));
        let all = find_monomorphisms(&p, &g, None).unwrap();
        for h in 0..g.node_count() {
            let mut anchor = PartialMorphism::undefined(&p);
            anchor.nodes[0] = Some(h);
            if anchor.check(&p, &g).is_err() {
                prop_assert!(all.iter().all(|m| m.nodes[0] != h));
                continue;
            }
            let anchored = find_monomorphisms(&p, &g, Some(&anchor)).unwrap();
            let filtered: Vec<Morphism> = all.iter().filter(|m| m.nodes[0] == h).cloned().collect();
            prop_assert_eq!(anchored, filtered);
        }
    }

    #[test]
    fn composition_is_associative(p in shape(3, 2), g in shape(5, 6)) {
        let (p, g) = (build("p", &p), build("g", &g));
        let fs = find_monomorphisms(&p, &g, None).unwrap();
        let autos = find_monomorphisms(&g, &g, None).unwrap();
        for f in fs.iter().take(4) {
            for a in autos.iter().take(4) {
                for b in autos.iter().take(4) {
                    let left = f.then(a).then(b);
                    prop_assert_eq!(&left, &f.then(&a.then(b)));
                    prop_assert!(left.is_valid(&p, &g));
                }
            }
        }
    }

    #[test]
    fn negation_laws(p in shape(2, 1), g in shape(5, 8), x in (0..2usize, 0..3usize, 0..3usize), y in (0..2usize, 0..3usize, 0..3usize)) {
        let (p, g) = (build("p", &p), build("g", &g));
        let (a, b) = (edge_condition(&p, x), edge_condition(&p, y));
        for m in find_monomorphisms(&p, &g, None).unwrap() {
            let sat = |c: &Condition| satisfies(&g, &m, c);
            prop_assert_eq!(sat(&Condition::not(Condition::not(a.clone()))), sat(&a));
            prop_assert_eq!(
                sat(&Condition::not(Condition::And(vec![a.clone(), b.clone()]))),
                sat(&Condition::Or(vec![Condition::not(a.clone()), Condition::not(b.clone())]))
            );
            prop_assert_eq!(
                sat(&Condition::not(Condition::Or(vec![a.clone(), b.clone()]))),
                sat(&Condition::And(vec![Condition::not(a.clone()), Condition::not(b.clone())]))
            );
            prop_assert_eq!(sat(&a.lower()), sat(&a));
        }
    }

    #[test]
    fn steps_count_elements_track_injectively_and_invert(
        l in shape(3, 2),
        g in shape(6, 8),
        drop in prop::collection::vec(any::<bool>(), 2),
        add in prop::collection::vec((0..2usize, 0..3usize, 0..3usize), 0..2),
    ) {
        let rule = rule_from(&build("l", &l), &drop, &add);
        let g = Arc::new(build("g", &g));
        for m in applicable_matches(&rule, &g).into_iter().take(6) {
            let t = apply_rule(&rule, &g, &m, 0).unwrap();
            let (dn, de) = rule.deleted();
            let (cn, ce) = rule.created();
            prop_assert_eq!(t.result.node_count(), g.node_count() - dn.len() + cn.len());
            prop_assert_eq!(t.result.edge_count(), g.edge_count() - de.len() + ce.len());
            let images: Vec<usize> = t.track.nodes.iter().flatten().copied().collect();
            prop_assert_eq!(images.iter().collect::<BTreeSet<_>>().len(), images.len());
            let images: Vec<usize> = t.track.edges.iter().flatten().copied().collect();
            prop_assert_eq!(images.iter().collect::<BTreeSet<_>>().len(), images.len());
            let back = t.inverse(1).unwrap();
            prop_assert!(graphs_isomorphic(&back.result, &g).is_some());
        }
    }

    #[test]
    fn parallel_independence_is_symmetric(
        l in shape(2, 2),
        g in shape(5, 8),
        drop in prop::collection::vec(any::<bool>(), 2),
    ) {
        let rule = rule_from(&build("l", &l), &drop, &[]);
        let g = Arc::new(build("g", &g));
        let steps: Vec<_> =
            applicable_matches(&rule, &g).into_iter().take(5).map(|m| apply_rule(&rule, &g, &m, 0).unwrap()).collect();
        for a in &steps {
            for b in &steps {
                prop_assert_eq!(parallel_independent(a, b).unwrap(), parallel_independent(b, a).unwrap());
            }
        }
    }
}
