//! Morphism enumeration and condition satisfaction, written as plainly as
//! possible: assign every pattern node, then every pattern edge, keep what
//! is injective and structure preserving.

use gtr_graph::{Condition, Constraint, Morphism, Quantifier, TypedGraph};

/// All injective morphisms `pattern ↪ host` that agree with `fixed`.
///
/// `fixed_nodes[i] = Some(h)` pins pattern node `i` to host node `h`; same
/// for edges.
pub fn morphisms(
    pattern: &TypedGraph,
    host: &TypedGraph,
    fixed_nodes: &[Option<usize>],
    fixed_edges: &[Option<usize>],
) -> Vec<Morphism> {
    let mut out = Vec::new();
    let mut nodes = Vec::with_capacity(pattern.node_count());
    assign_nodes(pattern, host, fixed_nodes, fixed_edges, &mut nodes, &mut out);
    out
}

fn assign_nodes(
    pattern: &TypedGraph,
    host: &TypedGraph,
    fixed_nodes: &[Option<usize>],
    fixed_edges: &[Option<usize>],
    nodes: &mut Vec<usize>,
    out: &mut Vec<Morphism>,
) {
    let i = nodes.len();
    if i == pattern.node_count() {
        let mut edges = Vec::with_capacity(pattern.edge_count());
        assign_edges(pattern, host, fixed_edges, nodes, &mut edges, out);
        return;
    }
    for h in 0..host.node_count() {
        if fixed_nodes.get(i).copied().flatten().is_some_and(|f| f != h) {
            continue;
        }
        if host.node(h).ty != pattern.node(i).ty || nodes.contains(&h) {
            continue;
        }
        nodes.push(h);
        assign_nodes(pattern, host, fixed_nodes, fixed_edges, nodes, out);
        nodes.pop();
    }
}

fn assign_edges(
    pattern: &TypedGraph,
    host: &TypedGraph,
    fixed_edges: &[Option<usize>],
    nodes: &[usize],
    edges: &mut Vec<usize>,
    out: &mut Vec<Morphism>,
) {
    let i = edges.len();
    if i == pattern.edge_count() {
        out.push(Morphism { nodes: nodes.to_vec(), edges: edges.clone() });
        return;
    }
    let pe = pattern.edge(i);
    for h in 0..host.edge_count() {
        if fixed_edges.get(i).copied().flatten().is_some_and(|f| f != h) {
            continue;
        }
        let he = host.edge(h);
        if he.ty != pe.ty || he.src != nodes[pe.src] || he.tgt != nodes[pe.tgt] || edges.contains(&h) {
            continue;
        }
        edges.push(h);
        assign_edges(pattern, host, fixed_edges, nodes, edges, out);
        edges.pop();
    }
}

/// Morphisms `Q ↪ host` with `q ∘ e = p`.
pub fn extensions(q: &Quantifier, host: &TypedGraph, p: &Morphism) -> Vec<Morphism> {
    let mut fixed_nodes = vec![None; q.graph.node_count()];
    let mut fixed_edges = vec![None; q.graph.edge_count()];
    for (i, &x) in q.embedding.nodes.iter().enumerate() {
        fixed_nodes[x] = Some(p.nodes[i]);
    }
    for (i, &x) in q.embedding.edges.iter().enumerate() {
        fixed_edges[x] = Some(p.edges[i]);
    }
    morphisms(&q.graph, host, &fixed_nodes, &fixed_edges)
}

/// `p ⊨ c` by direct recursion on the condition.
pub fn oracle_satisfies(host: &TypedGraph, p: &Morphism, c: &Condition) -> bool {
    match c {
        Condition::True => true,
        Condition::False => false,
        Condition::Exists(q) => extensions(q, host, p).iter().any(|x| oracle_satisfies(host, x, &q.body)),
        Condition::ForAll(q) => extensions(q, host, p).iter().all(|x| oracle_satisfies(host, x, &q.body)),
        Condition::Not(c) => !oracle_satisfies(host, p, c),
        Condition::Or(cs) => cs.iter().any(|c| oracle_satisfies(host, p, c)),
        Condition::And(cs) => cs.iter().all(|c| oracle_satisfies(host, p, c)),
        Condition::Implies(a, b) => !oracle_satisfies(host, p, a) || oracle_satisfies(host, p, b),
    }
}

/// Extensions of `p` along `q` that violate its body.
pub fn oracle_violations(host: &TypedGraph, p: &Morphism, q: &Quantifier) -> usize {
    extensions(q, host, p).iter().filter(|x| !oracle_satisfies(host, x, &q.body)).count()
}

/// Premise occurrences anywhere in `host` that violate the conclusion.
pub fn oracle_nv(host: &TypedGraph, c: &Constraint) -> usize {
    let p = c.premise();
    morphisms(p, host, &[], &[]).iter().filter(|x| !oracle_satisfies(host, x, c.conclusion())).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn counts_injective_maps() {
        let p = TypedGraph::builder().node("x", "A").node("y", "A").build().unwrap();
        let g = TypedGraph::builder().node("a", "A").node("b", "A").node("c", "A").node("d", "B").build().unwrap();
        assert_eq!(morphisms(&p, &g, &[], &[]).len(), 6);
        assert_eq!(morphisms(&p, &g, &[Some(1)], &[]).len(), 2);
    }

    #[test]
    fn edges_need_matching_endpoints() {
        let p = TypedGraph::builder().node("x", "A").node("y", "A").edge("e", "r", "x", "y").build().unwrap();
        let g = TypedGraph::builder()
            .node("a", "A")
            .node("b", "A")
            .edge("ab", "r", "a", "b")
            .edge("ba", "r", "b", "a")
            .build()
            .unwrap();
        assert_eq!(morphisms(&p, &g, &[], &[]).len(), 2);
    }

    #[test]
    fn running_example_counts() {
        let g = gtr_cra::fig1();
        assert_eq!(oracle_nv(&g, &gtr_cra::w1()), 4);
        assert_eq!(oracle_nv(&g, &gtr_cra::w2()), 2);
        assert_eq!(oracle_nv(&TypedGraph::empty(), &gtr_cra::w1()), 0);
    }

    #[test]
    fn forall_and_exists_agree_with_negation() {
        let p = Arc::new(TypedGraph::builder().node("x", "A").build().unwrap());
        let q = Arc::new(TypedGraph::builder().node("x", "A").edge("l", "r", "x", "x").build().unwrap());
        let e = Morphism::by_ids(&p, &q).unwrap();
        let g = TypedGraph::builder().node("a", "A").edge("l", "r", "a", "a").build().unwrap();
        let m = Morphism { nodes: vec![0], edges: vec![] };
        let ex = Condition::exists(q.clone(), e.clone(), Condition::True);
        let fa = Condition::forall(q, e, Condition::False);
        assert!(oracle_satisfies(&g, &m, &ex));
        assert!(!oracle_satisfies(&g, &m, &fa));
    }
}
