//! A naive double-pushout step computed from element ids alone.

use gtr_graph::{Morphism, Rule, TypedGraph};

/// The result graph plus where each original element ended up.
#[derive(Debug, Clone)]
pub struct NaiveStep {
    pub result: TypedGraph,
    /// `node_track[g] = Some(h)` if host node `g` survives as node `h`.
    pub node_track: Vec<Option<usize>>,
    pub edge_track: Vec<Option<usize>>,
    /// Comatch `R ↪ H`.
    pub comatch: Morphism,
}

/// Applies `rule` at `m`; `None` if the step would leave dangling edges.
///
/// An element of `L` is kept iff `R` has an element with the same id.
pub fn naive_apply(rule: &Rule, host: &TypedGraph, m: &Morphism) -> Option<NaiveStep> {
    let (l, r) = (&rule.lhs, &rule.rhs);
    let mut gone_nodes = vec![false; host.node_count()];
    let mut gone_edges = vec![false; host.edge_count()];
    for (i, n) in l.nodes().iter().enumerate() {
        if r.node_by_id(&n.id).is_none() {
            gone_nodes[m.nodes[i]] = true;
        }
    }
    for (i, e) in l.edges().iter().enumerate() {
        if r.edge_by_id(&e.id).is_none() {
            gone_edges[m.edges[i]] = true;
        }
    }
    for (i, e) in host.edges().iter().enumerate() {
        if !gone_edges[i] && (gone_nodes[e.src] || gone_nodes[e.tgt]) {
            return None;
        }
    }

    let mut b = TypedGraph::builder();
    for (i, n) in host.nodes().iter().enumerate() {
        if !gone_nodes[i] {
            b.add_node(&n.id, &n.ty);
        }
    }
    for (i, e) in host.edges().iter().enumerate() {
        if !gone_edges[i] {
            b.add_edge(&e.id, &e.ty, &host.node(e.src).id, &host.node(e.tgt).id);
        }
    }
    // host id of every right-hand node
    let mut r_node_ids = Vec::new();
    for n in r.nodes() {
        let id = match l.node_by_id(&n.id) {
            Some(i) => host.node(m.nodes[i]).id.clone(),
            None => {
                let id = unused(&n.id, |x| b.has_node(x));
                b.add_node(&id, &n.ty);
                id
            }
        };
        r_node_ids.push(id);
    }
    let mut r_edge_ids = Vec::new();
    for e in r.edges() {
        let id = match l.edge_by_id(&e.id) {
            Some(i) => host.edge(m.edges[i]).id.clone(),
            None => {
                let id = unused(&e.id, |x| b.has_edge(x));
                b.add_edge(&id, &e.ty, &r_node_ids[e.src], &r_node_ids[e.tgt]);
                id
            }
        };
        r_edge_ids.push(id);
    }
    let result = b.build().ok()?;
    let node_track = host
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| if gone_nodes[i] { None } else { result.node_by_id(&n.id) })
        .collect();
    let edge_track = host
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| if gone_edges[i] { None } else { result.edge_by_id(&e.id) })
        .collect();
    let comatch = Morphism {
        nodes: r_node_ids.iter().map(|id| result.node_by_id(id).expect("added above")).collect(),
        edges: r_edge_ids.iter().map(|id| result.edge_by_id(id).expect("added above")).collect(),
    };
    Some(NaiveStep { result, node_track, edge_track, comatch })
}

fn unused(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let mut id = format!("{base}*");
    while taken(&id) {
        id.push('*');
    }
    id
}

impl NaiveStep {
    /// `track ∘ p`, if every element of `p` survives.
    pub fn track(&self, p: &Morphism) -> Option<Morphism> {
        Some(Morphism {
            nodes: p.nodes.iter().map(|&n| self.node_track[n]).collect::<Option<_>>()?,
            edges: p.edges.iter().map(|&e| self.edge_track[e]).collect::<Option<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::morphisms;

    #[test]
    fn move_method_relinks_one_edge() {
        let g = gtr_cra::fig1();
        let rule = gtr_cra::move_method();
        let m = morphisms(&rule.lhs, &g, &[], &[])
            .into_iter()
            .find(|m| {
                m.describe(&rule.lhs, &g).contains("m->checkout") && m.describe(&rule.lhs, &g).contains("c2->Session")
            })
            .unwrap();
        let s = naive_apply(&rule, &g, &m).unwrap();
        assert_eq!(s.result.node_count(), g.node_count());
        assert_eq!(s.result.edge_count(), g.edge_count());
        assert_eq!(s.node_track.iter().flatten().count(), g.node_count());
        assert_eq!(s.edge_track.iter().filter(|t| t.is_none()).count(), 1);
    }

    #[test]
    fn dangling_deletion_is_refused() {
        let l = std::sync::Arc::new(TypedGraph::builder().node("x", "A").build().unwrap());
        let r = std::sync::Arc::new(TypedGraph::empty());
        let rule = Rule::new("kill", l, r).unwrap();
        let g = TypedGraph::builder().node("a", "A").node("b", "A").edge("ab", "e", "a", "b").build().unwrap();
        assert!(naive_apply(&rule, &g, &Morphism { nodes: vec![0], edges: vec![] }).is_none());
        let lone = TypedGraph::builder().node("a", "A").build().unwrap();
        let s = naive_apply(&rule, &lone, &Morphism { nodes: vec![0], edges: vec![] }).unwrap();
        assert!(s.result.is_empty());
        assert_eq!(s.node_track, vec![None]);
    }
}
