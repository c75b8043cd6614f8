//! Seeded random instances: small hosts, small rules, small nested
//! constraints. All size limits live in [`MANIFEST`] so a failing seed can
//! be replayed exactly.

use std::sync::Arc;

use gtr_graph::{Condition, Constraint, ConstraintKind, GraphBuilder, Morphism, Rule, TypedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenParams {
    pub node_types: &'static [&'static str],
    pub edge_types: &'static [&'static str],
    pub host_nodes: (usize, usize),
    pub host_edges: (usize, usize),
    pub premise_nodes: (usize, usize),
    pub premise_edges: (usize, usize),
    pub lhs_nodes: (usize, usize),
    pub lhs_edges: (usize, usize),
    /// Elements a rule deletes or creates, in total.
    pub max_changes: usize,
    /// Nesting depth of generated conditions.
    pub depth: usize,
}

pub const MANIFEST: GenParams = GenParams {
    node_types: &["A", "B"],
    edge_types: &["e", "f"],
    host_nodes: (1, 8),
    host_edges: (2, 12),
    premise_nodes: (1, 3),
    premise_edges: (0, 2),
    lhs_nodes: (1, 3),
    lhs_edges: (0, 2),
    max_changes: 2,
    depth: 2,
};

#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub host: Arc<TypedGraph>,
    pub rule: Rule,
    pub constraint: Constraint,
}

/// Random source plus a counter for fresh element ids.
pub struct Gen {
    pub rng: ChaCha8Rng,
    pub params: GenParams,
    next: usize,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen::with_params(seed, MANIFEST)
    }

    pub fn with_params(seed: u64, params: GenParams) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), params, next: 0 }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs[self.rng.gen_range(0..xs.len())]
    }

    fn between(&mut self, (lo, hi): (usize, usize)) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    fn add_random_edge(&mut self, b: &mut GraphBuilder, ids: &[String]) {
        let ty = self.pick(self.params.edge_types);
        let s = &ids[self.rng.gen_range(0..ids.len())];
        let t = &ids[self.rng.gen_range(0..ids.len())];
        let id = self.fresh("e");
        b.add_edge(&id, ty, s, t);
    }

    pub fn graph(&mut self, nodes: (usize, usize), edges: (usize, usize)) -> TypedGraph {
        let mut b = TypedGraph::builder();
        let n = self.between(nodes);
        let mut ids = Vec::new();
        for _ in 0..n {
            let id = self.fresh("n");
            let ty = self.pick(self.params.node_types);
            b.add_node(&id, ty);
            ids.push(id);
        }
        if !ids.is_empty() {
            for _ in 0..self.between(edges) {
                self.add_random_edge(&mut b, &ids);
            }
        }
        b.build().expect("fresh ids")
    }

    /// `base ↪ Q` adding at least one element: at most one node and two edges.
    pub fn extension(&mut self, base: &TypedGraph) -> (Arc<TypedGraph>, Morphism) {
        let mut b = base.to_builder();
        let mut ids: Vec<String> = base.nodes().iter().map(|n| n.id.clone()).collect();
        let new_node = ids.is_empty() || self.rng.gen_bool(0.4);
        if new_node {
            let id = self.fresh("n");
            let ty = self.pick(self.params.node_types);
            b.add_node(&id, ty);
            ids.push(id);
        }
        let edges = if new_node { self.rng.gen_range(0..=2) } else { self.rng.gen_range(1..=2) };
        for _ in 0..edges {
            self.add_random_edge(&mut b, &ids);
        }
        let q = Arc::new(b.build().expect("fresh ids"));
        let e = Morphism::by_ids(base, &q).expect("base ids are kept");
        (q, e)
    }

    pub fn condition(&mut self, over: &TypedGraph, depth: usize) -> Condition {
        if depth == 0 {
            return if self.rng.gen_bool(0.7) { Condition::True } else { Condition::False };
        }
        match self.rng.gen_range(0..10) {
            0 => Condition::True,
            1 => Condition::False,
            2..=4 => {
                let (q, e) = self.extension(over);
                let body = self.condition(&q, depth - 1);
                Condition::exists(q, e, body)
            }
            5 => {
                let (q, e) = self.extension(over);
                let body = self.condition(&q, depth - 1);
                Condition::forall(q, e, body)
            }
            6 => Condition::not(self.condition(over, depth - 1)),
            7 => Condition::Or(vec![self.condition(over, depth - 1), self.condition(over, depth - 1)]),
            8 => Condition::And(vec![self.condition(over, depth - 1), self.condition(over, depth - 1)]),
            _ => Condition::implies(self.condition(over, depth - 1), self.condition(over, depth - 1)),
        }
    }

    /// A conclusion that can actually fail: never a bare `True`.
    pub fn conclusion(&mut self, over: &TypedGraph) -> Condition {
        let depth = self.params.depth;
        match self.rng.gen_range(0..6) {
            0 => Condition::False,
            1 => {
                let (q, e) = self.extension(over);
                Condition::not(Condition::exists(q, e, Condition::True))
            }
            2 => {
                let (q1, e1) = self.extension(over);
                let (q2, e2) = self.extension(over);
                Condition::Or(vec![
                    Condition::exists(q1, e1, Condition::True),
                    Condition::exists(q2, e2, Condition::True),
                ])
            }
            _ => {
                let (q, e) = self.extension(over);
                let body = self.condition(&q, depth - 1);
                Condition::exists(q, e, body)
            }
        }
    }

    pub fn constraint(&mut self) -> Constraint {
        let p = self.graph(self.params.premise_nodes, self.params.premise_edges);
        let d = self.conclusion(&p);
        Constraint::universal("c", ConstraintKind::Weak, Arc::new(p), d)
    }

    /// A left-hand side plus up to `max_changes` deletions and creations.
    pub fn rule(&mut self) -> Rule {
        let l = self.graph(self.params.lhs_nodes, self.params.lhs_edges);
        let mut r = l.to_builder();
        // mostly proper changes; the odd identity rule stays in the mix
        let changes = if self.rng.gen_bool(0.1) { 0 } else { self.rng.gen_range(1..=self.params.max_changes) };
        for _ in 0..changes {
            let nodes: Vec<String> = l.nodes().iter().map(|n| n.id.clone()).filter(|id| r.has_node(id)).collect();
            let edges: Vec<String> = l.edges().iter().map(|e| e.id.clone()).filter(|id| r.has_edge(id)).collect();
            // edge edits are the ones most likely to touch a premise occurrence
            match self.rng.gen_range(0..10) {
                0..=3 if !edges.is_empty() => r.remove_edge(&edges[self.rng.gen_range(0..edges.len())]),
                4 if !nodes.is_empty() => r.remove_node(&nodes[self.rng.gen_range(0..nodes.len())]),
                5 => {
                    let id = self.fresh("n");
                    let ty = self.pick(self.params.node_types);
                    r.add_node(&id, ty);
                }
                _ => {
                    let built = r.clone().build().expect("consistent builder");
                    let ids: Vec<String> = built.nodes().iter().map(|n| n.id.clone()).collect();
                    if !ids.is_empty() {
                        self.add_random_edge(&mut r, &ids);
                    }
                }
            }
        }
        let rhs = r.build().expect("consistent builder");
        Rule::new("r", Arc::new(l), Arc::new(rhs)).expect("shared ids agree")
    }

    pub fn host(&mut self) -> Arc<TypedGraph> {
        Arc::new(self.graph(self.params.host_nodes, self.params.host_edges))
    }

    /// A small random graph with a copy of each pattern glued in, reusing
    /// existing nodes where types allow, never exceeding the node limit.
    pub fn host_around(&mut self, patterns: &[&TypedGraph]) -> Arc<TypedGraph> {
        let cap = self.params.host_nodes.1;
        let base = self.graph((1, cap / 2), (0, self.params.host_edges.1 / 3));
        let mut b = base.to_builder();
        let mut nodes: Vec<(String, String)> = base.nodes().iter().map(|n| (n.id.clone(), n.ty.clone())).collect();
        'patterns: for p in patterns {
            let mut image: Vec<String> = Vec::new();
            for n in p.nodes() {
                let free: Vec<usize> =
                    (0..nodes.len()).filter(|&i| nodes[i].1 == n.ty && !image.contains(&nodes[i].0)).collect();
                let reuse = !free.is_empty() && (nodes.len() >= cap || self.rng.gen_bool(0.6));
                if reuse {
                    image.push(nodes[free[self.rng.gen_range(0..free.len())]].0.clone());
                } else if nodes.len() < cap {
                    let id = self.fresh("n");
                    b.add_node(&id, &n.ty);
                    nodes.push((id.clone(), n.ty.clone()));
                    image.push(id);
                } else {
                    continue 'patterns;
                }
            }
            for e in p.edges() {
                let id = self.fresh("e");
                b.add_edge(&id, &e.ty, &image[e.src], &image[e.tgt]);
            }
        }
        Arc::new(b.build().expect("fresh ids"))
    }
}

pub fn instance(seed: u64) -> Instance {
    let mut g = Gen::new(seed);
    let rule = g.rule();
    let constraint = g.constraint();
    let host = g.host_around(&[&rule.lhs, constraint.premise()]);
    Instance { seed, host, rule, constraint }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_replay_by_seed() {
        let a = instance(42);
        let b = instance(42);
        assert_eq!(a.host, b.host);
        assert_eq!(a.rule, b.rule);
        assert_eq!(a.constraint.conclusion(), b.constraint.conclusion());
    }

    #[test]
    fn sizes_stay_inside_the_manifest() {
        for seed in 0..200 {
            let i = instance(seed);
            assert!(i.host.node_count() <= MANIFEST.host_nodes.1);
            assert!(i.constraint.premise().node_count() <= MANIFEST.premise_nodes.1);
            let (dn, de) = i.rule.deleted();
            let (cn, ce) = i.rule.created();
            // removing a node also removes its edges
            assert!(cn.len() + ce.len() + dn.len() <= MANIFEST.max_changes);
            assert!(de.len() <= MANIFEST.max_changes + MANIFEST.lhs_edges.1);
        }
    }
}
