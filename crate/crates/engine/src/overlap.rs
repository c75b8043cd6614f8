//! Overlaps: jointly surjective pairs of injective morphisms `A ↪ O ↩ B`.
//!
//! Two overlaps are equivalent when an isomorphism of the glued graphs
//! commutes with both embeddings. For injective pairs an equivalence class
//! is fixed by which elements of `A` and `B` are identified, so one gluing
//! per admissible correspondence enumerates every class exactly once.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use gtr_graph::graph::fresh_id;
use gtr_graph::rewrite::apply_rule_plain;
use gtr_graph::{Morphism, PartialMorphism, Rule, Transformation, TypedGraph};

/// Identified `(a, b)` pairs, sorted by `a`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Correspondence {
    pub nodes: Vec<(usize, usize)>,
    pub edges: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    /// `a1~b1,a2~b2|e~f` using element ids; stable across runs.
    pub fn signature(&self, a: &TypedGraph, b: &TypedGraph) -> String {
        let nodes: Vec<String> =
            self.nodes.iter().map(|&(x, y)| format!("{}~{}", a.node(x).id, b.node(y).id)).collect();
        let edges: Vec<String> =
            self.edges.iter().map(|&(x, y)| format!("{}~{}", a.edge(x).id, b.edge(y).id)).collect();
        format!("{}|{}", nodes.join(","), edges.join(","))
    }
}

#[derive(Debug, Clone)]
pub struct Overlap {
    pub graph: Arc<TypedGraph>,
    /// `A ↪ graph`; `A` keeps its ids in the gluing.
    pub left: Morphism,
    /// `B ↪ graph`.
    pub right: Morphism,
    pub correspondence: Correspondence,
}

/// One overlap per equivalence class of `Over(A, B)`.
///
/// `forced`, a partial map `B → A`, makes the listed identifications
/// mandatory; it is how commutativity side conditions are imposed.
pub fn enumerate_overlaps(a: &TypedGraph, b: &TypedGraph, forced: Option<&PartialMorphism>) -> Vec<Overlap> {
    let mut e = Enumerator {
        a,
        b,
        forced,
        node_map: vec![None; b.node_count()],
        edge_map: vec![None; b.edge_count()],
        used_nodes: vec![false; a.node_count()],
        used_edges: vec![false; a.edge_count()],
        out: Vec::new(),
    };
    e.node(0);
    e.out
}

pub fn enumerate_overlap_classes(a: &TypedGraph, b: &TypedGraph) -> Vec<Overlap> {
    enumerate_overlaps(a, b, None)
}

struct Enumerator<'a> {
    a: &'a TypedGraph,
    b: &'a TypedGraph,
    forced: Option<&'a PartialMorphism>,
    node_map: Vec<Option<usize>>,
    edge_map: Vec<Option<usize>>,
    used_nodes: Vec<bool>,
    used_edges: Vec<bool>,
    out: Vec<Overlap>,
}

impl Enumerator<'_> {
    fn node(&mut self, i: usize) {
        if i == self.b.node_count() {
            return self.edge(0);
        }
        let ty = &self.b.node(i).ty;
        if let Some(x) = self.forced.and_then(|f| f.nodes[i]) {
            if self.a.node(x).ty == *ty && !self.used_nodes[x] {
                self.bind_node(i, x);
            }
            return;
        }
        self.node(i + 1);
        for &x in self.a.nodes_of_type(ty) {
            if !self.used_nodes[x] {
                self.bind_node(i, x);
            }
        }
    }

    fn bind_node(&mut self, i: usize, x: usize) {
        self.node_map[i] = Some(x);
        self.used_nodes[x] = true;
        self.node(i + 1);
        self.used_nodes[x] = false;
        self.node_map[i] = None;
    }

    fn edge(&mut self, j: usize) {
        if j == self.b.edge_count() {
            let o = glue(self.a, self.b, &self.node_map, &self.edge_map);
            self.out.push(o);
            return;
        }
        let be = self.b.edge(j);
        let ends = (self.node_map[be.src], self.node_map[be.tgt]);
        let fits = |x: usize, a: &TypedGraph| {
            let ae = a.edge(x);
            ae.ty == be.ty && Some(ae.src) == ends.0 && Some(ae.tgt) == ends.1
        };
        if let Some(x) = self.forced.and_then(|f| f.edges[j]) {
            if fits(x, self.a) && !self.used_edges[x] {
                self.bind_edge(j, x);
            }
            return;
        }
        self.edge(j + 1);
        if let (Some(s), Some(_)) = ends {
            let a = self.a;
            for &x in a.out_edges(s) {
                if fits(x, a) && !self.used_edges[x] {
                    self.bind_edge(j, x);
                }
            }
        }
    }

    fn bind_edge(&mut self, j: usize, x: usize) {
        self.edge_map[j] = Some(x);
        self.used_edges[x] = true;
        self.edge(j + 1);
        self.used_edges[x] = false;
        self.edge_map[j] = None;
    }
}

fn glue(a: &TypedGraph, b: &TypedGraph, node_map: &[Option<usize>], edge_map: &[Option<usize>]) -> Overlap {
    let mut builder = a.to_builder();
    let mut taken: BTreeSet<String> = a.nodes().iter().map(|n| n.id.clone()).collect();
    let b_node_ids: Vec<String> = b
        .nodes()
        .iter()
        .zip(node_map)
        .map(|(n, m)| match m {
            Some(x) => a.node(*x).id.clone(),
            None => {
                let id = fresh_id(&n.id, |s| taken.contains(s));
                taken.insert(id.clone());
                builder.add_node(&id, &n.ty);
                id
            }
        })
        .collect();
    let mut taken: BTreeSet<String> = a.edges().iter().map(|e| e.id.clone()).collect();
    let b_edge_ids: Vec<String> = b
        .edges()
        .iter()
        .zip(edge_map)
        .map(|(e, m)| match m {
            Some(x) => a.edge(*x).id.clone(),
            None => {
                let id = fresh_id(&e.id, |s| taken.contains(s));
                taken.insert(id.clone());
                builder.add_edge(&id, &e.ty, &b_node_ids[e.src], &b_node_ids[e.tgt]);
                id
            }
        })
        .collect();
    let graph = Arc::new(builder.build().expect("gluing of two graphs is a graph"));
    let left = Morphism::by_ids(a, &graph).expect("A is included by id");
    let right = Morphism {
        nodes: b_node_ids.iter().map(|id| graph.node_by_id(id).expect("glued")).collect(),
        edges: b_edge_ids.iter().map(|id| graph.edge_by_id(id).expect("glued")).collect(),
    };
    let mut correspondence = Correspondence {
        nodes: node_map.iter().enumerate().filter_map(|(i, m)| m.map(|x| (x, i))).collect(),
        edges: edge_map.iter().enumerate().filter_map(|(j, m)| m.map(|x| (x, j))).collect(),
    };
    correspondence.nodes.sort_unstable();
    correspondence.edges.sort_unstable();
    Overlap { graph, left, right, correspondence }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OverlapClass {
    /// The occurrence of the premise is destroyed by the step.
    Pre,
    /// The occurrence survives; only its conclusion can change.
    Con,
}

impl OverlapClass {
    pub fn as_str(self) -> &'static str {
        match self {
            OverlapClass::Pre => "pre",
            OverlapClass::Con => "con",
        }
    }
}

/// An overlap of a rule's left-hand side (`left = iL`) with a premise
/// (`right = iP`), with the transformation it induces.
#[derive(Debug, Clone)]
pub struct RuleOverlap {
    pub overlap: Overlap,
    pub class: OverlapClass,
    /// `PL ⇒ PR` via the rule at `iL`.
    pub induced: Transformation,
    /// `x: P ↪ D` with `g ∘ x = iP`, for `Con` classes.
    pub witness: Option<Morphism>,
    pub signature: String,
}

impl RuleOverlap {
    pub fn describe(&self) -> String {
        let g = &self.overlap.graph;
        let mut s = String::new();
        let _ = write!(s, "[{}] {} |PL|={}n/{}e", self.signature, self.class.as_str(), g.node_count(), g.edge_count());
        s
    }
}

/// Overlaps of `rule.lhs` with `p` at which the rule is applicable.
pub fn rule_overlaps(rule: &Rule, p: &TypedGraph) -> Vec<RuleOverlap> {
    let (dn, de) = rule.deleted();
    enumerate_overlaps(&rule.lhs, p, None)
        .into_iter()
        .filter(|o| rule.is_applicable(&o.graph, &o.left))
        .map(|o| {
            let deleted_nodes: Vec<usize> = dn.iter().map(|&n| o.left.nodes[n]).collect();
            let deleted_edges: Vec<usize> = de.iter().map(|&e| o.left.edges[e]).collect();
            let destroyed = o.right.nodes.iter().any(|n| deleted_nodes.contains(n))
                || o.right.edges.iter().any(|e| deleted_edges.contains(e));
            let induced = apply_rule_plain(rule, &o.graph, &o.left).expect("applicability was checked");
            let witness = (!destroyed).then(|| {
                let d = &induced.interface;
                Morphism {
                    nodes: o.right.nodes.iter().map(|&n| d.node_by_id(&o.graph.node(n).id).expect("kept")).collect(),
                    edges: o.right.edges.iter().map(|&e| d.edge_by_id(&o.graph.edge(e).id).expect("kept")).collect(),
                }
            });
            let signature = o.correspondence.signature(&rule.lhs, p);
            RuleOverlap {
                overlap: o,
                class: if destroyed { OverlapClass::Pre } else { OverlapClass::Con },
                induced,
                witness,
                signature,
            }
        })
        .collect()
}

/// [`rule_overlaps`] split into `(pre, con)`.
pub fn rule_overlap_classes(rule: &Rule, p: &TypedGraph) -> (Vec<RuleOverlap>, Vec<RuleOverlap>) {
    rule_overlaps(rule, p).into_iter().partition(|o| o.class == OverlapClass::Pre)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(id: &str, ty: &str) -> TypedGraph {
        TypedGraph::builder().node(id, ty).build().unwrap()
    }

    #[test]
    fn two_single_nodes_give_two_classes() {
        let os = enumerate_overlap_classes(&single("n", "T"), &single("n", "T"));
        assert_eq!(os.len(), 2);
        let sizes: Vec<usize> = os.iter().map(|o| o.graph.node_count()).collect();
        assert_eq!(sizes, vec![2, 1]);
        assert_eq!(os[0].graph.node_ids().into_iter().collect::<Vec<_>>(), vec!["n", "n'"]);
    }

    #[test]
    fn no_shared_type_means_disjoint_union_only() {
        let os = enumerate_overlap_classes(&single("a", "A"), &single("b", "B"));
        assert_eq!(os.len(), 1);
        assert!(os[0].correspondence.is_empty());
    }

    #[test]
    fn edges_are_identified_only_between_identified_endpoints() {
        let g = TypedGraph::builder().node("x", "T").node("y", "T").edge("e", "r", "x", "y").build().unwrap();
        let os = enumerate_overlap_classes(&g, &g);
        // node maps: 7 partial injections of {x,y} into {x,y}; the identity
        // and the swap allow (resp. forbid) identifying e
        assert_eq!(os.len(), 8);
        for o in &os {
            assert!(o.left.is_valid(&g, &o.graph) && o.right.is_valid(&g, &o.graph));
            let total = 2 * (2 + 1) - o.correspondence.nodes.len() - o.correspondence.edges.len();
            assert_eq!(o.graph.node_count() + o.graph.edge_count(), total);
        }
    }

    #[test]
    fn forced_pairs_are_always_present() {
        let g = TypedGraph::builder().node("x", "T").node("y", "T").build().unwrap();
        let forced = PartialMorphism { nodes: vec![Some(1), None], edges: vec![] };
        let os = enumerate_overlaps(&g, &g, Some(&forced));
        assert_eq!(os.len(), 2);
        assert!(os.iter().all(|o| o.correspondence.nodes.contains(&(1, 0))));
    }
}
