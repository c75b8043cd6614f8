//! Double-pushout rules and their application.
//!
//! A rule is a pair of graphs `L`, `R`; the interface `K` consists of the
//! nodes and edges whose ids occur in both. Application is set-theoretic:
//! `D = G ∖ m(L ∖ K)` and `H = D ∪ (R ∖ K)` with fresh ids for the new part.

use std::sync::Arc;

use thiserror::Error;

use crate::graph::{fresh_id, GraphBuilder, Morphism, PartialMorphism, TypedGraph};
use crate::matching::for_each_monomorphism;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("rule `{rule}`: shared node `{id}` has different types on both sides")]
    InterfaceNodeType { rule: String, id: String },
    #[error("rule `{rule}`: shared edge `{id}` differs in type or endpoints on both sides")]
    InterfaceEdge { rule: String, id: String },
    #[error("match is not an injective morphism from the left-hand side")]
    InvalidMatch,
    #[error("match violates the dangling condition at host node `{0}`")]
    Dangling(String),
    #[error("transformations start from different graphs")]
    DifferentOriginals,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: Arc<TypedGraph>,
    pub rhs: Arc<TypedGraph>,
    /// Interface as (L index, R index) pairs.
    k_nodes: Vec<(usize, usize)>,
    k_edges: Vec<(usize, usize)>,
}

impl Rule {
    pub fn new(name: &str, lhs: Arc<TypedGraph>, rhs: Arc<TypedGraph>) -> Result<Self, RewriteError> {
        let mut k_nodes = Vec::new();
        for (i, n) in lhs.nodes().iter().enumerate() {
            if let Some(j) = rhs.node_by_id(&n.id) {
                if rhs.node(j).ty != n.ty {
                    return Err(RewriteError::InterfaceNodeType { rule: name.into(), id: n.id.clone() });
                }
                k_nodes.push((i, j));
            }
        }
        let mut k_edges = Vec::new();
        for (i, e) in lhs.edges().iter().enumerate() {
            if let Some(j) = rhs.edge_by_id(&e.id) {
                let f = rhs.edge(j);
                let same_ends = lhs.node(e.src).id == rhs.node(f.src).id && lhs.node(e.tgt).id == rhs.node(f.tgt).id;
                if f.ty != e.ty || !same_ends {
                    return Err(RewriteError::InterfaceEdge { rule: name.into(), id: e.id.clone() });
                }
                k_edges.push((i, j));
            }
        }
        Ok(Rule { name: name.to_string(), lhs, rhs, k_nodes, k_edges })
    }

    /// The rule with both sides swapped.
    pub fn inverse(&self) -> Rule {
        Rule {
            name: inverse_name(&self.name),
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            k_nodes: self.k_nodes.iter().map(|&(l, r)| (r, l)).collect(),
            k_edges: self.k_edges.iter().map(|&(l, r)| (r, l)).collect(),
        }
    }

    /// The rule `⟨L ← K → L⟩`.
    pub fn identity(name: &str, lhs: Arc<TypedGraph>) -> Rule {
        Rule::new(name, lhs.clone(), lhs).expect("identity span is well formed")
    }

    pub fn interface_nodes(&self) -> &[(usize, usize)] {
        &self.k_nodes
    }

    pub fn interface_edges(&self) -> &[(usize, usize)] {
        &self.k_edges
    }

    /// Left-hand nodes and edges outside the interface.
    pub fn deleted(&self) -> (Vec<usize>, Vec<usize>) {
        let kept_n: Vec<usize> = self.k_nodes.iter().map(|p| p.0).collect();
        let kept_e: Vec<usize> = self.k_edges.iter().map(|p| p.0).collect();
        (
            (0..self.lhs.node_count()).filter(|i| !kept_n.contains(i)).collect(),
            (0..self.lhs.edge_count()).filter(|i| !kept_e.contains(i)).collect(),
        )
    }

    /// Right-hand nodes and edges outside the interface.
    pub fn created(&self) -> (Vec<usize>, Vec<usize>) {
        self.inverse().deleted()
    }

    pub fn is_identity(&self) -> bool {
        let (dn, de) = self.deleted();
        let (cn, ce) = self.created();
        dn.is_empty() && de.is_empty() && cn.is_empty() && ce.is_empty()
    }

    /// The dangling condition: every host edge at a deleted node is itself deleted.
    pub fn is_applicable(&self, host: &TypedGraph, m: &Morphism) -> bool {
        self.dangling_node(host, m).is_none()
    }

    fn dangling_node(&self, host: &TypedGraph, m: &Morphism) -> Option<usize> {
        let (dn, de) = self.deleted();
        let deleted_edges: Vec<usize> = de.iter().map(|&e| m.edges[e]).collect();
        dn.iter().map(|&n| m.nodes[n]).find(|&h| host.incident_edges(h).any(|e| !deleted_edges.contains(&e)))
    }
}

fn inverse_name(name: &str) -> String {
    match name.strip_suffix("^-1") {
        Some(base) => base.to_string(),
        None => format!("{name}^-1"),
    }
}

/// One application `G ⇒ H` together with its intermediate graph and morphisms.
#[derive(Debug, Clone)]
pub struct Transformation {
    pub rule: Rule,
    pub matching: Morphism,
    pub original: Arc<TypedGraph>,
    pub interface: Arc<TypedGraph>,
    pub result: Arc<TypedGraph>,
    /// `g: D ↪ G`.
    pub g: Morphism,
    /// `h: D ↪ H`.
    pub h: Morphism,
    pub comatch: Morphism,
    /// `h ∘ g⁻¹`, defined exactly on the preserved elements.
    pub track: PartialMorphism,
}

impl Transformation {
    /// Host elements removed by the step.
    pub fn deleted_elements(&self) -> (Vec<usize>, Vec<usize>) {
        let (dn, de) = self.rule.deleted();
        (dn.iter().map(|&n| self.matching.nodes[n]).collect(), de.iter().map(|&e| self.matching.edges[e]).collect())
    }

    /// Result elements introduced by the step.
    pub fn created_elements(&self) -> (Vec<usize>, Vec<usize>) {
        let (cn, ce) = self.rule.created();
        (cn.iter().map(|&n| self.comatch.nodes[n]).collect(), ce.iter().map(|&e| self.comatch.edges[e]).collect())
    }

    /// The derived rule `⟨G ← D → H⟩`; the interface is `D` by id.
    pub fn derived_rule(&self, name: &str) -> Rule {
        Rule::new(name, self.original.clone(), self.result.clone()).expect("derived span shares ids exactly on D")
    }

    /// The transformation `H ⇒ G` by the inverse rule at the comatch.
    pub fn inverse(&self, step: usize) -> Result<Transformation, RewriteError> {
        apply_rule(&self.rule.inverse(), &self.result, &self.comatch, step)
    }
}

/// All matches of `rule` in `host` that satisfy the dangling condition.
pub fn applicable_matches(rule: &Rule, host: &TypedGraph) -> Vec<Morphism> {
    let mut out = Vec::new();
    let _ = for_each_monomorphism(&rule.lhs, host, &PartialMorphism::undefined(&rule.lhs), |m| {
        if rule.is_applicable(host, m) {
            out.push(m.clone());
        }
        std::ops::ControlFlow::Continue(())
    });
    out.sort();
    out
}

/// Applies `rule` at `m`; created elements get ids `name#stepN:rhsId`.
pub fn apply_rule(
    rule: &Rule,
    host: &Arc<TypedGraph>,
    m: &Morphism,
    step: usize,
) -> Result<Transformation, RewriteError> {
    let prefix = format!("{}#step{}:", rule.name, step);
    apply_with_ids(rule, host, m, |id| format!("{prefix}{id}"))
}

/// Like [`apply_rule`], but created elements keep their right-hand id
/// (primed where that would clash). Used when rewriting condition graphs.
pub fn apply_rule_plain(rule: &Rule, host: &Arc<TypedGraph>, m: &Morphism) -> Result<Transformation, RewriteError> {
    apply_with_ids(rule, host, m, str::to_string)
}

fn apply_with_ids(
    rule: &Rule,
    host: &Arc<TypedGraph>,
    m: &Morphism,
    name: impl Fn(&str) -> String,
) -> Result<Transformation, RewriteError> {
    m.check(&rule.lhs, host).map_err(|_| RewriteError::InvalidMatch)?;
    if let Some(n) = rule.dangling_node(host, m) {
        return Err(RewriteError::Dangling(host.node(n).id.clone()));
    }
    let (dn, de) = rule.deleted();
    let del_nodes: Vec<usize> = dn.iter().map(|&n| m.nodes[n]).collect();
    let del_edges: Vec<usize> = de.iter().map(|&e| m.edges[e]).collect();

    let mut d = GraphBuilder::default();
    for (i, n) in host.nodes().iter().enumerate() {
        if !del_nodes.contains(&i) {
            d.add_node(&n.id, &n.ty);
        }
    }
    for (i, e) in host.edges().iter().enumerate() {
        if !del_edges.contains(&i) {
            d.add_edge(&e.id, &e.ty, &host.node(e.src).id, &host.node(e.tgt).id);
        }
    }
    let mut h = d.clone();
    let d = Arc::new(d.build().expect("interface of a valid host is a graph"));

    // fresh ids must avoid everything in G, deleted elements included
    let (cn, ce) = rule.created();
    let mut rhs_node_id: Vec<Option<String>> = vec![None; rule.rhs.node_count()];
    for &(l, r) in &rule.k_nodes {
        rhs_node_id[r] = Some(host.node(m.nodes[l]).id.clone());
    }
    let mut taken_nodes: Vec<String> = Vec::new();
    for &r in &cn {
        let id = fresh_id(&name(&rule.rhs.node(r).id), |s| {
            host.node_by_id(s).is_some() || taken_nodes.iter().any(|t| t == s)
        });
        h.add_node(&id, &rule.rhs.node(r).ty);
        taken_nodes.push(id.clone());
        rhs_node_id[r] = Some(id);
    }
    let mut rhs_edge_id: Vec<Option<String>> = vec![None; rule.rhs.edge_count()];
    for &(l, r) in &rule.k_edges {
        rhs_edge_id[r] = Some(host.edge(m.edges[l]).id.clone());
    }
    let mut taken_edges: Vec<String> = Vec::new();
    for &r in &ce {
        let e = rule.rhs.edge(r);
        let id = fresh_id(&name(&e.id), |s| host.edge_by_id(s).is_some() || taken_edges.iter().any(|t| t == s));
        let (s, t) = (
            rhs_node_id[e.src].as_ref().expect("endpoint placed"),
            rhs_node_id[e.tgt].as_ref().expect("endpoint placed"),
        );
        h.add_edge(&id, &e.ty, s, t);
        taken_edges.push(id.clone());
        rhs_edge_id[r] = Some(id);
    }
    let h_graph = Arc::new(h.build().expect("result of a valid application is a graph"));

    let g_mor = Morphism::by_ids(&d, host).expect("D is a subgraph of G");
    let h_mor = Morphism::by_ids(&d, &h_graph).expect("D is a subgraph of H");
    let comatch = Morphism {
        nodes: rhs_node_id.iter().map(|id| h_graph.node_by_id(id.as_ref().expect("placed")).expect("in H")).collect(),
        edges: rhs_edge_id.iter().map(|id| h_graph.edge_by_id(id.as_ref().expect("placed")).expect("in H")).collect(),
    };
    let track = PartialMorphism {
        nodes: (0..host.node_count())
            .map(|i| (!del_nodes.contains(&i)).then(|| h_graph.node_by_id(&host.node(i).id).expect("kept")))
            .collect(),
        edges: (0..host.edge_count())
            .map(|i| (!del_edges.contains(&i)).then(|| h_graph.edge_by_id(&host.edge(i).id).expect("kept")))
            .collect(),
    };
    Ok(Transformation {
        rule: rule.clone(),
        matching: m.clone(),
        original: host.clone(),
        interface: d,
        result: h_graph,
        g: g_mor,
        h: h_mor,
        comatch,
        track,
    })
}

pub fn invert_rule(rule: &Rule) -> Rule {
    rule.inverse()
}

/// Neither match touches what the other step deletes.
pub fn parallel_independent(t1: &Transformation, t2: &Transformation) -> Result<bool, RewriteError> {
    if !Arc::ptr_eq(&t1.original, &t2.original) && t1.original != t2.original {
        return Err(RewriteError::DifferentOriginals);
    }
    let touches = |m: &Morphism, del: &(Vec<usize>, Vec<usize>)| {
        m.nodes.iter().any(|n| del.0.contains(n)) || m.edges.iter().any(|e| del.1.contains(e))
    };
    Ok(!touches(&t1.matching, &t2.deleted_elements()) && !touches(&t2.matching, &t1.deleted_elements()))
}

/// `track ∘ p` when every element of the occurrence survives.
pub fn track_total(t: &Transformation, p: &Morphism) -> Option<Morphism> {
    let nodes = p.nodes.iter().map(|&n| t.track.nodes[n]).collect::<Option<Vec<_>>>()?;
    let edges = p.edges.iter().map(|&e| t.track.edges[e]).collect::<Option<Vec<_>>>()?;
    Some(Morphism { nodes, edges })
}
