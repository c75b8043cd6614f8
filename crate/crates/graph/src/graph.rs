//! Typed multigraphs and injective morphisms between them.
//!
//! Graphs are immutable once built. Nodes and edges are stored sorted by id,
//! so element indices follow id order and index tuples sort the same way as
//! id tuples.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` refers to missing endpoint `{node}`")]
    MissingEndpoint { edge: String, node: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeType {
    pub name: String,
    pub src: String,
    pub tgt: String,
}

/// Node types plus edge types with their declared endpoint types.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeGraph {
    pub node_types: BTreeSet<String>,
    pub edge_types: BTreeSet<EdgeType>,
}

impl TypeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_node_type(mut self, t: &str) -> Self {
        self.node_types.insert(t.to_string());
        self
    }

    pub fn with_edge_type(mut self, name: &str, src: &str, tgt: &str) -> Self {
        self.edge_types.insert(EdgeType { name: name.into(), src: src.into(), tgt: tgt.into() });
        self
    }

    pub fn allows_edge(&self, name: &str, src: &str, tgt: &str) -> bool {
        self.edge_types.iter().any(|e| e.name == name && e.src == src && e.tgt == tgt)
    }

    /// Problems with the type graph itself.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.edge_types {
            for end in [&e.src, &e.tgt] {
                if !self.node_types.contains(end) {
                    out.push(format!("edge type `{}` names undeclared node type `{}`", e.name, end));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub id: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: String,
    pub ty: String,
    pub src: usize,
    pub tgt: usize,
}

/// A finite directed multigraph whose nodes and edges carry type labels.
#[derive(Clone, Default)]
pub struct TypedGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    by_type: HashMap<String, Vec<usize>>,
}

impl PartialEq for TypedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for TypedGraph {}

impl fmt::Debug for TypedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TypedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for n in &self.nodes {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}:{}", n.id, n.ty)?;
        }
        for e in &self.edges {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}:{}({}->{})", e.id, e.ty, self.nodes[e.src].id, self.nodes[e.tgt].id)?;
        }
        write!(f, "}}")
    }
}

impl TypedGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub fn node_by_id(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge_by_id(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    /// Node indices carrying the given type, ascending.
    pub fn nodes_of_type(&self, ty: &str) -> &[usize] {
        self.by_type.get(ty).map_or(&[], Vec::as_slice)
    }

    pub fn out_edges(&self, n: usize) -> &[usize] {
        &self.out_adj[n]
    }

    pub fn in_edges(&self, n: usize) -> &[usize] {
        &self.in_adj[n]
    }

    /// Edges incident to `n` in either direction; a loop is listed once.
    pub fn incident_edges(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_adj[n].iter().copied().chain(self.in_adj[n].iter().copied().filter(move |&e| self.edges[e].src != n))
    }

    /// Reopens the graph for modification.
    pub fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder::default();
        for n in &self.nodes {
            b.add_node(&n.id, &n.ty);
        }
        for e in &self.edges {
            b.add_edge(&e.id, &e.ty, &self.nodes[e.src].id, &self.nodes[e.tgt].id);
        }
        b
    }

    /// Diagnostics against a type graph; empty when the typing is sound.
    pub fn typing_diagnostics(&self, tg: &TypeGraph) -> Vec<String> {
        let mut out = Vec::new();
        for n in &self.nodes {
            if !tg.node_types.contains(&n.ty) {
                out.push(format!("node `{}` has undeclared type `{}`", n.id, n.ty));
            }
        }
        for e in &self.edges {
            let (s, t) = (&self.nodes[e.src].ty, &self.nodes[e.tgt].ty);
            if !tg.allows_edge(&e.ty, s, t) {
                out.push(format!("edge `{}` of type `{}` does not fit endpoints {} -> {}", e.id, e.ty, s, t));
            }
        }
        out
    }

    pub fn node_ids(&self) -> BTreeSet<&str> {
        self.nodes.iter().map(|n| n.id.as_str()).collect()
    }

    pub fn edge_ids(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|e| e.id.as_str()).collect()
    }
}

/// Accumulates nodes and edges in any order; `build` sorts and indexes them.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    nodes: Vec<(String, String)>,
    edges: Vec<(String, String, String, String)>,
}

impl GraphBuilder {
    pub fn node(mut self, id: &str, ty: &str) -> Self {
        self.add_node(id, ty);
        self
    }

    pub fn edge(mut self, id: &str, ty: &str, src: &str, tgt: &str) -> Self {
        self.add_edge(id, ty, src, tgt);
        self
    }

    pub fn add_node(&mut self, id: &str, ty: &str) {
        self.nodes.push((id.into(), ty.into()));
    }

    pub fn add_edge(&mut self, id: &str, ty: &str, src: &str, tgt: &str) {
        self.edges.push((id.into(), ty.into(), src.into(), tgt.into()));
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.nodes.iter().any(|(n, _)| n == id)
    }

    pub fn has_edge(&self, id: &str) -> bool {
        self.edges.iter().any(|(e, ..)| e == id)
    }

    /// Drops the node with this id together with its incident edges.
    pub fn remove_node(&mut self, id: &str) {
        self.nodes.retain(|(n, _)| n != id);
        self.edges.retain(|(_, _, s, t)| s != id && t != id);
    }

    pub fn remove_edge(&mut self, id: &str) {
        self.edges.retain(|(e, ..)| e != id);
    }

    pub fn build(self) -> Result<TypedGraph, GraphError> {
        let mut nodes: Vec<Node> = self.nodes.into_iter().map(|(id, ty)| Node { id, ty }).collect();
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.id.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(n.id.clone()));
            }
        }
        let mut raw = self.edges;
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        let mut edges = Vec::with_capacity(raw.len());
        let mut edge_index = HashMap::with_capacity(raw.len());
        let mut out_adj = vec![Vec::new(); nodes.len()];
        let mut in_adj = vec![Vec::new(); nodes.len()];
        for (id, ty, s, t) in raw {
            let lookup = |n: &str| {
                node_index
                    .get(n)
                    .copied()
                    .ok_or_else(|| GraphError::MissingEndpoint { edge: id.clone(), node: n.to_string() })
            };
            let (src, tgt) = (lookup(&s)?, lookup(&t)?);
            let i = edges.len();
            if edge_index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateEdge(id));
            }
            out_adj[src].push(i);
            in_adj[tgt].push(i);
            edges.push(Edge { id, ty, src, tgt });
        }
        let mut by_type: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            by_type.entry(n.ty.clone()).or_default().push(i);
        }
        Ok(TypedGraph { nodes, edges, node_index, edge_index, out_adj, in_adj, by_type })
    }
}

/// Returns `base` if unused, otherwise `base` with primes appended until it is.
pub fn fresh_id(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let mut id = base.to_string();
    while taken(&id) {
        id.push('\'');
    }
    id
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("morphism arity does not match its domain")]
    Arity,
    #[error("image index out of range of the codomain")]
    OutOfRange,
    #[error("morphism is not injective")]
    NotInjective,
    #[error("morphism does not preserve types")]
    Type,
    #[error("morphism does not preserve edge endpoints")]
    Structure,
    #[error("composition domain mismatch")]
    DomainMismatch,
}

/// Total injective graph morphism, stored as image indices into the codomain.
/// Position `i` of `nodes` is the image of domain node `i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Morphism {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Morphism {
    pub fn identity(g: &TypedGraph) -> Self {
        Morphism { nodes: (0..g.node_count()).collect(), edges: (0..g.edge_count()).collect() }
    }

    /// The unique morphism out of the empty graph.
    pub fn from_empty() -> Self {
        Morphism::default()
    }

    /// Maps every element of `dom` to the element of `cod` with the same id.
    pub fn by_ids(dom: &TypedGraph, cod: &TypedGraph) -> Option<Self> {
        let nodes = dom.nodes.iter().map(|n| cod.node_by_id(&n.id)).collect::<Option<Vec<_>>>()?;
        let edges = dom.edges.iter().map(|e| cod.edge_by_id(&e.id)).collect::<Option<Vec<_>>>()?;
        Some(Morphism { nodes, edges })
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Morphism) -> Morphism {
        Morphism {
            nodes: self.nodes.iter().map(|&n| other.nodes[n]).collect(),
            edges: self.edges.iter().map(|&e| other.edges[e]).collect(),
        }
    }

    pub fn to_partial(&self) -> PartialMorphism {
        PartialMorphism {
            nodes: self.nodes.iter().map(|&n| Some(n)).collect(),
            edges: self.edges.iter().map(|&e| Some(e)).collect(),
        }
    }

    /// Inverse of a bijective morphism, as a morphism from the codomain.
    pub fn invert(&self) -> Option<Morphism> {
        let mut nodes = vec![usize::MAX; self.nodes.len()];
        for (i, &n) in self.nodes.iter().enumerate() {
            *nodes.get_mut(n)? = i;
        }
        let mut edges = vec![usize::MAX; self.edges.len()];
        for (i, &e) in self.edges.iter().enumerate() {
            *edges.get_mut(e)? = i;
        }
        Some(Morphism { nodes, edges })
    }

    pub fn check(&self, dom: &TypedGraph, cod: &TypedGraph) -> Result<(), MorphismError> {
        self.to_partial().check(dom, cod)?;
        if self.nodes.len() != dom.node_count() || self.edges.len() != dom.edge_count() {
            return Err(MorphismError::Arity);
        }
        Ok(())
    }

    pub fn is_valid(&self, dom: &TypedGraph, cod: &TypedGraph) -> bool {
        self.check(dom, cod).is_ok()
    }

    pub fn is_bijective(&self, dom: &TypedGraph, cod: &TypedGraph) -> bool {
        self.is_valid(dom, cod) && dom.node_count() == cod.node_count() && dom.edge_count() == cod.edge_count()
    }

    pub fn node_map(&self, dom: &TypedGraph, cod: &TypedGraph) -> BTreeMap<String, String> {
        self.nodes.iter().enumerate().map(|(i, &n)| (dom.node(i).id.clone(), cod.node(n).id.clone())).collect()
    }

    pub fn edge_map(&self, dom: &TypedGraph, cod: &TypedGraph) -> BTreeMap<String, String> {
        self.edges.iter().enumerate().map(|(i, &e)| (dom.edge(i).id.clone(), cod.edge(e).id.clone())).collect()
    }

    /// Readable `dom->cod` pairs, used for match descriptions.
    pub fn describe(&self, dom: &TypedGraph, cod: &TypedGraph) -> String {
        let parts: Vec<String> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &n)| format!("{}->{}", dom.node(i).id, cod.node(n).id))
            .chain(self.edges.iter().enumerate().map(|(i, &e)| format!("{}->{}", dom.edge(i).id, cod.edge(e).id)))
            .collect();
        parts.join(",")
    }
}

/// `g ∘ f`, checking that the codomain of `f` is the domain of `g`.
pub fn compose(f: &Morphism, g: &Morphism, mid: &TypedGraph) -> Result<Morphism, MorphismError> {
    if g.nodes.len() != mid.node_count() || g.edges.len() != mid.edge_count() {
        return Err(MorphismError::DomainMismatch);
    }
    if f.nodes.iter().any(|&n| n >= g.nodes.len()) || f.edges.iter().any(|&e| e >= g.edges.len()) {
        return Err(MorphismError::DomainMismatch);
    }
    Ok(f.then(g))
}

/// A morphism that may be undefined on some domain elements.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialMorphism {
    pub nodes: Vec<Option<usize>>,
    pub edges: Vec<Option<usize>>,
}

impl PartialMorphism {
    pub fn undefined(dom: &TypedGraph) -> Self {
        PartialMorphism { nodes: vec![None; dom.node_count()], edges: vec![None; dom.edge_count()] }
    }

    pub fn is_total(&self) -> bool {
        self.nodes.iter().all(Option::is_some) && self.edges.iter().all(Option::is_some)
    }

    pub fn to_total(&self) -> Option<Morphism> {
        Some(Morphism {
            nodes: self.nodes.iter().copied().collect::<Option<_>>()?,
            edges: self.edges.iter().copied().collect::<Option<_>>()?,
        })
    }

    /// Whether `m` agrees with every defined entry.
    pub fn is_extended_by(&self, m: &Morphism) -> bool {
        self.nodes.iter().zip(&m.nodes).all(|(a, b)| a.is_none_or(|a| a == *b))
            && self.edges.iter().zip(&m.edges).all(|(a, b)| a.is_none_or(|a| a == *b))
    }

    /// `self` followed by a total morphism; stays undefined where `self` is.
    pub fn then(&self, g: &Morphism) -> PartialMorphism {
        PartialMorphism {
            nodes: self.nodes.iter().map(|n| n.map(|n| g.nodes[n])).collect(),
            edges: self.edges.iter().map(|e| e.map(|e| g.edges[e])).collect(),
        }
    }

    /// Injectivity and structure/type preservation where defined.
    pub fn check(&self, dom: &TypedGraph, cod: &TypedGraph) -> Result<(), MorphismError> {
        if self.nodes.len() != dom.node_count() || self.edges.len() != dom.edge_count() {
            return Err(MorphismError::Arity);
        }
        let mut seen = BTreeSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let Some(n) = *n else { continue };
            if n >= cod.node_count() {
                return Err(MorphismError::OutOfRange);
            }
            if !seen.insert(n) {
                return Err(MorphismError::NotInjective);
            }
            if dom.node(i).ty != cod.node(n).ty {
                return Err(MorphismError::Type);
            }
        }
        seen.clear();
        for (i, e) in self.edges.iter().enumerate() {
            let Some(e) = *e else { continue };
            if e >= cod.edge_count() {
                return Err(MorphismError::OutOfRange);
            }
            if !seen.insert(e) {
                return Err(MorphismError::NotInjective);
            }
            let (de, ce) = (dom.edge(i), cod.edge(e));
            if de.ty != ce.ty {
                return Err(MorphismError::Type);
            }
            for (d, c) in [(de.src, ce.src), (de.tgt, ce.tgt)] {
                if self.nodes[d].is_some_and(|x| x != c) {
                    return Err(MorphismError::Structure);
                }
            }
        }
        Ok(())
    }
}

/// Some isomorphism `g1 -> g2`, if one exists.
pub fn graphs_isomorphic(g1: &TypedGraph, g2: &TypedGraph) -> Option<Morphism> {
    if g1.node_count() != g2.node_count() || g1.edge_count() != g2.edge_count() {
        return None;
    }
    crate::matching::first_monomorphism(g1, g2, &PartialMorphism::undefined(g1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_nodes() -> TypedGraph {
        TypedGraph::builder().node("b", "T").node("a", "T").edge("e", "r", "a", "b").build().unwrap()
    }

    #[test]
    fn build_sorts_by_id() {
        let g = two_nodes();
        assert_eq!(g.node(0).id, "a");
        assert_eq!(g.edge(0).src, 0);
        assert_eq!(g.out_edges(0), &[0]);
        assert_eq!(g.in_edges(1), &[0]);
    }

    #[test]
    fn build_rejects_missing_endpoint_and_duplicates() {
        let err = TypedGraph::builder().node("a", "T").edge("e", "r", "a", "zz").build().unwrap_err();
        assert_eq!(err, GraphError::MissingEndpoint { edge: "e".into(), node: "zz".into() });
        let err = TypedGraph::builder().node("a", "T").node("a", "U").build().unwrap_err();
        assert_eq!(err, GraphError::DuplicateNode("a".into()));
    }

    #[test]
    fn identity_is_valid_and_neutral() {
        let g = two_nodes();
        let id = Morphism::identity(&g);
        assert!(id.is_valid(&g, &g));
        assert_eq!(compose(&id, &id, &g).unwrap(), id);
    }

    #[test]
    fn check_catches_broken_structure() {
        let g = two_nodes();
        let swapped = Morphism { nodes: vec![1, 0], edges: vec![0] };
        assert_eq!(swapped.check(&g, &g), Err(MorphismError::Structure));
        let collapsed = Morphism { nodes: vec![0, 0], edges: vec![0] };
        assert_eq!(collapsed.check(&g, &g), Err(MorphismError::NotInjective));
    }

    #[test]
    fn isomorphism_respects_types() {
        let a = TypedGraph::builder().node("x", "A").build().unwrap();
        let b = TypedGraph::builder().node("y", "B").build().unwrap();
        assert!(graphs_isomorphic(&a, &b).is_none());
        assert!(graphs_isomorphic(&a, &a).is_some());
    }

    #[test]
    fn fresh_id_appends_primes() {
        let taken = ["a", "a'"];
        assert_eq!(fresh_id("a", |s| taken.contains(&s)), "a''");
        assert_eq!(fresh_id("b", |s| taken.contains(&s)), "b");
    }
}
