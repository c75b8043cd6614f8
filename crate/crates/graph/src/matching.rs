//! Enumeration of injective morphisms (subgraph isomorphism by backtracking).
//!
//! Pattern nodes are bound one at a time in a connectivity-first order.
//! A node adjacent to an already bound node only tries the host neighbours
//! reachable over an edge of the right type; pattern edges are bound as soon
//! as both of their endpoints are.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::graph::{Morphism, PartialMorphism, TypedGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("anchor is inconsistent with pattern or host: {0}")]
    InvalidAnchor(String),
}

const UNBOUND: usize = usize::MAX;

/// All injective morphisms `pattern -> host` extending `anchor`, sorted by
/// their image tuples.
pub fn find_monomorphisms(
    pattern: &TypedGraph,
    host: &TypedGraph,
    anchor: Option<&PartialMorphism>,
) -> Result<Vec<Morphism>, MatchError> {
    let undefined;
    let anchor = match anchor {
        Some(a) => {
            a.check(pattern, host).map_err(|e| MatchError::InvalidAnchor(e.to_string()))?;
            a
        }
        None => {
            undefined = PartialMorphism::undefined(pattern);
            &undefined
        }
    };
    let mut out = Vec::new();
    let _ = for_each_monomorphism(pattern, host, anchor, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    });
    out.sort();
    Ok(out)
}

/// Visits every injective extension of `anchor` in search order.
///
/// The anchor is trusted to be injective and type-correct; an anchor whose
/// edges contradict its nodes simply yields nothing.
pub fn for_each_monomorphism<F>(
    pattern: &TypedGraph,
    host: &TypedGraph,
    anchor: &PartialMorphism,
    mut f: F,
) -> ControlFlow<()>
where
    F: FnMut(&Morphism) -> ControlFlow<()>,
{
    match Search::new(pattern, host, anchor) {
        Some(mut s) => s.node_step(0, &mut f),
        None => ControlFlow::Continue(()),
    }
}

pub fn first_monomorphism(pattern: &TypedGraph, host: &TypedGraph, anchor: &PartialMorphism) -> Option<Morphism> {
    let mut found = None;
    let _ = for_each_monomorphism(pattern, host, anchor, |m| {
        found = Some(m.clone());
        ControlFlow::Break(())
    });
    found
}

pub fn exists_monomorphism(pattern: &TypedGraph, host: &TypedGraph, anchor: &PartialMorphism) -> bool {
    for_each_monomorphism(pattern, host, anchor, |_| ControlFlow::Break(())).is_break()
}

pub fn count_monomorphisms(pattern: &TypedGraph, host: &TypedGraph, anchor: &PartialMorphism) -> usize {
    let mut n = 0;
    let _ = for_each_monomorphism(pattern, host, anchor, |_| {
        n += 1;
        ControlFlow::Continue(())
    });
    n
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Fixed(usize),
    /// Walk pattern edge `edge` from its already bound endpoint.
    Along {
        edge: usize,
        forward: bool,
    },
    Any,
}

struct Step {
    node: usize,
    source: Source,
    /// Pattern edges closed by binding this node.
    closes: Vec<usize>,
}

struct Search<'a> {
    pat: &'a TypedGraph,
    host: &'a TypedGraph,
    steps: Vec<Step>,
    cur: Morphism,
    used_nodes: Vec<usize>,
    used_edges: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(pat: &'a TypedGraph, host: &'a TypedGraph, anchor: &PartialMorphism) -> Option<Self> {
        if pat.node_count() > host.node_count() || pat.edge_count() > host.edge_count() {
            return None;
        }
        let mut cur = Morphism { nodes: vec![UNBOUND; pat.node_count()], edges: vec![UNBOUND; pat.edge_count()] };
        for (i, n) in anchor.nodes.iter().enumerate() {
            if let Some(n) = *n {
                cur.nodes[i] = n;
            }
        }
        // anchored edges pin their endpoints
        for (i, e) in anchor.edges.iter().enumerate() {
            let Some(e) = *e else { continue };
            let (pe, he) = (pat.edge(i), host.edge(e));
            if pe.ty != he.ty {
                return None;
            }
            for (p, h) in [(pe.src, he.src), (pe.tgt, he.tgt)] {
                if cur.nodes[p] == UNBOUND {
                    if pat.node(p).ty != host.node(h).ty {
                        return None;
                    }
                    cur.nodes[p] = h;
                } else if cur.nodes[p] != h {
                    return None;
                }
            }
            cur.edges[i] = e;
        }
        let fixed: Vec<bool> = cur.nodes.iter().map(|&n| n != UNBOUND).collect();
        let mut used_nodes: Vec<usize> = cur.nodes.iter().copied().filter(|&n| n != UNBOUND).collect();
        let used_edges: Vec<usize> = cur.edges.iter().copied().filter(|&e| e != UNBOUND).collect();
        used_nodes.sort_unstable();
        if used_nodes.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        let mut s = Search { pat, host, steps: Vec::new(), cur, used_nodes: Vec::new(), used_edges };
        s.plan(&fixed);
        // fixed nodes are re-bound by their own steps
        for n in s.cur.nodes.iter_mut() {
            *n = UNBOUND;
        }
        Some(s)
    }

    fn plan(&mut self, fixed: &[bool]) {
        let pat = self.pat;
        let n = pat.node_count();
        let mut placed = vec![false; n];
        let degree = |v: usize| pat.out_edges(v).len() + pat.in_edges(v).len();
        let mut order: Vec<(usize, Source)> = Vec::with_capacity(n);
        for v in 0..n {
            if fixed[v] {
                placed[v] = true;
                order.push((v, Source::Fixed(self.cur.nodes[v])));
            }
        }
        while order.len() < n {
            // most connections into the placed set, then highest degree
            let mut best: Option<(usize, usize, usize)> = None;
            for v in (0..n).filter(|&v| !placed[v]) {
                let links = pat.incident_edges(v).filter(|&e| {
                    let ed = pat.edge(e);
                    placed[ed.src] || placed[ed.tgt]
                });
                let key = (links.count(), degree(v));
                if best.is_none_or(|(_, l, d)| key > (l, d)) {
                    best = Some((v, key.0, key.1));
                }
            }
            let (v, links, _) = best.expect("unplaced node exists");
            let source = if links == 0 {
                Source::Any
            } else {
                let e = pat
                    .incident_edges(v)
                    .find(|&e| {
                        let ed = pat.edge(e);
                        (ed.src == v && placed[ed.tgt]) || (ed.tgt == v && placed[ed.src])
                    })
                    .expect("linked edge exists");
                Source::Along { edge: e, forward: pat.edge(e).tgt == v }
            };
            placed[v] = true;
            order.push((v, source));
        }
        let mut pos = vec![0; n];
        for (k, (v, _)) in order.iter().enumerate() {
            pos[*v] = k;
        }
        self.steps = order
            .into_iter()
            .enumerate()
            .map(|(k, (node, source))| {
                let closes = (0..pat.edge_count())
                    .filter(|&e| self.cur.edges[e] == UNBOUND)
                    .filter(|&e| {
                        let ed = pat.edge(e);
                        pos[ed.src].max(pos[ed.tgt]) == k
                    })
                    .collect();
                Step { node, source, closes }
            })
            .collect();
    }

    fn node_step(&mut self, k: usize, f: &mut dyn FnMut(&Morphism) -> ControlFlow<()>) -> ControlFlow<()> {
        if k == self.steps.len() {
            return f(&self.cur);
        }
        let v = self.steps[k].node;
        match self.steps[k].source {
            Source::Fixed(h) => self.try_bind(k, v, h, f),
            Source::Any => {
                let host = self.host;
                for &h in host.nodes_of_type(&self.pat.node(v).ty) {
                    self.try_bind(k, v, h, f)?;
                }
                ControlFlow::Continue(())
            }
            Source::Along { edge, forward } => {
                let host = self.host;
                let pe = self.pat.edge(edge);
                let list = if forward {
                    host.out_edges(self.cur.nodes[pe.src])
                } else {
                    host.in_edges(self.cur.nodes[pe.tgt])
                };
                let mut tried: Vec<usize> = Vec::new();
                for &he in list {
                    let hed = host.edge(he);
                    if hed.ty != pe.ty {
                        continue;
                    }
                    let h = if forward { hed.tgt } else { hed.src };
                    if tried.contains(&h) {
                        continue;
                    }
                    tried.push(h);
                    self.try_bind(k, v, h, f)?;
                }
                ControlFlow::Continue(())
            }
        }
    }

    fn try_bind(
        &mut self,
        k: usize,
        v: usize,
        h: usize,
        f: &mut dyn FnMut(&Morphism) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let (pat, host) = (self.pat, self.host);
        if pat.node(v).ty != host.node(h).ty || self.used_nodes.contains(&h) {
            return ControlFlow::Continue(());
        }
        if host.out_edges(h).len() < pat.out_edges(v).len() || host.in_edges(h).len() < pat.in_edges(v).len() {
            return ControlFlow::Continue(());
        }
        self.cur.nodes[v] = h;
        self.used_nodes.push(h);
        let r = self.edge_step(k, 0, f);
        self.used_nodes.pop();
        self.cur.nodes[v] = UNBOUND;
        r
    }

    fn edge_step(&mut self, k: usize, j: usize, f: &mut dyn FnMut(&Morphism) -> ControlFlow<()>) -> ControlFlow<()> {
        let Some(&pe) = self.steps[k].closes.get(j) else {
            return self.node_step(k + 1, f);
        };
        let (pat, host) = (self.pat, self.host);
        let ped = pat.edge(pe);
        let (hs, ht) = (self.cur.nodes[ped.src], self.cur.nodes[ped.tgt]);
        for &he in host.out_edges(hs) {
            let hed = host.edge(he);
            if hed.tgt != ht || hed.ty != ped.ty || self.used_edges.contains(&he) {
                continue;
            }
            self.cur.edges[pe] = he;
            self.used_edges.push(he);
            let r = self.edge_step(k, j + 1, f);
            self.used_edges.pop();
            self.cur.edges[pe] = UNBOUND;
            r?;
        }
        ControlFlow::Continue(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn host() -> TypedGraph {
        TypedGraph::builder()
            .node("a", "A")
            .node("b", "A")
            .node("c", "B")
            .edge("ab", "r", "a", "b")
            .edge("ab2", "r", "a", "b")
            .edge("bc", "s", "b", "c")
            .build()
            .unwrap()
    }

    #[test]
    fn parallel_edges_are_distinct_witnesses() {
        let p = TypedGraph::builder().node("x", "A").node("y", "A").edge("e", "r", "x", "y").build().unwrap();
        let ms = find_monomorphisms(&p, &host(), None).unwrap();
        assert_eq!(ms.len(), 2);
        assert!(ms.iter().all(|m| m.is_valid(&p, &host())));
    }

    #[test]
    fn pattern_larger_than_host_has_no_matches() {
        let p = TypedGraph::builder().node("x", "B").node("y", "B").build().unwrap();
        assert!(find_monomorphisms(&p, &host(), None).unwrap().is_empty());
    }

    #[test]
    fn identity_anchor_pins_everything() {
        let g = host();
        let anchor = Morphism::identity(&g).to_partial();
        let ms = find_monomorphisms(&g, &g, Some(&anchor)).unwrap();
        assert_eq!(ms, vec![Morphism::identity(&g)]);
    }

    #[test]
    fn anchored_edge_fixes_endpoints() {
        let g = host();
        let p = TypedGraph::builder().node("x", "A").node("y", "A").edge("e", "r", "x", "y").build().unwrap();
        let anchor = PartialMorphism { nodes: vec![None, None], edges: vec![Some(1)] };
        let ms = find_monomorphisms(&p, &g, Some(&anchor)).unwrap();
        assert_eq!(ms, vec![Morphism { nodes: vec![0, 1], edges: vec![1] }]);
    }

    #[test]
    fn inconsistent_anchor_is_rejected() {
        let g = host();
        let p = TypedGraph::builder().node("x", "B").build().unwrap();
        let anchor = PartialMorphism { nodes: vec![Some(0)], edges: vec![] };
        assert!(find_monomorphisms(&p, &g, Some(&anchor)).is_err());
    }

    #[test]
    fn disconnected_pattern_enumerates_products() {
        let p = TypedGraph::builder().node("x", "A").node("y", "A").build().unwrap();
        let ms = find_monomorphisms(&p, &host(), None).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].nodes, vec![0, 1]);
    }
}
