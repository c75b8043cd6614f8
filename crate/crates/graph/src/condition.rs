//! Nested graph conditions, their satisfaction relation and violation counting.
//!
//! The semantic core is `True | Exists | Not | Or`. `False`, `And`, `Implies`
//! and `ForAll` stay in the tree so that derived conditions print the way
//! they are usually written; [`Condition::lower`] rewrites them away.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{Morphism, PartialMorphism, TypedGraph};
use crate::matching::for_each_monomorphism;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionError {
    #[error("embedding into `{0}` does not start at the graph the condition is over")]
    Domain(String),
    #[error("embedding is not an injective morphism: {0}")]
    Embedding(String),
    #[error("constraint condition is not closed (not over the empty graph)")]
    NotClosed,
}

/// `∃(e: P ↪ Q, body)` or `∀(e: P ↪ Q, body)` with `body` over `Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantifier {
    pub graph: Arc<TypedGraph>,
    pub embedding: Morphism,
    pub body: Condition,
}

impl Quantifier {
    pub fn anchor_for(&self, p: &Morphism) -> PartialMorphism {
        anchor_through(&self.graph, &self.embedding, p)
    }
}

/// The anchor that forces `q ∘ e = p` when searching `q: Q ↪ G`.
pub fn anchor_through(q: &TypedGraph, e: &Morphism, p: &Morphism) -> PartialMorphism {
    let mut a = PartialMorphism::undefined(q);
    for (i, &x) in e.nodes.iter().enumerate() {
        a.nodes[x] = Some(p.nodes[i]);
    }
    for (i, &x) in e.edges.iter().enumerate() {
        a.edges[x] = Some(p.edges[i]);
    }
    a
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    True,
    False,
    Exists(Box<Quantifier>),
    ForAll(Box<Quantifier>),
    Not(Box<Condition>),
    Or(Vec<Condition>),
    And(Vec<Condition>),
    Implies(Box<Condition>, Box<Condition>),
}

impl Condition {
    pub fn exists(graph: Arc<TypedGraph>, embedding: Morphism, body: Condition) -> Self {
        Condition::Exists(Box::new(Quantifier { graph, embedding, body }))
    }

    pub fn forall(graph: Arc<TypedGraph>, embedding: Morphism, body: Condition) -> Self {
        Condition::ForAll(Box::new(Quantifier { graph, embedding, body }))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Condition) -> Self {
        Condition::Not(Box::new(c))
    }

    pub fn implies(a: Condition, b: Condition) -> Self {
        Condition::Implies(Box::new(a), Box::new(b))
    }

    /// Checks every embedding against the graph it starts from.
    pub fn check(&self, over: &TypedGraph) -> Result<(), ConditionError> {
        match self {
            Condition::True | Condition::False => Ok(()),
            Condition::Exists(q) | Condition::ForAll(q) => {
                let e = &q.embedding;
                if e.nodes.len() != over.node_count() || e.edges.len() != over.edge_count() {
                    return Err(ConditionError::Domain(q.graph.to_string()));
                }
                e.check(over, &q.graph).map_err(|err| ConditionError::Embedding(err.to_string()))?;
                q.body.check(&q.graph)
            }
            Condition::Not(c) => c.check(over),
            Condition::Or(cs) | Condition::And(cs) => cs.iter().try_for_each(|c| c.check(over)),
            Condition::Implies(a, b) => {
                a.check(over)?;
                b.check(over)
            }
        }
    }

    /// Rewrites the sugar nodes into `True | Exists | Not | Or`.
    pub fn lower(&self) -> Condition {
        match self {
            Condition::True => Condition::True,
            Condition::False => Condition::not(Condition::True),
            Condition::Exists(q) => Condition::exists(q.graph.clone(), q.embedding.clone(), q.body.lower()),
            Condition::ForAll(q) => {
                Condition::not(Condition::exists(q.graph.clone(), q.embedding.clone(), Condition::not(q.body.lower())))
            }
            Condition::Not(c) => Condition::not(c.lower()),
            Condition::Or(cs) => Condition::Or(cs.iter().map(Condition::lower).collect()),
            Condition::And(cs) => Condition::not(Condition::Or(cs.iter().map(|c| Condition::not(c.lower())).collect())),
            Condition::Implies(a, b) => Condition::Or(vec![Condition::not(a.lower()), b.lower()]),
        }
    }

    /// Constant folding: absorbs `True`/`False`, flattens nested `Or`/`And`
    /// and drops double negation.
    pub fn fold(&self) -> Condition {
        match self {
            Condition::True => Condition::True,
            Condition::False => Condition::False,
            Condition::Exists(q) => match q.body.fold() {
                Condition::False => Condition::False,
                body => Condition::exists(q.graph.clone(), q.embedding.clone(), body),
            },
            Condition::ForAll(q) => match q.body.fold() {
                Condition::True => Condition::True,
                body => Condition::forall(q.graph.clone(), q.embedding.clone(), body),
            },
            Condition::Not(c) => negate(c.fold()),
            Condition::Or(cs) => {
                let mut out = Vec::new();
                for c in cs {
                    match c.fold() {
                        Condition::True => return Condition::True,
                        Condition::False => {}
                        Condition::Or(inner) => out.extend(inner),
                        c => out.push(c),
                    }
                }
                match out.len() {
                    0 => Condition::False,
                    1 => out.pop().expect("one element"),
                    _ => Condition::Or(out),
                }
            }
            Condition::And(cs) => {
                let mut out = Vec::new();
                for c in cs {
                    match c.fold() {
                        Condition::False => return Condition::False,
                        Condition::True => {}
                        Condition::And(inner) => out.extend(inner),
                        c => out.push(c),
                    }
                }
                match out.len() {
                    0 => Condition::True,
                    1 => out.pop().expect("one element"),
                    _ => Condition::And(out),
                }
            }
            Condition::Implies(a, b) => match (a.fold(), b.fold()) {
                (Condition::False, _) | (_, Condition::True) => Condition::True,
                (Condition::True, b) => b,
                (a, Condition::False) => negate(a),
                (a, b) => Condition::implies(a, b),
            },
        }
    }

    /// Immediate disjuncts: the children of an `Or`, `[]` for `False`,
    /// otherwise the condition itself.
    pub fn disjuncts(&self) -> Vec<Condition> {
        match self {
            Condition::Or(cs) => cs.clone(),
            Condition::False => Vec::new(),
            c => vec![c.clone()],
        }
    }

    pub fn disjunction(mut cs: Vec<Condition>) -> Condition {
        match cs.len() {
            0 => Condition::False,
            1 => cs.pop().expect("one element"),
            _ => Condition::Or(cs),
        }
    }

    pub fn conjunction(mut cs: Vec<Condition>) -> Condition {
        match cs.len() {
            0 => Condition::True,
            1 => cs.pop().expect("one element"),
            _ => Condition::And(cs),
        }
    }

    /// Number of quantifier nodes, a rough size measure.
    pub fn quantifier_count(&self) -> usize {
        match self {
            Condition::True | Condition::False => 0,
            Condition::Exists(q) | Condition::ForAll(q) => 1 + q.body.quantifier_count(),
            Condition::Not(c) => c.quantifier_count(),
            Condition::Or(cs) | Condition::And(cs) => cs.iter().map(Condition::quantifier_count).sum(),
            Condition::Implies(a, b) => a.quantifier_count() + b.quantifier_count(),
        }
    }
}

fn negate(c: Condition) -> Condition {
    match c {
        Condition::True => Condition::False,
        Condition::False => Condition::True,
        Condition::Not(inner) => *inner,
        c => Condition::not(c),
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, op: &str, cs: &[Condition]) -> fmt::Result {
            write!(f, "(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")
        }
        match self {
            Condition::True => write!(f, "true"),
            Condition::False => write!(f, "false"),
            Condition::Exists(q) => write!(f, "exists({}, {})", q.graph, q.body),
            Condition::ForAll(q) => write!(f, "forall({}, {})", q.graph, q.body),
            Condition::Not(c) => write!(f, "not {c}"),
            Condition::Or(cs) => list(f, "or", cs),
            Condition::And(cs) => list(f, "and", cs),
            Condition::Implies(a, b) => write!(f, "({a} => {b})"),
        }
    }
}

/// `p ⊨ c`, where `p` starts at the graph `c` is over.
pub fn satisfies(host: &TypedGraph, p: &Morphism, c: &Condition) -> bool {
    match c {
        Condition::True => true,
        Condition::False => false,
        Condition::Exists(q) => for_each_monomorphism(&q.graph, host, &q.anchor_for(p), |m| {
            if satisfies(host, m, &q.body) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .is_break(),
        Condition::ForAll(q) => for_each_monomorphism(&q.graph, host, &q.anchor_for(p), |m| {
            if satisfies(host, m, &q.body) {
                ControlFlow::Continue(())
            } else {
                ControlFlow::Break(())
            }
        })
        .is_continue(),
        Condition::Not(c) => !satisfies(host, p, c),
        Condition::Or(cs) => cs.iter().any(|c| satisfies(host, p, c)),
        Condition::And(cs) => cs.iter().all(|c| satisfies(host, p, c)),
        Condition::Implies(a, b) => !satisfies(host, p, a) || satisfies(host, p, b),
    }
}

/// `∀(e: C ↪ P, body)`: the shape shared by constraints (`C = ∅`) and
/// application conditions (`C = L`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universal {
    pub premise: Arc<TypedGraph>,
    pub embedding: Morphism,
    pub body: Condition,
}

/// Violations of a universal condition at one anchor `p: C ↪ G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationSet {
    pub anchor: Morphism,
    pub witnesses: Vec<Morphism>,
}

impl Universal {
    fn anchor_for(&self, p: &Morphism) -> PartialMorphism {
        anchor_through(&self.premise, &self.embedding, p)
    }

    /// `{q: P ↪ G | p = q ∘ e, q ⊭ body}`, sorted.
    pub fn violations(&self, host: &TypedGraph, p: &Morphism) -> ViolationSet {
        let mut witnesses = Vec::new();
        let _ = for_each_monomorphism(&self.premise, host, &self.anchor_for(p), |q| {
            if !satisfies(host, q, &self.body) {
                witnesses.push(q.clone());
            }
            ControlFlow::Continue(())
        });
        witnesses.sort();
        ViolationSet { anchor: p.clone(), witnesses }
    }

    pub fn count(&self, host: &TypedGraph, p: &Morphism) -> usize {
        let mut n = 0;
        let _ = for_each_monomorphism(&self.premise, host, &self.anchor_for(p), |q| {
            if !satisfies(host, q, &self.body) {
                n += 1;
            }
            ControlFlow::Continue(())
        });
        n
    }

    /// Whether there is no violation at `p`; stops at the first one.
    pub fn holds(&self, host: &TypedGraph, p: &Morphism) -> bool {
        for_each_monomorphism(&self.premise, host, &self.anchor_for(p), |q| {
            if satisfies(host, q, &self.body) {
                ControlFlow::Continue(())
            } else {
                ControlFlow::Break(())
            }
        })
        .is_continue()
    }

    pub fn as_condition(&self) -> Condition {
        Condition::forall(self.premise.clone(), self.embedding.clone(), self.body.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintKind {
    Hard,
    Weak,
}

/// A closed condition in universal form, with a weight and a hard/weak tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub kind: ConstraintKind,
    pub weight: f64,
    pub universal: Universal,
}

impl Constraint {
    pub fn new(name: &str, kind: ConstraintKind, weight: f64, c: Condition) -> Result<Self, ConditionError> {
        Ok(Constraint { name: name.to_string(), kind, weight, universal: normalize_universal(c)? })
    }

    /// `∀(∅ ↪ premise, conclusion)` with weight 1.
    pub fn universal(name: &str, kind: ConstraintKind, premise: Arc<TypedGraph>, conclusion: Condition) -> Self {
        Constraint {
            name: name.to_string(),
            kind,
            weight: 1.0,
            universal: Universal { premise, embedding: Morphism::from_empty(), body: conclusion },
        }
    }

    pub fn premise(&self) -> &Arc<TypedGraph> {
        &self.universal.premise
    }

    pub fn conclusion(&self) -> &Condition {
        &self.universal.body
    }

    pub fn is_hard(&self) -> bool {
        self.kind == ConstraintKind::Hard
    }

    /// `∀(∅ ↪ P, false)`: the form hard-constraint simplification relies on.
    pub fn forbidden_pattern(&self) -> Option<&Arc<TypedGraph>> {
        (self.universal.body.fold() == Condition::False).then_some(&self.universal.premise)
    }

    pub fn violations(&self, host: &TypedGraph) -> ViolationSet {
        self.universal.violations(host, &Morphism::from_empty())
    }

    pub fn as_condition(&self) -> Condition {
        self.universal.as_condition()
    }
}

/// Brings a closed condition into the form `∀(e: ∅ ↪ P, d)`.
///
/// A condition that is not already universal is wrapped as `∀(id_∅, c)`, so
/// its violation count is 0 or 1.
pub fn normalize_universal(c: Condition) -> Result<Universal, ConditionError> {
    let empty = TypedGraph::empty();
    c.check(&empty).map_err(|_| ConditionError::NotClosed)?;
    match c {
        Condition::ForAll(q) => Ok(Universal { premise: q.graph, embedding: q.embedding, body: q.body }),
        Condition::Not(inner) if matches!(&*inner, Condition::Exists(q) if matches!(q.body, Condition::Not(_))) => {
            let Condition::Exists(q) = *inner else { unreachable!() };
            let Condition::Not(body) = q.body else { unreachable!() };
            Ok(Universal { premise: q.graph, embedding: q.embedding, body: *body })
        }
        c => Ok(Universal { premise: Arc::new(empty), embedding: Morphism::from_empty(), body: c }),
    }
}

pub fn count_violations(host: &TypedGraph, c: &Constraint) -> usize {
    c.universal.count(host, &Morphism::from_empty())
}

pub fn violations_of(host: &TypedGraph, p: &Morphism, c: &Universal) -> ViolationSet {
    c.violations(host, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(ty: &str) -> Arc<TypedGraph> {
        Arc::new(TypedGraph::builder().node("x", ty).build().unwrap())
    }

    fn exists_node(ty: &str) -> Condition {
        Condition::exists(node(ty), Morphism::from_empty(), Condition::True)
    }

    fn two_a() -> TypedGraph {
        TypedGraph::builder().node("a1", "A").node("a2", "A").build().unwrap()
    }

    #[test]
    fn true_holds_everywhere() {
        assert!(satisfies(&TypedGraph::empty(), &Morphism::from_empty(), &Condition::True));
    }

    #[test]
    fn existential_constraint_counts_at_most_once() {
        let forbid = Condition::not(exists_node("A"));
        let c = Constraint::new("no-a", ConstraintKind::Weak, 1.0, forbid).unwrap();
        assert!(c.premise().is_empty());
        assert_eq!(count_violations(&two_a(), &c), 1);
        assert_eq!(count_violations(&TypedGraph::empty(), &c), 0);
    }

    #[test]
    fn universal_form_is_kept() {
        let c = Condition::forall(node("A"), Morphism::from_empty(), Condition::False);
        let u = normalize_universal(c.clone()).unwrap();
        assert_eq!(u.as_condition(), c);
        let c = Constraint::new("f", ConstraintKind::Hard, 1.0, c).unwrap();
        assert_eq!(count_violations(&two_a(), &c), 2);
        assert!(c.forbidden_pattern().is_some());
    }

    #[test]
    fn open_condition_is_rejected() {
        let g = node("A");
        let c = Condition::exists(g.clone(), Morphism::identity(&g), Condition::True);
        assert_eq!(normalize_universal(c), Err(ConditionError::NotClosed));
    }

    #[test]
    fn folding_absorbs_constants() {
        let e = exists_node("A");
        assert_eq!(Condition::Or(vec![Condition::False, e.clone()]).fold(), e);
        assert_eq!(Condition::implies(e.clone(), Condition::True).fold(), Condition::True);
        assert_eq!(Condition::implies(e.clone(), Condition::False).fold(), Condition::not(e.clone()));
        assert_eq!(Condition::not(Condition::not(e.clone())).fold(), e);
    }

    #[test]
    fn lowering_preserves_semantics_on_small_hosts() {
        let c = Condition::And(vec![
            Condition::implies(exists_node("A"), exists_node("B")),
            Condition::forall(node("A"), Morphism::from_empty(), Condition::True),
        ]);
        for g in [TypedGraph::empty(), two_a()] {
            let p = Morphism::from_empty();
            assert_eq!(satisfies(&g, &p, &c), satisfies(&g, &p, &c.lower()));
        }
    }
}
