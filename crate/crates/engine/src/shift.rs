//! Transport of conditions along morphisms and over rules, and the two
//! simplifications applied to derived conditions.

use std::ops::ControlFlow;
use std::sync::Arc;

use gtr_graph::matching::{exists_monomorphism, for_each_monomorphism};
use gtr_graph::rewrite::apply_rule_plain;
use gtr_graph::{Condition, Constraint, Morphism, PartialMorphism, Quantifier, Rule, TypedGraph};

use crate::overlap::enumerate_overlaps;

/// Decides which graphs can occur in hosts at all.
///
/// A graph containing a forbidden pattern of a hard constraint, or (when
/// `simple` is set) two parallel edges of the same type, never embeds into
/// an admissible host, so quantifiers over it can be decided statically.
#[derive(Debug, Clone, Default)]
pub struct Simplifier {
    forbidden: Vec<Arc<TypedGraph>>,
    pub simple: bool,
}

impl Simplifier {
    pub fn none() -> Self {
        Simplifier::default()
    }

    /// Uses every hard constraint of the form `∀(P, false)`; returns the
    /// names of the hard constraints that had to be skipped.
    pub fn from_hard(constraints: &[Constraint], simple: bool) -> (Self, Vec<String>) {
        let mut forbidden = Vec::new();
        let mut skipped = Vec::new();
        for c in constraints.iter().filter(|c| c.is_hard()) {
            match c.forbidden_pattern() {
                Some(p) => forbidden.push(p.clone()),
                None => skipped.push(c.name.clone()),
            }
        }
        (Simplifier { forbidden, simple }, skipped)
    }

    pub fn admissible(&self, g: &TypedGraph) -> bool {
        if self.simple && has_parallel_edges(g) {
            return false;
        }
        self.forbidden.iter().all(|p| !exists_monomorphism(p, g, &PartialMorphism::undefined(p)))
    }
}

fn has_parallel_edges(g: &TypedGraph) -> bool {
    (0..g.node_count()).any(|n| {
        let out = g.out_edges(n);
        out.iter().enumerate().any(|(i, &e)| {
            let (t, ty) = (g.edge(e).tgt, &g.edge(e).ty);
            out[i + 1..].iter().any(|&f| g.edge(f).tgt == t && g.edge(f).ty == *ty)
        })
    })
}

/// `Shift(b, c)`: a condition over `target` that holds for `p` exactly when
/// `c` holds for `p ∘ b`.
pub fn shift_along(b: &Morphism, target: &Arc<TypedGraph>, c: &Condition, s: &Simplifier) -> Condition {
    shift(b, target, c, s).fold()
}

fn shift(b: &Morphism, target: &Arc<TypedGraph>, c: &Condition, s: &Simplifier) -> Condition {
    match c {
        Condition::True => Condition::True,
        Condition::False => Condition::False,
        Condition::Exists(q) => Condition::disjunction(
            shifted_quantifiers(b, target, q, s).into_iter().map(|(g, e, d)| Condition::exists(g, e, d)).collect(),
        ),
        Condition::ForAll(q) => Condition::conjunction(
            shifted_quantifiers(b, target, q, s).into_iter().map(|(g, e, d)| Condition::forall(g, e, d)).collect(),
        ),
        Condition::Not(c) => Condition::not(shift(b, target, c, s)),
        Condition::Or(cs) => Condition::Or(cs.iter().map(|c| shift(b, target, c, s)).collect()),
        Condition::And(cs) => Condition::And(cs.iter().map(|c| shift(b, target, c, s)).collect()),
        Condition::Implies(x, y) => Condition::implies(shift(b, target, x, s), shift(b, target, y, s)),
    }
}

/// For `q = (e: P ↪ Q, d)` and `b: P ↪ P'`: every overlap `(e': P' ↪ Q', iQ: Q ↪ Q')`
/// with `e' ∘ b = iQ ∘ e`, paired with `Shift(iQ, d)`. Inadmissible gluings
/// are dropped; they contribute `false` to an `∃` and `true` to a `∀`.
fn shifted_quantifiers(
    b: &Morphism,
    target: &Arc<TypedGraph>,
    q: &Quantifier,
    s: &Simplifier,
) -> Vec<(Arc<TypedGraph>, Morphism, Condition)> {
    let mut forced = PartialMorphism::undefined(&q.graph);
    for (x, &y) in q.embedding.nodes.iter().enumerate() {
        forced.nodes[y] = Some(b.nodes[x]);
    }
    for (x, &y) in q.embedding.edges.iter().enumerate() {
        forced.edges[y] = Some(b.edges[x]);
    }
    enumerate_overlaps(target, &q.graph, Some(&forced))
        .into_iter()
        .filter(|o| s.admissible(&o.graph))
        .map(|o| {
            let body = shift(&o.right, &o.graph, &q.body, s);
            (o.graph, o.left, body)
        })
        .collect()
}

/// `Left(rule, c)`: moves `c` from the right-hand side to the left-hand side
/// so that `m ⊨ Left(rule, c)` iff the comatch of the step at `m` satisfies `c`.
pub fn shift_over_rule(rule: &Rule, c: &Condition, s: &Simplifier) -> Condition {
    left(rule, c, s).fold()
}

fn left(rule: &Rule, c: &Condition, s: &Simplifier) -> Condition {
    match c {
        Condition::True => Condition::True,
        Condition::False => Condition::False,
        Condition::Exists(q) => match left_quantifier(rule, q, s) {
            Some((g, n, d)) => Condition::exists(g, n, d),
            None => Condition::False,
        },
        Condition::ForAll(q) => match left_quantifier(rule, q, s) {
            Some((g, n, d)) => Condition::forall(g, n, d),
            None => Condition::True,
        },
        Condition::Not(c) => Condition::not(left(rule, c, s)),
        Condition::Or(cs) => Condition::Or(cs.iter().map(|c| left(rule, c, s)).collect()),
        Condition::And(cs) => Condition::And(cs.iter().map(|c| left(rule, c, s)).collect()),
        Condition::Implies(x, y) => Condition::implies(left(rule, x, s), left(rule, y, s)),
    }
}

/// Undoes the rule inside the quantified graph: `P ⇒ P'` by the inverse rule
/// at `e`. `None` when that step dangles or `P'` is inadmissible.
fn left_quantifier(rule: &Rule, q: &Quantifier, s: &Simplifier) -> Option<(Arc<TypedGraph>, Morphism, Condition)> {
    let t = apply_rule_plain(&rule.inverse(), &q.graph, &q.embedding).ok()?;
    if !s.admissible(&t.result) {
        return None;
    }
    let back = Rule::new(&format!("{}~", rule.name), t.result.clone(), q.graph.clone())
        .expect("a derived span shares its interface by id");
    let body = left(&back, &q.body, s);
    Some((t.result.clone(), t.comatch, body))
}

/// Replaces quantifiers over inadmissible graphs by their vacuous value.
pub fn simplify_with_hard(c: &Condition, s: &Simplifier) -> Condition {
    fn go(c: &Condition, s: &Simplifier) -> Condition {
        match c {
            Condition::Exists(q) if !s.admissible(&q.graph) => Condition::False,
            Condition::ForAll(q) if !s.admissible(&q.graph) => Condition::True,
            Condition::Exists(q) => Condition::exists(q.graph.clone(), q.embedding.clone(), go(&q.body, s)),
            Condition::ForAll(q) => Condition::forall(q.graph.clone(), q.embedding.clone(), go(&q.body, s)),
            Condition::Not(c) => Condition::not(go(c, s)),
            Condition::Or(cs) => Condition::Or(cs.iter().map(|c| go(c, s)).collect()),
            Condition::And(cs) => Condition::And(cs.iter().map(|c| go(c, s)).collect()),
            Condition::Implies(x, y) => Condition::implies(go(x, s), go(y, s)),
            c => c.clone(),
        }
    }
    go(c, s).fold()
}

/// In every `(a1 ∨ … ∨ an) ⟹ (b1 ∨ … ∨ bk)`, drops each `ai` that is
/// syntactically equivalent to some `bj`.
pub fn simplify_implication(c: &Condition, over: &TypedGraph) -> Condition {
    fn go(c: &Condition, over: &TypedGraph) -> Condition {
        match c {
            Condition::Exists(q) => Condition::exists(q.graph.clone(), q.embedding.clone(), go(&q.body, &q.graph)),
            Condition::ForAll(q) => Condition::forall(q.graph.clone(), q.embedding.clone(), go(&q.body, &q.graph)),
            Condition::Not(c) => Condition::not(go(c, over)),
            Condition::Or(cs) => Condition::Or(cs.iter().map(|c| go(c, over)).collect()),
            Condition::And(cs) => Condition::And(cs.iter().map(|c| go(c, over)).collect()),
            Condition::Implies(x, y) => {
                let (x, y) = (go(x, over).fold(), go(y, over).fold());
                let ys = y.disjuncts();
                let kept: Vec<Condition> = x
                    .disjuncts()
                    .into_iter()
                    .filter(|a| !ys.iter().any(|b| conditions_equivalent_syntactic(a, b, over)))
                    .collect();
                Condition::implies(Condition::disjunction(kept), y)
            }
            c => c.clone(),
        }
    }
    go(c, over).fold()
}

/// Sound, incomplete equivalence: the trees agree up to reordering of
/// `∨`/`∧` children and isomorphisms of quantified graphs that commute with
/// every embedding.
pub fn conditions_equivalent_syntactic(c1: &Condition, c2: &Condition, over: &TypedGraph) -> bool {
    equivalent_under(c1, c2, &Morphism::identity(over))
}

/// `phi` maps the graph `c1` is over bijectively onto the graph of `c2`.
pub fn equivalent_under(c1: &Condition, c2: &Condition, phi: &Morphism) -> bool {
    match (c1, c2) {
        (Condition::True, Condition::True) | (Condition::False, Condition::False) => true,
        (Condition::Exists(q1), Condition::Exists(q2)) | (Condition::ForAll(q1), Condition::ForAll(q2)) => {
            quantifiers_equivalent(q1, q2, phi)
        }
        (Condition::Not(a), Condition::Not(b)) => equivalent_under(a, b, phi),
        (Condition::Or(xs), Condition::Or(ys)) | (Condition::And(xs), Condition::And(ys)) => {
            xs.len() == ys.len() && permutation_match(xs, ys, &mut vec![false; ys.len()], phi)
        }
        (Condition::Implies(a1, b1), Condition::Implies(a2, b2)) => {
            equivalent_under(a1, a2, phi) && equivalent_under(b1, b2, phi)
        }
        _ => false,
    }
}

fn permutation_match(xs: &[Condition], ys: &[Condition], used: &mut Vec<bool>, phi: &Morphism) -> bool {
    let Some((x, rest)) = xs.split_first() else { return true };
    for j in 0..ys.len() {
        if !used[j] && equivalent_under(x, &ys[j], phi) {
            used[j] = true;
            if permutation_match(rest, ys, used, phi) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

fn quantifiers_equivalent(q1: &Quantifier, q2: &Quantifier, phi: &Morphism) -> bool {
    let (g1, g2) = (&q1.graph, &q2.graph);
    if g1.node_count() != g2.node_count() || g1.edge_count() != g2.edge_count() {
        return false;
    }
    // psi: Q1 -> Q2 with psi ∘ e1 = e2 ∘ phi
    let mut anchor = PartialMorphism::undefined(g1);
    for (x, &y) in q1.embedding.nodes.iter().enumerate() {
        anchor.nodes[y] = Some(q2.embedding.nodes[phi.nodes[x]]);
    }
    for (x, &y) in q1.embedding.edges.iter().enumerate() {
        anchor.edges[y] = Some(q2.embedding.edges[phi.edges[x]]);
    }
    for_each_monomorphism(g1, g2, &anchor, |psi| {
        if equivalent_under(&q1.body, &q2.body, psi) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .is_break()
}

#[cfg(test)]
mod tests {
    use super::*;
    use gtr_graph::satisfies;

    fn arc(g: TypedGraph) -> Arc<TypedGraph> {
        Arc::new(g)
    }

    fn node(id: &str) -> TypedGraph {
        TypedGraph::builder().node(id, "T").build().unwrap()
    }

    /// `∃ x -r-> y` over the graph `{x}`.
    fn has_successor() -> Condition {
        let q = arc(TypedGraph::builder().node("x", "T").node("y", "T").edge("e", "r", "x", "y").build().unwrap());
        let emb = Morphism::by_ids(&node("x"), &q).unwrap();
        Condition::exists(q, emb, Condition::True)
    }

    #[test]
    fn shifting_true_and_along_identity() {
        let p = arc(node("x"));
        let id = Morphism::identity(&p);
        assert_eq!(shift_along(&id, &p, &Condition::True, &Simplifier::none()), Condition::True);
        let c = has_successor();
        let shifted = shift_along(&id, &p, &c, &Simplifier::none());
        // y cannot be glued onto x, which is already the image of x
        assert!(conditions_equivalent_syntactic(&shifted, &c, &p));
    }

    #[test]
    fn shift_agrees_with_composition_on_a_small_host() {
        let p = node("x");
        let target = arc(TypedGraph::builder().node("x", "T").node("z", "T").build().unwrap());
        let b = Morphism::by_ids(&p, &target).unwrap();
        let c = has_successor();
        let shifted = shift_along(&b, &target, &c, &Simplifier::none());
        let host = TypedGraph::builder()
            .node("1", "T")
            .node("2", "T")
            .node("3", "T")
            .edge("a", "r", "1", "2")
            .edge("b", "r", "3", "3")
            .build()
            .unwrap();
        for pp in gtr_graph::find_monomorphisms(&target, &host, None).unwrap() {
            assert_eq!(satisfies(&host, &pp, &shifted), satisfies(&host, &b.then(&pp), &c), "{pp:?}");
        }
    }

    #[test]
    fn implication_drops_shared_disjuncts() {
        let p = node("x");
        let q1 = has_successor();
        let q2 = {
            let q = arc(TypedGraph::builder().node("x", "T").node("y", "T").edge("e", "r", "y", "x").build().unwrap());
            let emb = Morphism::by_ids(&p, &q).unwrap();
            Condition::exists(q, emb, Condition::True)
        };
        let c = Condition::implies(Condition::Or(vec![q1.clone(), q2.clone()]), q1.clone());
        assert_eq!(simplify_implication(&c, &p), Condition::implies(q2.clone(), q1.clone()));
        let same = Condition::implies(Condition::Or(vec![q1.clone(), q1.clone()]), q1.clone());
        assert_eq!(simplify_implication(&same, &p), Condition::True);
        let disjoint = Condition::implies(q2.clone(), q1.clone());
        assert_eq!(simplify_implication(&disjoint, &p), disjoint);
    }

    #[test]
    fn equivalence_respects_embeddings() {
        let p = TypedGraph::builder().node("x", "T").node("z", "T").build().unwrap();
        let q = arc(TypedGraph::builder()
            .node("x", "T")
            .node("z", "T")
            .node("y", "T")
            .edge("e", "r", "x", "y")
            .build()
            .unwrap());
        let a = Condition::exists(q.clone(), Morphism::by_ids(&p, &q).unwrap(), Condition::True);
        // same graph, x and z swapped in the embedding
        let swapped = Morphism { nodes: vec![q.node_by_id("z").unwrap(), q.node_by_id("x").unwrap()], edges: vec![] };
        let b = Condition::exists(q.clone(), swapped, Condition::True);
        assert!(conditions_equivalent_syntactic(&a, &a, &p));
        assert!(!conditions_equivalent_syntactic(&a, &b, &p));
        let or1 = Condition::Or(vec![a.clone(), b.clone()]);
        let or2 = Condition::Or(vec![b, a]);
        assert!(conditions_equivalent_syntactic(&or1, &or2, &p));
    }

    #[test]
    fn left_over_a_rule_that_cannot_undo_is_false() {
        // rule deletes node n; its inverse would re-create it, which cannot dangle,
        // so use a rule that creates a node: the inverse deletes it
        let l = arc(TypedGraph::empty());
        let r = arc(node("n"));
        let rule = Rule::new("mk", l, r.clone()).unwrap();
        let q = arc(TypedGraph::builder().node("n", "T").node("m", "T").edge("e", "r", "m", "n").build().unwrap());
        let c = Condition::exists(q.clone(), Morphism::by_ids(&r, &q).unwrap(), Condition::True);
        assert_eq!(shift_over_rule(&rule, &c, &Simplifier::none()), Condition::False);
        assert_eq!(shift_over_rule(&rule, &Condition::True, &Simplifier::none()), Condition::True);
    }
}
