//! Repair- and impairment-indicating application conditions.
//!
//! For a rule and a weak constraint `∀(P, d)`, every applicable overlap class
//! `(iL: L ↪ PL, iP: P ↪ PL)` yields `∀(iL, post ⟹ pre)`. Its violations at a
//! match are exactly the occurrences of `P` that the step repairs; the
//! impairment conditions are the repair conditions of the inverse rule,
//! moved back to the left-hand side.

use std::fmt::Write as _;
use std::ops::ControlFlow;
use std::sync::Arc;

use gtr_graph::condition::anchor_through;
use gtr_graph::io::{ConditionDoc, GraphDoc, MorphismDoc};
use gtr_graph::matching::for_each_monomorphism;
use gtr_graph::rewrite::apply_rule_plain;
use gtr_graph::{satisfies, Condition, Constraint, Morphism, Rule, TypedGraph};
use serde::{Deserialize, Serialize};

use crate::overlap::{rule_overlaps, OverlapClass, RuleOverlap};
use crate::shift::{
    equivalent_under, shift_along, shift_over_rule, simplify_implication, simplify_with_hard, Simplifier,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcKind {
    Repair,
    Impairment,
}

/// Whether the condition watches the premise or the conclusion of the
/// constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Premise,
    Conclusion,
}

impl From<OverlapClass> for Branch {
    fn from(c: OverlapClass) -> Self {
        match c {
            OverlapClass::Pre => Branch::Premise,
            OverlapClass::Con => Branch::Conclusion,
        }
    }
}

/// `∀(anchor: L ↪ graph, body)`, counted `multiplicity` times.
///
/// Classes that differ only by an automorphism of the premise (the two
/// roles of a symmetric pair, say) give equivalent conditions; they are
/// kept once with the number of classes folded into `multiplicity`.
#[derive(Debug, Clone)]
pub struct ApplicationCondition {
    pub kind: AcKind,
    pub branch: Branch,
    pub rule: String,
    pub constraint: String,
    pub lhs: Arc<TypedGraph>,
    pub graph: Arc<TypedGraph>,
    pub anchor: Morphism,
    pub body: Condition,
    pub multiplicity: usize,
    /// Correspondence signatures of the overlap classes it stands for.
    pub sources: Vec<String>,
}

impl ApplicationCondition {
    /// Occurrences `q: PL ↪ G` with `q ∘ anchor = m` and `q ⊭ body`.
    pub fn witnesses(&self, host: &TypedGraph, m: &Morphism) -> Vec<Morphism> {
        let mut out = Vec::new();
        let anchor = anchor_through(&self.graph, &self.anchor, m);
        let _ = for_each_monomorphism(&self.graph, host, &anchor, |q| {
            if !satisfies(host, q, &self.body) {
                out.push(q.clone());
            }
            ControlFlow::Continue(())
        });
        out.sort();
        out
    }

    /// `nv_m(ac)`, including the multiplicity.
    pub fn count(&self, host: &TypedGraph, m: &Morphism) -> usize {
        let mut n = 0;
        let anchor = anchor_through(&self.graph, &self.anchor, m);
        let _ = for_each_monomorphism(&self.graph, host, &anchor, |q| {
            if !satisfies(host, q, &self.body) {
                n += 1;
            }
            ControlFlow::Continue(())
        });
        n * self.multiplicity
    }

    pub fn as_condition(&self) -> Condition {
        Condition::forall(self.graph.clone(), self.anchor.clone(), self.body.clone())
    }

    /// Same kind of object over the same left-hand side, up to isomorphism.
    pub fn equivalent(&self, other: &ApplicationCondition) -> bool {
        equivalent_under(&self.as_condition(), &other.as_condition(), &Morphism::identity(&self.lhs))
    }

    fn sort_key(&self) -> (String, AcKind, Branch, String) {
        (self.constraint.clone(), self.kind, self.branch, self.sources.join(";"))
    }
}

#[derive(Debug, Clone)]
pub struct DeriveOptions {
    pub simplifier: Simplifier,
    /// Fold equivalent conditions of one set into one with a multiplicity.
    pub merge_equivalent: bool,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions { simplifier: Simplifier::none(), merge_equivalent: true }
    }
}

/// `(pre, post)` induced by an overlap class for the conclusion `d` over `P`.
pub fn induced_pre_post(rule: &Rule, o: &RuleOverlap, d: &Condition, s: &Simplifier) -> (Condition, Condition) {
    let pl = &o.overlap.graph;
    let pre = simplify_with_hard(&shift_along(&o.overlap.right, pl, d, s), s);
    let post = match (&o.class, &o.witness) {
        (OverlapClass::Con, Some(x)) => {
            let t = &o.induced;
            let hx = x.then(&t.h);
            let after = shift_along(&hx, &t.result, d, s);
            let derived = Rule::new(&format!("{}@{}", rule.name, o.signature), pl.clone(), t.result.clone())
                .expect("the induced step shares its interface by id");
            simplify_with_hard(&shift_over_rule(&derived, &after, s), s)
        }
        _ => Condition::True,
    };
    (pre, post)
}

pub fn derive_repair_acs(rule: &Rule, c: &Constraint, opts: &DeriveOptions) -> Vec<ApplicationCondition> {
    derive_repair_explained(rule, c, opts, &mut Vec::new())
}

/// Like [`derive_repair_acs`], appending one line per overlap class to `log`.
pub fn derive_repair_explained(
    rule: &Rule,
    c: &Constraint,
    opts: &DeriveOptions,
    log: &mut Vec<String>,
) -> Vec<ApplicationCondition> {
    let s = &opts.simplifier;
    let d = c.conclusion();
    let mut out = Vec::new();
    for o in rule_overlaps(rule, c.premise()) {
        let pl = &o.overlap.graph;
        if !s.admissible(pl) {
            log.push(format!("{} {}: {} -> dropped (inadmissible overlap)", rule.name, c.name, o.describe()));
            continue;
        }
        let (pre, post) = induced_pre_post(rule, &o, d, s);
        let body = simplify_implication(&Condition::implies(post, pre), pl);
        if body == Condition::True {
            log.push(format!("{} {}: {} -> dropped (body is true)", rule.name, c.name, o.describe()));
            continue;
        }
        log.push(format!("{} {}: {} -> kept", rule.name, c.name, o.describe()));
        out.push(ApplicationCondition {
            kind: AcKind::Repair,
            branch: o.class.into(),
            rule: rule.name.clone(),
            constraint: c.name.clone(),
            lhs: rule.lhs.clone(),
            graph: pl.clone(),
            anchor: o.overlap.left.clone(),
            body,
            multiplicity: 1,
            sources: vec![o.signature.clone()],
        });
    }
    finish(out, opts)
}

pub fn derive_impairment_acs(rule: &Rule, c: &Constraint, opts: &DeriveOptions) -> Vec<ApplicationCondition> {
    derive_impairment_explained(rule, c, opts, &mut Vec::new())
}

pub fn derive_impairment_explained(
    rule: &Rule,
    c: &Constraint,
    opts: &DeriveOptions,
    log: &mut Vec<String>,
) -> Vec<ApplicationCondition> {
    let s = &opts.simplifier;
    let inverse = rule.inverse();
    let unmerged = DeriveOptions { merge_equivalent: false, ..opts.clone() };
    let mut out = Vec::new();
    for ac in derive_repair_explained(&inverse, c, &unmerged, log) {
        // Left(rule, ∀(iR, body)): undo the step inside PR, giving PL' and n: L ↪ PL'
        let t =
            apply_rule_plain(&inverse, &ac.graph, &ac.anchor).expect("repair overlaps of the inverse are applicable");
        if !s.admissible(&t.result) {
            log.push(format!(
                "{} {}: [{}] -> dropped (inadmissible before the step)",
                rule.name, c.name, ac.sources[0]
            ));
            continue;
        }
        let derived = Rule::new(&format!("{}@{}", rule.name, ac.sources[0]), t.result.clone(), ac.graph.clone())
            .expect("the induced step shares its interface by id");
        let body = simplify_with_hard(&shift_over_rule(&derived, &ac.body, s), s);
        if body == Condition::True {
            continue;
        }
        out.push(ApplicationCondition {
            kind: AcKind::Impairment,
            rule: rule.name.clone(),
            lhs: rule.lhs.clone(),
            graph: t.result.clone(),
            anchor: t.comatch.clone(),
            body,
            ..ac
        });
    }
    finish(out, opts)
}

fn finish(mut acs: Vec<ApplicationCondition>, opts: &DeriveOptions) -> Vec<ApplicationCondition> {
    if opts.merge_equivalent {
        let mut merged: Vec<ApplicationCondition> = Vec::new();
        for ac in acs {
            match merged.iter_mut().find(|m| m.kind == ac.kind && m.equivalent(&ac)) {
                Some(m) => {
                    m.multiplicity += ac.multiplicity;
                    m.sources.extend(ac.sources);
                }
                None => merged.push(ac),
            }
        }
        acs = merged;
    }
    acs.sort_by_key(ApplicationCondition::sort_key);
    acs
}

/// Removes repair/impairment pairs that are equivalent; their counts cancel
/// in every prediction.
pub fn cancel_mutual(
    rep: &[ApplicationCondition],
    imp: &[ApplicationCondition],
) -> (Vec<ApplicationCondition>, Vec<ApplicationCondition>) {
    let mut rep = rep.to_vec();
    let mut imp = imp.to_vec();
    for r in rep.iter_mut() {
        for v in imp.iter_mut() {
            if r.multiplicity == 0 || v.multiplicity == 0 || !r.equivalent(v) {
                continue;
            }
            let k = r.multiplicity.min(v.multiplicity);
            r.multiplicity -= k;
            v.multiplicity -= k;
        }
    }
    rep.retain(|a| a.multiplicity > 0);
    imp.retain(|a| a.multiplicity > 0);
    (rep, imp)
}

/// Everything needed to score one rule against one constraint.
#[derive(Debug, Clone)]
pub struct AcBundle {
    pub rule: String,
    pub constraint: String,
    pub fingerprint: u64,
    /// After [`cancel_mutual`] (when enabled); used for counts.
    pub repair: Vec<ApplicationCondition>,
    pub impairment: Vec<ApplicationCondition>,
    /// Before cancellation; used for the direct classification.
    pub repair_all: Vec<ApplicationCondition>,
    pub impairment_all: Vec<ApplicationCondition>,
}

pub fn derive_bundle(rule: &Rule, c: &Constraint, opts: &DeriveOptions, cancel: bool) -> AcBundle {
    derive_bundle_explained(rule, c, opts, cancel, &mut Vec::new())
}

pub fn derive_bundle_explained(
    rule: &Rule,
    c: &Constraint,
    opts: &DeriveOptions,
    cancel: bool,
    log: &mut Vec<String>,
) -> AcBundle {
    let repair_all = derive_repair_explained(rule, c, opts, log);
    let impairment_all = derive_impairment_explained(rule, c, opts, log);
    let (repair, impairment) = if cancel {
        let (r, i) = cancel_mutual(&repair_all, &impairment_all);
        let removed =
            repair_all.iter().map(|a| a.multiplicity).sum::<usize>() - r.iter().map(|a| a.multiplicity).sum::<usize>();
        if removed > 0 {
            log.push(format!("{} {}: cancelled {removed} repair/impairment pair(s)", rule.name, c.name));
        }
        (r, i)
    } else {
        (repair_all.clone(), impairment_all.clone())
    };
    AcBundle {
        rule: rule.name.clone(),
        constraint: c.name.clone(),
        fingerprint: fingerprint(rule, c),
        repair,
        impairment,
        repair_all,
        impairment_all,
    }
}

/// FNV-1a over the printed rule and constraint.
pub fn fingerprint(rule: &Rule, c: &Constraint) -> u64 {
    let mut text = String::new();
    let _ = write!(text, "{}|{}|{}|{}|{}", rule.name, rule.lhs, rule.rhs, c.name, c.as_condition());
    text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcDoc {
    pub kind: AcKind,
    pub branch: Branch,
    pub rule: String,
    #[serde(rename = "sourceConstraint")]
    pub source_constraint: String,
    #[serde(rename = "sourceOverlaps")]
    pub source_overlaps: Vec<String>,
    pub multiplicity: usize,
    #[serde(rename = "anchorGraph")]
    pub anchor_graph: GraphDoc,
    #[serde(rename = "anchorEmbedding")]
    pub anchor_embedding: MorphismDoc,
    pub body: ConditionDoc,
}

impl AcDoc {
    pub fn from_ac(ac: &ApplicationCondition) -> Self {
        AcDoc {
            kind: ac.kind,
            branch: ac.branch,
            rule: ac.rule.clone(),
            source_constraint: ac.constraint.clone(),
            source_overlaps: ac.sources.clone(),
            multiplicity: ac.multiplicity,
            anchor_graph: GraphDoc::from_graph(&ac.graph),
            anchor_embedding: MorphismDoc::from_morphism(&ac.anchor, &ac.lhs, &ac.graph),
            body: ConditionDoc::from_condition(&ac.body, &ac.graph),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleDoc {
    pub rule: String,
    pub constraint: String,
    pub fingerprint: String,
    pub cancelled: bool,
    pub conditions: Vec<AcDoc>,
}

impl BundleDoc {
    pub fn from_bundle(b: &AcBundle, cancelled: bool) -> Self {
        BundleDoc {
            rule: b.rule.clone(),
            constraint: b.constraint.clone(),
            fingerprint: format!("{:016x}", b.fingerprint),
            cancelled,
            conditions: b.repair.iter().chain(&b.impairment).map(AcDoc::from_ac).collect(),
        }
    }
}
