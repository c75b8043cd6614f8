//! The class responsibility assignment (CRA) case study: class diagrams as
//! typed graphs, the two move refactorings, the cohesion/coupling
//! constraints, a running-example model and instance generators.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use gtr_graph::{Condition, Constraint, ConstraintKind, Morphism, Rule, TypeGraph, TypedGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CLASS: &str = "Class";
pub const METHOD: &str = "Method";
pub const ATTRIBUTE: &str = "Attribute";
pub const CONTAINS_METHOD: &str = "contains-method";
pub const CONTAINS_ATTRIBUTE: &str = "contains-attribute";
pub const USES_ATTRIBUTE: &str = "uses-attribute";
pub const USES_METHOD: &str = "uses-method";

#[derive(Debug, Error)]
pub enum CraError {
    #[error("a synthetic model needs at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("cannot read `{path}`: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed feature model: {0}")]
    Json(#[from] serde_json::Error),
    #[error("feature model: {0}")]
    Invalid(String),
}

pub fn type_graph() -> TypeGraph {
    TypeGraph::new()
        .with_node_type(CLASS)
        .with_node_type(METHOD)
        .with_node_type(ATTRIBUTE)
        .with_edge_type(CONTAINS_METHOD, CLASS, METHOD)
        .with_edge_type(CONTAINS_ATTRIBUTE, CLASS, ATTRIBUTE)
        .with_edge_type(USES_ATTRIBUTE, METHOD, ATTRIBUTE)
        .with_edge_type(USES_METHOD, METHOD, METHOD)
}

fn contains_type(feature_ty: &str) -> &'static str {
    if feature_ty == METHOD {
        CONTAINS_METHOD
    } else {
        CONTAINS_ATTRIBUTE
    }
}

fn move_rule(name: &str, feature_ty: &str, f: &str) -> Rule {
    let contains = contains_type(feature_ty);
    let base = TypedGraph::builder().node("c1", CLASS).node("c2", CLASS).node(f, feature_ty);
    let lhs = base.clone().edge(&format!("c1{f}"), contains, "c1", f).build().expect("static graph");
    let rhs = base.edge(&format!("c2{f}"), contains, "c2", f).build().expect("static graph");
    Rule::new(name, Arc::new(lhs), Arc::new(rhs)).expect("static rule")
}

/// Moves method `m` from class `c1` to class `c2`.
pub fn move_method() -> Rule {
    move_rule("moveMethod", METHOD, "m")
}

/// Moves attribute `a` from class `c1` to class `c2`.
pub fn move_attribute() -> Rule {
    move_rule("moveAttribute", ATTRIBUTE, "a")
}

pub fn rules() -> Vec<Rule> {
    vec![move_method(), move_attribute()]
}

fn arc(b: gtr_graph::GraphBuilder) -> Arc<TypedGraph> {
    Arc::new(b.build().expect("static graph"))
}

/// `∃` over `premise` extended by `extra`, embedded by ids.
fn exists_ext(
    premise: &TypedGraph,
    extra: impl FnOnce(gtr_graph::GraphBuilder) -> gtr_graph::GraphBuilder,
) -> Condition {
    let q = arc(extra(premise.to_builder()));
    let e = Morphism::by_ids(premise, &q).expect("extension keeps ids");
    Condition::exists(q, e, Condition::True)
}

fn forbid(name: &str, kind: ConstraintKind, p: gtr_graph::GraphBuilder) -> Constraint {
    Constraint::universal(name, kind, arc(p), Condition::False)
}

/// A method is contained in at most one class.
pub fn h1() -> Constraint {
    let p = TypedGraph::builder()
        .node("c1", CLASS)
        .node("c2", CLASS)
        .node("m", METHOD)
        .edge("c1m", CONTAINS_METHOD, "c1", "m")
        .edge("c2m", CONTAINS_METHOD, "c2", "m");
    forbid("h1", ConstraintKind::Hard, p)
}

/// An attribute is contained in at most one class.
pub fn h2() -> Constraint {
    let p = TypedGraph::builder()
        .node("c1", CLASS)
        .node("c2", CLASS)
        .node("a", ATTRIBUTE)
        .edge("c1a", CONTAINS_ATTRIBUTE, "c1", "a")
        .edge("c2a", CONTAINS_ATTRIBUTE, "c2", "a");
    forbid("h2", ConstraintKind::Hard, p)
}

fn method_pair() -> TypedGraph {
    TypedGraph::builder()
        .node("c", CLASS)
        .node("m1", METHOD)
        .node("m2", METHOD)
        .edge("cm1", CONTAINS_METHOD, "c", "m1")
        .edge("cm2", CONTAINS_METHOD, "c", "m2")
        .build()
        .expect("static graph")
}

/// Two methods of one class share a used attribute of that class.
pub fn w1() -> Constraint {
    let p = method_pair();
    let d = exists_ext(&p, |b| {
        b.node("a", ATTRIBUTE).edge("ca", CONTAINS_ATTRIBUTE, "c", "a").edge("m1a", USES_ATTRIBUTE, "m1", "a").edge(
            "m2a",
            USES_ATTRIBUTE,
            "m2",
            "a",
        )
    });
    Constraint::universal("w1", ConstraintKind::Weak, Arc::new(p), d)
}

/// No method uses an attribute of another class.
pub fn w2() -> Constraint {
    let p = TypedGraph::builder()
        .node("c1", CLASS)
        .node("c2", CLASS)
        .node("m", METHOD)
        .node("a", ATTRIBUTE)
        .edge("c1m", CONTAINS_METHOD, "c1", "m")
        .edge("c2a", CONTAINS_ATTRIBUTE, "c2", "a")
        .edge("ma", USES_ATTRIBUTE, "m", "a");
    forbid("w2", ConstraintKind::Weak, p)
}

/// Two methods of one class use each other in at least one direction.
pub fn w3() -> Constraint {
    let p = method_pair();
    let there = exists_ext(&p, |b| b.edge("m1m2", USES_METHOD, "m1", "m2"));
    let back = exists_ext(&p, |b| b.edge("m2m1", USES_METHOD, "m2", "m1"));
    Constraint::universal("w3", ConstraintKind::Weak, Arc::new(p), Condition::Or(vec![there, back]))
}

/// No method uses a method of another class.
pub fn w4() -> Constraint {
    let p = TypedGraph::builder()
        .node("c1", CLASS)
        .node("c2", CLASS)
        .node("m1", METHOD)
        .node("m2", METHOD)
        .edge("c1m1", CONTAINS_METHOD, "c1", "m1")
        .edge("c2m2", CONTAINS_METHOD, "c2", "m2")
        .edge("m1m2", USES_METHOD, "m1", "m2");
    forbid("w4", ConstraintKind::Weak, p)
}

/// A method uses every attribute of its own class.
pub fn w5() -> Constraint {
    let p = TypedGraph::builder()
        .node("c", CLASS)
        .node("m", METHOD)
        .node("a", ATTRIBUTE)
        .edge("cm", CONTAINS_METHOD, "c", "m")
        .edge("ca", CONTAINS_ATTRIBUTE, "c", "a")
        .build()
        .expect("static graph");
    let d = exists_ext(&p, |b| b.edge("ma", USES_ATTRIBUTE, "m", "a"));
    Constraint::universal("w5", ConstraintKind::Weak, Arc::new(p), d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `h1, h2` hard; `w1, w2` weak.
    Base,
    /// `h1, h2` hard; `w3, w4, w5, w2` weak: the cohesion/coupling metric.
    Extended,
}

pub fn constraints(variant: Variant) -> Vec<Constraint> {
    match variant {
        Variant::Base => vec![h1(), h2(), w1(), w2()],
        Variant::Extended => vec![h1(), h2(), w3(), w4(), w5(), w2()],
    }
}

/// The running example: a shop with carts, sessions and items.
pub fn fig1() -> TypedGraph {
    let mut b = TypedGraph::builder();
    let classes: [(&str, &[&str], &[&str]); 3] = [
        ("Cart", &["print", "addItem", "checkout"], &["items"]),
        ("Session", &["logout"], &["username", "cart"]),
        ("Item", &["itemTotal", "itemSingle"], &["quantity", "price"]),
    ];
    for (c, methods, attrs) in classes {
        b.add_node(c, CLASS);
        for m in methods {
            b.add_node(m, METHOD);
            b.add_edge(&format!("{c}-{m}"), CONTAINS_METHOD, c, m);
        }
        for a in attrs {
            b.add_node(a, ATTRIBUTE);
            b.add_edge(&format!("{c}-{a}"), CONTAINS_ATTRIBUTE, c, a);
        }
    }
    let uses = [
        ("print", "items"),
        ("print", "username"),
        ("addItem", "items"),
        ("checkout", "username"),
        ("logout", "username"),
        ("itemTotal", "quantity"),
        ("itemTotal", "price"),
        ("itemSingle", "quantity"),
        ("itemSingle", "price"),
    ];
    for (m, a) in uses {
        b.add_edge(&format!("{m}->{a}"), USES_ATTRIBUTE, m, a);
    }
    b.build().expect("static graph")
}

#[derive(Debug, Clone)]
pub struct CraAssets {
    pub type_graph: TypeGraph,
    pub rules: Vec<Rule>,
    pub constraints: Vec<Constraint>,
    pub fixture: TypedGraph,
}

pub fn build_cra_assets(variant: Variant) -> CraAssets {
    CraAssets { type_graph: type_graph(), rules: rules(), constraints: constraints(variant), fixture: fig1() }
}

#[derive(Debug, Clone)]
pub struct SyntheticModel {
    pub graph: TypedGraph,
    /// Typed nodes: eleven per class.
    pub node_count: usize,
    /// Counting one container node for the whole diagram.
    pub node_count_with_root: usize,
}

/// `n` classes with five methods and five attributes each; every method uses
/// two attributes of its own class and three of other classes.
pub fn generate_synthetic(n: usize, seed: u64) -> Result<SyntheticModel, CraError> {
    if n < 2 {
        return Err(CraError::TooFewClasses(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = TypedGraph::builder();
    let attr = |c: usize, j: usize| format!("c{c}a{j}");
    for c in 0..n {
        let class = format!("c{c}");
        b.add_node(&class, CLASS);
        for j in 0..5 {
            let (m, a) = (format!("c{c}m{j}"), attr(c, j));
            b.add_node(&m, METHOD);
            b.add_node(&a, ATTRIBUTE);
            b.add_edge(&format!("{class}-{m}"), CONTAINS_METHOD, &class, &m);
            b.add_edge(&format!("{class}-{a}"), CONTAINS_ATTRIBUTE, &class, &a);
        }
    }
    let all_attrs: Vec<(usize, usize)> = (0..n).flat_map(|c| (0..5).map(move |j| (c, j))).collect();
    for c in 0..n {
        for j in 0..5 {
            let m = format!("c{c}m{j}");
            let own: Vec<usize> = rand::seq::index::sample(&mut rng, 5, 2).into_vec();
            let foreign: Vec<&(usize, usize)> = all_attrs.iter().filter(|(k, _)| *k != c).collect();
            let picked: Vec<&&(usize, usize)> = foreign.choose_multiple(&mut rng, 3).collect();
            for k in own {
                let a = attr(c, k);
                b.add_edge(&format!("{m}->{a}"), USES_ATTRIBUTE, &m, &a);
            }
            for &&(k, l) in picked {
                let a = attr(k, l);
                b.add_edge(&format!("{m}->{a}"), USES_ATTRIBUTE, &m, &a);
            }
        }
    }
    let graph = b.build().expect("generated ids are unique");
    let node_count = graph.node_count();
    Ok(SyntheticModel { graph, node_count, node_count_with_root: node_count + 1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Method,
    Attribute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureModel {
    #[serde(default)]
    pub features: Vec<Feature>,
    #[serde(default)]
    pub deps: Vec<Dependency>,
}

impl FeatureModel {
    pub fn kind_of(&self, name: &str) -> Option<FeatureKind> {
        self.features.iter().find(|f| f.name == name).map(|f| f.kind)
    }

    pub fn validate(&self) -> Result<(), CraError> {
        let mut seen = BTreeSet::new();
        for f in &self.features {
            if !seen.insert(f.name.as_str()) {
                return Err(CraError::Invalid(format!("feature `{}` is declared twice", f.name)));
            }
        }
        let mut pairs = BTreeSet::new();
        for d in &self.deps {
            match (self.kind_of(&d.from), self.kind_of(&d.to)) {
                (Some(FeatureKind::Method), Some(_)) => {}
                (Some(FeatureKind::Attribute), _) => {
                    return Err(CraError::Invalid(format!("dependency from attribute `{}`", d.from)))
                }
                _ => {
                    return Err(CraError::Invalid(format!(
                        "dependency `{}` -> `{}` names an unknown feature",
                        d.from, d.to
                    )))
                }
            }
            if d.from == d.to {
                return Err(CraError::Invalid(format!("`{}` depends on itself", d.from)));
            }
            if !pairs.insert((d.from.as_str(), d.to.as_str())) {
                return Err(CraError::Invalid(format!("dependency `{}` -> `{}` is listed twice", d.from, d.to)));
            }
        }
        Ok(())
    }

    /// One class per feature, each feature in its own class.
    pub fn to_graph(&self) -> Result<TypedGraph, CraError> {
        self.validate()?;
        let mut b = TypedGraph::builder();
        for f in &self.features {
            let class = format!("C_{}", f.name);
            b.add_node(&class, CLASS);
            let ty = match f.kind {
                FeatureKind::Method => METHOD,
                FeatureKind::Attribute => ATTRIBUTE,
            };
            b.add_node(&f.name, ty);
            b.add_edge(&format!("{class}-{}", f.name), contains_type(ty), &class, &f.name);
        }
        for d in &self.deps {
            let ty = match self.kind_of(&d.to) {
                Some(FeatureKind::Method) => USES_METHOD,
                _ => USES_ATTRIBUTE,
            };
            b.add_edge(&format!("{}->{}", d.from, d.to), ty, &d.from, &d.to);
        }
        b.build().map_err(|e| CraError::Invalid(e.to_string()))
    }
}

pub fn load_feature_model(path: impl AsRef<Path>) -> Result<TypedGraph, CraError> {
    read_feature_model(path)?.to_graph()
}

pub fn read_feature_model(path: impl AsRef<Path>) -> Result<FeatureModel, CraError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| CraError::Read { path: path.display().to_string(), source })?;
    if text.trim().is_empty() {
        return Ok(FeatureModel::default());
    }
    Ok(serde_json::from_str(&text)?)
}

/// A random feature model: about half methods, each method depending on
/// one to three other features.
pub fn generate_feature_model(n: usize, seed: u64) -> FeatureModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let methods = n.div_ceil(2);
    let features: Vec<Feature> = (0..n)
        .map(|i| {
            if i < methods {
                Feature { name: format!("m{i}"), kind: FeatureKind::Method }
            } else {
                Feature { name: format!("a{}", i - methods), kind: FeatureKind::Attribute }
            }
        })
        .collect();
    let mut deps = Vec::new();
    for i in 0..methods {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let k = rng.gen_range(1..=3.min(others.len()));
        let mut targets: Vec<usize> = others.choose_multiple(&mut rng, k).copied().collect();
        targets.sort_unstable();
        for j in targets {
            deps.push(Dependency { from: features[i].name.clone(), to: features[j].name.clone() });
        }
    }
    FeatureModel { features, deps }
}

/// The cohesion/coupling metric: total violations of the extended weak
/// constraints.
pub fn cra_metric(g: &TypedGraph) -> usize {
    constraints(Variant::Extended).iter().filter(|c| !c.is_hard()).map(|c| gtr_graph::count_violations(g, c)).sum()
}
