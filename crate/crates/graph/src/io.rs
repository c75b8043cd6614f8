//! JSON documents for graphs, conditions, constraints, rules and morphisms.
//!
//! Output goes through [`canonical_json`], which sorts object keys so that
//! equal values always serialise to identical bytes.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::condition::{Condition, ConditionError, Constraint, ConstraintKind};
use crate::graph::{GraphError, Morphism, TypeGraph, TypedGraph};
use crate::rewrite::{RewriteError, Rule};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read `{path}`: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("embedding: {0}")]
    Embedding(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeTypeDoc {
    #[serde(rename = "type")]
    pub ty: String,
    pub src: String,
    pub tgt: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeGraphDoc {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeTypeDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub src: String,
    pub tgt: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub typegraph: Option<TypeGraphDoc>,
    #[serde(default)]
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
}

impl From<&TypeGraphDoc> for TypeGraph {
    fn from(d: &TypeGraphDoc) -> Self {
        let mut tg = TypeGraph::new();
        for n in &d.nodes {
            tg = tg.with_node_type(n);
        }
        for e in &d.edges {
            tg = tg.with_edge_type(&e.ty, &e.src, &e.tgt);
        }
        tg
    }
}

impl From<&TypeGraph> for TypeGraphDoc {
    fn from(tg: &TypeGraph) -> Self {
        TypeGraphDoc {
            nodes: tg.node_types.iter().cloned().collect(),
            edges: tg
                .edge_types
                .iter()
                .map(|e| EdgeTypeDoc { ty: e.name.clone(), src: e.src.clone(), tgt: e.tgt.clone() })
                .collect(),
        }
    }
}

impl GraphDoc {
    pub fn from_graph(g: &TypedGraph) -> Self {
        GraphDoc {
            typegraph: None,
            nodes: g.nodes().iter().map(|n| NodeDoc { id: n.id.clone(), ty: n.ty.clone() }).collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id.clone(),
                    ty: e.ty.clone(),
                    src: g.node(e.src).id.clone(),
                    tgt: g.node(e.tgt).id.clone(),
                })
                .collect(),
        }
    }

    pub fn with_typegraph(mut self, tg: &TypeGraph) -> Self {
        self.typegraph = Some(tg.into());
        self
    }

    pub fn to_graph(&self) -> Result<TypedGraph, GraphError> {
        let mut b = TypedGraph::builder();
        for n in &self.nodes {
            b.add_node(&n.id, &n.ty);
        }
        for e in &self.edges {
            b.add_edge(&e.id, &e.ty, &e.src, &e.tgt);
        }
        b.build()
    }

    pub fn type_graph(&self) -> Option<TypeGraph> {
        self.typegraph.as_ref().map(TypeGraph::from)
    }
}

/// Every dangling endpoint, duplicate id and typing error in a graph document.
pub fn validate_graph(doc: &GraphDoc) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for n in &doc.nodes {
        if !seen.insert(n.id.as_str()) {
            out.push(format!("duplicate node id `{}`", n.id));
        }
    }
    let mut seen_edges = std::collections::BTreeSet::new();
    for e in &doc.edges {
        if !seen_edges.insert(e.id.as_str()) {
            out.push(format!("duplicate edge id `{}`", e.id));
        }
        for end in [&e.src, &e.tgt] {
            if !seen.contains(end.as_str()) {
                out.push(format!("missing endpoint `{}` of edge `{}`", end, e.id));
            }
        }
    }
    if let Some(tg) = doc.type_graph() {
        out.extend(tg.diagnostics());
        let ty_of: BTreeMap<&str, &str> = doc.nodes.iter().map(|n| (n.id.as_str(), n.ty.as_str())).collect();
        for n in &doc.nodes {
            if !tg.node_types.contains(&n.ty) {
                out.push(format!("node `{}` has undeclared type `{}`", n.id, n.ty));
            }
        }
        for e in &doc.edges {
            if let (Some(s), Some(t)) = (ty_of.get(e.src.as_str()), ty_of.get(e.tgt.as_str())) {
                if !tg.allows_edge(&e.ty, s, t) {
                    out.push(format!("edge `{}` of type `{}` does not fit endpoints {} -> {}", e.id, e.ty, s, t));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismDoc {
    #[serde(rename = "nodeMap")]
    pub node_map: BTreeMap<String, String>,
    #[serde(rename = "edgeMap")]
    pub edge_map: BTreeMap<String, String>,
}

impl MorphismDoc {
    pub fn from_morphism(m: &Morphism, dom: &TypedGraph, cod: &TypedGraph) -> Self {
        MorphismDoc { node_map: m.node_map(dom, cod), edge_map: m.edge_map(dom, cod) }
    }

    pub fn to_morphism(&self, dom: &TypedGraph, cod: &TypedGraph) -> Result<Morphism, IoError> {
        let look = |map: &BTreeMap<String, String>, id: &str, f: &dyn Fn(&str) -> Option<usize>| {
            let target = map.get(id).ok_or_else(|| IoError::Embedding(format!("`{id}` is unmapped")))?;
            f(target).ok_or_else(|| IoError::Embedding(format!("`{target}` is not in the codomain")))
        };
        let nodes = dom
            .nodes()
            .iter()
            .map(|n| look(&self.node_map, &n.id, &|t| cod.node_by_id(t)))
            .collect::<Result<Vec<_>, _>>()?;
        let edges = dom
            .edges()
            .iter()
            .map(|e| look(&self.edge_map, &e.id, &|t| cod.edge_by_id(t)))
            .collect::<Result<Vec<_>, _>>()?;
        let m = Morphism { nodes, edges };
        m.check(dom, cod).map_err(|e| IoError::Embedding(e.to_string()))?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantifierDoc {
    pub graph: GraphDoc,
    /// Omitted means: map every element to the one with the same id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<MorphismDoc>,
    pub body: Box<ConditionDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionDoc {
    True,
    False,
    Exists(QuantifierDoc),
    Forall(QuantifierDoc),
    Not(Box<ConditionDoc>),
    Or(Vec<ConditionDoc>),
    And(Vec<ConditionDoc>),
    Implies(Box<ConditionDoc>, Box<ConditionDoc>),
}

impl ConditionDoc {
    pub fn from_condition(c: &Condition, over: &TypedGraph) -> Self {
        let quant = |q: &crate::condition::Quantifier| QuantifierDoc {
            graph: GraphDoc::from_graph(&q.graph),
            embedding: Some(MorphismDoc::from_morphism(&q.embedding, over, &q.graph)),
            body: Box::new(ConditionDoc::from_condition(&q.body, &q.graph)),
        };
        match c {
            Condition::True => ConditionDoc::True,
            Condition::False => ConditionDoc::False,
            Condition::Exists(q) => ConditionDoc::Exists(quant(q)),
            Condition::ForAll(q) => ConditionDoc::Forall(quant(q)),
            Condition::Not(c) => ConditionDoc::Not(Box::new(ConditionDoc::from_condition(c, over))),
            Condition::Or(cs) => ConditionDoc::Or(cs.iter().map(|c| ConditionDoc::from_condition(c, over)).collect()),
            Condition::And(cs) => ConditionDoc::And(cs.iter().map(|c| ConditionDoc::from_condition(c, over)).collect()),
            Condition::Implies(a, b) => ConditionDoc::Implies(
                Box::new(ConditionDoc::from_condition(a, over)),
                Box::new(ConditionDoc::from_condition(b, over)),
            ),
        }
    }

    pub fn to_condition(&self, over: &TypedGraph) -> Result<Condition, IoError> {
        let quant = |q: &QuantifierDoc| -> Result<(Arc<TypedGraph>, Morphism, Condition), IoError> {
            let graph = Arc::new(q.graph.to_graph()?);
            let embedding = match &q.embedding {
                Some(m) => m.to_morphism(over, &graph)?,
                None => Morphism::by_ids(over, &graph)
                    .ok_or_else(|| IoError::Embedding("implicit embedding needs every outer id in the graph".into()))?,
            };
            embedding.check(over, &graph).map_err(|e| IoError::Embedding(e.to_string()))?;
            let body = q.body.to_condition(&graph)?;
            Ok((graph, embedding, body))
        };
        Ok(match self {
            ConditionDoc::True => Condition::True,
            ConditionDoc::False => Condition::False,
            ConditionDoc::Exists(q) => {
                let (g, e, b) = quant(q)?;
                Condition::exists(g, e, b)
            }
            ConditionDoc::Forall(q) => {
                let (g, e, b) = quant(q)?;
                Condition::forall(g, e, b)
            }
            ConditionDoc::Not(c) => Condition::not(c.to_condition(over)?),
            ConditionDoc::Or(cs) => Condition::Or(cs.iter().map(|c| c.to_condition(over)).collect::<Result<_, _>>()?),
            ConditionDoc::And(cs) => Condition::And(cs.iter().map(|c| c.to_condition(over)).collect::<Result<_, _>>()?),
            ConditionDoc::Implies(a, b) => Condition::implies(a.to_condition(over)?, b.to_condition(over)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindDoc {
    Hard,
    Weak,
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub name: String,
    pub kind: KindDoc,
    #[serde(default = "default_weight")]
    pub weight: f64,
    #[serde(flatten)]
    pub condition: ConditionDoc,
}

impl ConstraintDoc {
    pub fn from_constraint(c: &Constraint) -> Self {
        ConstraintDoc {
            name: c.name.clone(),
            kind: match c.kind {
                ConstraintKind::Hard => KindDoc::Hard,
                ConstraintKind::Weak => KindDoc::Weak,
            },
            weight: c.weight,
            condition: ConditionDoc::from_condition(&c.as_condition(), &TypedGraph::empty()),
        }
    }

    pub fn to_constraint(&self) -> Result<Constraint, IoError> {
        if !self.weight.is_finite() {
            return Err(IoError::Invalid(format!("constraint `{}` has a non-finite weight", self.name)));
        }
        let kind = match self.kind {
            KindDoc::Hard => ConstraintKind::Hard,
            KindDoc::Weak => ConstraintKind::Weak,
        };
        let c = self.condition.to_condition(&TypedGraph::empty())?;
        Ok(Constraint::new(&self.name, kind, self.weight, c)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSetDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub typegraph: Option<TypeGraphDoc>,
    pub constraints: Vec<ConstraintDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDoc {
    pub name: String,
    pub lhs: GraphDoc,
    pub rhs: GraphDoc,
}

impl RuleDoc {
    pub fn from_rule(r: &Rule) -> Self {
        RuleDoc { name: r.name.clone(), lhs: GraphDoc::from_graph(&r.lhs), rhs: GraphDoc::from_graph(&r.rhs) }
    }

    pub fn to_rule(&self) -> Result<Rule, IoError> {
        Ok(Rule::new(&self.name, Arc::new(self.lhs.to_graph()?), Arc::new(self.rhs.to_graph()?))?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSetDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub typegraph: Option<TypeGraphDoc>,
    pub rules: Vec<RuleDoc>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T, IoError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<(Option<TypeGraph>, TypedGraph), IoError> {
    let doc: GraphDoc = read_json(path)?;
    let problems = validate_graph(&doc);
    if !problems.is_empty() {
        return Err(IoError::Invalid(problems.join("; ")));
    }
    Ok((doc.type_graph(), doc.to_graph()?))
}

pub fn load_constraints(path: impl AsRef<Path>) -> Result<Vec<Constraint>, IoError> {
    let doc: ConstraintSetDoc = read_json(path)?;
    doc.constraints.iter().map(ConstraintDoc::to_constraint).collect()
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<Vec<Rule>, IoError> {
    let doc: RuleSetDoc = read_json(path)?;
    doc.rules.iter().map(RuleDoc::to_rule).collect()
}

/// Pretty JSON with object keys sorted at every level.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("documents serialise");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialise");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_reports_missing_endpoint() {
        let doc: GraphDoc = serde_json::from_str(
            r#"{"nodes":[{"id":"a","type":"T"}],"edges":[{"id":"e","type":"r","src":"a","tgt":"zz"}]}"#,
        )
        .unwrap();
        let problems = validate_graph(&doc);
        assert_eq!(problems.len(), 1);
        assert!(problems[0].contains("missing endpoint"));
        assert!(validate_graph(&GraphDoc::default()).is_empty());
    }

    #[test]
    fn validate_reports_typing_errors() {
        let doc: GraphDoc = serde_json::from_str(
            r#"{"typegraph":{"nodes":["A"],"edges":[{"type":"r","src":"A","tgt":"A"}]},
                "nodes":[{"id":"a","type":"A"},{"id":"b","type":"B"}],
                "edges":[{"id":"e","type":"r","src":"a","tgt":"b"}]}"#,
        )
        .unwrap();
        assert_eq!(validate_graph(&doc).len(), 2);
    }

    #[test]
    fn constraint_round_trips_through_json() {
        let text = r#"{"name":"c","kind":"weak","forall":{"graph":{"nodes":[{"id":"x","type":"A"}]},
            "body":{"not":{"exists":{"graph":{"nodes":[{"id":"x","type":"A"},{"id":"y","type":"A"}]},"body":"true"}}}}}"#;
        let doc: ConstraintDoc = serde_json::from_str(text).unwrap();
        let c = doc.to_constraint().unwrap();
        assert_eq!(c.weight, 1.0);
        assert_eq!(c.premise().node_count(), 1);
        let again = ConstraintDoc::from_constraint(&c).to_constraint().unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn canonical_json_sorts_keys() {
        let doc = GraphDoc { typegraph: None, nodes: vec![NodeDoc { id: "a".into(), ty: "T".into() }], edges: vec![] };
        let s = canonical_json(&doc);
        assert!(s.find("\"edges\"").unwrap() < s.find("\"nodes\"").unwrap());
        assert!(s.find("\"id\"").unwrap() < s.find("\"type\"").unwrap());
    }
}
