//! Typed graphs, injective matching, nested graph conditions and
//! double-pushout rewriting.

pub mod condition;
pub mod graph;
pub mod io;
pub mod matching;
pub mod rewrite;

pub use condition::{
    count_violations, normalize_universal, satisfies, violations_of, Condition, ConditionError, Constraint,
    ConstraintKind, Quantifier, Universal, ViolationSet,
};
pub use graph::{
    compose, graphs_isomorphic, GraphBuilder, GraphError, Morphism, MorphismError, PartialMorphism, TypeGraph,
    TypedGraph,
};
pub use matching::{find_monomorphisms, MatchError};
pub use rewrite::{
    applicable_matches, apply_rule, invert_rule, parallel_independent, track_total, RewriteError, Rule, Transformation,
};
