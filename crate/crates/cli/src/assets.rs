//! The class-responsibility files shipped under `assets/`, rendered from the
//! definitions in `gtr_cra` so the two cannot drift apart.

use gtr_cra::Variant;
use gtr_engine::repair_ac::{derive_bundle, BundleDoc, DeriveOptions};
use gtr_engine::shift::Simplifier;
use gtr_graph::io::{canonical_json, ConstraintDoc, ConstraintSetDoc, GraphDoc, RuleDoc, RuleSetDoc};

use crate::commands::BundleSet;

fn constraint_file(variant: Variant) -> String {
    let tg = gtr_cra::type_graph();
    canonical_json(&ConstraintSetDoc {
        typegraph: Some((&tg).into()),
        constraints: gtr_cra::constraints(variant).iter().map(ConstraintDoc::from_constraint).collect(),
    })
}

/// Cancelled bundles for every rule and weak constraint, derived the way
/// `derive-ac` does on a simple host.
pub fn bundle_file(variant: Variant) -> String {
    let cs = gtr_cra::constraints(variant);
    let (simplifier, skipped_hard) = Simplifier::from_hard(&cs, true);
    let opts = DeriveOptions { simplifier, merge_equivalent: true };
    let mut bundles = Vec::new();
    for r in gtr_cra::rules() {
        for c in cs.iter().filter(|c| !c.is_hard()) {
            bundles.push(BundleDoc::from_bundle(&derive_bundle(&r, c, &opts, true), true));
        }
    }
    canonical_json(&BundleSet { bundles, skipped_hard })
}

/// Relative path and contents of every asset file.
pub fn files() -> Vec<(&'static str, String)> {
    let tg = gtr_cra::type_graph();
    vec![
        ("fig1.json", canonical_json(&GraphDoc::from_graph(&gtr_cra::fig1()).with_typegraph(&tg))),
        (
            "rules.json",
            canonical_json(&RuleSetDoc {
                typegraph: Some((&tg).into()),
                rules: gtr_cra::rules().iter().map(RuleDoc::from_rule).collect(),
            }),
        ),
        ("base-constraints.json", constraint_file(Variant::Base)),
        ("extended-constraints.json", constraint_file(Variant::Extended)),
        ("golden/bundles-base.json", bundle_file(Variant::Base)),
        ("golden/bundles-extended.json", bundle_file(Variant::Extended)),
    ]
}
