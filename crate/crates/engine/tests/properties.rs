use std::collections::BTreeMap;
use std::sync::Arc;

use gtr_engine::ranking::{greedy_repair, predicted_delta, RepairConfig, Scorer, ScorerOptions};
use gtr_engine::repair_ac::{derive_bundle, DeriveOptions};
use gtr_engine::shift::{shift_along, shift_over_rule, Simplifier};
use gtr_oracle::{actual_delta, instance, morphisms, naive_apply, naive_matches, oracle_satisfies, Gen};
use proptest::prelude::*;

fn plain() -> DeriveOptions {
    DeriveOptions { simplifier: Simplifier::none(), merge_equivalent: true }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn predicted_change_is_exact(seed in any::<u64>()) {
        let i = instance(seed);
        let bundle = derive_bundle(&i.rule, &i.constraint, &plain(), true);
        for m in naive_matches(&i.rule, &i.host) {
            let predicted = predicted_delta(&i.rule, &i.constraint, &bundle, &i.host, &m).unwrap();
            prop_assert_eq!(Some(predicted), actual_delta(&i.host, &i.rule, &m, &i.constraint), "seed {}", seed);
        }
    }

    #[test]
    fn shift_commutes_with_composition(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let base = gen.graph(gen.params.premise_nodes, gen.params.premise_edges);
        let c = gen.condition(&base, gen.params.depth);
        let (target, b) = gen.extension(&base);
        let host = gen.host_around(&[&target]);
        let shifted = shift_along(&b, &target, &c, &Simplifier::none());
        for p in morphisms(&target, &host, &[], &[]) {
            prop_assert_eq!(oracle_satisfies(&host, &p, &shifted), oracle_satisfies(&host, &b.then(&p), &c));
        }
    }

    #[test]
    fn left_moves_conditions_across_a_step(seed in any::<u64>()) {
        let mut gen = Gen::new(seed);
        let rule = gen.rule();
        let c = gen.condition(&rule.rhs, gen.params.depth);
        let host = gen.host_around(&[&rule.lhs]);
        let left = shift_over_rule(&rule, &c, &Simplifier::none());
        for m in naive_matches(&rule, &host) {
            let step = naive_apply(&rule, &host, &m).unwrap();
            prop_assert_eq!(oracle_satisfies(&step.result, &step.comatch, &c), oracle_satisfies(&host, &m, &left));
        }
    }

    #[test]
    fn weighted_prediction_is_exact(seed in any::<u64>(), w1 in 0.1f64..5.0, w2 in 0.1f64..5.0) {
        let i = instance(seed);
        let other = Gen::new(seed ^ 0x9e37).constraint();
        let cs = [&i.constraint, &other];
        let bundles: Vec<_> = cs.iter().map(|c| derive_bundle(&i.rule, c, &plain(), true)).collect();
        for m in naive_matches(&i.rule, &i.host) {
            let mut predicted = 0.0;
            let mut actual = 0.0;
            for ((c, b), w) in cs.iter().zip(&bundles).zip([w1, w2]) {
                predicted += w * predicted_delta(&i.rule, c, b, &i.host, &m).unwrap() as f64;
                actual += w * actual_delta(&i.host, &i.rule, &m, c).unwrap() as f64;
            }
            prop_assert!((predicted - actual).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_weights_keeps_the_best_match(w1 in 0.1f64..5.0, w2 in 0.1f64..5.0, lambda in 0.01f64..100.0) {
        let cs = gtr_cra::constraints(gtr_cra::Variant::Base);
        let g = gtr_cra::fig1();
        let best = |scale: f64| {
            let w = BTreeMap::from([("w1".to_string(), w1 * scale), ("w2".to_string(), w2 * scale)]);
            let s: Scorer = Scorer::new(&gtr_cra::rules(), &cs, &w, ScorerOptions::default());
            let top = s.rank_all(&g).into_iter().next().unwrap();
            (top.rule, top.signature)
        };
        prop_assert_eq!(best(1.0), best(lambda));
    }

    #[test]
    fn greedy_strictly_improves_every_step(seed in 0u64..1000) {
        let model = gtr_cra::generate_feature_model(7, seed);
        let g = Arc::new(model.to_graph().unwrap());
        let cs = gtr_cra::constraints(gtr_cra::Variant::Extended);
        let s: Scorer = Scorer::new(&gtr_cra::rules(), &cs, &BTreeMap::new(), ScorerOptions::default());
        let trace = greedy_repair(&g, &s, &RepairConfig::default()).unwrap();
        let mut total = trace.initial_weighted;
        for step in &trace.steps {
            prop_assert!(step.delta < 0.0);
            total += step.delta;
        }
        prop_assert!((total - trace.final_weighted).abs() < 1e-9);
        prop_assert!(trace.identity_holds());
    }
}
