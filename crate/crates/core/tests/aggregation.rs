mod common;

use std::collections::BTreeMap;

use common::props::aggregation_suite;
use decision_core::aggregation::{dispatch, AggregationProfile, Aggregator, Archetype, RequiredProperty};
use decision_core::primitives::PrimitiveBase;
use decision_core::relation::{eid, eids, Relation};
use decision_core::Error;

#[test]
fn aggregation_properties_hold_on_seeded_instances() {
    let failures: Vec<String> = aggregation_suite(250, 0xa66)
        .into_iter()
        .filter_map(|(name, r)| r.err().map(|e| format!("{name}: {e}")))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

fn base(dims: &[&str]) -> PrimitiveBase {
    let c = eids(&["x", "y"]);
    let mut b = PrimitiveBase::new(c.clone());
    for d in dims {
        b = b.with_dimension(d, Relation::linear_order(&c).unwrap());
    }
    b
}

#[test]
fn dispatch_table_rows() {
    let b = base(&["p", "q", "r"]);
    let mut profile = AggregationProfile::default();
    let rec = dispatch(&profile, &b).unwrap();
    assert_eq!(rec.aggregator, Aggregator::MajorityRelational { threshold: 0.5 });

    profile.required_properties.insert(RequiredProperty::Anonymity);
    let rec = dispatch(&profile, &b).unwrap();
    assert_eq!(rec.aggregator, Aggregator::MajorityRelational { threshold: 2.0 / 3.0 });

    profile.commensurable = true;
    profile.preferentially_independent = true;
    assert_eq!(dispatch(&profile, &b).unwrap().aggregator.archetype(), Archetype::WeightedFunctional);

    profile.negative_preferences = true;
    assert_eq!(dispatch(&profile, &b).unwrap().aggregator.archetype(), Archetype::VetoMajority);
}

#[test]
fn required_archetype_must_be_admissible() {
    let b = base(&["p", "q"]);
    let profile = AggregationProfile { required_archetype: Some(Archetype::Lexicographic), ..Default::default() };
    assert!(matches!(dispatch(&profile, &b), Err(Error::NoAdmissibleArchetype(_))));
    let profile = AggregationProfile { required_archetype: Some(Archetype::WeightedFunctional), ..Default::default() };
    assert!(matches!(dispatch(&profile, &b), Err(Error::NoAdmissibleArchetype(_))));
}

#[test]
fn weighted_aggregator_needs_every_weight() {
    let c = eids(&["x", "y"]);
    let r = Relation::linear_order(&c).unwrap();
    let agg = Aggregator::WeightedFunctional { weights: BTreeMap::from([("p".to_string(), 1.0)]) };
    let inputs = vec![("p".to_string(), r.clone()), ("q".to_string(), r)];
    assert!(matches!(agg.apply(&inputs), Err(Error::InvalidArgument(_))));
    let lex = Aggregator::Lexicographic { importance: vec!["q".into(), "p".into()] };
    assert!(lex.apply(&inputs).unwrap().contains(&eid("x"), &eid("y")));
}
