//! Satisfaction probability of a rule under uncertain event detection: the
//! recursive independent-events semantics against the exact enumeration
//! oracle, with the timing constraint resolved by the fixed timestamps.
//!
//! Run with: `cargo run -p horae --example violation_probability`

use std::collections::BTreeMap;

use horae::ast::{rational_from_str, EventId, QuantInterpretation, TimestampVar};
use horae::parser::parse_library;
use horae::semantics::{pr_exact, pr_library, pr_statement, to_cnf};

fn main() {
    // (e1 | e2) & (!e3 | e4) & [t12 - t11 < t14]: a leave request is granted
    // when filed in the permissible period unless the manager objects, and
    // the processing delay stays under the deadline.
    let library = parse_library(
        r#"
        shall ({object:"employee" action:"requests annual leave"}
             | {object:"request" action:"arrives in the permissible period"})
            & (!{object:"manager" action:"objects to the request"}
             | {object:"leave" action:"is granted"})
            & [t12 - t11 < t14];
        "#,
    )
    .unwrap();
    let statement = &library.rules()[0].statement;

    let cnf = to_cnf(statement).unwrap();
    println!("CNF has {} clauses", cnf.clauses.len());

    // Detection confidences from upstream recognition models, plus concrete
    // timestamps (the constraint contributes a 0/1 factor).
    let probabilities: BTreeMap<EventId, f64> = [
        ("e1", 1.0),
        ("e2", 0.0),
        ("e3", 0.5),
        ("e4", 1.0 / 3.0),
    ]
    .into_iter()
    .map(|(id, p)| (EventId::from(id), p))
    .collect();
    let timestamps: BTreeMap<TimestampVar, _> = [
        ("t11", "3.5"),
        ("t12", "6"),
        ("t14", "3"),
    ]
    .into_iter()
    .map(|(name, value)| (TimestampVar::from(name), rational_from_str(value).unwrap()))
    .collect();
    let interpretation = QuantInterpretation::new(probabilities, timestamps).unwrap();

    let recursive = pr_statement(statement, &interpretation).unwrap();
    let exact = pr_exact(statement, &interpretation).unwrap();
    println!("recursive semantics: {recursive:.12}");
    println!("enumeration oracle:  {exact:.12}");
    assert!((recursive - 2.0 / 3.0).abs() < 1e-12);

    // Library level: the product over statements.
    let library_probability = pr_library(&library, &interpretation).unwrap();
    println!("library probability: {library_probability:.12}");

    // Base cases catch logical constants at every level: e & !e is 0 no
    // matter the event probability.
    let contradiction = parse_library(
        r#"shall {object:"door" action:"open"} & !{object:"door" action:"open"};"#,
    )
    .unwrap();
    let p = pr_library(
        &contradiction,
        &QuantInterpretation::new(
            [(EventId::from("e1"), 0.7)].into_iter().collect(),
            BTreeMap::new(),
        )
        .unwrap(),
    )
    .unwrap();
    println!("contradictory statement probability: {p}");
}
