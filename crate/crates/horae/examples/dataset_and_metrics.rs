//! Loading the three dataset record shapes, parsing relation strings, and
//! scoring extraction quality with precision/recall/F1 plus inter-annotator
//! agreement.
//!
//! Run with: `cargo run -p horae --example dataset_and_metrics`

use horae::abstraction::lexical_similarity;
use horae::data::{
    event_metrics, fleiss_kappa, load_dataset, parse_relation, serialize_dataset,
};

fn main() {
    let json = r#"[
        {
            "original rule": "The collected information should include user behavior data, user preference data, or user transaction data.",
            "basic events": [
                "The collected information include user behavior data.",
                "The collected information include user preference data.",
                "The collected information include user transaction data."
            ],
            "logical relation": "A | B | C",
            "syntactic patterns": ["obj-act-obj", "obj-act-obj", "obj-act-obj"]
        },
        {
            "original rule": "Company must conduct thorough testing and either obtain FDA approval or ensure compliance.",
            "basic events": [
                "Company conduct thorough testing",
                "Company obtain FDA approval",
                "Company ensure compliance"
            ],
            "logical relation": "A & (B | C)"
        },
        {
            "basic events": ["The response delay of orders shall not exceed 10mins."],
            "syntactic patterns": ["obj-attr-cmp-val"]
        }
    ]"#;

    let records = load_dataset(json).unwrap();
    for (i, record) in records.iter().enumerate() {
        println!(
            "record {i}: {} shape, {} events",
            record.shape_name(),
            record.basic_events().len()
        );
    }

    // Relation strings parse into statement skeletons over letters.
    let skeleton = parse_relation("A & (B | C)", 3).unwrap();
    println!("\nrelation skeleton: {skeleton:?}");

    // Round-trip through the serializer is stable.
    let serialized = serialize_dataset(&records);
    assert_eq!(load_dataset(&serialized).unwrap(), records);

    // Score a model's extraction against the gold decomposition: each
    // generated event is matched to its most similar gold partner.
    let generated = vec![
        "collected information includes user behavior data".to_owned(),
        "collected information includes transaction data".to_owned(),
    ];
    let gold: Vec<String> = records[0]
        .basic_events()
        .iter()
        .map(Clone::clone)
        .collect();
    let report = event_metrics(&generated, &gold, &lexical_similarity);
    println!("\nprecision {:.3}", report.precision);
    println!("recall    {:.3}", report.recall);
    println!("f1        {:.3}", report.f1);
    for pair in &report.matched_pairs {
        println!(
            "  generated #{} -> gold #{} (score {:.3})",
            pair.generated, pair.gold, pair.score
        );
    }

    // Annotation agreement: three raters over two items.
    let perfect = fleiss_kappa(&[vec![3, 0], vec![0, 3]]).unwrap();
    let split = fleiss_kappa(&[vec![2, 1], vec![1, 2]]).unwrap();
    println!("\nFleiss kappa, perfect agreement: {perfect}");
    println!("Fleiss kappa, (2,1)/(1,2) split: {split:.4}");
}
