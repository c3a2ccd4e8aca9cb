//! Merging semantically correlated natural-language events into proposition
//! classes, preserving equality and negation correlations, and the effect on
//! consistency checking.
//!
//! Run with: `cargo run -p horae --example event_abstraction`

use horae::abstraction::{
    abstract_events, apply_abstraction, lexical_judge, LexicalProvider, SimilarityRelation,
    TableDrivenProvider, TablePair,
};
use horae::consistency::check_qualitative;
use horae::parser::{parse_library, print_library};

fn main() {
    // Three leave-request statements written by different authors: many of
    // the twelve events describe the same proposition in different words.
    let library = parse_library(
        r#"
        shall {object:"employee" action:"requests an annual leave"}
            & ({object:"it" action:"is during the permissible period"}
             | {object:"manager" action:"approves the request"})
           -> {object:"leave" action:"is granted"};
        shall {object:"there" action:"remains sufficient leave balance"}
            & {object:"a staff member" action:"files for vacation days"}
            & {object:"manager" action:"denies the request"}
           -> {object:"administrative review" action:"is required"};
        shall ({object:"leave balance" action:"is depleted for the year"}
             | {object:"a worker" action:"applies for yearly leave entitlement"})
            & {object:"application" action:"is within a restricted period"}
           -> {object:"request" action:"is automatically declined"};
        "#,
    )
    .unwrap();
    println!("events before abstraction: {}", library.events().len());

    // The lexical judge catches surface-level negations like approve/deny.
    let approve = library.events().values().find(|e| e.joined_text().contains("approves")).unwrap();
    let deny = library.events().values().find(|e| e.joined_text().contains("denies")).unwrap();
    let judgment = lexical_judge(approve, deny);
    println!(
        "lexical judge on approve/deny: {:?} at score {:.2}",
        judgment.relation, judgment.score
    );

    // Deeper paraphrases need a semantic judge; here an explicit table
    // stands in for one (an embedding service plugs in the same way).
    let pair = |a: &str, b: &str, relation, score| TablePair {
        a: a.to_owned(),
        b: b.to_owned(),
        relation,
        score,
    };
    let judgments = TableDrivenProvider::from_pairs([
        pair("e1", "e6", SimilarityRelation::Equivalent, 0.93),
        pair("e6", "e10", SimilarityRelation::Equivalent, 0.91),
        pair("e2", "e11", SimilarityRelation::Negation, 0.90),
        pair("e3", "e7", SimilarityRelation::Negation, 0.95),
        pair("e5", "e9", SimilarityRelation::Negation, 0.92),
        pair("e4", "e12", SimilarityRelation::Negation, 0.94),
    ]);

    let abstraction = abstract_events(&library, &judgments, 0.85).unwrap();
    println!("proposition classes: {}", abstraction.class_count());
    for (class, members) in abstraction.members().iter().enumerate() {
        let rendered: Vec<String> = members
            .iter()
            .map(|(id, polarity)| format!("{}{id}", if *polarity > 0 { "+" } else { "-" }))
            .collect();
        println!("  class {class}: {}", rendered.join(" "));
    }

    let merged = apply_abstraction(&library, &abstraction).unwrap();
    println!(
        "\nevent table shrank {} -> {}",
        library.events().len(),
        merged.events().len()
    );
    println!("library over class representatives:");
    print!("{}", print_library(&merged));

    let report = check_qualitative(&library, Some(&abstraction)).unwrap();
    println!("consistency under the abstraction: {:?}", report.verdict);

    // The baseline provider alone merges only near-identical texts.
    let lexical_only = abstract_events(&library, &LexicalProvider, 0.85).unwrap();
    println!(
        "lexical provider alone finds {} classes",
        lexical_only.class_count()
    );
}
