//! Qualitative versus quantitative consistency of rule libraries, including
//! the canonical library that separates the two notions.
//!
//! Run with: `cargo run -p horae --example check_consistency`

use horae::consistency::{check_qualitative, check_quantitative, Witness};
use horae::parser::parse_library;
use horae::semantics::{eval_qualitative, pr_library};

fn main() {
    // Statements e and !e: no boolean assignment satisfies both, yet each
    // statement alone has probability 1/2 under p(e) = 1/2, so the product
    // semantics scores the library 1/4 > 0.
    let contradictory = parse_library(
        r#"
        shall {object:"milk" action:"sold at the original price"};
        forbid !{object:"milk" action:"sold at the original price"};
        "#,
    )
    .unwrap();

    let qual = check_qualitative(&contradictory, None).unwrap();
    println!("qualitative verdict: {:?}", qual.verdict);
    println!("conflict core: {:?}", qual.conflict_core);

    let quant = check_quantitative(&contradictory, None).unwrap();
    println!("quantitative verdict: {:?}", quant.verdict);
    if let Some(Witness::Quantitative(witness)) = &quant.witness {
        let p = pr_library(&contradictory, witness).unwrap();
        println!("product probability at the witness: {p}");
    }

    // Timing conflicts are found by the linear-arithmetic side: t1 < t2 and
    // t2 < t1 cannot hold together over the reals.
    let timing = parse_library(
        r#"
        shall [t1 < t2];
        shall [t2 < t1];
        "#,
    )
    .unwrap();
    let report = check_qualitative(&timing, None).unwrap();
    println!("\ntiming library verdict: {:?}", report.verdict);

    // A satisfiable mix: the checker returns a witness that re-evaluates to
    // true, with exact rational timestamps.
    let satisfiable = parse_library(
        r#"
        shall <t1, {object:"report" action:"filed"}> & [t1 <= 45];
        should ![t1 = 45] -> {object:"auditor" action:"signs off"};
        "#,
    )
    .unwrap();
    let report = check_qualitative(&satisfiable, None).unwrap();
    println!("\nmixed library verdict: {:?}", report.verdict);
    if let Some(Witness::Qualitative(witness)) = &report.witness {
        println!("witness re-evaluates: {}", eval_qualitative(&satisfiable, witness).unwrap());
        for (ts, value) in &witness.time_vals {
            println!("  {ts} = {}", horae::ast::format_rational(value));
        }
        for (id, value) in &witness.event_vals {
            println!("  {id} = {value}");
        }
    }
}
