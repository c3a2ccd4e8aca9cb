//! SMT-LIB2 emission for cross-checking consistency verdicts with an
//! external solver (z3, cvc5, ...).
//!
//! Run with: `cargo run -p horae --example emit_smtlib`

use horae::consistency::{check_qualitative, emit_smtlib};
use horae::parser::parse_library;

fn main() {
    let library = parse_library(
        r#"
        shall ({object:"employee" action:"requests annual leave"}
             | {object:"request" action:"arrives in time"})
            & (!{object:"manager" action:"objects"} | {object:"leave" action:"is granted"})
            & [t12 - t11 < t14];
        should <t11, {object:"employee" action:"requests annual leave"}> & [t11 >= 1/2];
        "#,
    )
    .unwrap();

    let script = emit_smtlib(&library, None).unwrap();
    println!("{script}");

    let report = check_qualitative(&library, None).unwrap();
    println!("; internal verdict: {:?}", report.verdict);
    println!("; pipe the script into `z3 -in` or `cvc5 --lang smt2` to cross-check");
}
