//! Parse a rule library from source, inspect its tables, and print it back
//! in canonical form.
//!
//! Run with: `cargo run -p horae --example parse_and_print`

use horae::parser::{parse_library, print_library, print_rule};

fn main() {
    let source = r#"
        # Disclosure rules for publicly traded companies.
        shall <t1, {object:"company" action:"discloses quarterly results"}> & [t1 <= 45];
        shall {object:"significant financial event" action:"occurs"}
            -> <t2, {object:"company" action:"submits a preliminary report"}> & [t2 - t1 <= 5];

        # Identical event bodies share one entry in the event table.
        forbid !{object:"company" action:"discloses quarterly results"};
    "#;

    let library = parse_library(source).expect("the source is grammar-valid");

    println!("parsed {} rules", library.rules().len());
    println!(
        "event table ({} entries, duplicates folded):",
        library.events().len()
    );
    for (id, event) in library.events() {
        println!("  {id}: pattern {:?}", event.pattern);
        for component in &event.components {
            println!("    {}: {:?}", component.kind.keyword(), component.text());
        }
    }
    println!("timestamps: {:?}", library.timestamps());

    println!("\ncanonical form:");
    print!("{}", print_library(&library));

    // Individual rules print without the terminating semicolon.
    let first = &library.rules()[0];
    println!("\nfirst rule alone: {}", print_rule(first, library.events()));
}
