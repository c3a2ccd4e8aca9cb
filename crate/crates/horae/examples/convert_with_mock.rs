//! The three-phase conversion of a natural-language rule into the structured
//! form, driven by a deterministic mock backend. An HTTP completion service
//! plugs into the same trait.
//!
//! Run with: `cargo run -p horae --example convert_with_mock`

use horae::parser::print_rule;
use horae::pipeline::{
    convert, event_extraction_prompt, logic_extraction_prompt, pattern_matching_prompt,
    MockBackend,
};

fn main() {
    let rule_text = "The collected information should include user behavior data, \
                     user preference data, or user transaction data.";
    let events = [
        "The collected information include user behavior data.",
        "The collected information include user preference data.",
        "The collected information include user transaction data.",
    ];

    // The mock maps each phase prompt to a canned completion; the prompts
    // are fixed templates, so fixtures can be written ahead of time.
    let mut fixture = vec![
        (event_extraction_prompt(rule_text), events.join("\n")),
        (
            logic_extraction_prompt(rule_text, &events.map(str::to_owned)),
            "A | B | C".to_owned(),
        ),
    ];
    for event in events {
        fixture.push((pattern_matching_prompt(event), "obj-act-obj".to_owned()));
    }
    let backend = MockBackend::new(fixture);

    let result = convert(rule_text, &backend).unwrap();

    println!("rule type:   {} (from {:?})", result.rule.rule_type, result.rule_type_source);
    println!("relation:    {}", result.relation);
    println!("patterns:    {:?}", result.patterns);
    println!("assembled:   {}", print_rule(&result.rule, result.library.events()));
    for (i, event) in result.events.iter().enumerate() {
        println!(
            "event {}: id {} <- {:?}",
            (b'A' + i as u8) as char,
            event.id,
            event.raw_text.as_deref().unwrap_or("")
        );
    }
    if result.warnings.is_empty() {
        println!("no warnings");
    }
    for warning in &result.warnings {
        println!("warning: {warning}");
    }

    // The full report serializes deterministically.
    println!("\nJSON report:\n{}", serde_json::to_string_pretty(&result).unwrap());
}
