//! Three-phase conversion of natural-language rules: extract the basic
//! events, extract the logical relation between them, and match each event's
//! syntactic pattern, all against a pluggable completion backend. The phase
//! outputs are assembled into surface syntax and parsed, so every conversion
//! result is grammar-valid by construction.

mod assemble;
mod backend;

pub use backend::{
    BackendError, BackendRequest, HttpBackend, HttpBackendConfig, MockBackend, Phase,
    TransformerBackend,
};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{BasicEvent, EventPattern, Rule, RuleLibrary, RuleType};
use crate::data::{parse_relation, DataError};
use crate::parser::{parse_rule, print_event, ParseError};

/// Default fan-out for per-event pattern requests.
pub const DEFAULT_CONCURRENCY: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("rule text must be non-empty")]
    EmptyRuleText,
    #[error("event list must be non-empty")]
    EmptyEvents,
    #[error("backend returned no parsable events")]
    EmptyExtraction,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("logical relation rejected: {0}")]
    Relation(#[from] DataError),
    #[error("assembled rule failed to parse: {error} (assembled text: {assembled})")]
    Assembly { error: ParseError, assembled: String },
}

/// Where the rule type of a conversion came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleTypeSource {
    KeywordHeuristic,
    BackendProvided,
}

/// Full output of a conversion. `events` is letter-indexed: entry `i` is the
/// event the relation letter `A + i` denotes (entries repeat when the
/// backend extracted syntactically identical sentences).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConversionResult {
    pub rule: Rule,
    pub library: RuleLibrary,
    pub events: Vec<BasicEvent>,
    pub relation: String,
    pub patterns: Vec<EventPattern>,
    pub rule_type_source: RuleTypeSource,
    pub warnings: Vec<String>,
}

pub fn event_extraction_prompt(rule_text: &str) -> String {
    format!("Please extract basic events of the following rule: {rule_text}")
}

pub fn logic_extraction_prompt(rule_text: &str, events: &[String]) -> String {
    let lettered: Vec<String> = events
        .iter()
        .enumerate()
        .map(|(i, e)| format!("{}: {}", letter(i), e))
        .collect();
    format!(
        "Given the rule {rule_text} with basic events {}, provide the logical relation between these basic events",
        lettered.join("; ")
    )
}

pub fn pattern_matching_prompt(event: &str) -> String {
    format!("Please determine the syntactic pattern of the basic event: {event}")
}

fn letter(index: usize) -> char {
    (b'A' + index as u8) as char
}

/// Phase one: the backend lists the rule's basic events, one per line or
/// semicolon-separated. Empty items are dropped.
pub fn extract_events(
    rule_text: &str,
    backend: &dyn TransformerBackend,
) -> Result<Vec<String>, PipelineError> {
    if rule_text.trim().is_empty() {
        return Err(PipelineError::EmptyRuleText);
    }
    let response = backend.complete(&BackendRequest {
        phase: Phase::EventExtraction,
        prompt: event_extraction_prompt(rule_text),
    })?;
    let events: Vec<String> = response
        .split(['\n', ';'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect();
    if events.is_empty() {
        return Err(PipelineError::EmptyExtraction);
    }
    Ok(events)
}

/// Phase two: the backend states the logical relation over the lettered
/// events; the answer must parse against the event count.
pub fn extract_logic(
    rule_text: &str,
    events: &[String],
    backend: &dyn TransformerBackend,
) -> Result<String, PipelineError> {
    if events.is_empty() {
        return Err(PipelineError::EmptyEvents);
    }
    let response = backend.complete(&BackendRequest {
        phase: Phase::LogicExtraction,
        prompt: logic_extraction_prompt(rule_text, events),
    })?;
    let relation = response.trim().to_owned();
    parse_relation(&relation, events.len())?;
    Ok(relation)
}

/// Pattern labels with their attached warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternMatches {
    pub patterns: Vec<EventPattern>,
    pub warnings: Vec<String>,
}

/// Phase three: one request per event, fanned out over up to
/// [`DEFAULT_CONCURRENCY`] threads and re-ordered to input order. Labels
/// outside the canonical names map to `Other` with a warning.
pub fn match_patterns(
    events: &[String],
    backend: &dyn TransformerBackend,
) -> Result<PatternMatches, PipelineError> {
    match_patterns_with_concurrency(events, backend, DEFAULT_CONCURRENCY)
}

pub fn match_patterns_with_concurrency(
    events: &[String],
    backend: &dyn TransformerBackend,
    concurrency: usize,
) -> Result<PatternMatches, PipelineError> {
    if events.is_empty() {
        return Err(PipelineError::EmptyEvents);
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<String, BackendError>>>> =
        Mutex::new(vec![None; events.len()]);
    let workers = concurrency.max(1).min(events.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= events.len() {
                    break;
                }
                let outcome = backend.complete(&BackendRequest {
                    phase: Phase::PatternMatching,
                    prompt: pattern_matching_prompt(&events[i]),
                });
                results.lock().expect("results lock")[i] = Some(outcome);
            });
        }
    });
    let mut patterns = Vec::with_capacity(events.len());
    let mut warnings = Vec::new();
    for (i, outcome) in results.into_inner().expect("results lock").into_iter().enumerate() {
        let response = outcome.expect("every index was processed")?;
        let label = response.trim().to_lowercase();
        match EventPattern::from_canonical_name(&label) {
            Some(pattern) => patterns.push(pattern),
            None => {
                warnings.push(format!(
                    "unknown pattern label {label:?} for event {i}; falling back to other"
                ));
                patterns.push(EventPattern::Other);
            }
        }
    }
    Ok(PatternMatches { patterns, warnings })
}

const FORBID_KEYWORDS: &[&str] = &["no", "not", "cannot", "forbidden", "prohibited"];
const SHALL_KEYWORDS: &[&str] = &["must", "shall", "mandatory"];
const SHOULD_KEYWORDS: &[&str] = &["should", "advised", "recommended"];

/// Keyword heuristic for the rule type. Forbid markers win over shall/should
/// markers ("shall not exceed" reads as a prohibition); no marker at all
/// defaults to shall with a warning.
fn detect_rule_type(rule_text: &str) -> (RuleType, Option<String>) {
    let tokens: Vec<String> = rule_text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect();
    let contains = |set: &[&str]| tokens.iter().any(|t| set.contains(&t.as_str()));
    if contains(FORBID_KEYWORDS) {
        (RuleType::Forbid, None)
    } else if contains(SHALL_KEYWORDS) {
        (RuleType::Shall, None)
    } else if contains(SHOULD_KEYWORDS) {
        (RuleType::Should, None)
    } else {
        (
            RuleType::Shall,
            Some("no rule-type keyword found; defaulting to shall".to_owned()),
        )
    }
}

/// Runs the three phases, detects the rule type, substitutes the events into
/// the relation, and parses the assembled text. The result always reparses.
pub fn convert(
    rule_text: &str,
    backend: &dyn TransformerBackend,
) -> Result<ConversionResult, PipelineError> {
    convert_with_concurrency(rule_text, backend, DEFAULT_CONCURRENCY)
}

pub fn convert_with_concurrency(
    rule_text: &str,
    backend: &dyn TransformerBackend,
    concurrency: usize,
) -> Result<ConversionResult, PipelineError> {
    if rule_text.trim().is_empty() {
        return Err(PipelineError::EmptyRuleText);
    }
    let mut warnings = Vec::new();
    let (rule_type, type_warning) = detect_rule_type(rule_text);
    warnings.extend(type_warning);

    let extracted = extract_events(rule_text, backend)?;
    let relation = extract_logic(rule_text, &extracted, backend)?;
    let matches = match_patterns_with_concurrency(&extracted, backend, concurrency)?;
    warnings.extend(matches.warnings.iter().cloned());

    // Componentize each extracted sentence per its pattern label and render
    // it in surface syntax.
    let mut rendered: Vec<String> = Vec::with_capacity(extracted.len());
    let mut letter_events: Vec<BasicEvent> = Vec::with_capacity(extracted.len());
    for (i, text) in extracted.iter().enumerate() {
        let split = assemble::componentize(text, matches.patterns[i]);
        warnings.extend(split.warnings);
        let event = BasicEvent::new(
            crate::ast::EventId(format!("pending{i}")),
            split.components,
            split.comparator,
            Some(text.clone()),
        )
        .expect("componentize returns at least one non-empty component");
        rendered.push(print_event(&event));
        letter_events.push(event);
    }

    let assembled = assemble_rule_text(rule_type, &relation, &rendered);
    let mut parsed = parse_rule(&assembled).map_err(|error| PipelineError::Assembly {
        error,
        assembled: assembled.clone(),
    })?;

    // Attach the extracted sentences as raw text on the parsed events and
    // resolve each letter to its deduplicated id.
    let mut events = Vec::with_capacity(letter_events.len());
    for pending in &letter_events {
        let key = pending.dedup_key();
        let parsed_event = parsed
            .events
            .iter_mut()
            .find(|e| e.dedup_key() == key)
            .expect("every rendered event survives parsing");
        if parsed_event.raw_text.is_none() {
            parsed_event.raw_text = pending.raw_text.clone();
        }
        events.push(parsed_event.clone());
    }
    let rule = parsed.rule.clone();
    let library = parsed
        .into_library()
        .expect("parser output forms a valid library");

    Ok(ConversionResult {
        rule,
        library,
        events,
        relation,
        patterns: matches.patterns,
        rule_type_source: RuleTypeSource::KeywordHeuristic,
        warnings,
    })
}

/// Replaces each relation letter with its event's surface form, keeping the
/// connectives; the result is a single rule declaration.
fn assemble_rule_text(rule_type: RuleType, relation: &str, rendered: &[String]) -> String {
    let mut body = String::new();
    for c in relation.chars() {
        match c {
            'A'..='Z' => {
                let index = c as usize - 'A' as usize;
                body.push_str(&rendered[index]);
            }
            _ => body.push(c),
        }
    }
    format!("{} {}", rule_type.keyword(), body.trim())
}
