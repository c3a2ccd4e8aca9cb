//! Dataset ingestion and scoring: the three benchmark record shapes, the
//! letter-based relation strings, extraction metrics (precision / recall /
//! F1 over a pluggable similarity), and Fleiss' kappa.

mod metrics;
mod relation;

pub use metrics::{event_metrics, fleiss_kappa, scoped_event_metrics, MatchedPair, MetricsReport};
pub use relation::parse_relation;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("record {index}: {reason}")]
    SchemaError { index: usize, reason: String },
    #[error("record {index}: basic events and syntactic patterns differ in length")]
    LengthMismatch { index: usize },
    #[error("relation string invalid at offset {offset}: {reason}")]
    RelationParseError { offset: usize, reason: String },
    #[error("relation letter `{letter}` exceeds the {count} available events")]
    LetterOutOfRange { letter: char, count: usize },
    #[error("rating rows must all sum to the same rater count (>= 2)")]
    UnevenRaterCounts,
    #[error("expected agreement is 1 while observed agreement is not; kappa undefined")]
    DegenerateAgreement,
    #[error("dataset is not valid JSON: {0}")]
    Json(String),
}

/// Manually annotated record: rule text, its events, their relation, and the
/// per-event syntactic patterns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationRecord {
    #[serde(rename = "original rule")]
    pub original_rule: String,
    #[serde(rename = "basic events")]
    pub basic_events: Vec<String>,
    #[serde(rename = "logical relation")]
    pub logical_relation: String,
    #[serde(rename = "syntactic patterns")]
    pub syntactic_patterns: Vec<String>,
}

/// Composite training record: decomposition plus relation, no patterns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeRecord {
    #[serde(rename = "original rule")]
    pub original_rule: String,
    #[serde(rename = "basic events")]
    pub basic_events: Vec<String>,
    #[serde(rename = "logical relation")]
    pub logical_relation: String,
}

/// Single-event training record: events with their patterns only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleEventRecord {
    #[serde(rename = "basic events")]
    pub basic_events: Vec<String>,
    #[serde(rename = "syntactic patterns")]
    pub syntactic_patterns: Vec<String>,
}

/// A dataset entry, classified by its exact key set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum DatasetRecord {
    Validation(ValidationRecord),
    Composite(CompositeRecord),
    SingleEvent(SingleEventRecord),
}

impl DatasetRecord {
    pub fn shape_name(&self) -> &'static str {
        match self {
            DatasetRecord::Validation(_) => "validation",
            DatasetRecord::Composite(_) => "composite",
            DatasetRecord::SingleEvent(_) => "single-event",
        }
    }

    pub fn basic_events(&self) -> &[String] {
        match self {
            DatasetRecord::Validation(r) => &r.basic_events,
            DatasetRecord::Composite(r) => &r.basic_events,
            DatasetRecord::SingleEvent(r) => &r.basic_events,
        }
    }
}

const KEY_RULE: &str = "original rule";
const KEY_EVENTS: &str = "basic events";
const KEY_RELATION: &str = "logical relation";
const KEY_PATTERNS: &str = "syntactic patterns";

/// Parses a JSON array of records, classifying each object by its key set
/// and validating lengths and relation strings. Unknown keys are rejected.
pub fn load_dataset(json: &str) -> Result<Vec<DatasetRecord>, DataError> {
    let value: serde_json::Value =
        serde_json::from_str(json).map_err(|e| DataError::Json(e.to_string()))?;
    let array = value.as_array().ok_or_else(|| DataError::Json(
        "top-level value must be an array of records".to_owned(),
    ))?;
    array
        .iter()
        .enumerate()
        .map(|(index, entry)| classify_record(index, entry))
        .collect()
}

fn classify_record(index: usize, entry: &serde_json::Value) -> Result<DatasetRecord, DataError> {
    let object = entry.as_object().ok_or_else(|| DataError::SchemaError {
        index,
        reason: "record is not a JSON object".to_owned(),
    })?;
    let keys: BTreeSet<&str> = object.keys().map(String::as_str).collect();
    let validation: BTreeSet<&str> = [KEY_RULE, KEY_EVENTS, KEY_RELATION, KEY_PATTERNS]
        .into_iter()
        .collect();
    let composite: BTreeSet<&str> = [KEY_RULE, KEY_EVENTS, KEY_RELATION].into_iter().collect();
    let single: BTreeSet<&str> = [KEY_EVENTS, KEY_PATTERNS].into_iter().collect();

    let schema_err = |reason: String| DataError::SchemaError { index, reason };
    let from_value = |value: &serde_json::Value| -> Result<DatasetRecord, DataError> {
        if keys == validation {
            serde_json::from_value::<ValidationRecord>(value.clone())
                .map(DatasetRecord::Validation)
        } else if keys == composite {
            serde_json::from_value::<CompositeRecord>(value.clone()).map(DatasetRecord::Composite)
        } else if keys == single {
            serde_json::from_value::<SingleEventRecord>(value.clone())
                .map(DatasetRecord::SingleEvent)
        } else {
            return Err(schema_err(format!(
                "unrecognized key set {{{}}}",
                keys.iter().cloned().collect::<Vec<_>>().join(", ")
            )));
        }
        .map_err(|e| schema_err(e.to_string()))
    };
    let record = from_value(entry)?;
    validate_record(index, &record)?;
    Ok(record)
}

fn validate_record(index: usize, record: &DatasetRecord) -> Result<(), DataError> {
    let schema_err = |reason: String| DataError::SchemaError { index, reason };
    match record {
        DatasetRecord::Validation(r) => {
            if r.basic_events.len() != r.syntactic_patterns.len() {
                return Err(DataError::LengthMismatch { index });
            }
            check_relation(index, &r.logical_relation, r.basic_events.len())?;
        }
        DatasetRecord::Composite(r) => {
            check_relation(index, &r.logical_relation, r.basic_events.len())?;
        }
        DatasetRecord::SingleEvent(r) => {
            if r.basic_events.len() != r.syntactic_patterns.len() {
                return Err(DataError::LengthMismatch { index });
            }
        }
    }
    if record.basic_events().iter().any(|e| e.trim().is_empty()) {
        return Err(schema_err("basic events must be non-empty".to_owned()));
    }
    Ok(())
}

fn check_relation(index: usize, relation: &str, event_count: usize) -> Result<(), DataError> {
    if event_count > 26 {
        return Err(DataError::SchemaError {
            index,
            reason: format!(
                "{event_count} basic events exceed the A-Z relation alphabet"
            ),
        });
    }
    parse_relation(relation, event_count)
        .map(|_| ())
        .map_err(|e| DataError::SchemaError {
            index,
            reason: e.to_string(),
        })
}

/// Serializes records back to pretty JSON with the dataset key names.
pub fn serialize_dataset(records: &[DatasetRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize infallibly")
}

#[cfg(test)]
mod tests {
    use super::*;

    const VALIDATION: &str = r#"[{
        "original rule": "The collected information should include user behavior data, user preference data, or user transaction data.",
        "basic events": [
            "The collected information include user behavior data.",
            "The collected information include user preference data.",
            "The collected information include user transaction data."
        ],
        "logical relation": "A | B | C",
        "syntactic patterns": ["obj-act-obj", "obj-act-obj", "obj-act-obj"]
    }]"#;

    #[test]
    fn validation_record_loads() {
        let records = load_dataset(VALIDATION).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].shape_name(), "validation");
    }

    #[test]
    fn composite_and_single_event_shapes_load() {
        let json = r#"[
            {"original rule": "r", "basic events": ["a", "b"], "logical relation": "A & B"},
            {"basic events": ["The response delay of orders shall not exceed 10mins."],
             "syntactic patterns": ["obj-attr-cmp-val"]}
        ]"#;
        let records = load_dataset(json).unwrap();
        assert_eq!(records[0].shape_name(), "composite");
        assert_eq!(records[1].shape_name(), "single-event");
    }

    #[test]
    fn empty_array_is_empty() {
        assert!(load_dataset("[]").unwrap().is_empty());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let json = r#"[{"basic events": ["a", "b", "c"], "syntactic patterns": ["obj-act", "obj-act"]}]"#;
        let err = load_dataset(json).unwrap_err();
        assert_eq!(err, DataError::LengthMismatch { index: 0 });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let json = r#"[{"basic events": ["a"], "syntactic patterns": ["obj-act"], "extra": 1}]"#;
        let err = load_dataset(json).unwrap_err();
        assert!(matches!(err, DataError::SchemaError { index: 0, .. }), "{err}");
    }

    #[test]
    fn out_of_range_relation_letter_is_rejected() {
        let json = r#"[{"original rule": "r", "basic events": ["a"], "logical relation": "A & E"}]"#;
        let err = load_dataset(json).unwrap_err();
        match err {
            DataError::SchemaError { index: 0, reason } => {
                assert!(reason.contains('E'), "{reason}")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_stable() {
        let records = load_dataset(VALIDATION).unwrap();
        let json = serialize_dataset(&records);
        let again = load_dataset(&json).unwrap();
        assert_eq!(records, again);
        assert_eq!(serialize_dataset(&again), json);
    }
}
