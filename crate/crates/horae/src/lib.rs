//! Toolkit for typed regulation rules: parsing, consistency checking,
//! probabilistic satisfaction, event abstraction, dataset scoring, and a
//! three-phase natural-language conversion pipeline.

pub mod abstraction;
pub mod ast;
pub mod cli;
pub mod consistency;
pub mod data;
pub mod parser;
pub mod pipeline;
pub mod semantics;

pub use ast::{
    BasicEvent, Comparator, ComponentKind, CoreError, EventComponent, EventId, EventPattern,
    LinearExpr, QualInterpretation, QuantInterpretation, Rational, Rule, RuleLibrary, RuleType,
    Statement, TimeConstraint, TimestampVar,
};

