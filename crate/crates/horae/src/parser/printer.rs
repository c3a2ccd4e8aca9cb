//! Canonical pretty-printer: minimal parentheses under the fixed precedence,
//! single spaces, events inlined with kind tags. Printing is the inverse of
//! parsing up to whitespace normalization (parse -> print -> parse is a
//! fixpoint).

use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::{Signed, Zero};

use crate::ast::{
    format_rational, BasicEvent, EventId, LinearExpr, Rule, RuleLibrary, Statement,
};

const PREC_IMPLIES: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_NOT: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(s: &Statement) -> u8 {
    match s {
        Statement::Implies(_, _) => PREC_IMPLIES,
        Statement::Or(_, _) => PREC_OR,
        Statement::And(_, _) => PREC_AND,
        Statement::Not(_) => PREC_NOT,
        Statement::Event { .. } | Statement::Constraint(_) => PREC_ATOM,
    }
}

/// Prints one rule without the terminating `;`.
pub fn print_rule(rule: &Rule, events: &BTreeMap<EventId, BasicEvent>) -> String {
    format!(
        "{} {}",
        rule.rule_type.keyword(),
        print_statement(&rule.statement, events)
    )
}

/// Prints a whole library, one `;`-terminated rule per line.
pub fn print_library(lib: &RuleLibrary) -> String {
    let mut out = String::new();
    for rule in lib.rules() {
        let _ = writeln!(out, "{};", print_rule(rule, lib.events()));
    }
    out
}

pub fn print_statement(s: &Statement, events: &BTreeMap<EventId, BasicEvent>) -> String {
    let mut out = String::new();
    write_statement(&mut out, s, events, 0);
    out
}

/// Prints one event in source form: `{object:"..." action:"..."}`.
pub fn print_event(ev: &BasicEvent) -> String {
    let mut out = String::new();
    write_event(&mut out, ev);
    out
}

fn write_statement(
    out: &mut String,
    s: &Statement,
    events: &BTreeMap<EventId, BasicEvent>,
    min_prec: u8,
) {
    let prec = precedence(s);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match s {
        Statement::Implies(a, b) => {
            write_statement(out, a, events, PREC_OR);
            out.push_str(" -> ");
            write_statement(out, b, events, PREC_IMPLIES);
        }
        Statement::Or(a, b) => {
            write_statement(out, a, events, PREC_OR);
            out.push_str(" | ");
            write_statement(out, b, events, PREC_OR + 1);
        }
        Statement::And(a, b) => {
            write_statement(out, a, events, PREC_AND);
            out.push_str(" & ");
            write_statement(out, b, events, PREC_AND + 1);
        }
        Statement::Not(inner) => {
            out.push('!');
            write_statement(out, inner, events, PREC_NOT);
        }
        Statement::Event { id, timestamp } => {
            let ev = events
                .get(id)
                .unwrap_or_else(|| panic!("event `{id}` missing from the event table"));
            match timestamp {
                Some(ts) => {
                    out.push('<');
                    out.push_str(ts.as_str());
                    out.push_str(", ");
                    write_event(out, ev);
                    out.push('>');
                }
                None => write_event(out, ev),
            }
        }
        Statement::Constraint(c) => {
            out.push('[');
            write_linear_expr(out, &c.lhs);
            out.push(' ');
            out.push_str(c.cmp.symbol());
            out.push(' ');
            write_linear_expr(out, &c.rhs);
            out.push(']');
        }
    }
    if parens {
        out.push(')');
    }
}

fn write_event(out: &mut String, ev: &BasicEvent) {
    out.push('{');
    let last = ev.components.len() - 1;
    for (i, comp) in ev.components.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        if i == last {
            if let Some(cmp) = ev.comparator {
                out.push_str(cmp.symbol());
                out.push(' ');
            }
        }
        out.push_str(comp.kind.keyword());
        out.push(':');
        out.push('"');
        for ch in comp.text().chars() {
            match ch {
                '"' => out.push_str("\\\""),
                '\\' => out.push_str("\\\\"),
                _ => out.push(ch),
            }
        }
        out.push('"');
    }
    out.push('}');
}

fn write_linear_expr(out: &mut String, expr: &LinearExpr) {
    let one = crate::ast::Rational::from_integer(1.into());
    let mut first = true;
    for (coeff, var) in expr.terms() {
        let negative = coeff.is_negative();
        let magnitude = coeff.abs();
        if first {
            // The grammar has no unary minus: a leading negative term is
            // printed as `0 - ...`.
            if negative {
                out.push_str("0 - ");
            }
            first = false;
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        if magnitude != one {
            out.push_str(&format_rational(&magnitude));
            out.push('*');
        }
        out.push_str(var.as_str());
    }
    let constant = expr.constant_part();
    if first {
        // Same rule for a bare negative constant.
        if constant.is_negative() {
            out.push_str("0 - ");
        }
        out.push_str(&format_rational(&constant.abs()));
    } else if !constant.is_zero() {
        out.push_str(if constant.is_negative() { " - " } else { " + " });
        out.push_str(&format_rational(&constant.abs()));
    }
}
