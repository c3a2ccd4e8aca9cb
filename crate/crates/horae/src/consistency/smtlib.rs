//! SMT-LIB2 script emission for external cross-checking: one Bool constant
//! per proposition class, one Real constant per timestamp (asserted
//! non-negative), one assert per statement. Output is deterministic.

use num_bigint::BigInt;
use num_traits::Signed;

use crate::ast::{Comparator, LinearExpr, Rational, RuleLibrary, Statement};

pub(super) fn emit(lib: &RuleLibrary) -> String {
    let mut out = String::from("(set-logic QF_LRA)\n");
    let mut declared = false;
    for id in lib.events().keys() {
        out.push_str(&format!("(declare-const {} Bool)\n", symbol(id.as_str())));
        declared = true;
    }
    for ts in lib.timestamps() {
        out.push_str(&format!("(declare-const {} Real)\n", symbol(ts.as_str())));
        declared = true;
    }
    for ts in lib.timestamps() {
        out.push_str(&format!("(assert (>= {} 0))\n", symbol(ts.as_str())));
    }
    for rule in lib.rules() {
        out.push_str(&format!("(assert {})\n", statement_term(&rule.statement)));
    }
    out.push_str("(check-sat)\n");
    if declared {
        out.push_str("(get-model)\n");
    }
    out
}

fn statement_term(s: &Statement) -> String {
    match s {
        Statement::Not(inner) => format!("(not {})", statement_term(inner)),
        Statement::And(a, b) => format!("(and {} {})", statement_term(a), statement_term(b)),
        Statement::Or(a, b) => format!("(or {} {})", statement_term(a), statement_term(b)),
        Statement::Implies(a, b) => format!("(=> {} {})", statement_term(a), statement_term(b)),
        Statement::Event { id, .. } => symbol(id.as_str()),
        Statement::Constraint(c) => {
            let op = match c.cmp {
                Comparator::Lt => "<",
                Comparator::Gt => ">",
                Comparator::Le => "<=",
                Comparator::Ge => ">=",
                Comparator::Eq => "=",
            };
            format!("({op} {} {})", expr_term(&c.lhs), expr_term(&c.rhs))
        }
    }
}

fn expr_term(expr: &LinearExpr) -> String {
    let one = Rational::from_integer(1.into());
    let mut addends: Vec<String> = expr
        .terms()
        .iter()
        .map(|(coeff, var)| {
            if *coeff == one {
                symbol(var.as_str())
            } else {
                format!("(* {} {})", rational_term(coeff), symbol(var.as_str()))
            }
        })
        .collect();
    if !expr.constant_part().is_zero() || addends.is_empty() {
        addends.push(rational_term(expr.constant_part()));
    }
    if addends.len() == 1 {
        addends.pop().unwrap()
    } else {
        format!("(+ {})", addends.join(" "))
    }
}

use num_traits::Zero;

fn rational_term(r: &Rational) -> String {
    let body = if r.denom() == &BigInt::from(1) {
        r.numer().abs().to_string()
    } else {
        format!("(/ {} {})", r.numer().abs(), r.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

/// SMT-LIB simple symbols are alphanumeric/underscore and must not be
/// reserved words; anything else is quoted with vertical bars.
fn symbol(name: &str) -> String {
    const RESERVED: &[&str] = &[
        "let", "par", "as", "forall", "exists", "match", "assert", "true", "false",
    ];
    let simple = !name.is_empty()
        && !name.as_bytes()[0].is_ascii_digit()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_')
        && !RESERVED.contains(&name);
    if simple {
        name.to_owned()
    } else {
        format!("|{name}|")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_library;

    #[test]
    fn empty_library_script_is_minimal() {
        let script = emit(&RuleLibrary::empty());
        assert_eq!(script, "(set-logic QF_LRA)\n(check-sat)\n");
    }

    #[test]
    fn single_event_script_shape() {
        let lib = parse_library(r#"shall {object:"m" action:"s"};"#).unwrap();
        let script = emit(&lib);
        assert_eq!(
            script,
            "(set-logic QF_LRA)\n(declare-const e1 Bool)\n(assert e1)\n(check-sat)\n(get-model)\n"
        );
    }

    #[test]
    fn constraint_script_uses_reals() {
        let lib = parse_library(r#"shall [t12 - t11 < t14];"#).unwrap();
        let script = emit(&lib);
        assert!(script.contains("(declare-const t11 Real)"));
        assert!(script.contains("(assert (>= t11 0))"));
        assert!(script.contains("(assert (< (+ t12 (* (- 1) t11)) t14))"));
    }

    #[test]
    fn emission_is_deterministic() {
        let src = r#"
            shall {object:"b" action:"y"} | {object:"a" action:"x"};
            forbid <t2, {object:"c" action:"z"}> & [t2 <= 3.5];
        "#;
        let lib = parse_library(src).unwrap();
        assert_eq!(emit(&lib), emit(&lib));
    }

    #[test]
    fn fractional_bounds_emit_division() {
        let lib = parse_library(r#"shall [t1 <= 1/3];"#).unwrap();
        assert!(emit(&lib).contains("(/ 1 3)"));
    }
}
