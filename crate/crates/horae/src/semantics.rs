//! Statement semantics: desugaring to the negation/conjunction core, CNF
//! conversion, qualitative evaluation, and the recursive satisfaction
//! probability with its exact enumeration oracle.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::ast::{
    EventId, QualInterpretation, QuantInterpretation, Rational, RuleLibrary, Statement,
    TimeConstraint, TimestampVar,
};

/// Default ceiling on the number of clauses a CNF conversion may produce.
pub const DEFAULT_CLAUSE_BUDGET: usize = 100_000;

/// Number of distinct events up to which sub-statement equivalence to
/// true/false is decided by truth table; larger sub-statements short-circuit
/// only on syntactic constants.
pub const EQUIVALENCE_EVENT_CAP: usize = 16;

/// Ceiling on distinct events for the exact enumeration oracle.
pub const EXACT_EVENT_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("interpretation is missing assignments for: {}", missing.join(", "))]
    PartialInterpretation { missing: Vec<String> },
    #[error("CNF conversion exceeded the clause budget of {budget}")]
    FormulaTooLarge { budget: usize },
    #[error("statement has {count} distinct events; the exact oracle allows at most {max}")]
    TooManyEvents { count: usize, max: usize },
}

/// Atomic proposition of a clause: an event occurrence or a timing
/// constraint. Two event atoms denote the same proposition iff their ids
/// match; the timestamp tag does not affect truth.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Atom {
    Event {
        id: EventId,
        timestamp: Option<TimestampVar>,
    },
    Constraint(TimeConstraint),
}

/// Propositional identity of an atom (the key the solver branches on).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PropKey {
    Event(EventId),
    Constraint(TimeConstraint),
}

impl Atom {
    pub fn prop_key(&self) -> PropKey {
        match self {
            Atom::Event { id, .. } => PropKey::Event(id.clone()),
            Atom::Constraint(c) => PropKey::Constraint(c.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

/// Conjunction of disjunctions of literals. The empty clause list is the
/// constant true; a single empty clause is the constant false.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CnfForm {
    pub clauses: Vec<Vec<Literal>>,
}

impl CnfForm {
    pub fn is_constant_true(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn is_constant_false(&self) -> bool {
        self.clauses.iter().any(Vec::is_empty)
    }
}

/// Rewrites a statement into the negation/conjunction core: `a | b` becomes
/// `!(!a & !b)` and `a -> b` becomes `!(a & !b)`. Logically equivalent to the
/// input under every qualitative interpretation.
pub fn desugar(s: &Statement) -> Statement {
    match s {
        Statement::Not(inner) => Statement::not(desugar(inner)),
        Statement::And(a, b) => Statement::and(desugar(a), desugar(b)),
        Statement::Or(a, b) => Statement::not(Statement::and(
            Statement::not(desugar(a)),
            Statement::not(desugar(b)),
        )),
        Statement::Implies(a, b) => {
            Statement::not(Statement::and(desugar(a), Statement::not(desugar(b))))
        }
        Statement::Event { .. } | Statement::Constraint(_) => s.clone(),
    }
}

/// Converts a statement to CNF by negation normal form plus direct
/// distribution, keeping arithmetic atoms opaque. No auxiliary variables are
/// introduced, so the output is equivalent (not merely equisatisfiable).
pub fn to_cnf(s: &Statement) -> Result<CnfForm, SemanticsError> {
    to_cnf_with_budget(s, DEFAULT_CLAUSE_BUDGET)
}

pub fn to_cnf_with_budget(s: &Statement, budget: usize) -> Result<CnfForm, SemanticsError> {
    let clauses = distribute(s, false, budget)?;
    Ok(CnfForm { clauses })
}

fn distribute(
    s: &Statement,
    negated: bool,
    budget: usize,
) -> Result<Vec<Vec<Literal>>, SemanticsError> {
    match (s, negated) {
        (Statement::Not(inner), _) => distribute(inner, !negated, budget),
        (Statement::And(a, b), false) | (Statement::Or(a, b), true) => {
            let mut left = distribute(a, negated, budget)?;
            let right = distribute(b, negated, budget)?;
            if left.len() + right.len() > budget {
                return Err(SemanticsError::FormulaTooLarge { budget });
            }
            left.extend(right);
            Ok(left)
        }
        (Statement::Or(a, b), false) | (Statement::And(a, b), true) => {
            let left = distribute(a, negated, budget)?;
            let right = distribute(b, negated, budget)?;
            cross(left, right, budget)
        }
        (Statement::Implies(a, b), false) => {
            // a -> b is !a | b.
            let left = distribute(a, true, budget)?;
            let right = distribute(b, false, budget)?;
            cross(left, right, budget)
        }
        (Statement::Implies(a, b), true) => {
            // !(a -> b) is a & !b.
            let mut left = distribute(a, false, budget)?;
            let right = distribute(b, true, budget)?;
            if left.len() + right.len() > budget {
                return Err(SemanticsError::FormulaTooLarge { budget });
            }
            left.extend(right);
            Ok(left)
        }
        (Statement::Event { id, timestamp }, _) => Ok(vec![vec![Literal {
            atom: Atom::Event {
                id: id.clone(),
                timestamp: timestamp.clone(),
            },
            negated,
        }]]),
        (Statement::Constraint(c), _) => Ok(vec![vec![Literal {
            atom: Atom::Constraint(c.clone()),
            negated,
        }]]),
    }
}

fn cross(
    left: Vec<Vec<Literal>>,
    right: Vec<Vec<Literal>>,
    budget: usize,
) -> Result<Vec<Vec<Literal>>, SemanticsError> {
    if left.len().saturating_mul(right.len()) > budget {
        return Err(SemanticsError::FormulaTooLarge { budget });
    }
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in &left {
        for r in &right {
            let mut clause = l.clone();
            clause.extend(r.iter().cloned());
            out.push(clause);
        }
    }
    Ok(out)
}

fn missing_for_statement(
    s: &Statement,
    events: impl Fn(&EventId) -> bool,
    times: impl Fn(&TimestampVar) -> bool,
) -> Vec<String> {
    let mut missing = BTreeSet::new();
    for id in s.event_ids() {
        if !events(id) {
            missing.insert(id.0.clone());
        }
    }
    for ts in s.timestamp_vars() {
        if !times(ts) {
            missing.insert(ts.0.clone());
        }
    }
    missing.into_iter().collect()
}

fn require_total(missing: Vec<String>) -> Result<(), SemanticsError> {
    if missing.is_empty() {
        Ok(())
    } else {
        Err(SemanticsError::PartialInterpretation { missing })
    }
}

/// Evaluates a statement under total event/timestamp assignments.
pub fn eval_statement(
    s: &Statement,
    event_vals: &BTreeMap<EventId, bool>,
    time_vals: &BTreeMap<TimestampVar, Rational>,
) -> bool {
    match s {
        Statement::Not(inner) => !eval_statement(inner, event_vals, time_vals),
        Statement::And(a, b) => {
            eval_statement(a, event_vals, time_vals) && eval_statement(b, event_vals, time_vals)
        }
        Statement::Or(a, b) => {
            eval_statement(a, event_vals, time_vals) || eval_statement(b, event_vals, time_vals)
        }
        Statement::Implies(a, b) => {
            !eval_statement(a, event_vals, time_vals) || eval_statement(b, event_vals, time_vals)
        }
        Statement::Event { id, .. } => *event_vals
            .get(id)
            .expect("interpretation checked total before evaluation"),
        Statement::Constraint(c) => c
            .evaluate(time_vals)
            .expect("interpretation checked total before evaluation"),
    }
}

/// True iff every statement in the library evaluates to true after
/// substituting the interpretation.
pub fn eval_qualitative(
    lib: &RuleLibrary,
    interp: &QualInterpretation,
) -> Result<bool, SemanticsError> {
    let mut missing = Vec::new();
    for s in lib.statements() {
        missing.extend(missing_for_statement(
            s,
            |id| interp.event_vals.contains_key(id),
            |ts| interp.time_vals.contains_key(ts),
        ));
    }
    missing.sort();
    missing.dedup();
    require_total(missing)?;
    Ok(lib
        .statements()
        .all(|s| eval_statement(s, &interp.event_vals, &interp.time_vals)))
}

/// Statement with timing constraints already resolved against the fixed
/// timestamps, leaving a purely propositional structure.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Prop {
    True,
    False,
    Var(EventId),
    Not(Box<Prop>),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
    Implies(Box<Prop>, Box<Prop>),
}

impl Prop {
    fn from_statement(s: &Statement, time_vals: &BTreeMap<TimestampVar, Rational>) -> Prop {
        match s {
            Statement::Not(inner) => Prop::Not(Box::new(Prop::from_statement(inner, time_vals))),
            Statement::And(a, b) => Prop::And(
                Box::new(Prop::from_statement(a, time_vals)),
                Box::new(Prop::from_statement(b, time_vals)),
            ),
            Statement::Or(a, b) => Prop::Or(
                Box::new(Prop::from_statement(a, time_vals)),
                Box::new(Prop::from_statement(b, time_vals)),
            ),
            Statement::Implies(a, b) => Prop::Implies(
                Box::new(Prop::from_statement(a, time_vals)),
                Box::new(Prop::from_statement(b, time_vals)),
            ),
            Statement::Event { id, .. } => Prop::Var(id.clone()),
            Statement::Constraint(c) => {
                if c.evaluate(time_vals)
                    .expect("interpretation checked total before evaluation")
                {
                    Prop::True
                } else {
                    Prop::False
                }
            }
        }
    }

    fn vars(&self, out: &mut BTreeSet<EventId>) {
        match self {
            Prop::True | Prop::False => {}
            Prop::Var(id) => {
                out.insert(id.clone());
            }
            Prop::Not(a) => a.vars(out),
            Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    fn eval(&self, assignment: &BTreeMap<&EventId, bool>) -> bool {
        match self {
            Prop::True => true,
            Prop::False => false,
            Prop::Var(id) => assignment[id],
            Prop::Not(a) => !a.eval(assignment),
            Prop::And(a, b) => a.eval(assignment) && b.eval(assignment),
            Prop::Or(a, b) => a.eval(assignment) || b.eval(assignment),
            Prop::Implies(a, b) => !a.eval(assignment) || b.eval(assignment),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Equivalence {
    Tautology,
    Contradiction,
    Contingent,
    /// Too many events for the truth table; only syntactic constants apply.
    Undecided,
}

fn equivalence(p: &Prop) -> Equivalence {
    let mut vars = BTreeSet::new();
    p.vars(&mut vars);
    if vars.len() > EQUIVALENCE_EVENT_CAP {
        return Equivalence::Undecided;
    }
    let vars: Vec<&EventId> = vars.iter().collect();
    let mut any_true = false;
    let mut any_false = false;
    for bits in 0u64..(1u64 << vars.len()) {
        let assignment: BTreeMap<&EventId, bool> = vars
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, bits >> i & 1 == 1))
            .collect();
        if p.eval(&assignment) {
            any_true = true;
        } else {
            any_false = true;
        }
        if any_true && any_false {
            return Equivalence::Contingent;
        }
    }
    if any_true {
        Equivalence::Tautology
    } else {
        Equivalence::Contradiction
    }
}

fn pr_prop(p: &Prop, probs: &BTreeMap<EventId, f64>) -> f64 {
    // Base cases first, at every recursion level: a sub-statement logically
    // equivalent to true contributes 1, to false contributes 0.
    match equivalence(p) {
        Equivalence::Tautology => return 1.0,
        Equivalence::Contradiction => return 0.0,
        Equivalence::Contingent | Equivalence::Undecided => {}
    }
    match p {
        Prop::True => 1.0,
        Prop::False => 0.0,
        Prop::Var(id) => probs[id],
        Prop::Not(a) => 1.0 - pr_prop(a, probs),
        Prop::And(a, b) => pr_prop(a, probs) * pr_prop(b, probs),
        Prop::Or(a, b) => 1.0 - (1.0 - pr_prop(a, probs)) * (1.0 - pr_prop(b, probs)),
        Prop::Implies(a, b) => 1.0 - pr_prop(a, probs) * (1.0 - pr_prop(b, probs)),
    }
}

fn check_statement_total(
    s: &Statement,
    interp: &QuantInterpretation,
) -> Result<(), SemanticsError> {
    require_total(missing_for_statement(
        s,
        |id| interp.event_probs.contains_key(id),
        |ts| interp.time_vals.contains_key(ts),
    ))
}

/// Satisfaction probability of one statement under the recursive
/// independent-events semantics. Timing constraints are resolved to 1/0
/// against the interpretation's fixed timestamps before the recursion.
pub fn pr_statement(s: &Statement, interp: &QuantInterpretation) -> Result<f64, SemanticsError> {
    check_statement_total(s, interp)?;
    let prop = Prop::from_statement(s, &interp.time_vals);
    Ok(pr_prop(&prop, &interp.event_probs))
}

/// Library satisfaction probability: the product of per-statement
/// probabilities (statements are treated as independent).
pub fn pr_library(lib: &RuleLibrary, interp: &QuantInterpretation) -> Result<f64, SemanticsError> {
    let mut product = 1.0;
    for s in lib.statements() {
        product *= pr_statement(s, interp)?;
    }
    Ok(product)
}

/// Exact satisfaction probability by full enumeration over event
/// assignments, treating events as independent Bernoulli variables. Grounds
/// the recursion's independence assumption; exact on every statement.
pub fn pr_exact(s: &Statement, interp: &QuantInterpretation) -> Result<f64, SemanticsError> {
    check_statement_total(s, interp)?;
    let ids: Vec<EventId> = s.event_ids().into_iter().cloned().collect();
    if ids.len() > EXACT_EVENT_CAP {
        return Err(SemanticsError::TooManyEvents {
            count: ids.len(),
            max: EXACT_EVENT_CAP,
        });
    }
    let mut total = 0.0;
    for bits in 0u64..(1u64 << ids.len()) {
        let mut weight = 1.0;
        let mut event_vals = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            let value = bits >> i & 1 == 1;
            let p = interp.event_probs[id];
            weight *= if value { p } else { 1.0 - p };
            event_vals.insert(id.clone(), value);
        }
        if weight > 0.0 && eval_statement(s, &event_vals, &interp.time_vals) {
            total += weight;
        }
    }
    Ok(total)
}
