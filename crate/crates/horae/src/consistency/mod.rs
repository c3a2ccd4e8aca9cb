//! Consistency checking: the qualitative question (is there a boolean and
//! timestamp interpretation satisfying every statement) is decided by DPLL
//! over event and constraint atoms with lazy Fourier-Motzkin theory checks;
//! the quantitative question (is there a probabilistic interpretation giving
//! the library positive satisfaction probability) reduces to per-statement
//! propositional satisfiability plus joint feasibility of the constraint
//! atoms, decided by enumerating constraint-atom assignments.

mod dpll;
mod linear;
mod smtlib;

pub use linear::{solve_linear, LinSystem};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::abstraction::{apply_abstraction, AbstractionError, AbstractionResult};
use crate::ast::{
    Comparator, EventId, QualInterpretation, QuantInterpretation, Rational, RuleLibrary,
    TimeConstraint, TimestampVar,
};
use crate::semantics::{to_cnf_with_budget, Atom, Literal, DEFAULT_CLAUSE_BUDGET};

use dpll::Dpll;

/// Ceiling on distinct constraint atoms for the quantitative enumeration.
const CONSTRAINT_ATOM_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConsistencyError {
    #[error("clause budget of {budget} exceeded while building the problem")]
    ClauseBudgetExceeded { budget: usize },
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Qualitative,
    Quantitative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

/// Satisfying interpretation backing a `Consistent` verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    Qualitative(QualInterpretation),
    Quantitative(QuantInterpretation),
}

/// Outcome of a consistency check. A witness is present exactly on
/// `Consistent`; a conflict core (rule ids that stay jointly inconsistent
/// under greedy deletion) exactly on `Inconsistent`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub mode: Mode,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub conflict_core: Option<Vec<String>>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }
}

/// Decides whether some qualitative interpretation satisfies every statement
/// (rule types play no role). With an abstraction, correlated events share
/// one proposition and the witness is expanded back to the original events.
pub fn check_qualitative(
    lib: &RuleLibrary,
    abstraction: Option<&AbstractionResult>,
) -> Result<ConsistencyReport, ConsistencyError> {
    let working = match abstraction {
        Some(abs) => apply_abstraction(lib, abs)?,
        None => lib.clone(),
    };
    match decide_qualitative(&working)? {
        Some(witness) => {
            let witness = match abstraction {
                Some(abs) => expand_qual_witness(lib, abs, witness),
                None => witness,
            };
            Ok(ConsistencyReport {
                mode: Mode::Qualitative,
                verdict: Verdict::Consistent,
                witness: Some(Witness::Qualitative(witness)),
                conflict_core: None,
            })
        }
        None => Ok(ConsistencyReport {
            mode: Mode::Qualitative,
            verdict: Verdict::Inconsistent,
            witness: None,
            conflict_core: Some(greedy_core(&working, Mode::Qualitative)?),
        }),
    }
}

/// Decides whether some quantitative interpretation gives the library a
/// positive satisfaction probability under the per-statement product
/// semantics. Statements are scored independently, so one statement's event
/// and its negation in another statement do not conflict here.
pub fn check_quantitative(
    lib: &RuleLibrary,
    abstraction: Option<&AbstractionResult>,
) -> Result<ConsistencyReport, ConsistencyError> {
    let working = match abstraction {
        Some(abs) => apply_abstraction(lib, abs)?,
        None => lib.clone(),
    };
    match decide_quantitative(&working)? {
        Some(time_vals) => {
            // Probability one half for every event keeps each satisfiable
            // statement strictly positive; expansion to the original events
            // is the same constant assignment.
            let probs: BTreeMap<EventId, f64> =
                lib.events().keys().map(|id| (id.clone(), 0.5)).collect();
            let witness = QuantInterpretation::new(probs, time_vals)
                .expect("0.5 probabilities and solver timestamps are valid");
            Ok(ConsistencyReport {
                mode: Mode::Quantitative,
                verdict: Verdict::Consistent,
                witness: Some(Witness::Quantitative(witness)),
                conflict_core: None,
            })
        }
        None => Ok(ConsistencyReport {
            mode: Mode::Quantitative,
            verdict: Verdict::Inconsistent,
            witness: None,
            conflict_core: Some(greedy_core(&working, Mode::Quantitative)?),
        }),
    }
}

/// SMT-LIB2 v2.6 script deciding the qualitative question externally.
pub fn emit_smtlib(
    lib: &RuleLibrary,
    abstraction: Option<&AbstractionResult>,
) -> Result<String, ConsistencyError> {
    let working = match abstraction {
        Some(abs) => apply_abstraction(lib, abs)?,
        None => lib.clone(),
    };
    Ok(smtlib::emit(&working))
}

fn expand_qual_witness(
    lib: &RuleLibrary,
    abstraction: &AbstractionResult,
    witness: QualInterpretation,
) -> QualInterpretation {
    let mut event_vals = BTreeMap::new();
    for id in lib.events().keys() {
        let (class, polarity) = abstraction
            .class_of(id)
            .expect("abstraction covered the library during application");
        let rep = abstraction.representative(class);
        let rep_val = *witness
            .event_vals
            .get(rep)
            .expect("every representative is carried by the abstracted library");
        event_vals.insert(id.clone(), if polarity > 0 { rep_val } else { !rep_val });
    }
    QualInterpretation {
        event_vals,
        time_vals: witness.time_vals,
    }
}

/// Complementary comparison, where one exists (`=` complements to a
/// disequality, which is case-split instead).
fn complement(cmp: Comparator) -> Option<Comparator> {
    match cmp {
        Comparator::Lt => Some(Comparator::Ge),
        Comparator::Le => Some(Comparator::Gt),
        Comparator::Gt => Some(Comparator::Le),
        Comparator::Ge => Some(Comparator::Lt),
        Comparator::Eq => None,
    }
}

/// Feasibility of a set of signed constraint literals over the non-negative
/// reals. Negated comparisons are complemented; negated equalities are split
/// into the two strict orderings, requiring at least one feasible branch.
fn feasible_literals(
    literals: &[(&TimeConstraint, bool)],
    vars: &BTreeSet<TimestampVar>,
) -> Option<BTreeMap<TimestampVar, Rational>> {
    let mut base = Vec::new();
    let mut disequalities = Vec::new();
    for (constraint, value) in literals {
        if *value {
            base.push((*constraint).clone());
        } else {
            match complement(constraint.cmp) {
                Some(cmp) => base.push(TimeConstraint::new(
                    constraint.lhs.clone(),
                    cmp,
                    constraint.rhs.clone(),
                )),
                None => disequalities.push(*constraint),
            }
        }
    }
    let splits = 1u64 << disequalities.len();
    for bits in 0..splits {
        let mut system = base.clone();
        for (i, diseq) in disequalities.iter().enumerate() {
            let cmp = if bits >> i & 1 == 1 {
                Comparator::Lt
            } else {
                Comparator::Gt
            };
            system.push(TimeConstraint::new(
                diseq.lhs.clone(),
                cmp,
                diseq.rhs.clone(),
            ));
        }
        let sys = LinSystem::with_vars(system, vars.iter().cloned());
        if let (true, Some(witness)) = solve_linear(&sys) {
            return Some(witness);
        }
    }
    None
}

/// Clause over indexed atoms, as (index, positive-phase) pairs.
type IndexedClause = Vec<(usize, bool)>;

struct IndexedCnf {
    /// Event ids first (library order), then constraint atoms in
    /// first-occurrence order.
    event_ids: Vec<EventId>,
    constraint_atoms: Vec<TimeConstraint>,
    /// One clause list per statement.
    statements: Vec<Vec<IndexedClause>>,
}

impl IndexedCnf {
    fn atom_count(&self) -> usize {
        self.event_ids.len() + self.constraint_atoms.len()
    }

    fn constraint_index(&self, offset: usize) -> usize {
        self.event_ids.len() + offset
    }
}

fn index_library(lib: &RuleLibrary, budget: usize) -> Result<IndexedCnf, ConsistencyError> {
    let event_ids: Vec<EventId> = lib.events().keys().cloned().collect();
    let event_index: BTreeMap<&EventId, usize> =
        event_ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let mut constraint_atoms: Vec<TimeConstraint> = Vec::new();
    let mut constraint_index: BTreeMap<TimeConstraint, usize> = BTreeMap::new();
    let mut statements = Vec::new();
    let mut total_clauses = 0usize;
    for s in lib.statements() {
        let cnf = to_cnf_with_budget(s, budget)
            .map_err(|_| ConsistencyError::ClauseBudgetExceeded { budget })?;
        total_clauses += cnf.clauses.len();
        if total_clauses > budget {
            return Err(ConsistencyError::ClauseBudgetExceeded { budget });
        }
        let mut indexed = Vec::with_capacity(cnf.clauses.len());
        for clause in &cnf.clauses {
            let mut out: IndexedClause = Vec::with_capacity(clause.len());
            for Literal { atom, negated } in clause {
                let idx = match atom {
                    Atom::Event { id, .. } => event_index[id],
                    Atom::Constraint(c) => match constraint_index.get(c) {
                        Some(&i) => event_ids.len() + i,
                        None => {
                            constraint_atoms.push(c.clone());
                            constraint_index.insert(c.clone(), constraint_atoms.len() - 1);
                            event_ids.len() + constraint_atoms.len() - 1
                        }
                    },
                };
                out.push((idx, !negated));
            }
            indexed.push(out);
        }
        statements.push(indexed);
    }
    Ok(IndexedCnf {
        event_ids,
        constraint_atoms,
        statements,
    })
}

fn decide_qualitative(
    lib: &RuleLibrary,
) -> Result<Option<QualInterpretation>, ConsistencyError> {
    let indexed = index_library(lib, DEFAULT_CLAUSE_BUDGET)?;
    let mut solver = Dpll::new(indexed.atom_count());
    for clauses in &indexed.statements {
        for clause in clauses {
            solver.add_clause(clause.clone());
        }
    }
    let mut time_witness: Option<BTreeMap<TimestampVar, Rational>> = None;
    let model = solver.solve_with(|model| {
        let literals: Vec<(&TimeConstraint, bool)> = indexed
            .constraint_atoms
            .iter()
            .enumerate()
            .map(|(i, c)| (c, model[indexed.constraint_index(i)]))
            .collect();
        match feasible_literals(&literals, lib.timestamps()) {
            Some(witness) => {
                time_witness = Some(witness);
                Ok(())
            }
            None => Err(indexed
                .constraint_atoms
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let idx = indexed.constraint_index(i);
                    (idx, !model[idx])
                })
                .collect()),
        }
    });
    Ok(model.map(|model| {
        let event_vals: BTreeMap<EventId, bool> = indexed
            .event_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), model[i]))
            .collect();
        let time_vals = time_witness.unwrap_or_default();
        QualInterpretation::new(event_vals, time_vals)
            .expect("solver timestamps are non-negative by construction")
    }))
}

/// Positive library probability exists iff, for some truth assignment to the
/// constraint atoms that is feasible over the reals, every statement's
/// residual propositional part is satisfiable on its own.
fn decide_quantitative(
    lib: &RuleLibrary,
) -> Result<Option<BTreeMap<TimestampVar, Rational>>, ConsistencyError> {
    let indexed = index_library(lib, DEFAULT_CLAUSE_BUDGET)?;
    let m = indexed.constraint_atoms.len();
    if m > CONSTRAINT_ATOM_CAP {
        return Err(ConsistencyError::ClauseBudgetExceeded {
            budget: CONSTRAINT_ATOM_CAP,
        });
    }
    for bits in 0u64..(1u64 << m) {
        let sigma = |atom_idx: usize| -> bool {
            let offset = atom_idx - indexed.event_ids.len();
            bits >> offset & 1 == 1
        };
        let literals: Vec<(&TimeConstraint, bool)> = indexed
            .constraint_atoms
            .iter()
            .enumerate()
            .map(|(i, c)| (c, bits >> i & 1 == 1))
            .collect();
        let Some(witness) = feasible_literals(&literals, lib.timestamps()) else {
            continue;
        };
        let all_satisfiable = indexed.statements.iter().all(|clauses| {
            statement_satisfiable_under(clauses, indexed.event_ids.len(), &sigma)
        });
        if all_satisfiable {
            return Ok(Some(witness));
        }
    }
    Ok(None)
}

/// Satisfiability of one statement's CNF after substituting the constraint
/// assignment: clauses satisfied by a matching constraint literal drop out,
/// falsified constraint literals are removed, and the residual event CNF is
/// decided by DPLL.
fn statement_satisfiable_under(
    clauses: &[IndexedClause],
    event_count: usize,
    sigma: &dyn Fn(usize) -> bool,
) -> bool {
    let mut residual: Vec<IndexedClause> = Vec::new();
    for clause in clauses {
        let mut events: IndexedClause = Vec::new();
        let mut satisfied = false;
        for &(idx, phase) in clause {
            if idx < event_count {
                events.push((idx, phase));
            } else if sigma(idx) == phase {
                satisfied = true;
                break;
            }
        }
        if satisfied {
            continue;
        }
        if events.is_empty() {
            return false;
        }
        residual.push(events);
    }
    let mut solver = Dpll::new(event_count);
    for clause in residual {
        solver.add_clause(clause);
    }
    solver.solve().is_some()
}

/// Greedy conflict shrinking: drop one rule at a time, keeping it out when
/// the remainder stays inconsistent. Not necessarily minimum, but every
/// returned set is jointly inconsistent.
fn greedy_core(lib: &RuleLibrary, mode: Mode) -> Result<Vec<String>, ConsistencyError> {
    let n = lib.rules().len();
    let mut keep = vec![true; n];
    for i in 0..n {
        keep[i] = false;
        let sub = sublibrary(lib, &keep);
        let inconsistent = match mode {
            Mode::Qualitative => decide_qualitative(&sub)?.is_none(),
            Mode::Quantitative => decide_quantitative(&sub)?.is_none(),
        };
        if !inconsistent {
            keep[i] = true;
        }
    }
    Ok(lib
        .rules()
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(r, _)| r.id.clone())
        .collect())
}

/// Library restricted to the kept rules, with tables pruned to what those
/// rules reference.
fn sublibrary(lib: &RuleLibrary, keep: &[bool]) -> RuleLibrary {
    let rules: Vec<_> = lib
        .rules()
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(r, _)| r.clone())
        .collect();
    let mut event_ids = BTreeSet::new();
    let mut ts_names = BTreeSet::new();
    for r in &rules {
        event_ids.extend(r.statement.event_ids().into_iter().cloned());
        ts_names.extend(r.statement.timestamp_vars().into_iter().cloned());
    }
    let events = event_ids
        .iter()
        .map(|id| lib.event(id).expect("subset of a valid library").clone())
        .collect();
    RuleLibrary::new(rules, events, ts_names.into_iter().collect())
        .expect("pruned tables exactly cover the kept rules")
}
