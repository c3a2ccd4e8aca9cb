//! Seeded generators and independent oracles shared by the integration
//! suites. The oracles deliberately re-derive results by enumeration instead
//! of calling the code paths they check.

// Each integration target compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use horae::ast::{
    BasicEvent, Comparator, ComponentKind, EventComponent, EventId, LinearExpr, Rational, Rule,
    RuleLibrary, RuleType, Statement, TimeConstraint, TimestampVar,
};
use horae::consistency::{solve_linear, LinSystem};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn simple_event(id: &str, object: &str, action: &str) -> BasicEvent {
    BasicEvent::new(
        EventId::from(id),
        vec![
            EventComponent::new(ComponentKind::Object, object).unwrap(),
            EventComponent::new(ComponentKind::Action, action).unwrap(),
        ],
        None,
        None,
    )
    .unwrap()
}

/// Builds a library from rules over the `e{i}` / `t{i}` naming scheme,
/// collecting exactly the referenced tables.
pub fn library_from_rules(rules: Vec<Rule>) -> RuleLibrary {
    let mut event_ids = BTreeSet::new();
    let mut ts = BTreeSet::new();
    for r in &rules {
        event_ids.extend(r.statement.event_ids().into_iter().cloned());
        ts.extend(r.statement.timestamp_vars().into_iter().cloned());
    }
    let events = event_ids
        .iter()
        .map(|id| simple_event(id.as_str(), &format!("object {id}"), &format!("action {id}")))
        .collect();
    RuleLibrary::new(rules, events, ts.into_iter().collect()).unwrap()
}

/// Random statement tree over an event pool, with optional timing atoms.
/// Constraint leaves draw from a small shared pool so the number of distinct
/// theory atoms per library stays at desk scale.
pub struct StatementConfig {
    pub max_events: usize,
    pub max_timestamps: usize,
    pub max_depth: usize,
    pub constraint_pool: Vec<TimeConstraint>,
    pub allow_implies: bool,
}

impl Default for StatementConfig {
    fn default() -> Self {
        StatementConfig {
            max_events: 8,
            max_timestamps: 4,
            max_depth: 3,
            constraint_pool: Vec::new(),
            allow_implies: true,
        }
    }
}

impl StatementConfig {
    pub fn with_constraint_pool(mut self, rng: &mut StdRng, size: usize) -> Self {
        self.constraint_pool = (0..size)
            .map(|_| random_constraint(rng, self.max_timestamps))
            .collect();
        self
    }
}

pub fn random_statement(rng: &mut StdRng, config: &StatementConfig) -> Statement {
    random_statement_at(rng, config, 0)
}

fn random_statement_at(rng: &mut StdRng, config: &StatementConfig, depth: usize) -> Statement {
    let leaf = depth >= config.max_depth || rng.gen_bool(0.35);
    if leaf {
        if !config.constraint_pool.is_empty() && rng.gen_bool(0.25) {
            let pick = rng.gen_range(0..config.constraint_pool.len());
            Statement::constraint(config.constraint_pool[pick].clone())
        } else {
            let id = format!("e{}", rng.gen_range(1..=config.max_events));
            if config.max_timestamps > 0 && rng.gen_bool(0.2) {
                let ts = format!("t{}", rng.gen_range(1..=config.max_timestamps));
                Statement::timed_event(ts.as_str(), id.as_str())
            } else {
                Statement::event(id.as_str())
            }
        }
    } else {
        match rng.gen_range(0..if config.allow_implies { 4 } else { 3 }) {
            0 => Statement::not(random_statement_at(rng, config, depth + 1)),
            1 => Statement::and(
                random_statement_at(rng, config, depth + 1),
                random_statement_at(rng, config, depth + 1),
            ),
            2 => Statement::or(
                random_statement_at(rng, config, depth + 1),
                random_statement_at(rng, config, depth + 1),
            ),
            _ => Statement::implies(
                random_statement_at(rng, config, depth + 1),
                random_statement_at(rng, config, depth + 1),
            ),
        }
    }
}

fn random_comparator(rng: &mut StdRng) -> Comparator {
    match rng.gen_range(0..5) {
        0 => Comparator::Lt,
        1 => Comparator::Gt,
        2 => Comparator::Le,
        3 => Comparator::Ge,
        _ => Comparator::Eq,
    }
}

/// Integer-coefficient constraint over up to `max_timestamps` variables.
pub fn random_constraint(rng: &mut StdRng, max_timestamps: usize) -> TimeConstraint {
    let cmp = random_comparator(rng);
    TimeConstraint::new(
        random_linear_expr(rng, max_timestamps, false),
        cmp,
        random_linear_expr(rng, max_timestamps, false),
    )
}

/// Constraint with mixed coefficient styles (integers, terminating decimals,
/// and general fractions), for printer fuzzing.
pub fn random_mixed_constraint(rng: &mut StdRng, max_timestamps: usize) -> TimeConstraint {
    let cmp = random_comparator(rng);
    TimeConstraint::new(
        random_linear_expr(rng, max_timestamps, true),
        cmp,
        random_linear_expr(rng, max_timestamps, true),
    )
}

fn random_coeff(rng: &mut StdRng, mixed: bool) -> Rational {
    let numer: i64 = loop {
        let c = rng.gen_range(-9i64..=9);
        if c != 0 {
            break c;
        }
    };
    let denom: i64 = if mixed {
        [1, 1, 2, 4, 10, 3, 7][rng.gen_range(0..7)]
    } else {
        1
    };
    Rational::new(numer.into(), denom.into())
}

fn random_linear_expr(rng: &mut StdRng, max_timestamps: usize, mixed: bool) -> LinearExpr {
    let constant = if mixed {
        random_coeff(rng, true) * Rational::from_integer(rng.gen_range(0..=3).into())
    } else {
        Rational::from_integer(rng.gen_range(-10i64..=10).into())
    };
    let mut expr = LinearExpr::constant(constant);
    for _ in 0..rng.gen_range(0..=2) {
        let var = format!("t{}", rng.gen_range(1..=max_timestamps.max(1)));
        expr.add_term(random_coeff(rng, mixed), TimestampVar(var));
    }
    expr
}

/// Random library matching the desk-scale regime: bounded events,
/// timestamps, rules, integer coefficients, and at most three distinct
/// constraint atoms.
pub fn random_library(rng: &mut StdRng, max_rules: usize) -> RuleLibrary {
    let pool_size = rng.gen_range(0..=3);
    let config = StatementConfig::default().with_constraint_pool(rng, pool_size);
    let rule_count = rng.gen_range(1..=max_rules);
    let rules = (0..rule_count)
        .map(|i| {
            let rule_type = match rng.gen_range(0..3) {
                0 => RuleType::Shall,
                1 => RuleType::Should,
                _ => RuleType::Forbid,
            };
            Rule::new(
                format!("r{}", i + 1),
                rule_type,
                random_statement(rng, &config),
            )
        })
        .collect();
    library_from_rules(rules)
}

/// Statement evaluation against explicit event and constraint truth
/// assignments; independent of the library evaluators.
fn eval_with(
    s: &Statement,
    events: &BTreeMap<EventId, bool>,
    constraints: &dyn Fn(&TimeConstraint) -> bool,
) -> bool {
    match s {
        Statement::Not(inner) => !eval_with(inner, events, constraints),
        Statement::And(a, b) => {
            eval_with(a, events, constraints) && eval_with(b, events, constraints)
        }
        Statement::Or(a, b) => {
            eval_with(a, events, constraints) || eval_with(b, events, constraints)
        }
        Statement::Implies(a, b) => {
            !eval_with(a, events, constraints) || eval_with(b, events, constraints)
        }
        Statement::Event { id, .. } => events[id],
        Statement::Constraint(c) => constraints(c),
    }
}

/// Brute-force qualitative consistency: every event assignment crossed with
/// every constraint-atom assignment, each theory-checked by Fourier-Motzkin.
/// Returns a witness when consistent.
pub fn brute_force_qualitative(
    lib: &RuleLibrary,
) -> Option<(BTreeMap<EventId, bool>, BTreeMap<TimestampVar, Rational>)> {
    let event_ids: Vec<EventId> = lib.events().keys().cloned().collect();
    let mut constraints: Vec<TimeConstraint> = Vec::new();
    for s in lib.statements() {
        for c in s.constraints() {
            if !constraints.contains(c) {
                constraints.push(c.clone());
            }
        }
    }
    let mut feasibility_cache: HashMap<u64, Option<BTreeMap<TimestampVar, Rational>>> =
        HashMap::new();

    for event_bits in 0u64..(1u64 << event_ids.len()) {
        let events: BTreeMap<EventId, bool> = event_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), event_bits >> i & 1 == 1))
            .collect();
        'constraint_assignments: for c_bits in 0u64..(1u64 << constraints.len()) {
            let truth = |c: &TimeConstraint| -> bool {
                let idx = constraints.iter().position(|k| k == c).unwrap();
                c_bits >> idx & 1 == 1
            };
            for s in lib.statements() {
                if !eval_with(s, &events, &truth) {
                    continue 'constraint_assignments;
                }
            }
            let witness = feasibility_cache
                .entry(c_bits)
                .or_insert_with(|| feasible_assignment(&constraints, c_bits, lib));
            if let Some(times) = witness {
                return Some((events, times.clone()));
            }
        }
    }
    None
}

/// Theory check for the brute-force oracle: positive literals stay, negative
/// ones are complemented (with both orders tried for negated equalities).
fn feasible_assignment(
    constraints: &[TimeConstraint],
    c_bits: u64,
    lib: &RuleLibrary,
) -> Option<BTreeMap<TimestampVar, Rational>> {
    fn build(
        constraints: &[TimeConstraint],
        c_bits: u64,
        diseq_dirs: u64,
        lib: &RuleLibrary,
    ) -> Option<BTreeMap<TimestampVar, Rational>> {
        let mut system = Vec::new();
        let mut diseq_seen = 0;
        for (i, c) in constraints.iter().enumerate() {
            if c_bits >> i & 1 == 1 {
                system.push(c.clone());
            } else {
                let cmp = match c.cmp {
                    Comparator::Lt => Comparator::Ge,
                    Comparator::Le => Comparator::Gt,
                    Comparator::Gt => Comparator::Le,
                    Comparator::Ge => Comparator::Lt,
                    Comparator::Eq => {
                        let dir = diseq_dirs >> diseq_seen & 1;
                        diseq_seen += 1;
                        if dir == 1 {
                            Comparator::Lt
                        } else {
                            Comparator::Gt
                        }
                    }
                };
                system.push(TimeConstraint::new(c.lhs.clone(), cmp, c.rhs.clone()));
            }
        }
        let sys = LinSystem::with_vars(system, lib.timestamps().iter().cloned());
        match solve_linear(&sys) {
            (true, witness) => witness,
            (false, _) => None,
        }
    }
    let negated_equalities = constraints
        .iter()
        .enumerate()
        .filter(|(i, c)| c.cmp == Comparator::Eq && c_bits >> i & 1 == 0)
        .count();
    for dirs in 0u64..(1u64 << negated_equalities) {
        if let Some(witness) = build(constraints, c_bits, dirs, lib) {
            return Some(witness);
        }
    }
    None
}

/// Read-once statement: every event occurs exactly once across the tree.
pub fn random_read_once(rng: &mut StdRng, max_events: usize) -> (Statement, Vec<EventId>) {
    let count = rng.gen_range(1..=max_events);
    let ids: Vec<EventId> = (0..count).map(|i| EventId(format!("e{}", i + 1))).collect();
    let mut pool = ids.clone();
    let statement = read_once_tree(rng, &mut pool);
    (statement, ids)
}

fn read_once_tree(rng: &mut StdRng, pool: &mut Vec<EventId>) -> Statement {
    if pool.len() == 1 || rng.gen_bool(0.2) {
        let id = pool.remove(rng.gen_range(0..pool.len()));
        return if pool.is_empty() || rng.gen_bool(0.8) {
            Statement::Event {
                id,
                timestamp: None,
            }
        } else {
            Statement::not(Statement::Event {
                id,
                timestamp: None,
            })
        };
    }
    let split = rng.gen_range(1..pool.len());
    let mut right_pool = pool.split_off(split);
    let left = read_once_tree(rng, pool);
    let right = read_once_tree(rng, &mut right_pool);
    match rng.gen_range(0..4) {
        0 => Statement::and(left, right),
        1 => Statement::or(left, right),
        2 => Statement::implies(left, right),
        _ => Statement::not(Statement::and(left, right)),
    }
}
