//! Event abstraction: merges semantically correlated natural-language events
//! into symbolic proposition classes while preserving the two correlation
//! kinds (equality and negation) through a polarity-aware union-find.

mod parity_dsu;
mod providers;

pub use providers::{
    lexical_judge, lexical_similarity, tokenize, EmbeddingClientProvider, LexicalProvider,
    ProviderError, SimilarityJudgment, SimilarityProvider, SimilarityRelation,
    TableDrivenProvider, TablePair,
};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use parity_dsu::ParityDsu;

use crate::ast::{CoreError, EventId, RuleLibrary, Statement};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbstractionError {
    #[error("threshold {value} is outside [0, 1]")]
    InvalidThreshold { value: f64 },
    #[error("accepted judgments make `{a}` both equal and negated relative to `{b}`; cycle: {}", trace.join(", "))]
    PolarityConflict {
        a: String,
        b: String,
        trace: Vec<String>,
    },
    #[error("abstraction does not cover: {}", missing.join(", "))]
    IncompleteAbstraction { missing: Vec<String> },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Library(#[from] CoreError),
}

/// Signed partition of a library's events. Each event maps to a proposition
/// class and a polarity relative to the class representative; every
/// representative has polarity +1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbstractionResult {
    class_of: BTreeMap<EventId, (usize, i8)>,
    representatives: Vec<EventId>,
}

impl AbstractionResult {
    /// Identity abstraction: every event its own class, polarity +1. Ids are
    /// assigned in id order.
    pub fn identity(ids: impl IntoIterator<Item = EventId>) -> Self {
        let mut ids: Vec<EventId> = ids.into_iter().collect();
        ids.sort();
        ids.dedup();
        let class_of = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), (i, 1)))
            .collect();
        AbstractionResult {
            class_of,
            representatives: ids,
        }
    }

    pub fn class_count(&self) -> usize {
        self.representatives.len()
    }

    /// Class index and polarity (+1 or -1) of an event.
    pub fn class_of(&self, id: &EventId) -> Option<(usize, i8)> {
        self.class_of.get(id).copied()
    }

    pub fn representative(&self, class: usize) -> &EventId {
        &self.representatives[class]
    }

    pub fn classes(&self) -> &BTreeMap<EventId, (usize, i8)> {
        &self.class_of
    }

    /// Members of each class with their polarities, in id order.
    pub fn members(&self) -> Vec<Vec<(EventId, i8)>> {
        let mut out = vec![Vec::new(); self.representatives.len()];
        for (id, (class, polarity)) in &self.class_of {
            out[*class].push((id.clone(), *polarity));
        }
        out
    }
}

/// Accepted judgment edge, kept for conflict traces.
struct Edge {
    a: usize,
    b: usize,
    relation: SimilarityRelation,
}

/// Consults the provider for every unordered event pair (lexicographic by
/// id), accepts `Equivalent`/`Negation` judgments scoring at least
/// `threshold`, and merges them with parity. Fails on judgment sets that make
/// some event both equal and negated relative to another.
pub fn abstract_events(
    lib: &RuleLibrary,
    provider: &dyn SimilarityProvider,
    threshold: f64,
) -> Result<AbstractionResult, AbstractionError> {
    if !(0.0..=1.0).contains(&threshold) || threshold.is_nan() {
        return Err(AbstractionError::InvalidThreshold { value: threshold });
    }
    let ids: Vec<&EventId> = lib.events().keys().collect();
    let mut dsu = ParityDsu::new(ids.len());
    let mut edges: Vec<Edge> = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let judgment = provider.judge(&lib.events()[ids[i]], &lib.events()[ids[j]])?;
            let parity = match judgment.relation {
                SimilarityRelation::Equivalent => 0,
                SimilarityRelation::Negation => 1,
                SimilarityRelation::Unrelated => continue,
            };
            if judgment.score < threshold {
                continue;
            }
            if dsu.union(i, j, parity).is_err() {
                let mut trace = trace_path(&edges, &ids, i, j);
                trace.push(describe_edge(ids[i], ids[j], judgment.relation));
                return Err(AbstractionError::PolarityConflict {
                    a: ids[i].0.clone(),
                    b: ids[j].0.clone(),
                    trace,
                });
            }
            edges.push(Edge {
                a: i,
                b: j,
                relation: judgment.relation,
            });
        }
    }

    // Classes in first-occurrence order over id-sorted events; the first
    // member of each class is its representative.
    let mut root_to_class: BTreeMap<usize, (usize, u8)> = BTreeMap::new();
    let mut representatives = Vec::new();
    let mut class_of = BTreeMap::new();
    for (idx, id) in ids.iter().enumerate() {
        let (root, parity) = dsu.find(idx);
        let (class, rep_parity) = *root_to_class.entry(root).or_insert_with(|| {
            representatives.push((*id).clone());
            (representatives.len() - 1, parity)
        });
        let polarity = if parity ^ rep_parity == 0 { 1 } else { -1 };
        class_of.insert((*id).clone(), (class, polarity));
    }
    Ok(AbstractionResult {
        class_of,
        representatives,
    })
}

fn describe_edge(a: &EventId, b: &EventId, relation: SimilarityRelation) -> String {
    let middle = match relation {
        SimilarityRelation::Equivalent => "=",
        SimilarityRelation::Negation => "=!",
        SimilarityRelation::Unrelated => "?",
    };
    format!("{a} {middle} {b}")
}

/// Shortest accepted-edge path between two events (breadth-first); with the
/// conflicting judgment appended it exhibits the odd cycle.
fn trace_path(edges: &[Edge], ids: &[&EventId], from: usize, to: usize) -> Vec<String> {
    let mut adjacency = vec![Vec::new(); ids.len()];
    for (k, e) in edges.iter().enumerate() {
        adjacency[e.a].push((e.b, k));
        adjacency[e.b].push((e.a, k));
    }
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; ids.len()];
    let mut visited = vec![false; ids.len()];
    let mut queue = std::collections::VecDeque::from([from]);
    visited[from] = true;
    while let Some(cur) = queue.pop_front() {
        if cur == to {
            break;
        }
        for &(next, edge_idx) in &adjacency[cur] {
            if !visited[next] {
                visited[next] = true;
                prev[next] = Some((cur, edge_idx));
                queue.push_back(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = to;
    while let Some((parent, edge_idx)) = prev[cur] {
        path.push(edge_idx);
        cur = parent;
    }
    path.reverse();
    path.iter()
        .map(|&k| {
            let e = &edges[k];
            describe_edge(ids[e.a], ids[e.b], e.relation)
        })
        .collect()
}

/// Rewrites every event atom to its class representative (negated when the
/// polarity is -1) and shrinks the event table to the representatives.
/// Statements are otherwise unchanged; atom timestamps are kept.
pub fn apply_abstraction(
    lib: &RuleLibrary,
    abstraction: &AbstractionResult,
) -> Result<RuleLibrary, AbstractionError> {
    let missing: Vec<String> = lib
        .events()
        .keys()
        .filter(|id| abstraction.class_of(id).is_none())
        .map(|id| id.0.clone())
        .collect();
    if !missing.is_empty() {
        return Err(AbstractionError::IncompleteAbstraction { missing });
    }

    let rules = lib
        .rules()
        .iter()
        .map(|r| {
            crate::ast::Rule::new(
                r.id.clone(),
                r.rule_type,
                rewrite(&r.statement, abstraction),
            )
        })
        .collect::<Vec<_>>();

    let mut events = Vec::new();
    let mut missing_reps = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for id in lib.events().keys() {
        let (class, _) = abstraction.class_of(id).expect("coverage checked above");
        let rep = abstraction.representative(class);
        if seen.insert(rep.clone()) {
            match lib.event(rep) {
                Some(ev) => events.push(ev.clone()),
                None => missing_reps.push(rep.0.clone()),
            }
        }
    }
    if !missing_reps.is_empty() {
        return Err(AbstractionError::IncompleteAbstraction {
            missing: missing_reps,
        });
    }

    let timestamps = lib.timestamps().iter().cloned().collect();
    Ok(RuleLibrary::new(rules, events, timestamps)?)
}

fn rewrite(s: &Statement, abstraction: &AbstractionResult) -> Statement {
    match s {
        Statement::Not(inner) => Statement::not(rewrite(inner, abstraction)),
        Statement::And(a, b) => Statement::and(rewrite(a, abstraction), rewrite(b, abstraction)),
        Statement::Or(a, b) => Statement::or(rewrite(a, abstraction), rewrite(b, abstraction)),
        Statement::Implies(a, b) => {
            Statement::implies(rewrite(a, abstraction), rewrite(b, abstraction))
        }
        Statement::Event { id, timestamp } => {
            let (class, polarity) = abstraction
                .class_of(id)
                .expect("coverage checked before rewrite");
            let atom = Statement::Event {
                id: abstraction.representative(class).clone(),
                timestamp: timestamp.clone(),
            };
            if polarity < 0 {
                Statement::not(atom)
            } else {
                atom
            }
        }
        Statement::Constraint(_) => s.clone(),
    }
}
