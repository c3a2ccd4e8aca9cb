//! Abstract syntax for regulation rules: typed rules over patterned events,
//! timestamped events, and linear timing constraints, plus the interpretation
//! types used by the qualitative and quantitative semantics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Exact rational scalar used for timing-constraint coefficients and
/// timestamp values.
pub type Rational = num_rational::BigRational;

/// Execution mode of a regulation rule: enforced, recommended, or forbidden
/// behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleType {
    Shall,
    Should,
    Forbid,
}

impl RuleType {
    pub fn keyword(self) -> &'static str {
        match self {
            RuleType::Shall => "shall",
            RuleType::Should => "should",
            RuleType::Forbid => "forbid",
        }
    }
}

impl fmt::Display for RuleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Constituent role inside a basic event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Object,
    Action,
    Attribute,
    Value,
}

impl ComponentKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ComponentKind::Object => "object",
            ComponentKind::Action => "action",
            ComponentKind::Attribute => "attribute",
            ComponentKind::Value => "value",
        }
    }
}

/// One tagged natural-language fragment of a basic event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EventComponent {
    pub kind: ComponentKind,
    text: String,
}

impl EventComponent {
    /// Builds a component, trimming surrounding whitespace. The text must be
    /// non-empty after trimming.
    pub fn new(kind: ComponentKind, text: impl Into<String>) -> Result<Self, CoreError> {
        let text = text.into().trim().to_owned();
        if text.is_empty() {
            return Err(CoreError::EmptyComponentText { kind });
        }
        Ok(EventComponent { kind, text })
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// Comparison operator used in attribute patterns and timing constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Gt => ">",
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
        }
    }

    pub fn evaluate(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Gt => lhs > rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Eq => lhs == rhs,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Syntactic pattern of a basic event. Arrangements outside the five core
/// patterns classify as `Other` and are flagged in reports rather than
/// rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EventPattern {
    ObjAct,
    ObjActObj,
    ObjAttrCmpVal,
    ActObj,
    ActAttrCmpVal,
    Other,
}

impl EventPattern {
    /// Classifies an ordered component-kind sequence with an optional
    /// comparator. Total: unknown arrangements map to `Other`.
    pub fn classify(kinds: &[ComponentKind], has_comparator: bool) -> EventPattern {
        use ComponentKind::*;
        match (kinds, has_comparator) {
            ([Object, Action], false) => EventPattern::ObjAct,
            ([Object, Action, Object], false) => EventPattern::ObjActObj,
            ([Object, Attribute, Value], true) => EventPattern::ObjAttrCmpVal,
            ([Action, Object], false) => EventPattern::ActObj,
            ([Action, Attribute, Value], true) => EventPattern::ActAttrCmpVal,
            _ => EventPattern::Other,
        }
    }

    /// Canonical wire name (`obj-act`, `obj-attr-cmp-val`, ...).
    pub fn canonical_name(self) -> &'static str {
        match self {
            EventPattern::ObjAct => "obj-act",
            EventPattern::ObjActObj => "obj-act-obj",
            EventPattern::ObjAttrCmpVal => "obj-attr-cmp-val",
            EventPattern::ActObj => "act-obj",
            EventPattern::ActAttrCmpVal => "act-attr-cmp-val",
            EventPattern::Other => "other",
        }
    }

    /// Parses a canonical wire name; anything unknown yields `None`.
    pub fn from_canonical_name(name: &str) -> Option<EventPattern> {
        match name {
            "obj-act" => Some(EventPattern::ObjAct),
            "obj-act-obj" => Some(EventPattern::ObjActObj),
            "obj-attr-cmp-val" => Some(EventPattern::ObjAttrCmpVal),
            "act-obj" => Some(EventPattern::ActObj),
            "act-attr-cmp-val" => Some(EventPattern::ActAttrCmpVal),
            "other" => Some(EventPattern::Other),
            _ => None,
        }
    }
}

/// Library-unique identifier of a basic event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EventId(pub String);

impl EventId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EventId {
    fn from(s: &str) -> Self {
        EventId(s.to_owned())
    }
}

/// Timestamp variable, interpreted over the non-negative reals. Names share
/// one library-global namespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TimestampVar(pub String);

impl TimestampVar {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TimestampVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TimestampVar {
    fn from(s: &str) -> Self {
        TimestampVar(s.to_owned())
    }
}

/// The smallest syntactic unit of a rule: a natural-language behavior
/// fragment with tagged components and a classified pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BasicEvent {
    pub id: EventId,
    pub components: Vec<EventComponent>,
    /// Comparison between the attribute and value components; carried only by
    /// the two attribute patterns (other arrangements with a comparator
    /// classify as `Other`).
    pub comparator: Option<Comparator>,
    pub pattern: EventPattern,
    pub raw_text: Option<String>,
}

impl BasicEvent {
    /// Builds an event; the pattern is derived from the component arrangement.
    pub fn new(
        id: EventId,
        components: Vec<EventComponent>,
        comparator: Option<Comparator>,
        raw_text: Option<String>,
    ) -> Result<Self, CoreError> {
        if components.is_empty() {
            return Err(CoreError::EmptyEvent { id: id.0.clone() });
        }
        let kinds: Vec<ComponentKind> = components.iter().map(|c| c.kind).collect();
        let pattern = EventPattern::classify(&kinds, comparator.is_some());
        Ok(BasicEvent {
            id,
            components,
            comparator,
            pattern,
            raw_text,
        })
    }

    /// Key used for syntactic deduplication: component kinds and
    /// whitespace-normalized texts plus the comparator.
    pub fn dedup_key(&self) -> (Vec<(ComponentKind, String)>, Option<Comparator>) {
        let comps = self
            .components
            .iter()
            .map(|c| (c.kind, normalize_ws(c.text())))
            .collect();
        (comps, self.comparator)
    }

    /// All component texts joined with single spaces, for similarity scoring.
    pub fn joined_text(&self) -> String {
        self.components
            .iter()
            .map(|c| c.text())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Collapses interior whitespace runs and trims.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Linear combination of timestamp variables with an additive constant.
/// Coefficients are exact rationals; no variable appears twice.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearExpr {
    terms: Vec<(Rational, TimestampVar)>,
    constant: Rational,
}

impl LinearExpr {
    pub fn constant(c: Rational) -> Self {
        LinearExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: TimestampVar) -> Self {
        LinearExpr {
            terms: vec![(Rational::from_integer(1.into()), v)],
            constant: Rational::zero(),
        }
    }

    /// Adds `coeff * var`, merging with an existing term for the same
    /// variable. Terms that cancel to zero are dropped.
    pub fn add_term(&mut self, coeff: Rational, var: TimestampVar) {
        if let Some((c, _)) = self.terms.iter_mut().find(|(_, v)| *v == var) {
            *c += coeff;
            self.terms.retain(|(c, _)| !c.is_zero());
        } else if !coeff.is_zero() {
            self.terms.push((coeff, var));
        }
    }

    pub fn add_constant(&mut self, c: Rational) {
        self.constant += c;
    }

    pub fn terms(&self) -> &[(Rational, TimestampVar)] {
        &self.terms
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn vars(&self) -> impl Iterator<Item = &TimestampVar> {
        self.terms.iter().map(|(_, v)| v)
    }

    /// Evaluates under a total timestamp valuation; `None` if a variable is
    /// missing.
    pub fn evaluate(&self, values: &BTreeMap<TimestampVar, Rational>) -> Option<Rational> {
        let mut acc = self.constant.clone();
        for (coeff, var) in &self.terms {
            acc += coeff * values.get(var)?;
        }
        Some(acc)
    }
}

impl Serialize for LinearExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            coeff: String,
            var: &'a str,
        }
        let mut st = serializer.serialize_struct("LinearExpr", 2)?;
        let terms: Vec<Term<'_>> = self
            .terms
            .iter()
            .map(|(c, v)| Term {
                coeff: format_rational(c),
                var: v.as_str(),
            })
            .collect();
        st.serialize_field("terms", &terms)?;
        st.serialize_field("constant", &format_rational(&self.constant))?;
        st.end()
    }
}

/// Quantifier-free linear comparison over timestamps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TimeConstraint {
    pub lhs: LinearExpr,
    pub cmp: Comparator,
    pub rhs: LinearExpr,
}

impl TimeConstraint {
    pub fn new(lhs: LinearExpr, cmp: Comparator, rhs: LinearExpr) -> Self {
        TimeConstraint { lhs, cmp, rhs }
    }

    pub fn vars(&self) -> BTreeSet<&TimestampVar> {
        self.lhs.vars().chain(self.rhs.vars()).collect()
    }

    pub fn evaluate(&self, values: &BTreeMap<TimestampVar, Rational>) -> Option<bool> {
        let l = self.lhs.evaluate(values)?;
        let r = self.rhs.evaluate(values)?;
        Some(self.cmp.evaluate(&l, &r))
    }
}

/// Statement tree of a rule. `Or` and `Implies` are kept as first-class nodes
/// and desugared on demand by the semantics module.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Statement {
    Not(Box<Statement>),
    And(Box<Statement>, Box<Statement>),
    Or(Box<Statement>, Box<Statement>),
    Implies(Box<Statement>, Box<Statement>),
    Event {
        id: EventId,
        timestamp: Option<TimestampVar>,
    },
    Constraint(TimeConstraint),
}

impl Statement {
    pub fn not(s: Statement) -> Statement {
        Statement::Not(Box::new(s))
    }

    pub fn and(a: Statement, b: Statement) -> Statement {
        Statement::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Statement, b: Statement) -> Statement {
        Statement::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Statement, b: Statement) -> Statement {
        Statement::Implies(Box::new(a), Box::new(b))
    }

    pub fn event(id: impl Into<EventId>) -> Statement {
        Statement::Event {
            id: id.into(),
            timestamp: None,
        }
    }

    pub fn timed_event(ts: impl Into<TimestampVar>, id: impl Into<EventId>) -> Statement {
        Statement::Event {
            id: id.into(),
            timestamp: Some(ts.into()),
        }
    }

    pub fn constraint(c: TimeConstraint) -> Statement {
        Statement::Constraint(c)
    }

    /// Visits every node in pre-order.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Statement)) {
        f(self);
        match self {
            Statement::Not(s) => s.visit(f),
            Statement::And(a, b) | Statement::Or(a, b) | Statement::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Statement::Event { .. } | Statement::Constraint(_) => {}
        }
    }

    /// Distinct event ids referenced, in first-occurrence order.
    pub fn event_ids(&self) -> Vec<&EventId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.visit(&mut |s| {
            if let Statement::Event { id, .. } = s {
                if seen.insert(id) {
                    out.push(id);
                }
            }
        });
        out
    }

    /// Distinct timestamp variables referenced (atom tags and constraint
    /// variables), in first-occurrence order.
    pub fn timestamp_vars(&self) -> Vec<&TimestampVar> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.visit(&mut |s| match s {
            Statement::Event {
                timestamp: Some(ts),
                ..
            } => {
                if seen.insert(ts) {
                    out.push(ts);
                }
            }
            Statement::Constraint(c) => {
                for v in c.lhs.vars().chain(c.rhs.vars()) {
                    if seen.insert(v) {
                        out.push(v);
                    }
                }
            }
            _ => {}
        });
        out
    }

    /// All constraint atoms, in first-occurrence order.
    pub fn constraints(&self) -> Vec<&TimeConstraint> {
        let mut out = Vec::new();
        self.visit(&mut |s| {
            if let Statement::Constraint(c) = s {
                out.push(c);
            }
        });
        out
    }
}

/// A typed rule: execution mode plus statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub id: String,
    pub rule_type: RuleType,
    pub statement: Statement,
}

impl Rule {
    pub fn new(id: impl Into<String>, rule_type: RuleType, statement: Statement) -> Self {
        Rule {
            id: id.into(),
            rule_type,
            statement,
        }
    }
}

/// A validated set of rules with their event and timestamp tables. The tables
/// cover exactly the identifiers referenced by the rules; immutable after
/// construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleLibrary {
    rules: Vec<Rule>,
    events: BTreeMap<EventId, BasicEvent>,
    timestamps: BTreeSet<TimestampVar>,
}

impl RuleLibrary {
    /// Validates and assembles a library. Every id referenced by a rule must
    /// resolve, ids must be unique, and the tables must not carry entries no
    /// rule references.
    pub fn new(
        rules: Vec<Rule>,
        events: Vec<BasicEvent>,
        timestamps: Vec<TimestampVar>,
    ) -> Result<Self, CoreError> {
        let mut rule_ids = BTreeSet::new();
        for r in &rules {
            if !rule_ids.insert(r.id.clone()) {
                return Err(CoreError::DuplicateId { id: r.id.clone() });
            }
        }
        let mut event_table = BTreeMap::new();
        for ev in events {
            let id = ev.id.clone();
            if event_table.insert(id.clone(), ev).is_some() {
                return Err(CoreError::DuplicateId { id: id.0 });
            }
        }
        let mut ts_table = BTreeSet::new();
        for ts in timestamps {
            if !ts_table.insert(ts.clone()) {
                return Err(CoreError::DuplicateId { id: ts.0 });
            }
        }

        let mut used_events = BTreeSet::new();
        let mut used_ts = BTreeSet::new();
        for r in &rules {
            for id in r.statement.event_ids() {
                if !event_table.contains_key(id) {
                    return Err(CoreError::DanglingReference {
                        name: id.0.clone(),
                    });
                }
                used_events.insert(id.clone());
            }
            for ts in r.statement.timestamp_vars() {
                if !ts_table.contains(ts) {
                    return Err(CoreError::DanglingReference {
                        name: ts.0.clone(),
                    });
                }
                used_ts.insert(ts.clone());
            }
        }
        for id in event_table.keys() {
            if !used_events.contains(id) {
                return Err(CoreError::UnreferencedDefinition {
                    name: id.0.clone(),
                });
            }
        }
        for ts in &ts_table {
            if !used_ts.contains(ts) {
                return Err(CoreError::UnreferencedDefinition {
                    name: ts.0.clone(),
                });
            }
        }

        Ok(RuleLibrary {
            rules,
            events: event_table,
            timestamps: ts_table,
        })
    }

    pub fn empty() -> Self {
        RuleLibrary {
            rules: Vec::new(),
            events: BTreeMap::new(),
            timestamps: BTreeSet::new(),
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn events(&self) -> &BTreeMap<EventId, BasicEvent> {
        &self.events
    }

    pub fn event(&self, id: &EventId) -> Option<&BasicEvent> {
        self.events.get(id)
    }

    pub fn timestamps(&self) -> &BTreeSet<TimestampVar> {
        &self.timestamps
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.rules.iter().map(|r| &r.statement)
    }
}

/// Boolean/real interpretation for the qualitative semantics. Timestamps are
/// exact rationals so solver witnesses re-check exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualInterpretation {
    pub event_vals: BTreeMap<EventId, bool>,
    pub time_vals: BTreeMap<TimestampVar, Rational>,
}

impl QualInterpretation {
    pub fn new(
        event_vals: BTreeMap<EventId, bool>,
        time_vals: BTreeMap<TimestampVar, Rational>,
    ) -> Result<Self, CoreError> {
        for (ts, v) in &time_vals {
            if v.is_negative() {
                return Err(CoreError::NegativeTimestamp {
                    name: ts.0.clone(),
                    value: format_rational(v),
                });
            }
        }
        Ok(QualInterpretation {
            event_vals,
            time_vals,
        })
    }
}

impl Serialize for QualInterpretation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("QualInterpretation", 2)?;
        let events: BTreeMap<&str, bool> = self
            .event_vals
            .iter()
            .map(|(k, v)| (k.as_str(), *v))
            .collect();
        let times: BTreeMap<&str, String> = self
            .time_vals
            .iter()
            .map(|(k, v)| (k.as_str(), format_rational(v)))
            .collect();
        st.serialize_field("events", &events)?;
        st.serialize_field("timestamps", &times)?;
        st.end()
    }
}

/// Probability/real interpretation for the quantitative semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantInterpretation {
    pub event_probs: BTreeMap<EventId, f64>,
    pub time_vals: BTreeMap<TimestampVar, Rational>,
}

impl QuantInterpretation {
    pub fn new(
        event_probs: BTreeMap<EventId, f64>,
        time_vals: BTreeMap<TimestampVar, Rational>,
    ) -> Result<Self, CoreError> {
        for (id, p) in &event_probs {
            if !(0.0..=1.0).contains(p) || p.is_nan() {
                return Err(CoreError::ProbabilityOutOfRange {
                    id: id.0.clone(),
                    value: *p,
                });
            }
        }
        for (ts, v) in &time_vals {
            if v.is_negative() {
                return Err(CoreError::NegativeTimestamp {
                    name: ts.0.clone(),
                    value: format_rational(v),
                });
            }
        }
        Ok(QuantInterpretation {
            event_probs,
            time_vals,
        })
    }
}

impl Serialize for QuantInterpretation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("QuantInterpretation", 2)?;
        let events: BTreeMap<&str, f64> = self
            .event_probs
            .iter()
            .map(|(k, v)| (k.as_str(), *v))
            .collect();
        let times: BTreeMap<&str, String> = self
            .time_vals
            .iter()
            .map(|(k, v)| (k.as_str(), format_rational(v)))
            .collect();
        st.serialize_field("events", &events)?;
        st.serialize_field("timestamps", &times)?;
        st.end()
    }
}

/// Validation errors raised while constructing core values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("dangling reference to `{name}`")]
    DanglingReference { name: String },
    #[error("duplicate identifier `{id}`")]
    DuplicateId { id: String },
    #[error("table entry `{name}` is not referenced by any rule")]
    UnreferencedDefinition { name: String },
    #[error("empty text for {kind:?} component")]
    EmptyComponentText { kind: ComponentKind },
    #[error("event `{id}` has no components")]
    EmptyEvent { id: String },
    #[error("probability {value} for `{id}` is outside [0, 1]")]
    ProbabilityOutOfRange { id: String, value: f64 },
    #[error("timestamp `{name}` has negative value {value}")]
    NegativeTimestamp { name: String, value: String },
}

/// Formats a rational canonically: integers bare, terminating decimals in
/// decimal form (`3.5`), everything else as `p/q`.
pub fn format_rational(r: &Rational) -> String {
    let numer = r.numer();
    let denom = r.denom();
    if denom.is_zero() {
        return format!("{numer}/0");
    }
    if denom == &BigInt::from(1) {
        return numer.to_string();
    }
    // A fraction terminates in decimal iff the denominator is 2^a * 5^b.
    let mut d = denom.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d != BigInt::from(1) {
        return format!("{numer}/{denom}");
    }
    let places = twos.max(fives);
    let scale = BigInt::from(10).pow(places);
    let scaled = numer * &scale / denom;
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = if digits.len() <= places as usize {
        format!("{:0>width$}", digits, width = places as usize + 1)
    } else {
        digits
    };
    let split = digits.len() - places as usize;
    let (int_part, frac_part) = digits.split_at(split);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Parses an unsigned decimal literal (`45`, `3.5`) into an exact rational.
pub fn rational_from_decimal(s: &str) -> Option<Rational> {
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10).pow(frac_part.len() as u32);
    Some(Rational::new(numer, denom))
}

/// Parses a signed rational in decimal (`-3.5`) or fraction (`7/2`) form.
pub fn rational_from_str(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = match body.split_once('/') {
        Some((n, d)) => {
            let n = rational_from_decimal(n.trim())?;
            let d = rational_from_decimal(d.trim())?;
            if d.is_zero() {
                return None;
            }
            n / d
        }
        None => rational_from_decimal(body)?,
    };
    Some(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj_act(id: &str, obj: &str, act: &str) -> BasicEvent {
        BasicEvent::new(
            EventId::from(id),
            vec![
                EventComponent::new(ComponentKind::Object, obj).unwrap(),
                EventComponent::new(ComponentKind::Action, act).unwrap(),
            ],
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn empty_library_has_no_rules() {
        let lib = RuleLibrary::new(vec![], vec![], vec![]).unwrap();
        assert_eq!(lib.rules().len(), 0);
    }

    #[test]
    fn library_keeps_rule_order() {
        let e1 = obj_act("e1", "employees", "wash hands");
        let rules = vec![
            Rule::new("r1", RuleType::Shall, Statement::event("e1")),
            Rule::new("r2", RuleType::Forbid, Statement::not(Statement::event("e1"))),
        ];
        let lib = RuleLibrary::new(rules.clone(), vec![e1], vec![]).unwrap();
        assert_eq!(lib.rules(), &rules[..]);
    }

    #[test]
    fn dangling_event_reference_rejected() {
        let rules = vec![Rule::new("r1", RuleType::Shall, Statement::event("e9"))];
        let err = RuleLibrary::new(rules, vec![], vec![]).unwrap_err();
        assert_eq!(
            err,
            CoreError::DanglingReference {
                name: "e9".to_owned()
            }
        );
    }

    #[test]
    fn unreferenced_event_rejected() {
        let e1 = obj_act("e1", "a", "b");
        let err = RuleLibrary::new(vec![], vec![e1], vec![]).unwrap_err();
        assert!(matches!(err, CoreError::UnreferencedDefinition { .. }));
    }

    #[test]
    fn duplicate_rule_id_rejected() {
        let e1 = obj_act("e1", "a", "b");
        let rules = vec![
            Rule::new("r1", RuleType::Shall, Statement::event("e1")),
            Rule::new("r1", RuleType::Shall, Statement::event("e1")),
        ];
        let err = RuleLibrary::new(rules, vec![e1], vec![]).unwrap_err();
        assert!(matches!(err, CoreError::DuplicateId { .. }));
    }

    #[test]
    fn quant_interpretation_rejects_bad_probability() {
        let mut probs = BTreeMap::new();
        probs.insert(EventId::from("e1"), 1.5);
        assert!(QuantInterpretation::new(probs, BTreeMap::new()).is_err());
    }

    #[test]
    fn quant_interpretation_rejects_negative_timestamp() {
        let mut times = BTreeMap::new();
        times.insert(TimestampVar::from("t1"), rational_from_str("-1").unwrap());
        assert!(QuantInterpretation::new(BTreeMap::new(), times).is_err());
    }

    #[test]
    fn classify_core_patterns() {
        use ComponentKind::*;
        assert_eq!(
            EventPattern::classify(&[Object, Action], false),
            EventPattern::ObjAct
        );
        assert_eq!(
            EventPattern::classify(&[Object, Action, Object], false),
            EventPattern::ObjActObj
        );
        assert_eq!(
            EventPattern::classify(&[Object, Attribute, Value], true),
            EventPattern::ObjAttrCmpVal
        );
        assert_eq!(
            EventPattern::classify(&[Action, Object], false),
            EventPattern::ActObj
        );
        assert_eq!(
            EventPattern::classify(&[Action, Attribute, Value], true),
            EventPattern::ActAttrCmpVal
        );
        assert_eq!(
            EventPattern::classify(&[Value], false),
            EventPattern::Other
        );
        // Comparator in a non-attribute arrangement falls through to Other.
        assert_eq!(
            EventPattern::classify(&[Object, Action], true),
            EventPattern::Other
        );
    }

    #[test]
    fn rational_formatting() {
        let cases = [
            ("45", "45"),
            ("3.5", "3.5"),
            ("3.50", "3.5"),
            ("0.25", "0.25"),
            ("-0.5", "-0.5"),
            ("1/3", "1/3"),
            ("-7/3", "-7/3"),
            ("0", "0"),
        ];
        for (input, expected) in cases {
            let r = rational_from_str(input).unwrap();
            assert_eq!(format_rational(&r), expected, "input {input}");
        }
    }

    #[test]
    fn linear_expr_merges_duplicate_vars() {
        let t1 = TimestampVar::from("t1");
        let mut e = LinearExpr::var(t1.clone());
        e.add_term(Rational::from_integer(2.into()), t1.clone());
        assert_eq!(e.terms().len(), 1);
        assert_eq!(e.terms()[0].0, Rational::from_integer(3.into()));
        e.add_term(Rational::from_integer((-3).into()), t1);
        assert!(e.terms().is_empty());
    }
}
