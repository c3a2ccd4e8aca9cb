//! Concrete surface syntax: lexer, recursive-descent parser, canonical
//! pretty-printer, and the bottom-level pattern classifier.
//!
//! The grammar, with precedence `!` > `&` > `|` > `->` (`&`/`|` left-, `->`
//! right-associative):
//!
//! ```text
//! library    := rule*
//! rule       := TYPE statement ';'
//! TYPE       := 'shall' | 'should' | 'forbid'
//! statement  := implication
//! implication := disjunction ('->' implication)?
//! disjunction := conjunction ('|' conjunction)*
//! conjunction := negation ('&' negation)*
//! negation   := '!' negation | atom
//! atom       := '(' statement ')' | timed_event | event | time_constraint
//! timed_event := '<' IDENT ',' event '>'
//! event      := '{' component+ (CMP component)? '}'
//! component  := KIND ':' QUOTED_TEXT          KIND in {object, action, attribute, value}
//! time_constraint := '[' lin_expr CMP lin_expr ']'
//! lin_expr   := term (('+'|'-') term)*
//! term       := number | IDENT | number '*' IDENT
//! number     := NUMBER ('/' NUMBER)?
//! CMP        := '<' | '>' | '<=' | '>=' | '='
//! ```
//!
//! `#` starts a line comment. Numbers are exact decimal rationals; the
//! fraction form covers rationals with no terminating decimal expansion.

mod lexer;
mod printer;

pub use lexer::{tokenize, unescape_text, Token, TokenKind};
pub use printer::{print_event, print_library, print_rule, print_statement};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{
    rational_from_decimal, BasicEvent, Comparator, ComponentKind, CoreError, EventComponent,
    EventId, EventPattern, LinearExpr, Rational, Rule, RuleLibrary, RuleType, Statement,
    TimeConstraint, TimestampVar,
};

/// Syntax error with source location.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{message} at {line}:{col}")]
pub struct ParseError {
    pub message: String,
    /// Byte-offset half-open span into the source.
    pub span: (usize, usize),
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
}

impl ParseError {
    fn at(src: &str, span: (usize, usize), message: &str, expected: &[&str]) -> Self {
        let clamped = span.0.min(src.len());
        let prefix = &src[..clamped];
        let line = prefix.matches('\n').count() + 1;
        let col = prefix
            .rsplit_once('\n')
            .map_or(prefix, |(_, tail)| tail)
            .chars()
            .count()
            + 1;
        ParseError {
            message: message.to_owned(),
            span,
            line,
            col,
            expected: expected.iter().map(|s| (*s).to_owned()).collect(),
        }
    }
}

/// Classifies an ordered component-kind sequence (with an optional
/// comparator) into one of the five core patterns, or `Other`.
pub fn classify_pattern(kinds: &[ComponentKind], comparator: Option<Comparator>) -> EventPattern {
    EventPattern::classify(kinds, comparator.is_some())
}

/// A single parsed rule together with the event and timestamp tables it
/// references.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRule {
    pub rule: Rule,
    pub events: Vec<BasicEvent>,
    pub timestamps: Vec<TimestampVar>,
}

impl ParsedRule {
    pub fn into_library(self) -> Result<RuleLibrary, CoreError> {
        RuleLibrary::new(vec![self.rule], self.events, self.timestamps)
    }
}

/// Parses a single rule declaration (trailing `;` optional).
pub fn parse_rule(src: &str) -> Result<ParsedRule, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser::new(src, tokens);
    let (rule_type, statement) = p.rule_body()?;
    p.eat_punct(";");
    p.expect_eof()?;
    let rule = Rule::new("r1", rule_type, statement);
    Ok(ParsedRule {
        rule,
        events: p.events,
        timestamps: p.timestamps,
    })
}

/// Parses a library: zero or more `;`-terminated rules. Syntactically
/// identical event bodies share one id (`e1`, `e2`, ... in first-occurrence
/// order); timestamps are registered on first mention.
pub fn parse_library(src: &str) -> Result<RuleLibrary, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser::new(src, tokens);
    let mut rules = Vec::new();
    while !p.at_eof() {
        let (rule_type, statement) = p.rule_body()?;
        p.expect_punct(";")?;
        rules.push(Rule::new(
            format!("r{}", rules.len() + 1),
            rule_type,
            statement,
        ));
    }
    RuleLibrary::new(rules, p.events, p.timestamps).map_err(|e| {
        // The parser only emits resolvable references, so this is unreachable
        // for parser-generated ids; surface it as a located error regardless.
        ParseError::at(src, (0, 0), &e.to_string(), &[])
    })
}

struct Parser<'s> {
    src: &'s str,
    tokens: Vec<Token>,
    pos: usize,
    events: Vec<BasicEvent>,
    dedup: BTreeMap<(Vec<(ComponentKind, String)>, Option<Comparator>), EventId>,
    timestamps: Vec<TimestampVar>,
}

impl<'s> Parser<'s> {
    fn new(src: &'s str, tokens: Vec<Token>) -> Self {
        Parser {
            src,
            tokens,
            pos: 0,
            events: Vec::new(),
            dedup: BTreeMap::new(),
            timestamps: Vec::new(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn at_eof(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eof_span(&self) -> (usize, usize) {
        (self.src.len(), self.src.len())
    }

    fn error(&self, message: &str, expected: &[&str]) -> ParseError {
        let span = self.peek().map_or(self.eof_span(), |t| t.span);
        ParseError::at(self.src, span, message, expected)
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(t) if t.kind == TokenKind::Punct && t.lexeme == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<Token, ParseError> {
        if self.is_punct(p) {
            Ok(self.bump().unwrap())
        } else {
            Err(self.error(&format!("expected `{p}`"), &[p]))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error("expected end of input", &[]))
        }
    }

    fn rule_body(&mut self) -> Result<(RuleType, Statement), ParseError> {
        let t = self
            .bump()
            .ok_or_else(|| self.error("expected rule type", &["shall", "should", "forbid"]))?;
        let rule_type = match (t.kind, t.lexeme.as_str()) {
            (TokenKind::Keyword, "shall") => RuleType::Shall,
            (TokenKind::Keyword, "should") => RuleType::Should,
            (TokenKind::Keyword, "forbid") => RuleType::Forbid,
            _ => {
                return Err(ParseError::at(
                    self.src,
                    t.span,
                    &format!("expected rule type, found `{}`", t.lexeme),
                    &["shall", "should", "forbid"],
                ))
            }
        };
        let statement = self.statement()?;
        Ok((rule_type, statement))
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        self.implication()
    }

    fn implication(&mut self) -> Result<Statement, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat_punct("->") {
            let rhs = self.implication()?;
            Ok(Statement::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Statement, ParseError> {
        let mut acc = self.conjunction()?;
        while self.eat_punct("|") {
            let rhs = self.conjunction()?;
            acc = Statement::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Statement, ParseError> {
        let mut acc = self.negation()?;
        while self.eat_punct("&") {
            let rhs = self.negation()?;
            acc = Statement::and(acc, rhs);
        }
        Ok(acc)
    }

    fn negation(&mut self) -> Result<Statement, ParseError> {
        if self.eat_punct("!") {
            Ok(Statement::not(self.negation()?))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Statement, ParseError> {
        if self.eat_punct("(") {
            let s = self.statement()?;
            self.expect_punct(")")?;
            return Ok(s);
        }
        if self.is_punct("<") {
            return self.timed_event();
        }
        if self.is_punct("{") {
            let id = self.event()?;
            return Ok(Statement::Event {
                id,
                timestamp: None,
            });
        }
        if self.is_punct("[") {
            return self.time_constraint();
        }
        Err(self.error(
            "expected a statement atom",
            &["(", "<", "{", "[", "!"],
        ))
    }

    fn timed_event(&mut self) -> Result<Statement, ParseError> {
        self.expect_punct("<")?;
        let ts = self.ident("timestamp name")?;
        let var = self.register_timestamp(ts);
        self.expect_punct(",")?;
        let id = self.event()?;
        self.expect_punct(">")?;
        Ok(Statement::Event {
            id,
            timestamp: Some(var),
        })
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => Ok(self.bump().unwrap().lexeme),
            _ => Err(self.error(&format!("expected {what}"), &["identifier"])),
        }
    }

    fn register_timestamp(&mut self, name: String) -> TimestampVar {
        let var = TimestampVar(name);
        if !self.timestamps.contains(&var) {
            self.timestamps.push(var.clone());
        }
        var
    }

    fn comparator(&mut self) -> Option<Comparator> {
        let cmp = match self.peek() {
            Some(t) if t.kind == TokenKind::Punct => match t.lexeme.as_str() {
                "<" => Comparator::Lt,
                ">" => Comparator::Gt,
                "<=" => Comparator::Le,
                ">=" => Comparator::Ge,
                "=" => Comparator::Eq,
                _ => return None,
            },
            _ => return None,
        };
        self.pos += 1;
        Some(cmp)
    }

    fn event(&mut self) -> Result<EventId, ParseError> {
        self.expect_punct("{")?;
        let mut components = Vec::new();
        let mut comparator = None;
        loop {
            if self.is_punct("}") {
                break;
            }
            if comparator.is_none() {
                if let Some(cmp) = self.comparator() {
                    comparator = Some(cmp);
                    components.push(self.component()?);
                    break;
                }
            }
            components.push(self.component()?);
        }
        let close = self.expect_punct("}")?;
        if components.is_empty() {
            return Err(ParseError::at(
                self.src,
                close.span,
                "event requires at least one component",
                &["object", "action", "attribute", "value"],
            ));
        }
        Ok(self.register_event(components, comparator))
    }

    fn component(&mut self) -> Result<EventComponent, ParseError> {
        let t = self
            .bump()
            .ok_or_else(|| self.error("expected component kind", &["object", "action", "attribute", "value"]))?;
        let kind = match (t.kind, t.lexeme.as_str()) {
            (TokenKind::Keyword, "object") => ComponentKind::Object,
            (TokenKind::Keyword, "action") => ComponentKind::Action,
            (TokenKind::Keyword, "attribute") => ComponentKind::Attribute,
            (TokenKind::Keyword, "value") => ComponentKind::Value,
            _ => {
                return Err(ParseError::at(
                    self.src,
                    t.span,
                    &format!("expected component kind, found `{}`", t.lexeme),
                    &["object", "action", "attribute", "value"],
                ))
            }
        };
        self.expect_punct(":")?;
        let text_tok = match self.peek() {
            Some(t) if t.kind == TokenKind::Text => self.bump().unwrap(),
            _ => return Err(self.error("expected quoted text", &["\"...\""])),
        };
        let text = unescape_text(&text_tok.lexeme);
        EventComponent::new(kind, text)
            .map_err(|e| ParseError::at(self.src, text_tok.span, &e.to_string(), &[]))
    }

    fn register_event(
        &mut self,
        components: Vec<EventComponent>,
        comparator: Option<Comparator>,
    ) -> EventId {
        let probe = BasicEvent::new(EventId(String::new()), components, comparator, None)
            .expect("components validated by the grammar");
        let key = probe.dedup_key();
        if let Some(id) = self.dedup.get(&key) {
            return id.clone();
        }
        let id = EventId(format!("e{}", self.events.len() + 1));
        self.dedup.insert(key, id.clone());
        self.events.push(BasicEvent {
            id: id.clone(),
            ..probe
        });
        id
    }

    fn time_constraint(&mut self) -> Result<Statement, ParseError> {
        self.expect_punct("[")?;
        let lhs = self.linear_expr()?;
        let cmp = self
            .comparator()
            .ok_or_else(|| self.error("expected comparator", &["<", ">", "<=", ">=", "="]))?;
        let rhs = self.linear_expr()?;
        self.expect_punct("]")?;
        Ok(Statement::constraint(TimeConstraint::new(lhs, cmp, rhs)))
    }

    fn linear_expr(&mut self) -> Result<LinearExpr, ParseError> {
        let mut expr = LinearExpr::constant(Rational::from_integer(0.into()));
        self.term(&mut expr, false)?;
        loop {
            if self.eat_punct("+") {
                self.term(&mut expr, false)?;
            } else if self.eat_punct("-") {
                self.term(&mut expr, true)?;
            } else {
                break;
            }
        }
        Ok(expr)
    }

    fn term(&mut self, expr: &mut LinearExpr, negate: bool) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Number => {
                let mut value = self.number()?;
                if negate {
                    value = -value;
                }
                if self.eat_punct("*") {
                    let name = self.ident("timestamp name")?;
                    let var = self.register_timestamp(name);
                    expr.add_term(value, var);
                } else {
                    expr.add_constant(value);
                }
                Ok(())
            }
            Some(t) if t.kind == TokenKind::Ident => {
                let name = self.ident("timestamp name")?;
                let var = self.register_timestamp(name);
                let coeff = Rational::from_integer(if negate { (-1).into() } else { 1.into() });
                expr.add_term(coeff, var);
                Ok(())
            }
            _ => Err(self.error("expected a term", &["number", "identifier"])),
        }
    }

    fn number(&mut self) -> Result<Rational, ParseError> {
        let t = self.bump().expect("caller checked a number is next");
        let numer = rational_from_decimal(&t.lexeme)
            .ok_or_else(|| ParseError::at(self.src, t.span, "malformed number", &[]))?;
        if self.eat_punct("/") {
            let d = match self.peek() {
                Some(t) if t.kind == TokenKind::Number => self.bump().unwrap(),
                _ => return Err(self.error("expected denominator", &["number"])),
            };
            let denom = rational_from_decimal(&d.lexeme)
                .ok_or_else(|| ParseError::at(self.src, d.span, "malformed number", &[]))?;
            if denom == Rational::from_integer(0.into()) {
                return Err(ParseError::at(self.src, d.span, "zero denominator", &[]));
            }
            Ok(numer / denom)
        } else {
            Ok(numer)
        }
    }
}
