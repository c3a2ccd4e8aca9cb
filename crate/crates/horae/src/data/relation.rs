//! Relation strings: the letter-based formula encoding used by dataset
//! records, e.g. `A & B & (C | D)`. Letters map positionally onto the basic
//! events of a record (A is the first). Precedence follows the rule grammar:
//! `!` binds tighter than `&`, which binds tighter than `|`; the binary
//! operators are left-associative.

use crate::ast::Statement;

use super::DataError;

/// Parses a relation string over `event_count` events into a statement
/// skeleton whose atoms are the placeholder events "A", "B", ...
pub fn parse_relation(relation: &str, event_count: usize) -> Result<Statement, DataError> {
    let mut parser = RelationParser {
        chars: relation.char_indices().collect(),
        pos: 0,
        event_count,
    };
    let statement = parser.disjunction()?;
    parser.skip_ws();
    if parser.pos < parser.chars.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(statement)
}

struct RelationParser {
    chars: Vec<(usize, char)>,
    pos: usize,
    event_count: usize,
}

impl RelationParser {
    fn offset(&self) -> usize {
        self.chars
            .get(self.pos)
            .map_or_else(|| self.chars.last().map_or(0, |(o, c)| o + c.len_utf8()), |(o, _)| *o)
    }

    fn error(&self, reason: &str) -> DataError {
        DataError::RelationParseError {
            offset: self.offset(),
            reason: reason.to_owned(),
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.get(self.pos), Some((_, c)) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn disjunction(&mut self) -> Result<Statement, DataError> {
        let mut acc = self.conjunction()?;
        while self.eat('|') {
            let rhs = self.conjunction()?;
            acc = Statement::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Statement, DataError> {
        let mut acc = self.negation()?;
        while self.eat('&') {
            let rhs = self.negation()?;
            acc = Statement::and(acc, rhs);
        }
        Ok(acc)
    }

    fn negation(&mut self) -> Result<Statement, DataError> {
        if self.eat('!') {
            Ok(Statement::not(self.negation()?))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Statement, DataError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.disjunction()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(letter @ 'A'..='Z') => {
                let index = letter as usize - 'A' as usize;
                if index >= self.event_count {
                    return Err(DataError::LetterOutOfRange {
                        letter,
                        count: self.event_count,
                    });
                }
                self.pos += 1;
                Ok(Statement::event(letter.to_string().as_str()))
            }
            Some(other) => Err(self.error(&format!("unexpected character `{other}`"))),
            None => Err(self.error("unexpected end of relation")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Statement as S;

    #[test]
    fn dataset_example_parses_left_associative() {
        let s = parse_relation("A & B & (C | D)", 4).unwrap();
        assert_eq!(
            s,
            S::and(
                S::and(S::event("A"), S::event("B")),
                S::or(S::event("C"), S::event("D"))
            )
        );
    }

    #[test]
    fn single_atom() {
        assert_eq!(parse_relation("A", 1).unwrap(), S::event("A"));
    }

    #[test]
    fn letter_out_of_range() {
        let err = parse_relation("A & E", 4).unwrap_err();
        assert_eq!(
            err,
            DataError::LetterOutOfRange {
                letter: 'E',
                count: 4
            }
        );
    }

    #[test]
    fn negation_and_nesting() {
        let s = parse_relation("!(A | !B)", 2).unwrap();
        assert_eq!(
            s,
            S::not(S::or(S::event("A"), S::not(S::event("B"))))
        );
    }

    #[test]
    fn malformed_inputs_error() {
        assert!(matches!(
            parse_relation("A &", 2),
            Err(DataError::RelationParseError { .. })
        ));
        assert!(matches!(
            parse_relation("A b", 2),
            Err(DataError::RelationParseError { .. })
        ));
        assert!(matches!(
            parse_relation("(A", 2),
            Err(DataError::RelationParseError { .. })
        ));
        assert!(matches!(
            parse_relation("", 1),
            Err(DataError::RelationParseError { .. })
        ));
    }
}
