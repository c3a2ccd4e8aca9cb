//! Lexer for the `.hor` surface syntax. `#` starts a line comment; quoted
//! text admits `\"` and `\\` escapes.

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    Number,
    Text,
    Punct,
}

/// A lexed token; `lexeme` is the raw source slice at `span` (byte offsets),
/// so concatenating lexemes with the original gaps reconstructs the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: (usize, usize),
}

pub const KEYWORDS: &[&str] = &[
    "shall",
    "should",
    "forbid",
    "object",
    "action",
    "attribute",
    "value",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if b == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if b == b'"' {
            i += 1;
            loop {
                if i >= bytes.len() {
                    return Err(ParseError::at(
                        src,
                        (start, bytes.len()),
                        "unterminated string literal",
                        &["\""],
                    ));
                }
                match bytes[i] {
                    b'"' => {
                        i += 1;
                        break;
                    }
                    b'\\' => {
                        if i + 1 >= bytes.len() {
                            return Err(ParseError::at(
                                src,
                                (start, bytes.len()),
                                "unterminated escape sequence",
                                &[],
                            ));
                        }
                        i += 2;
                    }
                    _ => i += 1,
                }
            }
            tokens.push(Token {
                kind: TokenKind::Text,
                lexeme: src[start..i].to_owned(),
                span: (start, i),
            });
            continue;
        }
        if b.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Number,
                lexeme: src[start..i].to_owned(),
                span: (start, i),
            });
            continue;
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let lexeme = &src[start..i];
            let kind = if KEYWORDS.contains(&lexeme) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            tokens.push(Token {
                kind,
                lexeme: lexeme.to_owned(),
                span: (start, i),
            });
            continue;
        }
        // Two-character puncts take precedence over their prefixes.
        let two = if i + 1 < bytes.len() {
            &src[i..i + 2]
        } else {
            ""
        };
        if matches!(two, "<=" | ">=" | "->") {
            tokens.push(Token {
                kind: TokenKind::Punct,
                lexeme: two.to_owned(),
                span: (start, start + 2),
            });
            i += 2;
            continue;
        }
        if matches!(
            b,
            b'{' | b'}'
                | b'('
                | b')'
                | b'['
                | b']'
                | b'<'
                | b'>'
                | b'='
                | b'!'
                | b'&'
                | b'|'
                | b';'
                | b','
                | b':'
                | b'+'
                | b'-'
                | b'*'
                | b'/'
        ) {
            tokens.push(Token {
                kind: TokenKind::Punct,
                lexeme: src[start..start + 1].to_owned(),
                span: (start, start + 1),
            });
            i += 1;
            continue;
        }
        let ch_len = src[start..].chars().next().map_or(1, char::len_utf8);
        return Err(ParseError::at(
            src,
            (start, start + ch_len),
            &format!("unexpected character `{}`", &src[start..start + ch_len]),
            &[],
        ));
    }
    Ok(tokens)
}

/// Unescapes the content of a `Text` token (strips quotes, resolves `\"` and
/// `\\`).
pub fn unescape_text(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(next) => out.push(next),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_cover_lexemes_exactly() {
        let src = "shall {object:\"a b\" action:\"c\"} & [t1 <= 4.5]; # comment\nforbid !{action:\"x\"};";
        let tokens = tokenize(src).unwrap();
        let mut prev_end = 0;
        for t in &tokens {
            assert!(t.span.0 >= prev_end, "overlapping spans");
            assert_eq!(&src[t.span.0..t.span.1], t.lexeme);
            // Gaps carry only whitespace or comments.
            let gap = &src[prev_end..t.span.0];
            assert!(gap
                .chars()
                .all(|c| c.is_whitespace() || c == '#' || gap.contains('#')));
            prev_end = t.span.1;
        }
    }

    #[test]
    fn keywords_versus_idents() {
        let tokens = tokenize("shall t1 should value milk").unwrap();
        let kinds: Vec<TokenKind> = tokens.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Keyword,
                TokenKind::Ident,
                TokenKind::Keyword,
                TokenKind::Keyword,
                TokenKind::Ident
            ]
        );
    }

    #[test]
    fn escapes_resolve() {
        let tokens = tokenize(r#""say \"hi\" \\ there""#).unwrap();
        assert_eq!(tokens.len(), 1);
        assert_eq!(unescape_text(&tokens[0].lexeme), r#"say "hi" \ there"#);
    }

    #[test]
    fn unterminated_string_is_an_error() {
        assert!(tokenize("\"abc").is_err());
    }
}
