//! Line lexer shared by the `.pog` model syntax and scenario files.

use crate::diagnostic::{Code, Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Decimal literal; `None` when it does not fit in a `u64`.
    Int(Option<u64>),
    Str(String),
    Arrow,
    Squiggle,
    LBracket,
    RBracket,
    Comma,
    Eq,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(_) => "integer".into(),
            Tok::Str(_) => "string".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Squiggle => "`~>`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Splits one line into tokens, stopping at a `#` comment. Columns are
/// 1-based character offsets.
pub(crate) fn lex_line(line: &str, line_no: usize) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let span = |start: usize, end: usize| Span::new(line_no, start + 1, end - start);
    let err = |start: usize, end: usize, msg: String| Diagnostic::new(Code::Syntax, msg, Some(span(start, end.max(start + 1))));

    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '[' => {
                i += 1;
                Tok::LBracket
            }
            ']' => {
                i += 1;
                Tok::RBracket
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '=' => {
                i += 1;
                Tok::Eq
            }
            '-' | '~' if chars.get(i + 1) == Some(&'>') => {
                i += 2;
                if c == '-' {
                    Tok::Arrow
                } else {
                    Tok::Squiggle
                }
            }
            '"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    let Some(&c) = chars.get(i) else {
                        return Err(err(start, chars.len(), "unterminated string".into()));
                    };
                    i += 1;
                    match c {
                        '"' => break,
                        '\\' => {
                            let esc = chars.get(i).copied();
                            i += 1;
                            match esc {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some('r') => s.push('\r'),
                                Some('u') if chars.get(i) == Some(&'{') => {
                                    let close = chars[i..].iter().position(|&c| c == '}').map(|p| i + p);
                                    let decoded = close.and_then(|close| {
                                        let hex: String = chars[i + 1..close].iter().collect();
                                        u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32).map(|c| (c, close))
                                    });
                                    match decoded {
                                        Some((c, close)) => {
                                            s.push(c);
                                            i = close + 1;
                                        }
                                        None => return Err(err(i - 2, i, "bad unicode escape".into())),
                                    }
                                }
                                _ => return Err(err(i - 2, i.min(chars.len()), "unknown escape sequence".into())),
                            }
                        }
                        c => s.push(c),
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_digit() => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                Tok::Int(digits.parse().ok())
            }
            c if c.is_ascii_alphabetic() => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            other => return Err(err(start, start + 1, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, span: span(start, i) });
    }
    Ok(out)
}

/// Span covering the first through last token.
pub(crate) fn statement_span(tokens: &[Token]) -> Span {
    let first = tokens[0].span;
    let last = tokens[tokens.len() - 1].span;
    Span::new(first.line, first.column, last.column + last.length - first.column)
}

/// Quotes `s` so that [`lex_line`] reads it back unchanged.
pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// A parsed `key=value` attribute.
#[derive(Debug, Clone)]
pub(crate) struct Attr {
    pub key: String,
    pub key_span: Span,
    pub value: Tok,
    pub value_span: Span,
}

/// Parses an optional `[k=v, ...]` block that must end the statement.
pub(crate) fn parse_attrs(tokens: &[Token]) -> Result<Vec<Attr>, Diagnostic> {
    let Some(first) = tokens.first() else {
        return Ok(Vec::new());
    };
    if first.tok != Tok::LBracket {
        return Err(unexpected(first, "`[` or end of line"));
    }
    let mut attrs = Vec::new();
    let mut i = 1;
    loop {
        let key = tokens.get(i).ok_or_else(|| eol(tokens, "attribute name"))?;
        let Tok::Ident(name) = &key.tok else {
            return Err(unexpected(key, "attribute name"));
        };
        let eq = tokens.get(i + 1).ok_or_else(|| eol(tokens, "`=`"))?;
        if eq.tok != Tok::Eq {
            return Err(unexpected(eq, "`=`"));
        }
        let value = tokens.get(i + 2).ok_or_else(|| eol(tokens, "attribute value"))?;
        if !matches!(value.tok, Tok::Ident(_) | Tok::Int(_) | Tok::Str(_)) {
            return Err(unexpected(value, "attribute value"));
        }
        attrs.push(Attr { key: name.clone(), key_span: key.span, value: value.tok.clone(), value_span: value.span });
        let sep = tokens.get(i + 3).ok_or_else(|| eol(tokens, "`,` or `]`"))?;
        match sep.tok {
            Tok::Comma => i += 4,
            Tok::RBracket => {
                if let Some(extra) = tokens.get(i + 4) {
                    return Err(unexpected(extra, "end of line"));
                }
                return Ok(attrs);
            }
            _ => return Err(unexpected(sep, "`,` or `]`")),
        }
    }
}

pub(crate) fn unexpected(token: &Token, expected: &str) -> Diagnostic {
    Diagnostic::new(Code::Syntax, format!("expected {expected}, found {}", token.tok.describe()), Some(token.span))
}

pub(crate) fn eol(tokens: &[Token], expected: &str) -> Diagnostic {
    let last = tokens.last().map(|t| t.span).expect("eol called on non-empty line");
    Diagnostic::new(
        Code::Syntax,
        format!("expected {expected}, found end of line"),
        Some(Span::new(last.line, last.column + last.length, 1)),
    )
}
