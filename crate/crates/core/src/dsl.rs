//! The `.pog` text syntax: a line-oriented parser with error recovery and a
//! canonical formatter.
//!
//! ```text
//! org "Paper Example"
//! entity A [label="Alice", title="CEO", mood=happy]
//! formal A -> B [power=2, block=true]
//! informal D ~> A [strength=1, active=true, note="same tennis club"]
//! ```

use std::path::PathBuf;

use crate::diagnostic::{has_errors, sort_diagnostics, Code, Diagnostic, Span};
use crate::lexer::{lex_line, parse_attrs, quote, statement_span, unexpected, Attr, Tok, Token};
use crate::model::{validate, EntityDraft, FormalDraft, InformalDraft, ModelDraft, Mood, OrgModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceText {
    pub content: String,
    pub origin: Option<PathBuf>,
}

impl SourceText {
    pub fn new(content: impl Into<String>) -> Self {
        SourceText { content: content.into(), origin: None }
    }

    pub fn with_origin(content: impl Into<String>, origin: impl Into<PathBuf>) -> Self {
        SourceText { content: content.into(), origin: Some(origin.into()) }
    }
}

/// Outcome of [`parse`]. `model` is present exactly when no error-severity
/// diagnostic was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseResult {
    pub model: Option<OrgModel>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseResult {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }
}

pub fn parse_str(text: &str) -> ParseResult {
    parse(&SourceText::new(text))
}

pub fn parse(source: &SourceText) -> ParseResult {
    let (draft, mut diagnostics) = parse_draft(&source.content);
    diagnostics.extend(validate(&draft));
    sort_diagnostics(&mut diagnostics);
    let model = if has_errors(&diagnostics) { None } else { draft.build().ok() };
    ParseResult { model, diagnostics }
}

/// Parses into an unvalidated draft plus the syntax-level diagnostics.
pub fn parse_draft(content: &str) -> (ModelDraft, Vec<Diagnostic>) {
    let mut draft = ModelDraft::default();
    let mut diags = Vec::new();
    let mut header_seen = false;

    if content.starts_with('\u{feff}') {
        diags.push(Diagnostic::new(Code::Syntax, "byte-order mark is not allowed", Some(Span::new(1, 1, 1))));
    }

    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = if idx == 0 { line.trim_start_matches('\u{feff}') } else { line };
        let tokens = match lex_line(line, line_no) {
            Ok(t) => t,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        if tokens.is_empty() {
            continue;
        }
        let keyword = match &tokens[0].tok {
            Tok::Ident(k) => k.as_str(),
            _ => {
                diags.push(unexpected(&tokens[0], "statement keyword"));
                continue;
            }
        };
        if keyword != "org" && !header_seen {
            diags.push(Diagnostic::new(Code::Syntax, "expected `org \"name\"` header before statements", Some(tokens[0].span)));
            header_seen = true;
        }
        let result = match keyword {
            "org" => {
                if header_seen {
                    Err(Diagnostic::new(Code::Syntax, "duplicate `org` header", Some(statement_span(&tokens))))
                } else {
                    header_seen = true;
                    parse_header(&tokens).map(|name| draft.name = name)
                }
            }
            "entity" => parse_entity(&tokens, &mut diags).map(|e| draft.entities.push(e)),
            "formal" => parse_formal(&tokens, &mut diags).map(|f| draft.formal.push(f)),
            "informal" => parse_informal(&tokens, &mut diags).map(|i| draft.informal.push(i)),
            other => Err(Diagnostic::new(Code::Syntax, format!("unknown statement `{other}`"), Some(tokens[0].span))),
        };
        if let Err(d) = result {
            diags.push(d);
        }
    }
    if !header_seen {
        diags.push(Diagnostic::new(Code::Syntax, "missing `org \"name\"` header", Some(Span::new(1, 1, 0))));
    }
    (draft, diags)
}

fn parse_header(tokens: &[Token]) -> Result<String, Diagnostic> {
    match tokens.get(1) {
        Some(Token { tok: Tok::Str(name), .. }) => match tokens.get(2) {
            Some(extra) => Err(unexpected(extra, "end of line")),
            None => Ok(name.clone()),
        },
        Some(other) => Err(unexpected(other, "quoted organisation name")),
        None => Err(crate::lexer::eol(tokens, "quoted organisation name")),
    }
}

fn expect_id(tokens: &[Token], i: usize) -> Result<String, Diagnostic> {
    match tokens.get(i) {
        Some(Token { tok: Tok::Ident(id), .. }) => Ok(id.clone()),
        Some(other) => Err(unexpected(other, "entity id")),
        None => Err(crate::lexer::eol(tokens, "entity id")),
    }
}

fn expect_tok(tokens: &[Token], i: usize, want: Tok) -> Result<(), Diagnostic> {
    match tokens.get(i) {
        Some(t) if t.tok == want => Ok(()),
        Some(other) => Err(unexpected(other, &want.describe())),
        None => Err(crate::lexer::eol(tokens, &want.describe())),
    }
}

/// Applies attributes in order: last one wins, duplicates and unknown keys
/// warn, ill-typed values are errors and leave the default in place.
pub(crate) fn apply_attrs(attrs: Vec<Attr>, known: &[&str], diags: &mut Vec<Diagnostic>, mut set: impl FnMut(&str, &Tok) -> Result<(), AttrError>) {
    let mut seen: Vec<&str> = Vec::new();
    for attr in &attrs {
        if !known.contains(&attr.key.as_str()) {
            diags.push(Diagnostic::new(Code::UnknownAttr, format!("unknown attribute `{}` ignored", attr.key), Some(attr.key_span)));
            continue;
        }
        if seen.contains(&attr.key.as_str()) {
            diags.push(Diagnostic::new(Code::DupAttr, format!("attribute `{}` repeated; last value wins", attr.key), Some(attr.key_span)));
        }
        seen.push(&attr.key);
        if let Err((code, msg)) = set(&attr.key, &attr.value) {
            diags.push(Diagnostic::new(code, msg, Some(attr.value_span)));
        }
    }
}

/// Code and message for an ill-typed attribute value.
pub(crate) type AttrError = (Code, String);

fn syntax(msg: String) -> AttrError {
    (Code::Syntax, msg)
}

pub(crate) fn text_value(key: &str, v: &Tok) -> Result<String, AttrError> {
    match v {
        Tok::Str(s) => Ok(s.clone()),
        other => Err(syntax(format!("`{key}` expects a quoted string, found {}", other.describe()))),
    }
}

pub(crate) fn int_value(key: &str, v: &Tok) -> Result<u64, AttrError> {
    match v {
        Tok::Int(Some(n)) => Ok(*n),
        Tok::Int(None) => Err((Code::BadPower, format!("`{key}` value is too large"))),
        other => Err(syntax(format!("`{key}` expects an integer, found {}", other.describe()))),
    }
}

pub(crate) fn bool_value(key: &str, v: &Tok) -> Result<bool, AttrError> {
    match v {
        Tok::Ident(s) if s == "true" => Ok(true),
        Tok::Ident(s) if s == "false" => Ok(false),
        other => Err(syntax(format!("`{key}` expects true or false, found {}", other.describe()))),
    }
}

pub(crate) fn mood_value(key: &str, v: &Tok) -> Result<Mood, AttrError> {
    match v {
        Tok::Ident(s) => Mood::parse(s).ok_or_else(|| syntax(format!("`{key}` expects happy, sad or neutral, found `{s}`"))),
        other => Err(syntax(format!("`{key}` expects happy, sad or neutral, found {}", other.describe()))),
    }
}

fn parse_entity(tokens: &[Token], diags: &mut Vec<Diagnostic>) -> Result<EntityDraft, Diagnostic> {
    let id = expect_id(tokens, 1)?;
    let attrs = parse_attrs(&tokens[2..])?;
    let mut e = EntityDraft { id, span: Some(statement_span(tokens)), ..Default::default() };
    apply_attrs(attrs, &["label", "title", "mood"], diags, |key, v| {
        match key {
            "label" => e.label = Some(text_value(key, v)?),
            "title" => e.title = Some(text_value(key, v)?),
            _ => e.mood = mood_value(key, v)?,
        }
        Ok(())
    });
    Ok(e)
}

fn parse_formal(tokens: &[Token], diags: &mut Vec<Diagnostic>) -> Result<FormalDraft, Diagnostic> {
    let superior = expect_id(tokens, 1)?;
    expect_tok(tokens, 2, Tok::Arrow)?;
    let subordinate = expect_id(tokens, 3)?;
    let attrs = parse_attrs(&tokens[4..])?;
    let mut f = FormalDraft { superior, subordinate, power: 1, blocked: false, span: Some(statement_span(tokens)) };
    apply_attrs(attrs, &["power", "block"], diags, |key, v| {
        match key {
            "power" => f.power = int_value(key, v)?,
            _ => f.blocked = bool_value(key, v)?,
        }
        Ok(())
    });
    Ok(f)
}

fn parse_informal(tokens: &[Token], diags: &mut Vec<Diagnostic>) -> Result<InformalDraft, Diagnostic> {
    let source = expect_id(tokens, 1)?;
    expect_tok(tokens, 2, Tok::Squiggle)?;
    let target = expect_id(tokens, 3)?;
    let attrs = parse_attrs(&tokens[4..])?;
    let mut i = InformalDraft { source, target, strength: 1, active: true, note: None, span: Some(statement_span(tokens)) };
    apply_attrs(attrs, &["strength", "active", "note"], diags, |key, v| {
        match key {
            "strength" => i.strength = int_value(key, v)?,
            "active" => i.active = bool_value(key, v)?,
            _ => i.note = Some(text_value(key, v)?),
        }
        Ok(())
    });
    Ok(i)
}

fn attr_block(attrs: &[String]) -> String {
    if attrs.is_empty() {
        String::new()
    } else {
        format!(" [{}]", attrs.join(", "))
    }
}

/// Canonical text for a model: header, entities in canonical order, formal
/// then informal edges sorted by endpoints, defaults omitted.
pub fn format(model: &OrgModel) -> String {
    let mut out = format!("org {}\n", quote(model.name()));

    if !model.is_empty() {
        out.push('\n');
    }
    for id in model.canonical_order() {
        let e = model.entity(id.as_str()).expect("canonical order lists model entities");
        let mut attrs = Vec::new();
        if let Some(label) = &e.label {
            attrs.push(format!("label={}", quote(label)));
        }
        if let Some(title) = &e.title {
            attrs.push(format!("title={}", quote(title)));
        }
        if e.mood != Mood::Neutral {
            attrs.push(format!("mood={}", e.mood.as_str()));
        }
        out.push_str(&format!("entity {}{}\n", e.id, attr_block(&attrs)));
    }

    if !model.formal().is_empty() {
        out.push('\n');
    }
    for f in model.formal() {
        let mut attrs = Vec::new();
        if f.power != 1 {
            attrs.push(format!("power={}", f.power));
        }
        if f.blocked {
            attrs.push("block=true".to_string());
        }
        out.push_str(&format!("formal {} -> {}{}\n", f.superior, f.subordinate, attr_block(&attrs)));
    }

    if !model.informal().is_empty() {
        out.push('\n');
    }
    for i in model.informal() {
        let mut attrs = Vec::new();
        if i.strength != 1 {
            attrs.push(format!("strength={}", i.strength));
        }
        if !i.active {
            attrs.push("active=false".to_string());
        }
        if let Some(note) = &i.note {
            attrs.push(format!("note={}", quote(note)));
        }
        out.push_str(&format!("informal {} ~> {}{}\n", i.source, i.target, attr_block(&attrs)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER: &str = include_str!("../../../fixtures/paper.pog");

    fn codes(r: &ParseResult) -> Vec<Code> {
        r.diagnostics.iter().map(|d| d.code).collect()
    }

    #[test]
    fn minimal_entity_defaults() {
        let r = parse_str("org \"X\"\nentity A\n");
        assert_eq!(r.diagnostics, []);
        let m = r.model.unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.entity("A").unwrap().mood, Mood::Neutral);
    }

    #[test]
    fn paper_fixture() {
        let r = parse_str(PAPER);
        assert_eq!(r.diagnostics, []);
        let m = r.model.unwrap();
        assert_eq!(m.name(), "Paper Example");
        assert_eq!(m.len(), 7);
        let powers: Vec<(String, String, u64)> =
            m.formal().iter().map(|f| (f.superior.to_string(), f.subordinate.to_string(), f.power)).collect();
        let want = [("A", "B", 2), ("A", "C", 1), ("B", "D", 1), ("B", "E", 1), ("C", "F", 3), ("C", "G", 1)];
        assert_eq!(powers, want.map(|(a, b, p)| (a.to_string(), b.to_string(), p)));
        assert_eq!(m.informal().len(), 1);
        let inf = &m.informal()[0];
        assert_eq!((inf.source.as_str(), inf.target.as_str(), inf.strength, inf.active), ("D", "A", 1, true));
        assert_eq!(m.entity("D").unwrap().mood, Mood::Sad);
    }

    #[test]
    fn self_loop_spans_the_statement() {
        let r = parse_str("org \"x\"\nentity A\nformal A -> A\n");
        assert!(r.model.is_none());
        assert_eq!(codes(&r), [Code::SelfLoop]);
        assert_eq!(r.diagnostics[0].span, Some(Span::new(3, 1, 13)));
    }

    #[test]
    fn recovers_per_line() {
        let text = "org \"x\"\nentity A\nentity\nformal A ->\nbogus A\ninformal A ~> A [strength=zero]\nentity B [mood=angry]\n";
        let r = parse_str(text);
        assert!(r.model.is_none());
        let lines: std::collections::BTreeSet<usize> = r.diagnostics.iter().map(|d| d.span.unwrap().line).collect();
        assert_eq!(lines.into_iter().collect::<Vec<_>>(), [3, 4, 5, 6, 7]);
        assert!(r.diagnostics.len() >= 5);
    }

    #[test]
    fn attribute_warnings() {
        let r = parse_str("org \"x\"\nentity A [mood=sad, mood=happy, colour=\"red\"]\n");
        assert_eq!(codes(&r), [Code::DupAttr, Code::UnknownAttr]);
        let m = r.model.expect("warnings do not block the model");
        assert_eq!(m.entity("A").unwrap().mood, Mood::Happy);
    }

    #[test]
    fn header_rules() {
        assert_eq!(codes(&parse_str("")), [Code::Syntax]);
        assert_eq!(codes(&parse_str("entity A\n")), [Code::Syntax]);
        assert_eq!(codes(&parse_str("org \"a\"\norg \"b\"\n")), [Code::Syntax]);
        assert_eq!(codes(&parse_str("\u{feff}org \"a\"\n")), [Code::Syntax]);
        assert_eq!(parse_str("# comment\n\norg \"a\" # trailing\n").diagnostics, []);
    }

    #[test]
    fn bad_power_values() {
        let r = parse_str("org \"x\"\nentity A\nentity B\nformal A -> B [power=0]\n");
        assert_eq!(codes(&r), [Code::BadPower]);
        let r = parse_str("org \"x\"\nentity A\nentity B\nformal A -> B [power=99999999999999999999999]\n");
        assert_eq!(codes(&r), [Code::BadPower]);
    }

    #[test]
    fn undeclared_endpoint() {
        let r = parse_str("org \"x\"\nentity A\ninformal A ~> Q\n");
        assert_eq!(codes(&r), [Code::UnknownEntity]);
    }

    #[test]
    fn empty_model_format() {
        let m = parse_str("org \"X\"\n").model.unwrap();
        assert_eq!(format(&m), "org \"X\"\n");
    }

    #[test]
    fn format_is_canonical() {
        let m = parse_str(PAPER).model.unwrap();
        let text = format(&m);
        assert_eq!(
            text,
            "org \"Paper Example\"\n\n\
             entity A [mood=happy]\nentity B [mood=happy]\nentity C [mood=happy]\nentity D [mood=sad]\n\
             entity E [mood=happy]\nentity F [mood=happy]\nentity G [mood=happy]\n\n\
             formal A -> B [power=2]\nformal A -> C\nformal B -> D\nformal B -> E\nformal C -> F [power=3]\nformal C -> G\n\n\
             informal D ~> A\n"
        );
        let again = parse_str(&text).model.unwrap();
        assert_eq!(again, m);
        assert_eq!(format(&again), text);
    }

    #[test]
    fn attributes_print_in_fixed_order() {
        let src = "org \"x\"\nentity B [mood=sad, title=\"Boss\", label=\"Bo \\\"B\\\"\"]\nentity A\n\
                   formal B -> A [block=true, power=4]\ninformal A ~> B [note=\"golf\", active=false, strength=3]\n";
        let m = parse_str(src).model.unwrap();
        assert_eq!(
            format(&m),
            "org \"x\"\n\nentity B [label=\"Bo \\\"B\\\"\", title=\"Boss\", mood=sad]\nentity A\n\n\
             formal B -> A [power=4, block=true]\n\ninformal A ~> B [strength=3, active=false, note=\"golf\"]\n"
        );
    }
}
