//! Diagnostics shared by validation, the DSL parser and the scenario parser.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Location of a diagnostic in source text. Lines and columns are 1-based,
/// `length` counts characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl Span {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        Span { line, column, length }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// The closed set of diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Code {
    #[serde(rename = "E-SYNTAX")]
    Syntax,
    #[serde(rename = "E-BAD-ID")]
    BadId,
    #[serde(rename = "E-EMPTY-TEXT")]
    EmptyText,
    #[serde(rename = "E-DUP-ENTITY")]
    DupEntity,
    #[serde(rename = "E-SELF-LOOP")]
    SelfLoop,
    #[serde(rename = "E-MULTI-SUPERIOR")]
    MultiSuperior,
    #[serde(rename = "E-FORMAL-CYCLE")]
    FormalCycle,
    #[serde(rename = "E-UNKNOWN-ENTITY")]
    UnknownEntity,
    #[serde(rename = "E-UNKNOWN-EDGE")]
    UnknownEdge,
    #[serde(rename = "E-DUP-EDGE")]
    DupEdge,
    #[serde(rename = "E-BAD-POWER")]
    BadPower,
    #[serde(rename = "E-BAD-ENTRY")]
    BadEntry,
    #[serde(rename = "E-DIFF-DOMAIN")]
    DiffDomain,
    #[serde(rename = "E-DUP-SCENARIO")]
    DupScenario,
    #[serde(rename = "E-IO")]
    Io,
    #[serde(rename = "W-DUP-ATTR")]
    DupAttr,
    #[serde(rename = "W-UNKNOWN-ATTR")]
    UnknownAttr,
}

impl Code {
    pub const ALL: [Code; 17] = [
        Code::Syntax,
        Code::BadId,
        Code::EmptyText,
        Code::DupEntity,
        Code::SelfLoop,
        Code::MultiSuperior,
        Code::FormalCycle,
        Code::UnknownEntity,
        Code::UnknownEdge,
        Code::DupEdge,
        Code::BadPower,
        Code::BadEntry,
        Code::DiffDomain,
        Code::DupScenario,
        Code::Io,
        Code::DupAttr,
        Code::UnknownAttr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::Syntax => "E-SYNTAX",
            Code::BadId => "E-BAD-ID",
            Code::EmptyText => "E-EMPTY-TEXT",
            Code::DupEntity => "E-DUP-ENTITY",
            Code::SelfLoop => "E-SELF-LOOP",
            Code::MultiSuperior => "E-MULTI-SUPERIOR",
            Code::FormalCycle => "E-FORMAL-CYCLE",
            Code::UnknownEntity => "E-UNKNOWN-ENTITY",
            Code::UnknownEdge => "E-UNKNOWN-EDGE",
            Code::DupEdge => "E-DUP-EDGE",
            Code::BadPower => "E-BAD-POWER",
            Code::BadEntry => "E-BAD-ENTRY",
            Code::DiffDomain => "E-DIFF-DOMAIN",
            Code::DupScenario => "E-DUP-SCENARIO",
            Code::Io => "E-IO",
            Code::DupAttr => "W-DUP-ATTR",
            Code::UnknownAttr => "W-UNKNOWN-ATTR",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Code::DupAttr | Code::UnknownAttr => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
}

impl Diagnostic {
    pub fn new(code: Code, message: impl Into<String>, span: Option<Span>) -> Self {
        Diagnostic { severity: code.severity(), code, message: message.into(), span }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Renders as `origin:line:col CODE message`; unspanned diagnostics use
    /// line and column 0.
    pub fn render(&self, origin: &str) -> String {
        let (line, col) = self.span.map_or((0, 0), |s| (s.line, s.column));
        format!("{origin}:{line}:{col} {} {}", self.code, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) => write!(f, "{}:{} {} {}", s.line, s.column, self.code, self.message),
            None => write!(f, "{} {}", self.code, self.message),
        }
    }
}

/// Deterministic ordering: spanned diagnostics by position, unspanned last,
/// then by code and message.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (a.span.is_none(), a.span, a.code, &a.message).cmp(&(b.span.is_none(), b.span, b.code, &b.message))
    });
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
