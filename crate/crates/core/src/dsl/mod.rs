//! Text format for fuzzy queries (`.fcq` files).
//!
//! ```text
//! document := (var_decl | rule | option)* ;
//! var_decl := "var" IDENT "[" NUMBER "," NUMBER "]" "{" set_decl+ "}" ;
//! set_decl := IDENT ":" ("tri"|"trap"|"gauss"|"zmf"|"smf") "(" NUMBER ("," NUMBER)* ")" ;
//! rule     := "IF" expr "," "THEN" "(" IDENT "is" IDENT ")" ("weight" NUMBER)? ;
//! expr     := term (("and"|"or") term)* ;
//! term     := "(" IDENT "is" ("not")? IDENT ")" | "(" expr ")" ;
//! option   := "set" IDENT "=" (NUMBER | IDENT) ;
//! ```
//!
//! `and` binds tighter than `or`. Keywords are case-insensitive,
//! identifiers are case-sensitive, and `#` starts a comment running to the
//! end of the line. The variable named in the rule consequents is the
//! output; every other variable is an input.
//!
//! Prose rules such as "IF (var_average or var_slope is constant)" are
//! written with one atom per variable:
//! `IF (var_average is constant) or (var_slope is constant), THEN ...`.

mod lexer;
mod parser;
mod printer;

use std::fmt;

use thiserror::Error;

use crate::fuzzy::{FisConfig, LinguisticVariable, Rule, DEFAULT_RESOLUTION};

pub use parser::parse;
pub use printer::print;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DslErrorKind {
    Syntax,
    UndeclaredVariable,
    UndeclaredSet,
    ArityMismatch,
    DuplicateSet,
    DuplicateVariable,
    InvalidParameter,
    InvalidOption,
    /// Consequents name different variables, or the output also appears in
    /// an antecedent.
    OutputConflict,
    /// The document has no rules to build a system from.
    NoRules,
}

impl fmt::Display for DslErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DslErrorKind::Syntax => "syntax error",
            DslErrorKind::UndeclaredVariable => "undeclared variable",
            DslErrorKind::UndeclaredSet => "undeclared set",
            DslErrorKind::ArityMismatch => "arity mismatch",
            DslErrorKind::DuplicateSet => "duplicate set",
            DslErrorKind::DuplicateVariable => "duplicate variable",
            DslErrorKind::InvalidParameter => "invalid parameter",
            DslErrorKind::InvalidOption => "invalid option",
            DslErrorKind::OutputConflict => "output conflict",
            DslErrorKind::NoRules => "no rules",
        };
        f.write_str(s)
    }
}

/// Rule-file error. `line` and `column` are 1-based; both are 0 for
/// document-level problems.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at line {line}, column {column}: {message}")]
pub struct DslError {
    pub kind: DslErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl DslError {
    pub(crate) fn new(kind: DslErrorKind, pos: lexer::Pos, message: impl Into<String>) -> Self {
        Self {
            kind,
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OptionValue {
    Number(f64),
    Ident(String),
}

impl fmt::Display for OptionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptionValue::Number(n) => write!(f, "{n}"),
            OptionValue::Ident(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DocOption {
    pub name: String,
    pub value: OptionValue,
}

/// Parsed query: declarations, rules, and inference options, in source
/// order within each kind.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryDocument {
    pub variables: Vec<LinguisticVariable>,
    pub rules: Vec<Rule>,
    pub options: Vec<DocOption>,
}

impl QueryDocument {
    pub fn output_variable(&self) -> Option<&str> {
        self.rules.first().map(|r| r.consequent.0.as_str())
    }

    pub fn resolution(&self) -> usize {
        self.options
            .iter()
            .rev()
            .find_map(|o| match (&*o.name.to_ascii_lowercase(), &o.value) {
                ("resolution", OptionValue::Number(n)) => Some(*n as usize),
                _ => None,
            })
            .unwrap_or(DEFAULT_RESOLUTION)
    }

    /// Build the inference system described by this document.
    pub fn to_fis(&self) -> crate::Result<FisConfig> {
        let output_name = self.output_variable().ok_or_else(|| DslError {
            kind: DslErrorKind::NoRules,
            line: 0,
            column: 0,
            message: "document declares no rules".into(),
        })?;
        let output = self
            .variables
            .iter()
            .find(|v| v.name == output_name)
            .cloned()
            .ok_or_else(|| DslError {
                kind: DslErrorKind::UndeclaredVariable,
                line: 0,
                column: 0,
                message: format!("output variable `{output_name}` is not declared"),
            })?;
        let inputs = self
            .variables
            .iter()
            .filter(|v| v.name != output_name)
            .cloned()
            .collect();
        FisConfig::new(inputs, output, self.rules.clone())?.with_resolution(self.resolution())
    }
}

/// Parse rule text straight into an inference system.
pub fn compile(text: &str) -> crate::Result<FisConfig> {
    parse(text)?.to_fis()
}
