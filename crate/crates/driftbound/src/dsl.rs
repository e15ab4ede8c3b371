//! Line-oriented text format for reaction networks.
//!
//! ```text
//! # transcription-translation
//! species M P
//! reaction 0 -> M @ 100
//! reaction M -> 0 @ 1
//! reaction M -> M + P @ 1
//! reaction P -> 0 @ 0.1
//! ```
//!
//! `species` lines come first and declare names in state-vector order.
//! Each `reaction` line is `<multiset> -> <multiset> @ <positive rate>`,
//! where a multiset is `0` (empty) or `+`-separated terms `S` / `k*S` with
//! integer `k ≥ 1`. `#` starts a comment; whitespace between tokens is free.
//! Rates accept decimal and scientific notation and are read as mass-action
//! rate constants.

use crate::network::{build_network, NetworkError, Reaction, ReactionNetwork};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownSpecies,
    NegativeRate,
    DuplicateSpecies,
    OrderTooHigh,
}

/// A parse failure with a 1-based source position pointing at the offending
/// token. Parsing stops at the first error.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, kind: ParseErrorKind, message: impl fmt::Display) -> Self {
        Self {
            line,
            column,
            kind,
            message: message.to_string(),
        }
    }
}

/// A parsed model together with its source text.
#[derive(Debug, Clone)]
pub struct ModelDocument {
    pub source_name: String,
    pub text: String,
    pub network: ReactionNetwork,
}

impl ModelDocument {
    pub fn parse(
        source_name: impl Into<String>,
        text: impl Into<String>,
    ) -> Result<Self, ParseError> {
        let text = text.into();
        let network = parse_model(&text)?;
        Ok(Self {
            source_name: source_name.into(),
            text,
            network,
        })
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut col = 0usize;
    for piece in body.split_whitespace() {
        // Columns are 1-based byte offsets into the raw line.
        let at = body[col..].find(piece).unwrap() + col;
        tokens.push(Token {
            text: piece,
            column: at + 1,
        });
        col = at + piece.len();
    }
    tokens
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// One side of a reaction: `0` or `k*S + ...`.
fn parse_multiset(
    tokens: &[Token<'_>],
    lineno: usize,
    species: &[String],
) -> Result<Vec<(usize, u32)>, ParseError> {
    if tokens.is_empty() {
        return Err(ParseError::new(
            lineno,
            1,
            ParseErrorKind::Syntax,
            "expected a species multiset",
        ));
    }
    if tokens.len() == 1 && tokens[0].text == "0" {
        return Ok(Vec::new());
    }
    let mut out: Vec<(usize, u32)> = Vec::new();
    let mut expect_term = true;
    for tok in tokens {
        if expect_term {
            let (count, name) = match tok.text.split_once('*') {
                Some((k, name)) => {
                    let count: u32 = k.parse().map_err(|_| {
                        ParseError::new(
                            lineno,
                            tok.column,
                            ParseErrorKind::Syntax,
                            format!("invalid stoichiometric count `{k}`"),
                        )
                    })?;
                    if count == 0 {
                        return Err(ParseError::new(
                            lineno,
                            tok.column,
                            ParseErrorKind::Syntax,
                            "stoichiometric count must be >= 1",
                        ));
                    }
                    (count, name)
                }
                None => (1, tok.text),
            };
            if !is_identifier(name) {
                return Err(ParseError::new(
                    lineno,
                    tok.column,
                    ParseErrorKind::Syntax,
                    format!("expected species name, found `{name}`"),
                ));
            }
            let idx = species.iter().position(|s| s == name).ok_or_else(|| {
                ParseError::new(
                    lineno,
                    tok.column,
                    ParseErrorKind::UnknownSpecies,
                    format!("undeclared species `{name}`"),
                )
            })?;
            match out.iter_mut().find(|(s, _)| *s == idx) {
                Some((_, c)) => *c += count,
                None => out.push((idx, count)),
            }
            expect_term = false;
        } else {
            if tok.text != "+" {
                return Err(ParseError::new(
                    lineno,
                    tok.column,
                    ParseErrorKind::Syntax,
                    format!("expected `+`, found `{}`", tok.text),
                ));
            }
            expect_term = true;
        }
    }
    if expect_term {
        let last = tokens.last().unwrap();
        return Err(ParseError::new(
            lineno,
            last.column,
            ParseErrorKind::Syntax,
            "dangling `+` in multiset",
        ));
    }
    Ok(out)
}

/// Parse a model document into a network. The first error wins.
pub fn parse_model(text: &str) -> Result<ReactionNetwork, ParseError> {
    let mut species: Vec<String> = Vec::new();
    // (line, reactant-multiset column, reaction)
    let mut reactions: Vec<(usize, usize, Reaction)> = Vec::new();
    let mut seen_reaction = false;

    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let tokens = tokenize(raw_line);
        if tokens.is_empty() {
            continue;
        }
        match tokens[0].text {
            "species" => {
                if seen_reaction {
                    return Err(ParseError::new(
                        lineno,
                        tokens[0].column,
                        ParseErrorKind::Syntax,
                        "species declarations must precede reactions",
                    ));
                }
                if tokens.len() == 1 {
                    return Err(ParseError::new(
                        lineno,
                        tokens[0].column,
                        ParseErrorKind::Syntax,
                        "expected at least one species name",
                    ));
                }
                for tok in &tokens[1..] {
                    if !is_identifier(tok.text) {
                        return Err(ParseError::new(
                            lineno,
                            tok.column,
                            ParseErrorKind::Syntax,
                            format!("invalid species name `{}`", tok.text),
                        ));
                    }
                    if species.iter().any(|s| s == tok.text) {
                        return Err(ParseError::new(
                            lineno,
                            tok.column,
                            ParseErrorKind::DuplicateSpecies,
                            format!("species `{}` already declared", tok.text),
                        ));
                    }
                    species.push(tok.text.to_string());
                }
            }
            "reaction" => {
                seen_reaction = true;
                let rest = &tokens[1..];
                let arrow = rest.iter().position(|t| t.text == "->").ok_or_else(|| {
                    ParseError::new(
                        lineno,
                        tokens[0].column,
                        ParseErrorKind::Syntax,
                        "missing `->` in reaction",
                    )
                })?;
                let at = rest.iter().position(|t| t.text == "@").ok_or_else(|| {
                    ParseError::new(
                        lineno,
                        tokens[0].column,
                        ParseErrorKind::Syntax,
                        "missing `@ <rate>` in reaction",
                    )
                })?;
                if at < arrow {
                    return Err(ParseError::new(
                        lineno,
                        rest[at].column,
                        ParseErrorKind::Syntax,
                        "`@` must follow the product multiset",
                    ));
                }
                let reactants = parse_multiset(&rest[..arrow], lineno, &species)?;
                let products = parse_multiset(&rest[arrow + 1..at], lineno, &species)?;
                if rest.len() != at + 2 {
                    let col = rest.get(at).map(|t| t.column).unwrap_or(1);
                    return Err(ParseError::new(
                        lineno,
                        col,
                        ParseErrorKind::Syntax,
                        "expected exactly one rate after `@`",
                    ));
                }
                let rate_tok = &rest[at + 1];
                let rate: f64 = rate_tok.text.parse().map_err(|_| {
                    ParseError::new(
                        lineno,
                        rate_tok.column,
                        ParseErrorKind::Syntax,
                        format!("invalid rate `{}`", rate_tok.text),
                    )
                })?;
                if !rate.is_finite() || rate <= 0.0 {
                    return Err(ParseError::new(
                        lineno,
                        rate_tok.column,
                        ParseErrorKind::NegativeRate,
                        format!("rate must be a positive real, found `{}`", rate_tok.text),
                    ));
                }
                let col = rest.first().map(|t| t.column).unwrap_or(1);
                reactions.push((lineno, col, Reaction::new(reactants, products, rate)));
            }
            other => {
                return Err(ParseError::new(
                    lineno,
                    tokens[0].column,
                    ParseErrorKind::Syntax,
                    format!("expected `species` or `reaction`, found `{other}`"),
                ));
            }
        }
    }

    let names: Vec<&str> = species.iter().map(|s| s.as_str()).collect();
    let positions: Vec<(usize, usize)> = reactions.iter().map(|&(l, c, _)| (l, c)).collect();
    build_network(&names, reactions.into_iter().map(|(_, _, r)| r).collect()).map_err(|e| {
        let (line, column, kind) = match e {
            NetworkError::ZeroNetChange(r) => {
                let (l, c) = positions[r];
                (l, c, ParseErrorKind::Syntax)
            }
            NetworkError::OrderTooHigh { reaction, .. } => {
                let (l, c) = positions[reaction];
                (l, c, ParseErrorKind::OrderTooHigh)
            }
            _ => (1, 1, ParseErrorKind::Syntax),
        };
        ParseError::new(line, column, kind, e)
    })
}

/// Canonical text form: one `species` line, reactions in input order, rates
/// printed shortest-roundtrip. `parse_model(serialize_model(n)) == n`.
pub fn serialize_model(network: &ReactionNetwork) -> String {
    let mut out = String::new();
    if !network.species().is_empty() {
        out.push_str("species");
        for s in network.species() {
            out.push(' ');
            out.push_str(&s.name);
        }
        out.push('\n');
    }
    let fmt_multiset = |ms: &[(usize, u32)]| -> String {
        if ms.is_empty() {
            return "0".to_string();
        }
        ms.iter()
            .map(|&(s, c)| {
                let name = &network.species()[s].name;
                if c == 1 {
                    name.clone()
                } else {
                    format!("{c}*{name}")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    };
    for r in network.reactions() {
        out.push_str(&format!(
            "reaction {} -> {} @ {}\n",
            fmt_multiset(&r.reactants),
            fmt_multiset(&r.products),
            r.rate_constant
        ));
    }
    out
}
