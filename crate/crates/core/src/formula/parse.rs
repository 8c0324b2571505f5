//! Recursive-descent parser for the prefix formula grammar:
//!
//! ```text
//! expr := VAR | GATE '(' expr (',' expr)* ')'
//! GATE := NAND | AND | OR | NOT
//! VAR  := 'x' [1-9][0-9]*
//! ```
//!
//! Whitespace between tokens is ignored.

use std::fmt;

use thiserror::Error;

use super::{Expr, Formula, GateKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEnd,
    UnexpectedChar(char),
    UnknownGate(String),
    ZeroIndex,
    LeadingZero,
    IndexOverflow,
    NotArity(usize),
    TrailingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnknownGate(name) => write!(f, "unknown gate {name:?}"),
            ParseErrorKind::ZeroIndex => f.write_str("variable index 0"),
            ParseErrorKind::LeadingZero => f.write_str("variable index with leading zero"),
            ParseErrorKind::IndexOverflow => f.write_str("variable index too large"),
            ParseErrorKind::NotArity(n) => write!(f, "NOT takes exactly one input, got {n}"),
            ParseErrorKind::TrailingInput => f.write_str("trailing input after formula"),
        }
    }
}

/// Syntax error at a byte offset of the source text.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.pos,
            kind,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            None => self.error(ParseErrorKind::UnexpectedEnd),
            Some(_) => {
                // Report the full (possibly multi-byte) character.
                let rest = std::str::from_utf8(&self.src[self.pos..]).unwrap_or("");
                let c = rest.chars().next().unwrap_or('\u{fffd}');
                self.error(ParseErrorKind::UnexpectedChar(c))
            }
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'x') => self.var(),
            Some(c) if c.is_ascii_alphabetic() => self.gate(),
            _ => Err(self.unexpected()),
        }
    }

    fn var(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let digits_start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits = &self.src[digits_start..self.pos];
        if digits.is_empty() {
            return Err(self.unexpected());
        }
        if digits[0] == b'0' {
            let kind = if digits.len() == 1 {
                ParseErrorKind::ZeroIndex
            } else {
                ParseErrorKind::LeadingZero
            };
            return Err(ParseError {
                position: start,
                kind,
            });
        }
        let text = std::str::from_utf8(digits).expect("ascii digits");
        text.parse::<u32>().map(Expr::Var).map_err(|_| ParseError {
            position: start,
            kind: ParseErrorKind::IndexOverflow,
        })
    }

    fn gate(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let kind = match name {
            "NAND" => GateKind::Nand,
            "AND" => GateKind::And,
            "OR" => GateKind::Or,
            "NOT" => GateKind::Not,
            _ => {
                return Err(ParseError {
                    position: start,
                    kind: ParseErrorKind::UnknownGate(name.to_string()),
                })
            }
        };
        self.expect(b'(')?;
        let mut children = vec![self.expr()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    children.push(self.expr()?);
                }
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.unexpected()),
            }
        }
        if kind == GateKind::Not && children.len() != 1 {
            return Err(ParseError {
                position: start,
                kind: ParseErrorKind::NotArity(children.len()),
            });
        }
        Ok(Expr::Gate(kind, children))
    }
}

/// Parses a mixed-gate expression without rewriting it.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error(ParseErrorKind::TrailingInput));
    }
    Ok(expr)
}

/// Parses and normalises to NAND gates.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_expr(text).map(|e| e.to_nand())
}
