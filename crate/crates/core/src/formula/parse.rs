//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! atom := "theta(" name "," name "(" name ")" ")" | "theta(" name "," name ")"
//! f    := atom | "true" | "false" | "!" f | f "&" f | f "|" f | f "->" f
//!       | f "<->" f | "K[" name "]" f | "P[" name "]" f | "(" f ")"
//! ```
//!
//! Binding strength, tightest first: `!`/`K`/`P`, `&`, `|`, `->`, `<->`.
//! `&`, `|` and `<->` associate to the left, `->` to the right.

use crate::error::{Error, Result};
use crate::system::{Action, AgentId, Fact};

use super::Formula;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Bang => "'!'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::DoubleArrow => "'<->'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.len(), |nl| before.len() - nl - 1)
        + 1;
    (line, column)
}

fn err_at(src: &str, offset: usize, msg: impl Into<String>) -> Error {
    let (line, column) = position(src, offset);
    Error::syntax(line, column, msg)
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let mut toks = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b',' => Tok::Comma,
            b'!' => Tok::Bang,
            b'&' => Tok::Amp,
            b'|' => Tok::Pipe,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'<' if src[i..].starts_with("<->") => {
                i += 2;
                Tok::DoubleArrow
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            b'-' | b'<' | b'=' | b'>' | b'~' | b'^' | b'/' | b'\\' => {
                let end = src[i..]
                    .find(|ch: char| {
                        ch.is_alphanumeric() || ch.is_whitespace() || "()[],".contains(ch)
                    })
                    .map_or(src.len(), |e| i + e);
                return Err(err_at(
                    src,
                    start,
                    format!("unknown operator `{}`", &src[start..end]),
                ));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(err_at(src, start, format!("unexpected character '{ch}'")));
            }
        };
        i += 1;
        toks.push((tok, start));
    }
    toks.push((Tok::Eof, src.len()));
    Ok(toks)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

/// Parses one formula; trailing input is an error.
pub fn parse(text: &str) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser {
        src: text,
        toks,
        pos: 0,
    };
    let f = p.iff()?;
    match p.peek() {
        Tok::Eof => Ok(f),
        other => {
            let d = other.describe();
            Err(p.error(format!("unexpected {d} after formula")))
        }
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        err_at(self.src, self.toks[self.pos].1, msg)
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}", tok.describe())))
        }
    }

    fn name(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error(format!("expected name, found {}", other.describe()))),
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut lhs = self.implies()?;
        while *self.peek() == Tok::DoubleArrow {
            self.bump();
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(id) => match (id.as_str(), self.peek2()) {
                ("true", _) => {
                    self.bump();
                    Ok(Formula::True)
                }
                ("false", _) => {
                    self.bump();
                    Ok(Formula::False)
                }
                ("theta", Tok::LParen) => {
                    self.bump();
                    self.atom_body()
                }
                ("K" | "P", Tok::LBracket) => {
                    self.bump();
                    self.bump();
                    let j = AgentId::from(self.name()?);
                    self.expect(Tok::RBracket)?;
                    let body = self.unary()?;
                    Ok(if id == "K" {
                        Formula::Knows(j, Box::new(body))
                    } else {
                        Formula::Poss(j, Box::new(body))
                    })
                }
                _ => Err(self.error(format!("unexpected identifier `{id}`"))),
            },
            other => Err(self.error(format!("expected formula, found {}", other.describe()))),
        }
    }

    /// After `theta`: `(agent, family)` or `(agent, family(param))`.
    fn atom_body(&mut self) -> Result<Formula> {
        self.expect(Tok::LParen)?;
        let agent = self.name()?;
        self.expect(Tok::Comma)?;
        let family = self.name()?;
        let action = if *self.peek() == Tok::LParen {
            self.bump();
            let param = self.name()?;
            self.expect(Tok::RParen)?;
            Action::new(family, param)
        } else {
            Action::bare(family)
        };
        self.expect(Tok::RParen)?;
        Ok(Formula::Atom(Fact::new(agent.as_str(), action)))
    }
}
