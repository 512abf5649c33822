//! The word-expression grammar and printer.
//!
//! ```text
//! word   := factor+
//! factor := primary ('^' exp)?
//! primary := ident | '1' | '(' word ')'
//! exp    := int | '(' int (',' int)* ')'
//! ```
//!
//! `^-1` (and any negative exponent) inverts. `1` is the empty word. The
//! printer emits canonical words that re-parse to themselves.

use num_bigint::BigInt;
use std::str::FromStr;

use thiserror::Error;

use crate::alphabet::{Alphabet, Letter};
use crate::ordvec::OrdVec;
use crate::word::{Block, BlockWord, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: unknown letter `{name}`")]
    UnknownLetter { line: usize, col: usize, name: String },
    #[error("{0}")]
    Word(#[from] WordError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Empty,
    Sym(String),
    Pow(Box<Expr>, ExpVal),
    Seq(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpVal {
    Int(BigInt),
    Vec(Vec<BigInt>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

fn lex(src: &str) -> Result<Lexer, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '^' => {
                chars.next();
                col += 1;
                toks.push((Tok::Caret, tl, tc));
            }
            '(' => {
                chars.next();
                col += 1;
                toks.push((Tok::LParen, tl, tc));
            }
            ')' => {
                chars.next();
                col += 1;
                toks.push((Tok::RParen, tl, tc));
            }
            ',' => {
                chars.next();
                col += 1;
                toks.push((Tok::Comma, tl, tc));
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut s = String::new();
                s.push(c);
                chars.next();
                col += 1;
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let n = BigInt::from_str(&s).map_err(|_| ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("bad integer `{s}`"),
                })?;
                toks.push((Tok::Int(n), tl, tc));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(s), tl, tc));
            }
            other => {
                return Err(ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(Lexer {
        toks,
        pos: 0,
        end: (line, col),
    })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|&(_, l, c)| (l, c))
            .unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }
}

/// Parses a word expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut lx = lex(src)?;
    let e = parse_word(&mut lx)?;
    if lx.peek().is_some() {
        return Err(lx.err("trailing input"));
    }
    Ok(e)
}

fn parse_word(lx: &mut Lexer) -> Result<Expr, ParseError> {
    let mut factors = Vec::new();
    while matches!(
        lx.peek(),
        Some(Tok::Ident(_)) | Some(Tok::LParen) | Some(Tok::Int(_))
    ) {
        factors.push(parse_factor(lx)?);
    }
    if factors.is_empty() {
        return Err(lx.err("expected a word"));
    }
    if factors.len() == 1 {
        Ok(factors.pop().unwrap())
    } else {
        Ok(Expr::Seq(factors))
    }
}

fn parse_factor(lx: &mut Lexer) -> Result<Expr, ParseError> {
    let primary = match lx.next() {
        Some(Tok::Ident(name)) => Expr::Sym(name),
        Some(Tok::Int(n)) if n == BigInt::from(1) => Expr::Empty,
        Some(Tok::Int(n)) => {
            return Err(lx.err(format!("unexpected integer `{n}` (only `1` denotes a word)")))
        }
        Some(Tok::LParen) => {
            let inner = parse_word(lx)?;
            match lx.next() {
                Some(Tok::RParen) => inner,
                _ => return Err(lx.err("expected `)`")),
            }
        }
        _ => return Err(lx.err("expected an identifier or `(`")),
    };
    if lx.peek() == Some(&Tok::Caret) {
        lx.next();
        let exp = parse_exp(lx)?;
        Ok(Expr::Pow(Box::new(primary), exp))
    } else {
        Ok(primary)
    }
}

fn parse_exp(lx: &mut Lexer) -> Result<ExpVal, ParseError> {
    match lx.next() {
        Some(Tok::Int(n)) => Ok(ExpVal::Int(n)),
        Some(Tok::LParen) => {
            let mut coords = Vec::new();
            loop {
                match lx.next() {
                    Some(Tok::Int(n)) => coords.push(n),
                    _ => return Err(lx.err("expected an integer coordinate")),
                }
                match lx.next() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    _ => return Err(lx.err("expected `,` or `)`")),
                }
            }
            Ok(ExpVal::Vec(coords))
        }
        _ => Err(lx.err("expected an exponent")),
    }
}

/// Normalizes an expression tree into a canonical [`BlockWord`].
pub fn build_word(
    expr: &Expr,
    alphabet: &Alphabet,
    rank: usize,
) -> Result<BlockWord, ParseError> {
    match expr {
        Expr::Empty => Ok(BlockWord::empty(rank)),
        Expr::Sym(name) => {
            let id = alphabet.lookup(name).ok_or_else(|| ParseError::UnknownLetter {
                line: 0,
                col: 0,
                name: name.clone(),
            })?;
            Ok(BlockWord::letter(rank, Letter::new(id)))
        }
        Expr::Seq(fs) => {
            let mut acc = BlockWord::empty(rank);
            for f in fs {
                let w = build_word(f, alphabet, rank)?;
                acc = acc.mul(&w)?;
            }
            Ok(acc)
        }
        Expr::Pow(base, e) => {
            let b = build_word(base, alphabet, rank)?;
            match e {
                ExpVal::Int(n) => Ok(b.pow_int(n)?),
                ExpVal::Vec(coords) => {
                    if coords.len() != rank {
                        return Err(ParseError::Word(WordError::RankMismatch(
                            coords.len(),
                            rank,
                        )));
                    }
                    let v = OrdVec::new(coords.clone())
                        .map_err(|e| ParseError::Syntax {
                            line: 0,
                            col: 0,
                            msg: e.to_string(),
                        })?;
                    Ok(b.pow_vec(&v)?)
                }
            }
        }
    }
}

/// Parses a word expression straight to a canonical word.
pub fn parse_word_str(
    src: &str,
    alphabet: &Alphabet,
    rank: usize,
) -> Result<BlockWord, ParseError> {
    let e = parse_expr(src)?;
    build_word(&e, alphabet, rank)
}

/// Collects the identifiers appearing in an expression source, in order.
pub fn collect_idents(src: &str) -> Result<Vec<String>, ParseError> {
    let lx = lex(src)?;
    let mut seen = Vec::new();
    for (t, _, _) in lx.toks {
        if let Tok::Ident(name) = t {
            if !seen.contains(&name) {
                seen.push(name);
            }
        }
    }
    Ok(seen)
}

/// Prints a canonical word in the grammar; it re-parses to an equal word.
pub fn show_word(w: &BlockWord, alphabet: &Alphabet) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    let mut parts = Vec::new();
    for b in w.blocks() {
        match b {
            Block::Run { letter, count } => {
                let name = alphabet.name(letter.sym);
                let sign = if letter.inverse { "-" } else { "" };
                if count == &BigInt::from(1) && !letter.inverse {
                    parts.push(name.to_string());
                } else {
                    parts.push(format!("{name}^{sign}{count}"));
                }
            }
            Block::Power { period, exp } => {
                let inner: Vec<String> = period
                    .iter()
                    .map(|l| {
                        if l.inverse {
                            format!("{}^-1", alphabet.name(l.sym))
                        } else {
                            alphabet.name(l.sym).to_string()
                        }
                    })
                    .collect();
                parts.push(format!("({})^{}", inner.join(" "), exp));
            }
        }
    }
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alphabet() -> Alphabet {
        Alphabet::from_names(&["x", "y", "z"]).unwrap()
    }

    #[test]
    fn parse_simple_words() {
        let a = alphabet();
        let w = parse_word_str("x y z", &a, 2).unwrap();
        assert_eq!(w.len(), OrdVec::from_i64s(&[3, 0]));
        let e = parse_word_str("x x^-1", &a, 2).unwrap();
        assert!(e.is_empty());
        let e = parse_word_str("1", &a, 2).unwrap();
        assert!(e.is_empty());
    }

    #[test]
    fn parse_powers() {
        let a = alphabet();
        let w = parse_word_str("(x y)^(0,1) z^-2", &a, 2).unwrap();
        assert_eq!(w.len(), OrdVec::from_i64s(&[2, 2]));
        let v = parse_word_str("x^3", &a, 2).unwrap();
        assert_eq!(v.len(), OrdVec::from_i64s(&[3, 0]));
        // primitive root extraction: (xyxy)^(0,1) = (xy)^(0,2)
        let p = parse_word_str("(x y x y)^(0,1)", &a, 2).unwrap();
        let q = parse_word_str("(x y)^(0,2)", &a, 2).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn errors_carry_position() {
        let a = alphabet();
        match parse_word_str("x &", &a, 2) {
            Err(ParseError::Syntax { line: 1, col: 3, .. }) => {}
            other => panic!("expected syntax error at 1:3, got {other:?}"),
        }
        assert!(matches!(
            parse_word_str("w", &a, 2),
            Err(ParseError::UnknownLetter { .. })
        ));
        assert!(parse_word_str("x^(0,1,0)", &a, 2).is_err());
    }

    #[test]
    fn round_trip() {
        let a = alphabet();
        for src in [
            "x y^-2 z",
            "(x)^(0,1) y",
            "(x y^-1)^(-2,3) x",
            "1",
            "x^-1",
        ] {
            let w = parse_word_str(src, &a, 2).unwrap();
            let printed = show_word(&w, &a);
            let back = parse_word_str(&printed, &a, 2).unwrap();
            assert_eq!(w, back, "round trip failed for {src} -> {printed}");
        }
    }
}
