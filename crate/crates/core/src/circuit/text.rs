//! The textual circuit format.
//!
//! ```text
//! term := "seq" "(" term ("," term)* ")"     right-nested sequential chain
//!       | "par" "(" term ("," term)* ")"     right-nested parallel chain
//!       | "flip" "(" rational ")"
//!       | "copy" | "del" | "and" | "not" | "cond" | "id" | "id0" | "swap"
//!       | derived-gate [ "(" nat ("," nat)* ")" ]
//! ```
//!
//! Derived gates (`mux`, `or`, `xor`, `bot`, `all(n)`, `fail(m,n)`, `id(n)`,
//! `del(n)`, `not(n)`, `copy(n)`, `and(n)`, `or(n)`, `cond(n)`, `mux(n)`,
//! `swap(m,k)`) are expanded on parsing.  `#` starts a comment running to the
//! end of the line.  Rationals are written `n`, `n/d` or as exact decimals.

use super::{flatten, gates, typecheck, Circuit, Generator, Term};
use crate::error::{Error, Result};
use crate::rat::parse_rat;

/// Canonical text of a circuit: the flattened term printed in the grammar
/// above.  `parse_circuit(serialize(c))` is structurally equal to
/// `flatten(c)`.
pub fn serialize(c: &Circuit) -> String {
    flatten(c).to_string()
}

/// Parses and type-checks circuit text.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    typecheck(&parse_term(text)?)
}

/// Parses circuit text into an untyped term, keeping the structure as
/// written.
pub fn parse_term(text: &str) -> Result<Term> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let t = p.term()?;
    if let Some(tok) = p.peek() {
        return Err(p.error_at(tok, "unexpected trailing input"));
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let push = |tok| Token { tok, line: li + 1, col };
            if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c == '(' {
                out.push(push(Tok::LParen));
                i += 1;
            } else if c == ')' {
                out.push(push(Tok::RParen));
                i += 1;
            } else if c == ',' {
                out.push(push(Tok::Comma));
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(push(Tok::Ident(chars[start..i].iter().collect())));
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '/') {
                    i += 1;
                }
                out.push(push(Tok::Number(chars[start..i].iter().collect())));
            } else {
                return Err(Error::Syntax {
                    line: li + 1,
                    col,
                    msg: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error_at(&self, tok: &Token, msg: &str) -> Error {
        Error::Syntax {
            line: tok.line,
            col: tok.col,
            msg: msg.to_string(),
        }
    }

    fn error_here(&self, msg: &str) -> Error {
        match self.peek() {
            Some(t) => self.error_at(t, msg),
            None => {
                let (line, col) = self
                    .tokens
                    .last()
                    .map(|t| (t.line, t.col + 1))
                    .unwrap_or((1, 1));
                Error::Syntax {
                    line,
                    col,
                    msg: format!("{msg} (at end of input)"),
                }
            }
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t.tok == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error_here(&format!("expected {what}"))),
        }
    }

    fn at(&self, want: &Tok) -> bool {
        self.peek().is_some_and(|t| &t.tok == want)
    }

    fn term(&mut self) -> Result<Term> {
        let tok = self.next().ok_or_else(|| self.error_here("expected a circuit term"))?;
        let Tok::Ident(name) = &tok.tok else {
            return Err(self.error_at(&tok, "expected a circuit term"));
        };
        match name.as_str() {
            "seq" | "par" => {
                self.expect(Tok::LParen, "`(`")?;
                let mut parts = vec![self.term()?];
                while self.at(&Tok::Comma) {
                    self.pos += 1;
                    parts.push(self.term()?);
                }
                self.expect(Tok::RParen, "`)` or `,`")?;
                let is_seq = name == "seq";
                let mut acc = parts.pop().expect("non-empty");
                while let Some(t) = parts.pop() {
                    acc = if is_seq {
                        Term::Seq(Box::new(t), Box::new(acc))
                    } else {
                        Term::Par(Box::new(t), Box::new(acc))
                    };
                }
                Ok(acc)
            }
            "flip" => {
                self.expect(Tok::LParen, "`(`")?;
                let num = self.next().ok_or_else(|| self.error_here("expected a probability"))?;
                let p = match &num.tok {
                    Tok::Number(s) => parse_rat(s).ok_or_else(|| self.error_at(&num, "malformed rational"))?,
                    _ => return Err(self.error_at(&num, "expected a probability")),
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(Term::Gen(Generator::Flip(p)))
            }
            _ => {
                let args = if self.at(&Tok::LParen) {
                    self.pos += 1;
                    let mut args = vec![self.nat()?];
                    while self.at(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.nat()?);
                    }
                    self.expect(Tok::RParen, "`)` or `,`")?;
                    Some(args)
                } else {
                    None
                };
                match (name.as_str(), args) {
                    ("copy", None) => Ok(Term::Gen(Generator::Copy)),
                    ("del", None) => Ok(Term::Gen(Generator::Discard)),
                    ("and", None) => Ok(Term::Gen(Generator::And)),
                    ("not", None) => Ok(Term::Gen(Generator::Not)),
                    ("cond", None) => Ok(Term::Gen(Generator::Cond)),
                    ("id", None) => Ok(Term::Id),
                    ("id0", None) => Ok(Term::Id0),
                    ("swap", None) => Ok(Term::Swap),
                    (n, args) => {
                        let args = args.unwrap_or_default();
                        match gates::derived_gate(n, &args) {
                            Some(Ok(c)) => Ok(Term::Circuit(c)),
                            Some(Err(e)) => Err(e),
                            None => Err(self.error_at(
                                &tok,
                                &format!("unknown gate `{n}` with {} argument(s)", args.len()),
                            )),
                        }
                    }
                }
            }
        }
    }

    fn nat(&mut self) -> Result<usize> {
        let tok = self.next().ok_or_else(|| self.error_here("expected a natural number"))?;
        match &tok.tok {
            Tok::Number(s) => s
                .parse::<usize>()
                .map_err(|_| self.error_at(&tok, "expected a natural number")),
            _ => Err(self.error_at(&tok, "expected a natural number")),
        }
    }
}
