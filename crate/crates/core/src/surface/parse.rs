//! Lexer and recursive-descent parser for the surface language.
//!
//! ```text
//! prog   := fundef* [ "input" decl ("," decl)* ";" ] expr
//! fundef := "fun" name "(" name ":" type ")" [ ":" type ] "{" expr "}"
//! decl   := name ":" type
//! type   := atype [ "*" type ]            atype := "B" | "(" type ")"
//! expr   := "let" name "=" expr "in" expr
//!         | "if" expr "then" expr "else" expr
//!         | or
//! or     := xor ("or" xor)*     xor := and ("xor" and)*     and := unary ("and" unary)*
//! unary  := "not" unary | "fst" unary | "snd" unary | "observe" unary
//!         | "flip" rational | atom
//! atom   := "true" | "false" | name "(" expr ")" | name
//!         | "(" expr ")" | "(" expr "," expr ")" | "let" ... | "if" ...
//! ```
//!
//! `#` and `//` start comments.  `observe e` for a non-variable `e` becomes
//! `let fresh = e in observe fresh`.

use super::ast::{Expr, FunDef, Program, Ty};
use crate::error::{Error, Result};
use crate::rat::parse_rat;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const KEYWORDS: &[&str] = &[
    "let", "in", "if", "then", "else", "flip", "observe", "true", "false", "fst", "snd", "fun", "and", "or",
    "xor", "not", "input",
];

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let tok = |tok| Token { tok, line: li + 1, col };
            if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push(tok(Tok::Ident(chars[start..i].iter().collect())));
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '/') {
                    i += 1;
                }
                out.push(tok(Tok::Number(chars[start..i].iter().collect())));
            } else if "(),=:*{};".contains(c) {
                out.push(tok(Tok::Sym(c)));
                i += 1;
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

/// Parses a program.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
        fresh: 0,
    };
    let mut functions = Vec::new();
    while p.at_ident("fun") {
        functions.push(p.fundef()?);
    }
    let mut inputs = Vec::new();
    if p.at_ident("input") {
        p.pos += 1;
        loop {
            let name = p.name()?;
            p.expect_sym(':')?;
            inputs.push((name, p.ty()?));
            if p.at_sym(',') {
                p.pos += 1;
            } else {
                break;
            }
        }
        p.expect_sym(';')?;
    }
    let main = p.expr()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(p.err_at(t, "unexpected trailing input"));
    }
    Ok(Program {
        functions,
        inputs,
        main,
    })
}

/// Parses a single expression (no definitions, no input declaration).
pub fn parse_expr(text: &str) -> Result<Expr> {
    let prog = parse_program(text)?;
    if !prog.functions.is_empty() || !prog.inputs.is_empty() {
        return Err(Error::Syntax {
            line: 1,
            col: 1,
            msg: "expected a bare expression".into(),
        });
    }
    Ok(prog.main)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    fresh: usize,
}

impl Parser {
    fn err_at(&self, t: &Token, msg: &str) -> Error {
        Error::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.to_string(),
        }
    }

    fn err_here(&self, msg: &str) -> Error {
        match self.tokens.get(self.pos) {
            Some(t) => self.err_at(t, msg),
            None => {
                let (line, col) = self.tokens.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
                Error::Syntax {
                    line,
                    col,
                    msg: format!("{msg} (at end of input)"),
                }
            }
        }
    }

    fn at_ident(&self, kw: &str) -> bool {
        matches!(self.tokens.get(self.pos), Some(Token { tok: Tok::Ident(s), .. }) if s == kw)
    }

    fn at_sym(&self, c: char) -> bool {
        matches!(self.tokens.get(self.pos), Some(Token { tok: Tok::Sym(s), .. }) if *s == c)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.at_ident(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(&format!("expected `{kw}`")))
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.at_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(&format!("expected `{c}`")))
        }
    }

    fn name(&mut self) -> Result<String> {
        match self.tokens.get(self.pos) {
            Some(Token { tok: Tok::Ident(s), .. }) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err_here("expected a name")),
        }
    }

    fn fresh_name(&mut self) -> String {
        self.fresh += 1;
        format!("obs%{}", self.fresh)
    }

    fn fundef(&mut self) -> Result<FunDef> {
        self.expect_kw("fun")?;
        let name = self.name()?;
        self.expect_sym('(')?;
        let param = self.name()?;
        self.expect_sym(':')?;
        let param_ty = self.ty()?;
        self.expect_sym(')')?;
        let ret_ty = if self.at_sym(':') {
            self.pos += 1;
            Some(self.ty()?)
        } else {
            None
        };
        self.expect_sym('{')?;
        let body = self.expr()?;
        self.expect_sym('}')?;
        Ok(FunDef {
            name,
            param,
            param_ty,
            ret_ty,
            body,
        })
    }

    fn ty(&mut self) -> Result<Ty> {
        let first = if self.at_sym('(') {
            self.pos += 1;
            let t = self.ty()?;
            self.expect_sym(')')?;
            t
        } else if self.at_ident("B") || self.at_ident("Bool") {
            self.pos += 1;
            Ty::Bool
        } else {
            return Err(self.err_here("expected a type"));
        };
        if self.at_sym('*') {
            self.pos += 1;
            Ok(Ty::prod(first, self.ty()?))
        } else {
            Ok(first)
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        if self.at_ident("let") {
            self.pos += 1;
            let x = self.name()?;
            self.expect_sym('=')?;
            let bound = self.expr()?;
            self.expect_kw("in")?;
            let body = self.expr()?;
            return Ok(Expr::let_in(&x, bound, body));
        }
        if self.at_ident("if") {
            self.pos += 1;
            let g = self.expr()?;
            self.expect_kw("then")?;
            let a = self.expr()?;
            self.expect_kw("else")?;
            let b = self.expr()?;
            return Ok(Expr::ite(g, a, b));
        }
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr> {
        let mut e = self.xor_expr()?;
        while self.at_ident("or") {
            self.pos += 1;
            e = Expr::or(e, self.xor_expr()?);
        }
        Ok(e)
    }

    fn xor_expr(&mut self) -> Result<Expr> {
        let mut e = self.and_expr()?;
        while self.at_ident("xor") {
            self.pos += 1;
            let rhs = self.and_expr()?;
            // Bind the right operand once so that it is evaluated (and any
            // observation in it applied) a single time.
            let v = self.fresh_name();
            e = Expr::let_in(&v, rhs, Expr::ite(e, Expr::not(Expr::var(&v)), Expr::var(&v)));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while self.at_ident("and") {
            self.pos += 1;
            e = Expr::and(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.at_ident("not") {
            self.pos += 1;
            return Ok(Expr::not(self.unary()?));
        }
        if self.at_ident("fst") {
            self.pos += 1;
            return Ok(Expr::Fst(Box::new(self.unary()?)));
        }
        if self.at_ident("snd") {
            self.pos += 1;
            return Ok(Expr::Snd(Box::new(self.unary()?)));
        }
        if self.at_ident("observe") {
            self.pos += 1;
            return Ok(match self.unary()? {
                Expr::Var(x) => Expr::Observe(x),
                e => {
                    let v = self.fresh_name();
                    Expr::let_in(&v, e, Expr::Observe(v.clone()))
                }
            });
        }
        if self.at_ident("flip") {
            self.pos += 1;
            let tok = self.tokens.get(self.pos).cloned();
            let p = match &tok {
                Some(t @ Token { tok: Tok::Number(s), .. }) => {
                    parse_rat(s).ok_or_else(|| self.err_at(t, "malformed probability"))?
                }
                _ => return Err(self.err_here("expected a probability after `flip`")),
            };
            self.pos += 1;
            return Ok(Expr::Flip(p));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        if self.at_ident("true") {
            self.pos += 1;
            return Ok(Expr::True);
        }
        if self.at_ident("false") {
            self.pos += 1;
            return Ok(Expr::False);
        }
        if self.at_ident("let") || self.at_ident("if") {
            return self.expr();
        }
        if self.at_sym('(') {
            self.pos += 1;
            let a = self.expr()?;
            if self.at_sym(',') {
                self.pos += 1;
                let b = self.expr()?;
                self.expect_sym(')')?;
                return Ok(Expr::pair(a, b));
            }
            self.expect_sym(')')?;
            return Ok(a);
        }
        let name = self.name()?;
        if self.at_sym('(') {
            self.pos += 1;
            let arg = self.expr()?;
            self.expect_sym(')')?;
            return Ok(Expr::Call(name, Box::new(arg)));
        }
        Ok(Expr::Var(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn simple_let() {
        let e = parse_expr("let x = flip 0.5 in x").unwrap();
        assert_eq!(e, Expr::let_in("x", Expr::Flip(rat(1, 2)), Expr::var("x")));
    }

    #[test]
    fn observe_of_compound_gets_fresh_let() {
        let e = parse_expr("observe (x and y)").unwrap();
        match e {
            Expr::Let(v, bound, body) => {
                assert_eq!(*bound, Expr::and(Expr::var("x"), Expr::var("y")));
                assert_eq!(*body, Expr::Observe(v));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn functions_and_inputs() {
        let p = parse_program("fun f(x : B) : B { x or flip 1/2 }\ninput a : B, b : B * B;\nf(a)").unwrap();
        assert_eq!(p.functions.len(), 1);
        assert_eq!(p.inputs[1].1, Ty::prod(Ty::Bool, Ty::Bool));
        assert_eq!(p.main, Expr::Call("f".into(), Box::new(Expr::var("a"))));
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_expr("let x = in x") {
            Err(Error::Syntax { line, col, .. }) => assert_eq!((line, col), (1, 9)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_expr("flip").is_err());
        assert!(parse_expr("x y").is_err());
    }
}
