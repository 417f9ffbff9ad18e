//! Abstract syntax of the surface language.

use std::fmt;

use crate::rat::{fmt_rat, Rat};

/// Types: Booleans and (right-associative) products.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ty {
    Bool,
    Prod(Box<Ty>, Box<Ty>),
}

impl Ty {
    pub fn prod(a: Ty, b: Ty) -> Ty {
        Ty::Prod(Box::new(a), Box::new(b))
    }

    /// Number of Boolean wires carrying a value of this type.
    pub fn width(&self) -> usize {
        match self {
            Ty::Bool => 1,
            Ty::Prod(a, b) => a.width() + b.width(),
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Bool => f.write_str("B"),
            Ty::Prod(a, b) => {
                if matches!(**a, Ty::Prod(..)) {
                    write!(f, "({a}) * {b}")
                } else {
                    write!(f, "{a} * {b}")
                }
            }
        }
    }
}

/// Expressions.  The Boolean connectives are sugar and never appear here:
/// the parser expands them into conditionals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    True,
    False,
    Flip(Rat),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    /// `if guard then yes else no`.
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Let(String, Box<Expr>, Box<Expr>),
    /// Conditions on the named Boolean variable being true, returning it.
    Observe(String),
    Call(String, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn let_in(name: &str, bound: Expr, body: Expr) -> Expr {
        Expr::Let(name.to_string(), Box::new(bound), Box::new(body))
    }

    pub fn ite(guard: Expr, yes: Expr, no: Expr) -> Expr {
        Expr::If(Box::new(guard), Box::new(yes), Box::new(no))
    }

    pub fn pair(a: Expr, b: Expr) -> Expr {
        Expr::Pair(Box::new(a), Box::new(b))
    }

    /// `not e`, as a conditional.
    pub fn not(e: Expr) -> Expr {
        Expr::ite(e, Expr::False, Expr::True)
    }

    /// `a and b`, as a conditional.
    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::ite(a, b, Expr::False)
    }

    /// `a or b`, as a conditional.
    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::ite(a, Expr::True, b)
    }

    /// Depth of the chain of `let`s starting at this expression.
    pub fn let_depth(&self) -> usize {
        match self {
            Expr::Let(_, _, body) => 1 + body.let_depth(),
            _ => 0,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(x) => f.write_str(x),
            Expr::True => f.write_str("true"),
            Expr::False => f.write_str("false"),
            Expr::Flip(p) => write!(f, "flip {}", fmt_rat(p)),
            Expr::Pair(a, b) => write!(f, "({a}, {b})"),
            Expr::Fst(e) => write!(f, "fst ({e})"),
            Expr::Snd(e) => write!(f, "snd ({e})"),
            Expr::If(g, a, b) => write!(f, "(if {g} then {a} else {b})"),
            Expr::Let(x, a, b) => write!(f, "let {x} = {a} in {b}"),
            Expr::Observe(x) => write!(f, "observe {x}"),
            Expr::Call(g, a) => write!(f, "{g}({a})"),
        }
    }
}

/// A first-order, non-recursive function definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDef {
    pub name: String,
    pub param: String,
    pub param_ty: Ty,
    /// Declared return type, if annotated.
    pub ret_ty: Option<Ty>,
    pub body: Expr,
}

/// A program: function definitions, the free variables of the main
/// expression (its context, in wire order), and the main expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub functions: Vec<FunDef>,
    pub inputs: Vec<(String, Ty)>,
    pub main: Expr,
}

impl Program {
    /// A closed program without functions.
    pub fn closed(main: Expr) -> Program {
        Program {
            functions: Vec::new(),
            inputs: Vec::new(),
            main,
        }
    }

    /// Total number of input wires.
    pub fn input_width(&self) -> usize {
        self.inputs.iter().map(|(_, t)| t.width()).sum()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.functions {
            write!(f, "fun {}({} : {})", d.name, d.param, d.param_ty)?;
            if let Some(t) = &d.ret_ty {
                write!(f, " : {t}")?;
            }
            writeln!(f, " {{ {} }}", d.body)?;
        }
        if !self.inputs.is_empty() {
            let decls: Vec<String> = self.inputs.iter().map(|(x, t)| format!("{x} : {t}")).collect();
            writeln!(f, "input {} ;", decls.join(", "))?;
        }
        write!(f, "{}", self.main)
    }
}
