//! The surface language: a small first-order probabilistic language with
//! `let`, `if`, pairs, `flip` and `observe`, compiled to circuits.
//!
//! A program with context `Γ` and main expression of type `τ` compiles to a
//! circuit `|Γ| -> |τ|`, where `|·|` counts Boolean components.  Functions are
//! inlined before translation.

mod ast;
mod parse;

use std::collections::HashMap;

use serde_json::{Map, Value};

pub use ast::{Expr, FunDef, Program, Ty};
pub use parse::{parse_expr, parse_program};

use crate::circuit::gates::{copy_bundle, copy_bundle_k, discard_n, id_n, mux_n};
use crate::circuit::{sq, Circuit};
use crate::error::{Error, Result};
use crate::rat::{rat_json, Rat};
use crate::semantics::{eval_with, Bits, Limits, ProjClass};

/// A type-annotated expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TExpr {
    pub kind: TKind,
    pub ty: Ty,
}

/// Typed expression nodes, mirroring [`Expr`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TKind {
    Var(String),
    True,
    False,
    Flip(Rat),
    Pair(Box<TExpr>, Box<TExpr>),
    Fst(Box<TExpr>),
    Snd(Box<TExpr>),
    If(Box<TExpr>, Box<TExpr>, Box<TExpr>),
    Let(String, Box<TExpr>, Box<TExpr>),
    Observe(String),
    Call(String, Box<TExpr>),
}

/// A type-checked program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedProgram {
    /// Function signatures `(name, parameter type, return type)` in order.
    pub signatures: Vec<(String, Ty, Ty)>,
    pub inputs: Vec<(String, Ty)>,
    pub main: TExpr,
}

type Signatures = HashMap<String, (Ty, Ty)>;

fn check(e: &Expr, ctx: &mut Vec<(String, Ty)>, funs: &Signatures) -> Result<TExpr> {
    let lookup = |ctx: &[(String, Ty)], x: &str| -> Result<Ty> {
        ctx.iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| Error::UnboundVariable(x.to_string()))
    };
    let (kind, ty) = match e {
        Expr::Var(x) => (TKind::Var(x.clone()), lookup(ctx, x)?),
        Expr::True => (TKind::True, Ty::Bool),
        Expr::False => (TKind::False, Ty::Bool),
        Expr::Flip(p) => {
            if !crate::rat::is_probability(p) {
                return Err(Error::BadProbability(crate::rat::fmt_rat(p)));
            }
            (TKind::Flip(p.clone()), Ty::Bool)
        }
        Expr::Pair(a, b) => {
            let a = check(a, ctx, funs)?;
            let b = check(b, ctx, funs)?;
            let ty = Ty::prod(a.ty.clone(), b.ty.clone());
            (TKind::Pair(Box::new(a), Box::new(b)), ty)
        }
        Expr::Fst(a) | Expr::Snd(a) => {
            let a = check(a, ctx, funs)?;
            let Ty::Prod(l, r) = a.ty.clone() else {
                return Err(Error::SurfaceType(format!("projection of non-pair expression of type {}", a.ty)));
            };
            if matches!(e, Expr::Fst(_)) {
                (TKind::Fst(Box::new(a)), *l)
            } else {
                (TKind::Snd(Box::new(a)), *r)
            }
        }
        Expr::If(g, a, b) => {
            let g = check(g, ctx, funs)?;
            if g.ty != Ty::Bool {
                return Err(Error::SurfaceType(format!("if guard has type {}, expected B", g.ty)));
            }
            let a = check(a, ctx, funs)?;
            let b = check(b, ctx, funs)?;
            if a.ty != b.ty {
                return Err(Error::SurfaceType(format!("if branches have types {} and {}", a.ty, b.ty)));
            }
            let ty = a.ty.clone();
            (TKind::If(Box::new(g), Box::new(a), Box::new(b)), ty)
        }
        Expr::Let(x, bound, body) => {
            let bound = check(bound, ctx, funs)?;
            ctx.push((x.clone(), bound.ty.clone()));
            let body = check(body, ctx, funs);
            ctx.pop();
            let body = body?;
            let ty = body.ty.clone();
            (TKind::Let(x.clone(), Box::new(bound), Box::new(body)), ty)
        }
        Expr::Observe(x) => {
            let t = lookup(ctx, x)?;
            if t != Ty::Bool {
                return Err(Error::SurfaceType(format!("observe needs a Boolean variable, `{x}` has type {t}")));
            }
            (TKind::Observe(x.clone()), Ty::Bool)
        }
        Expr::Call(f, arg) => {
            let (pt, rt) = funs
                .get(f)
                .cloned()
                .ok_or_else(|| Error::Arity(format!("call to undefined function `{f}`")))?;
            let arg = check(arg, ctx, funs)?;
            if arg.ty != pt {
                return Err(Error::Arity(format!(
                    "function `{f}` expects an argument of type {pt}, got {}",
                    arg.ty
                )));
            }
            (TKind::Call(f.clone(), Box::new(arg)), rt)
        }
    };
    Ok(TExpr { kind, ty })
}

/// Type-checks a program: every function body in the context of its
/// parameter (calling only earlier functions), then the main expression in
/// the declared input context.
pub fn typecheck_program(p: &Program) -> Result<TypedProgram> {
    let mut funs = Signatures::new();
    let mut signatures = Vec::new();
    for d in &p.functions {
        if funs.contains_key(&d.name) {
            return Err(Error::SurfaceType(format!("function `{}` defined twice", d.name)));
        }
        let mut ctx = vec![(d.param.clone(), d.param_ty.clone())];
        let body = check(&d.body, &mut ctx, &funs)?;
        if let Some(rt) = &d.ret_ty {
            if *rt != body.ty {
                return Err(Error::SurfaceType(format!(
                    "function `{}` declared to return {rt} but returns {}",
                    d.name, body.ty
                )));
            }
        }
        funs.insert(d.name.clone(), (d.param_ty.clone(), body.ty.clone()));
        signatures.push((d.name.clone(), d.param_ty.clone(), body.ty));
    }
    let mut ctx = p.inputs.clone();
    let main = check(&p.main, &mut ctx, &funs)?;
    Ok(TypedProgram {
        signatures,
        inputs: p.inputs.clone(),
        main,
    })
}

/// Renames free occurrences of `from` to `to` (`to` must be fresh).
fn rename(e: &Expr, from: &str, to: &str) -> Expr {
    let r = |e: &Expr| Box::new(rename(e, from, to));
    match e {
        Expr::Var(x) if x == from => Expr::Var(to.to_string()),
        Expr::Observe(x) if x == from => Expr::Observe(to.to_string()),
        Expr::Var(_) | Expr::Observe(_) | Expr::True | Expr::False | Expr::Flip(_) => e.clone(),
        Expr::Pair(a, b) => Expr::Pair(r(a), r(b)),
        Expr::Fst(a) => Expr::Fst(r(a)),
        Expr::Snd(a) => Expr::Snd(r(a)),
        Expr::If(g, a, b) => Expr::If(r(g), r(a), r(b)),
        Expr::Let(x, bound, body) => {
            let body = if x == from { body.clone() } else { r(body) };
            Expr::Let(x.clone(), r(bound), body)
        }
        Expr::Call(f, a) => Expr::Call(f.clone(), r(a)),
    }
}

fn inline_expr(e: &Expr, defs: &HashMap<&str, &FunDef>, counter: &mut usize) -> Result<Expr> {
    let mut go = |e: &Expr| inline_expr(e, defs, counter).map(Box::new);
    Ok(match e {
        Expr::Var(_) | Expr::Observe(_) | Expr::True | Expr::False | Expr::Flip(_) => e.clone(),
        Expr::Pair(a, b) => Expr::Pair(go(a)?, go(b)?),
        Expr::Fst(a) => Expr::Fst(go(a)?),
        Expr::Snd(a) => Expr::Snd(go(a)?),
        Expr::If(g, a, b) => Expr::If(go(g)?, go(a)?, go(b)?),
        Expr::Let(x, bound, body) => Expr::Let(x.clone(), go(bound)?, go(body)?),
        Expr::Call(f, arg) => {
            let arg = go(arg)?;
            let d = defs
                .get(f.as_str())
                .ok_or_else(|| Error::Arity(format!("call to undefined function `{f}`")))?;
            let body = inline_expr(&d.body, defs, counter)?;
            *counter += 1;
            let fresh = format!("{}%{}", d.param, counter);
            Expr::Let(fresh.clone(), arg, Box::new(rename(&body, &d.param, &fresh)))
        }
    })
}

/// Replaces every call by a `let` binding the argument to a fresh copy of
/// the parameter around the function body.  The result has no functions.
pub fn inline(p: &Program) -> Result<Program> {
    let defs: HashMap<&str, &FunDef> = p.functions.iter().map(|d| (d.name.as_str(), d)).collect();
    let mut counter = 0;
    Ok(Program {
        functions: Vec::new(),
        inputs: p.inputs.clone(),
        main: inline_expr(&p.main, &defs, &mut counter)?,
    })
}

/// `copy the context, then run c on (context, context)` collapsed for an
/// empty context.
fn with_copied_context(width: usize, k: usize, body: Circuit) -> Circuit {
    if width == 0 {
        body
    } else if k == 2 {
        sq(copy_bundle(width), body)
    } else {
        sq(copy_bundle_k(width, k), body)
    }
}

fn discard_then(width: usize, c: Circuit) -> Circuit {
    if width == 0 {
        c
    } else {
        sq(discard_n(width), c)
    }
}

/// Projection of the context onto the wires of the last binding of `x`.
fn select_var(ctx: &[(String, usize)], x: &str) -> Circuit {
    let i = ctx.iter().rposition(|(y, _)| y == x).expect("typechecked");
    let before: usize = ctx[..i].iter().map(|(_, w)| w).sum();
    let after: usize = ctx[i + 1..].iter().map(|(_, w)| w).sum();
    let mut parts = Vec::new();
    if before > 0 {
        parts.push(discard_n(before));
    }
    parts.push(id_n(ctx[i].1));
    if after > 0 {
        parts.push(discard_n(after));
    }
    Circuit::par_all(parts)
}

fn tr(e: &TExpr, ctx: &mut Vec<(String, usize)>) -> Circuit {
    let width: usize = ctx.iter().map(|(_, w)| w).sum();
    match &e.kind {
        TKind::Var(x) => select_var(ctx, x),
        TKind::True => discard_then(width, Circuit::constant(true)),
        TKind::False => discard_then(width, Circuit::constant(false)),
        TKind::Flip(p) => discard_then(width, crate::circuit::flip(p)),
        TKind::Pair(a, b) => {
            let body = Circuit::par(tr(a, ctx), tr(b, ctx));
            with_copied_context(width, 2, body)
        }
        TKind::Fst(a) | TKind::Snd(a) => {
            let Ty::Prod(l, r) = &a.ty else { unreachable!("typechecked") };
            let proj = if matches!(e.kind, TKind::Fst(_)) {
                Circuit::par(id_n(l.width()), discard_n(r.width()))
            } else {
                Circuit::par(discard_n(l.width()), id_n(r.width()))
            };
            sq(tr(a, ctx), proj)
        }
        TKind::If(g, a, b) => {
            let body = Circuit::par_all(vec![tr(g, ctx), tr(a, ctx), tr(b, ctx)]);
            sq(with_copied_context(width, 3, body), mux_n(e.ty.width()))
        }
        TKind::Let(x, bound, body) => {
            let first = with_copied_context(width, 2, Circuit::par(id_n(width), tr(bound, ctx)));
            ctx.push((x.clone(), bound.ty.width()));
            let rest = tr(body, ctx);
            ctx.pop();
            sq(first, rest)
        }
        TKind::Observe(x) => sq(
            select_var(ctx, x),
            sq(Circuit::par(Circuit::id(), Circuit::constant(true)), Circuit::cond()),
        ),
        TKind::Call(..) => unreachable!("calls are inlined before translation"),
    }
}

/// Translates a program to a circuit `|inputs| -> |main type|`.
pub fn translate(p: &Program) -> Result<Circuit> {
    typecheck_program(p)?;
    let flat = inline(p)?;
    let typed = typecheck_program(&flat)?;
    let mut ctx: Vec<(String, usize)> = typed.inputs.iter().map(|(x, t)| (x.clone(), t.width())).collect();
    Ok(tr(&typed.main, &mut ctx))
}

/// Exact inference: the canonical class of the program's semantics.
pub fn infer(p: &Program) -> Result<ProjClass> {
    infer_with(p, &Limits::default())
}

/// [`infer`] with explicit evaluation limits.
pub fn infer_with(p: &Program, limits: &Limits) -> Result<ProjClass> {
    Ok(eval_with(&translate(p)?, limits)?.canonical_class())
}

/// JSON rendering of an inference result:
/// `{"class":"canonical","dist":{"<y>":[n,d],...}}` or `{"class":"bottom"}`.
///
/// Keys list every output bit-vector in descending binary order.  For open
/// programs keys are `"<y>|<x>"`, grouped by input in descending order, and
/// the weights are those of the (globally normalized) canonical class.
pub fn infer_json(class: &ProjClass) -> Value {
    let mut out = Map::new();
    match class {
        ProjClass::Bottom { .. } => {
            out.insert("class".into(), Value::from("bottom"));
        }
        ProjClass::Canonical(m) => {
            out.insert("class".into(), Value::from("canonical"));
            let mut dist = Map::new();
            for x in (0..m.cols()).rev() {
                for y in (0..m.rows()).rev() {
                    let ys = Bits::from_index(y, m.outputs()).to_string();
                    let key = if m.inputs() == 0 {
                        ys
                    } else {
                        format!("{ys}|{}", Bits::from_index(x, m.inputs()))
                    };
                    dist.insert(key, rat_json(m.entry(y, x)));
                }
            }
            out.insert("dist".into(), Value::Object(dist));
        }
    }
    Value::Object(out)
}
