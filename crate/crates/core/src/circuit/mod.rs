//! The circuit IR: typed term trees over the probabilistic Boolean generators.
//!
//! A [`Circuit`] is an immutable, cheaply clonable tree.  Every node caches its
//! type `m -> n` and a structural hash, so equality tests and hashing are fast
//! even on the large circuits produced by normal-form construction.
//!
//! Paths into a term are sequences of child selectors: `0` picks the left
//! operand of `seq` (or the top operand of `par`), `1` the right (or bottom).

mod flatten;
pub mod gates;
mod text;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{One, Zero};

pub use flatten::{flatten, is_identity_bundle, par_elements, seq_elements};
pub use text::{parse_circuit, parse_term, serialize};

use crate::error::{Error, Result};
use crate::rat::{fmt_rat, is_probability, Rat};

/// The type `m -> n` of a circuit: numbers of input and output wires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CircType {
    pub inputs: usize,
    pub outputs: usize,
}

impl CircType {
    pub const fn new(inputs: usize, outputs: usize) -> Self {
        CircType { inputs, outputs }
    }
}

impl fmt::Display for CircType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.inputs, self.outputs)
    }
}

/// The six generators of the calculus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Generator {
    /// Duplicates a wire, `1 -> 2`.
    Copy,
    /// Discards a wire, `1 -> 0`.
    Discard,
    /// Conjunction, `2 -> 1`.
    And,
    /// Negation, `1 -> 1`.
    Not,
    /// A biased coin emitting `1` with the given probability, `0 -> 1`.
    Flip(Rat),
    /// Conditioning: constrains its two inputs to be equal, `2 -> 1`.
    Cond,
}

impl Generator {
    pub fn ty(&self) -> CircType {
        match self {
            Generator::Copy => CircType::new(1, 2),
            Generator::Discard => CircType::new(1, 0),
            Generator::And => CircType::new(2, 1),
            Generator::Not => CircType::new(1, 1),
            Generator::Flip(_) => CircType::new(0, 1),
            Generator::Cond => CircType::new(2, 1),
        }
    }
}

/// One node of a circuit term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Gen(Generator),
    /// The identity on one wire.
    Id,
    /// The identity on zero wires (the empty diagram).
    Id0,
    /// Exchanges two wires.
    Swap,
    /// Sequential composition: first the left operand, then the right one.
    Seq(Circuit, Circuit),
    /// Parallel composition: the first operand sits on top.
    Par(Circuit, Circuit),
}

struct Inner {
    node: Node,
    ty: CircType,
    hash: u64,
}

/// A well-typed circuit term.
#[derive(Clone)]
pub struct Circuit(Arc<Inner>);

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.ty == other.0.ty && self.0.node == other.0.node)
    }
}

impl Eq for Circuit {}

impl Hash for Circuit {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} : {}", self.ty())
    }
}

impl fmt::Display for Circuit {
    /// Prints the term exactly as built (no flattening); see [`serialize`]
    /// for the canonical text form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Gen(g) => match g {
                Generator::Copy => f.write_str("copy"),
                Generator::Discard => f.write_str("del"),
                Generator::And => f.write_str("and"),
                Generator::Not => f.write_str("not"),
                Generator::Cond => f.write_str("cond"),
                Generator::Flip(p) => write!(f, "flip({})", fmt_rat(p)),
            },
            Node::Id => f.write_str("id"),
            Node::Id0 => f.write_str("id0"),
            Node::Swap => f.write_str("swap"),
            Node::Seq(a, b) => write!(f, "seq({a}, {b})"),
            Node::Par(a, b) => write!(f, "par({a}, {b})"),
        }
    }
}

fn node_hash(node: &Node) -> u64 {
    let mut h = DefaultHasher::new();
    match node {
        Node::Gen(g) => {
            0u8.hash(&mut h);
            g.hash(&mut h);
        }
        Node::Id => 1u8.hash(&mut h),
        Node::Id0 => 2u8.hash(&mut h),
        Node::Swap => 3u8.hash(&mut h),
        Node::Seq(a, b) => {
            4u8.hash(&mut h);
            a.0.hash.hash(&mut h);
            b.0.hash.hash(&mut h);
        }
        Node::Par(a, b) => {
            5u8.hash(&mut h);
            a.0.hash.hash(&mut h);
            b.0.hash.hash(&mut h);
        }
    }
    h.finish()
}

impl Circuit {
    fn make(node: Node, ty: CircType) -> Circuit {
        let hash = node_hash(&node);
        Circuit(Arc::new(Inner { node, ty, hash }))
    }

    pub fn gen(g: Generator) -> Circuit {
        let ty = g.ty();
        Circuit::make(Node::Gen(g), ty)
    }

    pub fn copy() -> Circuit {
        Circuit::gen(Generator::Copy)
    }

    pub fn discard() -> Circuit {
        Circuit::gen(Generator::Discard)
    }

    pub fn and() -> Circuit {
        Circuit::gen(Generator::And)
    }

    pub fn not() -> Circuit {
        Circuit::gen(Generator::Not)
    }

    pub fn cond() -> Circuit {
        Circuit::gen(Generator::Cond)
    }

    /// `flip(p)`; fails unless `0 <= p <= 1`.
    pub fn flip(p: Rat) -> Result<Circuit> {
        if !is_probability(&p) {
            return Err(Error::BadProbability(fmt_rat(&p)));
        }
        Ok(Circuit::gen(Generator::Flip(p)))
    }

    /// The constant `flip(1)` or `flip(0)`.
    pub fn constant(b: bool) -> Circuit {
        let p = if b { Rat::one() } else { Rat::zero() };
        Circuit::gen(Generator::Flip(p))
    }

    pub fn id() -> Circuit {
        Circuit::make(Node::Id, CircType::new(1, 1))
    }

    pub fn id0() -> Circuit {
        Circuit::make(Node::Id0, CircType::new(0, 0))
    }

    pub fn swap() -> Circuit {
        Circuit::make(Node::Swap, CircType::new(2, 2))
    }

    /// Sequential composition `a ; b`.
    pub fn seq(a: Circuit, b: Circuit) -> Result<Circuit> {
        if a.outputs() != b.inputs() {
            return Err(Error::TypeMismatch {
                path: vec![],
                left: a.ty(),
                right: b.ty(),
            });
        }
        let ty = CircType::new(a.inputs(), b.outputs());
        Ok(Circuit::make(Node::Seq(a, b), ty))
    }

    /// Parallel composition `a ⊗ b` (always well typed).
    pub fn par(a: Circuit, b: Circuit) -> Circuit {
        let ty = CircType::new(a.inputs() + b.inputs(), a.outputs() + b.outputs());
        Circuit::make(Node::Par(a, b), ty)
    }

    /// Right-nested sequential composition of a non-empty list.
    pub fn seq_all(parts: Vec<Circuit>) -> Result<Circuit> {
        let mut iter = parts.into_iter().rev();
        let mut acc = iter.next().expect("seq_all needs at least one circuit");
        for c in iter {
            acc = Circuit::seq(c, acc)?;
        }
        Ok(acc)
    }

    /// Right-nested parallel composition; the empty list gives `id0`.
    pub fn par_all(parts: Vec<Circuit>) -> Circuit {
        let mut iter = parts.into_iter().rev();
        match iter.next() {
            None => Circuit::id0(),
            Some(last) => iter.fold(last, |acc, c| Circuit::par(c, acc)),
        }
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn ty(&self) -> CircType {
        self.0.ty
    }

    pub fn inputs(&self) -> usize {
        self.0.ty.inputs
    }

    pub fn outputs(&self) -> usize {
        self.0.ty.outputs
    }

    /// Whether `self` and `other` are the same allocation (cheap identity test).
    pub fn ptr_eq(&self, other: &Circuit) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Stable structural hash (independent of allocation).
    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    /// The operands of a `seq` or `par` node.
    pub fn children(&self) -> Option<(&Circuit, &Circuit)> {
        match self.node() {
            Node::Seq(a, b) | Node::Par(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn is_seq(&self) -> bool {
        matches!(self.node(), Node::Seq(..))
    }

    pub fn is_par(&self) -> bool {
        matches!(self.node(), Node::Par(..))
    }

    /// Visits every generator occurrence in left-to-right (pre-order) order.
    pub fn for_each_generator(&self, f: &mut impl FnMut(&Generator)) {
        match self.node() {
            Node::Gen(g) => f(g),
            Node::Seq(a, b) | Node::Par(a, b) => {
                a.for_each_generator(f);
                b.for_each_generator(f);
            }
            _ => {}
        }
    }

    /// Number of generator occurrences.
    pub fn generator_count(&self) -> usize {
        let mut n = 0;
        self.for_each_generator(&mut |_| n += 1);
        n
    }

    /// Causal circuits contain no `cond`.
    pub fn is_causal(&self) -> bool {
        let mut ok = true;
        self.for_each_generator(&mut |g| ok &= *g != Generator::Cond);
        ok
    }

    /// Boolean circuits are causal and only flip with probability 0 or 1.
    pub fn is_boolean(&self) -> bool {
        let mut ok = true;
        self.for_each_generator(&mut |g| match g {
            Generator::Cond => ok = false,
            Generator::Flip(p) => ok &= p.is_zero() || p.is_one(),
            _ => {}
        });
        ok
    }

    /// Flip parameters in pre-order.
    pub fn flip_params(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        self.for_each_generator(&mut |g| {
            if let Generator::Flip(p) = g {
                out.push(p.clone());
            }
        });
        out
    }

    /// The subterm addressed by `path`.
    pub fn subterm(&self, path: &[usize]) -> Result<&Circuit> {
        let mut cur = self;
        for &step in path {
            cur = match (cur.children(), step) {
                (Some((a, _)), 0) => a,
                (Some((_, b)), 1) => b,
                _ => return Err(Error::BadPath(path.to_vec())),
            };
        }
        Ok(cur)
    }

    /// Replaces the subterm at `path` by `replacement`, re-checking types on the
    /// way up.
    pub fn replace(&self, path: &[usize], replacement: Circuit) -> Result<Circuit> {
        let Some((&step, rest)) = path.split_first() else {
            return Ok(replacement);
        };
        let err = || Error::BadPath(path.to_vec());
        match (self.node(), step) {
            (Node::Seq(a, b), 0) => Circuit::seq(a.replace(rest, replacement)?, b.clone()),
            (Node::Seq(a, b), 1) => Circuit::seq(a.clone(), b.replace(rest, replacement)?),
            (Node::Par(a, b), 0) => Ok(Circuit::par(a.replace(rest, replacement)?, b.clone())),
            (Node::Par(a, b), 1) => Ok(Circuit::par(a.clone(), b.replace(rest, replacement)?)),
            _ => Err(err()),
        }
    }
}

/// An untyped term, as produced by a parser before type checking.
#[derive(Debug, Clone)]
pub enum Term {
    Gen(Generator),
    Id,
    Id0,
    Swap,
    Seq(Box<Term>, Box<Term>),
    Par(Box<Term>, Box<Term>),
    /// An already-typed circuit (used for expanded derived gates).
    Circuit(Circuit),
}

/// Computes the unique type of an untyped term, returning the typed circuit.
///
/// On failure the error carries the path of the offending `seq` node.
pub fn typecheck(term: &Term) -> Result<Circuit> {
    fn go(term: &Term, path: &mut Vec<usize>) -> Result<Circuit> {
        Ok(match term {
            Term::Gen(Generator::Flip(p)) => Circuit::flip(p.clone())?,
            Term::Gen(g) => Circuit::gen(g.clone()),
            Term::Id => Circuit::id(),
            Term::Id0 => Circuit::id0(),
            Term::Swap => Circuit::swap(),
            Term::Circuit(c) => c.clone(),
            Term::Seq(a, b) | Term::Par(a, b) => {
                path.push(0);
                let ca = go(a, path)?;
                path.pop();
                path.push(1);
                let cb = go(b, path)?;
                path.pop();
                if matches!(term, Term::Par(..)) {
                    Circuit::par(ca, cb)
                } else {
                    Circuit::seq(ca, cb).map_err(|e| match e {
                        Error::TypeMismatch { left, right, .. } => Error::TypeMismatch {
                            path: path.clone(),
                            left,
                            right,
                        },
                        other => other,
                    })?
                }
            }
        })
    }
    go(term, &mut Vec::new())
}

/// Builds `a ; b` for circuits whose interfaces are known to agree.
pub(crate) fn sq(a: Circuit, b: Circuit) -> Circuit {
    Circuit::seq(a, b).expect("well-typed by construction")
}

/// Builds a right-nested sequential chain known to be well typed.
pub(crate) fn chain(parts: Vec<Circuit>) -> Circuit {
    Circuit::seq_all(parts).expect("well-typed by construction")
}

/// Shorthand for [`Circuit::par_all`].
pub(crate) fn pars(parts: Vec<Circuit>) -> Circuit {
    Circuit::par_all(parts)
}

/// `flip(p)` for a parameter known to be a probability.
pub(crate) fn flip(p: &Rat) -> Circuit {
    Circuit::flip(p.clone()).expect("probability by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn typing_examples() {
        let c = Circuit::seq(Circuit::copy(), Circuit::par(Circuit::id(), Circuit::not())).unwrap();
        assert_eq!(c.ty(), CircType::new(1, 2));
        assert_eq!(Circuit::flip(rat(1, 2)).unwrap().ty(), CircType::new(0, 1));
        assert_eq!(Circuit::seq(Circuit::and(), Circuit::copy()).unwrap().ty(), CircType::new(2, 2));
        assert_eq!(Circuit::seq(Circuit::copy(), Circuit::and()).unwrap().ty(), CircType::new(1, 1));
    }

    #[test]
    fn mismatch_reports_path() {
        let bad = Term::Par(
            Box::new(Term::Id),
            Box::new(Term::Seq(Box::new(Term::Gen(Generator::And)), Box::new(Term::Gen(Generator::And)))),
        );
        match typecheck(&bad) {
            Err(Error::TypeMismatch { path, left, right }) => {
                assert_eq!(path, vec![1]);
                assert_eq!(left, CircType::new(2, 1));
                assert_eq!(right, CircType::new(2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_flip_rejected() {
        assert!(Circuit::flip(rat(3, 2)).is_err());
    }

    #[test]
    fn replace_and_subterm() {
        let c = Circuit::par(Circuit::not(), Circuit::id());
        assert_eq!(c.subterm(&[1]).unwrap(), &Circuit::id());
        let d = c.replace(&[0], Circuit::id()).unwrap();
        assert_eq!(d, Circuit::par(Circuit::id(), Circuit::id()));
        assert!(c.subterm(&[0, 0]).is_err());
    }
}
