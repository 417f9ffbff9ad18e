//! Exact denotational semantics.
//!
//! A circuit `m -> n` denotes a substochastic `2^n × 2^m` matrix over exact
//! rationals.  Evaluation is done column by column: each input bit-vector is
//! pushed through the circuit as a sparse subdistribution over the values of
//! the current wire bundle, generator by generator, dropping zero-weight
//! states.  The dense matrix is only materialized at the boundary, so the size
//! cap bounds the boundary matrix and the intermediate support, not the raw
//! width of intermediate bundles (one-hot bundles are wide but sparse).

mod bits;
mod matrix;

use std::collections::HashMap;

use num_traits::{One, Zero};

pub use bits::Bits;
pub use matrix::{ProjClass, SubStochMatrix};

use crate::circuit::{Circuit, Generator, Node};
use crate::error::{Error, Result};
use crate::rat::{complement, Rat};

/// Default bound on matrix cells and on intermediate support size.
pub const DEFAULT_MAX_CELLS: u128 = 1 << 20;

/// Resource bounds for evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of cells `2^(m+n)` of a materialized matrix, and maximum
    /// number of simultaneously live states while propagating one column.
    pub max_cells: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

/// A sparse subdistribution over wire-bundle values.
pub type Dist = Vec<(Bits, Rat)>;

#[derive(Debug, Clone)]
enum Op {
    Gen(Generator),
    Swap,
}

/// The circuit as a straight-line list of local operations, each acting on the
/// wires starting at the recorded offset of the current bundle.
fn compile(c: &Circuit, offset: usize, out: &mut Vec<(usize, Op)>) {
    match c.node() {
        Node::Gen(g) => out.push((offset, Op::Gen(g.clone()))),
        Node::Swap => out.push((offset, Op::Swap)),
        Node::Id | Node::Id0 => {}
        Node::Seq(a, b) => {
            compile(a, offset, out);
            compile(b, offset, out);
        }
        Node::Par(a, b) => {
            // The operands act on disjoint wires, so either order is sound.
            // Running the bottom one first keeps nested cascades such as
            // `(id ⊗ (flip ⊗ rest)) ; mux` collapsing innermost-first, which
            // keeps the live support small.
            compile(b, offset + a.inputs(), out);
            compile(a, offset, out);
        }
    }
}

fn merge(dist: Dist) -> Dist {
    let mut index: HashMap<Bits, usize> = HashMap::with_capacity(dist.len());
    let mut out: Dist = Vec::with_capacity(dist.len());
    for (s, w) in dist {
        match index.get(&s) {
            Some(&i) => out[i].1 += w,
            None => {
                index.insert(s.clone(), out.len());
                out.push((s, w));
            }
        }
    }
    out.retain(|(_, w)| !w.is_zero());
    out
}

fn step(op: &(usize, Op), dist: Dist, limits: &Limits) -> Result<Dist> {
    let (at, op) = op;
    let at = *at;
    Ok(match op {
        Op::Swap => dist
            .into_iter()
            .map(|(mut s, w)| {
                let (a, b) = (s.get(at), s.get(at + 1));
                s.set(at, b);
                s.set(at + 1, a);
                (s, w)
            })
            .collect(),
        Op::Gen(Generator::Copy) => dist
            .into_iter()
            .map(|(mut s, w)| {
                let v = s.get(at);
                s.insert(at, v);
                (s, w)
            })
            .collect(),
        Op::Gen(Generator::Not) => dist
            .into_iter()
            .map(|(mut s, w)| {
                let v = s.get(at);
                s.set(at, !v);
                (s, w)
            })
            .collect(),
        Op::Gen(Generator::Discard) => merge(
            dist.into_iter()
                .map(|(mut s, w)| {
                    s.remove(at);
                    (s, w)
                })
                .collect(),
        ),
        Op::Gen(Generator::And) => merge(
            dist.into_iter()
                .map(|(mut s, w)| {
                    let b = s.remove(at + 1);
                    let a = s.get(at);
                    s.set(at, a && b);
                    (s, w)
                })
                .collect(),
        ),
        Op::Gen(Generator::Cond) => dist
            .into_iter()
            .filter(|(s, _)| s.get(at) == s.get(at + 1))
            .map(|(mut s, w)| {
                s.remove(at + 1);
                (s, w)
            })
            .collect(),
        Op::Gen(Generator::Flip(p)) => {
            let q = complement(p);
            let mut out = Vec::with_capacity(dist.len() * 2);
            for (s, w) in dist {
                if !p.is_zero() {
                    let mut s1 = s.clone();
                    s1.insert(at, true);
                    out.push((s1, &w * p));
                }
                if !q.is_zero() {
                    let mut s0 = s;
                    s0.insert(at, false);
                    out.push((s0, w * &q));
                }
            }
            if out.len() as u128 > limits.max_cells {
                return Err(Error::CapExceeded {
                    what: "intermediate support",
                    needed: out.len() as u128,
                    cap: limits.max_cells,
                });
            }
            out
        }
    })
}

/// Pushes a subdistribution over the inputs of `c` through `c`.
pub fn eval_dist(c: &Circuit, input: Dist, limits: &Limits) -> Result<Dist> {
    let mut prog = Vec::new();
    compile(c, 0, &mut prog);
    run(&prog, input, limits)
}

fn run(prog: &[(usize, Op)], input: Dist, limits: &Limits) -> Result<Dist> {
    let mut dist = input;
    for op in prog {
        if dist.is_empty() {
            break;
        }
        dist = step(op, dist, limits)?;
    }
    Ok(dist)
}

/// The output subdistribution of `c` on one input bundle.
pub fn eval_state(c: &Circuit, input: &Bits, limits: &Limits) -> Result<Dist> {
    eval_dist(c, vec![(input.clone(), Rat::one())], limits)
}

/// Number of cells of an `m -> n` matrix, if within the cap.
pub(crate) fn check_cells(inputs: usize, outputs: usize, limits: &Limits) -> Result<()> {
    let width = inputs + outputs;
    let needed = if width >= 127 { u128::MAX } else { 1u128 << width };
    if needed > limits.max_cells {
        return Err(Error::CapExceeded {
            what: "matrix",
            needed,
            cap: limits.max_cells,
        });
    }
    Ok(())
}

/// Evaluates a circuit to its substochastic matrix with the default limits.
pub fn eval(c: &Circuit) -> Result<SubStochMatrix> {
    eval_with(c, &Limits::default())
}

/// Evaluates a circuit to its substochastic matrix.
pub fn eval_with(c: &Circuit, limits: &Limits) -> Result<SubStochMatrix> {
    let (m, n) = (c.inputs(), c.outputs());
    check_cells(m, n, limits)?;
    let mut prog = Vec::new();
    compile(c, 0, &mut prog);
    let cols = 1usize << m;
    let mut entries = vec![Rat::zero(); cols << n];
    for x in 0..cols {
        let out = run(&prog, vec![(Bits::from_index(x, m), Rat::one())], limits)?;
        for (y, w) in out {
            entries[y.index() * cols + x] += w;
        }
    }
    Ok(SubStochMatrix::from_entries(m, n, entries).expect("evaluation yields a valid matrix"))
}

/// Canonical proportionality class of a circuit's semantics.
pub fn class_of(c: &Circuit) -> Result<ProjClass> {
    Ok(eval(c)?.canonical_class())
}

/// Whether two circuits have equal canonical classes.
pub fn circuits_prop_equal(c: &Circuit, d: &Circuit) -> Result<bool> {
    if c.ty() != d.ty() {
        return Err(Error::Incomparable(c.ty(), d.ty()));
    }
    eval(c)?.prop_equal(&eval(d)?)
}
