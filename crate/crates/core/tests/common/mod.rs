//! Independent oracles shared by the integration tests.
//!
//! * [`path_matrix`] flattens a circuit into a netlist of gates over named
//!   wires and enumerates every execution path (one branch per coin), so it
//!   shares no code with the sparse evaluator;
//! * [`worlds`] interprets surface programs directly by enumerating weighted
//!   worlds, without going through circuits at all.

#![allow(dead_code)]

use std::collections::HashMap;

use num_traits::{One, Zero};

use probcirc::circuit::{Circuit, Generator, Node};
use probcirc::semantics::{ProjClass, SubStochMatrix};
use probcirc::surface::{Expr, Program, Ty};
use probcirc::Rat;

// ---------------------------------------------------------------------------
// Path enumeration over a netlist.

#[derive(Debug, Clone)]
enum Gate {
    Copy { src: usize, a: usize, b: usize },
    Discard,
    And { x: usize, y: usize, out: usize },
    Not { x: usize, out: usize },
    Flip { p: Rat, out: usize },
    Cond { x: usize, y: usize, out: usize },
}

struct Netlist {
    gates: Vec<Gate>,
    wires: usize,
}

impl Netlist {
    fn fresh(&mut self) -> usize {
        self.wires += 1;
        self.wires - 1
    }

    /// Appends the gates of `c` fed by `inputs`, returning its output wires.
    fn build(&mut self, c: &Circuit, inputs: &[usize]) -> Vec<usize> {
        assert_eq!(inputs.len(), c.inputs());
        match c.node() {
            Node::Id | Node::Id0 => inputs.to_vec(),
            Node::Swap => vec![inputs[1], inputs[0]],
            Node::Seq(a, b) => {
                let mid = self.build(a, inputs);
                self.build(b, &mid)
            }
            Node::Par(a, b) => {
                let (top, bottom) = inputs.split_at(a.inputs());
                let mut out = self.build(a, top);
                out.extend(self.build(b, bottom));
                out
            }
            Node::Gen(g) => match g {
                Generator::Copy => {
                    let (a, b) = (self.fresh(), self.fresh());
                    self.gates.push(Gate::Copy { src: inputs[0], a, b });
                    vec![a, b]
                }
                Generator::Discard => {
                    self.gates.push(Gate::Discard);
                    vec![]
                }
                Generator::And => {
                    let out = self.fresh();
                    self.gates.push(Gate::And { x: inputs[0], y: inputs[1], out });
                    vec![out]
                }
                Generator::Not => {
                    let out = self.fresh();
                    self.gates.push(Gate::Not { x: inputs[0], out });
                    vec![out]
                }
                Generator::Flip(p) => {
                    let out = self.fresh();
                    self.gates.push(Gate::Flip { p: p.clone(), out });
                    vec![out]
                }
                Generator::Cond => {
                    let out = self.fresh();
                    self.gates.push(Gate::Cond { x: inputs[0], y: inputs[1], out });
                    vec![out]
                }
            },
        }
    }
}

/// Depth-first enumeration of the execution paths from gate `i` onwards.
fn explore(gates: &[Gate], i: usize, vals: &mut Vec<bool>, weight: Rat, outs: &[usize], acc: &mut [Rat]) {
    if weight.is_zero() {
        return;
    }
    let Some(g) = gates.get(i) else {
        let y = outs.iter().fold(0usize, |acc, &w| (acc << 1) | usize::from(vals[w]));
        acc[y] += weight;
        return;
    };
    match g {
        Gate::Copy { src, a, b } => {
            vals[*a] = vals[*src];
            vals[*b] = vals[*src];
        }
        Gate::Discard => {}
        Gate::And { x, y, out } => vals[*out] = vals[*x] && vals[*y],
        Gate::Not { x, out } => vals[*out] = !vals[*x],
        Gate::Cond { x, y, out } => {
            if vals[*x] != vals[*y] {
                return;
            }
            vals[*out] = vals[*x];
        }
        Gate::Flip { p, out } => {
            vals[*out] = true;
            explore(gates, i + 1, vals, &weight * p, outs, acc);
            vals[*out] = false;
            explore(gates, i + 1, vals, &weight * (Rat::one() - p), outs, acc);
            return;
        }
    }
    explore(gates, i + 1, vals, weight, outs, acc)
}

/// The matrix of `c` by enumerating, for every input, every coin outcome.
/// Top wires are the most significant bits of row and column indices.
pub fn path_matrix(c: &Circuit) -> SubStochMatrix {
    let (m, n) = (c.inputs(), c.outputs());
    let mut net = Netlist {
        gates: Vec::new(),
        wires: m,
    };
    let ins: Vec<usize> = (0..m).collect();
    let outs = net.build(c, &ins);
    let cols = 1usize << m;
    let mut entries = vec![Rat::zero(); cols << n];
    for x in 0..cols {
        let mut vals = vec![false; net.wires];
        for (i, v) in vals.iter_mut().take(m).enumerate() {
            *v = (x >> (m - 1 - i)) & 1 == 1;
        }
        let mut column = vec![Rat::zero(); 1 << n];
        explore(&net.gates, 0, &mut vals, Rat::one(), &outs, &mut column);
        for (y, w) in column.into_iter().enumerate() {
            entries[y * cols + x] = w;
        }
    }
    SubStochMatrix::from_entries(m, n, entries).expect("well-formed oracle matrix")
}

/// The oracle's canonical class, normalized by hand.
pub fn path_class(c: &Circuit) -> ProjClass {
    normalize(path_matrix(c))
}

/// Divides by the total mass (or reports the zero class).
pub fn normalize(m: SubStochMatrix) -> ProjClass {
    let total: Rat = m.entries().iter().cloned().sum();
    if total.is_zero() {
        return ProjClass::Bottom {
            inputs: m.inputs(),
            outputs: m.outputs(),
        };
    }
    let entries = m.entries().iter().map(|e| e / &total).collect();
    ProjClass::Canonical(SubStochMatrix::from_entries(m.inputs(), m.outputs(), entries).unwrap())
}

// ---------------------------------------------------------------------------
// World enumeration for surface programs.

/// A surface value: a Boolean or a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    fn bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Pair(..) => panic!("expected a Boolean"),
        }
    }

    fn bits(&self, out: &mut Vec<bool>) {
        match self {
            Value::Bool(b) => out.push(*b),
            Value::Pair(a, b) => {
                a.bits(out);
                b.bits(out);
            }
        }
    }

    /// Reads a value of type `ty` off the front of `bits`.
    fn read(ty: &Ty, bits: &mut impl Iterator<Item = bool>) -> Value {
        match ty {
            Ty::Bool => Value::Bool(bits.next().expect("enough bits")),
            Ty::Prod(a, b) => Value::Pair(Box::new(Value::read(a, bits)), Box::new(Value::read(b, bits))),
        }
    }
}

type Env = HashMap<String, Value>;

/// All weighted outcomes of `e` in `env` (zero-weight worlds dropped, failed
/// observations removed).  Both branches of a conditional are run, so an
/// observation fails the world even in the branch not selected.
fn run(e: &Expr, env: &Env, prog: &Program) -> Vec<(Value, Rat)> {
    let one = |v: Value| vec![(v, Rat::one())];
    match e {
        Expr::Var(x) => one(env[x].clone()),
        Expr::True => one(Value::Bool(true)),
        Expr::False => one(Value::Bool(false)),
        Expr::Flip(p) => [(Value::Bool(true), p.clone()), (Value::Bool(false), Rat::one() - p)]
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .collect(),
        Expr::Pair(a, b) => {
            let mut out = Vec::new();
            for (va, wa) in run(a, env, prog) {
                for (vb, wb) in run(b, env, prog) {
                    out.push((Value::Pair(Box::new(va.clone()), Box::new(vb)), &wa * wb));
                }
            }
            out
        }
        Expr::Fst(a) | Expr::Snd(a) => run(a, env, prog)
            .into_iter()
            .map(|(v, w)| match v {
                Value::Pair(l, r) => (if matches!(e, Expr::Fst(_)) { *l } else { *r }, w),
                Value::Bool(_) => panic!("projection of a Boolean"),
            })
            .collect(),
        Expr::If(g, a, b) => {
            let mut out = Vec::new();
            for (vg, wg) in run(g, env, prog) {
                for (va, wa) in run(a, env, prog) {
                    for (vb, wb) in run(b, env, prog) {
                        let v = if vg.bool() { va.clone() } else { vb };
                        out.push((v, &wg * &wa * wb));
                    }
                }
            }
            out
        }
        Expr::Let(x, bound, body) => {
            let mut out = Vec::new();
            for (vx, wx) in run(bound, env, prog) {
                let mut inner = env.clone();
                inner.insert(x.clone(), vx);
                for (v, w) in run(body, &inner, prog) {
                    out.push((v, &wx * w));
                }
            }
            out
        }
        Expr::Observe(x) => {
            if env[x].bool() {
                one(Value::Bool(true))
            } else {
                vec![]
            }
        }
        Expr::Call(f, arg) => {
            let def = prog.functions.iter().find(|d| &d.name == f).expect("known function");
            let mut out = Vec::new();
            for (va, wa) in run(arg, env, prog) {
                let mut inner = Env::new();
                inner.insert(def.param.clone(), va);
                for (v, w) in run(&def.body, &inner, prog) {
                    out.push((v, &wa * w));
                }
            }
            out
        }
    }
}

/// The unnormalized output subdistribution of a program for each input
/// assignment, as an `m -> n` matrix (top wire = most significant bit).
/// `n` is the width of the program's result type.
pub fn worlds(prog: &Program, n: usize) -> SubStochMatrix {
    let m = prog.input_width();
    let cols = 1usize << m;
    let mut entries = vec![Rat::zero(); cols << n];
    for x in 0..cols {
        let mut bits = (0..m).map(|i| (x >> (m - 1 - i)) & 1 == 1);
        let mut env = Env::new();
        for (name, ty) in &prog.inputs {
            env.insert(name.clone(), Value::read(ty, &mut bits));
        }
        for (v, w) in run(&prog.main, &env, prog) {
            let mut out = Vec::new();
            v.bits(&mut out);
            assert_eq!(out.len(), n, "result width");
            let y = out.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
            entries[y * cols + x] += w;
        }
    }
    SubStochMatrix::from_entries(m, n, entries).expect("well-formed oracle matrix")
}

/// The canonical class of a program according to world enumeration.
pub fn world_class(prog: &Program, n: usize) -> ProjClass {
    normalize(worlds(prog, n))
}
