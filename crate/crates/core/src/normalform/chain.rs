//! Conditional probability table chains and the normal-form circuits that
//! realize them.
//!
//! A stochastic `m -> n` map factors as a chain of `n` tables, table `k`
//! giving `P(y_k = 1 | x, y_1, ..., y_{k-1})`.  Contexts that cannot be
//! reached carry probability `0`, so every later output is deterministically
//! `0` there; with this convention the chain of a map is unique.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde_json::{Map, Value};

use crate::circuit::gates::{all_n, copy_bundle, discard_n, mux, swap_block, DEFAULT_MAX_WIRES};
use crate::circuit::{chain as seq_chain, flatten, pars, sq, Circuit, Node};
use crate::error::{Error, Result};
use crate::rat::{complement, is_probability, rat, rat_from_json, rat_json, Rat};
use crate::semantics::{Bits, SubStochMatrix};

/// A chain of conditional probability tables for an `m -> n` map.
///
/// `tables[k]` has `2^(m+k)` entries indexed by the context bit-vector
/// `(x_1..x_m, y_1..y_k)` (top wire most significant).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CptChain {
    pub inputs: usize,
    pub outputs: usize,
    pub tables: Vec<Vec<Rat>>,
}

impl CptChain {
    /// Checks shapes, probability ranges and the zero-prefix convention.
    pub fn validate(&self) -> Result<()> {
        if self.tables.len() != self.outputs {
            return Err(Error::DimensionMismatch(format!(
                "chain for {} outputs has {} tables",
                self.outputs,
                self.tables.len()
            )));
        }
        for (k, t) in self.tables.iter().enumerate() {
            if t.len() != 1 << (self.inputs + k) {
                return Err(Error::DimensionMismatch(format!("table {k} has {} entries", t.len())));
            }
            if let Some(p) = t.iter().find(|p| !is_probability(p)) {
                return Err(Error::BadProbability(crate::rat::fmt_rat(p)));
            }
        }
        if let Some((k, w)) = self.convention_violation() {
            return Err(Error::DimensionMismatch(format!(
                "table {k} has a non-zero entry at unreachable context {}",
                Bits::from_index(w, self.inputs + k)
            )));
        }
        Ok(())
    }

    /// The first `(table, context)` that is unreachable but carries a
    /// non-zero probability.
    fn convention_violation(&self) -> Option<(usize, usize)> {
        // reach[w] = probability of the output prefix in context w (which
        // includes the input); starts at 1 for every input.
        let mut reach: Vec<Rat> = vec![Rat::one(); 1 << self.inputs];
        for (k, t) in self.tables.iter().enumerate() {
            for (w, p) in t.iter().enumerate() {
                if reach[w].is_zero() && !p.is_zero() {
                    return Some((k, w));
                }
            }
            let mut next = Vec::with_capacity(reach.len() * 2);
            for (w, r) in reach.iter().enumerate() {
                next.push(r * complement(&t[w]));
                next.push(r * &t[w]);
            }
            reach = next;
        }
        None
    }

    /// The matrix the chain describes.
    pub fn to_matrix(&self) -> SubStochMatrix {
        let (m, n) = (self.inputs, self.outputs);
        SubStochMatrix::from_fn(m, n, |y, x| {
            let mut weight = Rat::one();
            let mut ctx = x;
            for k in 0..n {
                let bit = (y >> (n - 1 - k)) & 1;
                let p = &self.tables[k][ctx];
                if bit == 1 {
                    weight *= p;
                } else {
                    weight *= complement(p);
                }
                if weight.is_zero() {
                    break;
                }
                ctx = (ctx << 1) | bit;
            }
            weight
        })
        .expect("well-formed chain")
    }

    /// JSON export `{ "m", "n", "tables": [ { "<context>": [num, den] } ] }`
    /// with contexts in descending order.
    pub fn to_json(&self) -> Value {
        let tables = self
            .tables
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let mut obj = Map::new();
                for w in (0..t.len()).rev() {
                    obj.insert(Bits::from_index(w, self.inputs + k).to_string(), rat_json(&t[w]));
                }
                Value::Object(obj)
            })
            .collect();
        let mut out = Map::new();
        out.insert("m".into(), Value::from(self.inputs));
        out.insert("n".into(), Value::from(self.outputs));
        out.insert("tables".into(), Value::Array(tables));
        Value::Object(out)
    }

    /// Inverse of [`CptChain::to_json`].
    pub fn from_json(v: &Value) -> Result<CptChain> {
        let bad = |msg: &str| Error::Json(msg.to_string());
        let m = v.get("m").and_then(Value::as_u64).ok_or_else(|| bad("missing `m`"))? as usize;
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| bad("missing `n`"))? as usize;
        let raw = v.get("tables").and_then(Value::as_array).ok_or_else(|| bad("missing `tables`"))?;
        let mut tables = Vec::new();
        for (k, t) in raw.iter().enumerate() {
            let obj = t.as_object().ok_or_else(|| bad("table is not an object"))?;
            let width = m + k;
            let mut table = vec![Rat::zero(); 1 << width];
            for (key, val) in obj {
                if key.len() != width || !key.bytes().all(|b| b == b'0' || b == b'1') {
                    return Err(bad(&format!("bad context key `{key}`")));
                }
                let idx = if width == 0 { 0 } else { usize::from_str_radix(key, 2).expect("binary") };
                table[idx] = rat_from_json(val).ok_or_else(|| bad("malformed rational"))?;
            }
            tables.push(table);
        }
        let chain = CptChain {
            inputs: m,
            outputs: n,
            tables,
        };
        chain.validate()?;
        Ok(chain)
    }
}

/// Factors a stochastic matrix into its table chain.
pub fn cpt_chain(m: &SubStochMatrix) -> Result<CptChain> {
    if !m.is_stochastic() {
        return Err(Error::NotStochastic);
    }
    let (ins, outs) = (m.inputs(), m.outputs());
    let mut tables: Vec<Vec<Rat>> = (0..outs).map(|k| vec![Rat::zero(); 1 << (ins + k)]).collect();
    for x in 0..m.cols() {
        // prefix[k][u] = P(y_1..y_k = u | x).
        let mut prefix: Vec<Vec<Rat>> = vec![Vec::new(); outs + 1];
        prefix[outs] = m.column(x);
        for k in (0..outs).rev() {
            prefix[k] = prefix[k + 1].chunks(2).map(|pair| &pair[0] + &pair[1]).collect();
        }
        for k in 0..outs {
            for u in 0..(1usize << k) {
                let reach = &prefix[k][u];
                if !reach.is_zero() {
                    let ctx = (x << k) | u;
                    tables[k][ctx] = &prefix[k + 1][2 * u + 1] / reach;
                }
            }
        }
    }
    Ok(CptChain {
        inputs: ins,
        outputs: outs,
        tables,
    })
}

/// The mux cascade over `N` one-hot guard wires: slot `i` emits `flip(p_i)`
/// when its guard is set; with no guard set the cascade emits `flip(0)`.
fn cascade(slots: &[Rat]) -> Circuit {
    let mut c = Circuit::constant(false);
    for p in slots.iter().rev() {
        let leaves = Circuit::par(Circuit::id(), Circuit::par(crate::circuit::flip(p), c));
        c = sq(leaves, mux());
    }
    c
}

/// Normal form of a single table over `w` context wires: `all_w` followed by
/// the cascade, slot `i` holding the entry for context value `2^w - 1 - i`.
fn table_circuit(table: &[Rat], width: usize, max_wires: usize) -> Result<Circuit> {
    let slots: Vec<Rat> = table.iter().rev().cloned().collect();
    Ok(sq(all_n(width, max_wires)?, cascade(&slots)))
}

fn build(chain: &CptChain, max_wires: usize) -> Result<Circuit> {
    fn go(m: usize, tables: &[Vec<Rat>], max_wires: usize) -> Result<Circuit> {
        match tables {
            [] => Ok(discard_n(m)),
            [t] => table_circuit(t, m, max_wires),
            [t, rest @ ..] => {
                let first = sq(table_circuit(t, m, max_wires)?, Circuit::copy());
                Ok(seq_chain(vec![
                    copy_bundle(m),
                    Circuit::par(first, crate::circuit::gates::id_n(m)),
                    Circuit::par(Circuit::id(), swap_block(1, m)),
                    Circuit::par(Circuit::id(), go(m + 1, rest, max_wires)?),
                ]))
            }
        }
    }
    go(chain.inputs, &chain.tables, max_wires)
}

/// The normal-form circuit realizing a chain (flattened).
pub fn circuit_from_cpt(chain: &CptChain) -> Result<Circuit> {
    circuit_from_cpt_with(chain, DEFAULT_MAX_WIRES)
}

/// [`circuit_from_cpt`] with an explicit bound on all-inputs widths.
pub fn circuit_from_cpt_with(chain: &CptChain, max_wires: usize) -> Result<Circuit> {
    chain.validate()?;
    Ok(flatten(&build(chain, max_wires)?))
}

/// The normal-form skeleton for `m -> n` with a distinct marker probability
/// in every slot, and the `(table, context)` each marker stands for.
fn skeleton(m: usize, n: usize, max_wires: usize) -> Result<(Circuit, HashMap<Rat, (usize, usize)>)> {
    let mut markers = HashMap::new();
    let mut tables = Vec::new();
    let mut next = 2i64;
    for k in 0..n {
        let mut t = Vec::new();
        for w in 0..(1usize << (m + k)) {
            let marker = rat(1, next);
            next += 1;
            markers.insert(marker.clone(), (k, w));
            t.push(marker);
        }
        tables.push(t);
    }
    // Markers violate the zero-prefix convention, so skip validation.
    let c = flatten(&build(
        &CptChain {
            inputs: m,
            outputs: n,
            tables,
        },
        max_wires,
    )?);
    Ok((c, markers))
}

/// Walks `cand` against `skel` in lockstep, reading slot flips into `tables`.
fn read_slots(
    skel: &Circuit,
    cand: &Circuit,
    markers: &HashMap<Rat, (usize, usize)>,
    tables: &mut [Vec<Rat>],
) -> bool {
    use crate::circuit::Generator::Flip;
    match (skel.node(), cand.node()) {
        (Node::Gen(Flip(marker)), Node::Gen(Flip(p))) if markers.contains_key(marker) => {
            let (k, w) = markers[marker];
            tables[k][w] = p.clone();
            true
        }
        (Node::Seq(a, b), Node::Seq(c, d)) | (Node::Par(a, b), Node::Par(c, d)) => {
            a.ty() == c.ty() && read_slots(a, c, markers, tables) && read_slots(b, d, markers, tables)
        }
        _ => skel == cand,
    }
}

/// Extracts the chain of a circuit in normal form, if it is one.
pub fn chain_of_normal_form(c: &Circuit) -> Option<CptChain> {
    let (m, n) = (c.inputs(), c.outputs());
    if m + n > 0 && m + n - 1 >= usize::BITS as usize - 1 {
        return None;
    }
    let (skel, markers) = skeleton(m, n, DEFAULT_MAX_WIRES).ok()?;
    let flat = flatten(c);
    let mut tables: Vec<Vec<Rat>> = (0..n).map(|k| vec![Rat::zero(); 1 << (m + k)]).collect();
    if !read_slots(&skel, &flat, &markers, &mut tables) {
        return None;
    }
    let chain = CptChain {
        inputs: m,
        outputs: n,
        tables,
    };
    chain.validate().ok()?;
    (circuit_from_cpt(&chain).ok()? == flat).then_some(chain)
}

/// Whether `c` is (up to flattening) the normal-form circuit of a chain that
/// satisfies the zero-prefix convention.
pub fn is_normal_form(c: &Circuit) -> bool {
    chain_of_normal_form(c).is_some()
}

/// Recognizes pre-normal forms: Boolean circuits, and
/// `copy_n ; (b ⊗ d) ; convex_sum(p)` with `b` Boolean and `d` pre-normal.
pub fn is_pre_normal_form(c: &Circuit) -> bool {
    if c.is_boolean() {
        return true;
    }
    if c.outputs() != 1 || !c.is_causal() {
        return false;
    }
    let n = c.inputs();
    let elems = crate::circuit::seq_elements(&flatten(c));
    let head = crate::circuit::seq_elements(&flatten(&copy_bundle(n)));
    let head: Vec<Circuit> = if n == 0 { Vec::new() } else { head };
    let mux_tail = crate::circuit::seq_elements(&flatten(&mux()));
    // copy_n ; middle ; (flip p ⊗ id ⊗ id) ; mux...
    if elems.len() != head.len() + 2 + mux_tail.len() || elems[..head.len()] != head[..] {
        return false;
    }
    let guard = &elems[head.len() + 1];
    let guard_ok = match crate::circuit::par_elements(guard).as_slice() {
        [f, a, b] => {
            matches!(f.node(), Node::Gen(crate::circuit::Generator::Flip(_)))
                && matches!(a.node(), Node::Id)
                && matches!(b.node(), Node::Id)
        }
        _ => false,
    };
    if !guard_ok || elems[head.len() + 2..] != mux_tail[..] {
        return false;
    }
    let parts = crate::circuit::par_elements(&elems[head.len()]);
    (1..parts.len()).any(|s| {
        let top = pars(parts[..s].to_vec());
        let bottom = pars(parts[s..].to_vec());
        top.inputs() == n
            && top.outputs() == 1
            && bottom.inputs() == n
            && bottom.outputs() == 1
            && top.is_boolean()
            && is_pre_normal_form(&bottom)
    })
}
