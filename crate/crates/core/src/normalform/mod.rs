//! Executable completeness machinery: truth tables and Shannon expansion,
//! disintegration, table chains and normal forms, Bayesian inversion,
//! bending, conditioning elimination and the equivalence check.
//!
//! Normal forms are built from the semantics (matrix → table chain →
//! circuit), so two circuits get structurally identical normal forms exactly
//! when their semantics agree.

mod chain;

use num_traits::{One, Zero};

pub use chain::{
    chain_of_normal_form, circuit_from_cpt, circuit_from_cpt_with, cpt_chain, is_normal_form, is_pre_normal_form,
    CptChain,
};

use crate::circuit::gates::{
    all, cond_n, copy_bundle, discard_n, failure_circuit, id_n, mux, or_n, permutation,
};
use crate::circuit::{chain as seq_chain, flip, pars, sq, Circuit};
use crate::error::{Error, Result};
use crate::rat::{rat, Rat};
use crate::semantics::{eval, eval_with, Limits, ProjClass, SubStochMatrix};

/// The function computed by a Boolean circuit: `table[x]` is the output
/// index for input index `x`.
pub fn truth_table(b: &Circuit) -> Result<Vec<usize>> {
    if !b.is_boolean() {
        return Err(Error::NotBoolean);
    }
    let m = eval(b)?;
    Ok((0..m.cols())
        .map(|x| (0..m.rows()).find(|&y| m.entry(y, x).is_one()).expect("deterministic"))
        .collect())
}

/// A Boolean circuit `n -> 1` computing the given function of the input
/// index.  Constants and (negated) projections get small dedicated shapes;
/// anything else is a disjunction of the selected all-inputs slots.
pub fn boolean_from_table(n: usize, f: &dyn Fn(usize) -> bool) -> Result<Circuit> {
    let size = 1usize << n;
    let values: Vec<bool> = (0..size).map(f).collect();
    if values.iter().all(|&v| v == values[0]) {
        let k = Circuit::constant(values[0]);
        return Ok(if n == 0 { k } else { sq(discard_n(n), k) });
    }
    for wire in 0..n {
        let bit = |x: usize| (x >> (n - 1 - wire)) & 1 == 1;
        let proj = || pars(vec![discard_n(wire), Circuit::id(), discard_n(n - 1 - wire)]);
        if (0..size).all(|x| values[x] == bit(x)) {
            return Ok(proj());
        }
        if (0..size).all(|x| values[x] != bit(x)) {
            return Ok(sq(proj(), Circuit::not()));
        }
    }
    // Slot i of all_n is input value size - 1 - i.
    let selected: Vec<Circuit> = (0..size)
        .map(|i| if values[size - 1 - i] { Circuit::id() } else { Circuit::discard() })
        .collect();
    let k = values.iter().filter(|&&v| v).count();
    Ok(seq_chain(vec![all(n)?, pars(selected), or_n(k)]))
}

/// Shannon expansion of a Boolean circuit `b : n -> 1` along input `wire`
/// (numbered from 1 at the top): returns `(b_0, b_1)`, the restrictions with
/// that input fixed to 0 and to 1, as Boolean circuits `n-1 -> 1`.
pub fn shannon_expand(b: &Circuit, wire: usize) -> Result<(Circuit, Circuit)> {
    if !b.is_boolean() {
        return Err(Error::NotBoolean);
    }
    let n = b.inputs();
    if b.outputs() != 1 {
        return Err(Error::DimensionMismatch(format!("Shannon expansion needs an n->1 circuit, got {}", b.ty())));
    }
    if wire == 0 || wire > n {
        return Err(Error::BadWire { wire, width: n });
    }
    let table = &truth_table(b)?;
    let pos = n - wire; // bit position of the wire in the input index
    let restrict = |v: usize| {
        move |rest: usize| {
            let high = rest >> pos;
            let low = rest & ((1 << pos) - 1);
            table[(high << (pos + 1)) | (v << pos) | low] == 1
        }
    };
    Ok((boolean_from_table(n - 1, &restrict(0))?, boolean_from_table(n - 1, &restrict(1))?))
}

/// The right-hand side of the Shannon expansion: `mux(x_wire, b_1, b_0)`
/// with both restrictions reading the remaining inputs.
pub fn shannon_recompose(b0: &Circuit, b1: &Circuit, wire: usize) -> Result<Circuit> {
    let rest = b0.inputs();
    if b1.inputs() != rest || b0.outputs() != 1 || b1.outputs() != 1 {
        return Err(Error::DimensionMismatch("restrictions must have equal type n->1".into()));
    }
    let n = rest + 1;
    if wire == 0 || wire > n {
        return Err(Error::BadWire { wire, width: n });
    }
    let mut perm = vec![wire - 1];
    perm.extend((0..n).filter(|&i| i != wire - 1));
    Ok(seq_chain(vec![
        permutation(&perm),
        Circuit::par(Circuit::id(), copy_bundle(rest)),
        pars(vec![Circuit::id(), b1.clone(), b0.clone()]),
        mux(),
    ]))
}

/// Disintegrates a joint `0 -> 1 + k` along its first wire into the marginal
/// `0 -> 1` and the conditional `1 -> k`.  Where the marginal vanishes the
/// conditional is `|0…0⟩`.
pub fn disintegrate(joint: &SubStochMatrix) -> Result<(SubStochMatrix, SubStochMatrix)> {
    disintegrate_at(joint, 1)
}

/// Disintegrates a joint `0 -> a + b` into the marginal on the first `a`
/// wires and the conditional `a -> b`, with the `|0…0⟩` convention.
pub fn disintegrate_at(joint: &SubStochMatrix, a: usize) -> Result<(SubStochMatrix, SubStochMatrix)> {
    if joint.inputs() != 0 {
        return Err(Error::NotAJoint(format!("expected a 0->n matrix, got {}", joint.ty())));
    }
    if joint.outputs() < a || (a == 0 && joint.outputs() == 0) {
        return Err(Error::NotAJoint(format!("cannot split {} wires at {a}", joint.outputs())));
    }
    let b = joint.outputs() - a;
    let marginal = joint.marginalize(a)?;
    let conditional = SubStochMatrix::from_fn(a, b, |y, x| {
        let mx = &marginal.entries()[x];
        if mx.is_zero() {
            if y == 0 {
                Rat::one()
            } else {
                Rat::zero()
            }
        } else {
            joint.entries()[(x << b) | y].clone() / mx
        }
    })?;
    Ok((marginal, conditional))
}

/// Recomposes a marginal `0 -> a` and conditional `a -> b` into the joint
/// `marginal ; copy ; (id ⊗ conditional)`.
pub fn recompose(marginal: &SubStochMatrix, conditional: &SubStochMatrix) -> Result<SubStochMatrix> {
    if marginal.inputs() != 0 || marginal.outputs() != conditional.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "cannot recompose {} with {}",
            marginal.ty(),
            conditional.ty()
        )));
    }
    let b = conditional.outputs();
    SubStochMatrix::from_fn(0, marginal.outputs() + b, |row, _| {
        let (x, y) = (row >> b, row & ((1 << b) - 1));
        &marginal.entries()[x] * conditional.entry(y, x)
    })
}

/// The stochastic matrix `f` as a causal circuit in normal form.
pub fn from_matrix(m: &SubStochMatrix) -> Result<Circuit> {
    circuit_from_cpt(&cpt_chain(m)?)
}

/// The normal form of a causal circuit.
pub fn normal_form(c: &Circuit) -> Result<Circuit> {
    normal_form_with(c, &Limits::default())
}

/// [`normal_form`] with explicit evaluation limits.
pub fn normal_form_with(c: &Circuit, limits: &Limits) -> Result<Circuit> {
    if !c.is_causal() {
        return Err(Error::HasConditioning);
    }
    from_matrix(&eval_with(c, limits)?)
}

/// Bends all inputs of `c : m -> n` into outputs, `0 -> m + n`, by feeding a
/// uniformly random copied bit into each input.
pub fn bend(c: &Circuit) -> Circuit {
    let m = c.inputs();
    if m == 0 {
        return c.clone();
    }
    seq_chain(vec![
        pars(vec![flip(&rat(1, 2)); m]),
        copy_bundle(m),
        Circuit::par(id_n(m), c.clone()),
    ])
}

/// Bends the first `m` outputs of `d : 0 -> m + n` back into inputs,
/// `m -> n`, constraining each to equal the corresponding new input.
pub fn unbend(d: &Circuit, m: usize) -> Result<Circuit> {
    if d.inputs() != 0 || d.outputs() < m {
        return Err(Error::DimensionMismatch(format!("cannot unbend {m} wires of {}", d.ty())));
    }
    if m == 0 {
        return Ok(d.clone());
    }
    let n = d.outputs() - m;
    Ok(seq_chain(vec![
        Circuit::par(id_n(m), d.clone()),
        Circuit::par(cond_n(m), id_n(n)),
        Circuit::par(discard_n(m), id_n(n)),
    ]))
}

/// Reads a bent `0 -> m + n` matrix as the `m -> n` matrix it encodes
/// (column `x` is the row block of the bent matrix at prefix `x`).
pub fn unbend_matrix(bent: &SubStochMatrix, m: usize) -> Result<SubStochMatrix> {
    if bent.inputs() != 0 || bent.outputs() < m {
        return Err(Error::DimensionMismatch(format!("cannot unbend {m} wires of {}", bent.ty())));
    }
    let n = bent.outputs() - m;
    SubStochMatrix::from_fn(m, n, |y, x| bent.entries()[(x << n) | y].clone())
}

/// A conditioning-free representative of `c`'s class, or the failure
/// circuit when `c` always fails.  For open circuits the result is causal
/// except for the caps introduced by unbending.
pub fn eliminate_conditioning(c: &Circuit) -> Result<Circuit> {
    eliminate_conditioning_with(c, &Limits::default())
}

/// [`eliminate_conditioning`] with explicit evaluation limits.
pub fn eliminate_conditioning_with(c: &Circuit, limits: &Limits) -> Result<Circuit> {
    let (m, n) = (c.inputs(), c.outputs());
    match eval_with(c, limits)?.canonical_class() {
        ProjClass::Bottom { .. } => Ok(failure_circuit(m, n)),
        ProjClass::Canonical(normalized) => {
            // The canonical representative sums to one, so its bent form is
            // a distribution.
            let bent = SubStochMatrix::from_fn(0, m + n, |row, _| {
                let (x, y) = (row >> n, row & ((1 << n) - 1));
                normalized.entry(y, x).clone()
            })?;
            unbend(&from_matrix(&bent)?, m)
        }
    }
}

/// Outcome of an equivalence check, with the evidence from both routes.
#[derive(Debug, Clone)]
pub struct EquivReport {
    pub equivalent: bool,
    pub class_left: ProjClass,
    pub class_right: ProjClass,
    /// Normal forms, when both circuits are causal (or closed and
    /// conditioned, after elimination).
    pub normal_forms: Option<(Circuit, Circuit)>,
}

/// Decides equality in the equational theory: equal canonical classes.  For
/// causal circuits, and for closed circuits after eliminating conditioning,
/// the verdict is cross-checked against structural equality of normal forms;
/// a disagreement is reported as [`Error::Inconsistent`].
pub fn equiv_report(c: &Circuit, d: &Circuit, limits: &Limits) -> Result<EquivReport> {
    if c.ty() != d.ty() {
        return Err(Error::Incomparable(c.ty(), d.ty()));
    }
    let (mc, md) = (eval_with(c, limits)?, eval_with(d, limits)?);
    let (class_left, class_right) = (mc.canonical_class(), md.canonical_class());
    let equivalent = class_left == class_right;
    let normal_forms = if c.is_causal() && d.is_causal() {
        Some((from_matrix(&mc)?, from_matrix(&md)?))
    } else if c.inputs() == 0 {
        Some((eliminate_conditioning_with(c, limits)?, eliminate_conditioning_with(d, limits)?))
    } else {
        None
    };
    if let Some((a, b)) = &normal_forms {
        if (a == b) != equivalent {
            return Err(Error::Inconsistent(format!(
                "semantic verdict {equivalent} disagrees with normal-form comparison"
            )));
        }
    }
    Ok(EquivReport {
        equivalent,
        class_left,
        class_right,
        normal_forms,
    })
}

/// Whether `c` and `d` are equal in the equational theory.
pub fn equiv(c: &Circuit, d: &Circuit) -> Result<bool> {
    Ok(equiv_report(c, d, &Limits::default())?.equivalent)
}

/// The joint `prior ; copy ; (id ⊗ f)` of a prior `0 -> m` and a channel
/// `f : m -> n`, over `(x, y)`.
pub fn joint_of(f: &Circuit, prior: &Circuit) -> Result<SubStochMatrix> {
    if prior.inputs() != 0 || prior.outputs() != f.inputs() {
        return Err(Error::DimensionMismatch(format!("prior {} does not feed {}", prior.ty(), f.ty())));
    }
    let m = f.inputs();
    eval(&seq_chain(vec![prior.clone(), copy_bundle(m), Circuit::par(id_n(m), f.clone())]))
}

/// The Bayesian inverse `n -> m` of a causal `f : m -> n` with respect to a
/// causal prior, with the `|0…0⟩` convention where an output has
/// probability zero.
pub fn bayes_inverse(f: &Circuit, prior: &Circuit) -> Result<SubStochMatrix> {
    if !f.is_causal() {
        return Err(Error::NotCausal("channel contains conditioning".into()));
    }
    if !prior.is_causal() {
        return Err(Error::NotCausal("prior contains conditioning".into()));
    }
    let (m, n) = (f.inputs(), f.outputs());
    let joint = joint_of(f, prior)?;
    // Reorder to (y, x) and disintegrate along y.
    let swapped = SubStochMatrix::from_fn(0, n + m, |row, _| {
        let (y, x) = (row >> m, row & ((1 << m) - 1));
        joint.entries()[(x << n) | y].clone()
    })?;
    Ok(disintegrate_at(&swapped, n)?.1)
}
