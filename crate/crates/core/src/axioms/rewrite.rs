//! Applying a rule at a located subterm.
//!
//! Matching is purely structural modulo [`flatten`]: the addressed subterm
//! of the flattened term must be the flattened source side, or — because
//! flattened chains are right-nested — a sequential (resp. parallel) chain
//! whose leading elements are the source side's elements.  Any contiguous
//! run of a chain can therefore be addressed by pointing at the suffix that
//! starts with it.
//!
//! Rules whose source side is a bare bundle of wires (the right-to-left
//! direction of the unit laws, for instance) may also be applied at any
//! subterm with that many outputs: the target is post-composed onto its
//! outputs, which is the unit law `s = s ; id`.  The empty diagram is
//! likewise introduced in parallel (`s = s ⊗ id0`).
//!
//! The structural laws that flattening already quotients (associativity and
//! unit laws) are accepted as no-op steps; interchange and symmetry moves
//! are explicit, parameterized steps.

use super::{index_param, instantiate, AxiomId, Direction, LemmaId, Params, RewriteStep, Rule};
use crate::circuit::gates::{copy_bundle, discard_n, failure_circuit, id_n, swap_block};
use crate::circuit::{
    chain, flatten, is_identity_bundle, par_elements, seq_elements, serialize, Circuit, Generator, Node,
};
use crate::error::{Error, Result};
use crate::semantics::{eval, ProjClass};

/// Applies one rewrite step to `c` (after flattening it) and returns the
/// flattened result.
pub fn apply_step(c: &Circuit, step: &RewriteStep) -> Result<Circuit> {
    let term = flatten(c);
    let sub = term.subterm(&step.path)?.clone();
    let replacement = rewrite_at(&sub, step)?;
    debug_assert_eq!(replacement.ty(), sub.ty());
    let out = term.replace(&step.path, replacement)?;
    Ok(flatten(&out))
}

fn rewrite_at(sub: &Circuit, step: &RewriteStep) -> Result<Circuit> {
    use AxiomId::*;
    let dir = step.direction;
    match step.rule {
        Rule::Axiom(SeqAssoc | ParAssoc | SeqUnit | ParUnit) => {
            only_params(step, &[])?;
            Ok(sub.clone())
        }
        Rule::Axiom(Interchange) => match dir {
            Direction::LeftToRight => interchange_lr(sub, &step.params),
            Direction::RightToLeft => interchange_rl(sub, &step.params),
        },
        Rule::Axiom(SymNat) => sym_nat(sub, dir, &step.params),
        Rule::Lemma(LemmaId::Delete) => match dir {
            Direction::LeftToRight => {
                only_params(step, &[])?;
                delete(sub)
            }
            Direction::RightToLeft => Err(Error::NotApplicable(
                "Delete can only be applied left to right".into(),
            )),
        },
        Rule::Lemma(LemmaId::CopyBoolean) => {
            only_params(step, &[])?;
            match dir {
                Direction::LeftToRight => copy_boolean_lr(sub),
                Direction::RightToLeft => copy_boolean_rl(sub),
            }
        }
        Rule::Lemma(LemmaId::Failure) => match dir {
            Direction::LeftToRight => {
                only_params(step, &[])?;
                failure(sub)
            }
            Direction::RightToLeft => Err(Error::NotApplicable(
                "Failure can only be applied left to right".into(),
            )),
        },
        rule => {
            let inst = instantiate(rule, &step.params)?;
            let (source, target) = match dir {
                Direction::LeftToRight => (inst.lhs, inst.rhs),
                Direction::RightToLeft => (inst.rhs, inst.lhs),
            };
            replace_source(sub, &source, &target)
        }
    }
}

fn only_params(step: &RewriteStep, allowed: &[&str]) -> Result<()> {
    match step.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::NotApplicable(format!(
            "rule {} has no parameter `{k}`",
            step.rule
        ))),
        None => Ok(()),
    }
}

fn mismatch(expected: &Circuit, found: &Circuit) -> Error {
    Error::PatternMismatch {
        expected: serialize(expected),
        found: serialize(found),
    }
}

/// `first` followed by the remaining chain elements, if any.
fn then_rest(first: Circuit, rest: &[Circuit]) -> Result<Circuit> {
    if rest.is_empty() {
        Ok(first)
    } else {
        Circuit::seq(first, chain(rest.to_vec()))
    }
}

/// Replaces an occurrence of `source` at the head of `sub` by `target`.
fn replace_source(sub: &Circuit, source: &Circuit, target: &Circuit) -> Result<Circuit> {
    let source = flatten(source);
    let target = flatten(target);
    if *sub == source {
        return Ok(target);
    }
    if is_identity_bundle(&source) {
        let k = source.outputs();
        if k == 0 {
            return Ok(Circuit::par(sub.clone(), target));
        }
        if sub.outputs() == k {
            return Circuit::seq(sub.clone(), target);
        }
        return Err(mismatch(&source, sub));
    }
    if sub.is_seq() {
        let elems = seq_elements(sub);
        let head = seq_elements(&source);
        if elems.len() > head.len() && elems[..head.len()] == head[..] {
            return then_rest(target, &elems[head.len()..]);
        }
    }
    if sub.is_par() {
        let elems = par_elements(sub);
        let head = par_elements(&source);
        if elems.len() > head.len() && elems[..head.len()] == head[..] {
            return Ok(Circuit::par(target, Circuit::par_all(elems[head.len()..].to_vec())));
        }
    }
    Err(mismatch(&source, sub))
}

/// `(A ⊗ B) ; (C ⊗ D) ; … → (A ; C ; …) ⊗ (B ; D ; …)`.
///
/// Parameters: `at` — number of parallel elements of the first layer forming
/// `A` (default 1); `len` — number of following layers pulled into the two
/// branches (default 1); `j1`, `j2`, … — number of parallel elements of each
/// pulled layer going to the top branch (default: the smallest count whose
/// inputs match the top branch's outputs).
fn interchange_lr(sub: &Circuit, params: &Params) -> Result<Circuit> {
    let elems = seq_elements(sub);
    let len = index_param(params, "len")?.unwrap_or(1);
    let allowed: Vec<String> = ["at", "len"]
        .iter()
        .map(|s| s.to_string())
        .chain((1..=len).map(|k| format!("j{k}")))
        .collect();
    if let Some(k) = params.keys().find(|k| !allowed.contains(k)) {
        return Err(Error::NotApplicable(format!("Interchange has no parameter `{k}`")));
    }
    if len == 0 || elems.len() < len + 1 {
        return Err(Error::NotApplicable(format!(
            "Interchange left to right needs a sequential chain of at least {} elements, found {}",
            len + 1,
            elems.len()
        )));
    }
    let first = par_elements(&elems[0]);
    let at = index_param(params, "at")?.unwrap_or(1);
    if at == 0 || at >= first.len() {
        return Err(Error::NotApplicable(format!(
            "cannot split a layer of {} parallel elements after {at}",
            first.len()
        )));
    }
    let mut tops = vec![Circuit::par_all(first[..at].to_vec())];
    let mut bots = vec![Circuit::par_all(first[at..].to_vec())];
    let mut width = tops[0].outputs();
    for k in 1..=len {
        let layer = par_elements(&elems[k]);
        let mut prefix = vec![0usize];
        for e in &layer {
            prefix.push(prefix.last().copied().unwrap_or(0) + e.inputs());
        }
        let j = match index_param(params, &format!("j{k}"))? {
            Some(j) if j <= layer.len() && prefix[j] == width => j,
            Some(j) => {
                return Err(Error::NotApplicable(format!(
                    "layer {k} cannot be split after {j} elements to feed {width} wires"
                )))
            }
            None => prefix.iter().position(|&w| w == width).ok_or_else(|| {
                Error::NotApplicable(format!("layer {k} has no split feeding exactly {width} wires"))
            })?,
        };
        let c = Circuit::par_all(layer[..j].to_vec());
        let d = Circuit::par_all(layer[j..].to_vec());
        width = c.outputs();
        tops.push(c);
        bots.push(d);
    }
    let top = Circuit::seq_all(tops)?;
    let bot = Circuit::seq_all(bots)?;
    then_rest(Circuit::par(top, bot), &elems[len + 1..])
}

/// `(A ; C) ⊗ (B ; D) → (A ⊗ B) ; (C ⊗ D)`.
///
/// Parameters: `split` — number of parallel elements forming the top branch
/// (default 1); `top` / `bottom` — number of sequential elements of each
/// branch that go into the first layer (default 1; 0 puts an identity there).
fn interchange_rl(sub: &Circuit, params: &Params) -> Result<Circuit> {
    if let Some(k) = params.keys().find(|k| !["split", "top", "bottom"].contains(&k.as_str())) {
        return Err(Error::NotApplicable(format!("Interchange has no parameter `{k}`")));
    }
    let elems = par_elements(sub);
    let split = index_param(params, "split")?.unwrap_or(1);
    if split == 0 || split >= elems.len() {
        return Err(Error::NotApplicable(format!(
            "cannot split a parallel chain of {} elements after {split}",
            elems.len()
        )));
    }
    let x = Circuit::par_all(elems[..split].to_vec());
    let y = Circuit::par_all(elems[split..].to_vec());
    let cut = |z: &Circuit, name: &str| -> Result<(Circuit, Circuit)> {
        let parts = if z.is_seq() { seq_elements(z) } else { vec![z.clone()] };
        let n = index_param(params, name)?.unwrap_or(1);
        if n > parts.len() {
            return Err(Error::NotApplicable(format!(
                "branch has only {} sequential elements, cannot take {n}",
                parts.len()
            )));
        }
        let first = if n == 0 { id_n(z.inputs()) } else { chain(parts[..n].to_vec()) };
        let second = if n == parts.len() { id_n(z.outputs()) } else { chain(parts[n..].to_vec()) };
        Ok((first, second))
    };
    let (a, c) = cut(&x, "top")?;
    let (b, d) = cut(&y, "bottom")?;
    Circuit::seq(Circuit::par(a, b), Circuit::par(c, d))
}

fn leading_ids(elems: &[Circuit]) -> usize {
    elems.iter().take_while(|e| matches!(e.node(), Node::Id)).count()
}

fn trailing_ids(elems: &[Circuit]) -> usize {
    elems.iter().rev().take_while(|e| matches!(e.node(), Node::Id)).count()
}

/// Naturality of the symmetry, in two forms:
///
/// 1. `(C ⊗ id_k) ; σ_{n,k} = σ_{m,k} ; (id_k ⊗ C)`
/// 2. `(id_k ⊗ C) ; σ_{k,n} = σ_{k,m} ; (C ⊗ id_k)`
///
/// where `C : m -> n`.  Optional parameters `form` (1 or 2) and `k` restrict
/// the search; otherwise the first decomposition that matches is used.
fn sym_nat(sub: &Circuit, dir: Direction, params: &Params) -> Result<Circuit> {
    if let Some(k) = params.keys().find(|k| !["form", "k"].contains(&k.as_str())) {
        return Err(Error::NotApplicable(format!("SymNat has no parameter `{k}`")));
    }
    let want_form = index_param(params, "form")?;
    let want_k = index_param(params, "k")?;
    let elems = seq_elements(sub);
    // Candidate (C, k, form) triples, read off the layer where C sits.
    let mut candidates: Vec<(Circuit, usize, usize)> = Vec::new();
    let layers: Vec<&Circuit> = match dir {
        Direction::LeftToRight => elems.iter().take(1).collect(),
        Direction::RightToLeft => elems.iter().collect(),
    };
    for layer in layers {
        let pl = par_elements(layer);
        // In the left-hand sides the identity block sits after C in form 1;
        // in the right-hand sides it sits before C in form 1.
        let (form1_ids, form2_ids) = match dir {
            Direction::LeftToRight => (trailing_ids(&pl), leading_ids(&pl)),
            Direction::RightToLeft => (leading_ids(&pl), trailing_ids(&pl)),
        };
        for k in 1..=form1_ids.min(pl.len().saturating_sub(1)) {
            let c = match dir {
                Direction::LeftToRight => Circuit::par_all(pl[..pl.len() - k].to_vec()),
                Direction::RightToLeft => Circuit::par_all(pl[k..].to_vec()),
            };
            candidates.push((c, k, 1));
        }
        for k in 1..=form2_ids.min(pl.len().saturating_sub(1)) {
            let c = match dir {
                Direction::LeftToRight => Circuit::par_all(pl[k..].to_vec()),
                Direction::RightToLeft => Circuit::par_all(pl[..pl.len() - k].to_vec()),
            };
            candidates.push((c, k, 2));
        }
    }
    for (c, k, form) in candidates {
        if want_form.is_some_and(|f| f != form) || want_k.is_some_and(|w| w != k) {
            continue;
        }
        let (m, n) = (c.inputs(), c.outputs());
        let (lhs, rhs) = if form == 1 {
            (
                Circuit::seq(Circuit::par(c.clone(), id_n(k)), swap_block(n, k))?,
                Circuit::seq(swap_block(m, k), Circuit::par(id_n(k), c))?,
            )
        } else {
            (
                Circuit::seq(Circuit::par(id_n(k), c.clone()), swap_block(k, n))?,
                Circuit::seq(swap_block(k, m), Circuit::par(c, id_n(k)))?,
            )
        };
        let (source, target) = match dir {
            Direction::LeftToRight => (lhs, rhs),
            Direction::RightToLeft => (rhs, lhs),
        };
        let source = flatten(&source);
        if is_identity_bundle(&source) {
            continue;
        }
        if let Ok(out) = replace_source(sub, &source, &target) {
            return Ok(out);
        }
    }
    Err(Error::NotApplicable(format!(
        "no symmetry-naturality pattern at {}",
        serialize(sub)
    )))
}

fn is_discard_bundle(c: &Circuit) -> bool {
    c.outputs() == 0
        && c.inputs() > 0
        && par_elements(c)
            .iter()
            .all(|e| matches!(e.node(), Node::Gen(Generator::Discard)))
}

/// `c ; del_n → del_m` for the shortest causal prefix `c` followed by a
/// bundle of discards.
fn delete(sub: &Circuit) -> Result<Circuit> {
    let elems = seq_elements(sub);
    for j in 1..elems.len() {
        if is_discard_bundle(&elems[j]) {
            let prefix = chain(elems[..j].to_vec());
            if !prefix.is_causal() {
                return Err(Error::NotCausal(format!(
                    "Delete applies to conditioning-free circuits, found {}",
                    serialize(&prefix)
                )));
            }
            return then_rest(discard_n(prefix.inputs()), &elems[j + 1..]);
        }
    }
    Err(Error::PatternMismatch {
        expected: "c ; del(n)".into(),
        found: serialize(sub),
    })
}

/// `b ; copy_n → copy_m ; (b ⊗ b)` for the shortest Boolean prefix `b`
/// followed by a bundle copy.
fn copy_boolean_lr(sub: &Circuit) -> Result<Circuit> {
    let elems = seq_elements(sub);
    for j in 1..elems.len() {
        let b = chain(elems[..j].to_vec());
        let n = b.outputs();
        if n == 0 {
            continue;
        }
        let copies = seq_elements(&flatten(&copy_bundle(n)));
        if elems.len() >= j + copies.len() && elems[j..j + copies.len()] == copies[..] {
            if !b.is_boolean() {
                return Err(Error::NotBoolean);
            }
            let m = b.inputs();
            let target = flatten(&Circuit::seq(copy_bundle(m), Circuit::par(b.clone(), b))?);
            return then_rest(target, &elems[j + copies.len()..]);
        }
    }
    Err(Error::PatternMismatch {
        expected: "b ; copy(n)".into(),
        found: serialize(sub),
    })
}

/// `copy_m ; (b ⊗ b) → b ; copy_n` for a Boolean `b`.
fn copy_boolean_rl(sub: &Circuit) -> Result<Circuit> {
    let elems = seq_elements(sub);
    let m = sub.inputs();
    let copies = if m == 0 {
        Vec::new()
    } else {
        seq_elements(&flatten(&copy_bundle(m)))
    };
    let found = || Error::PatternMismatch {
        expected: "copy(m) ; (b ⊗ b)".into(),
        found: serialize(sub),
    };
    if elems.len() <= copies.len() || elems[..copies.len()] != copies[..] {
        return Err(found());
    }
    let layer = par_elements(&elems[copies.len()]);
    if layer.len() % 2 != 0 {
        return Err(found());
    }
    let h = layer.len() / 2;
    if layer[..h] != layer[h..] {
        return Err(found());
    }
    let b = Circuit::par_all(layer[..h].to_vec());
    if !b.is_boolean() {
        return Err(Error::NotBoolean);
    }
    let n = b.outputs();
    let target = Circuit::seq(b, copy_bundle(n))?;
    then_rest(target, &elems[copies.len() + 1..])
}

fn failure(sub: &Circuit) -> Result<Circuit> {
    match eval(sub)?.canonical_class() {
        ProjClass::Bottom { inputs, outputs } => Ok(failure_circuit(inputs, outputs)),
        ProjClass::Canonical(_) => Err(Error::SideConditionViolated(format!(
            "Failure applies to circuits that always fail, {} does not",
            serialize(sub)
        ))),
    }
}
