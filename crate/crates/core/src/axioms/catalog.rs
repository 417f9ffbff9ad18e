//! Concrete left- and right-hand sides of every rule.
//!
//! Orientation convention: when one side of an equation is a bare wire (or
//! the empty diagram), that side is the right-hand side, so `A2l`, `A2r`,
//! `B2l`, `B2r`, `B4`, `B5`, `D3`, `F2l`, `F2r` and `F6` all read
//! "compound = identity" from left to right.

use num_traits::{One, Zero};

use super::{param, AxiomId, LemmaId, Params, Rule};
use crate::circuit::gates::{
    convex_sum, copy_bundle, discard_n, failure_circuit, flip_bot, guarded_flip, id_n, mux, or2,
    permutation, select_flip, swap_block,
};
use crate::circuit::{chain, flip, pars, Circuit};
use crate::error::{Error, Result};
use crate::rat::{complement, fmt_rat, is_probability, rat, Rat};
use crate::semantics::{eval, ProjClass};

/// A rule instantiated at concrete parameters (and operand circuits, for the
/// structural laws and the lemmas quantified over circuits).
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomInstance {
    pub rule: Rule,
    /// All parameters, including the derived ones (`rt`, `pt`, `qt`, `r`).
    pub params: Params,
    pub lhs: Circuit,
    pub rhs: Circuit,
}

impl AxiomInstance {
    /// Whether both sides have the same canonical class.
    pub fn sides_agree(&self) -> Result<bool> {
        let (l, r) = (eval(&self.lhs)?, eval(&self.rhs)?);
        Ok(l.canonical_class() == r.canonical_class())
    }
}

fn s(parts: Vec<Circuit>) -> Circuit {
    chain(parts)
}

fn p(parts: Vec<Circuit>) -> Circuit {
    pars(parts)
}

fn id() -> Circuit {
    Circuit::id()
}

fn cp() -> Circuit {
    Circuit::copy()
}

fn del() -> Circuit {
    Circuit::discard()
}

fn and() -> Circuit {
    Circuit::and()
}

fn not() -> Circuit {
    Circuit::not()
}

fn swap() -> Circuit {
    Circuit::swap()
}

fn cond() -> Circuit {
    Circuit::cond()
}

/// `(a, x1, x2) ↦ (a ? flip p : x1, a ? flip q : x2)`, the guarded pair of
/// coins shared by both sides of E2.
fn guarded_pair(p_: &Rat, q_: &Rat) -> Circuit {
    s(vec![
        p(vec![cp(), id_n(2)]),
        p(vec![id(), swap(), id()]),
        p(vec![guarded_flip(p_), guarded_flip(q_)]),
    ])
}

/// `(a, x1, x2, y) ↦ y ? (a ? flip p : x1) : (a ? flip q : x2)`.
fn e2_core(p_: &Rat, q_: &Rat) -> Circuit {
    s(vec![p(vec![guarded_pair(p_, q_), id()]), swap_block(2, 1), mux()])
}

/// `(a, x1, x2, y) ↦ a ? flip rt : (y ? x1 : x2)`.
fn e2_mixed(rt: &Rat) -> Circuit {
    s(vec![p(vec![id(), swap_block(2, 1)]), p(vec![id(), mux()]), guarded_flip(rt)])
}

/// `(z, a, y) ↦ a ? (z ? flip pt : flip qt) : y`.
fn e2_posterior(pt: &Rat, qt: &Rat) -> Circuit {
    s(vec![p(vec![select_flip(pt, qt), id_n(2)]), p(vec![swap(), id()]), mux()])
}

fn e2_sides(r: &Rat, p_: &Rat, q_: &Rat, rt: &Rat, pt: &Rat, qt: &Rat) -> (Circuit, Circuit) {
    let lhs = s(vec![
        p(vec![id_n(3), s(vec![flip(r), cp()])]),
        p(vec![e2_core(p_, q_), id()]),
    ]);
    let rhs = s(vec![
        p(vec![cp(), id_n(2), s(vec![flip(r), cp()])]),
        p(vec![id(), swap_block(1, 3), id()]),
        p(vec![s(vec![e2_mixed(rt), cp()]), id_n(2)]),
        p(vec![id(), e2_posterior(pt, qt)]),
    ]);
    (lhs, rhs)
}

fn derived_e5_sides(r: &Rat, p_: &Rat, q_: &Rat, rt: &Rat) -> (Circuit, Circuit) {
    let lhs = s(vec![p(vec![id_n(3), flip(r)]), e2_core(p_, q_)]);
    let rhs = s(vec![p(vec![id_n(3), flip(r)]), e2_mixed(rt)]);
    (lhs, rhs)
}

fn e4_sides(p_: &Rat, q_: &Rat) -> (Circuit, Circuit) {
    let tail = vec![p(vec![s(vec![flip(q_), cp()]), id_n(2)]), p(vec![id(), mux()])];
    let mut lhs = vec![
        p(vec![s(vec![flip(p_), cp()]), id_n(4)]),
        permutation(&[0, 2, 4, 1, 3, 5]),
        p(vec![mux(), mux()]),
    ];
    lhs.extend(tail.iter().cloned());
    let mut rhs = vec![permutation(&[0, 2, 1, 3]), p(vec![convex_sum(p_), convex_sum(p_)])];
    rhs.extend(tail);
    (s(lhs), s(rhs))
}

/// The parameters each rule accepts: (required, derived-or-optional).
fn signature(rule: Rule) -> (&'static [&'static str], &'static [&'static str]) {
    use AxiomId::*;
    match rule {
        Rule::Axiom(D3 | E1) => (&["p"], &[]),
        Rule::Axiom(E2) => (&["r", "p", "q"], &["rt", "pt", "qt"]),
        Rule::Axiom(E3) => (&["p", "q"], &["pt", "qt"]),
        Rule::Axiom(E4) => (&["p", "q"], &[]),
        Rule::Axiom(F7) => (&["p0", "p1", "p2"], &["r"]),
        Rule::Axiom(SymInv) => (&[], &["m", "n"]),
        Rule::Lemma(LemmaId::Mult) => (&["p", "q"], &["r"]),
        Rule::Lemma(LemmaId::DerivedE5) => (&["r", "p", "q"], &["rt"]),
        _ => (&[], &[]),
    }
}

/// Checks that `params` binds exactly the rule's parameters, all of them
/// probabilities (apart from the structural size parameters).
fn check_params(rule: Rule, params: &Params) -> Result<()> {
    let (required, optional) = signature(rule);
    for name in required {
        param(params, name)?;
    }
    for (name, value) in params {
        if !required.contains(&name.as_str()) && !optional.contains(&name.as_str()) {
            return Err(Error::NotApplicable(format!("rule {rule} has no parameter `{name}`")));
        }
        let structural = matches!(rule, Rule::Axiom(AxiomId::SymInv));
        if !structural && !is_probability(value) {
            return Err(Error::SideConditionViolated(format!(
                "{name} = {} is not in [0, 1]",
                fmt_rat(value)
            )));
        }
    }
    Ok(())
}

/// Binds a derived parameter: if the caller supplied it, it must agree with
/// the formula.
fn derive(params: &mut Params, name: &str, value: Rat, formula: &str) -> Result<Rat> {
    if let Some(given) = params.get(name) {
        if *given != value {
            return Err(Error::SideConditionViolated(format!(
                "{formula}: expected {name} = {}, got {}",
                fmt_rat(&value),
                fmt_rat(given)
            )));
        }
    }
    params.insert(name.to_string(), value.clone());
    Ok(value)
}

/// A parameter that is free (defaulting to 0) when its formula is undefined.
fn free(params: &mut Params, name: &str) -> Rat {
    params.entry(name.to_string()).or_insert_with(Rat::zero).clone()
}

/// Side conditions of E2: `rt = rp + (1−r)q`, `pt = rp/rt` unless `rt = 0`,
/// `qt = r(1−p)/(1−rt)` unless `rt = 1`.
fn complete_e2(params: &mut Params) -> Result<(Rat, Rat, Rat, Rat, Rat, Rat)> {
    let (r, p_, q_) = (param(params, "r")?, param(params, "p")?, param(params, "q")?);
    let rt = derive(params, "rt", &r * &p_ + complement(&r) * &q_, "rt = rp + (1-r)q")?;
    let pt = if rt.is_zero() {
        free(params, "pt")
    } else {
        derive(params, "pt", &r * &p_ / &rt, "pt = rp / rt")?
    };
    let qt = if rt.is_one() {
        free(params, "qt")
    } else {
        derive(params, "qt", &r * complement(&p_) / complement(&rt), "qt = r(1-p) / (1-rt)")?
    };
    Ok((r, p_, q_, rt, pt, qt))
}

/// Instantiates a rule at the given parameters.  Rules quantified over
/// circuits (the structural laws, `Delete`, `CopyBoolean`, `Failure`) use
/// small fixed operands; see [`instantiate_structural`] to choose them.
pub fn instantiate(rule: impl Into<Rule>, params: &Params) -> Result<AxiomInstance> {
    instantiate_structural(rule, params, &[])
}

fn default_operands(rule: Rule) -> Vec<Circuit> {
    use AxiomId::*;
    match rule {
        Rule::Axiom(SeqAssoc | ParAssoc) => vec![not(), cp(), and()],
        Rule::Axiom(Interchange) => vec![not(), cp(), not(), and()],
        Rule::Axiom(SeqUnit | ParUnit) => vec![cp()],
        Rule::Axiom(SymNat) => vec![not(), cp()],
        Rule::Lemma(LemmaId::Delete) => vec![s(vec![p(vec![flip(&rat(1, 3)), id()]), and()])],
        Rule::Lemma(LemmaId::CopyBoolean) => vec![s(vec![and(), not()])],
        Rule::Lemma(LemmaId::Failure) => vec![s(vec![p(vec![id(), flip_bot()]), and()])],
        _ => Vec::new(),
    }
}

fn operand_count(rule: Rule) -> usize {
    use AxiomId::*;
    match rule {
        Rule::Axiom(SeqAssoc | ParAssoc) => 3,
        Rule::Axiom(Interchange) => 4,
        Rule::Axiom(SymNat) => 2,
        Rule::Axiom(SeqUnit | ParUnit) => 1,
        Rule::Lemma(LemmaId::Delete | LemmaId::CopyBoolean | LemmaId::Failure) => 1,
        _ => 0,
    }
}

fn composable(a: &Circuit, b: &Circuit) -> Result<()> {
    if a.outputs() != b.inputs() {
        return Err(Error::TypeMismatch {
            path: Vec::new(),
            left: a.ty(),
            right: b.ty(),
        });
    }
    Ok(())
}

/// Instantiates a rule at the given parameters and operand circuits.  An
/// empty operand list selects the default operands.
pub fn instantiate_structural(
    rule: impl Into<Rule>,
    params: &Params,
    operands: &[Circuit],
) -> Result<AxiomInstance> {
    use AxiomId::*;
    let rule = rule.into();
    check_params(rule, params)?;
    let want = operand_count(rule);
    let defaults;
    let ops: &[Circuit] = if operands.is_empty() && want > 0 {
        defaults = default_operands(rule);
        &defaults
    } else {
        operands
    };
    if ops.len() != want {
        return Err(Error::NotApplicable(format!(
            "rule {rule} takes {want} operand circuit(s), got {}",
            ops.len()
        )));
    }
    let mut params = params.clone();
    let half = rat(1, 2);
    let (lhs, rhs) = match rule {
        Rule::Axiom(SeqAssoc) => {
            composable(&ops[0], &ops[1])?;
            composable(&ops[1], &ops[2])?;
            let [a, b, c] = [ops[0].clone(), ops[1].clone(), ops[2].clone()];
            (
                Circuit::seq(Circuit::seq(a.clone(), b.clone())?, c.clone())?,
                Circuit::seq(a, Circuit::seq(b, c)?)?,
            )
        }
        Rule::Axiom(ParAssoc) => {
            let [a, b, c] = [ops[0].clone(), ops[1].clone(), ops[2].clone()];
            (
                Circuit::par(Circuit::par(a.clone(), b.clone()), c.clone()),
                Circuit::par(a, Circuit::par(b, c)),
            )
        }
        Rule::Axiom(Interchange) => {
            composable(&ops[0], &ops[2])?;
            composable(&ops[1], &ops[3])?;
            let [a, b, c, d] = [ops[0].clone(), ops[1].clone(), ops[2].clone(), ops[3].clone()];
            (
                Circuit::seq(Circuit::par(a.clone(), b.clone()), Circuit::par(c.clone(), d.clone()))?,
                Circuit::par(Circuit::seq(a, c)?, Circuit::seq(b, d)?),
            )
        }
        Rule::Axiom(SeqUnit) => {
            let a = ops[0].clone();
            let lhs = Circuit::seq(id_n(a.inputs()), Circuit::seq(a.clone(), id_n(a.outputs()))?)?;
            (lhs, a)
        }
        Rule::Axiom(ParUnit) => {
            let a = ops[0].clone();
            (Circuit::par(Circuit::id0(), Circuit::par(a.clone(), Circuit::id0())), a)
        }
        Rule::Axiom(SymNat) => {
            let (a, b) = (ops[0].clone(), ops[1].clone());
            (
                Circuit::seq(Circuit::par(a.clone(), b.clone()), swap_block(a.outputs(), b.outputs()))?,
                Circuit::seq(swap_block(a.inputs(), b.inputs()), Circuit::par(b, a))?,
            )
        }
        Rule::Axiom(SymInv) => {
            let m = super::index_param(&params, "m")?.unwrap_or(1);
            let n = super::index_param(&params, "n")?.unwrap_or(1);
            (Circuit::seq(swap_block(m, n), swap_block(n, m))?, id_n(m + n))
        }
        Rule::Axiom(A1) => (s(vec![cp(), p(vec![cp(), id()])]), s(vec![cp(), p(vec![id(), cp()])])),
        Rule::Axiom(A2l) => (s(vec![cp(), p(vec![del(), id()])]), id()),
        Rule::Axiom(A2r) => (s(vec![cp(), p(vec![id(), del()])]), id()),
        Rule::Axiom(A3) => (s(vec![cp(), swap()]), cp()),
        Rule::Axiom(B1) => (s(vec![p(vec![and(), id()]), and()]), s(vec![p(vec![id(), and()]), and()])),
        Rule::Axiom(B2l) => (s(vec![p(vec![Circuit::constant(true), id()]), and()]), id()),
        Rule::Axiom(B2r) => (s(vec![p(vec![id(), Circuit::constant(true)]), and()]), id()),
        Rule::Axiom(B3) => (s(vec![swap(), and()]), and()),
        Rule::Axiom(B4) => (s(vec![not(), not()]), id()),
        Rule::Axiom(B5) => (s(vec![cp(), and()]), id()),
        Rule::Axiom(B6) => (
            s(vec![cp(), p(vec![id(), not()]), and()]),
            s(vec![del(), Circuit::constant(false)]),
        ),
        Rule::Axiom(B7) => (
            s(vec![p(vec![and(), id()]), or2()]),
            s(vec![p(vec![id(), id(), cp()]), p(vec![id(), swap(), id()]), p(vec![or2(), or2()]), and()]),
        ),
        Rule::Axiom(C0) => (
            s(vec![Circuit::constant(false), cp()]),
            p(vec![Circuit::constant(false), Circuit::constant(false)]),
        ),
        Rule::Axiom(C1) => (
            s(vec![Circuit::constant(true), cp()]),
            p(vec![Circuit::constant(true), Circuit::constant(true)]),
        ),
        Rule::Axiom(C2) => (
            s(vec![and(), cp()]),
            s(vec![p(vec![cp(), cp()]), p(vec![id(), swap(), id()]), p(vec![and(), and()])]),
        ),
        Rule::Axiom(C3) => (s(vec![not(), cp()]), s(vec![cp(), p(vec![not(), not()])])),
        Rule::Axiom(D1) => (s(vec![and(), del()]), p(vec![del(), del()])),
        Rule::Axiom(D2) => (s(vec![not(), del()]), del()),
        Rule::Axiom(D3) => {
            let p_ = param(&params, "p")?;
            (s(vec![flip(&p_), del()]), Circuit::id0())
        }
        Rule::Axiom(E1) => {
            let p_ = param(&params, "p")?;
            (s(vec![flip(&p_), not()]), flip(&complement(&p_)))
        }
        Rule::Axiom(E2) => {
            let (r, p_, q_, rt, pt, qt) = complete_e2(&mut params)?;
            e2_sides(&r, &p_, &q_, &rt, &pt, &qt)
        }
        Rule::Axiom(E3) => {
            let (p_, q_) = (param(&params, "p")?, param(&params, "q")?);
            let pq = &p_ * &q_;
            if pq.is_one() {
                return Err(Error::SideConditionViolated("E3 requires pq != 1".into()));
            }
            let pt = derive(&mut params, "pt", pq.clone(), "pt = pq")?;
            let qt = derive(&mut params, "qt", &p_ * complement(&q_) / complement(&pq), "qt = p(1-q) / (1-pq)")?;
            (
                s(vec![p(vec![convex_sum(&q_), id()]), convex_sum(&p_)]),
                s(vec![p(vec![id(), convex_sum(&qt)]), convex_sum(&pt)]),
            )
        }
        Rule::Axiom(E4) => {
            let (p_, q_) = (param(&params, "p")?, param(&params, "q")?);
            e4_sides(&p_, &q_)
        }
        Rule::Axiom(F1) => (s(vec![p(vec![cond(), id()]), cond()]), s(vec![p(vec![id(), cond()]), cond()])),
        Rule::Axiom(F2l) => (s(vec![p(vec![flip(&half), id()]), cond()]), id()),
        Rule::Axiom(F2r) => (s(vec![p(vec![id(), flip(&half)]), cond()]), id()),
        Rule::Axiom(F3) => (s(vec![swap(), cond()]), cond()),
        Rule::Axiom(F4) => (s(vec![p(vec![cp(), id()]), p(vec![id(), cond()])]), s(vec![cond(), cp()])),
        Rule::Axiom(F5) => (s(vec![cond(), cp()]), s(vec![p(vec![id(), cp()]), p(vec![cond(), id()])])),
        Rule::Axiom(F6) => (s(vec![cp(), cond()]), id()),
        Rule::Axiom(F7) => {
            let (p0, p1, p2) = (param(&params, "p0")?, param(&params, "p1")?, param(&params, "p2")?);
            let num = &p0 * &p1;
            let den = &num + complement(&p0) * complement(&p2);
            if den.is_zero() {
                return Err(Error::SideConditionViolated("F7 requires p0 p1 + (1-p0)(1-p2) != 0".into()));
            }
            let r = derive(&mut params, "r", num / den, "r = p0 p1 / (p0 p1 + (1-p0)(1-p2))")?;
            (
                s(vec![flip(&p0), cp(), p(vec![id(), select_flip(&p1, &p2)]), cond()]),
                flip(&r),
            )
        }
        Rule::Axiom(F8) => (
            p(vec![flip_bot(), id()]),
            p(vec![flip_bot(), s(vec![del(), Circuit::constant(false)])]),
        ),
        Rule::Lemma(LemmaId::Mult) => {
            let (p_, q_) = (param(&params, "p")?, param(&params, "q")?);
            let num = &p_ * &q_;
            let den = &num + complement(&p_) * complement(&q_);
            if den.is_zero() {
                return Err(Error::SideConditionViolated("Mult requires pq + (1-p)(1-q) != 0".into()));
            }
            let r = derive(&mut params, "r", num / den, "r = pq / (pq + (1-p)(1-q))")?;
            (s(vec![p(vec![flip(&p_), flip(&q_)]), cond()]), flip(&r))
        }
        Rule::Lemma(LemmaId::DerivedE5) => {
            let (r, p_, q_) = (param(&params, "r")?, param(&params, "p")?, param(&params, "q")?);
            let rt = derive(&mut params, "rt", &r * &p_ + complement(&r) * &q_, "rt = rp + (1-r)q")?;
            derived_e5_sides(&r, &p_, &q_, &rt)
        }
        Rule::Lemma(LemmaId::Delete) => {
            let c = ops[0].clone();
            if !c.is_causal() {
                return Err(Error::NotCausal("Delete applies to conditioning-free circuits".into()));
            }
            (Circuit::seq(c.clone(), discard_n(c.outputs()))?, discard_n(c.inputs()))
        }
        Rule::Lemma(LemmaId::CopyBoolean) => {
            let b = ops[0].clone();
            if !b.is_boolean() {
                return Err(Error::NotBoolean);
            }
            (
                Circuit::seq(b.clone(), copy_bundle(b.outputs()))?,
                Circuit::seq(copy_bundle(b.inputs()), Circuit::par(b.clone(), b))?,
            )
        }
        Rule::Lemma(LemmaId::Failure) => {
            let c = ops[0].clone();
            if !matches!(eval(&c)?.canonical_class(), ProjClass::Bottom { .. }) {
                return Err(Error::SideConditionViolated("Failure applies to circuits that always fail".into()));
            }
            let (m, n) = (c.inputs(), c.outputs());
            (c, failure_circuit(m, n))
        }
    };
    Ok(AxiomInstance { rule, params, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, Rat)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn e1_instance() {
        let inst = instantiate(AxiomId::E1, &params(&[("p", rat(1, 3))])).unwrap();
        assert_eq!(inst.lhs, s(vec![flip(&rat(1, 3)), not()]));
        assert_eq!(inst.rhs, flip(&rat(2, 3)));
    }

    #[test]
    fn f7_derives_r() {
        let inst = instantiate(AxiomId::F7, &params(&[("p0", rat(1, 2)), ("p1", rat(1, 4)), ("p2", rat(3, 4))])).unwrap();
        assert_eq!(inst.params["r"], rat(1, 2));
    }

    #[test]
    fn e3_side_condition() {
        let err = instantiate(AxiomId::E3, &params(&[("p", rat(1, 1)), ("q", rat(1, 1))])).unwrap_err();
        assert!(matches!(err, Error::SideConditionViolated(_)));
    }

    #[test]
    fn missing_and_wrong_params() {
        assert_eq!(
            instantiate(AxiomId::E1, &Params::new()).unwrap_err(),
            Error::MissingParam("p".into())
        );
        let wrong = params(&[("r", rat(1, 2)), ("p", rat(1, 4)), ("q", rat(3, 4)), ("rt", rat(1, 3))]);
        assert!(matches!(instantiate(AxiomId::E2, &wrong), Err(Error::SideConditionViolated(_))));
    }

    #[test]
    fn every_rule_instantiates_soundly() {
        let ps = params(&[
            ("p", rat(1, 3)),
            ("q", rat(3, 5)),
            ("r", rat(2, 7)),
            ("p0", rat(1, 2)),
            ("p1", rat(1, 4)),
            ("p2", rat(3, 4)),
        ]);
        for rule in Rule::all() {
            let (required, optional) = signature(rule);
            let mine: Params = ps
                .iter()
                .filter(|(k, _)| required.contains(&k.as_str()) || optional.contains(&k.as_str()))
                .filter(|(k, _)| !(rule == Rule::Lemma(LemmaId::Mult) && k.as_str() == "r"))
                .filter(|(k, _)| !(rule == Rule::Axiom(AxiomId::F7) && k.as_str() == "r"))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            let inst = instantiate(rule, &mine).unwrap_or_else(|e| panic!("{rule}: {e}"));
            assert_eq!(inst.lhs.ty(), inst.rhs.ty(), "{rule}");
            assert!(inst.sides_agree().unwrap(), "{rule}");
        }
    }
}
