//! Semantic soundness harness: instantiate each rule at random parameters
//! (and random operand circuits) and compare both sides exactly.

use num_traits::{One, Zero};

use super::{instantiate_structural, AxiomId, LemmaId, Params, Rule};
use crate::circuit::{serialize, Circuit};
use crate::random::{CircuitConfig, Gen};
use crate::rat::{complement, fmt_rat, Rat};
use crate::semantics::eval;

/// One failed trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub params: Params,
    /// Serialized operand circuits, for rules quantified over circuits.
    pub operands: Vec<String>,
    pub reason: String,
}

/// Outcome of [`check_soundness`] for one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundnessReport {
    pub rule: Rule,
    /// Whether the rule is judged up to a global scalar factor.
    pub projective: bool,
    pub trials: usize,
    /// Trials where the two sides agreed under the rule's criterion.
    pub passed: usize,
    /// Trials where the two sides had *exactly* equal matrices.
    pub exact: usize,
    pub failures: Vec<Failure>,
}

impl SoundnessReport {
    /// Whether every trial passed.
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.passed == self.trials
    }
}

fn draw_params(rule: Rule, g: &mut Gen) -> Params {
    let mut ps = Params::new();
    let put = |ps: &mut Params, k: &str, v: Rat| {
        ps.insert(k.to_string(), v);
    };
    match rule {
        Rule::Axiom(AxiomId::D3 | AxiomId::E1) => put(&mut ps, "p", g.prob()),
        Rule::Axiom(AxiomId::E2) => {
            let (r, p, q) = (g.prob(), g.prob(), g.prob());
            let rt = &r * &p + complement(&r) * &q;
            // Exercise the freedom at degenerate rt: any pt (resp. qt) goes.
            if rt.is_zero() {
                put(&mut ps, "pt", g.prob());
            }
            if rt.is_one() {
                put(&mut ps, "qt", g.prob());
            }
            put(&mut ps, "r", r);
            put(&mut ps, "p", p);
            put(&mut ps, "q", q);
        }
        Rule::Axiom(AxiomId::E3) => loop {
            let (p, q) = (g.prob(), g.prob());
            if !(&p * &q).is_one() {
                put(&mut ps, "p", p);
                put(&mut ps, "q", q);
                break;
            }
        },
        Rule::Axiom(AxiomId::E4) => {
            put(&mut ps, "p", g.prob());
            put(&mut ps, "q", g.prob());
        }
        Rule::Axiom(AxiomId::F7) => loop {
            let (p0, p1, p2) = (g.prob(), g.prob(), g.prob());
            let den = &p0 * &p1 + complement(&p0) * complement(&p2);
            if !den.is_zero() {
                put(&mut ps, "p0", p0);
                put(&mut ps, "p1", p1);
                put(&mut ps, "p2", p2);
                break;
            }
        },
        Rule::Axiom(AxiomId::SymInv) => {
            put(&mut ps, "m", Rat::from_integer(g.range(0, 2).into()));
            put(&mut ps, "n", Rat::from_integer(g.range(0, 2).into()));
        }
        Rule::Lemma(LemmaId::Mult) => {
            put(&mut ps, "p", g.prob_open());
            put(&mut ps, "q", g.prob_open());
        }
        Rule::Lemma(LemmaId::DerivedE5) => {
            put(&mut ps, "r", g.prob());
            put(&mut ps, "p", g.prob());
            put(&mut ps, "q", g.prob());
        }
        _ => {}
    }
    ps
}

fn draw_operands(rule: Rule, g: &mut Gen) -> Vec<Circuit> {
    use AxiomId::*;
    let cond = g.coin();
    let narrow = CircuitConfig {
        max_width: 2,
        max_gens: 4,
        cond,
        flips: true,
    };
    let wide = CircuitConfig {
        max_width: 3,
        max_gens: 5,
        ..narrow
    };
    match rule {
        Rule::Axiom(SeqAssoc) => {
            let a = g.any_circuit(&wide);
            let b = g.circuit(a.outputs(), &wide);
            let c = g.circuit(b.outputs(), &wide);
            vec![a, b, c]
        }
        Rule::Axiom(ParAssoc) => (0..3).map(|_| g.any_circuit(&narrow)).collect(),
        Rule::Axiom(Interchange) => {
            let a = g.any_circuit(&narrow);
            let b = g.any_circuit(&narrow);
            let c = g.circuit(a.outputs(), &narrow);
            let d = g.circuit(b.outputs(), &narrow);
            vec![a, b, c, d]
        }
        Rule::Axiom(SeqUnit | ParUnit) => vec![g.any_circuit(&wide)],
        Rule::Axiom(SymNat) => vec![g.any_circuit(&narrow), g.any_circuit(&narrow)],
        Rule::Lemma(LemmaId::Delete) => vec![g.any_circuit(&CircuitConfig {
            cond: false,
            ..wide
        })],
        Rule::Lemma(LemmaId::CopyBoolean) => {
            let inputs = g.range(0, 3);
            vec![g.boolean_circuit(inputs, 3, 6)]
        }
        Rule::Lemma(LemmaId::Failure) => {
            let inputs = g.range(0, 2);
            vec![g.failing_circuit(inputs, &narrow)]
        }
        _ => Vec::new(),
    }
}

fn show_params(ps: &Params) -> String {
    ps.iter()
        .map(|(k, v)| format!("{k}={}", fmt_rat(v)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Instantiates `rule` at `trials` random parameter draws (and random
/// operands where the rule is quantified over circuits) and compares both
/// sides: exactly for causal and structural rules, up to a global scalar for
/// conditioning rules.  Failures are recorded, never raised.
pub fn check_soundness(rule: impl Into<Rule>, trials: usize, seed: u64) -> SoundnessReport {
    let rule = rule.into();
    let mut g = Gen::new(seed ^ (rule_index(rule) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut report = SoundnessReport {
        rule,
        projective: rule.is_projective(),
        trials,
        passed: 0,
        exact: 0,
        failures: Vec::new(),
    };
    for _ in 0..trials {
        let params = draw_params(rule, &mut g);
        let operands = draw_operands(rule, &mut g);
        let fail = |reason: String| Failure {
            params: params.clone(),
            operands: operands.iter().map(serialize).collect(),
            reason,
        };
        let inst = match instantiate_structural(rule, &params, &operands) {
            Ok(inst) => inst,
            Err(e) => {
                report.failures.push(fail(format!("instantiation failed: {e}")));
                continue;
            }
        };
        let sides = eval(&inst.lhs).and_then(|l| Ok((l, eval(&inst.rhs)?)));
        let (l, r) = match sides {
            Ok(pair) => pair,
            Err(e) => {
                report.failures.push(fail(format!("evaluation failed: {e}")));
                continue;
            }
        };
        let exact = l == r;
        if exact {
            report.exact += 1;
        }
        let ok = if report.projective {
            l.prop_equal(&r).unwrap_or(false)
        } else {
            exact
        };
        if ok {
            report.passed += 1;
        } else {
            let how = if report.projective { "not proportional" } else { "matrices differ" };
            report
                .failures
                .push(fail(format!("{how} at {}", show_params(&inst.params))));
        }
    }
    report
}

fn rule_index(rule: Rule) -> usize {
    Rule::all().iter().position(|&r| r == rule).unwrap_or(0)
}

/// Runs [`check_soundness`] for every rule (axioms and lemmas), one thread
/// per rule.
pub fn check_all(trials: usize, seed: u64) -> Vec<SoundnessReport> {
    let rules = Rule::all();
    std::thread::scope(|scope| {
        let handles: Vec<_> = rules
            .iter()
            .map(|&rule| scope.spawn(move || check_soundness(rule, trials, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("soundness worker panicked"))
            .collect()
    })
}
