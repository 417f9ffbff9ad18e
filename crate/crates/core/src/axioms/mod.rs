//! The equational theory as data.
//!
//! The catalog covers the structural laws of symmetric monoidal categories,
//! the axioms of causal circuits (blocks A–E) and the axioms for
//! conditioning (block F), together with a handful of derived lemmas that are
//! convenient in derivations.  Each rule can be instantiated to a concrete
//! pair of circuits, checked for soundness against the exact semantics, and
//! applied at a located subterm by the derivation checker.

mod catalog;
mod derivation;
mod rewrite;
mod soundness;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rat::{fmt_rat, Rat};

pub use catalog::{instantiate, instantiate_structural, AxiomInstance};
pub use derivation::{check_derivation, Derivation, DerivationError, DerivationReport, TraceEntry};
pub use rewrite::apply_step;
pub use soundness::{check_all, check_soundness, Failure, SoundnessReport};

/// Named rational parameters of a rule instance.
pub type Params = BTreeMap<String, Rat>;

/// The primitive axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomId {
    // Symmetric monoidal structure.
    SeqAssoc,
    ParAssoc,
    Interchange,
    SeqUnit,
    ParUnit,
    SymNat,
    SymInv,
    // Copy and discard form a cocommutative comonoid.
    A1,
    A2l,
    A2r,
    A3,
    // Boolean algebra.
    B1,
    B2l,
    B2r,
    B3,
    B4,
    B5,
    B6,
    B7,
    // Boolean operations are copyable.
    C0,
    C1,
    C2,
    C3,
    // ... and discardable.
    D1,
    D2,
    D3,
    // Probabilistic axioms.
    E1,
    E2,
    E3,
    E4,
    // Conditioning.
    F1,
    F2l,
    F2r,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
}

impl AxiomId {
    /// Every axiom, in catalog order.
    pub const ALL: [AxiomId; 39] = [
        AxiomId::SeqAssoc,
        AxiomId::ParAssoc,
        AxiomId::Interchange,
        AxiomId::SeqUnit,
        AxiomId::ParUnit,
        AxiomId::SymNat,
        AxiomId::SymInv,
        AxiomId::A1,
        AxiomId::A2l,
        AxiomId::A2r,
        AxiomId::A3,
        AxiomId::B1,
        AxiomId::B2l,
        AxiomId::B2r,
        AxiomId::B3,
        AxiomId::B4,
        AxiomId::B5,
        AxiomId::B6,
        AxiomId::B7,
        AxiomId::C0,
        AxiomId::C1,
        AxiomId::C2,
        AxiomId::C3,
        AxiomId::D1,
        AxiomId::D2,
        AxiomId::D3,
        AxiomId::E1,
        AxiomId::E2,
        AxiomId::E3,
        AxiomId::E4,
        AxiomId::F1,
        AxiomId::F2l,
        AxiomId::F2r,
        AxiomId::F3,
        AxiomId::F4,
        AxiomId::F5,
        AxiomId::F6,
        AxiomId::F7,
        AxiomId::F8,
    ];

    /// The catalog name of the axiom.
    pub fn name(self) -> &'static str {
        use AxiomId::*;
        match self {
            SeqAssoc => "SeqAssoc",
            ParAssoc => "ParAssoc",
            Interchange => "Interchange",
            SeqUnit => "SeqUnit",
            ParUnit => "ParUnit",
            SymNat => "SymNat",
            SymInv => "SymInv",
            A1 => "A1",
            A2l => "A2l",
            A2r => "A2r",
            A3 => "A3",
            B1 => "B1",
            B2l => "B2l",
            B2r => "B2r",
            B3 => "B3",
            B4 => "B4",
            B5 => "B5",
            B6 => "B6",
            B7 => "B7",
            C0 => "C0",
            C1 => "C1",
            C2 => "C2",
            C3 => "C3",
            D1 => "D1",
            D2 => "D2",
            D3 => "D3",
            E1 => "E1",
            E2 => "E2",
            E3 => "E3",
            E4 => "E4",
            F1 => "F1",
            F2l => "F2l",
            F2r => "F2r",
            F3 => "F3",
            F4 => "F4",
            F5 => "F5",
            F6 => "F6",
            F7 => "F7",
            F8 => "F8",
        }
    }

    /// Whether this is one of the structural laws of symmetric monoidal
    /// categories.
    pub fn is_structural(self) -> bool {
        use AxiomId::*;
        matches!(self, SeqAssoc | ParAssoc | Interchange | SeqUnit | ParUnit | SymNat | SymInv)
    }

    /// Whether this is a conditioning axiom, sound only up to a global
    /// scalar factor.
    pub fn is_conditioning(self) -> bool {
        use AxiomId::*;
        matches!(self, F1 | F2l | F2r | F3 | F4 | F5 | F6 | F7 | F8)
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Derived rules: theorems of the equational theory that the checker accepts
/// as single steps.  Each is validated semantically by the soundness harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LemmaId {
    /// Conditioning two independent coins: `(flip p ⊗ flip q) ; cond = flip r`.
    Mult,
    /// The single-output form of E2.
    DerivedE5,
    /// Causal circuits are discardable: `c ; del_n = del_m`.
    Delete,
    /// Boolean circuits are copyable: `b ; copy_n = copy_m ; (b ⊗ b)`.
    CopyBoolean,
    /// Any two circuits that fail everywhere are equal.
    Failure,
}

impl LemmaId {
    /// Every lemma, in catalog order.
    pub const ALL: [LemmaId; 5] = [
        LemmaId::Mult,
        LemmaId::DerivedE5,
        LemmaId::Delete,
        LemmaId::CopyBoolean,
        LemmaId::Failure,
    ];

    /// The catalog name of the lemma.
    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Mult => "Mult",
            LemmaId::DerivedE5 => "DerivedE5",
            LemmaId::Delete => "Delete",
            LemmaId::CopyBoolean => "CopyBoolean",
            LemmaId::Failure => "Failure",
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rule usable in a rewrite step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Axiom(AxiomId),
    Lemma(LemmaId),
}

impl Rule {
    /// Every rule: all axioms followed by all lemmas.
    pub fn all() -> Vec<Rule> {
        AxiomId::ALL
            .iter()
            .map(|&a| Rule::Axiom(a))
            .chain(LemmaId::ALL.iter().map(|&l| Rule::Lemma(l)))
            .collect()
    }

    /// The catalog name of the rule.
    pub fn name(self) -> &'static str {
        match self {
            Rule::Axiom(a) => a.name(),
            Rule::Lemma(l) => l.name(),
        }
    }

    /// Whether soundness is judged up to a global scalar (conditioning rules)
    /// rather than by exact matrix equality.
    pub fn is_projective(self) -> bool {
        match self {
            Rule::Axiom(a) => a.is_conditioning(),
            Rule::Lemma(l) => matches!(l, LemmaId::Mult | LemmaId::Failure),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rule> {
        let all = Rule::all();
        // Accept `A2` as shorthand is deliberately *not* supported: the two
        // unit laws are different equations and a derivation must say which.
        all.iter()
            .copied()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::NotApplicable(format!("unknown rule `{s}`")))
    }
}

impl From<AxiomId> for Rule {
    fn from(a: AxiomId) -> Rule {
        Rule::Axiom(a)
    }
}

impl From<LemmaId> for Rule {
    fn from(l: LemmaId) -> Rule {
        Rule::Lemma(l)
    }
}

/// Orientation of a rewrite step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

impl Direction {
    /// The short name used in derivation files.
    pub fn name(self) -> &'static str {
        match self {
            Direction::LeftToRight => "LR",
            Direction::RightToLeft => "RL",
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Direction> {
        match s {
            "LR" | "lr" | "->" => Ok(Direction::LeftToRight),
            "RL" | "rl" | "<-" => Ok(Direction::RightToLeft),
            other => Err(Error::Json(format!("unknown direction `{other}` (expected LR or RL)"))),
        }
    }
}

/// One located application of a rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RewriteStep {
    pub rule: Rule,
    pub direction: Direction,
    /// Child selectors (0 = left/top, 1 = right/bottom) into the flattened
    /// term.
    pub path: Vec<usize>,
    pub params: Params,
}

impl RewriteStep {
    /// A step with no parameters.
    pub fn new(rule: impl Into<Rule>, direction: Direction, path: Vec<usize>) -> RewriteStep {
        RewriteStep {
            rule: rule.into(),
            direction,
            path,
            params: Params::new(),
        }
    }

    /// Adds a parameter binding.
    pub fn with_param(mut self, name: &str, value: Rat) -> RewriteStep {
        self.params.insert(name.to_string(), value);
        self
    }
}

impl fmt::Display for RewriteStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} at {:?}", self.rule, self.direction.name(), self.path)?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={}", fmt_rat(v))).collect();
            write!(f, " with {}", ps.join(", "))?;
        }
        Ok(())
    }
}

/// Reads a required parameter.
pub(crate) fn param(params: &Params, name: &str) -> Result<Rat> {
    params.get(name).cloned().ok_or_else(|| Error::MissingParam(name.to_string()))
}

/// Reads an optional non-negative integer parameter.
pub(crate) fn index_param(params: &Params, name: &str) -> Result<Option<usize>> {
    match params.get(name) {
        None => Ok(None),
        Some(v) if v.is_integer() && *v.numer() >= 0.into() => v
            .to_integer()
            .try_into()
            .map(Some)
            .map_err(|_| Error::NotApplicable(format!("parameter `{name}` is too large"))),
        Some(v) => Err(Error::NotApplicable(format!(
            "parameter `{name}` must be a non-negative integer, got {}",
            fmt_rat(v)
        ))),
    }
}
