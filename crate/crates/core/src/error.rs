//! The crate-wide error type.

use thiserror::Error;

use crate::circuit::CircType;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building, evaluating, translating or
/// rewriting circuits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A sequential composition joins incompatible interfaces.  `path` is the
    /// child-selector path (0 = left/top, 1 = right/bottom) of the offending
    /// `seq` node from the root of the term being checked.
    #[error("type mismatch at path {path:?}: cannot compose {left} with {right}")]
    TypeMismatch {
        path: Vec<usize>,
        left: CircType,
        right: CircType,
    },

    /// A flip parameter outside `[0, 1]`.
    #[error("flip parameter {0} is not a probability")]
    BadProbability(String),

    /// Evaluation would exceed the configured size bound.
    #[error("size cap exceeded: {what} needs {needed} cells, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    /// Malformed textual input (circuit text, programs, derivation files).
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    /// A surface-language variable that is not in scope.
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    /// A call to an unknown function, or a call with the wrong argument type.
    #[error("arity error: {0}")]
    Arity(String),

    /// A surface-language typing failure.
    #[error("type error: {0}")]
    SurfaceType(String),

    /// Matrix operations on incompatible shapes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An operation that needs a Boolean circuit received something else.
    #[error("circuit is not Boolean")]
    NotBoolean,

    /// A wire index outside the circuit's interface.
    #[error("wire {wire} out of range for {width} wires")]
    BadWire { wire: usize, width: usize },

    /// Disintegration of a matrix that has input wires or no output wire.
    #[error("not a joint distribution: {0}")]
    NotAJoint(String),

    /// An operation requiring a stochastic matrix received a non-stochastic one.
    #[error("matrix is not stochastic")]
    NotStochastic,

    /// An operation requiring a conditioning-free circuit found `cond`.
    #[error("circuit contains conditioning")]
    HasConditioning,

    /// Bayesian inversion of a non-causal circuit.
    #[error("circuit is not causal: {0}")]
    NotCausal(String),

    /// An axiom parameter violates the axiom's side condition.
    #[error("side condition violated: {0}")]
    SideConditionViolated(String),

    /// An axiom or lemma needs a parameter the step did not provide.
    #[error("missing parameter `{0}`")]
    MissingParam(String),

    /// A rewrite path that does not address a subterm.
    #[error("bad path {0:?}")]
    BadPath(Vec<usize>),

    /// The addressed subterm does not match the rule's source side.
    #[error("pattern mismatch: expected {expected}, found {found}")]
    PatternMismatch { expected: String, found: String },

    /// A rule that cannot be used in the requested way.
    #[error("rule not applicable: {0}")]
    NotApplicable(String),

    /// Two circuits of different types were compared.
    #[error("type mismatch: {0} versus {1}")]
    Incomparable(CircType, CircType),

    /// Two independent decision routes disagreed (an internal consistency
    /// check failed).
    #[error("inconsistent results: {0}")]
    Inconsistent(String),

    /// Malformed JSON input.
    #[error("invalid JSON: {0}")]
    Json(String),
}
