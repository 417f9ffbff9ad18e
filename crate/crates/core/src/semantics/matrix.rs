//! Exact substochastic matrices and their proportionality classes.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::circuit::CircType;
use crate::error::{Error, Result};
use crate::rat::{fmt_rat, rat_from_json, rat_json, Rat};

/// The semantics of an `m -> n` circuit: a `2^n × 2^m` matrix whose entry
/// `(y, x)` is the weight of output `y` on input `x`.  Indices read the top
/// wire as the most significant bit.  Entries are stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubStochMatrix {
    inputs: usize,
    outputs: usize,
    entries: Vec<Rat>,
}

impl SubStochMatrix {
    /// Builds a matrix from row-major entries; fails on a wrong entry count or
    /// a negative entry.
    pub fn from_entries(inputs: usize, outputs: usize, entries: Vec<Rat>) -> Result<Self> {
        let want = 1usize
            .checked_shl((inputs + outputs) as u32)
            .filter(|_| inputs + outputs < usize::BITS as usize)
            .ok_or_else(|| Error::DimensionMismatch(format!("{inputs}->{outputs} matrix is too large")))?;
        if entries.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "{inputs}->{outputs} matrix needs {want} entries, got {}",
                entries.len()
            )));
        }
        if entries.iter().any(Signed::is_negative) {
            return Err(Error::DimensionMismatch("negative matrix entry".into()));
        }
        Ok(SubStochMatrix {
            inputs,
            outputs,
            entries,
        })
    }

    /// Builds a matrix from a function of `(y, x)`.
    pub fn from_fn(inputs: usize, outputs: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Result<Self> {
        let cols = 1usize << inputs;
        let entries = (0..(cols << outputs)).map(|i| f(i / cols, i % cols)).collect();
        Self::from_entries(inputs, outputs, entries)
    }

    /// The all-zero `m -> n` matrix.
    pub fn zero(inputs: usize, outputs: usize) -> Self {
        SubStochMatrix {
            inputs,
            outputs,
            entries: vec![Rat::zero(); 1 << (inputs + outputs)],
        }
    }

    /// The identity on `n` wires.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |y, x| if x == y { Rat::one() } else { Rat::zero() }).expect("square")
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn ty(&self) -> CircType {
        CircType::new(self.inputs, self.outputs)
    }

    /// Number of columns, `2^m`.
    pub fn cols(&self) -> usize {
        1 << self.inputs
    }

    /// Number of rows, `2^n`.
    pub fn rows(&self) -> usize {
        1 << self.outputs
    }

    /// Entry `(y, x)`.
    pub fn entry(&self, y: usize, x: usize) -> &Rat {
        &self.entries[y * self.cols() + x]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    /// Column `x`, indexed by output.
    pub fn column(&self, x: usize) -> Vec<Rat> {
        (0..self.rows()).map(|y| self.entry(y, x).clone()).collect()
    }

    pub fn column_sum(&self, x: usize) -> Rat {
        (0..self.rows()).map(|y| self.entry(y, x)).sum()
    }

    /// Sum of all entries.
    pub fn total(&self) -> Rat {
        self.entries.iter().sum()
    }

    /// Multiplies every entry by `factor`.
    pub fn scale(&self, factor: &Rat) -> Self {
        SubStochMatrix {
            inputs: self.inputs,
            outputs: self.outputs,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    /// Sequential composition in diagrammatic order: first `self`, then
    /// `next` (the matrix product `next · self`).
    pub fn compose(&self, next: &Self) -> Result<Self> {
        if self.outputs != next.inputs {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {} with {}",
                self.ty(),
                next.ty()
            )));
        }
        let mid = self.rows();
        Self::from_fn(self.inputs, next.outputs, |y, x| {
            (0..mid)
                .filter(|&k| !self.entry(k, x).is_zero())
                .map(|k| next.entry(y, k) * self.entry(k, x))
                .sum()
        })
    }

    /// Parallel composition (Kronecker product), `self` on the top wires.
    pub fn tensor(&self, bottom: &Self) -> Self {
        let (bc, br) = (bottom.cols(), bottom.rows());
        Self::from_fn(self.inputs + bottom.inputs, self.outputs + bottom.outputs, |y, x| {
            self.entry(y / br, x / bc) * bottom.entry(y % br, x % bc)
        })
        .expect("tensor of valid matrices")
    }

    /// Every column sums to at most one.
    pub fn is_substochastic(&self) -> bool {
        (0..self.cols()).all(|x| self.column_sum(x) <= Rat::one())
    }

    /// Every column sums to exactly one.
    pub fn is_stochastic(&self) -> bool {
        (0..self.cols()).all(|x| self.column_sum(x).is_one())
    }

    /// Stochastic with every column a basis vector.
    pub fn is_deterministic(&self) -> bool {
        self.is_stochastic() && self.entries.iter().all(|e| e.is_zero() || e.is_one())
    }

    /// The class of `self` up to a positive global factor: `Bottom` for the
    /// zero matrix, otherwise the matrix divided by the sum of all entries.
    pub fn canonical_class(&self) -> ProjClass {
        let total = self.total();
        if total.is_zero() {
            ProjClass::Bottom {
                inputs: self.inputs,
                outputs: self.outputs,
            }
        } else {
            ProjClass::Canonical(self.scale(&total.recip()))
        }
    }

    /// Equality up to a positive global factor.
    pub fn prop_equal(&self, other: &Self) -> Result<bool> {
        if self.ty() != other.ty() {
            return Err(Error::DimensionMismatch(format!("{} versus {}", self.ty(), other.ty())));
        }
        Ok(self.canonical_class() == other.canonical_class())
    }

    /// For a `0 -> k + l` matrix, the marginal on the first `keep` wires.
    pub fn marginalize(&self, keep: usize) -> Result<Self> {
        if self.inputs != 0 {
            return Err(Error::DimensionMismatch(format!(
                "marginalization needs a 0->n matrix, got {}",
                self.ty()
            )));
        }
        if keep > self.outputs {
            return Err(Error::DimensionMismatch(format!(
                "cannot keep {keep} of {} wires",
                self.outputs
            )));
        }
        let drop = self.outputs - keep;
        let mut entries = vec![Rat::zero(); 1 << keep];
        for (y, e) in self.entries.iter().enumerate() {
            entries[y >> drop] += e;
        }
        Self::from_entries(0, keep, entries)
    }

    /// JSON export `{ "in", "out", "entries" }` with row-major `[num, den]`
    /// entries.
    pub fn to_json(&self) -> Value {
        json!({
            "in": self.inputs,
            "out": self.outputs,
            "entries": self.entries.iter().map(rat_json).collect::<Vec<_>>(),
        })
    }

    /// Inverse of [`SubStochMatrix::to_json`].
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::Json(msg.to_string());
        let m = v.get("in").and_then(Value::as_u64).ok_or_else(|| bad("missing `in`"))? as usize;
        let n = v.get("out").and_then(Value::as_u64).ok_or_else(|| bad("missing `out`"))? as usize;
        let entries = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing `entries`"))?
            .iter()
            .map(|e| rat_from_json(e).ok_or_else(|| bad("malformed rational entry")))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(m, n, entries)
    }
}

impl fmt::Debug for SubStochMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubStochMatrix({}) ", self.ty())?;
        f.debug_list()
            .entries((0..self.rows()).map(|y| (0..self.cols()).map(|x| fmt_rat(self.entry(y, x))).collect::<Vec<_>>()))
            .finish()
    }
}

impl fmt::Display for SubStochMatrix {
    /// A human-readable table: one row per output bit-vector, one column per
    /// input bit-vector.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use super::Bits;
        let cells: Vec<Vec<String>> = (0..self.rows())
            .map(|y| (0..self.cols()).map(|x| fmt_rat(self.entry(y, x))).collect())
            .collect();
        let width = cells
            .iter()
            .flatten()
            .map(String::len)
            .chain(std::iter::once(self.inputs.max(1)))
            .max()
            .unwrap_or(1);
        let label = self.outputs.max(1);
        write!(f, "{:label$} |", "y\\x")?;
        for x in 0..self.cols() {
            write!(f, " {:>width$}", Bits::from_index(x, self.inputs).to_string())?;
        }
        writeln!(f)?;
        for (y, row) in cells.iter().enumerate() {
            write!(f, "{:label$} |", Bits::from_index(y, self.outputs).to_string())?;
            for c in row {
                write!(f, " {c:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A substochastic map up to a positive global factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProjClass {
    /// The normalized representative: all entries sum to one.
    Canonical(SubStochMatrix),
    /// The class of the zero map.
    Bottom { inputs: usize, outputs: usize },
}

impl ProjClass {
    pub fn ty(&self) -> CircType {
        match self {
            ProjClass::Canonical(m) => m.ty(),
            ProjClass::Bottom { inputs, outputs } => CircType::new(*inputs, *outputs),
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, ProjClass::Bottom { .. })
    }

    /// JSON export: the matrix export plus `"class": "canonical" | "bottom"`.
    pub fn to_json(&self) -> Value {
        match self {
            ProjClass::Canonical(m) => {
                let mut v = json!({ "class": "canonical" });
                if let (Value::Object(o), Value::Object(mo)) = (&mut v, m.to_json()) {
                    o.extend(mo);
                }
                v
            }
            ProjClass::Bottom { inputs, outputs } => json!({
                "class": "bottom",
                "in": inputs,
                "out": outputs,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn identity_class() {
        let class = SubStochMatrix::identity(1).canonical_class();
        let want = SubStochMatrix::from_entries(1, 1, vec![rat(1, 2), int(0), int(0), rat(1, 2)]).unwrap();
        assert_eq!(class, ProjClass::Canonical(want));
    }

    #[test]
    fn scale_invariance() {
        let m = SubStochMatrix::from_entries(1, 1, vec![rat(1, 3), rat(1, 5), rat(1, 7), int(0)]).unwrap();
        assert!(m.prop_equal(&m.scale(&int(3))).unwrap());
        assert!(!m.prop_equal(&SubStochMatrix::identity(1)).unwrap());
    }

    #[test]
    fn marginal_of_correlated_pair() {
        let p = rat(1, 3);
        let joint = SubStochMatrix::from_entries(0, 2, vec![int(1) - &p, int(0), int(0), p.clone()]).unwrap();
        let marg = joint.marginalize(1).unwrap();
        assert_eq!(marg.entries(), &[int(1) - &p, p]);
        assert_eq!(joint.marginalize(0).unwrap().entries(), &[int(1)]);
    }

    #[test]
    fn tensor_bit_order() {
        // |1> ⊗ |0> is index 2.
        let one = SubStochMatrix::from_entries(0, 1, vec![int(0), int(1)]).unwrap();
        let zero = SubStochMatrix::from_entries(0, 1, vec![int(1), int(0)]).unwrap();
        let t = one.tensor(&zero);
        assert_eq!(t.entry(2, 0), &int(1));
    }

    #[test]
    fn json_round_trip() {
        let m = SubStochMatrix::from_entries(1, 1, vec![rat(1, 3), rat(1, 5), rat(2, 3), int(0)]).unwrap();
        assert_eq!(SubStochMatrix::from_json(&m.to_json()).unwrap(), m);
        let c = m.canonical_class().to_json();
        assert_eq!(c["class"], "canonical");
    }
}
