//! Bit-vectors over an ordered bundle of wires.

use std::fmt;

use smallvec::SmallVec;

/// The values carried by a bundle of wires, top wire first.
///
/// As an index, the top wire is the most significant bit: the bundle
/// `(1, 0)` has index `2`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits(SmallVec<[bool; 32]>);

impl Bits {
    /// The empty bundle.
    pub fn empty() -> Bits {
        Bits(SmallVec::new())
    }

    /// The `width`-bit vector whose binary value is `index`.
    pub fn from_index(index: usize, width: usize) -> Bits {
        Bits((0..width).map(|i| (index >> (width - 1 - i)) & 1 == 1).collect())
    }

    /// Builds a bundle from explicit wire values.
    pub fn from_bools(bits: &[bool]) -> Bits {
        Bits(bits.iter().copied().collect())
    }

    /// Binary value with the top wire as most significant bit.  Only meaningful
    /// for widths below the pointer size.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn insert(&mut self, i: usize, v: bool) {
        self.0.insert(i, v);
    }

    pub fn remove(&mut self, i: usize) -> bool {
        self.0.remove(i)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.0.extend(other.0.iter().copied());
        out
    }

    /// The sub-bundle `[from, to)`.
    pub fn slice(&self, from: usize, to: usize) -> Bits {
        Bits(self.0[from..to].iter().copied().collect())
    }
}

impl fmt::Display for Bits {
    /// Writes the bundle as a string of `0`/`1`, top wire first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}⟩")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first() {
        let b = Bits::from_index(2, 2);
        assert_eq!(b.as_slice(), &[true, false]);
        assert_eq!(b.index(), 2);
        assert_eq!(b.to_string(), "10");
        for i in 0..16 {
            assert_eq!(Bits::from_index(i, 4).index(), i);
        }
        assert_eq!(Bits::empty().index(), 0);
    }
}
