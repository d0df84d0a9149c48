//! Binary compositions, index words and constant-composition sequences.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompositionError {
    #[error("composition must contain at least one symbol")]
    Empty,
    #[error("index value needs {needed} bits but the word has only {k}")]
    IndexTooWide { needed: u64, k: usize },
    #[error("symbol {0} is not binary")]
    NonBinarySymbol(u8),
}

/// Symbol counts `[n0, n1]` shared by every sequence of a constant-composition codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Composition {
    n0: u32,
    n1: u32,
}

impl Composition {
    pub fn new(n0: u32, n1: u32) -> Result<Self, CompositionError> {
        if n0 as u64 + n1 as u64 == 0 {
            return Err(CompositionError::Empty);
        }
        Ok(Self { n0, n1 })
    }

    pub fn zeros(&self) -> u32 {
        self.n0
    }

    pub fn ones(&self) -> u32 {
        self.n1
    }

    /// Sequence length `N = n0 + n1`.
    pub fn len(&self) -> u32 {
        self.n0 + self.n1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Every composition with `1 <= N <= max_len`, ordered by length then by `n1`.
    pub fn all_up_to(max_len: u32) -> impl Iterator<Item = Composition> {
        (1..=max_len).flat_map(|n| (0..=n).map(move |n1| Composition { n0: n - n1, n1 }))
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.n0, self.n1)
    }
}

/// A `k`-bit data word `v1 v2 ... vk`, `v1` most significant.
///
/// The integer value is `V = sum v_i 2^(k-i)` and the dyadic value is `d(v) = V 2^-k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexWord {
    k: usize,
    value: BigUint,
}

impl IndexWord {
    pub fn new(value: BigUint, k: usize) -> Result<Self, CompositionError> {
        if value.bits() > k as u64 {
            return Err(CompositionError::IndexTooWide {
                needed: value.bits(),
                k,
            });
        }
        Ok(Self { k, value })
    }

    pub fn from_u64(value: u64, k: usize) -> Result<Self, CompositionError> {
        Self::new(BigUint::from(value), k)
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut value = BigUint::zero();
        for &b in bits {
            value <<= 1u32;
            if b {
                value += 1u32;
            }
        }
        Self {
            k: bits.len(),
            value,
        }
    }

    pub fn zero(k: usize) -> Self {
        Self {
            k,
            value: BigUint::zero(),
        }
    }

    /// The largest word, `2^k - 1`.
    pub fn max(k: usize) -> Self {
        Self {
            k,
            value: (BigUint::one() << k) - 1u32,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// Bit `i` counted from the most significant end, `0 <= i < k`.
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.k);
        self.value.bit((self.k - 1 - i) as u64)
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.k).map(|i| self.bit(i)).collect()
    }
}

impl fmt::Display for IndexWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A binary symbol sequence `x1 ... xN`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CcSequence {
    symbols: Vec<u8>,
}

impl CcSequence {
    pub fn new(symbols: Vec<u8>) -> Result<Self, CompositionError> {
        if let Some(&bad) = symbols.iter().find(|&&s| s > 1) {
            return Err(CompositionError::NonBinarySymbol(bad));
        }
        Ok(Self { symbols })
    }

    pub(crate) fn from_raw(symbols: Vec<u8>) -> Self {
        Self { symbols }
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Counted composition, `None` for the empty sequence.
    pub fn composition(&self) -> Option<Composition> {
        let ones = self.symbols.iter().filter(|&&s| s == 1).count() as u32;
        Composition::new(self.symbols.len() as u32 - ones, ones).ok()
    }

    pub fn has_composition(&self, comp: &Composition) -> bool {
        self.composition() == Some(*comp)
    }
}

impl fmt::Display for CcSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            f.write_str(if s == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// All sequences with composition `comp`, in lexicographic order. Exponential in `N`.
pub fn enumerate_sequences(comp: &Composition) -> Vec<CcSequence> {
    fn fill(prefix: &mut Vec<u8>, n0: u32, n1: u32, out: &mut Vec<CcSequence>) {
        if n0 == 0 && n1 == 0 {
            out.push(CcSequence::from_raw(prefix.clone()));
            return;
        }
        for (sym, left) in [(0u8, n0), (1u8, n1)] {
            if left > 0 {
                prefix.push(sym);
                let (a, b) = if sym == 0 { (n0 - 1, n1) } else { (n0, n1 - 1) };
                fill(prefix, a, b, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    fill(
        &mut Vec::with_capacity(comp.len() as usize),
        comp.zeros(),
        comp.ones(),
        &mut out,
    );
    out
}
