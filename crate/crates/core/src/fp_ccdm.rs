//! Full-precision arithmetic-coding CCDM over exact rationals.
//!
//! The residual index `I_n` and the width `w_n` are kept as integers over a shared
//! denominator `D_n = 2^k N (N-1) ... (N-n+1)`. Each step multiplies through by the
//! remaining length instead of dividing, so no fraction is ever reduced mid-block.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::composition::{CcSequence, Composition, IndexWord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FpError {
    #[error("index has {got} bits but composition {comp} needs exactly k_max = {expected}")]
    IndexLength {
        got: usize,
        expected: usize,
        comp: Composition,
    },
    #[error("sequence does not have composition {0}")]
    WrongComposition(Composition),
    #[error("the interval of {0} contains no {1}-bit index")]
    NotInImage(CcSequence, usize),
}

/// `|C_cc| = binom(N, n1)`.
pub fn cc_count(comp: &Composition) -> BigUint {
    let n = comp.len() as u64;
    let r = comp.ones().min(comp.zeros()) as u64;
    let mut acc = BigUint::one();
    for i in 0..r {
        // Exact at every step: the running value is binom(n - r + i + 1, i + 1).
        acc *= n - r + i + 1;
        acc /= i + 1;
    }
    acc
}

/// `floor(log2 |C_cc|)`, the full-precision index length.
pub fn k_max(comp: &Composition) -> usize {
    cc_count(comp).bits() as usize - 1
}

/// Un-floored `log2 |C_cc|`.
pub fn log2_cc_count(comp: &Composition) -> f64 {
    log2_big(&cc_count(comp))
}

pub(crate) fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap();
    (top as f64).log2() + shift as f64
}

/// Bit-length statistics of one full-precision matching pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecisionTrace {
    /// Largest working integer (residual, width or denominator) after each step.
    pub per_step: Vec<u64>,
    pub max_bits: u64,
    /// Bits of the final width's denominator in lowest terms, `bits(|C_cc|)`.
    pub reduced_width_bits: u64,
}

pub fn fp_match(v: &IndexWord, comp: &Composition) -> Result<CcSequence, FpError> {
    fp_match_traced(v, comp).map(|(x, _)| x)
}

/// Matching with per-step precision measurement.
pub fn fp_match_traced(
    v: &IndexWord,
    comp: &Composition,
) -> Result<(CcSequence, PrecisionTrace), FpError> {
    let k = k_max(comp);
    if v.k() != k {
        return Err(FpError::IndexLength {
            got: v.k(),
            expected: k,
            comp: *comp,
        });
    }
    let total = comp.len();
    let (mut n0, mut n1) = (comp.zeros(), comp.ones());
    let mut residual = v.value().clone();
    let mut width = BigUint::one() << k;
    let mut denom = width.clone();
    let mut symbols = Vec::with_capacity(total as usize);
    let mut per_step = Vec::with_capacity(total as usize);

    for n in 0..total {
        let remaining = total - n;
        // I_n >= w_n n0 / (N - n), cleared of the denominator.
        let scaled = &residual * remaining;
        let threshold = &width * n0;
        if scaled >= threshold {
            symbols.push(1);
            residual = scaled - threshold;
            width *= n1;
            n1 -= 1;
        } else {
            symbols.push(0);
            residual = scaled;
            width *= n0;
            n0 -= 1;
        }
        denom *= remaining;
        per_step.push(residual.bits().max(width.bits()).max(denom.bits()));
    }

    let reduced = &denom / width.gcd(&denom);
    let trace = PrecisionTrace {
        max_bits: per_step.iter().copied().max().unwrap_or(0),
        per_step,
        reduced_width_bits: reduced.bits(),
    };
    Ok((CcSequence::from_raw(symbols), trace))
}

/// Unreduced `(base numerator, width numerator, denominator)` of the interval of `x`.
fn interval_parts(
    x: &CcSequence,
    comp: &Composition,
) -> Result<(BigUint, BigUint, BigUint), FpError> {
    if !x.has_composition(comp) {
        return Err(FpError::WrongComposition(*comp));
    }
    let total = comp.len();
    let (mut n0, mut n1) = (comp.zeros(), comp.ones());
    let mut base = BigUint::zero();
    let mut width = BigUint::one();
    let mut denom = BigUint::one();
    for (n, &sym) in x.symbols().iter().enumerate() {
        let remaining = total - n as u32;
        base *= remaining;
        if sym == 1 {
            base += &width * n0;
            width *= n1;
            n1 -= 1;
        } else {
            width *= n0;
            n0 -= 1;
        }
        denom *= remaining;
    }
    Ok((base, width, denom))
}

/// `[b_N, b_N + w_N)` as exact reduced rationals `(base, width)`.
pub fn fp_interval(
    x: &CcSequence,
    comp: &Composition,
) -> Result<(BigRational, BigRational), FpError> {
    let (base, width, denom) = interval_parts(x, comp)?;
    let denom = num_bigint::BigInt::from(denom);
    Ok((
        BigRational::new(base.into(), denom.clone()),
        BigRational::new(width.into(), denom),
    ))
}

/// Returns the unique `k_max`-bit index whose dyadic point lies in the interval of `x`.
pub fn fp_dematch(x: &CcSequence, comp: &Composition) -> Result<IndexWord, FpError> {
    let k = k_max(comp);
    let (base, width, denom) = interval_parts(x, comp)?;
    // V = ceil(b_N 2^k), then check V 2^-k < b_N + w_N.
    let scaled_base = base.clone() << k;
    let v = scaled_base.div_ceil(&denom);
    let fits = (&v * &denom) < ((base + width) << k);
    if !fits || v.bits() as usize > k {
        return Err(FpError::NotInImage(x.clone(), k));
    }
    Ok(IndexWord::new(v, k).expect("index below 2^k"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn comp(n0: u32, n1: u32) -> Composition {
        Composition::new(n0, n1).unwrap()
    }

    fn seq(bits: &[u8]) -> CcSequence {
        CcSequence::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(cc_count(&comp(3, 2)), BigUint::from(10u32));
        assert_eq!(cc_count(&comp(5, 0)), BigUint::one());
        assert_eq!(k_max(&comp(3, 2)), 3);
        assert_eq!(k_max(&comp(7, 0)), 0);
    }

    #[test]
    fn large_count_against_stirling() {
        let c = comp(768, 256);
        let exact = log2_cc_count(&c);
        // log2 binom(N, K) ~ N H(K/N) - 0.5 log2(2 pi N p (1-p))
        let (n, p) = (1024.0f64, 0.25f64);
        let h = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
        let stirling = n * h - 0.5 * (2.0 * std::f64::consts::PI * n * p * (1.0 - p)).log2();
        assert!((exact - stirling).abs() < 0.01, "{exact} vs {stirling}");
        assert!((exact - 825.6).abs() < 0.1);
        assert_eq!(k_max(&c), 825);
    }

    #[test]
    fn worked_example() {
        let c = comp(3, 2);
        let v = IndexWord::from_bits(&[true, true, false]);
        let x = fp_match(&v, &c).unwrap();
        assert_eq!(x, seq(&[1, 0, 0, 1, 0]));
        assert_eq!(fp_dematch(&x, &c).unwrap(), v);
    }

    #[test]
    fn zero_index_maps_to_first_interval() {
        let c = comp(3, 2);
        let x = fp_match(&IndexWord::zero(3), &c).unwrap();
        assert_eq!(x, seq(&[0, 0, 0, 1, 1]));
        assert_eq!(fp_dematch(&x, &c).unwrap(), IndexWord::zero(3));
    }

    #[test]
    fn unused_intervals() {
        let c = comp(3, 2);
        let images: Vec<_> = (0..8)
            .map(|v| fp_match(&IndexWord::from_u64(v, 3).unwrap(), &c).unwrap())
            .collect();
        for bits in [[0, 1, 0, 1, 0], [1, 1, 0, 0, 0]] {
            let x = seq(&bits);
            assert!(!images.contains(&x));
            assert!(matches!(fp_dematch(&x, &c), Err(FpError::NotInImage(..))));
        }
        let (base, width) = fp_interval(&seq(&[0, 1, 0, 1, 0]), &c).unwrap();
        let tenth = |n: i64| BigRational::new(BigInt::from(n), BigInt::from(10));
        assert_eq!((base.clone(), base + width), (tenth(4), tenth(5)));
        let (base, width) = fp_interval(&seq(&[1, 1, 0, 0, 0]), &c).unwrap();
        assert_eq!((base.clone(), base + width), (tenth(9), tenth(10)));
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = comp(3, 2);
        assert!(matches!(
            fp_match(&IndexWord::zero(4), &c),
            Err(FpError::IndexLength {
                got: 4,
                expected: 3,
                ..
            })
        ));
        assert_eq!(
            fp_dematch(&seq(&[1, 1, 1, 0, 0, 0]), &c),
            Err(FpError::WrongComposition(c))
        );
    }

    #[test]
    fn degenerate_composition() {
        let c = comp(0, 4);
        let x = fp_match(&IndexWord::zero(0), &c).unwrap();
        assert_eq!(x, seq(&[1, 1, 1, 1]));
        assert_eq!(fp_dematch(&x, &c).unwrap(), IndexWord::zero(0));
    }

    #[test]
    fn precision_of_small_block() {
        let (_, trace) = fp_match_traced(&IndexWord::from_u64(6, 3).unwrap(), &comp(3, 2)).unwrap();
        assert_eq!(trace.per_step.len(), 5);
        // Width denominator in lowest terms is |C_cc| = 10; 5! = 120 bounds it at 7 bits.
        assert_eq!(trace.reduced_width_bits, 4);
        assert!(trace.reduced_width_bits <= 7);
        // 2^3 * 5! = 960
        assert_eq!(trace.max_bits, 10);
    }
}
