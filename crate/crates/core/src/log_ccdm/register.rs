//! Residual-index registers.
//!
//! Positions are addressed by `lsb`: a register at `lsb = L` holds
//! `floor(I * 2^L)`, so a threshold `f 2^-d` with `d <= L` becomes the integer
//! `f << (L - d)`. Thresholds carry no bits below their own `2^-d`, so comparison
//! and subtraction never need anything finer than the deepest threshold seen.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::tables::DyadicValue;

/// The placed index `I_0 = P 2^-q`, where `P` is streamed as exactly `len` bits MSB first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Placement {
    pub source: BigUint,
    pub len: u64,
    pub q: i64,
}

fn bit_len(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// `I` held as an exact dyadic `num 2^-scale`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRegister {
    num: BigUint,
    scale: i64,
}

impl ExactRegister {
    pub(crate) fn new(p: &Placement) -> Self {
        Self {
            num: p.source.clone(),
            scale: p.q,
        }
    }

    /// `(numerator, scale)` with value `numerator 2^-scale`.
    pub fn value(&self) -> (&BigUint, i64) {
        (&self.num, self.scale)
    }

    pub fn to_f64(&self) -> f64 {
        self.num.to_f64().unwrap_or(f64::INFINITY) * (-(self.scale as f64)).exp2()
    }

    fn at_least(&self, t: DyadicValue) -> bool {
        let m = BigUint::from(t.mantissa);
        if t.exponent >= self.scale {
            (&self.num << (t.exponent - self.scale) as usize) >= m
        } else {
            self.num >= m << (self.scale - t.exponent) as usize
        }
    }

    fn subtract(&mut self, t: DyadicValue) {
        if t.exponent > self.scale {
            self.num <<= (t.exponent - self.scale) as usize;
            self.scale = t.exponent;
        }
        self.num -= BigUint::from(t.mantissa) << (self.scale - t.exponent) as usize;
    }

    fn floor_at(&self, lsb: i64) -> BigUint {
        if lsb >= self.scale {
            &self.num << (lsb - self.scale) as usize
        } else {
            &self.num >> (self.scale - lsb) as usize
        }
    }
}

/// Bounded shift register over the significant bits of `I`.
///
/// Index bits are pulled in MSB first as deeper thresholds arrive; past the end of
/// the index the stream supplies zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowRegister {
    window: u64,
    lsb: i64,
    width: u32,
    source: BigUint,
    source_len: u64,
    /// Stream bits consumed so far; negative while `2^-lsb` is still above the index's MSB.
    consumed: i64,
    watermark: u32,
}

/// The window would need more than `width` bits at the given span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow {
    pub span: u32,
}

impl WindowRegister {
    pub(crate) fn new(p: &Placement, start_lsb: i64, width: u32) -> Result<Self, Overflow> {
        let mut reg = Self {
            window: 0,
            lsb: start_lsb,
            width,
            source: p.source.clone(),
            source_len: p.len,
            consumed: p.len as i64 - p.q + start_lsb,
            watermark: 0,
        };
        // Bits above start_lsb, all at once.
        let upto = reg.consumed.max(0);
        let mut window = BigUint::zero();
        for j in 0..upto {
            window = (window << 1u32) + u32::from(reg.stream_bit(j));
        }
        if window.bits() > width as u64 {
            return Err(Overflow {
                span: window.bits() as u32,
            });
        }
        reg.window = if window.is_zero() {
            0
        } else {
            window.iter_u64_digits().next().unwrap()
        };
        reg.watermark = bit_len(reg.window);
        Ok(reg)
    }

    fn stream_bit(&self, j: i64) -> bool {
        j >= 0 && (j as u64) < self.source_len && self.source.bit(self.source_len - 1 - j as u64)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Weight exponent of the window's least significant bit.
    pub fn lsb(&self) -> i64 {
        self.lsb
    }

    /// Weight exponent just above the window's most significant bit.
    pub fn top_exponent(&self) -> i64 {
        self.lsb - self.width as i64
    }

    /// Index bits pulled from the stream (zeros past the end included).
    pub fn stream_pos(&self) -> u64 {
        self.consumed.max(0) as u64
    }

    /// Largest significant span the window has held.
    pub fn span_watermark(&self) -> u32 {
        self.watermark
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    fn reach(&mut self, lsb: i64) -> Result<(), Overflow> {
        while self.lsb < lsb {
            let bit = self.stream_bit(self.consumed);
            self.consumed += 1;
            self.lsb += 1;
            let span = bit_len(self.window) + 1;
            if self.window != 0 && span > self.width {
                return Err(Overflow { span });
            }
            self.window = (self.window << 1) | bit as u64;
            self.watermark = self.watermark.max(bit_len(self.window));
        }
        Ok(())
    }

    fn threshold_int(&self, t: DyadicValue) -> Option<u64> {
        let shift = self.lsb - t.exponent;
        debug_assert!(shift >= 0);
        let v = (t.mantissa as u64).checked_shl(shift as u32)?;
        (v >> shift == t.mantissa as u64).then_some(v)
    }

    fn at_least(&self, t: DyadicValue) -> bool {
        if t.exponent <= self.lsb {
            match self.threshold_int(t) {
                Some(v) => self.window >= v,
                None => false,
            }
        } else {
            self.floor_at(t.exponent) >= BigUint::from(t.mantissa)
        }
    }

    fn subtract(&mut self, t: DyadicValue) {
        let v = self.threshold_int(t).expect("subtrahend inside the window");
        self.window -= v;
    }

    /// `floor(I 2^lsb)`, peeking at unconsumed stream bits when `lsb` is below the window.
    fn floor_at(&self, lsb: i64) -> BigUint {
        if lsb <= self.lsb {
            BigUint::from(self.window) >> (self.lsb - lsb) as usize
        } else {
            let mut acc = BigUint::from(self.window);
            for j in 0..(lsb - self.lsb) {
                acc = (acc << 1u32) + u32::from(self.stream_bit(self.consumed + j));
            }
            acc
        }
    }
}

/// Minuend register in either arithmetic mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntervalRegister {
    Exact(ExactRegister),
    Windowed(WindowRegister),
}

impl IntervalRegister {
    /// Makes bits down to weight `2^-lsb` addressable.
    pub(crate) fn reach(&mut self, lsb: i64) -> Result<(), Overflow> {
        match self {
            IntervalRegister::Exact(_) => Ok(()),
            IntervalRegister::Windowed(w) => w.reach(lsb),
        }
    }

    /// `I >= t`.
    pub fn at_least(&self, t: DyadicValue) -> bool {
        match self {
            IntervalRegister::Exact(r) => r.at_least(t),
            IntervalRegister::Windowed(w) => w.at_least(t),
        }
    }

    pub(crate) fn subtract(&mut self, t: DyadicValue) {
        match self {
            IntervalRegister::Exact(r) => r.subtract(t),
            IntervalRegister::Windowed(w) => w.subtract(t),
        }
    }

    /// Bit length of `floor(I 2^lsb)`: the significant span of an operation aligned at `lsb`.
    pub fn span_at(&self, lsb: i64) -> u32 {
        match self {
            IntervalRegister::Exact(r) => r.floor_at(lsb).bits() as u32,
            IntervalRegister::Windowed(w) => w.floor_at(lsb).bits() as u32,
        }
    }

    /// `floor(I 2^lsb)`.
    pub fn floor_at(&self, lsb: i64) -> BigUint {
        match self {
            IntervalRegister::Exact(r) => r.floor_at(lsb),
            IntervalRegister::Windowed(w) => w.floor_at(lsb),
        }
    }

    pub fn span_watermark(&self) -> Option<u32> {
        match self {
            IntervalRegister::Exact(_) => None,
            IntervalRegister::Windowed(w) => Some(w.span_watermark()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            IntervalRegister::Exact(r) => r.to_f64(),
            IntervalRegister::Windowed(w) => {
                let lsb = w.lsb;
                w.window as f64 * (-(lsb as f64)).exp2()
            }
        }
    }
}

/// Exact running sum `B = num 2^-scale` of dematching thresholds.
#[derive(Debug, Clone, Default)]
pub(crate) struct ExactSum {
    num: BigUint,
    scale: i64,
}

impl ExactSum {
    pub fn add(&mut self, t: DyadicValue) {
        if t.exponent > self.scale {
            self.num <<= (t.exponent - self.scale) as usize;
            self.scale = t.exponent;
        }
        self.num += BigUint::from(t.mantissa) << (self.scale - t.exponent) as usize;
    }

    pub fn into_parts(self) -> (BigUint, i64) {
        (self.num, self.scale)
    }
}

/// Bounded-window adder with carry resolution into an emitted prefix.
///
/// Bits leaving the top of the window are final except for carries. A carry flips the
/// trailing run of ones in the prefix to zeros and the zero before it to one; the run
/// length is tracked so the common case does not scan.
#[derive(Debug, Clone)]
pub(crate) struct CarryAccumulator {
    window: u64,
    lsb: i64,
    width: u32,
    emitted: Vec<bool>,
    trailing_ones: usize,
    watermark: u32,
}

/// A carry ran past the most significant emitted bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum AccumulatorError {
    CarryOut,
    Addend { span: u32 },
}

impl CarryAccumulator {
    pub fn new(start_lsb: i64, width: u32) -> Self {
        Self {
            window: 0,
            lsb: start_lsb,
            width,
            emitted: Vec::new(),
            trailing_ones: 0,
            watermark: 0,
        }
    }

    fn push(&mut self, bit: bool) {
        self.emitted.push(bit);
        self.trailing_ones = if bit { self.trailing_ones + 1 } else { 0 };
    }

    fn carry(&mut self) -> Result<(), AccumulatorError> {
        let len = self.emitted.len();
        if self.trailing_ones == len {
            return Err(AccumulatorError::CarryOut);
        }
        let zero_at = len - 1 - self.trailing_ones;
        self.emitted[zero_at] = true;
        for b in &mut self.emitted[zero_at + 1..] {
            *b = false;
        }
        self.trailing_ones = if zero_at + 1 == len {
            1 + self.emitted[..zero_at]
                .iter()
                .rev()
                .take_while(|&&b| b)
                .count()
        } else {
            0
        };
        Ok(())
    }

    pub fn add(&mut self, t: DyadicValue) -> Result<(), AccumulatorError> {
        let top = 1u64 << (self.width - 1);
        let mask = (1u64 << self.width) - 1;
        while self.lsb < t.exponent {
            self.push(self.window & top != 0);
            self.window = (self.window << 1) & mask;
            self.lsb += 1;
        }
        let shift = (self.lsb - t.exponent) as u32;
        let addend = (t.mantissa as u64)
            .checked_shl(shift)
            .filter(|v| v >> shift == t.mantissa as u64);
        let addend = match addend {
            Some(v) if bit_len(v) <= self.width => v,
            _ => {
                return Err(AccumulatorError::Addend {
                    span: bit_len(t.mantissa as u64) + shift,
                })
            }
        };
        self.watermark = self.watermark.max(bit_len(addend));
        self.window += addend;
        if self.window > mask {
            self.window &= mask;
            self.carry()?;
        }
        Ok(())
    }

    pub fn watermark(&self) -> u32 {
        self.watermark
    }

    /// `(B 2^lsb, lsb)`.
    pub fn finish(self) -> (BigUint, i64) {
        let mut acc = BigUint::zero();
        for &b in &self.emitted {
            acc = (acc << 1u32) + u32::from(b);
        }
        acc = (acc << self.width as usize) + self.window;
        (acc, self.lsb)
    }
}

/// `ceil(num 2^(shift) / divisor)` for a signed shift.
pub(crate) fn scaled_ceil(num: BigUint, shift: i64, divisor: u32) -> BigUint {
    if shift >= 0 {
        (num << shift as usize).div_ceil(&BigUint::from(divisor))
    } else {
        num.div_ceil(&(BigUint::from(divisor) << (-shift) as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn placement(v: u64, len: u64, q: i64) -> Placement {
        Placement {
            source: BigUint::from(v),
            len,
            q,
        }
    }

    #[test]
    fn window_streams_msb_first() {
        // I = 0b1011 * 2^-4 = 0.6875
        let p = placement(0b1011, 4, 4);
        let mut w = WindowRegister::new(&p, 0, 8).unwrap();
        assert_eq!(w.window(), 0);
        w.reach(2).unwrap();
        assert_eq!(w.window(), 0b10);
        w.reach(6).unwrap();
        assert_eq!(w.window(), 0b101100);
        assert_eq!(w.stream_pos(), 6);
        assert_eq!(w.span_watermark(), 6);
    }

    #[test]
    fn window_compares_like_exact() {
        let p = placement(0b1011, 4, 4);
        let exact = IntervalRegister::Exact(ExactRegister::new(&p));
        let mut win = IntervalRegister::Windowed(WindowRegister::new(&p, 0, 8).unwrap());
        win.reach(1).unwrap();
        for (m, d) in [(1, 1), (11, 4), (12, 4), (3, 2), (1, 0), (5, 3), (6, 3)] {
            let t = DyadicValue {
                mantissa: m,
                exponent: d,
            };
            assert_eq!(exact.at_least(t), win.at_least(t), "{t:?}");
        }
    }

    #[test]
    fn window_overflow_is_reported() {
        let p = placement(0xff, 8, 0);
        assert_eq!(
            WindowRegister::new(&p, 0, 4).unwrap_err(),
            Overflow { span: 8 }
        );
        let p = placement(0b1111, 4, 2);
        let mut w = WindowRegister::new(&p, 0, 3).unwrap();
        assert_eq!(w.window(), 0b11);
        w.reach(1).unwrap();
        assert!(w.reach(2).is_err());
    }

    #[test]
    fn carries_propagate_through_ones() {
        let mut acc = CarryAccumulator::new(0, 4);
        // 0.1011 then shift and add at the lsb to force a carry chain.
        acc.add(DyadicValue {
            mantissa: 0b1011,
            exponent: 0,
        })
        .unwrap();
        acc.add(DyadicValue {
            mantissa: 0b1111,
            exponent: 3,
        })
        .unwrap();
        acc.add(DyadicValue {
            mantissa: 1,
            exponent: 3,
        })
        .unwrap();
        let (num, lsb) = acc.finish();
        let mut exact = ExactSum::default();
        for (m, e) in [(0b1011, 0), (0b1111, 3), (1, 3)] {
            exact.add(DyadicValue {
                mantissa: m,
                exponent: e,
            });
        }
        let (en, es) = exact.into_parts();
        assert_eq!(num, en << (lsb - es) as usize);
    }

    #[test]
    fn carry_out_of_the_top() {
        let mut acc = CarryAccumulator::new(0, 2);
        acc.add(DyadicValue {
            mantissa: 3,
            exponent: 0,
        })
        .unwrap();
        assert_eq!(
            acc.add(DyadicValue {
                mantissa: 1,
                exponent: 0
            }),
            Err(AccumulatorError::CarryOut)
        );
    }

    #[test]
    fn ceil_with_signed_shift() {
        assert_eq!(scaled_ceil(BigUint::from(5u32), 1, 4), BigUint::from(3u32));
        assert_eq!(scaled_ceil(BigUint::from(5u32), -1, 1), BigUint::from(3u32));
        assert_eq!(scaled_ceil(BigUint::from(8u32), -2, 2), BigUint::from(1u32));
    }
}
