//! Log-domain CCDM driven entirely by table lookups, additions, subtractions and shifts.
//!
//! The interval width is carried as an exponent `s` with width `F(s)`. A step with
//! remaining counts `(n0, n1)` compares the residual index against
//! `T = F(s - Lg+(n0) + Lg-(n0 + n1))`; symbol 1 subtracts `T` and moves to
//! `s - Lg+(n1) + Lg-(n0 + n1)`, symbol 0 keeps the residual and moves to the
//! exponent of `T`. Every path consumes the same total `gamma`, so all sequences
//! end with the same width and a fixed-length index suffices.

mod audit;
mod params;
mod register;

use num_bigint::BigUint;
use thiserror::Error;

use crate::composition::{CcSequence, Composition, IndexWord};
use crate::tables::{DyadicValue, TableSet};

pub use audit::{AuditRecord, AuditSummary};
pub use params::{compute_params, gamma, MatcherParams};
pub use register::{ExactRegister, IntervalRegister, WindowRegister};

use register::{AccumulatorError, CarryAccumulator, ExactSum, Placement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogError {
    #[error("composition length {n} exceeds table n_max {n_max}")]
    CompositionTooLong { n: u32, n_max: u32 },
    #[error("composition {comp} is unusable with these tables (gamma = {gamma})")]
    Unusable { comp: Composition, gamma: i64 },
    #[error(
        "index length mismatch: floor(gamma/S) = {k}, floor(log2 F(s0)/F(sN)) = {k_from_ratio}"
    )]
    ParamMismatch { k: i64, k_from_ratio: i64 },
    #[error("{k}-bit index points are closer than the final interval width")]
    SpacingViolation { k: usize },
    #[error("index has {got} bits, matcher expects {expected}")]
    IndexLength { got: usize, expected: usize },
    #[error("sequence does not have composition {0}")]
    WrongComposition(Composition),
    #[error("sequence {0} is not in the matcher image")]
    NotInImage(CcSequence),
    #[error("register window of {width} bits overflowed at step {step} (span {span})")]
    WindowOverflow { step: u32, span: u32, width: u32 },
    #[error("window width {0} exceeds the 62-bit register")]
    WindowTooWide(u32),
    #[error("internal invariant breached at step {step}: {detail}")]
    InvariantBreach { step: u32, detail: String },
    #[error("audit check '{check}' failed at step {step}: {dump}")]
    AuditFailed {
        step: u32,
        check: &'static str,
        dump: String,
    },
}

/// Arithmetic used for the residual index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegisterMode {
    /// Exact dyadic rationals, unbounded.
    Exact,
    /// `log2 M + ceil(log2 N) + guard` bit window with streamed index loading.
    Windowed { guard: u32 },
}

impl RegisterMode {
    pub const DEFAULT_GUARD: u32 = 2;

    pub fn windowed() -> Self {
        RegisterMode::Windowed {
            guard: Self::DEFAULT_GUARD,
        }
    }
}

/// How much checking dematching does before returning an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImageCheck {
    /// Only reject indices that do not fit in `k` bits.
    Lenient,
    /// Also re-match the recovered index and reject if it does not reproduce the input.
    Strict,
}

/// `ceil(log2 n)` for `n >= 1`.
pub(crate) fn ceil_log2(n: u32) -> u32 {
    32 - (n.max(1) - 1).leading_zeros()
}

/// Remaining counts and current width exponent along a path.
#[derive(Debug, Clone, Copy)]
struct PathState {
    s: i64,
    n0: u32,
    n1: u32,
}

impl PathState {
    /// Candidate exponents `(s_n,0, s_n,1)`; a branch is `None` when its count is exhausted.
    fn branches(&self, tables: &TableSet) -> (Option<i64>, Option<i64>) {
        let lg = tables.lg();
        let down = lg.minus(self.n0 + self.n1) as i64;
        let zero = lg.plus(self.n0).map(|p| self.s - p as i64 + down);
        let one = lg.plus(self.n1).map(|p| self.s - p as i64 + down);
        (zero, one)
    }
}

/// Matcher and dematcher for one composition over a shared table set.
#[derive(Debug, Clone)]
pub struct LogMatcher<'t> {
    tables: &'t TableSet,
    comp: Composition,
    params: MatcherParams,
}

impl<'t> LogMatcher<'t> {
    /// Matcher with the default start `s0 = S`, where `F(s0) = M/2` and index placement is a shift.
    pub fn new(tables: &'t TableSet, comp: Composition) -> Result<Self, LogError> {
        Self::with_start(tables, comp, tables.config().s as i64)
    }

    /// Matcher with an explicit start exponent. `s0 = 1` follows the original initialization
    /// and costs one constant multiplication when placing the index.
    pub fn with_start(tables: &'t TableSet, comp: Composition, s0: i64) -> Result<Self, LogError> {
        let params = compute_params(&comp, tables, s0)?;
        Ok(Self {
            tables,
            comp,
            params,
        })
    }

    pub fn params(&self) -> &MatcherParams {
        &self.params
    }

    pub fn composition(&self) -> &Composition {
        &self.comp
    }

    pub fn tables(&self) -> &TableSet {
        self.tables
    }

    /// `log2 M + ceil(log2 N)`, the precision bound on any subtraction.
    pub fn precision_bits(&self) -> u32 {
        self.tables.config().mantissa_bits() + ceil_log2(self.comp.len())
    }

    pub fn window_width(&self, guard: u32) -> u32 {
        self.precision_bits() + guard
    }

    fn placement(&self, v: &IndexWord) -> Placement {
        let k = self.params.k as i64;
        let start = self.tables.eval(self.params.s0);
        if start.mantissa.is_power_of_two() {
            let e = start.mantissa.trailing_zeros() as i64;
            Placement {
                source: v.value().clone(),
                len: k as u64,
                q: k + start.exponent - e,
            }
        } else {
            let bits = 32 - start.mantissa.leading_zeros() as u64;
            Placement {
                source: v.value() * start.mantissa,
                len: k as u64 + bits,
                q: k + start.exponent,
            }
        }
    }

    /// Loads `I_0 = V 2^-k F(s0)` into a register.
    pub fn place_index(
        &self,
        v: &IndexWord,
        mode: RegisterMode,
    ) -> Result<IntervalRegister, LogError> {
        if v.k() != self.params.k {
            return Err(LogError::IndexLength {
                got: v.k(),
                expected: self.params.k,
            });
        }
        let placement = self.placement(v);
        Ok(match mode {
            RegisterMode::Exact => IntervalRegister::Exact(ExactRegister::new(&placement)),
            RegisterMode::Windowed { guard } => {
                let width = self.window_width(guard);
                if width > 62 {
                    return Err(LogError::WindowTooWide(width));
                }
                let start_lsb = self.tables.eval(self.params.s0).exponent;
                let reg = WindowRegister::new(&placement, start_lsb, width).map_err(|o| {
                    LogError::WindowOverflow {
                        step: 0,
                        span: o.span,
                        width,
                    }
                })?;
                IntervalRegister::Windowed(reg)
            }
        })
    }

    pub fn match_index(&self, v: &IndexWord, mode: RegisterMode) -> Result<CcSequence, LogError> {
        self.run_match(v, mode, None).map(|(x, _)| x)
    }

    /// Matching with every step checked; the first failed check aborts with a state dump.
    pub fn match_audited(
        &self,
        v: &IndexWord,
        mode: RegisterMode,
    ) -> Result<(CcSequence, AuditSummary), LogError> {
        let mut summary = AuditSummary::new(self.precision_bits());
        let (x, _) = self.run_match(v, mode, Some(&mut summary))?;
        Ok((x, summary))
    }

    fn run_match(
        &self,
        v: &IndexWord,
        mode: RegisterMode,
        mut audit: Option<&mut AuditSummary>,
    ) -> Result<(CcSequence, IntervalRegister), LogError> {
        let mut reg = self.place_index(v, mode)?;
        let total = self.comp.len();
        let mut state = PathState {
            s: self.params.s0,
            n0: self.comp.zeros(),
            n1: self.comp.ones(),
        };
        let mut symbols = Vec::with_capacity(total as usize);
        let width = match mode {
            RegisterMode::Windowed { guard } => self.window_width(guard),
            RegisterMode::Exact => 0,
        };

        for step in 0..total {
            let (zero, one) = state.branches(self.tables);
            let threshold = zero.map(|s| self.tables.eval(s));
            if let Some(t) = threshold {
                reg.reach(t.exponent)
                    .map_err(|o| LogError::WindowOverflow {
                        step,
                        span: o.span,
                        width,
                    })?;
            }
            if let Some(summary) = audit.as_deref_mut() {
                summary
                    .record(audit::StepView {
                        step,
                        s: state.s,
                        width: self.tables.eval(state.s),
                        zero_branch: threshold,
                        one_branch: one.map(|s| self.tables.eval(s)),
                        len: total,
                        counts: (state.n0, state.n1),
                        register: &reg,
                    })
                    .map_err(|(step, check, dump)| LogError::AuditFailed { step, check, dump })?;
            }
            // Ties go to symbol 1.
            let take_one = threshold.is_none_or(|t| reg.at_least(t));
            if take_one {
                let next = one.ok_or_else(|| LogError::InvariantBreach {
                    step,
                    detail: format!(
                        "residual reached the one-branch with n1 = 0 at s = {}",
                        state.s
                    ),
                })?;
                if let Some(t) = threshold {
                    reg.subtract(t);
                }
                symbols.push(1);
                state.s = next;
                state.n1 -= 1;
            } else {
                symbols.push(0);
                state.s = zero.expect("threshold implies a zero branch");
                state.n0 -= 1;
            }
        }

        if state.s != self.params.s_final {
            return Err(LogError::InvariantBreach {
                step: total,
                detail: format!("final exponent {} != {}", state.s, self.params.s_final),
            });
        }
        if let Some(summary) = audit {
            let end = self.tables.eval(state.s);
            if reg.at_least(end) {
                return Err(LogError::AuditFailed {
                    step: total,
                    check: "residual below width",
                    dump: format!("final I~{} >= F(sN)={:?}", reg.to_f64(), end),
                });
            }
            summary.max_window_span = summary
                .max_window_span
                .max(reg.span_watermark().unwrap_or(0));
        }
        Ok((CcSequence::from_raw(symbols), reg))
    }

    /// Thresholds subtracted along the path of `x`, in order.
    fn subtrahends(&self, x: &CcSequence) -> Result<Vec<DyadicValue>, LogError> {
        if !x.has_composition(&self.comp) {
            return Err(LogError::WrongComposition(self.comp));
        }
        let mut state = PathState {
            s: self.params.s0,
            n0: self.comp.zeros(),
            n1: self.comp.ones(),
        };
        let mut out = Vec::with_capacity(self.comp.ones() as usize);
        for &sym in x.symbols() {
            let (zero, one) = state.branches(self.tables);
            if sym == 1 {
                if let Some(s) = zero {
                    out.push(self.tables.eval(s));
                }
                state.s = one.expect("composition checked");
                state.n1 -= 1;
            } else {
                state.s = zero.expect("composition checked");
                state.n0 -= 1;
            }
        }
        Ok(out)
    }

    pub fn dematch(
        &self,
        x: &CcSequence,
        mode: RegisterMode,
        check: ImageCheck,
    ) -> Result<IndexWord, LogError> {
        self.dematch_traced(x, mode, check).map(|(v, _)| v)
    }

    /// Dematching that also returns the adder watermark (windowed mode) in bits.
    pub fn dematch_traced(
        &self,
        x: &CcSequence,
        mode: RegisterMode,
        check: ImageCheck,
    ) -> Result<(IndexWord, Option<u32>), LogError> {
        let terms = self.subtrahends(x)?;
        let start = self.tables.eval(self.params.s0);
        let ((base, lsb), watermark) = match mode {
            RegisterMode::Exact => {
                let mut sum = ExactSum::default();
                for t in terms {
                    sum.add(t);
                }
                (sum.into_parts(), None)
            }
            RegisterMode::Windowed { guard } => {
                let width = self.window_width(guard);
                if width > 62 {
                    return Err(LogError::WindowTooWide(width));
                }
                let mut acc = CarryAccumulator::new(start.exponent, width);
                for (i, t) in terms.into_iter().enumerate() {
                    acc.add(t).map_err(|e| match e {
                        AccumulatorError::CarryOut => LogError::NotInImage(x.clone()),
                        AccumulatorError::Addend { span } => LogError::WindowOverflow {
                            step: i as u32,
                            span,
                            width,
                        },
                    })?;
                }
                let watermark = acc.watermark();
                (acc.finish(), Some(watermark))
            }
        };
        // V = ceil(B 2^k / F(s0)) with F(s0) = f0 2^-d0.
        let k = self.params.k;
        let shift = k as i64 + start.exponent - lsb;
        let v = register::scaled_ceil(base, shift, start.mantissa);
        if v.bits() as usize > k {
            return Err(LogError::NotInImage(x.clone()));
        }
        let v = IndexWord::new(v, k).expect("fits in k bits");
        if check == ImageCheck::Strict && self.match_index(&v, RegisterMode::Exact)? != *x {
            return Err(LogError::NotInImage(x.clone()));
        }
        Ok((v, watermark))
    }

    /// Placed value of the largest index, for callers checking `I_0 < F(s0)`.
    pub fn top_placement(&self) -> Result<(BigUint, i64), LogError> {
        match self.place_index(&IndexWord::max(self.params.k), RegisterMode::Exact)? {
            IntervalRegister::Exact(r) => {
                let (n, s) = r.value();
                Ok((n.clone(), s))
            }
            IntervalRegister::Windowed(_) => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::TableConfig;

    fn reference_tables() -> TableSet {
        TableSet::build(TableConfig::new(16, 32, 32).unwrap()).unwrap()
    }

    fn modes() -> [RegisterMode; 2] {
        [RegisterMode::Exact, RegisterMode::windowed()]
    }

    #[test]
    fn placement_is_proportional() {
        let t = reference_tables();
        let m = LogMatcher::new(&t, Composition::new(3, 2).unwrap()).unwrap();
        assert_eq!(m.params().k, 2);
        let reg = m
            .place_index(&IndexWord::from_u64(2, 2).unwrap(), RegisterMode::Exact)
            .unwrap();
        assert_eq!(reg.to_f64(), 8.0);
        let zero = m
            .place_index(&IndexWord::zero(2), RegisterMode::Exact)
            .unwrap();
        assert_eq!(zero.to_f64(), 0.0);
        // (2^k - 1) 2^(log2 M - 1 - k) = 3 * 4 = 12 < F(S) = 16
        let (num, scale) = m.top_placement().unwrap();
        assert_eq!(num, BigUint::from(3u32));
        assert_eq!(scale, -2);
    }

    #[test]
    fn roundtrip_every_index_small() {
        let t = reference_tables();
        let c = Composition::new(7, 5).unwrap();
        let m = LogMatcher::new(&t, c).unwrap();
        for v in 0..1u64 << m.params().k {
            let v = IndexWord::from_u64(v, m.params().k).unwrap();
            for mode in modes() {
                let x = m.match_index(&v, mode).unwrap();
                assert!(x.has_composition(&c));
                assert_eq!(
                    m.dematch(&x, mode, ImageCheck::Strict).unwrap(),
                    v,
                    "{mode:?}"
                );
            }
        }
    }

    #[test]
    fn zero_index_gives_zeros_first() {
        let t = reference_tables();
        let c = Composition::new(6, 3).unwrap();
        let m = LogMatcher::new(&t, c).unwrap();
        let x = m
            .match_index(&IndexWord::zero(m.params().k), RegisterMode::Exact)
            .unwrap();
        assert_eq!(x.to_string(), "000000111");
        assert_eq!(
            m.dematch(&x, RegisterMode::Exact, ImageCheck::Strict)
                .unwrap(),
            IndexWord::zero(m.params().k)
        );
    }

    #[test]
    fn paper_literal_start_roundtrips() {
        let t = reference_tables();
        let c = Composition::new(8, 6).unwrap();
        let m = LogMatcher::with_start(&t, c, 1).unwrap();
        for v in 0..1u64 << m.params().k {
            let v = IndexWord::from_u64(v, m.params().k).unwrap();
            let x = m.match_index(&v, RegisterMode::Exact).unwrap();
            let y = m.match_index(&v, RegisterMode::windowed()).unwrap();
            assert_eq!(x, y);
            for mode in modes() {
                assert_eq!(m.dematch(&x, mode, ImageCheck::Strict).unwrap(), v);
            }
        }
    }

    #[test]
    fn audited_small_block() {
        let t = reference_tables();
        let c = Composition::new(20, 12).unwrap();
        let m = LogMatcher::new(&t, c).unwrap();
        for v in [0u64, 1, 12345, (1 << m.params().k) - 1] {
            let v = IndexWord::from_u64(v % (1 << m.params().k), m.params().k).unwrap();
            let (x, summary) = m.match_audited(&v, RegisterMode::windowed()).unwrap();
            assert_eq!(summary.records.len(), 32);
            assert!(summary.max_span <= m.precision_bits());
            assert!(summary.max_window_span <= m.window_width(2));
            assert_eq!(x, m.match_index(&v, RegisterMode::Exact).unwrap());
        }
    }

    #[test]
    fn rejects_wrong_inputs() {
        let t = reference_tables();
        let c = Composition::new(3, 2).unwrap();
        let m = LogMatcher::new(&t, c).unwrap();
        assert_eq!(
            m.match_index(&IndexWord::zero(3), RegisterMode::Exact)
                .unwrap_err(),
            LogError::IndexLength {
                got: 3,
                expected: 2
            }
        );
        let x = CcSequence::new(vec![1, 1, 1, 0, 0]).unwrap();
        assert_eq!(
            m.dematch(&x, RegisterMode::Exact, ImageCheck::Strict)
                .unwrap_err(),
            LogError::WrongComposition(c)
        );
    }

    #[test]
    fn non_image_sequences_are_rejected() {
        let t = reference_tables();
        let c = Composition::new(3, 2).unwrap();
        let m = LogMatcher::new(&t, c).unwrap();
        let image: Vec<_> = (0..4)
            .map(|v| {
                m.match_index(&IndexWord::from_u64(v, 2).unwrap(), RegisterMode::Exact)
                    .unwrap()
            })
            .collect();
        let outside: Vec<_> = crate::composition::enumerate_sequences(&c)
            .into_iter()
            .filter(|x| !image.contains(x))
            .collect();
        assert_eq!(outside.len(), 6);
        for x in outside {
            for mode in modes() {
                assert!(matches!(
                    m.dematch(&x, mode, ImageCheck::Strict),
                    Err(LogError::NotInImage(_))
                ));
            }
        }
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(1024), 10);
    }
}
