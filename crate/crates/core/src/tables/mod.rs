//! The three lookup tables that stand in for multiplication and division.
//!
//! `F(s)` is an exponential stored only over one period `1..=S`:
//! `F(r + dS) = f[r] 2^-d`. `Lg+(n)` and `Lg-(n)` are integer log tables,
//! rounded so that `F(s - Lg+(n)) >= n F(s)` and `F(s + Lg-(n)) >= F(s) / n`,
//! which makes every approximate subdivision over-cover its exact width.

mod build;
mod io;
mod validate;

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;

use thiserror::Error;

pub use io::{deserialize, serialize, write_csv, FORMAT_VERSION, MAGIC};
pub(crate) use validate::sum_covers;
pub use validate::{validate_tables, Check, CheckOutcome, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("S must be positive")]
    ZeroResolution,
    #[error("M = {0} must be a power of two between 2 and 65536")]
    BadMantissaScale(u32),
    #[error("n_max = {0} must be a power of two")]
    BadMaxLength(u32),
    #[error("S = {s} exceeds {max} for M = {m}; mantissas would overflow log2(M) bits", max = max_resolution(*m))]
    IneligibleResolution { s: u32, m: u32 },
    #[error("f[1] = M = {0}; the first mantissa does not fit in log2(M) bits")]
    MantissaOverflow(u32),
    #[error("log-table search for n = {n} did not terminate below shift {bound}")]
    SearchBound { n: u32, bound: u32 },
    #[error("storage accounting needs N >= 2, got {0}")]
    StorageLength(u32),
    #[error("table invariant violated: {0}")]
    Invariant(String),
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    VersionMismatch(u16),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
}

/// Table dimensions: period `S`, mantissa scale `M` and largest supported length `n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TableConfig {
    pub s: u32,
    pub m: u32,
    pub n_max: u32,
}

impl TableConfig {
    pub fn new(s: u32, m: u32, n_max: u32) -> Result<Self, TableError> {
        let config = Self { s, m, n_max };
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), TableError> {
        if self.s == 0 {
            return Err(TableError::ZeroResolution);
        }
        if !self.m.is_power_of_two() || self.m < 2 || self.m > 1 << 16 {
            return Err(TableError::BadMantissaScale(self.m));
        }
        if !self.n_max.is_power_of_two() {
            return Err(TableError::BadMaxLength(self.n_max));
        }
        if self.s > max_resolution(self.m) {
            return Err(TableError::IneligibleResolution {
                s: self.s,
                m: self.m,
            });
        }
        Ok(())
    }

    /// `log2(M)`, the bit width of every stored mantissa.
    pub fn mantissa_bits(&self) -> u32 {
        self.m.trailing_zeros()
    }
}

impl fmt::Display for TableConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S={} M={} n_max={}", self.s, self.m, self.n_max)
    }
}

/// Exact value `mantissa * 2^-exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicValue {
    pub mantissa: u32,
    pub exponent: i64,
}

impl DyadicValue {
    pub fn to_f64(self) -> f64 {
        self.mantissa as f64 * (-(self.exponent as f64)).exp2()
    }

    /// `mantissa * 2^(lsb - exponent)` as an integer, if `lsb >= exponent` and it fits.
    pub fn scaled_to(self, lsb: i64) -> Option<u128> {
        let shift = lsb.checked_sub(self.exponent)?;
        if !(0..=96).contains(&shift) {
            return None;
        }
        Some((self.mantissa as u128) << shift)
    }

    /// Exact comparison of `coef * self` against `other_coef * other`.
    pub fn cmp_scaled(self, coef: u64, other: DyadicValue, other_coef: u64) -> Ordering {
        let lsb = self.exponent.max(other.exponent);
        match (self.scaled_to(lsb), other.scaled_to(lsb)) {
            (Some(a), Some(b)) => (a * coef as u128).cmp(&(b * other_coef as u128)),
            // Exponents more than 96 apart: the coarser value dominates any 64-bit multiple
            // of the finer one unless its coefficient vanishes.
            _ => {
                let lhs_zero = coef == 0 || self.mantissa == 0;
                let rhs_zero = other_coef == 0 || other.mantissa == 0;
                match (lhs_zero, rhs_zero) {
                    (true, true) => Ordering::Equal,
                    (true, false) => Ordering::Less,
                    (false, true) => Ordering::Greater,
                    (false, false) => other.exponent.cmp(&self.exponent),
                }
            }
        }
    }
}

impl PartialOrd for DyadicValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_scaled(1, *other, 1)
    }
}

/// Mantissa table `f[r] = ceil(M 2^(-r/S))`, `r = 1..=S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FTable {
    s: u32,
    m: u32,
    f: Vec<u32>,
}

impl FTable {
    pub fn build(config: &TableConfig) -> Result<Self, TableError> {
        config.check()?;
        let f = build::exp_mantissas(config.s, config.m);
        if f[0] >= config.m {
            return Err(TableError::MantissaOverflow(config.m));
        }
        Self::from_entries(config.s, config.m, f)
    }

    /// Wraps precomputed mantissas after checking the structural invariants.
    pub fn from_entries(s: u32, m: u32, f: Vec<u32>) -> Result<Self, TableError> {
        if f.len() != s as usize {
            return Err(TableError::Invariant(format!(
                "expected {s} mantissas, got {}",
                f.len()
            )));
        }
        if let Some(r) = f.windows(2).position(|w| w[1] > w[0]) {
            return Err(TableError::Invariant(format!(
                "f is increasing at r = {}",
                r + 2
            )));
        }
        if f[s as usize - 1] != m / 2 {
            return Err(TableError::Invariant(format!(
                "f[S] = {} != M/2",
                f[s as usize - 1]
            )));
        }
        if f[0] >= m {
            return Err(TableError::MantissaOverflow(m));
        }
        Ok(Self { s, m, f })
    }

    pub fn period(&self) -> u32 {
        self.s
    }

    pub fn scale(&self) -> u32 {
        self.m
    }

    /// `f[r]` for `1 <= r <= S`.
    pub fn entry(&self, r: u32) -> u32 {
        self.f[r as usize - 1]
    }

    pub fn entries(&self) -> &[u32] {
        &self.f
    }

    /// Evaluates `F(s)` for any integer `s`, using `F(s + S) = F(s) / 2` outside `1..=S`.
    pub fn eval(&self, s: i64) -> DyadicValue {
        let period = self.s as i64;
        let d = (s - 1).div_euclid(period);
        let r = s - d * period;
        DyadicValue {
            mantissa: self.f[r as usize - 1],
            exponent: d,
        }
    }
}

/// `Lg+` and `Lg-` over `n = 1..=n_max`. `Lg+(0)` is the infinite sentinel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LgTables {
    plus: Vec<u32>,
    minus: Vec<u32>,
}

impl LgTables {
    pub fn build(f: &FTable, n_max: u32) -> Result<Self, TableError> {
        let plus = build::lg_plus(f, n_max)?;
        let minus = build::lg_minus(f, n_max)?;
        Ok(Self { plus, minus })
    }

    pub fn from_entries(plus: Vec<u32>, minus: Vec<u32>) -> Result<Self, TableError> {
        if plus.len() != minus.len() || plus.is_empty() {
            return Err(TableError::Invariant(
                "log tables must have equal, nonzero length".into(),
            ));
        }
        for (name, t) in [("Lg+", &plus), ("Lg-", &minus)] {
            if let Some(i) = t.windows(2).position(|w| w[1] < w[0]) {
                return Err(TableError::Invariant(format!(
                    "{name} decreases at n = {}",
                    i + 2
                )));
            }
        }
        if minus[0] != 0 {
            return Err(TableError::Invariant("Lg-(1) must be 0".into()));
        }
        Ok(Self { plus, minus })
    }

    pub fn n_max(&self) -> u32 {
        self.plus.len() as u32
    }

    /// `Lg+(n)`; `None` stands for `+inf` at `n = 0`.
    pub fn plus(&self, n: u32) -> Option<u32> {
        if n == 0 {
            None
        } else {
            Some(self.plus[n as usize - 1])
        }
    }

    /// `Lg-(n)` for `n >= 1`.
    pub fn minus(&self, n: u32) -> u32 {
        self.minus[n as usize - 1]
    }

    pub fn plus_entries(&self) -> &[u32] {
        &self.plus
    }

    pub fn minus_entries(&self) -> &[u32] {
        &self.minus
    }
}

/// All three tables for one configuration. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSet {
    config: TableConfig,
    f: FTable,
    lg: LgTables,
}

impl TableSet {
    pub fn build(config: TableConfig) -> Result<Self, TableError> {
        let f = FTable::build(&config)?;
        let lg = LgTables::build(&f, config.n_max)?;
        Ok(Self { config, f, lg })
    }

    /// Assembles a table set from parts, checking only structural consistency.
    pub fn from_parts(config: TableConfig, f: FTable, lg: LgTables) -> Result<Self, TableError> {
        config.check()?;
        if f.period() != config.s || f.scale() != config.m {
            return Err(TableError::Invariant(
                "F table does not match the configuration".into(),
            ));
        }
        if lg.n_max() != config.n_max {
            return Err(TableError::Invariant("log tables do not span n_max".into()));
        }
        Ok(Self { config, f, lg })
    }

    pub fn config(&self) -> &TableConfig {
        &self.config
    }

    pub fn f(&self) -> &FTable {
        &self.f
    }

    pub fn lg(&self) -> &LgTables {
        &self.lg
    }

    pub fn eval(&self, s: i64) -> DyadicValue {
        self.f.eval(s)
    }
}

/// Reported LUT storage `S log2 M + 2N (log2 S + log2 log2 N)` in bits, rounded to nearest.
pub fn storage_bits(s: u32, m: u32, n: u32) -> Result<u64, TableError> {
    Ok(storage_bits_exact(s, m, n)?.round() as u64)
}

/// Largest `S` with `ceil(M 2^(-1/S)) < M`, i.e. `2 (M-1)^S >= M^S`.
///
/// Slightly below `M ln 2`. `M` must be a power of two in `2..=65536`.
pub fn max_resolution(m: u32) -> u32 {
    static CACHE: [OnceLock<u32>; 17] = [const { OnceLock::new() }; 17];
    *CACHE[m.trailing_zeros() as usize].get_or_init(|| resolution_bound(m))
}

fn resolution_bound(m: u32) -> u32 {
    let fits = |s: u32| BigUint::from(m - 1).pow(s) << 1u32 >= BigUint::from(m).pow(s);
    let guess = (std::f64::consts::LN_2 / -(-1.0 / m as f64).ln_1p()).floor() as u32;
    // The float guess can only be off by one near the boundary.
    if !fits(guess) {
        guess - 1
    } else if fits(guess + 1) {
        guess + 1
    } else {
        guess
    }
}

/// Unrounded storage figure.
pub fn storage_bits_exact(s: u32, m: u32, n: u32) -> Result<f64, TableError> {
    if n < 2 {
        return Err(TableError::StorageLength(n));
    }
    if s == 0 {
        return Err(TableError::ZeroResolution);
    }
    if !m.is_power_of_two() {
        return Err(TableError::BadMantissaScale(m));
    }
    let s = s as f64;
    let n = n as f64;
    Ok(s * (m as f64).log2() + 2.0 * n * (s.log2() + n.log2().log2()))
}

/// Storage to the nearest byte.
pub fn storage_bytes(s: u32, m: u32, n: u32) -> Result<u64, TableError> {
    Ok((storage_bits_exact(s, m, n)? / 8.0).round() as u64)
}
