//! Rate, storage and precision accounting across block lengths and table sizes.

use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::composition::{Composition, IndexWord};
use crate::fp_ccdm;
use crate::log_ccdm::{self, LogMatcher, RegisterMode};
use crate::tables::{self, TableConfig, TableError, TableSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("{what} = {value} must be a power of two")]
    NotPowerOfTwo { what: &'static str, value: u32 },
    #[error("block length must be positive")]
    ZeroLength,
    #[error(transparent)]
    Table(#[from] TableError),
}

/// `H(p) = -p log2 p - (1-p) log2(1-p)`, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalysisError::BadProbability(p));
    }
    let term = |q: f64| if q == 0.0 { 0.0 } else { -q * q.log2() };
    Ok(term(p) + term(1.0 - p))
}

/// `log2 M + log2 N` for powers of two.
pub fn precision_bits(m: u32, n: u32) -> Result<u32, AnalysisError> {
    for (what, value) in [("M", m), ("N", n)] {
        if !value.is_power_of_two() {
            return Err(AnalysisError::NotPowerOfTwo { what, value });
        }
    }
    Ok(m.trailing_zeros() + n.trailing_zeros())
}

/// Maps a block length to a composition: `n0 = round((1 - p1) N)`, `n1 = N - n0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionRule {
    pub p1: f64,
}

impl Default for CompositionRule {
    fn default() -> Self {
        Self { p1: 0.25 }
    }
}

impl CompositionRule {
    pub fn new(p1: f64) -> Result<Self, AnalysisError> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(AnalysisError::BadProbability(p1));
        }
        Ok(Self { p1 })
    }

    pub fn composition(&self, n: u32) -> Result<Composition, AnalysisError> {
        let n0 = ((1.0 - self.p1) * n as f64).round() as u32;
        Composition::new(n0, n - n0).map_err(|_| AnalysisError::ZeroLength)
    }
}

/// `N = 2^4 .. 2^13`.
pub fn default_lengths() -> Vec<u32> {
    (4..=13).map(|e| 1u32 << e).collect()
}

/// `(S, M)` pairs compared by default.
pub const DEFAULT_PAIRS: [(u32, u32); 4] = [(128, 1024), (256, 512), (256, 1024), (512, 1024)];

pub const CSV_HEADER: &str = "N,S,M,n0,n1,k,k_max,rate,rate_max,log2_count_over_N,entropy,storage_bytes,precision_bits,gap_to_fp";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub n: u32,
    pub s: u32,
    pub m: u32,
    pub n0: u32,
    pub n1: u32,
    pub k: usize,
    pub k_max: usize,
    pub rate: f64,
    pub rate_max: f64,
    pub log2_count_over_n: f64,
    pub entropy: f64,
    pub storage_bytes: u64,
    pub precision_bits: u32,
    pub gap_to_fp: f64,
}

impl SweepRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{:.6}",
            self.n,
            self.s,
            self.m,
            self.n0,
            self.n1,
            self.k,
            self.k_max,
            self.rate,
            self.rate_max,
            self.log2_count_over_n,
            self.entropy,
            self.storage_bytes,
            self.precision_bits,
            self.gap_to_fp
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub n: u32,
    pub s: u32,
    pub m: u32,
    pub reason: String,
}

/// One sweep point against prebuilt tables.
pub fn sweep_record(
    n: u32,
    tables: &TableSet,
    rule: CompositionRule,
) -> Result<SweepRecord, SweepFailure> {
    let TableConfig { s, m, .. } = *tables.config();
    let fail = |reason: String| SweepFailure { n, s, m, reason };
    let comp = rule.composition(n).map_err(|e| fail(e.to_string()))?;
    let params =
        log_ccdm::compute_params(&comp, tables, s as i64).map_err(|e| fail(e.to_string()))?;
    let k_max = fp_ccdm::k_max(&comp);
    let len = n as f64;
    let rate = params.k as f64 / len;
    let rate_max = k_max as f64 / len;
    let storage = if n >= 2 {
        tables::storage_bytes(s, m, n).map_err(|e| fail(e.to_string()))?
    } else {
        0
    };
    Ok(SweepRecord {
        n,
        s,
        m,
        n0: comp.zeros(),
        n1: comp.ones(),
        k: params.k,
        k_max,
        rate,
        rate_max,
        log2_count_over_n: fp_ccdm::log2_cc_count(&comp) / len,
        entropy: binary_entropy(comp.ones() as f64 / len).expect("fraction in [0, 1]"),
        storage_bytes: storage,
        precision_bits: m.trailing_zeros() + log_ccdm::ceil_log2(n),
        gap_to_fp: rate_max - rate,
    })
}

/// Records ordered by `(S, M)` pair, then `N` ascending.
pub fn rate_sweep(
    lengths: &[u32],
    pairs: &[(u32, u32)],
    rule: CompositionRule,
) -> Result<Vec<Result<SweepRecord, SweepFailure>>, AnalysisError> {
    let mut lengths = lengths.to_vec();
    lengths.sort_unstable();
    lengths.dedup();
    let longest = *lengths.last().ok_or(AnalysisError::ZeroLength)?;
    if longest == 0 {
        return Err(AnalysisError::ZeroLength);
    }
    let mut out = Vec::new();
    for &(s, m) in pairs {
        let tables = TableSet::build(TableConfig::new(s, m, longest.next_power_of_two())?)?;
        out.extend(
            lengths
                .par_iter()
                .map(|&n| sweep_record(n, &tables, rule))
                .collect::<Vec<_>>(),
        );
    }
    Ok(out)
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Places where a larger `S` at the same `M` and `N` gave a lower rate.
pub fn dominance_findings(records: &[SweepRecord]) -> Vec<String> {
    let mut findings = Vec::new();
    for a in records {
        for b in records {
            if a.m == b.m && a.n == b.n && a.s > b.s && a.k < b.k {
                findings.push(format!(
                    "N={} M={}: S={} gives k={} < k={} at S={}",
                    a.n, a.m, a.s, a.k, b.k, b.s
                ));
            }
        }
    }
    findings
}

/// Working precision of the full-precision oracle at one block length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpPrecisionPoint {
    pub n: u32,
    /// Largest working integer during matching, in bits.
    pub max_bits: u64,
    /// Final width denominator in lowest terms, in bits.
    pub reduced_bits: u64,
}

/// Measures the oracle's arithmetic precision on the middle index of each block length.
pub fn fp_precision_profile(
    lengths: &[u32],
    rule: CompositionRule,
) -> Result<Vec<FpPrecisionPoint>, AnalysisError> {
    lengths
        .par_iter()
        .map(|&n| {
            let comp = rule.composition(n)?;
            let k = fp_ccdm::k_max(&comp);
            let v = if k == 0 {
                BigUint::from(0u32)
            } else {
                BigUint::one() << (k - 1)
            };
            let v = IndexWord::new(v, k).expect("fits");
            let (_, trace) = fp_ccdm::fp_match_traced(&v, &comp).expect("index length is k_max");
            Ok(FpPrecisionPoint {
                n,
                max_bits: trace.max_bits,
                reduced_bits: trace.reduced_width_bits,
            })
        })
        .collect()
}

/// Register spans observed by audited windowed Log-CCDM at one block length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogSpanPoint {
    pub n: u32,
    pub max_span: u32,
    pub max_window_span: u32,
    pub span_limit: u32,
    pub window_width: u32,
}

/// Runs `trials` seeded random indices per length through the audited windowed matcher.
pub fn log_span_profile(
    lengths: &[u32],
    tables: &TableSet,
    rule: CompositionRule,
    trials: usize,
    seed: u64,
) -> Result<Vec<LogSpanPoint>, String> {
    let mode = RegisterMode::windowed();
    lengths
        .iter()
        .map(|&n| {
            let comp = rule.composition(n).map_err(|e| e.to_string())?;
            let matcher = LogMatcher::new(tables, comp).map_err(|e| e.to_string())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
            let mut point = LogSpanPoint {
                n,
                max_span: 0,
                max_window_span: 0,
                span_limit: matcher.precision_bits(),
                window_width: matcher.window_width(RegisterMode::DEFAULT_GUARD),
            };
            for _ in 0..trials {
                let v = random_index(&mut rng, matcher.params().k);
                let (_, summary) = matcher.match_audited(&v, mode).map_err(|e| e.to_string())?;
                point.max_span = point.max_span.max(summary.max_span);
                point.max_window_span = point.max_window_span.max(summary.max_window_span);
            }
            Ok(point)
        })
        .collect()
}

/// Uniform `k`-bit index.
pub fn random_index<R: Rng>(rng: &mut R, k: usize) -> IndexWord {
    let mut bytes = vec![0u8; k.div_ceil(8)];
    rng.fill(bytes.as_mut_slice());
    let v = BigUint::from_bytes_be(&bytes) >> (bytes.len() * 8 - k);
    IndexWord::new(v, k).expect("masked to k bits")
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}
