use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;

use super::{FTable, TableError};

/// `ceil(M 2^(-r/S))` for `r = 1..=S`, exact.
///
/// A float estimate is corrected against the integer characterization
/// `c = ceil(M 2^(-r/S))  <=>  c^S 2^r >= M^S  and  (c-1)^S 2^r < M^S`.
pub(super) fn exp_mantissas(s: u32, m: u32) -> Vec<u32> {
    let log_m = m.trailing_zeros() as usize;
    let target = BigUint::one() << (log_m * s as usize);
    (1..=s)
        .into_par_iter()
        .map(|r| {
            let covers = |c: u32| (BigUint::from(c).pow(s) << r as usize) >= target;
            let mut c = (m as f64 * (-(r as f64) / s as f64).exp2()).ceil() as u32;
            while !covers(c) {
                c += 1;
            }
            while c > 1 && covers(c - 1) {
                c -= 1;
            }
            c
        })
        .collect()
}

/// Exclusive upper bound on any shift searched for in the log tables.
pub(super) fn shift_bound(s: u32, n_max: u32) -> u32 {
    let ceil_log = 32 - (n_max.max(1) - 1).leading_zeros();
    s * ceil_log + 2 * s
}

/// `F(s) >= n F(s + delta)` for `s` in one period.
fn multiply_covered(f: &FTable, s: u32, delta: u32, n: u32) -> bool {
    let base = f.entry(s) as u128;
    let shifted = f.eval(s as i64 + delta as i64);
    (base << shifted.exponent) >= n as u128 * shifted.mantissa as u128
}

/// `F(s) < n F(s + delta)` for `s` in one period. The strict comparison keeps the
/// divided width clear of exact-halving ties.
fn divide_covered(f: &FTable, s: u32, delta: u32, n: u32) -> bool {
    let base = f.entry(s) as u128;
    let shifted = f.eval(s as i64 + delta as i64);
    (base << shifted.exponent) < n as u128 * shifted.mantissa as u128
}

/// First `delta` in `0..bound` where `pred` turns true; `pred` must be monotone.
fn first_true(bound: u32, pred: impl Fn(u32) -> bool) -> u32 {
    let (mut lo, mut hi) = (0, bound);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

pub(super) fn lg_plus(f: &FTable, n_max: u32) -> Result<Vec<u32>, TableError> {
    let bound = shift_bound(f.period(), n_max);
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut worst = 0;
            for s in 1..=f.period() {
                let delta = first_true(bound, |d| multiply_covered(f, s, d, n));
                if delta >= bound {
                    return Err(TableError::SearchBound { n, bound });
                }
                worst = worst.max(delta);
            }
            Ok(worst)
        })
        .collect()
}

pub(super) fn lg_minus(f: &FTable, n_max: u32) -> Result<Vec<u32>, TableError> {
    let bound = shift_bound(f.period(), n_max);
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut best = u32::MAX;
            for s in 1..=f.period() {
                // For n >= 2, delta = 0 qualifies. For n = 1 nothing does and the
                // entry is pinned to 0.
                let first_fail = first_true(bound, |d| !divide_covered(f, s, d, n));
                if first_fail >= bound {
                    return Err(TableError::SearchBound { n, bound });
                }
                best = best.min(first_fail.saturating_sub(1));
            }
            Ok(best)
        })
        .collect()
}
