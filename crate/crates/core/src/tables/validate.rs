use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;

use super::{DyadicValue, TableSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    /// `F(s - Lg+(n)) >= n F(s)`.
    MultiplyCover,
    /// `F(s + Lg-(n)) >= F(s) / n`.
    DivideCover,
    /// `F(s) <= F(s - Lg+(n1) + Lg-(n0+n1)) + F(s - Lg+(n0) + Lg-(n0+n1))`.
    NoGap,
    /// `Lg+(n) >= S log2 n >= Lg-(n)`.
    RoundingDirection,
    /// Both log tables non-decreasing in `n`.
    LogMonotone,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::MultiplyCover => "multiply-cover",
            Check::DivideCover => "divide-cover",
            Check::NoGap => "no-gap",
            Check::RoundingDirection => "rounding-direction",
            Check::LogMonotone => "log-monotone",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub check: Check,
    pub evaluated: u64,
    pub counterexample: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed())
    }

    pub fn outcome(&self, check: Check) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.check == check)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.counterexample {
                None => writeln!(f, "{}: pass ({} cases)", c.check, c.evaluated)?,
                Some(cx) => writeln!(f, "{}: FAIL at {}", c.check, cx)?,
            }
        }
        Ok(())
    }
}

/// Exhaustively checks the cover and no-gap inequalities over one period of `s`.
///
/// Periodicity of `F` makes `s` in `1..=S` sufficient for all integer `s`.
pub fn validate_tables(tables: &TableSet) -> ValidationReport {
    let checks = vec![
        log_monotone(tables),
        rounding_direction(tables),
        multiply_cover(tables),
        divide_cover(tables),
        no_gap(tables),
    ];
    ValidationReport { checks }
}

fn outcome(check: Check, evaluated: u64, counterexample: Option<String>) -> CheckOutcome {
    CheckOutcome {
        check,
        evaluated,
        counterexample,
    }
}

fn log_monotone(t: &TableSet) -> CheckOutcome {
    let lg = t.lg();
    let n_max = lg.n_max();
    let cx = (2..=n_max).find_map(|n| {
        let plus = lg.plus(n).unwrap() < lg.plus(n - 1).unwrap();
        let minus = lg.minus(n) < lg.minus(n - 1);
        (plus || minus).then(|| format!("n={n}"))
    });
    let cx = cx.or_else(|| (lg.minus(1) != 0).then(|| "Lg-(1) != 0".to_string()));
    outcome(Check::LogMonotone, n_max as u64, cx)
}

fn rounding_direction(t: &TableSet) -> CheckOutcome {
    let s = t.config().s;
    let lg = t.lg();
    let n_max = lg.n_max();
    let cx = (1..=n_max).into_par_iter().find_map_first(|n| {
        let power = BigUint::from(n).pow(s);
        let plus = lg.plus(n).unwrap();
        let minus = lg.minus(n);
        if (BigUint::one() << plus as usize) < power {
            Some(format!("n={n}: Lg+={plus} < S log2 n"))
        } else if (BigUint::one() << minus as usize) > power {
            Some(format!("n={n}: Lg-={minus} > S log2 n"))
        } else {
            None
        }
    });
    outcome(Check::RoundingDirection, n_max as u64, cx)
}

fn multiply_cover(t: &TableSet) -> CheckOutcome {
    let period = t.config().s;
    let n_max = t.lg().n_max();
    let cx = (1..=n_max).into_par_iter().find_map_first(|n| {
        let shift = t.lg().plus(n).unwrap() as i64;
        (1..=period as i64).find_map(|s| {
            let scaled = t.eval(s - shift);
            (scaled.cmp_scaled(1, t.eval(s), n as u64) == Ordering::Less)
                .then(|| format!("n={n} s={s}: F(s-Lg+(n))={} < n F(s)", scaled.to_f64()))
        })
    });
    outcome(Check::MultiplyCover, period as u64 * n_max as u64, cx)
}

fn divide_cover(t: &TableSet) -> CheckOutcome {
    let period = t.config().s;
    let n_max = t.lg().n_max();
    let cx = (1..=n_max).into_par_iter().find_map_first(|n| {
        let shift = t.lg().minus(n) as i64;
        (1..=period as i64).find_map(|s| {
            let scaled = t.eval(s + shift);
            (scaled.cmp_scaled(n as u64, t.eval(s), 1) == Ordering::Less).then(|| {
                format!(
                    "n={n} s={s}: n F(s+Lg-(n))={} < F(s)",
                    n as f64 * scaled.to_f64()
                )
            })
        })
    });
    outcome(Check::DivideCover, period as u64 * n_max as u64, cx)
}

/// `a + b >= c`, exactly.
pub(crate) fn sum_covers(a: DyadicValue, b: DyadicValue, c: DyadicValue) -> bool {
    let lsb = a.exponent.max(b.exponent).max(c.exponent);
    match (a.scaled_to(lsb), b.scaled_to(lsb), c.scaled_to(lsb)) {
        (Some(a), Some(b), Some(c)) => a + b >= c,
        _ => {
            let big = |v: DyadicValue| BigUint::from(v.mantissa) << (lsb - v.exponent) as usize;
            big(a) + big(b) >= big(c)
        }
    }
}

fn no_gap(t: &TableSet) -> CheckOutcome {
    let period = t.config().s as i64;
    let lg = t.lg();
    let n_max = lg.n_max();
    let cx = (2..=n_max).into_par_iter().find_map_first(|n| {
        let down = lg.minus(n) as i64;
        (1..n).find_map(|n0| {
            let n1 = n - n0;
            let zero_shift = down - lg.plus(n0).unwrap() as i64;
            let one_shift = down - lg.plus(n1).unwrap() as i64;
            (1..=period).find_map(|s| {
                let ok = sum_covers(t.eval(s + zero_shift), t.eval(s + one_shift), t.eval(s));
                (!ok).then(|| format!("n0={n0} n1={n1} s={s}"))
            })
        })
    });
    let pairs = n_max as u64 * (n_max as u64 - 1) / 2;
    outcome(Check::NoGap, pairs * period as u64, cx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{FTable, LgTables, TableConfig};

    fn reference_tables() -> TableSet {
        TableSet::build(TableConfig::new(16, 32, 32).unwrap()).unwrap()
    }

    #[test]
    fn built_tables_pass() {
        let report = validate_tables(&reference_tables());
        assert!(report.passed(), "{report}");
        assert_eq!(report.checks.len(), 5);
    }

    #[test]
    fn tampered_divide_table_is_caught() {
        let t = reference_tables();
        let mut minus = t.lg().minus_entries().to_vec();
        minus[1] += 5;
        let lg = LgTables::from_entries(t.lg().plus_entries().to_vec(), minus).unwrap();
        let bad = TableSet::from_parts(*t.config(), t.f().clone(), lg).unwrap();
        let report = validate_tables(&bad);
        assert!(!report.passed());
        let divide = report.outcome(Check::DivideCover).unwrap();
        assert!(
            divide.counterexample.as_ref().unwrap().starts_with("n=2 "),
            "{report}"
        );
    }

    #[test]
    fn tampered_multiply_table_is_caught() {
        let t = reference_tables();
        let mut plus = t.lg().plus_entries().to_vec();
        plus[2] -= 3;
        let lg = LgTables::from_entries(plus, t.lg().minus_entries().to_vec()).unwrap();
        let f = FTable::build(t.config()).unwrap();
        let bad = TableSet::from_parts(*t.config(), f, lg).unwrap();
        let report = validate_tables(&bad);
        assert!(!report.outcome(Check::MultiplyCover).unwrap().passed());
        assert!(!report.outcome(Check::RoundingDirection).unwrap().passed());
    }

    #[test]
    fn sum_cover_handles_wide_spreads() {
        let big = DyadicValue {
            mantissa: 1,
            exponent: -200,
        };
        let small = DyadicValue {
            mantissa: 3,
            exponent: 10,
        };
        assert!(sum_covers(big, small, big));
        assert!(!sum_covers(small, small, big));
    }
}
