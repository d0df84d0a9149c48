use crate::composition::Composition;
use crate::tables::{DyadicValue, TableSet};

use super::LogError;

/// Offline parameters of one `(composition, tables, s0)` matcher.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatcherParams {
    /// Starting width exponent; the initial width is `F(s0)`.
    pub s0: i64,
    /// Total log-domain width consumed along any path.
    pub gamma: i64,
    /// Index length in bits, `floor(gamma / S)`.
    pub k: usize,
    /// Final width exponent `s0 + gamma`, the same for every sequence.
    pub s_final: i64,
    /// `floor(log2(F(s0) / F(s0 + gamma)))`, computed independently of `k`.
    pub k_from_ratio: i64,
}

impl MatcherParams {
    pub fn rate(&self, comp: &Composition) -> f64 {
        self.k as f64 / comp.len() as f64
    }
}

/// `sum_{i<=N} Lg-(i) - sum_{j<=n0} Lg+(j) - sum_{t<=n1} Lg+(t)`.
pub fn gamma(comp: &Composition, tables: &TableSet) -> i64 {
    let lg = tables.lg();
    let minus: i64 = (1..=comp.len()).map(|i| lg.minus(i) as i64).sum();
    let plus = |count: u32| -> i64 { (1..=count).map(|j| lg.plus(j).unwrap() as i64).sum() };
    minus - plus(comp.zeros()) - plus(comp.ones())
}

/// `floor(log2(a / b))` for positive dyadics with mantissas in `[M/2, M)`.
fn floor_log2_ratio(a: DyadicValue, b: DyadicValue) -> i64 {
    let base = b.exponent - a.exponent;
    // a.m / b.m lies in (1/2, 2).
    if a.mantissa >= b.mantissa {
        base
    } else {
        base - 1
    }
}

pub fn compute_params(
    comp: &Composition,
    tables: &TableSet,
    s0: i64,
) -> Result<MatcherParams, LogError> {
    let n_max = tables.config().n_max;
    if comp.len() > n_max {
        return Err(LogError::CompositionTooLong {
            n: comp.len(),
            n_max,
        });
    }
    let gamma = gamma(comp, tables);
    let period = tables.config().s as i64;
    let k = gamma.div_euclid(period);
    if gamma <= 0 || k == 0 {
        return Err(LogError::Unusable { comp: *comp, gamma });
    }
    let s_final = s0 + gamma;
    let start = tables.eval(s0);
    let end = tables.eval(s_final);
    let k_from_ratio = floor_log2_ratio(start, end);
    if k_from_ratio != k {
        return Err(LogError::ParamMismatch { k, k_from_ratio });
    }
    // Adjacent index points are 2^-k F(s0) apart; each interval is F(s_final) wide.
    let spacing = DyadicValue {
        mantissa: start.mantissa,
        exponent: start.exponent + k,
    };
    if spacing < end {
        return Err(LogError::SpacingViolation { k: k as usize });
    }
    Ok(MatcherParams {
        s0,
        gamma,
        k: k as usize,
        s_final,
        k_from_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::TableConfig;

    fn reference_tables() -> TableSet {
        TableSet::build(TableConfig::new(16, 32, 32).unwrap()).unwrap()
    }

    #[test]
    fn small_composition() {
        let t = reference_tables();
        let c = Composition::new(3, 2).unwrap();
        let p = compute_params(&c, &t, 16).unwrap();
        assert_eq!(p.gamma, 45);
        assert_eq!(p.k, 2);
        assert_eq!(p.s_final, 61);
        assert_eq!(p.k_from_ratio, 2);
    }

    #[test]
    fn paper_literal_start_gives_same_k() {
        let t = reference_tables();
        for c in Composition::all_up_to(32) {
            let a = compute_params(&c, &t, 16);
            let b = compute_params(&c, &t, 1);
            match (a, b) {
                (Ok(a), Ok(b)) => assert_eq!(a.k, b.k, "{c}"),
                (Err(_), Err(_)) => {}
                (a, b) => panic!("{c}: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn single_symbol_compositions_are_unusable() {
        let t = reference_tables();
        for n in 1..=32 {
            let c = Composition::new(n, 0).unwrap();
            assert!(gamma(&c, &t) <= 0);
            assert!(matches!(
                compute_params(&c, &t, 16),
                Err(LogError::Unusable { .. })
            ));
        }
    }

    #[test]
    fn too_long() {
        let t = reference_tables();
        let c = Composition::new(30, 3).unwrap();
        assert_eq!(
            compute_params(&c, &t, 16).unwrap_err(),
            LogError::CompositionTooLong { n: 33, n_max: 32 }
        );
    }
}
