//! Acceptance scorecard. Prints one PASS/FAIL line per criterion and exits nonzero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::Duration;

use logccdm::analysis::{
    self, fp_precision_profile, least_squares_slope, log_span_profile, CompositionRule,
};
use logccdm::fp_ccdm::{self, fp_dematch, fp_interval, fp_match};
use logccdm::tables::{self, validate_tables};
use logccdm::verify::{fuzz_modes, verify_small};
use logccdm::{
    CcSequence, Composition, IndexWord, LogMatcher, RegisterMode, TableConfig, TableSet,
};
use logccdm_repro::{check, equal, within, Check, Criterion};
use num_bigint::BigInt;
use num_rational::BigRational;

const SECOND: Duration = Duration::from_secs(1);
const MINUTE: Duration = Duration::from_secs(60);
const GUARD: u32 = RegisterMode::DEFAULT_GUARD;
const TRIALS: usize = 1000;

fn seq(bits: &str) -> CcSequence {
    CcSequence::new(bits.bytes().map(|b| b - b'0').collect()).unwrap()
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn comp(n0: u32, n1: u32) -> Composition {
    Composition::new(n0, n1).unwrap()
}

fn build(s: u32, m: u32, n_max: u32) -> TableSet {
    TableSet::build(TableConfig::new(s, m, n_max).unwrap()).unwrap()
}

fn worked_example() -> Vec<Check> {
    let c = comp(3, 2);
    let v = IndexWord::from_u64(0b110, 3).unwrap();
    let mut checks = vec![
        equal("k_max", fp_ccdm::k_max(&c), 3),
        equal(
            "match 110",
            fp_match(&v, &c).map(|x| x.to_string()),
            Ok("10010".into()),
        ),
        equal(
            "dematch 10010",
            fp_dematch(&seq("10010"), &c).map(|v| v.to_string()),
            Ok("110".into()),
        ),
    ];
    for (x, lo, hi) in [
        ("01010", ratio(2, 5), ratio(1, 2)),
        ("11000", ratio(9, 10), ratio(1, 1)),
    ] {
        let (base, width) = fp_interval(&seq(x), &c).unwrap();
        let right_interval = base == lo && &base + &width == hi;
        let no_point = (0..8).map(|j| ratio(j, 8)).all(|p| p < lo || p >= hi);
        let rejected = fp_dematch(&seq(x), &c).is_err();
        checks.push(check(
            format!("unused [{lo},{hi})"),
            right_interval && no_point && rejected,
            format!("interval {right_interval}, empty {no_point}, rejected {rejected}"),
        ));
    }
    checks
}

const PLOTTED_F: [f64; 32] = [
    31.0, 30.0, 29.0, 27.0, 26.0, 25.0, 24.0, 23.0, 22.0, 21.0, 20.0, 20.0, 19.0, 18.0, 17.0, 16.0,
    15.5, 15.0, 14.5, 13.5, 13.0, 12.5, 12.0, 11.5, 11.0, 10.5, 10.0, 10.0, 9.5, 9.0, 8.5, 8.0,
];
const PLOTTED_LG_PLUS: [u32; 32] = [
    1, 16, 26, 32, 38, 42, 46, 48, 52, 54, 57, 58, 61, 62, 64, 64, 67, 68, 69, 70, 72, 73, 74, 74,
    76, 77, 78, 78, 79, 80, 80, 80,
];
const PLOTTED_LG_MINUS: [u32; 32] = [
    0, 14, 24, 30, 35, 40, 44, 46, 49, 51, 54, 56, 58, 60, 61, 62, 64, 65, 66, 67, 69, 70, 71, 72,
    73, 74, 75, 76, 76, 77, 78, 78,
];

fn reference_tables() -> Vec<Check> {
    let t = build(16, 32, 32);
    let f: Vec<f64> = (1..=32).map(|s| t.eval(s).to_f64()).collect();
    let f_diff: Vec<_> = (1..=32).filter(|&s| f[s - 1] != PLOTTED_F[s - 1]).collect();
    // Lg+(1) follows the min-shift definition (0), not the plotted 1.
    let plus_diff: Vec<_> = (2..=32u32)
        .filter(|&n| t.lg().plus(n) != Some(PLOTTED_LG_PLUS[n as usize - 1]))
        .collect();
    let minus_diff: Vec<_> = (1..=32u32)
        .filter(|&n| t.lg().minus(n) != PLOTTED_LG_MINUS[n as usize - 1])
        .collect();
    vec![
        check(
            "F(1..32)",
            f_diff.is_empty(),
            format!("mismatches at s = {f_diff:?}; F(17) = {}", f[16]),
        ),
        check(
            "Lg+(2..32)",
            plus_diff.is_empty(),
            format!("mismatches at n = {plus_diff:?}"),
        ),
        check(
            "Lg-(1..32)",
            minus_diff.is_empty(),
            format!("mismatches at n = {minus_diff:?}"),
        ),
        equal("Lg+(1)", t.lg().plus(1), Some(0)),
    ]
}

fn table_properties(large: &TableSet) -> Vec<Check> {
    [build(16, 32, 32), large.clone()]
        .iter()
        .map(|t| {
            let report = validate_tables(t);
            let cases: u64 = report.checks.iter().map(|c| c.evaluated).sum();
            let detail = match report.first_failure() {
                None => format!("{cases} cases"),
                Some(f) => format!(
                    "{} at {}",
                    f.check,
                    f.counterexample.as_deref().unwrap_or("")
                ),
            };
            check(format!("{}", t.config()), report.passed(), detail)
        })
        .collect()
}

fn exhaustive_invertibility() -> Vec<Check> {
    let mut checks = Vec::new();
    for (s, m) in [(16, 32), (512, 1024)] {
        let t = build(s, m, 16);
        let r = verify_small(&t, 14);
        checks.push(check(
            format!("roundtrip/composition/injectivity S={s} M={m}"),
            r.invertible(),
            format!(
                "{} compositions, {} fp + {} log indices, {} failures",
                r.compositions, r.fp_indices, r.log_indices, r.failure_count
            ),
        ));
        checks.push(check(
            format!("image containment S={s} M={m}"),
            r.image_contained(),
            format!(
                "{} of {} log outputs never produced by fp{}",
                r.containment_misses,
                r.log_indices,
                r.containment_examples
                    .first()
                    .map(|e| format!(", e.g. {e}"))
                    .unwrap_or_default()
            ),
        ));
    }
    checks
}

fn rate_reproduction(large: &TableSet) -> Vec<Check> {
    let rule = CompositionRule::default();
    let r512 = analysis::sweep_record(1024, large, rule).unwrap();
    let r128 = analysis::sweep_record(1024, &build(128, 1024, 1024), rule).unwrap();
    let c = comp(768, 256);
    vec![
        within("k/N S=512", r512.rate, 0.7988, 0.003),
        within("gap S=512", r512.gap_to_fp, 0.007, 0.005),
        within("gap S=128", r128.gap_to_fp, 0.03, 0.01),
        check("k_max", (825..=826).contains(&r512.k_max), r512.k_max),
        within(
            "log2|C|/N",
            fp_ccdm::log2_cc_count(&c) / 1024.0,
            0.8063,
            0.0005,
        ),
        within(
            "H(0.75)",
            analysis::binary_entropy(0.75).unwrap(),
            0.8113,
            0.0001,
        ),
    ]
}

fn storage_accounting() -> Vec<Check> {
    let bytes = tables::storage_bytes(512, 1024, 1024).unwrap();
    vec![
        equal(
            "storage bits",
            tables::storage_bits(512, 1024, 1024).unwrap(),
            30351,
        ),
        equal("storage bytes", bytes, 3794),
        equal(
            "storage kB",
            format!("{:.2}", bytes as f64 / 1000.0),
            "3.79".to_string(),
        ),
        equal(
            "precision bits",
            analysis::precision_bits(1024, 1024).unwrap(),
            20,
        ),
    ]
}

fn bounded_register(large: &TableSet) -> Vec<Check> {
    let m = LogMatcher::new(large, comp(768, 256)).unwrap();
    let r = fuzz_modes(&m, TRIALS, 0x7e0);
    let limit = m.precision_bits() + GUARD;
    vec![
        equal("trials", r.trials, TRIALS),
        check(
            "audits",
            r.failures.is_empty(),
            format!("{} fired{}", r.failures.len(), first(&r.failures)),
        ),
        check(
            "window watermark",
            r.max_window_span <= limit,
            format!("{} bits (limit {limit})", r.max_window_span),
        ),
        check(
            "subtraction span",
            r.max_span <= m.precision_bits(),
            format!("{} bits", r.max_span),
        ),
    ]
}

fn first(failures: &[String]) -> String {
    failures
        .first()
        .map(|f| format!(", first: {f}"))
        .unwrap_or_default()
}

fn mode_equivalence(large: &TableSet) -> Vec<Check> {
    [(192, 64, 0x256), (768, 256, 0x1024)]
        .into_iter()
        .map(|(n0, n1, seed)| {
            let m = LogMatcher::new(large, comp(n0, n1)).unwrap();
            let r = fuzz_modes(&m, TRIALS, seed);
            check(
                format!("N={}", n0 + n1),
                r.failures.is_empty() && r.trials == TRIALS,
                format!(
                    "{} trials, {} mismatches{}",
                    r.trials,
                    r.failures.len(),
                    first(&r.failures)
                ),
            )
        })
        .collect()
}

fn precision_contrast(large: &TableSet) -> Vec<Check> {
    let lengths = [64, 128, 256, 512];
    let rule = CompositionRule::default();
    let fp = fp_precision_profile(&lengths, rule).unwrap();
    let points: Vec<_> = fp.iter().map(|p| (p.n as f64, p.max_bits as f64)).collect();
    let slope = least_squares_slope(&points);
    let mut checks = vec![check(
        "fp bits/symbol",
        slope >= 0.5,
        format!(
            "{slope:.2} ({})",
            fp.iter()
                .map(|p| format!("N={}:{}", p.n, p.max_bits))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    )];
    let spans = log_span_profile(&lengths, large, rule, 100, 0x9).unwrap();
    for p in spans {
        let limit = p.span_limit + GUARD;
        checks.push(check(
            format!("log watermark N={}", p.n),
            p.max_window_span <= limit,
            format!("{} bits (limit {limit})", p.max_window_span),
        ));
    }
    checks
}

fn main() -> ExitCode {
    let large = build(512, 1024, 1024);
    let criteria = [
        Criterion::run(1, "worked example", SECOND, worked_example),
        Criterion::run(2, "reference tables", SECOND, reference_tables),
        Criterion::run(3, "table properties", MINUTE, || table_properties(&large)),
        Criterion::run(
            4,
            "exhaustive invertibility",
            5 * MINUTE,
            exhaustive_invertibility,
        ),
        Criterion::run(5, "rate at N=1024", MINUTE, || rate_reproduction(&large)),
        Criterion::run(6, "storage and precision", SECOND, storage_accounting),
        Criterion::run(7, "bounded register", 2 * MINUTE, || {
            bounded_register(&large)
        }),
        Criterion::run(8, "mode equivalence", 2 * MINUTE, || {
            mode_equivalence(&large)
        }),
        Criterion::run(9, "precision growth", 2 * MINUTE, || {
            precision_contrast(&large)
        }),
    ];
    for c in &criteria {
        println!("{c}");
    }
    let failed: Vec<_> = criteria
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.number.to_string())
        .collect();
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
