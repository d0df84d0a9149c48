//! Exhaustive small-block checks and seeded large-block fuzzing.

use std::collections::HashSet;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::random_index;
use crate::composition::{CcSequence, Composition, IndexWord};
use crate::fp_ccdm;
use crate::log_ccdm::{ImageCheck, LogError, LogMatcher, RegisterMode};
use crate::tables::{validate_tables, TableSet, ValidationReport};

/// Failures kept verbatim per report; the rest are only counted.
const KEPT_FAILURES: usize = 32;

#[derive(Debug, Clone, Default)]
pub struct CompositionOutcome {
    pub comp: Option<Composition>,
    pub fp_indices: u64,
    pub log_indices: u64,
    /// Set when Log-CCDM parameters could not be formed for this composition.
    pub log_skipped: Option<String>,
    /// Log-CCDM outputs that the full-precision matcher never produces.
    pub containment_misses: u64,
    pub containment_examples: Vec<String>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub tables: ValidationReport,
    pub compositions: usize,
    pub fp_indices: u64,
    pub log_indices: u64,
    pub skipped: usize,
    /// Roundtrip, composition and injectivity failures.
    pub failure_count: usize,
    pub failures: Vec<String>,
    pub containment_misses: u64,
    /// First few containment misses.
    pub containment_examples: Vec<String>,
}

impl VerifyReport {
    /// Tables, roundtrips, compositions and injectivity.
    pub fn invertible(&self) -> bool {
        self.tables.passed() && self.failure_count == 0
    }

    /// Every Log-CCDM output is also a full-precision output.
    pub fn image_contained(&self) -> bool {
        self.containment_misses == 0
    }

    pub fn passed(&self) -> bool {
        self.invertible() && self.image_contained()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tables)?;
        writeln!(
            f,
            "compositions: {} ({} without Log-CCDM parameters), indices: fp {} / log {}",
            self.compositions, self.skipped, self.fp_indices, self.log_indices
        )?;
        writeln!(f, "failures: {}", self.failure_count)?;
        for line in &self.failures {
            writeln!(f, "  {line}")?;
        }
        writeln!(
            f,
            "image containment misses: {} of {}",
            self.containment_misses, self.log_indices
        )?;
        for line in &self.containment_examples {
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// Every check for one composition over every index.
pub fn check_composition(tables: &TableSet, comp: Composition) -> CompositionOutcome {
    let mut out = CompositionOutcome {
        comp: Some(comp),
        ..Default::default()
    };
    let mut fail = |msg: String| out.failures.push(format!("{comp}: {msg}"));

    let k_max = fp_ccdm::k_max(&comp);
    let mut fp_image = HashSet::new();
    for v in 0..1u64 << k_max {
        let v = IndexWord::from_u64(v, k_max).expect("below 2^k_max");
        match fp_ccdm::fp_match(&v, &comp) {
            Ok(x) => {
                if !x.has_composition(&comp) {
                    fail(format!("fp v={v} produced {x} with wrong composition"));
                }
                match fp_ccdm::fp_dematch(&x, &comp) {
                    Ok(back) if back == v => {}
                    other => fail(format!("fp v={v} -> {x} -> {other:?}")),
                }
                fp_image.insert(x);
            }
            Err(e) => fail(format!("fp v={v}: {e}")),
        }
    }
    if fp_image.len() as u64 != 1 << k_max {
        fail(format!(
            "fp image has {} sequences for {} indices",
            fp_image.len(),
            1u64 << k_max
        ));
    }
    let fp_indices = 1u64 << k_max;

    let matcher = match LogMatcher::new(tables, comp) {
        Ok(m) => m,
        Err(e) => {
            out.fp_indices = fp_indices;
            out.log_skipped = Some(e.to_string());
            return out;
        }
    };
    let k = matcher.params().k;
    let mut misses = Vec::new();
    let mut log_image: HashSet<CcSequence> = HashSet::new();
    for v in 0..1u64 << k {
        let v = IndexWord::from_u64(v, k).expect("below 2^k");
        let exact = matcher.match_index(&v, RegisterMode::Exact);
        let windowed = matcher.match_index(&v, RegisterMode::windowed());
        let x = match (exact, windowed) {
            (Ok(a), Ok(b)) if a == b => a,
            (a, b) => {
                fail(format!("log v={v}: exact {a:?} vs windowed {b:?}"));
                continue;
            }
        };
        if !x.has_composition(&comp) {
            fail(format!("log v={v} produced {x} with wrong composition"));
        }
        if !fp_image.contains(&x) {
            misses.push(format!(
                "{comp}: log v={v} produced {x}, which the fp matcher never outputs"
            ));
        }
        for mode in [RegisterMode::Exact, RegisterMode::windowed()] {
            match matcher.dematch(&x, mode, ImageCheck::Strict) {
                Ok(back) if back == v => {}
                other => fail(format!("log {mode:?} v={v} -> {x} -> {other:?}")),
            }
        }
        log_image.insert(x);
    }
    if log_image.len() as u64 != 1 << k {
        fail(format!(
            "log image has {} sequences for {} indices",
            log_image.len(),
            1u64 << k
        ));
    }
    out.fp_indices = fp_indices;
    out.log_indices = 1 << k;
    out.containment_misses = misses.len() as u64;
    misses.truncate(KEPT_FAILURES);
    out.containment_examples = misses;
    out
}

/// Table validation plus [`check_composition`] for every composition with `N <= max_len`.
pub fn verify_small(tables: &TableSet, max_len: u32) -> VerifyReport {
    let table_report = validate_tables(tables);
    let max_len = max_len.min(tables.config().n_max);
    let comps: Vec<_> = Composition::all_up_to(max_len).collect();
    let outcomes: Vec<_> = comps
        .par_iter()
        .map(|&c| check_composition(tables, c))
        .collect();
    let mut report = VerifyReport {
        tables: table_report,
        compositions: outcomes.len(),
        fp_indices: 0,
        log_indices: 0,
        skipped: 0,
        failure_count: 0,
        failures: Vec::new(),
        containment_misses: 0,
        containment_examples: Vec::new(),
    };
    for o in outcomes {
        report.fp_indices += o.fp_indices;
        report.log_indices += o.log_indices;
        report.skipped += o.log_skipped.is_some() as usize;
        report.containment_misses += o.containment_misses;
        report.failure_count += o.failures.len();
        let room = KEPT_FAILURES.saturating_sub(report.failures.len());
        report.failures.extend(o.failures.into_iter().take(room));
        let room = KEPT_FAILURES.saturating_sub(report.containment_examples.len());
        report
            .containment_examples
            .extend(o.containment_examples.into_iter().take(room));
    }
    report
}

/// Result of seeded random trials comparing exact and windowed Log-CCDM.
#[derive(Debug, Clone, Default)]
pub struct FuzzReport {
    pub trials: usize,
    pub max_span: u32,
    pub max_window_span: u32,
    pub max_adder_span: u32,
    pub failures: Vec<String>,
}

/// Random indices through audited matching in both modes and dematching in both modes.
pub fn fuzz_modes(matcher: &LogMatcher<'_>, trials: usize, seed: u64) -> FuzzReport {
    let k = matcher.params().k;
    let chunks: Vec<FuzzReport> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let v = random_index(&mut rng, k);
            let mut r = FuzzReport {
                trials: 1,
                ..Default::default()
            };
            let run = || -> Result<(u32, u32, u32), LogError> {
                let (a, sa) = matcher.match_audited(&v, RegisterMode::Exact)?;
                let (b, sb) = matcher.match_audited(&v, RegisterMode::windowed())?;
                if a != b {
                    return Err(LogError::InvariantBreach {
                        step: 0,
                        detail: format!("modes differ for v={v}"),
                    });
                }
                if !a.has_composition(matcher.composition()) {
                    return Err(LogError::WrongComposition(*matcher.composition()));
                }
                let va = matcher.dematch(&a, RegisterMode::Exact, ImageCheck::Lenient)?;
                let (vb, adder) =
                    matcher.dematch_traced(&a, RegisterMode::windowed(), ImageCheck::Lenient)?;
                if va != v || vb != v {
                    return Err(LogError::InvariantBreach {
                        step: 0,
                        detail: format!(
                            "dematch mismatch: exact {}, windowed {}",
                            va == v,
                            vb == v
                        ),
                    });
                }
                Ok((
                    sa.max_span.max(sb.max_span),
                    sb.max_window_span,
                    adder.unwrap_or(0),
                ))
            };
            match run() {
                Ok((span, window, adder)) => {
                    r.max_span = span;
                    r.max_window_span = window;
                    r.max_adder_span = adder;
                }
                Err(e) => r.failures.push(format!("trial {i}: {e}")),
            }
            r
        })
        .collect();
    chunks
        .into_iter()
        .fold(FuzzReport::default(), |mut acc, r| {
            acc.trials += r.trials;
            acc.max_span = acc.max_span.max(r.max_span);
            acc.max_window_span = acc.max_window_span.max(r.max_window_span);
            acc.max_adder_span = acc.max_adder_span.max(r.max_adder_span);
            acc.failures.extend(r.failures);
            acc
        })
}
