use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use logccdm::analysis::{self, CompositionRule};
use logccdm::tables::{self, TableConfig, TableSet};
use logccdm::{fp_ccdm, verify};
use logccdm::{CcSequence, Composition, ImageCheck, IndexWord, LogMatcher, RegisterMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::formats;

/// Where reports and data go; stdout and stderr in the binary, buffers in tests.
pub struct Streams<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

pub fn run(cli: Cli, io: &mut Streams<'_>) -> CliResult<()> {
    match cli.command {
        Command::Tables(TablesCommand::Build(a)) => tables_build(a, io),
        Command::Tables(TablesCommand::Export(a)) => tables_export(a, io),
        Command::Tables(TablesCommand::Validate(a)) => tables_validate(a, io),
        Command::Match(a) => run_match(a, io),
        Command::Dematch(a) => run_dematch(a, io),
        Command::GenIndex(a) => gen_index(a, io),
        Command::Sweep(a) => sweep(a, io),
        Command::Verify(a) => run_verify(a, io),
    }
}

fn report(io: &mut Streams<'_>, text: std::fmt::Arguments<'_>) -> CliResult<()> {
    io.out.write_fmt(text).map_err(|e| CliError::io(None, e))
}

fn read_input(path: Option<&Path>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    match path {
        Some(p) => buf = fs::read(p).map_err(|e| CliError::io(Some(p), e))?,
        None => {
            io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| CliError::io(None, e))?;
        }
    }
    Ok(buf)
}

fn write_output(path: Option<&Path>, bytes: &[u8], io: &mut Streams<'_>) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::io(Some(p), e)),
        None => io.out.write_all(bytes).map_err(|e| CliError::io(None, e)),
    }
}

fn load_tables(path: Option<&PathBuf>) -> CliResult<TableSet> {
    let path = path
        .ok_or_else(|| CliError::usage("no tables given; pass --tables or set LOGCCDM_TABLES"))?;
    let bytes = fs::read(path).map_err(|e| CliError::io(Some(path), e))?;
    tables::deserialize(&bytes).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn tables_build(a: BuildArgs, io: &mut Streams<'_>) -> CliResult<()> {
    let config = TableConfig::new(a.s, a.m, a.nmax)?;
    let set = TableSet::build(config)?;
    write_output(Some(&a.out), &tables::serialize(&set), io)?;
    let bits = tables::storage_bits(a.s, a.m, a.nmax)?;
    let bytes = tables::storage_bytes(a.s, a.m, a.nmax)?;
    report(io, format_args!("tables: {config}\n"))?;
    report(
        io,
        format_args!(
            "storage: {bytes} bytes ({:.2} kB, {bits} bits)\n",
            bytes as f64 / 1000.0
        ),
    )?;
    let precision =
        analysis::precision_bits(a.m, a.nmax).map_err(|e| CliError::invalid(e.to_string()))?;
    report(io, format_args!("precision: {precision} bits\n"))
}

fn tables_export(a: ExportArgs, io: &mut Streams<'_>) -> CliResult<()> {
    let set = load_tables(a.tables.tables.as_ref())?;
    let mut csv = Vec::new();
    tables::write_csv(&set, &mut csv).map_err(|e| CliError::io(None, e))?;
    write_output(a.out.as_deref(), &csv, io)
}

fn tables_validate(a: TablesPath, io: &mut Streams<'_>) -> CliResult<()> {
    let set = load_tables(a.tables.as_ref())?;
    let result = tables::validate_tables(&set);
    report(io, format_args!("{result}"))?;
    match result.first_failure() {
        None => Ok(()),
        Some(f) => Err(CliError::invalid(format!(
            "{} failed: {}",
            f.check,
            f.counterexample.as_deref().unwrap_or("")
        ))),
    }
}

fn parse_comp(text: &str) -> CliResult<Composition> {
    let bad = || CliError::usage(format!("--comp expects n0,n1 (got {text:?})"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let n0 = a.trim().parse().map_err(|_| bad())?;
    let n1 = b.trim().parse().map_err(|_| bad())?;
    Composition::new(n0, n1).map_err(|e| CliError::usage(format!("--comp: {e}")))
}

/// A configured matcher of either kind.
enum Engine<'t> {
    Fp(Composition),
    Log {
        matcher: LogMatcher<'t>,
        mode: RegisterMode,
    },
}

/// Flag checks that need no tables.
fn check_matcher_args(a: &MatcherArgs) -> CliResult<Composition> {
    let comp = parse_comp(&a.comp)?;
    if a.algo == Algo::Fp {
        if a.mode == Mode::Register {
            return Err(CliError::usage(
                "--mode register applies only to --algo log",
            ));
        }
        if a.s0.is_some() {
            return Err(CliError::usage("--s0 applies only to --algo log"));
        }
    }
    Ok(comp)
}

fn load_for(a: &MatcherArgs) -> CliResult<Option<TableSet>> {
    match a.algo {
        Algo::Fp => Ok(None),
        Algo::Log => load_tables(a.tables.tables.as_ref()).map(Some),
    }
}

impl<'t> Engine<'t> {
    fn new(a: &MatcherArgs, comp: Composition, tables: Option<&'t TableSet>) -> CliResult<Self> {
        let Some(tables) = tables else {
            return Ok(Engine::Fp(comp));
        };
        let s0 = a.s0.unwrap_or(tables.config().s as i64);
        let matcher = LogMatcher::with_start(tables, comp, s0)?;
        let mode = match a.mode {
            Mode::Exact => RegisterMode::Exact,
            Mode::Register => RegisterMode::Windowed { guard: a.guard },
        };
        Ok(Engine::Log { matcher, mode })
    }

    fn k(&self) -> usize {
        match self {
            Engine::Fp(c) => fp_ccdm::k_max(c),
            Engine::Log { matcher, .. } => matcher.params().k,
        }
    }

    fn len(&self) -> u32 {
        match self {
            Engine::Fp(c) => c.len(),
            Engine::Log { matcher, .. } => matcher.composition().len(),
        }
    }

    fn forward(&self, v: &IndexWord) -> CliResult<CcSequence> {
        Ok(match self {
            Engine::Fp(c) => fp_ccdm::fp_match(v, c)?,
            Engine::Log { matcher, mode } => matcher.match_index(v, *mode)?,
        })
    }

    fn inverse(&self, x: &CcSequence, check: ImageCheck) -> CliResult<IndexWord> {
        Ok(match self {
            Engine::Fp(c) => fp_ccdm::fp_dematch(x, c)?,
            Engine::Log { matcher, mode } => matcher.dematch(x, *mode, check)?,
        })
    }

    fn status(&self, io: &mut Streams<'_>) -> CliResult<()> {
        let (k, n) = (self.k(), self.len());
        writeln!(io.err, "k={k} N={n} rate={:.6}", k as f64 / n as f64)
            .map_err(|e| CliError::io(None, e))
    }
}

fn run_match(a: MatchArgs, io: &mut Streams<'_>) -> CliResult<()> {
    let comp = check_matcher_args(&a.matcher)?;
    let tables = load_for(&a.matcher)?;
    let engine = Engine::new(&a.matcher, comp, tables.as_ref())?;
    let v = formats::decode_index(&read_input(a.input.as_deref())?, engine.k(), a.hex)?;
    let x = engine.forward(&v)?;
    write_output(
        a.out.as_deref(),
        &formats::encode_sequence(&x, a.packed),
        io,
    )?;
    engine.status(io)
}

fn run_dematch(a: DematchArgs, io: &mut Streams<'_>) -> CliResult<()> {
    let comp = check_matcher_args(&a.matcher)?;
    let tables = load_for(&a.matcher)?;
    let engine = Engine::new(&a.matcher, comp, tables.as_ref())?;
    let x = formats::decode_sequence(
        &read_input(a.input.as_deref())?,
        engine.len() as usize,
        a.packed,
    )?;
    let check = if a.lenient {
        ImageCheck::Lenient
    } else {
        ImageCheck::Strict
    };
    let v = engine.inverse(&x, check)?;
    write_output(a.out.as_deref(), &formats::encode_index(&v, a.hex), io)?;
    engine.status(io)
}

fn gen_index(a: GenIndexArgs, io: &mut Streams<'_>) -> CliResult<()> {
    let comp = check_matcher_args(&a.matcher)?;
    let tables = load_for(&a.matcher)?;
    let engine = Engine::new(&a.matcher, comp, tables.as_ref())?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let v = analysis::random_index(&mut rng, engine.k());
    write_output(a.out.as_deref(), &formats::encode_index(&v, a.hex), io)
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{flag}: cannot parse {t:?}")))
        })
        .collect()
}

fn sweep(a: SweepArgs, io: &mut Streams<'_>) -> CliResult<()> {
    let pairs = a
        .pairs
        .split(',')
        .map(|p| {
            let (s, m) = p
                .split_once(':')
                .ok_or_else(|| CliError::usage(format!("--pairs expects S:M (got {p:?})")))?;
            Ok((
                parse_list::<u32>("--pairs", s)?[0],
                parse_list::<u32>("--pairs", m)?[0],
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let lengths: Vec<u32> = parse_list("--nlist", &a.nlist)?;
    if lengths.contains(&0) {
        return Err(CliError::usage("--nlist: block lengths must be positive"));
    }
    let rule = CompositionRule::new(a.p1).map_err(|e| CliError::usage(format!("--p1: {e}")))?;
    let results = analysis::rate_sweep(&lengths, &pairs, rule)
        .map_err(|e| CliError::invalid(e.to_string()))?;

    let mut ok = Vec::new();
    let mut failed = 0;
    for r in results {
        match r {
            Ok(rec) => ok.push(rec),
            Err(f) => {
                failed += 1;
                writeln!(
                    io.err,
                    "failed: N={} S={} M={}: {}",
                    f.n, f.s, f.m, f.reason
                )
                .map_err(|e| CliError::io(None, e))?;
            }
        }
    }
    let mut csv = Vec::new();
    analysis::write_sweep_csv(&ok, &mut csv).map_err(|e| CliError::io(None, e))?;
    write_output(a.out.as_deref(), &csv, io)?;
    if failed > 0 {
        return Err(CliError::invalid(format!("{failed} sweep points failed")));
    }
    Ok(())
}

fn run_verify(a: VerifyArgs, io: &mut Streams<'_>) -> CliResult<()> {
    let set = match a.tables.as_ref() {
        Some(_) => load_tables(a.tables.as_ref())?,
        None => {
            let n_max = a.nmax.max(a.fuzz_len).max(32).next_power_of_two();
            TableSet::build(TableConfig::new(16, 32, n_max)?)?
        }
    };
    let n_max = set.config().n_max;
    if a.nmax > n_max {
        return Err(CliError::usage(format!(
            "--nmax {} exceeds the tables' n_max {n_max}",
            a.nmax
        )));
    }
    if a.trials > 0 && a.fuzz_len > n_max {
        return Err(CliError::usage(format!(
            "--fuzz-len {} exceeds the tables' n_max {n_max}",
            a.fuzz_len
        )));
    }

    report(io, format_args!("tables: {}\n", set.config()))?;
    let result = verify::verify_small(&set, a.nmax);
    report(io, format_args!("{result}"))?;
    let mut problems = Vec::new();
    if !result.invertible() {
        problems.push(format!(
            "{} invertibility failures",
            result.failure_count + !result.tables.passed() as usize
        ));
    }

    if a.trials > 0 {
        let comp = CompositionRule::default()
            .composition(a.fuzz_len)
            .map_err(|e| CliError::usage(e.to_string()))?;
        let matcher = LogMatcher::new(&set, comp)?;
        let fuzz = verify::fuzz_modes(&matcher, a.trials, a.seed);
        report(
            io,
            format_args!(
                "fuzz {comp}: {} trials, span {} / window {} / adder {} bits (limit {}), failures: {}\n",
                fuzz.trials,
                fuzz.max_span,
                fuzz.max_window_span,
                fuzz.max_adder_span,
                matcher.window_width(RegisterMode::DEFAULT_GUARD),
                fuzz.failures.len()
            ),
        )?;
        for f in fuzz.failures.iter().take(16) {
            report(io, format_args!("  {f}\n"))?;
        }
        if !fuzz.failures.is_empty() {
            problems.push(format!("{} fuzz failures", fuzz.failures.len()));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::invalid(problems.join(", ")))
    }
}
