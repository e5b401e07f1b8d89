//! Command-line driver.
//!
//! Every command writes either human-readable lines or, with `--json`, one
//! JSON object per line carrying `"schema": 1`. Reports contain no
//! timestamps or timings unless `--timing` is given, so a fixed command,
//! seed and input always produce byte-identical output.
//!
//! Exit status: 0 when the check passes or the answer is "yes", 1 when it
//! fails or the answer is "no", 2 on usage or input errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::construction::{build_e1_pair, build_p0, BasePair};
use crate::field::{FieldCtx, FieldError};
use crate::io::{self, IoError};
use crate::lemma::{verify_lemma1, LemmaError};
use crate::matrix::Mat;
use crate::pair::{check_admissible, check_n23, eval_poly_pair, MatPair, PairError, QuadCoeffs};
use crate::sample::{random_e1_base, random_invertible, random_matrix, random_quad, rng_from_seed};
use crate::similarity::{Engine, SimilarityError, SimilarityVerdict};
use crate::theorem::{lift_check, verify_converse, verify_e1_wildness, TheoremError, TheoremInstance};

pub const SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "PAIRLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Certified answers: exhaustive or graded search of intertwiners.
    Exhaustive,
    /// Random sampling of intertwiners with a failure bound.
    Random,
}

impl Mode {
    fn strategy(self) -> &'static str {
        match self {
            Mode::Exhaustive => "auto",
            Mode::Random => "random",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pairlab",
    version,
    about = "Similarity of commuting nilpotent matrix pairs over GF(p)"
)]
pub struct RunConfig {
    /// Prime modulus for generated instances.
    #[arg(long, global = true, default_value_t = 2)]
    pub field: u64,
    /// Base size for generated instances.
    #[arg(long, global = true, default_value_t = 1)]
    pub n: usize,
    /// Number of generated instances.
    #[arg(long, global = true, default_value_t = 10)]
    pub trials: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exhaustive)]
    pub mode: Mode,
    /// Random trials per intertwiner search.
    #[arg(long, global = true, default_value_t = 64)]
    pub budget: u64,
    /// Emit JSON lines.
    #[arg(long, global = true)]
    pub json: bool,
    /// Add wall-clock timings to reports (breaks byte-reproducibility).
    #[arg(long, global = true)]
    pub timing: bool,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the 13n x 13n pair from a base pair file (or a random
    /// unipotent base).
    BuildP0 { base: Option<PathBuf> },
    /// Build the 3n x 3n unitriangular pair from a base pair file (or a
    /// random unipotent base).
    BuildE1 { base: Option<PathBuf> },
    /// Check A^2 = 0, B^3 = 0, AB^2 = 0 and AB = BA.
    CheckN23 { pair: PathBuf },
    /// Apply polynomials f, g (files of `coeff i j` lines) to a pair.
    PolyApply { pair: PathBuf, f: PathBuf, g: PathBuf },
    /// Decide simultaneous similarity of two pairs.
    Similar { left: PathBuf, right: PathBuf },
    /// Decide polynomial similarity of two pairs.
    PolySimilar { left: PathBuf, right: PathBuf },
    /// Check the normalising conjugation chain on random instances.
    VerifyLemma1,
    /// Compare base similarity with polynomial similarity of the 13n x 13n
    /// pairs on random unipotent instances.
    VerifyTheorem,
    /// Compare base similarity with similarity of the 3n x 3n pairs on
    /// random unipotent instances.
    VerifyE1,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::BuildP0 { .. } => "build-p0",
            Command::BuildE1 { .. } => "build-e1",
            Command::CheckN23 { .. } => "check-n23",
            Command::PolyApply { .. } => "poly-apply",
            Command::Similar { .. } => "similar",
            Command::PolySimilar { .. } => "poly-similar",
            Command::VerifyLemma1 => "verify-lemma1",
            Command::VerifyTheorem => "verify-theorem",
            Command::VerifyE1 => "verify-e1",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Pair(#[from] PairError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Lemma(#[from] LemmaError),
    #[error(transparent)]
    Theorem(#[from] TheoremError),
    #[error("cannot serialise report: {0}")]
    Json(#[from] serde_json::Error),
}

/// Finished command: text to emit and exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub output: String,
    pub code: i32,
}

fn rows(m: &Mat) -> Vec<Vec<u32>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

#[derive(Serialize)]
struct PairRecord<'a> {
    schema: u32,
    command: &'a str,
    p: u32,
    size: usize,
    a: Vec<Vec<u32>>,
    b: Vec<Vec<u32>>,
}

fn pair_record<'a>(command: &'a str, pair: &MatPair) -> PairRecord<'a> {
    PairRecord {
        schema: SCHEMA,
        command,
        p: pair.ctx().modulus(),
        size: pair.size(),
        a: rows(pair.a()),
        b: rows(pair.b()),
    }
}

#[derive(Serialize)]
struct VerdictRecord<'a> {
    schema: u32,
    command: &'a str,
    verdict: &'static str,
    certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<Vec<u32>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<QuadCoeffs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tried: Option<u64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: u32,
    command: &'a str,
    summary: bool,
    p: u32,
    n: usize,
    seed: u64,
    trials: u64,
    passed: u64,
    failed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u64>,
}

struct Report {
    json: bool,
    text: String,
}

impl Report {
    fn record<T: Serialize>(&mut self, record: &T, human: impl FnOnce() -> String) -> Result<(), CliError> {
        if self.json {
            self.text.push_str(&serde_json::to_string(record)?);
        } else {
            self.text.push_str(&human());
        }
        self.text.push('\n');
        Ok(())
    }
}

fn elapsed_ms(cfg: &RunConfig, start: Instant) -> Option<u64> {
    cfg.timing.then(|| start.elapsed().as_millis() as u64)
}

fn engine(cfg: &RunConfig) -> Engine {
    Engine::default()
        .with_strategy(cfg.mode.strategy())
        .with_budget(cfg.budget)
        .with_seed(cfg.seed)
}

fn generated_ctx(cfg: &RunConfig) -> Result<FieldCtx, CliError> {
    if cfg.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    Ok(FieldCtx::new(cfg.field)?)
}

fn load_base(cfg: &RunConfig, path: &Option<PathBuf>) -> Result<BasePair, CliError> {
    match path {
        Some(p) => Ok(io::parse_base(&io::read_file(p)?)?),
        None => {
            let ctx = generated_ctx(cfg)?;
            Ok(random_e1_base(&mut rng_from_seed(cfg.seed), ctx, cfg.n))
        }
    }
}

fn load_pair(path: &std::path::Path) -> Result<MatPair, CliError> {
    Ok(io::parse_pair(&io::read_file(path)?)?)
}

fn emit_pair(cfg: &RunConfig, pair: &MatPair) -> Result<String, CliError> {
    if cfg.json {
        Ok(serde_json::to_string(&pair_record(cfg.command.name(), pair))? + "\n")
    } else {
        Ok(io::write_pair(pair))
    }
}

fn verdict_record<'a>(command: &'a str, v: &SimilarityVerdict) -> Result<VerdictRecord<'a>, CliError> {
    let mut r = VerdictRecord {
        schema: SCHEMA,
        command,
        verdict: v.label(),
        certified: v.is_certified(),
        certificate: None,
        failure_bound: None,
        witness: v.witness().map(rows),
        q: None,
        tried: None,
    };
    match v {
        SimilarityVerdict::NotSimilarCertified(c) => r.certificate = Some(serde_json::to_value(c)?),
        SimilarityVerdict::NotSimilarProbabilistic { failure_bound, .. } => r.failure_bound = Some(*failure_bound),
        _ => {}
    }
    Ok(r)
}

fn describe_verdict(v: &SimilarityVerdict) -> String {
    match v {
        SimilarityVerdict::Similar { witness } => {
            format!("similar\nwitness:\n{}", io::write_matrix(witness).trim_end())
        }
        SimilarityVerdict::NotSimilarCertified(c) => {
            format!(
                "not similar (certified: {})",
                serde_json::to_string(c).unwrap_or_default()
            )
        }
        SimilarityVerdict::NotSimilarProbabilistic { trials, failure_bound } => {
            format!("not similar (probabilistic: {trials} trials, failure bound {failure_bound:.3e})")
        }
        SimilarityVerdict::Inconclusive { reason } => format!("inconclusive: {reason}"),
    }
}

/// Runs one parsed command.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let name = cfg.command.name();
    let mut report = Report {
        json: cfg.json,
        text: String::new(),
    };
    let code = match &cfg.command {
        Command::BuildP0 { base } => {
            let base = load_base(cfg, base)?;
            let p0 = build_p0(&base).map_err(|e| CliError::Usage(e.to_string()))?;
            report.text = emit_pair(cfg, &p0.pair)?;
            0
        }
        Command::BuildE1 { base } => {
            let base = load_base(cfg, base)?;
            report.text = emit_pair(cfg, &build_e1_pair(&base))?;
            0
        }
        Command::CheckN23 { pair } => {
            let pair = load_pair(pair)?;
            let ok = check_n23(&pair);
            #[derive(Serialize)]
            struct R<'a> {
                schema: u32,
                command: &'a str,
                n23: bool,
            }
            report.record(
                &R {
                    schema: SCHEMA,
                    command: name,
                    n23: ok,
                },
                || format!("n23: {ok}"),
            )?;
            i32::from(!ok)
        }
        Command::PolyApply { pair, f, g } => {
            let pair = load_pair(pair)?;
            let ctx = pair.ctx();
            let f = io::parse_poly(ctx, &io::read_file(f)?)?;
            let g = io::parse_poly(ctx, &io::read_file(g)?)?;
            if !check_admissible(&f, &g) {
                report.text = "not admissible: f and g need zero constant terms and linear parts \
                               a x and c x + b y with a, b nonzero\n"
                    .into();
                1
            } else {
                let image = MatPair::new(eval_poly_pair(&f, &pair)?, eval_poly_pair(&g, &pair)?)?;
                report.text = emit_pair(cfg, &image)?;
                0
            }
        }
        Command::Similar { left, right } => {
            let (p1, p2) = (load_pair(left)?, load_pair(right)?);
            let v = engine(cfg).are_similar_pairs(&p1, &p2)?;
            report.record(&verdict_record(name, &v)?, || describe_verdict(&v))?;
            i32::from(!v.is_similar())
        }
        Command::PolySimilar { left, right } => {
            let (p1, p2) = (load_pair(left)?, load_pair(right)?);
            let r = engine(cfg).are_poly_similar(&p1, &p2)?;
            let rec = VerdictRecord {
                schema: SCHEMA,
                command: name,
                verdict: if r.similar { "similar" } else { "not-similar" },
                certified: r.certified,
                certificate: None,
                failure_bound: None,
                witness: r.witness.as_ref().map(|(_, s)| rows(s)),
                q: r.witness.as_ref().map(|(q, _)| *q),
                tried: Some(r.tried),
            };
            report.record(&rec, || match &r.witness {
                Some((q, s)) => format!(
                    "polynomially similar via {:?} after {} substitutions\nwitness:\n{}",
                    q.enumeration_key(),
                    r.tried,
                    io::write_matrix(s).trim_end()
                ),
                None => format!(
                    "not polynomially similar ({}; {} substitutions)",
                    if r.certified { "certified" } else { "uncertified" },
                    r.tried
                ),
            })?;
            i32::from(!r.similar)
        }
        Command::VerifyLemma1 => run_verify_lemma1(cfg, &mut report)?,
        Command::VerifyTheorem => run_verify_theorem(cfg, &mut report)?,
        Command::VerifyE1 => run_verify_e1(cfg, &mut report)?,
    };
    Ok(Outcome {
        output: report.text,
        code,
    })
}

fn summary<'a>(cfg: &RunConfig, command: &'a str, ctx: FieldCtx, passed: u64, start: Instant) -> Summary<'a> {
    Summary {
        schema: SCHEMA,
        command,
        summary: true,
        p: ctx.modulus(),
        n: cfg.n,
        seed: cfg.seed,
        trials: cfg.trials,
        passed,
        failed: cfg.trials - passed,
        elapsed_ms: elapsed_ms(cfg, start),
    }
}

fn finish(report: &mut Report, s: &Summary) -> Result<i32, CliError> {
    report.record(s, || format!("{}: {}/{} passed", s.command, s.passed, s.trials))?;
    Ok(i32::from(s.failed > 0))
}

fn run_verify_lemma1(cfg: &RunConfig, report: &mut Report) -> Result<i32, CliError> {
    #[derive(Serialize)]
    struct R<'a> {
        schema: u32,
        command: &'a str,
        trial: u64,
        q: QuadCoeffs,
        passed: bool,
        failures: Vec<String>,
    }
    let ctx = generated_ctx(cfg)?;
    let start = Instant::now();
    let mut rng = rng_from_seed(cfg.seed);
    let mut passed = 0;
    for trial in 0..cfg.trials {
        let base = BasePair::new(
            random_matrix(&mut rng, ctx, cfg.n, cfg.n),
            random_matrix(&mut rng, ctx, cfg.n, cfg.n),
        )
        .expect("square, n >= 1");
        let q = random_quad(&mut rng, ctx);
        let (ok, failures) = match verify_lemma1(&base, &q) {
            Ok(trace) => {
                let f: Vec<String> = trace
                    .failures()
                    .map(|c| format!("{} {:?} {}", c.stage, c.block, c.expectation))
                    .collect();
                (trace.passed(), f)
            }
            Err(e) => (false, vec![e.to_string()]),
        };
        passed += u64::from(ok);
        let rec = R {
            schema: SCHEMA,
            command: "verify-lemma1",
            trial,
            q,
            passed: ok,
            failures,
        };
        report.record(&rec, || {
            let mut s = format!(
                "trial {trial}: q = {:?} {}",
                q.enumeration_key(),
                if ok { "pass" } else { "FAIL" }
            );
            for f in &rec.failures {
                let _ = write!(s, "\n  {f}");
            }
            s
        })?;
    }
    finish(report, &summary(cfg, "verify-lemma1", ctx, passed, start))
}

fn run_verify_theorem(cfg: &RunConfig, report: &mut Report) -> Result<i32, CliError> {
    #[derive(Serialize)]
    struct R<'a> {
        schema: u32,
        command: &'a str,
        trial: u64,
        kind: &'static str,
        base_verdict: &'static str,
        poly_similar: bool,
        poly_certified: bool,
        substitutions_tried: u64,
        witness_q: Option<QuadCoeffs>,
        scalar_law: Option<bool>,
        proof_equations: Option<bool>,
        recovered: Option<bool>,
        lift_replayed: Option<bool>,
        passed: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        error: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        elapsed_ms: Option<u64>,
    }
    let ctx = generated_ctx(cfg)?;
    let start = Instant::now();
    let engine = engine(cfg);
    let mut rng = rng_from_seed(cfg.seed);
    let mut passed = 0;
    for trial in 0..cfg.trials {
        let t0 = Instant::now();
        let b1 = random_e1_base(&mut rng, ctx, cfg.n);
        let (kind, b2, x) = if trial % 2 == 0 {
            let x = random_invertible(&mut rng, ctx, cfg.n);
            ("conjugate", b1.conjugate(&x).expect("invertible"), Some(x))
        } else {
            ("independent", random_e1_base(&mut rng, ctx, cfg.n), None)
        };
        let inst = TheoremInstance::new(b1, b2)?;
        let mut rec = R {
            schema: SCHEMA,
            command: "verify-theorem",
            trial,
            kind,
            base_verdict: "",
            poly_similar: false,
            poly_certified: false,
            substitutions_tried: 0,
            witness_q: None,
            scalar_law: None,
            proof_equations: None,
            recovered: None,
            lift_replayed: None,
            passed: false,
            error: None,
            elapsed_ms: None,
        };
        let lift_ok = x.as_ref().map(|x| lift_check(&inst, x).is_ok());
        rec.lift_replayed = lift_ok;
        match verify_converse(&inst, &engine) {
            Ok(r) => {
                rec.base_verdict = r.base.label();
                rec.poly_similar = r.poly.similar;
                rec.poly_certified = r.poly.certified;
                rec.substitutions_tried = r.poly.tried;
                rec.witness_q = r.poly.witness.as_ref().map(|(q, _)| *q);
                rec.scalar_law = rec.witness_q.map(|q| q.satisfies_scalar_law());
                rec.proof_equations = r.trace.as_ref().map(|t| t.all_hold());
                rec.recovered = r.trace.as_ref().map(|_| true);
                let certified_ok = cfg.mode == Mode::Random || r.certified();
                rec.passed = r.consistent() && certified_ok && lift_ok != Some(false);
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec.elapsed_ms = elapsed_ms(cfg, t0);
        passed += u64::from(rec.passed);
        report.record(&rec, || {
            format!(
                "trial {trial} ({kind}): base {}, poly-similar {} ({}), witness {:?} {}{}",
                rec.base_verdict,
                rec.poly_similar,
                if rec.poly_certified { "certified" } else { "uncertified" },
                rec.witness_q.map(|q| q.enumeration_key()),
                if rec.passed { "pass" } else { "FAIL" },
                rec.error.as_deref().map(|e| format!(": {e}")).unwrap_or_default()
            )
        })?;
    }
    finish(report, &summary(cfg, "verify-theorem", ctx, passed, start))
}

fn run_verify_e1(cfg: &RunConfig, report: &mut Report) -> Result<i32, CliError> {
    #[derive(Serialize)]
    struct R<'a> {
        schema: u32,
        command: &'a str,
        trial: u64,
        kind: &'static str,
        base_verdict: &'static str,
        lifted_verdict: &'static str,
        block_witness: Option<bool>,
        passed: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    }
    let ctx = generated_ctx(cfg)?;
    let start = Instant::now();
    let engine = engine(cfg);
    let mut rng = rng_from_seed(cfg.seed);
    let mut passed = 0;
    for trial in 0..cfg.trials {
        let b1 = random_e1_base(&mut rng, ctx, cfg.n);
        let (kind, b2) = if trial % 2 == 0 {
            let x = random_invertible(&mut rng, ctx, cfg.n);
            ("conjugate", b1.conjugate(&x).expect("invertible"))
        } else {
            ("independent", random_e1_base(&mut rng, ctx, cfg.n))
        };
        let mut rec = R {
            schema: SCHEMA,
            command: "verify-e1",
            trial,
            kind,
            base_verdict: "",
            lifted_verdict: "",
            block_witness: None,
            passed: false,
            error: None,
        };
        match verify_e1_wildness(&b1, &b2, &engine) {
            Ok(r) => {
                rec.base_verdict = r.base.label();
                rec.lifted_verdict = r.lifted.label();
                rec.block_witness = r.block_witness_ok;
                rec.passed = cfg.mode == Mode::Random || r.certified();
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        passed += u64::from(rec.passed);
        report.record(&rec, || {
            format!(
                "trial {trial} ({kind}): base {}, lifted {} {}{}",
                rec.base_verdict,
                rec.lifted_verdict,
                if rec.passed { "pass" } else { "FAIL" },
                rec.error.as_deref().map(|e| format!(": {e}")).unwrap_or_default()
            )
        })?;
    }
    finish(report, &summary(cfg, "verify-e1", ctx, passed, start))
}

/// Worker count from `PAIRLAB_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Parses arguments, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match threads_from_env() {
        Ok(Some(t)) => {
            // Fails only if a pool already exists, in which case it is kept.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    }
    match run(&cfg) {
        Ok(outcome) => {
            let written = match &cfg.out {
                Some(path) => io::write_file(path, &outcome.output).map_err(CliError::from),
                None => {
                    print!("{}", outcome.output);
                    Ok(())
                }
            };
            match written {
                Ok(()) => outcome.code,
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
