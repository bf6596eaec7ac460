//! Command-line front end: instance files, engine selection, verification,
//! and machine-readable reports.
//!
//! An instance file is line oriented.  `#` starts a comment (anywhere on a
//! line) and blank lines are skipped.  The remaining lines must appear in
//! this order:
//!
//! ```text
//! p <prime>
//! s <extension degree>      optional; defaults to 1
//! pi <s+1 residues>         modulus of F_{p^s}, required exactly when s > 1
//! E <d+1> <h+1>             followed by d+1 rows of h+1 elements each
//! rho <bound>
//! init <2*rho+1 elements>
//! N <index>
//! ```
//!
//! A field element is written as `s` residues in `[0, p)`, low degree first,
//! so each row of `E` carries `(h+1)*s` integers.  Rows run from the `y^0`
//! coefficient upward.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::christol::{digits_base_p, nth_coeff_bivariate, nth_coeff_matrix};
use crate::error::{Error, ErrorClass, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::hermite_pade::nth_coeff_hp;
use crate::poly::{BiPoly, UniPoly};
use crate::recurrence::nth_coeff_recurrence_with_stats;
use crate::series::AlgebraicInstance;

/// Verification by direct series expansion is capped at this index.
const VERIFY_LIMIT: u64 = 1_000_000;

/// Which engine computes the coefficient.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Pick by field size: the p-adic recurrence when `p > 2(dh)^2`,
    /// otherwise the structured-solver walk.
    Auto,
    /// Digit walk on bivariate polynomial states.
    Bivariate,
    /// Digit walk on precomputed section matrices.
    Matrix,
    /// Digit walk with per-digit structured linear solves.
    HermitePade,
    /// Digit walk through p-adic holonomic recurrences.
    Recurrence,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::Bivariate => "bivariate",
            Algorithm::Matrix => "matrix",
            Algorithm::HermitePade => "hermite-pade",
            Algorithm::Recurrence => "recurrence",
        }
    }
}

/// Report destination format.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OutputMode {
    Plain,
    Json,
}

/// Everything `run_compute` needs besides the instance itself.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub verify: bool,
    pub seed: u64,
    pub output: OutputMode,
    /// Append one CSV measurement row to this file.
    pub bench: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::Auto,
            verify: false,
            seed: 0,
            output: OutputMode::Plain,
            bench: None,
        }
    }
}

/// A parsed instance file: the algebraic instance plus the target index.
pub struct InstanceFile {
    pub inst: AlgebraicInstance,
    pub n: BigUint,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::ParseError { line, msg: msg.into() }
}

/// Non-comment lines, tokenized, with their 1-based line numbers.
struct Cursor<'a> {
    items: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| {
                let body = raw.split('#').next().unwrap_or("");
                let toks: Vec<&str> = body.split_whitespace().collect();
                if toks.is_empty() {
                    None
                } else {
                    Some((i + 1, toks))
                }
            })
            .collect();
        Cursor { items, pos: 0 }
    }

    fn peek_key(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|(_, t)| t[0])
    }

    fn last_line(&self) -> usize {
        self.items.last().map(|(l, _)| *l).unwrap_or(0)
    }

    /// Consume the next line, requiring its keyword to be `key`.
    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.items.get(self.pos) {
            None => Err(perr(
                self.last_line(),
                format!("unexpected end of file, expected `{key}`"),
            )),
            Some((line, toks)) => {
                if toks[0] != key {
                    return Err(perr(
                        *line,
                        format!("expected `{key}`, found `{}`", toks[0]),
                    ));
                }
                self.pos += 1;
                Ok((*line, toks[1..].to_vec()))
            }
        }
    }
}

fn parse_u64(tok: &str, line: usize, what: &str) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| perr(line, format!("{what} must be a non-negative integer, found `{tok}`")))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    Ok(parse_u64(tok, line, what)? as usize)
}

fn one_arg<'a>(toks: &[&'a str], line: usize, key: &str) -> Result<&'a str> {
    if toks.len() != 1 {
        return Err(perr(line, format!("`{key}` takes exactly one value")));
    }
    Ok(toks[0])
}

/// A residue in `[0, p)`; negative input is accepted and reduced.
fn parse_residue(tok: &str, p: u64, line: usize) -> Result<u64> {
    let v: i128 = tok
        .parse()
        .map_err(|_| perr(line, format!("expected an integer, found `{tok}`")))?;
    Ok(v.rem_euclid(p as i128) as u64)
}

/// Parse `count` field elements (each `ctx.s` residues) from one line.
fn parse_elems(
    toks: &[&str],
    count: usize,
    ctx: &FieldCtx,
    line: usize,
) -> Result<Vec<FieldElem>> {
    if toks.len() != count * ctx.s {
        return Err(perr(
            line,
            format!(
                "expected {count} field elements ({} integers), found {} integers",
                count * ctx.s,
                toks.len()
            ),
        ));
    }
    toks.chunks(ctx.s)
        .map(|chunk| {
            let coords = chunk
                .iter()
                .map(|t| parse_residue(t, ctx.p, line))
                .collect::<Result<Vec<u64>>>()?;
            ctx.elem_from_coords(&coords)
        })
        .collect()
}

/// Parse an instance file from a string.
pub fn parse_instance_str(text: &str) -> Result<InstanceFile> {
    let mut cur = Cursor::new(text);

    let (line, toks) = cur.expect("p")?;
    let p = parse_u64(one_arg(&toks, line, "p")?, line, "p")?;

    let s = if cur.peek_key() == Some("s") {
        let (line, toks) = cur.expect("s")?;
        let s = parse_usize(one_arg(&toks, line, "s")?, line, "s")?;
        if s == 0 {
            return Err(perr(line, "extension degree s must be at least 1"));
        }
        s
    } else {
        1
    };

    let ctx = if s > 1 {
        let (line, toks) = cur.expect("pi")?;
        if toks.len() != s + 1 {
            return Err(perr(
                line,
                format!("`pi` must list {} residues for s = {s}", s + 1),
            ));
        }
        let pi = toks
            .iter()
            .map(|t| parse_residue(t, p, line))
            .collect::<Result<Vec<u64>>>()?;
        FieldCtx::extension(p, &pi)?
    } else {
        if cur.peek_key() == Some("pi") {
            let (line, _) = cur.expect("pi")?;
            return Err(perr(line, "`pi` is only valid when s > 1"));
        }
        FieldCtx::prime_field(p)?
    };

    let (e_line, toks) = cur.expect("E")?;
    if toks.len() != 2 {
        return Err(perr(e_line, "`E` takes two values: <d+1> <h+1>"));
    }
    let dp1 = parse_usize(toks[0], e_line, "row count d+1")?;
    let hp1 = parse_usize(toks[1], e_line, "column count h+1")?;
    if dp1 < 2 {
        return Err(perr(e_line, "the defining polynomial needs degree >= 1 in y"));
    }
    if hp1 < 1 {
        return Err(perr(e_line, "the defining polynomial needs at least one column"));
    }

    let mut rows = Vec::with_capacity(dp1);
    for _ in 0..dp1 {
        match cur.items.get(cur.pos) {
            None => {
                return Err(perr(
                    cur.last_line(),
                    format!("expected {dp1} coefficient rows after `E`"),
                ))
            }
            Some((line, toks)) => {
                let elems = parse_elems(toks, hp1, &ctx, *line)?;
                rows.push(UniPoly::from_coeffs(elems, &ctx));
                cur.pos += 1;
            }
        }
    }
    let e = BiPoly::from_rows(rows);
    if e.deg_y0() + 1 != dp1 {
        return Err(perr(
            e_line,
            "the leading coefficient row (the last one) must be nonzero",
        ));
    }

    let (line, toks) = cur.expect("rho")?;
    let rho = parse_usize(one_arg(&toks, line, "rho")?, line, "rho")?;

    let (line, toks) = cur.expect("init")?;
    let init = parse_elems(&toks, 2 * rho + 1, &ctx, line)?;

    let (line, toks) = cur.expect("N")?;
    let n_tok = one_arg(&toks, line, "N")?;
    let n = n_tok
        .parse::<BigUint>()
        .map_err(|_| perr(line, format!("N must be a non-negative integer, found `{n_tok}`")))?;

    if let Some((line, toks)) = cur.items.get(cur.pos) {
        return Err(perr(*line, format!("unexpected trailing line `{}`", toks[0])));
    }

    let inst = AlgebraicInstance::new(ctx, e, rho, init)?;
    Ok(InstanceFile { inst, n })
}

/// Parse an instance file from disk.
pub fn parse_instance(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| perr(0, format!("cannot read {}: {e}", path.display())))?;
    parse_instance_str(&text)
}

/// Render an instance (plus target index) in the file format `parse_instance`
/// reads.  The output is canonical: no comments, rows padded to `h + 1`
/// columns.
pub fn format_instance(inst: &AlgebraicInstance, n: &BigUint) -> String {
    let ctx = &inst.field;
    let mut out = String::new();
    let _ = writeln!(out, "p {}", ctx.p);
    if ctx.s > 1 {
        let _ = writeln!(out, "s {}", ctx.s);
        let pi: Vec<String> = (0..=ctx.s)
            .map(|k| inst.field.modulus().coeff(k, ctx.prime_ring()).to_string())
            .collect();
        let _ = writeln!(out, "pi {}", pi.join(" "));
    }
    let _ = writeln!(out, "E {} {}", inst.d + 1, inst.h + 1);
    for j in 0..=inst.d {
        let row = inst.e.row(j);
        let cells: Vec<String> = (0..=inst.h)
            .map(|k| format_coords(ctx, &row.coeff(k, ctx)))
            .collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    let _ = writeln!(out, "rho {}", inst.rho);
    let cells: Vec<String> = inst.init.iter().map(|a| format_coords(ctx, a)).collect();
    let _ = writeln!(out, "init {}", cells.join(" "));
    let _ = writeln!(out, "N {n}");
    out
}

fn format_coords(ctx: &FieldCtx, a: &FieldElem) -> String {
    ctx.format_elem(a)
}

/// One computation, summarized.  Serializes to JSON with fields in this
/// order; wall time is deliberately excluded so that reports are
/// reproducible byte for byte (it still goes to the bench CSV).
#[derive(Debug, Serialize)]
pub struct Report {
    pub engine: &'static str,
    pub p: u64,
    pub s: usize,
    pub d: usize,
    pub h: usize,
    pub n: String,
    /// Number of base-p digits of N walked.
    pub digits: usize,
    pub value: String,
    /// `Some(true)` when the series oracle confirmed the value; `None` when
    /// verification was off or N exceeds the oracle cap.
    pub verified: Option<bool>,
    /// Giant-step block products (recurrence engine only).
    pub block_mults: Option<usize>,
}

impl Report {
    /// Compact JSON rendering: the same bytes the CLI prints with `--json`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Resolve `auto` against the instance: the recurrence engine needs
/// `p > 2(dh)^2` to be worthwhile.
pub fn resolve_algorithm(inst: &AlgebraicInstance, choice: Algorithm) -> Algorithm {
    match choice {
        Algorithm::Auto => {
            let dh = (inst.d as u128) * (inst.h as u128);
            if (inst.field.p as u128) > 2 * dh * dh {
                Algorithm::Recurrence
            } else {
                Algorithm::HermitePade
            }
        }
        other => other,
    }
}

fn dispatch(
    inst: &AlgebraicInstance,
    n: &BigUint,
    engine: Algorithm,
    rng: &mut impl Rng,
) -> Result<(FieldElem, Option<usize>)> {
    match engine {
        Algorithm::Auto => unreachable!("auto is resolved before dispatch"),
        Algorithm::Bivariate => Ok((nth_coeff_bivariate(inst, n, false)?, None)),
        Algorithm::Matrix => Ok((nth_coeff_matrix(inst, n, rng)?, None)),
        Algorithm::HermitePade => Ok((nth_coeff_hp(inst, n)?, None)),
        Algorithm::Recurrence => {
            let out = nth_coeff_recurrence_with_stats(inst, n, rng)?;
            Ok((out.value, Some(out.block_mults)))
        }
    }
}

/// Compute the coefficient at the file's own target index.
pub fn run_compute(input: &InstanceFile, cfg: &RunConfig) -> Result<Report> {
    run_compute_at(&input.inst, &input.n, cfg)
}

/// Compute the coefficient at an explicit target index and assemble the
/// report.
pub fn run_compute_at(
    inst: &AlgebraicInstance,
    n: &BigUint,
    cfg: &RunConfig,
) -> Result<Report> {
    let engine = resolve_algorithm(inst, cfg.algorithm);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let start = Instant::now();
    let (value, block_mults) = dispatch(inst, n, engine, &mut rng)?;
    let wall = start.elapsed();

    let verified = if cfg.verify {
        match n.to_u64() {
            Some(m) if m <= VERIFY_LIMIT => Some(inst.oracle_nth_coeff(m)? == value),
            _ => None,
        }
    } else {
        None
    };

    let report = Report {
        engine: engine.name(),
        p: inst.field.p,
        s: inst.field.s,
        d: inst.d,
        h: inst.h,
        n: n.to_string(),
        digits: digits_base_p(n, inst.field.p).len(),
        value: inst.field.format_elem(&value),
        verified,
        block_mults,
    };

    if let Some(path) = &cfg.bench {
        append_bench_row(path, &report, wall.as_secs_f64() * 1e3)?;
    }
    Ok(report)
}

fn append_bench_row(path: &Path, report: &Report, wall_ms: f64) -> Result<()> {
    use std::io::Write as _;
    let fail = |e: std::io::Error| {
        Error::InvariantViolation(format!("cannot write bench file {}: {e}", path.display()))
    };
    let header_needed = !path.exists();
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(fail)?;
    if header_needed {
        writeln!(f, "engine,p,d,h,N,digits,block_mults,wall_ms").map_err(fail)?;
    }
    writeln!(
        f,
        "{},{},{},{},{},{},{},{:.3}",
        report.engine,
        report.p,
        report.d,
        report.h,
        report.n,
        report.digits,
        report.block_mults.unwrap_or(0),
        wall_ms
    )
    .map_err(fail)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// self test
// ---------------------------------------------------------------------------

const QUARTIC_F5: &str = include_str!("../../../instances/f5_quartic.nth");
const RATIONAL_F5: &str = include_str!("../../../instances/rational_f5.nth");
const F9_LINE: &str = include_str!("../../../instances/f9_line.nth");

const ALL_ENGINES: [Algorithm; 4] = [
    Algorithm::Bivariate,
    Algorithm::Matrix,
    Algorithm::HermitePade,
    Algorithm::Recurrence,
];

fn check(label: &str, got: &str, want: &str) -> Result<()> {
    if got == want {
        println!("ok: {label} = {got}");
        Ok(())
    } else {
        Err(Error::InvariantViolation(format!(
            "selftest {label}: got {got}, want {want}"
        )))
    }
}

/// Run the bundled instances through every engine and compare against known
/// values.  Any mismatch is an internal error.
pub fn selftest() -> Result<()> {
    let quartic = parse_instance_str(QUARTIC_F5)?;
    for engine in ALL_ENGINES {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (v, _) = dispatch(&quartic.inst, &quartic.n, engine, &mut rng)?;
        check(
            &format!("quartic/F5 N=70 [{}]", engine.name()),
            &quartic.inst.field.format_elem(&v),
            "2",
        )?;
    }
    {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = BigUint::from(3u32);
        let (v, _) = dispatch(&quartic.inst, &n, Algorithm::Bivariate, &mut rng)?;
        check(
            "quartic/F5 N=3 [bivariate]",
            &quartic.inst.field.format_elem(&v),
            "0",
        )?;
    }

    let rational = parse_instance_str(RATIONAL_F5)?;
    let cfg = RunConfig::default();
    let report = run_compute(&rational, &cfg)?;
    check(
        &format!("rational/F5 N={} [{}]", report.n, report.engine),
        &report.value,
        "1",
    )?;

    let line = parse_instance_str(F9_LINE)?;
    let report = run_compute(&line, &cfg)?;
    check(
        &format!("line/F9 N={} [{}]", report.n, report.engine),
        &report.value,
        "0 1",
    )?;

    println!("selftest passed");
    Ok(())
}

// ---------------------------------------------------------------------------
// argument parsing and entry point
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "nthcoeff",
    version,
    about = "Exact N-th coefficient of an algebraic power series over a finite field"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Read an instance file and print its N-th series coefficient.
    Compute(ComputeArgs),
    /// Run the bundled example instances through every engine.
    Selftest,
}

#[derive(Args)]
struct ComputeArgs {
    /// Instance file to read.
    #[arg(long)]
    input: PathBuf,
    /// Engine to use.
    #[arg(long, value_enum, default_value_t = Algorithm::Auto)]
    algorithm: Algorithm,
    /// Recompute the answer by direct series expansion (N <= 10^6 only).
    #[arg(long)]
    verify: bool,
    /// Seed for randomized internals; fixed seed means identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the full report as JSON instead of the bare value.
    #[arg(long)]
    json: bool,
    /// Append one CSV measurement row to this file.
    #[arg(long, value_name = "OUT.csv")]
    bench: Option<PathBuf>,
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    e.class().exit_code()
}

fn cmd_compute(args: &ComputeArgs) -> i32 {
    let input = match parse_instance(&args.input) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let cfg = RunConfig {
        algorithm: args.algorithm,
        verify: args.verify,
        seed: args.seed,
        output: if args.json { OutputMode::Json } else { OutputMode::Plain },
        bench: args.bench.clone(),
    };
    let report = match run_compute(&input, &cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    match cfg.output {
        OutputMode::Plain => {
            println!("{}", report.value);
            if let Some(ok) = report.verified {
                println!("{}", if ok { "MATCH" } else { "MISMATCH" });
            }
        }
        OutputMode::Json => {
            println!("{}", report.to_json());
        }
    }
    if report.verified == Some(false) {
        eprintln!("error: engine result disagrees with direct series expansion");
        return ErrorClass::Internal.exit_code();
    }
    0
}

pub fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Cmd::Compute(args) => cmd_compute(&args),
        Cmd::Selftest => match selftest() {
            Ok(()) => 0,
            Err(e) => fail(&e),
        },
    };
    std::process::exit(code);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{draw_small_params, random_instance};

    fn compute_str(input: &InstanceFile, cfg: &RunConfig) -> String {
        run_compute(input, cfg).unwrap().value
    }

    #[test]
    fn parses_the_bundled_quartic() {
        let file = parse_instance_str(QUARTIC_F5).unwrap();
        assert_eq!(file.inst.field.p, 5);
        assert_eq!(file.inst.field.s, 1);
        assert_eq!(file.inst.d, 4);
        assert_eq!(file.inst.h, 4);
        assert_eq!(file.inst.rho, 0);
        assert_eq!(file.n, BigUint::from(70u32));
    }

    #[test]
    fn parses_extension_field_elements() {
        let file = parse_instance_str(F9_LINE).unwrap();
        let ctx = &file.inst.field;
        assert_eq!((ctx.p, ctx.s), (3, 2));
        // init holds the generator x, written "0 1".
        assert_eq!(ctx.format_elem(&file.inst.init[0]), "0 1");
    }

    #[test]
    fn format_then_parse_roundtrips() {
        for text in [QUARTIC_F5, RATIONAL_F5, F9_LINE] {
            let file = parse_instance_str(text).unwrap();
            let rendered = format_instance(&file.inst, &file.n);
            let again = parse_instance_str(&rendered).unwrap();
            assert_eq!(again.inst.rho, file.inst.rho);
            assert_eq!(again.inst.init, file.inst.init);
            assert_eq!(again.n, file.n);
            // canonical form is a fixed point, which also pins E itself
            assert_eq!(format_instance(&again.inst, &again.n), rendered);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases: &[(&str, usize, &str)] = &[
            ("q 5", 1, "expected `p`"),
            ("p 5\nE 3", 2, "two values"),
            ("p 5\nE 2 2\n4 0\n1 4 9\nrho 0\ninit 1\nN 3", 4, "found 3 integers"),
            ("p 5\nE 2 2\n4 0\n0 0\nrho 0\ninit 1\nN 3", 2, "must be nonzero"),
            ("p 5\npi 1 1\nE 2 2\n4 0\n1 4\nrho 0\ninit 1\nN 3", 2, "only valid"),
            ("p 5\nE 2 2\n4 0\n1 4\nrho 0\ninit 1\nN x", 7, "N must be"),
            ("p 5\nE 2 2\n4 0\n1 4\nrho 0\ninit 1", 6, "end of file"),
            ("p 5\nE 2 2\n4 0\n1 4\nrho 0\ninit 1\nN 3\nM 4", 8, "trailing"),
        ];
        for (text, want_line, want_frag) in cases {
            let err = parse_instance_str(text)
                .err()
                .unwrap_or_else(|| panic!("expected a parse error for {text:?}"));
            match err {
                Error::ParseError { line, msg } => {
                    assert_eq!(line, *want_line, "wrong line for {text:?}: {msg}");
                    assert!(
                        msg.contains(want_frag),
                        "message {msg:?} should mention {want_frag:?}"
                    );
                }
                other => panic!("expected a parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn degenerate_initial_segment_is_an_input_error() {
        // y^2 - t^2 - t^3 with rho = 0: E_y(t, 0) vanishes identically, so
        // the declared valuation bound cannot hold.
        let text = "p 5\nE 3 4\n0 0 4 4\n0 0 0 0\n1 0 0 0\nrho 0\ninit 0\nN 3";
        let err = parse_instance_str(text)
            .err()
            .expect("declared valuation bound cannot hold");
        assert_eq!(err.class(), ErrorClass::Input);
    }

    #[test]
    fn bundled_quartic_matches_known_values() {
        let file = parse_instance_str(QUARTIC_F5).unwrap();
        for engine in ALL_ENGINES {
            let cfg = RunConfig {
                algorithm: engine,
                ..RunConfig::default()
            };
            assert_eq!(compute_str(&file, &cfg), "2", "engine {}", engine.name());
        }
        let small = InstanceFile {
            inst: parse_instance_str(QUARTIC_F5).unwrap().inst,
            n: BigUint::from(3u32),
        };
        assert_eq!(compute_str(&small, &RunConfig::default()), "0");
    }

    #[test]
    fn auto_selection_follows_field_size() {
        // p = 5, d = 4, h = 4: 5 <= 2*(16)^2, so auto stays structured.
        let quartic = parse_instance_str(QUARTIC_F5).unwrap();
        assert_eq!(
            resolve_algorithm(&quartic.inst, Algorithm::Auto),
            Algorithm::HermitePade
        );
        // p = 5, d = h = 1: 5 > 2, so auto goes to the recurrence.
        let rational = parse_instance_str(RATIONAL_F5).unwrap();
        assert_eq!(
            resolve_algorithm(&rational.inst, Algorithm::Auto),
            Algorithm::Recurrence
        );
        assert_eq!(
            resolve_algorithm(&rational.inst, Algorithm::Matrix),
            Algorithm::Matrix
        );
    }

    #[test]
    fn report_is_byte_deterministic() {
        let file = parse_instance_str(RATIONAL_F5).unwrap();
        let cfg = RunConfig {
            seed: 42,
            verify: false,
            ..RunConfig::default()
        };
        let a = serde_json::to_string(&run_compute(&file, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run_compute(&file, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"engine\":\"recurrence\""));
        assert!(a.contains("\"value\":\"1\""));
        assert!(!a.contains("wall"), "wall time must stay out of the report");
    }

    #[test]
    fn verify_flag_checks_small_indices_against_expansion() {
        let file = parse_instance_str(QUARTIC_F5).unwrap();
        let cfg = RunConfig {
            verify: true,
            ..RunConfig::default()
        };
        let report = run_compute(&file, &cfg).unwrap();
        assert_eq!(report.verified, Some(true));

        // Far beyond the oracle cap the check is skipped, not failed.
        let big = parse_instance_str(RATIONAL_F5).unwrap();
        let report = run_compute(&big, &cfg).unwrap();
        assert_eq!(report.verified, None);
    }

    #[test]
    fn verify_matches_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(901);
        let mut done = 0;
        while done < 20 {
            let params = draw_small_params(&mut rng);
            let inst = match random_instance(&params, &mut rng) {
                Ok(inst) => inst,
                Err(_) => continue,
            };
            let n = BigUint::from(rng.gen_range(0u64..400));
            let file = InstanceFile { inst, n };
            let cfg = RunConfig {
                verify: true,
                seed: done,
                ..RunConfig::default()
            };
            let report = run_compute(&file, &cfg).unwrap();
            assert_eq!(
                report.verified,
                Some(true),
                "mismatch on p={} s={} d={} h={} N={}",
                report.p,
                report.s,
                report.d,
                report.h,
                report.n
            );
            done += 1;
        }
    }

    #[test]
    fn bench_rows_accumulate_in_csv() {
        let dir = std::env::temp_dir().join(format!("nthcoeff-bench-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bench.csv");
        let _ = std::fs::remove_file(&path);

        let file = parse_instance_str(RATIONAL_F5).unwrap();
        let cfg = RunConfig {
            bench: Some(path.clone()),
            ..RunConfig::default()
        };
        run_compute(&file, &cfg).unwrap();
        run_compute(&file, &cfg).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3, "header plus two rows:\n{text}");
        assert_eq!(lines[0], "engine,p,d,h,N,digits,block_mults,wall_ms");
        for row in &lines[1..] {
            assert!(row.starts_with("recurrence,5,1,1,1000000000000,18,"), "{row}");
        }
        let _ = std::fs::remove_file(&path);
    }

    #[test]
    fn selftest_accepts_the_bundled_instances() {
        selftest().unwrap();
    }
}
