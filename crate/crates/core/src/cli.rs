//! The `lpopnorm` command-line front end.
//!
//! Exit status: 0 on success, 1 when an inequality is violated or a
//! certificate fails its invariants, 2 on usage errors.
//!
//! Machine-readable output is versioned. JSON reports carry
//! `"schema_version": "1"`; CSV output starts with a `# lpopnorm <command> v1`
//! comment line followed by a fixed header row:
//!
//! | command           | CSV columns                                                                   |
//! |-------------------|-------------------------------------------------------------------------------|
//! | `constants`       | `p,q,alpha,hardy,q_hardy,theorem1,q_bracket,norm`                             |
//! | `certify`         | `n,p,upper,lower,gap,method_lower,iterations,witness_reproduction`            |
//! | `sweep`           | `n,indicator_lower,power_lower,upper,gap`                                     |
//! | `verify-*`        | `mode,cases,violations,equalities,min_margin,min_rel_margin`                  |
//! | `jackson`         | `q,m,k,value,tail_residual,exact,rel_error`                                   |
//!
//! A certificate in JSON has the fields `schema_version, kernel, p, upper,
//! lower, method_upper, u1, u2, method_lower, witness, n, iterations, residuals`
//! where `kernel` uses the `{"type": ...}` kernel encoding and `residuals`
//! holds `gap, rel_gap, indicator_lower, power_lower, power_last_rel_change,
//! witness_reproduction`.
//!
//! Random inputs for `verify-*` come from a ChaCha8 stream seeded with `--seed`:
//! each discrete trial draws a support length uniform on `[1, 50]` and entries
//! uniform on `[0, 1)`; random grid functions draw samples uniform on `(0, 1]`.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certify::{certify_norm, verify_discrete_inequality, NormCertificate};
use crate::error::Error;
use crate::numeric::{Exponent, QParam, ToleranceConfig, TruncatedSequence};
use crate::operators::{q_hardy_kernel, ToeplitzKernel};
use crate::par;
use crate::qcalc::{
    jackson_integral, q_bracket, theorem1_sides, truncation_depth, GridFunction, HardyParams, Verdict,
};

pub const SCHEMA_VERSION: &str = "1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

// Offending inputs listed in a verification report.
const MAX_REPORTED_VIOLATIONS: usize = 10;
const MAX_SUPPORT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "lpopnorm", version, about = "l^p operator-norm certificates and q-Hardy inequality checks")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, value_enum, global = true, default_value = "text")]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the sharp constants for given p, q and alpha
    Constants {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Certify the l^p norm of an upper-triangular Toeplitz operator
    Certify {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        p: f64,
        /// Finite-section size used by the lower bounds
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Certificates over a list of section sizes
    Sweep {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        p: f64,
        /// Strictly ascending section sizes
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Randomized check of the discrete q-Hardy inequality
    VerifyDiscrete {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [1.5, 2.0, 3.0])]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 0.9])]
        q: Vec<f64>,
    },
    /// Check of the weighted q-Hardy integral inequality on [0, 1]
    VerifyTheorem1 {
        /// Random grid functions per parameter point
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [1.5, 2.0, 3.0])]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.9])]
        q: Vec<f64>,
        /// alpha values; defaults to 0, -1 and 1 - 1/p - 0.1 for each p
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        alpha: Option<Vec<f64>>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Family::One, Family::T, Family::T2, Family::Random])]
        f: Vec<Family>,
    },
    /// Jackson integral of t^m over [0, 1]
    Jackson {
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Truncation index K; defaults to the first K with q^K below 1e-16
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct KernelArgs {
    /// q-Hardy kernel a_m = q^{m-1}
    #[arg(long)]
    pub q: Option<f64>,
    /// Explicit kernel a_1,a_2,...
    #[arg(long, value_delimiter = ',')]
    pub coeffs: Option<Vec<f64>>,
    /// Kernel JSON file ({"type":"geometric",...} or {"type":"explicit",...})
    #[arg(long)]
    pub kernel: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
}

/// Test functions for the integral inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// f = 1
    One,
    /// f(t) = t
    T,
    /// f(t) = t^2
    T2,
    /// i.i.d. samples on (0, 1]
    Random,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Violation,
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `args` (including the program name) and runs the command, writing
/// the report to `out` and diagnostics to stderr. Returns the exit status.
pub fn run<I, T, W>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(io::stderr(), "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    match execute(&cfg, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Violation) => EXIT_VIOLATION,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_VIOLATION
        }
    }
}

fn execute<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<(), Failure> {
    let fmt = cfg.format;
    match &cfg.command {
        Command::Constants { p, q, alpha } => cmd_constants(*p, *q, *alpha, fmt, out),
        Command::Certify { kernel, p, n, tol } => cmd_certify(kernel, *p, *n, tol, fmt, out),
        Command::Sweep { kernel, p, n, tol } => cmd_sweep(kernel, *p, n, tol, fmt, out),
        Command::VerifyDiscrete { trials, seed, p, q } => cmd_verify_discrete(*trials, *seed, p, q, fmt, out),
        Command::VerifyTheorem1 { trials, seed, p, q, alpha, f } => {
            cmd_verify_theorem1(*trials, *seed, p, q, alpha.as_deref(), f, fmt, out)
        }
        Command::Jackson { q, m, n } => cmd_jackson(*q, *m, *n, fmt, out),
    }
}

fn write_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn write_csv<W: Write, R: Serialize>(out: &mut W, command: &str, rows: &[R]) -> Result<(), Failure> {
    writeln!(out, "# lpopnorm {command} v{SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    out.write_all(&bytes)?;
    Ok(())
}

fn tolerance(tol: &TolArgs) -> Result<ToleranceConfig, Failure> {
    let cfg = ToleranceConfig { rel_tol: tol.rel_tol, max_iter: tol.max_iter, ..ToleranceConfig::default() };
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn kernel(args: &KernelArgs) -> Result<ToeplitzKernel, Failure> {
    if let Some(q) = args.q {
        return Ok(q_hardy_kernel(QParam::new(q).map_err(usage)?));
    }
    if let Some(coeffs) = &args.coeffs {
        return ToeplitzKernel::explicit(coeffs.clone()).map_err(usage);
    }
    let path = args.kernel.as_ref().ok_or_else(|| Failure::Usage("a kernel is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
pub struct ConstantsReport {
    pub schema_version: &'static str,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    /// `(p/(p-1))^p`, the classical Hardy constant.
    pub hardy: f64,
    /// `(1-q)^{-p}`, the discrete q-Hardy constant.
    pub q_hardy: f64,
    /// `[1-1/p-alpha]_q^{-p}`, the integral q-Hardy constant.
    pub theorem1: f64,
    /// `[1-1/p-alpha]_q`.
    pub q_bracket: f64,
    /// `S = 1/(1-q)`, the operator norm of the q-Hardy operator.
    pub norm: f64,
}

pub fn constants_report(p: f64, q: f64, alpha: f64) -> crate::Result<ConstantsReport> {
    let exp = Exponent::new(p)?;
    let qp = QParam::new(q)?;
    let params = HardyParams::new(exp, alpha, qp)?;
    Ok(ConstantsReport {
        schema_version: SCHEMA_VERSION,
        p,
        q,
        alpha,
        hardy: exp.conj().powf(p),
        q_hardy: (1.0 - q).powf(-p),
        theorem1: params.constant(),
        q_bracket: q_bracket(params.gap(), qp),
        norm: 1.0 / (1.0 - q),
    })
}

fn cmd_constants<W: Write>(p: f64, q: f64, alpha: f64, fmt: OutputFormat, out: &mut W) -> Result<(), Failure> {
    let r = constants_report(p, q, alpha).map_err(usage)?;
    match fmt {
        OutputFormat::Json => write_json(out, &r),
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row {
                p: f64,
                q: f64,
                alpha: f64,
                hardy: f64,
                q_hardy: f64,
                theorem1: f64,
                q_bracket: f64,
                norm: f64,
            }
            let row = Row {
                p: r.p,
                q: r.q,
                alpha: r.alpha,
                hardy: r.hardy,
                q_hardy: r.q_hardy,
                theorem1: r.theorem1,
                q_bracket: r.q_bracket,
                norm: r.norm,
            };
            write_csv(out, "constants", &[row])
        }
        OutputFormat::Text => {
            writeln!(out, "p = {}, q = {}, alpha = {}", r.p, r.q, r.alpha)?;
            writeln!(out, "Hardy constant (p/(p-1))^p          {}", r.hardy)?;
            writeln!(out, "q-Hardy constant (1-q)^-p           {}", r.q_hardy)?;
            writeln!(out, "q-bracket [1-1/p-alpha]_q           {}", r.q_bracket)?;
            writeln!(out, "integral constant [1-1/p-alpha]_q^-p {}", r.theorem1)?;
            writeln!(out, "q-Hardy operator norm S = 1/(1-q)   {}", r.norm)?;
            Ok(())
        }
    }
}

fn cmd_certify<W: Write>(
    kernel_args: &KernelArgs,
    p: f64,
    n: usize,
    tol: &TolArgs,
    fmt: OutputFormat,
    out: &mut W,
) -> Result<(), Failure> {
    let k = kernel(kernel_args)?;
    let p = Exponent::new(p).map_err(usage)?;
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let cert = certify_norm(&k, p, n, &tolerance(tol)?).map_err(usage)?;
    let verified = cert.verify();
    match fmt {
        OutputFormat::Json => write_json(out, &cert)?,
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                n: usize,
                p: f64,
                upper: f64,
                lower: f64,
                gap: f64,
                method_lower: &'a str,
                iterations: usize,
                witness_reproduction: f64,
            }
            let row = Row {
                n: cert.n,
                p: cert.p.p(),
                upper: cert.upper,
                lower: cert.lower,
                gap: cert.residuals.gap,
                method_lower: lower_method_name(&cert),
                iterations: cert.iterations,
                witness_reproduction: cert.residuals.witness_reproduction,
            };
            write_csv(out, "certify", &[row])?
        }
        OutputFormat::Text => write_certificate_text(out, &cert)?,
    }
    if let Err(e) = verified {
        eprintln!("certificate check failed: {e}");
        return Err(Failure::Violation);
    }
    Ok(())
}

fn lower_method_name(cert: &NormCertificate) -> &'static str {
    match cert.method_lower {
        crate::certify::LowerMethod::Indicator => "indicator",
        crate::certify::LowerMethod::PowerIteration => "power-iteration",
    }
}

fn write_certificate_text<W: Write>(out: &mut W, c: &NormCertificate) -> io::Result<()> {
    writeln!(out, "kernel      {}", serde_json::to_string(&c.kernel).map_err(io::Error::from)?)?;
    writeln!(out, "p           {}", c.p.p())?;
    writeln!(out, "N           {}", c.n)?;
    writeln!(out, "upper       {}  (schur-closed-form, U1 = {}, U2 = {})", c.upper, c.u1, c.u2)?;
    writeln!(out, "lower       {}  ({})", c.lower, lower_method_name(c))?;
    writeln!(out, "gap         {}", c.residuals.gap)?;
    writeln!(out, "rel gap     {:e}", c.residuals.rel_gap)?;
    writeln!(out, "indicator   {}", c.residuals.indicator_lower)?;
    writeln!(out, "power iter  {}  ({} iterations, last rel change {:e})", c.residuals.power_lower, c.iterations, c.residuals.power_last_rel_change)?;
    writeln!(out, "witness     support {}, reproduction error {:e}", c.witness.support_len(), c.residuals.witness_reproduction)?;
    writeln!(out, "invariants  {}", if c.invariants_hold() { "hold" } else { "FAIL" })
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub indicator_lower: f64,
    pub power_lower: f64,
    pub upper: f64,
    pub gap: f64,
}

/// Certificates for each section size, computed concurrently and returned in input order.
pub fn sweep_rows(k: &ToeplitzKernel, p: Exponent, ns: &[usize], cfg: &ToleranceConfig) -> crate::Result<Vec<SweepRow>> {
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("section sizes must be positive and strictly ascending".into()));
    }
    par::map(ns, |&n| {
        certify_norm(k, p, n, cfg).map(|c| SweepRow {
            n,
            indicator_lower: c.residuals.indicator_lower,
            power_lower: c.residuals.power_lower,
            upper: c.upper,
            gap: c.residuals.gap,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Serialize)]
struct SweepReport<'a> {
    schema_version: &'static str,
    kernel: &'a ToeplitzKernel,
    p: f64,
    rows: &'a [SweepRow],
}

fn cmd_sweep<W: Write>(
    kernel_args: &KernelArgs,
    p: f64,
    ns: &[usize],
    tol: &TolArgs,
    fmt: OutputFormat,
    out: &mut W,
) -> Result<(), Failure> {
    let k = kernel(kernel_args)?;
    let exp = Exponent::new(p).map_err(usage)?;
    let rows = sweep_rows(&k, exp, ns, &tolerance(tol)?).map_err(usage)?;
    match fmt {
        OutputFormat::Csv => write_csv(out, "sweep", &rows)?,
        OutputFormat::Json => {
            write_json(out, &SweepReport { schema_version: SCHEMA_VERSION, kernel: &k, p, rows: &rows })?
        }
        OutputFormat::Text => {
            writeln!(out, "{:>8}  {:>22}  {:>22}  {:>22}  {:>22}", "N", "indicator_lower", "power_lower", "upper", "gap")?;
            for r in &rows {
                writeln!(out, "{:>8}  {:>22}  {:>22}  {:>22}  {:>22}", r.n, r.indicator_lower, r.power_lower, r.upper, r.gap)?;
            }
        }
    }
    if rows.iter().any(|r| r.indicator_lower.max(r.power_lower) > r.upper * (1.0 + 1e-10)) {
        return Err(Failure::Violation);
    }
    Ok(())
}

/// Summary of a randomized verification run.
#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary<C> {
    pub schema_version: &'static str,
    pub mode: &'static str,
    pub seed: u64,
    pub cases: usize,
    pub violations: usize,
    /// Cases where both sides agree within the floating-point margin.
    pub equalities: usize,
    /// Smallest `rhs - lhs` observed.
    pub min_margin: f64,
    /// Smallest `(rhs - lhs) / rhs` observed.
    pub min_rel_margin: f64,
    /// Case attaining `min_rel_margin`.
    pub tightest: Option<C>,
    /// Up to ten offending inputs.
    pub offending: Vec<C>,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    mode: &'a str,
    cases: usize,
    violations: usize,
    equalities: usize,
    min_margin: f64,
    min_rel_margin: f64,
}

impl<C: Clone> VerifySummary<C> {
    fn collect(mode: &'static str, seed: u64, results: Vec<(C, f64, f64, Verdict)>) -> Self {
        let mut s = VerifySummary {
            schema_version: SCHEMA_VERSION,
            mode,
            seed,
            cases: results.len(),
            violations: 0,
            equalities: 0,
            min_margin: f64::INFINITY,
            min_rel_margin: f64::INFINITY,
            tightest: None,
            offending: Vec::new(),
        };
        for (case, lhs, rhs, verdict) in results {
            let margin = rhs - lhs;
            let rel = if rhs > 0.0 { margin / rhs } else { 0.0 };
            s.min_margin = s.min_margin.min(margin);
            if rel < s.min_rel_margin {
                s.min_rel_margin = rel;
                s.tightest = Some(case.clone());
            }
            match verdict {
                Verdict::Strict => {}
                Verdict::Equality => s.equalities += 1,
                Verdict::Violated => {
                    s.violations += 1;
                    if s.offending.len() < MAX_REPORTED_VIOLATIONS {
                        s.offending.push(case);
                    }
                }
            }
        }
        s
    }
}

fn write_summary<W: Write, C: Serialize>(out: &mut W, s: &VerifySummary<C>, fmt: OutputFormat) -> Result<(), Failure> {
    match fmt {
        OutputFormat::Json => write_json(out, s)?,
        OutputFormat::Csv => {
            let row = SummaryRow {
                mode: s.mode,
                cases: s.cases,
                violations: s.violations,
                equalities: s.equalities,
                min_margin: s.min_margin,
                min_rel_margin: s.min_rel_margin,
            };
            write_csv(out, &format!("verify-{}", s.mode), &[row])?
        }
        OutputFormat::Text => {
            writeln!(out, "mode            {}", s.mode)?;
            writeln!(out, "seed            {}", s.seed)?;
            writeln!(out, "cases           {}", s.cases)?;
            writeln!(out, "violations      {}", s.violations)?;
            writeln!(out, "equalities      {}", s.equalities)?;
            writeln!(out, "min margin      {}", s.min_margin)?;
            writeln!(out, "min rel margin  {}", s.min_rel_margin)?;
            if let Some(t) = &s.tightest {
                writeln!(out, "tightest case   {}", serde_json::to_string(t).map_err(io::Error::from)?)?;
            }
            for c in &s.offending {
                writeln!(out, "VIOLATION       {}", serde_json::to_string(c).map_err(io::Error::from)?)?;
            }
        }
    }
    if s.violations > 0 {
        return Err(Failure::Violation);
    }
    Ok(())
}

/// One input of the discrete inequality check.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteCase {
    pub p: f64,
    pub q: f64,
    pub x: TruncatedSequence,
    pub lhs: f64,
    pub rhs: f64,
}

/// Draws a nonnegative sequence: support length uniform on `[1, 50]`, entries uniform on `[0, 1)`.
pub fn random_sequence<R: Rng>(rng: &mut R) -> TruncatedSequence {
    let len = rng.gen_range(1..=MAX_SUPPORT);
    (0..len).map(|_| rng.gen::<f64>()).collect::<Vec<_>>().into()
}

/// Runs the discrete inequality on `trials` seeded random sequences per `(p, q)` grid point.
pub fn verify_discrete(trials: usize, seed: u64, ps: &[f64], qs: &[f64]) -> crate::Result<VerifySummary<DiscreteCase>> {
    if trials == 0 {
        return Err(Error::Argument("--trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(trials * ps.len() * qs.len());
    for &p in ps {
        let p = Exponent::new(p)?;
        for &q in qs {
            let q = QParam::new(q)?;
            for _ in 0..trials {
                inputs.push((p, q, random_sequence(&mut rng)));
            }
        }
    }
    let abs_tol = ToleranceConfig::default().abs_tol;
    let results = par::map(&inputs, |(p, q, x)| {
        let r = verify_discrete_inequality(*q, *p, x, abs_tol)?;
        let verdict = if r.holds { Verdict::Strict } else { Verdict::Violated };
        let case = DiscreteCase { p: p.p(), q: q.get(), x: x.clone(), lhs: r.lhs, rhs: r.rhs };
        Ok((case, r.lhs, r.rhs, verdict))
    })
    .into_iter()
    .collect::<crate::Result<Vec<_>>>()?;
    Ok(VerifySummary::collect("discrete", seed, results))
}

fn cmd_verify_discrete<W: Write>(
    trials: usize,
    seed: u64,
    ps: &[f64],
    qs: &[f64],
    fmt: OutputFormat,
    out: &mut W,
) -> Result<(), Failure> {
    let s = verify_discrete(trials, seed, ps, qs).map_err(usage)?;
    write_summary(out, &s, fmt)
}

/// One input of the integral inequality check.
#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Case {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub family: Family,
    /// Grid samples `f(q^k)`; omitted for the analytic families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    pub lhs: f64,
    pub rhs: f64,
}

/// The default alpha grid for exponent p: `0, -1, 1 - 1/p - 0.1`.
pub fn default_alphas(p: f64) -> Vec<f64> {
    vec![0.0, -1.0, 1.0 - 1.0 / p - 0.1]
}

/// Samples a test function on the unit grid down to the default tail threshold.
pub fn grid_for(family: Family, q: QParam, rng: &mut ChaCha8Rng) -> crate::Result<GridFunction> {
    let threshold = ToleranceConfig::default().tail_threshold;
    match family {
        Family::One => GridFunction::sample_until(1.0, q, threshold, |_| 1.0),
        Family::T => GridFunction::sample_until(1.0, q, threshold, |t| t),
        Family::T2 => GridFunction::sample_until(1.0, q, threshold, |t| t * t),
        Family::Random => {
            let k = truncation_depth(q, 1.0, threshold);
            let samples = (0..=k).map(|_| 1.0 - rng.gen::<f64>()).collect();
            GridFunction::new(1.0, q, samples, crate::qcalc::TailMode::Zero)
        }
    }
}

/// Evaluates the integral inequality over the parameter grid and test families.
pub fn verify_theorem1(
    trials: usize,
    seed: u64,
    ps: &[f64],
    qs: &[f64],
    alphas: Option<&[f64]>,
    families: &[Family],
) -> crate::Result<VerifySummary<Theorem1Case>> {
    if trials == 0 {
        return Err(Error::Argument("--trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::new();
    for &p in ps {
        let exp = Exponent::new(p)?;
        let alpha_grid = alphas.map_or_else(|| default_alphas(p), <[f64]>::to_vec);
        for &q in qs {
            let qp = QParam::new(q)?;
            for &alpha in &alpha_grid {
                let params = HardyParams::new(exp, alpha, qp)?;
                for &family in families {
                    let reps = if family == Family::Random { trials } else { 1 };
                    for _ in 0..reps {
                        inputs.push((params, family, grid_for(family, qp, &mut rng)?));
                    }
                }
            }
        }
    }
    let abs_tol = ToleranceConfig::default().abs_tol;
    let results = par::map(&inputs, |(params, family, f)| {
        let sides = theorem1_sides(f, params, f.max_index())?;
        let case = Theorem1Case {
            p: params.p.p(),
            q: params.q.get(),
            alpha: params.alpha,
            family: *family,
            samples: (*family == Family::Random).then(|| f.samples().to_vec()),
            lhs: sides.lhs,
            rhs: sides.rhs,
        };
        Ok((case, sides.lhs, sides.rhs, sides.verdict(abs_tol)))
    })
    .into_iter()
    .collect::<crate::Result<Vec<_>>>()?;
    Ok(VerifySummary::collect("theorem1", seed, results))
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_theorem1<W: Write>(
    trials: usize,
    seed: u64,
    ps: &[f64],
    qs: &[f64],
    alphas: Option<&[f64]>,
    families: &[Family],
    fmt: OutputFormat,
    out: &mut W,
) -> Result<(), Failure> {
    let s = verify_theorem1(trials, seed, ps, qs, alphas, families).map_err(usage)?;
    write_summary(out, &s, fmt)
}

#[derive(Debug, Serialize)]
pub struct JacksonReport {
    pub schema_version: &'static str,
    pub q: f64,
    pub m: u32,
    pub k: usize,
    pub value: f64,
    pub tail_residual: f64,
    /// `1/[m+1]_q`.
    pub exact: f64,
    pub rel_error: f64,
}

pub fn jackson_report(q: f64, m: u32, k: Option<usize>) -> crate::Result<JacksonReport> {
    let qp = QParam::new(q)?;
    let k = k.unwrap_or_else(|| truncation_depth(qp, 1.0, ToleranceConfig::default().tail_threshold));
    let f = GridFunction::sample(1.0, qp, k, |t| t.powi(m as i32))?;
    let j = jackson_integral(&f, k)?;
    let exact = 1.0 / q_bracket(f64::from(m) + 1.0, qp);
    Ok(JacksonReport {
        schema_version: SCHEMA_VERSION,
        q,
        m,
        k,
        value: j.value,
        tail_residual: j.tail_residual,
        exact,
        rel_error: (j.value - exact).abs() / exact,
    })
}

fn cmd_jackson<W: Write>(q: f64, m: u32, k: Option<usize>, fmt: OutputFormat, out: &mut W) -> Result<(), Failure> {
    let r = jackson_report(q, m, k).map_err(usage)?;
    match fmt {
        OutputFormat::Json => write_json(out, &r),
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row {
                q: f64,
                m: u32,
                k: usize,
                value: f64,
                tail_residual: f64,
                exact: f64,
                rel_error: f64,
            }
            let row = Row {
                q: r.q,
                m: r.m,
                k: r.k,
                value: r.value,
                tail_residual: r.tail_residual,
                exact: r.exact,
                rel_error: r.rel_error,
            };
            write_csv(out, "jackson", &[row])
        }
        OutputFormat::Text => {
            writeln!(out, "integral of t^{} over [0, 1], q = {}, K = {}", r.m, r.q, r.k)?;
            writeln!(out, "jackson sum    {}", r.value)?;
            writeln!(out, "1/[m+1]_q      {}", r.exact)?;
            writeln!(out, "rel error      {:e}", r.rel_error)?;
            Ok(())
        }
    }
}
