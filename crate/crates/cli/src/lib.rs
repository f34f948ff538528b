//! Command dispatch for the `opoly` binary, kept free of argument parsing so
//! tests can drive it directly.

use std::fmt::Write as _;

use rug::Float;
use serde::Serialize;

use opoly::error::Error;
use opoly::expansion::{expansion_coeffs, DEFAULT_EXTRA_DEGREES};
use opoly::identities::stencil::small_t_slopes;
use opoly::identities::{missing_ids, run_suite, x_samples, IdFilter, ResidualReport};
use opoly::laguerre::{limit_values, LimitQuantity};
use opoly::numerics::{parse_real, to_decimal, DEFAULT_MAX_BITS};
use opoly::quadrature::gauss_rule;
use opoly::recurrence::{build, determinant_eval};
use opoly::rho::rho;
use opoly::PrecisionContext;

pub const MIN_DIGITS: u32 = 10;
pub const MAX_DIGITS: u32 = 200;
/// Significant digits for residuals and tolerances in reports.
pub const RESIDUAL_DIGITS: u32 = 6;
/// Header of the verify CSV.
pub const VERIFY_HEADER: &str = "identity_id,n,nu,t,residual,tolerance,method,pass";
/// t used for the value rows of `limit`.
pub const LIMIT_T: &str = "1e-24";
/// Criterion for value rows of `limit`.
pub const LIMIT_VALUE_TOLERANCE: f64 = 1e-10;
/// Criterion for slope rows of `limit`.
pub const LIMIT_SLOPE_TOLERANCE: f64 = 1e-4;

pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const PRECISION: i32 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Rho { nu: String, t: String },
    Coeffs { nu: String, t: String, n_max: usize },
    Quad { nu: String, t: String, m: usize },
    Verify { nu: String, t: String, n_max: usize, suite: String, samples: usize },
    Expand { nu: String, t: String, n: usize, k_max: Option<usize> },
    Limit { nu: String, n_max: usize },
    Eval { nu: String, t: String, n: usize, x: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub digits: u32,
    /// None picks the command's natural output: a bare value for `rho` and
    /// `eval`, JSON for `coeffs` and `quad`, CSV otherwise.
    pub format: Option<Format>,
    pub seed: u64,
    pub max_bits: u32,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self { command, digits: 30, format: None, seed: opoly::identities::DEFAULT_SEED, max_bits: DEFAULT_MAX_BITS }
    }
}

/// Result of one run: exit status, data for the output stream, and
/// diagnostics for the error stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
    pub diagnostics: String,
}

impl Outcome {
    fn data(code: i32, output: String, diagnostics: String) -> Self {
        Self { code, output, diagnostics }
    }

    fn error(e: &Error) -> Self {
        let code = match e {
            Error::DomainError(_) | Error::IndexError { .. } => exit::USAGE,
            _ => exit::PRECISION,
        };
        Self { code, output: String::new(), diagnostics: format!("error: {e}\n") }
    }
}

/// Exit status for a core error: 2 for bad input, 3 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    Outcome::error(e).code
}

pub fn run(cfg: &RunConfig) -> Outcome {
    if !(MIN_DIGITS..=MAX_DIGITS).contains(&cfg.digits) {
        return Outcome::data(
            exit::USAGE,
            String::new(),
            format!("error: digits must lie in [{MIN_DIGITS}, {MAX_DIGITS}], got {}\n", cfg.digits),
        );
    }
    match dispatch(cfg) {
        Ok(o) => o,
        Err(e) => Outcome::error(&e),
    }
}

type Res<T> = Result<T, Error>;

fn context(cfg: &RunConfig, n_max: usize) -> Res<PrecisionContext> {
    Ok(PrecisionContext::new(cfg.digits, n_max)?.with_max_bits(cfg.max_bits))
}

fn positive_t(s: &str, bits: u32) -> Res<Float> {
    let t = parse_real(s, bits)?;
    if !(t.is_finite() && t > 0) {
        return Err(Error::DomainError(format!("t must be positive, got {s}")));
    }
    Ok(t)
}

fn dispatch(cfg: &RunConfig) -> Res<Outcome> {
    let d = cfg.digits;
    match &cfg.command {
        Command::Rho { nu, t } => {
            let ctx = context(cfg, 0)?;
            let (nu, t) = (parse_real(nu, ctx.bits)?, positive_t(t, ctx.bits)?);
            let v = rho(&nu, &t, &ctx)?;
            let output = match cfg.format {
                None => format!("{}\n", to_decimal(&v, d)),
                Some(Format::Csv) => format!("nu,t,rho\n{},{},{}\n", to_decimal(&nu, d), to_decimal(&t, d), to_decimal(&v, d)),
                Some(Format::Json) => json(&RhoOut { nu: to_decimal(&nu, d), t: to_decimal(&t, d), rho: to_decimal(&v, d) }),
            };
            Ok(Outcome::data(exit::OK, output, String::new()))
        }
        Command::Coeffs { nu, t, n_max } => {
            let ctx = context(cfg, *n_max)?;
            let (nu, t) = (parse_real(nu, ctx.bits)?, positive_t(t, ctx.bits)?);
            let table = build(&nu, &t, *n_max, &ctx)?;
            let rows: Vec<CoeffRow> = (0..=*n_max)
                .map(|n| {
                    let r = table.row(n)?;
                    Ok(CoeffRow {
                        n,
                        a_n: to_decimal(r.leading, d),
                        b_n: to_decimal(&r.subleading, d),
                        big_a: to_decimal(r.off_diag, d),
                        big_b: to_decimal(r.diag, d),
                        coeffs: r.coeffs.iter().map(|c| to_decimal(c, d)).collect(),
                    })
                })
                .collect::<Res<_>>()?;
            let output = match cfg.format.unwrap_or(Format::Json) {
                Format::Json => json(&CoeffsOut {
                    nu: to_decimal(&nu, d),
                    t: to_decimal(&t, d),
                    n_max: *n_max,
                    precision_bits: table.achieved_bits,
                    rows,
                }),
                Format::Csv => {
                    let mut s = String::from("n,a_n,b_n,A_n,B_n,coeffs\n");
                    for r in rows {
                        let _ = writeln!(s, "{},{},{},{},{},{}", r.n, r.a_n, r.b_n, r.big_a, r.big_b, r.coeffs.join(" "));
                    }
                    s
                }
            };
            Ok(Outcome::data(exit::OK, output, String::new()))
        }
        Command::Quad { nu, t, m } => {
            if *m == 0 {
                return Err(Error::DomainError("m must be positive".into()));
            }
            let ctx = context(cfg, *m)?;
            let (nu, t) = (parse_real(nu, ctx.bits)?, positive_t(t, ctx.bits)?);
            let table = build(&nu, &t, *m - 1, &ctx)?;
            let rule = gauss_rule(&table, *m, &ctx)?;
            let nodes: Vec<String> = rule.nodes.iter().map(|x| to_decimal(x, d)).collect();
            let weights: Vec<String> = rule.weights.iter().map(|x| to_decimal(x, d)).collect();
            let output = match cfg.format.unwrap_or(Format::Json) {
                Format::Json => json(&QuadOut {
                    nu: to_decimal(&nu, d),
                    t: to_decimal(&t, d),
                    m: *m,
                    precision_bits: table.achieved_bits,
                    nodes,
                    weights,
                }),
                Format::Csv => {
                    let mut s = String::from("i,node,weight\n");
                    for (i, (x, w)) in nodes.iter().zip(&weights).enumerate() {
                        let _ = writeln!(s, "{i},{x},{w}");
                    }
                    s
                }
            };
            Ok(Outcome::data(exit::OK, output, String::new()))
        }
        Command::Verify { nu, t, n_max, suite, samples } => {
            let ctx = context(cfg, *n_max + 1)?;
            let (nu, t) = (parse_real(nu, ctx.bits)?, positive_t(t, ctx.bits)?);
            let filter = IdFilter::parse(suite)?;
            let xs = x_samples(cfg.seed, *samples, &ctx);
            let report = run_suite(&nu, &t, *n_max, &filter, &xs, &ctx)?;
            Ok(verify_outcome(cfg, &report, &nu, &t, *n_max))
        }
        Command::Expand { nu, t, n, k_max } => {
            let k_max = k_max.unwrap_or(n + DEFAULT_EXTRA_DEGREES);
            let ctx = context(cfg, *n)?;
            let (nu, t) = (parse_real(nu, ctx.bits)?, positive_t(t, ctx.bits)?);
            let table = build(&nu, &t, *n, &ctx)?;
            let c = expansion_coeffs(&table, *n, k_max, &ctx)?;
            let bounds = c.bounds(&ctx)?;
            let within: Vec<bool> = c.d.iter().zip(&bounds).map(|(dk, b)| Float::with_val(ctx.bits, dk.abs_ref()) <= *b).collect();
            let rows: Vec<ExpandRow> = (0..=k_max)
                .map(|k| ExpandRow { k, d: to_decimal(&c.d[k], d), bound: to_decimal(&bounds[k], d), within_bound: within[k] })
                .collect();
            let output = match cfg.format.unwrap_or(Format::Csv) {
                Format::Json => json(&ExpandOut {
                    nu: to_decimal(&nu, d),
                    t: to_decimal(&t, d),
                    n: *n,
                    k_max,
                    h_bound: to_decimal(&c.h_bound, d),
                    rows,
                }),
                Format::Csv => {
                    let mut s = String::from("k,d,bound,within_bound\n");
                    for r in rows {
                        let _ = writeln!(s, "{},{},{},{}", r.k, r.d, r.bound, r.within_bound);
                    }
                    s
                }
            };
            let ok = within.iter().all(|&w| w);
            let diag = if ok { String::new() } else { "bound violated\n".to_string() };
            Ok(Outcome::data(if ok { exit::OK } else { exit::CHECK_FAILED }, output, diag))
        }
        Command::Limit { nu, n_max } => limit(cfg, nu, *n_max),
        Command::Eval { nu, t, n, x } => {
            let ctx = context(cfg, *n)?;
            let (nu, t) = (parse_real(nu, ctx.bits)?, positive_t(t, ctx.bits)?);
            let x = parse_real(x, ctx.bits)?;
            let table = build(&nu, &t, *n, &ctx)?;
            let v = opoly::recurrence::eval(&table, *n, &x)?;
            let det = if *n <= opoly::hankel::MAX_DETERMINANT_ORDER {
                Some(to_decimal(&determinant_eval(&nu, &t, *n, &x, &ctx)?, d))
            } else {
                None
            };
            let output = match cfg.format {
                None => format!("{}\n", to_decimal(&v, d)),
                Some(Format::Csv) => format!(
                    "n,x,recurrence,determinant\n{},{},{},{}\n",
                    n,
                    to_decimal(&x, d),
                    to_decimal(&v, d),
                    det.clone().unwrap_or_default()
                ),
                Some(Format::Json) => json(&EvalOut {
                    nu: to_decimal(&nu, d),
                    t: to_decimal(&t, d),
                    n: *n,
                    x: to_decimal(&x, d),
                    recurrence: to_decimal(&v, d),
                    determinant: det,
                }),
            };
            Ok(Outcome::data(exit::OK, output, String::new()))
        }
    }
}

fn verify_outcome(cfg: &RunConfig, report: &ResidualReport, nu: &Float, t: &Float, n_max: usize) -> Outcome {
    let d = cfg.digits;
    let rows: Vec<VerifyRow> = report
        .entries
        .iter()
        .map(|e| VerifyRow {
            identity_id: e.identity_id.clone(),
            n: e.n,
            nu: to_decimal(&e.nu, d),
            t: to_decimal(&e.t, d),
            residual: to_decimal(&e.residual, RESIDUAL_DIGITS),
            tolerance: to_decimal(&e.tolerance, RESIDUAL_DIGITS),
            method: e.method.as_str(),
            pass: e.pass,
        })
        .collect();
    let output = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = format!("{VERIFY_HEADER}\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{},{},{},{},{}", r.identity_id, r.n, r.nu, r.t, r.residual, r.tolerance, r.method, r.pass);
            }
            s
        }
        Format::Json => json(&VerifyOut {
            nu: to_decimal(nu, d),
            t: to_decimal(t, d),
            n_max,
            digits: d,
            seed: cfg.seed,
            all_pass: report.all_pass(),
            missing_ids: missing_ids(report),
            entries: rows,
        }),
    };
    let mut diagnostics = String::new();
    for e in report.failures() {
        let _ = writeln!(
            diagnostics,
            "FAIL {} n={} residual={} tolerance={}",
            e.identity_id,
            e.n,
            to_decimal(&e.residual, RESIDUAL_DIGITS),
            to_decimal(&e.tolerance, RESIDUAL_DIGITS)
        );
    }
    let code = if report.all_pass() { exit::OK } else { exit::CHECK_FAILED };
    Outcome::data(code, output, diagnostics)
}

/// Closed-form t = 0 values beside the coefficients at t = 10^{−24}, and for
/// ν > 0 the slopes of B_n and a_n near 0 beside their limits.
fn limit(cfg: &RunConfig, nu: &str, n_max: usize) -> Res<Outcome> {
    let d = cfg.digits;
    let ctx = context(cfg, n_max)?;
    let nu = parse_real(nu, ctx.bits)?;
    if nu <= -1 {
        return Err(Error::DomainError("limit values need ν > −1".into()));
    }
    let t = parse_real(LIMIT_T, ctx.bits)?;
    let table = build(&nu, &t, n_max, &ctx)?;
    let mut rows = Vec::new();
    let value_tol = ctx.real(LIMIT_VALUE_TOLERANCE);
    for n in 0..=n_max {
        let pairs = [
            (LimitQuantity::A, table.leading(n).clone()),
            (LimitQuantity::Sub, table.subleading(n)),
            (LimitQuantity::OffDiag, table.off_diag(n).clone()),
            (LimitQuantity::Diag, table.diag(n).clone()),
            (LimitQuantity::Free, table.free_term(n).clone()),
        ];
        for (q, computed) in pairs {
            let lim = limit_values(n, &nu, q, &ctx)?;
            rows.push(LimitRow::new(q, n, &t, &lim, &computed, &value_tol, d));
        }
    }
    if nu > 0 {
        let slope_tol = ctx.real(LIMIT_SLOPE_TOLERANCE);
        for s in small_t_slopes(&nu, n_max, &ctx)? {
            rows.push(LimitRow::new(LimitQuantity::DiagPrime, s.n, &s.t0, &s.diag_limit, &s.diag_slope, &slope_tol, d));
            rows.push(LimitRow::new(LimitQuantity::APrime, s.n, &s.t0, &s.lead_limit, &s.lead_slope, &slope_tol, d));
        }
    }
    let output = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("quantity,n,t,limit,computed,difference,tolerance,pass\n");
            for r in &rows {
                let _ =
                    writeln!(s, "{},{},{},{},{},{},{},{}", r.quantity, r.n, r.t, r.limit, r.computed, r.difference, r.tolerance, r.pass);
            }
            s
        }
        Format::Json => json(&LimitOut { nu: to_decimal(&nu, d), n_max, rows: &rows }),
    };
    let ok = rows.iter().all(|r| r.pass);
    let mut diagnostics = String::new();
    for r in rows.iter().filter(|r| !r.pass) {
        let _ = writeln!(diagnostics, "FAIL {} n={} difference={}", r.quantity, r.n, r.difference);
    }
    Ok(Outcome::data(if ok { exit::OK } else { exit::CHECK_FAILED }, output, diagnostics))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct RhoOut {
    nu: String,
    t: String,
    rho: String,
}

#[derive(Serialize)]
struct CoeffRow {
    n: usize,
    a_n: String,
    b_n: String,
    #[serde(rename = "A_n")]
    big_a: String,
    #[serde(rename = "B_n")]
    big_b: String,
    coeffs: Vec<String>,
}

#[derive(Serialize)]
struct CoeffsOut {
    nu: String,
    t: String,
    n_max: usize,
    precision_bits: u32,
    rows: Vec<CoeffRow>,
}

#[derive(Serialize)]
struct QuadOut {
    nu: String,
    t: String,
    m: usize,
    precision_bits: u32,
    nodes: Vec<String>,
    weights: Vec<String>,
}

#[derive(Serialize)]
struct VerifyRow {
    identity_id: String,
    n: usize,
    nu: String,
    t: String,
    residual: String,
    tolerance: String,
    method: &'static str,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyOut {
    nu: String,
    t: String,
    n_max: usize,
    digits: u32,
    seed: u64,
    all_pass: bool,
    missing_ids: Vec<&'static str>,
    entries: Vec<VerifyRow>,
}

#[derive(Serialize)]
struct ExpandRow {
    k: usize,
    d: String,
    bound: String,
    within_bound: bool,
}

#[derive(Serialize)]
struct ExpandOut {
    nu: String,
    t: String,
    n: usize,
    k_max: usize,
    h_bound: String,
    rows: Vec<ExpandRow>,
}

#[derive(Serialize)]
struct LimitRow {
    quantity: &'static str,
    n: usize,
    t: String,
    limit: String,
    computed: String,
    difference: String,
    tolerance: String,
    pass: bool,
}

impl LimitRow {
    fn new(q: LimitQuantity, n: usize, t: &Float, limit: &Float, computed: &Float, tol: &Float, d: u32) -> Self {
        let diff = Float::with_val(computed.prec().max(limit.prec()), computed - limit).abs();
        Self {
            quantity: q.name(),
            n,
            t: to_decimal(t, d),
            limit: to_decimal(limit, d),
            computed: to_decimal(computed, d),
            difference: to_decimal(&diff, RESIDUAL_DIGITS),
            tolerance: to_decimal(tol, RESIDUAL_DIGITS),
            pass: diff < *tol,
        }
    }
}

#[derive(Serialize)]
struct LimitOut<'a> {
    nu: String,
    n_max: usize,
    rows: &'a [LimitRow],
}

#[derive(Serialize)]
struct EvalOut {
    nu: String,
    t: String,
    n: usize,
    x: String,
    recurrence: String,
    determinant: Option<String>,
}
