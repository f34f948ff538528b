use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use opoly_cli::{exit, run, Command, Format, RunConfig, MAX_DIGITS, MIN_DIGITS};

/// Orthonormal polynomials for the weight x^ν e^{−x−t/x} on (0, ∞).
#[derive(Parser)]
#[command(name = "opoly", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Significant digits of the results.
    #[arg(long, global = true, default_value_t = 30, value_parser = clap::value_parser!(u32).range(MIN_DIGITS as i64..=MAX_DIGITS as i64))]
    digits: u32,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Write data here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the x samples of `verify`.
    #[arg(long, global = true, default_value_t = opoly::identities::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// ρ_ν(t) = ∫₀^∞ e^{−t/x−x} x^{ν−1} dx.
    Rho {
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long)]
        t: String,
    },
    /// Recurrence coefficients and polynomial coefficients for n ≤ n_max.
    Coeffs {
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long)]
        t: String,
        #[arg(long)]
        n_max: usize,
    },
    /// m-point Gauss rule.
    Quad {
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long)]
        t: String,
        #[arg(long)]
        m: usize,
    },
    /// Residuals of the identity suite.
    Verify {
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long)]
        t: String,
        #[arg(long)]
        n_max: usize,
        /// "all" or a comma-separated list of identity ids.
        #[arg(long, default_value = "all")]
        suite: String,
        /// x samples per x-dependent identity.
        #[arg(long, default_value_t = opoly::identities::DEFAULT_SAMPLE_COUNT)]
        samples: usize,
    },
    /// Laguerre expansion coefficients of e^{−t/x}P_n and their bound.
    Expand {
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long)]
        t: String,
        #[arg(long)]
        n: usize,
        /// Defaults to n + 24.
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// t → 0 limits beside values computed at small t.
    Limit {
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long)]
        n_max: usize,
    },
    /// P_n(x) by the recurrence and, for n ≤ 8, by the moment determinant.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long)]
        t: String,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            return ExitCode::from(code as u8);
        }
    };
    let max_bits = match std::env::var("OPOLY_MAX_BITS") {
        Ok(v) => match v.trim().parse::<u32>() {
            Ok(b) if b >= 64 => b,
            _ => {
                eprintln!("error: OPOLY_MAX_BITS must be an integer ≥ 64, got {v:?}");
                return ExitCode::from(exit::USAGE as u8);
            }
        },
        Err(_) => opoly::numerics::DEFAULT_MAX_BITS,
    };
    let command = match cli.command {
        Cmd::Rho { nu, t } => Command::Rho { nu, t },
        Cmd::Coeffs { nu, t, n_max } => Command::Coeffs { nu, t, n_max },
        Cmd::Quad { nu, t, m } => Command::Quad { nu, t, m },
        Cmd::Verify { nu, t, n_max, suite, samples } => Command::Verify { nu, t, n_max, suite, samples },
        Cmd::Expand { nu, t, n, k_max } => Command::Expand { nu, t, n, k_max },
        Cmd::Limit { nu, n_max } => Command::Limit { nu, n_max },
        Cmd::Eval { nu, t, n, x } => Command::Eval { nu, t, n, x },
    };
    let cfg = RunConfig {
        command,
        digits: cli.digits,
        format: cli.format.map(|f| match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }),
        seed: cli.seed,
        max_bits,
    };
    let outcome = run(&cfg);
    eprint!("{}", outcome.diagnostics);
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &outcome.output),
        None => std::io::stdout().write_all(outcome.output.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(exit::USAGE as u8);
    }
    ExitCode::from(outcome.code as u8)
}
