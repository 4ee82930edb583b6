//! `hciz`: exact values, large-N free energies and cross-checks for unitary
//! spherical integrals.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Parser)]
#[command(name = "hciz", version, about = "Unitary spherical matrix integrals at finite and large N")]
struct Cli {
    /// Output format; JSON is the stable machine interface.
    #[arg(long, value_enum, global = true, default_value = "pretty")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact value of ∫ DU exp((N/s) Tr A U B U†).
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 128)]
        prec_bits: usize,
        /// Target relative error.
        #[arg(long, default_value_t = 1e-15)]
        target: f64,
        /// Give up with a precision error beyond this many bits.
        #[arg(long, default_value_t = 4096)]
        max_bits: usize,
    },
    /// Exact value of the rectangular two-group integral.
    EvalRect {
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 128)]
        prec_bits: usize,
        #[arg(long, default_value_t = 1e-15)]
        target: f64,
        #[arg(long, default_value_t = 4096)]
        max_bits: usize,
    },
    /// Exact value of the chain integral over U(N_1)…U(N_K).
    EvalChain {
        #[arg(long)]
        sizes: String,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 128)]
        prec_bits: usize,
        #[arg(long, default_value_t = 1e-15)]
        target: f64,
        #[arg(long, default_value_t = 4096)]
        max_bits: usize,
    },
    /// Planar free energies F_1..F_order.
    FreeEnergy {
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value = "enum")]
        method: MethodArg,
        /// JSONL coefficient cache.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Toda equation residual for τ_n, as a series in 1/ħ.
    TodaCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        order: usize,
        /// e.g. t1=1/3,tb1=1/5
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        times: String,
    },
    /// Closed-form planar series and the one-sided curve.
    Dispersionless {
        #[arg(long = "case", value_enum)]
        case: CaseArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        order: usize,
        /// One-sided moments θ_1..θ_n for the numeric curve check.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
    },
    /// Haar Monte Carlo estimate.
    Mc {
        #[arg(long)]
        n: usize,
        /// Rectangular case: size of the larger group (N_2 = n).
        #[arg(long)]
        n1: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Free cumulants from moments; missing higher moments are zero.
    Cumulants {
        #[arg(long, allow_hyphen_values = true)]
        moments: String,
        #[arg(long)]
        q: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Enum,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    OneSided,
    Diagonal,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval { a, b, s, prec_bits, target, max_bits } => {
            commands::eval(&a, &b, s, (prec_bits, target, max_bits))
        }
        Command::EvalRect { n1, n2, a, b, s, prec_bits, target, max_bits } => {
            commands::eval_rect(n1, n2, &a, &b, s, (prec_bits, target, max_bits))
        }
        Command::EvalChain { sizes, a, b, s, prec_bits, target, max_bits } => {
            commands::eval_chain(&sizes, &a, &b, s, (prec_bits, target, max_bits))
        }
        Command::FreeEnergy { order, method, cache, threads } => {
            let method = match method {
                MethodArg::Enum => hciz::cache::Method::Enum,
                MethodArg::Oracle => hciz::cache::Method::Oracle,
            };
            commands::free_energy(order, method, cache.as_deref(), threads)
        }
        Command::TodaCheck { n, order, times } => commands::toda_check(n, order, &times),
        Command::Dispersionless { case, n, order, theta } => match case {
            CaseArg::OneSided => commands::one_sided(n, order, theta.as_deref()),
            CaseArg::Diagonal => commands::diagonal(n, order),
        },
        Command::Mc { n, n1, a, b, s, samples, seed } => commands::mc(n, n1, &a, &b, s, samples, seed),
        Command::Cumulants { moments, q } => commands::cumulants(&moments, q),
    };
    let (report, failure) = match result {
        Ok(done) => done,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = report.write(cli.format, &mut stdout) {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(4);
    }
    match failure {
        Some(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        None => ExitCode::SUCCESS,
    }
}
