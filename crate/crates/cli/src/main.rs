//! `finsler`: certify and synthesize Finsler multipliers from JSON problems.
//!
//! Exit codes: 0 feasible, 2 infeasible, 1 error.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use finsler_core::schema::TolSpec;

use commands::{Config, Format, Outcome, Status};

#[derive(Parser, Debug)]
#[command(name = "finsler", version, about = "Finsler multiplier certificates for parameter-dependent matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem file (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Directory for the report and any exported files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    def_tol: Option<f64>,
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    #[arg(long, global = true)]
    bisect_tol: Option<f64>,
    /// Added to the supremum of mu_inf for constant multipliers.
    #[arg(long, global = true, default_value_t = 1e-3)]
    margin: f64,
    /// Offset of the continuous multiplier max(mu_inf + eps, 0).
    #[arg(long, global = true, default_value_t = 1e-3)]
    eps: f64,
    /// Halve the grid spacing this many times.
    #[arg(long, global = true, default_value_t = 0)]
    grid_refine: u32,
    /// Bound-test suprema above this value count as unbounded.
    #[arg(long, global = true)]
    sup_threshold: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Check all four statements at a point, or the grid verdicts over a domain.
    Certify,
    /// Tabulate mu_inf over the domain.
    Profile,
    /// Constant, continuous, polynomial and bound-based multipliers.
    Synth,
    /// Necessary and sufficient bound-function tests.
    Bounds,
    /// Common multipliers for mode sets and piecewise-constant families.
    Switching,
    /// Generate a polytopic LMI set, export SDPA, check a candidate.
    Polytopic,
    /// Scalar-variable counts of the polytopic relaxations.
    Counts,
    /// Audit the claimed multiplier e^{-x1} of the exponential-stabilizability example.
    AuditExample2,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Profile => "profile",
            Command::Synth => "synth",
            Command::Bounds => "bounds",
            Command::Switching => "switching",
            Command::Polytopic => "polytopic",
            Command::Counts => "counts",
            Command::AuditExample2 => "audit-example2",
        }
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("FINSLER_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // fails only if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("warning: ignoring FINSLER_THREADS={v:?}"),
    }
}

fn run(cli: &Cli) -> finsler_core::Result<Outcome> {
    let cfg = Config {
        input: cli.input.clone(),
        tol_overrides: TolSpec {
            def_tol: cli.def_tol,
            rank_tol: cli.rank_tol,
            bisect_tol: cli.bisect_tol,
        },
        margin: cli.margin,
        eps: cli.eps,
        grid_refine: cli.grid_refine,
        sup_threshold: cli.sup_threshold,
    };
    match cli.command {
        Command::Certify => commands::certify_cmd(&cfg),
        Command::Profile => commands::profile_cmd(&cfg),
        Command::Synth => commands::synth_cmd(&cfg),
        Command::Bounds => commands::bounds_cmd(&cfg),
        Command::Switching => commands::switching_cmd(&cfg),
        Command::Polytopic => commands::polytopic_cmd(&cfg),
        Command::Counts => commands::counts_cmd(&cfg),
        Command::AuditExample2 => commands::audit_example2_cmd(&cfg),
    }
}

fn main() -> ExitCode {
    // clap exits 2 on usage errors, which would read as "infeasible"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    configure_threads();
    let out = match run(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    match &cli.out {
        Some(dir) => {
            if let Err(e) = commands::write_outputs(dir, cli.command.name(), &out, format) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
        None => {
            let text = match (format, &out.csv) {
                (Format::Csv, Some((h, r))) => output::csv_string(h, r),
                _ => output::to_json_string(&out.report),
            };
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
        }
    }
    match out.status {
        Status::Feasible => ExitCode::SUCCESS,
        Status::Infeasible => ExitCode::from(2),
    }
}
