use std::path::PathBuf;
use std::process::ExitCode;

use casimir_core::oracle::Status;
use casimir_core::validation::ValidationOptions;
use casimir_thermo::{
    execute_sweep, resolve, scenario_listing, write_validation, CliError, Method, SweepOptions, SweepRequest,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "casimir-thermo",
    version,
    about = "Casimir thermodynamics of weakly coupled dielectric bodies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Closed,
    Oracle,
    Series,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Closed => Method::Closed,
            MethodArg::Oracle => Method::Oracle,
            MethodArg::Series => Method::Series,
            MethodArg::Both => Method::Both,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep a temperature (or Z) grid and write CSV.
    Sweep {
        /// Configuration file; overrides the scenario when both are given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in scenario name.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sets chi1 chi2 (chi1 = product, chi2 = 1).
        #[arg(long)]
        chi_product: Option<f64>,
        /// Use the asymptotic planar entropy instead of the exact sum.
        #[arg(long)]
        asymptotic: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare every closed form with its direct-sum oracle.
    Validate {
        #[arg(long)]
        out: PathBuf,
        /// Lower quadrature orders and sample counts.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the built-in scenarios.
    Scenarios,
}

fn init_threads(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Sweep {
            config,
            scenario,
            method,
            out,
            chi_product,
            asymptotic,
            threads,
        } => {
            init_threads(threads)?;
            let req = SweepRequest {
                config,
                scenario,
                method: method.map(Method::from),
                out,
                chi_product,
                asymptotic,
            };
            let cfg = resolve(&req)?;
            let result = execute_sweep(&cfg, SweepOptions { asymptotic })?;
            if cfg.output.is_none() {
                print!("{}", result.csv);
            }
            if result.failures > 0 {
                eprintln!(
                    "casimir-thermo: {} of {} rows did not converge",
                    result.failures,
                    result.rows.len()
                );
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { out, quick, threads } => {
            init_threads(threads)?;
            let opts = if quick {
                ValidationOptions::quick()
            } else {
                ValidationOptions::default()
            };
            let reports = write_validation(&out, &opts)?;
            let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
            let (pass, fail, dev) = (
                count(Status::Pass),
                count(Status::Fail),
                count(Status::DocumentedDeviation),
            );
            eprintln!(
                "{pass} pass, {fail} fail, {dev} documented-deviation -> {}",
                out.display()
            );
            Ok(if fail == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Scenarios => {
            print!("{}", scenario_listing());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("casimir-thermo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
