use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use qkn_core::config::parse_complex;
use qkn_core::{cmd_expand_basis, cmd_table, cmd_verify, ConfigLayer, HalfInt, KnError, OutputFormat, RunConfig, Suite, TableKind};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;

/// Structure constants, central terms and Heisenberg pairings of the
/// Krichever-Novikov algebra and its q-deformation on genus 0 and 1.
#[derive(Parser, Debug)]
#[command(name = "qkn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit a coefficient table over |m|, |n| <= range.
    Table {
        /// classical, q, heisenberg, qheisenberg, central or qcentral
        #[arg(value_parser = str::parse::<TableKind>)]
        kind: TableKind,
    },
    /// Run verification suites; exits 1 if any check fails.
    Verify {
        /// duality, antisymmetry, band, limits, cocycle, jacobi or all
        #[arg(value_parser = str::parse::<Suite>, default_value = "all")]
        suite: Suite,
    },
    /// Write the basis family as a JSON basis file.
    ExpandBasis,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON config file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Genus of the surface (0 or 1; others need --basis-file)
    #[arg(long, global = true)]
    genus: Option<u32>,
    /// Period ratio, e.g. 0.5+0.8i
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    tau: Option<Complex64>,
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true, requires = "omega2")]
    omega1: Option<Complex64>,
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true, requires = "omega1")]
    omega2: Option<Complex64>,
    /// Marked points sit at z0 and -z0
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    z0: Option<Complex64>,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Bound on |m|, |n|: an integer on genus 0, a half-odd integer (3.5 or 7/2) on genus 1
    #[arg(long, global = true, value_parser = str::parse::<HalfInt>)]
    range: Option<HalfInt>,
    /// Number of Laurent coefficients per expansion
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Absolute tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// json or csv
    #[arg(long, global = true, value_parser = str::parse::<OutputFormat>)]
    format: Option<OutputFormat>,
    /// Read basis expansions from this file instead of building them
    #[arg(long, global = true)]
    basis_file: Option<PathBuf>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Flags {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            genus: self.genus,
            tau: self.tau,
            omega1: self.omega1,
            omega2: self.omega2,
            z0: self.z0,
            q: self.q,
            alpha: self.alpha,
            beta: self.beta,
            range: self.range,
            depth: self.depth,
            tol: self.tol,
            format: self.format,
            basis_file: self.basis_file.clone(),
            out: self.out.clone(),
        }
    }
}

enum Failure {
    Usage(String),
    Computation(String),
    Verification,
}

fn classify(e: KnError) -> Failure {
    match e.root() {
        KnError::Config(_) | KnError::InvalidLattice(_) | KnError::InvalidSurface(_) | KnError::IndexParity(_) => {
            Failure::Usage(e.to_string())
        }
        _ => Failure::Computation(e.to_string()),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Computation(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| Failure::Computation(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.flags.config {
        Some(path) => ConfigLayer::from_file(path).map_err(classify)?,
        None => ConfigLayer::default(),
    };
    let layer = file.merge(cli.flags.layer());
    let config = RunConfig::from_layer(&layer).map_err(classify)?;
    let out = layer.out.as_ref();
    match cli.command {
        Command::Table { kind } => emit(&cmd_table(&config, kind).map_err(classify)?, out),
        Command::ExpandBasis => emit(&cmd_expand_basis(&config).map_err(classify)?, out),
        Command::Verify { suite } => {
            let report = cmd_verify(&config, suite).map_err(classify)?;
            emit(&report.render(&config, config.output_format).map_err(classify)?, out)?;
            eprint!("{}", report.summary());
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Computation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_COMPUTATION)
        }
        Err(Failure::Verification) => ExitCode::from(EXIT_VERIFY_FAILED),
    }
}
