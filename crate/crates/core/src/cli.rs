//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invariant violation or negative verdict,
//! 2 malformed input or usage error, 3 size cap exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::cert::{certify, from_unitary, standard_state, AnticommutingUnitary};
use crate::dynamics::evolve;
use crate::fock::{self, covariance_from_vector, density_from_covariance, vacuum_of_projection};
use crate::io;
use crate::jordan_wigner::chi_covariance;
use crate::selfdual::{product_state, BasisProjection, CovarianceMatrix, SystemShape};
use crate::wick::wick_expectation;
use crate::{Error, DEFAULT_EPS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fermigauss",
    version,
    about = "Quasifree fermion states in the self-dual formalism"
)]
pub struct Cli {
    /// Numerical tolerance for every invariant check.
    #[arg(long, global = true, env = "FERMIGAUSS_EPS", default_value_t = DEFAULT_EPS)]
    pub eps: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the covariance invariants.
    Validate { file: PathBuf },
    /// Decide maximal entanglement and report all deviations.
    Certify { file: PathBuf },
    /// Emit a covariance matrix.
    Construct {
        #[command(flatten)]
        source: ConstructArgs,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Evolve an initial state under the entangling Hamiltonian.
    Evolve {
        #[arg(long, allow_negative_numbers = true)]
        time: f64,
        /// Initial state; the fully occupied product state if omitted.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Modes per party for the default initial state.
        #[arg(long, default_value_t = 1)]
        modes: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Entanglement of formation of the even-even restriction, in bits.
    Eof {
        file: PathBuf,
        /// Use the dense Fock-space oracle (the only available method).
        #[arg(long)]
        oracle: bool,
    },
    /// Expectation of a product of field operators.
    Wick { state: PathBuf, fields: PathBuf },
    /// Cross-check a state against the dense Fock-space oracle.
    OracleCheck { state: PathBuf },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ConstructArgs {
    /// Standard maximally entangled state on N + N modes
    #[arg(long, value_name = "N")]
    pub standard: Option<usize>,
    /// Spin-chain pair state on N + N modes
    #[arg(long, value_name = "N")]
    pub jw: Option<usize>,
    /// Product state E on N + N modes
    #[arg(long, value_name = "N")]
    pub product: Option<usize>,
    /// State built from a Γ-anticommuting unitary (JSON matrix)
    #[arg(long, value_name = "FILE")]
    pub from_unitary: Option<PathBuf>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::InvalidShape(_) | Error::ShapeMismatch { .. } => {
            EXIT_MALFORMED
        }
        Error::SizeCap { .. } => EXIT_CAP,
        _ => EXIT_VIOLATION,
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stdin_used: bool,
}

impl Io<'_> {
    fn read(&mut self, path: &PathBuf) -> Result<String, Error> {
        if path.as_os_str() == "-" {
            if self.stdin_used {
                return Err(Error::InvalidInput("standard input used twice".into()));
            }
            self.stdin_used = true;
            let mut s = String::new();
            self.stdin
                .read_to_string(&mut s)
                .map_err(|e| Error::InvalidInput(format!("reading stdin: {e}")))?;
            return Ok(s);
        }
        fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("reading {}: {e}", path.display())))
    }

    fn emit(&mut self, output: Option<&PathBuf>, text: &str) -> Result<(), Error> {
        match output {
            Some(p) if p.as_os_str() != "-" => fs::write(p, format!("{text}\n"))
                .map_err(|e| Error::InvalidInput(format!("writing {}: {e}", p.display()))),
            _ => writeln!(self.stdout, "{text}")
                .map_err(|e| Error::InvalidInput(format!("writing stdout: {e}"))),
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("finite floats serialize")
}

/// Parse arguments and run one command. Returns the process exit code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_MALFORMED
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let mut ctx = Io {
        stdin,
        stdout,
        stdin_used: false,
    };
    match dispatch(&cli, &mut ctx) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli, ctx: &mut Io<'_>) -> Result<i32, Error> {
    let eps = cli.eps;
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be non-negative, got {eps}"
        )));
    }
    match &cli.command {
        Command::Validate { file } => {
            let s = io::parse_covariance(&ctx.read(file)?)?;
            let report = s.validate(eps);
            ctx.emit(None, &to_json(&report))?;
            Ok(if report.valid {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Certify { file } => {
            let s = io::parse_covariance(&ctx.read(file)?)?;
            let cert = certify(&s, eps)?;
            ctx.emit(None, &io::certificate_to_json(&cert))?;
            Ok(if cert.is_maximal() {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Construct { source, output } => {
            let p = construct(source, eps, ctx)?;
            ctx.emit(output.as_ref(), &io::covariance_to_json(&p))?;
            Ok(EXIT_OK)
        }
        Command::Evolve {
            time,
            input,
            modes,
            output,
        } => {
            let initial = match input {
                Some(path) => {
                    let s = io::parse_covariance(&ctx.read(path)?)?;
                    BasisProjection::new(checked(s, eps)?, eps)?
                }
                None => product_state(SystemShape::symmetric(*modes)?),
            };
            let et = evolve(&initial, *time, eps)?;
            ctx.emit(output.as_ref(), &io::covariance_to_json(&et))?;
            Ok(EXIT_OK)
        }
        Command::Eof { file, oracle: _ } => {
            let s = checked(io::parse_covariance(&ctx.read(file)?)?, eps)?;
            let shape = s.shape();
            let rho = density_from_covariance(&s, eps)?;
            let bits = fock::eof_even_even(shape, &rho, eps)?;
            let blocks = fock::parity_blocks(shape, &rho)?;
            let weights: serde_json::Map<String, serde_json::Value> = blocks
                .blocks
                .iter()
                .map(|b| (b.label.as_str().to_string(), json!(b.weight)))
                .collect();
            ctx.emit(
                None,
                &to_json(&json!({ "eof_bits": bits, "weights": weights })),
            )?;
            Ok(EXIT_OK)
        }
        Command::Wick { state, fields } => {
            let s = checked(io::parse_covariance(&ctx.read(state)?)?, eps)?;
            let fs = io::parse_fields(&ctx.read(fields)?, s.shape())?;
            let z = wick_expectation(&s, &fs)?;
            ctx.emit(None, &to_json(&json!({ "re": z.re, "im": z.im })))?;
            Ok(EXIT_OK)
        }
        Command::OracleCheck { state } => {
            let s = checked(io::parse_covariance(&ctx.read(state)?)?, eps)?;
            oracle_check(&s, eps, ctx)
        }
    }
}

fn checked(s: CovarianceMatrix, eps: f64) -> Result<CovarianceMatrix, Error> {
    let report = s.validate(eps);
    if report.valid {
        Ok(s)
    } else {
        Err(Error::InvalidCovariance(report.to_string()))
    }
}

fn construct(args: &ConstructArgs, eps: f64, ctx: &mut Io<'_>) -> Result<BasisProjection, Error> {
    if let Some(n) = args.standard {
        return standard_state(n);
    }
    if let Some(n) = args.jw {
        return chi_covariance(n);
    }
    if let Some(n) = args.product {
        return Ok(product_state(SystemShape::symmetric(n)?));
    }
    let path = args
        .from_unitary
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("construct needs a state option".into()))?;
    let u = AnticommutingUnitary::new(io::parse_matrix(&ctx.read(path)?)?, eps)?;
    Ok(from_unitary(&u))
}

#[derive(Serialize)]
struct OracleReport {
    pure: bool,
    round_trip: f64,
    verdict: Option<crate::cert::Verdict>,
    def1: Option<fock::Def1Report>,
    consistent: bool,
}

/// Build the dense state, recompute its covariance and, for equal mode
/// counts, compare the block-wise entanglement check with the certificate.
fn oracle_check(s: &CovarianceMatrix, eps: f64, ctx: &mut Io<'_>) -> Result<i32, Error> {
    let shape = s.shape();
    let pure = s.is_basis_projection(eps).is_projection;
    let (rho, round_trip) = if pure {
        let omega = vacuum_of_projection(s, eps)?;
        let back = covariance_from_vector(shape, &omega)?;
        (omega.projector(), back.distance(s))
    } else {
        let rho = density_from_covariance(s, eps)?;
        let back = fock::covariance_from_density(shape, &rho)?;
        (rho, back.distance(s))
    };
    let tolerance = eps.max(1e-9);
    let (verdict, def1) = if shape.is_symmetric() {
        let cert = certify(s, eps)?;
        (
            Some(cert.verdict),
            Some(fock::check_def1(shape, &rho, tolerance)?),
        )
    } else {
        (None, None)
    };
    let agrees = match (&verdict, &def1) {
        (Some(v), Some(d)) => {
            d.degenerate || (*v == crate::cert::Verdict::MaximallyEntangled) == d.holds
        }
        _ => true,
    };
    let consistent = round_trip <= tolerance && agrees;
    let report = OracleReport {
        pure,
        round_trip,
        verdict,
        def1,
        consistent,
    };
    ctx.emit(None, &to_json(&report))?;
    Ok(if consistent { EXIT_OK } else { EXIT_VIOLATION })
}
