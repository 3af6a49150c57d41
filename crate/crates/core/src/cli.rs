//! The `qfc` command line.
//!
//! Exit codes: 0 success, 1 language error (parse or type), 2 I/O or
//! configuration error, 3 synthesis found nothing within the depth cap.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::densmat::{matrix_from_json, DensityMatrix};
use crate::gates::{default_max_depth, synthesize, SynthOutcome};
use crate::interp::{run_exact, InterpConfig};
use crate::lang::{check_source, CheckOutcome, TypedProgram};
use crate::qram::{run_shots, ShotConfig};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_LANGUAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qfc", version, about = "Quantum flow-chart programs: check, run, synthesize")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Exact,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dump {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and typecheck a program.
    Check { file: PathBuf },
    /// Execute a program.
    Run(RunArgs),
    /// Search for a gate sequence equal to a target unitary up to global phase.
    Synth(SynthArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pub backend: Backend,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest register allowed; defaults to $QFC_MAX_QUBITS, then 10.
    #[arg(long, env = "QFC_MAX_QUBITS", default_value_t = 10)]
    pub max_qubits: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub loop_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Density matrix (matrix JSON) bound to the first allocations of `main`.
    #[arg(long)]
    pub input_state: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub dump: Dump,
    #[arg(long)]
    pub keep_branches: bool,
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Unitary in matrix JSON.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    /// Defaults to 8 for one line and 5 for two.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Number of lines; inferred from the target when omitted.
    #[arg(long)]
    pub lines: Option<usize>,
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn fail(&mut self, code: i32, msg: impl std::fmt::Display) -> i32 {
        let _ = writeln!(self.err, "qfc: {msg}");
        code
    }
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_program(io: &mut Io, path: &Path) -> Result<TypedProgram, i32> {
    let src = read(path).map_err(|e| io.fail(EXIT_CONFIG, e))?;
    match check_source(&src) {
        CheckOutcome::Typed(p) => Ok(p),
        CheckOutcome::Parse(e) => {
            let _ = writeln!(io.err, "{}: {}: ParseError: {}", path.display(), e.span, e);
            Err(EXIT_LANGUAGE)
        }
        CheckOutcome::Type(errs) => {
            for e in &errs.0 {
                let _ = writeln!(io.err, "{}: {}: {}: {}", path.display(), e.span(), e.variant_name(), e);
            }
            Err(EXIT_LANGUAGE)
        }
    }
}

fn cmd_check(io: &mut Io, file: &Path) -> i32 {
    match load_program(io, file) {
        Ok(_) => {
            let _ = writeln!(io.out, "OK");
            EXIT_OK
        }
        Err(code) => code,
    }
}

fn cmd_run(io: &mut Io, args: &RunArgs) -> i32 {
    let program = match load_program(io, &args.file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    if !(args.loop_tol >= 0.0 && args.loop_tol.is_finite()) {
        return io.fail(EXIT_CONFIG, format!("--loop-tol must be a nonnegative number, got {}", args.loop_tol));
    }
    let text = match args.backend {
        Backend::Exact => {
            let input_state = match &args.input_state {
                None => None,
                Some(path) => {
                    let rho = read(path)
                        .and_then(|b| String::from_utf8(b).map_err(|e| format!("{}: {e}", path.display())))
                        .and_then(|s| matrix_from_json(&s).map_err(|e| format!("{}: {e}", path.display())))
                        .and_then(|m| DensityMatrix::new(m).map_err(|e| format!("{}: {e}", path.display())));
                    match rho {
                        Ok(r) => Some(r),
                        Err(e) => return io.fail(EXIT_CONFIG, e),
                    }
                }
            };
            let cfg = InterpConfig {
                max_qubits: args.max_qubits,
                loop_tol: args.loop_tol,
                max_iters: args.max_iters,
                keep_branches: args.keep_branches,
                input_state,
                ..InterpConfig::default()
            };
            match run_exact(&program, &cfg) {
                Ok(r) => match args.dump {
                    Dump::Json => report::render(&report::exact_document(&r)),
                    Dump::Text => report::exact_text(&r),
                },
                Err(e) => return io.fail(EXIT_CONFIG, e),
            }
        }
        Backend::Sample => {
            if args.input_state.is_some() {
                return io.fail(EXIT_CONFIG, "--input-state is only supported by the exact backend");
            }
            let cfg = ShotConfig {
                shots: args.shots,
                seed: args.seed,
                pool_size: args.max_qubits,
                max_iters: args.max_iters,
            };
            match run_shots(&program, &cfg) {
                Ok(r) => match args.dump {
                    Dump::Json => report::render(&report::sample_document(&r)),
                    Dump::Text => report::sample_text(&r),
                },
                Err(e) => return io.fail(EXIT_CONFIG, e),
            }
        }
    };
    let _ = io.out.write_all(text.as_bytes());
    EXIT_OK
}

fn cmd_synth(io: &mut Io, args: &SynthArgs) -> i32 {
    let target = match read(&args.target)
        .and_then(|b| String::from_utf8(b).map_err(|e| e.to_string()))
        .and_then(|s| matrix_from_json(&s).map_err(|e| e.to_string()))
    {
        Ok(m) => m,
        Err(e) => return io.fail(EXIT_CONFIG, format!("{}: {e}", args.target.display())),
    };
    let lines = args.lines.unwrap_or_else(|| target.num_qubits());
    let depth = args.max_depth.unwrap_or_else(|| default_max_depth(lines));
    match synthesize(&target, lines, args.eps, depth) {
        Ok(outcome) => {
            let _ = io.out.write_all(report::render(&report::synth_document(&outcome)).as_bytes());
            match outcome {
                SynthOutcome::Found { .. } => EXIT_OK,
                SynthOutcome::NotFound { .. } => EXIT_NOT_FOUND,
            }
        }
        Err(e) => io.fail(EXIT_CONFIG, e),
    }
}

/// Parses `args` (including the program name) and runs the command, returning
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return if code == 0 { EXIT_OK } else { EXIT_CONFIG };
        }
    };
    let mut io = Io { out, err };
    match &cli.command {
        Command::Check { file } => cmd_check(&mut io, file),
        Command::Run(a) => cmd_run(&mut io, a),
        Command::Synth(a) => cmd_synth(&mut io, a),
    }
}
