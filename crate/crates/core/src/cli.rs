//! Command-line driver: analysis reports, figure CSVs, the fair optimum and
//! Monte Carlo runs.
//!
//! Every failure exits with status 2 and one line on standard error.
//! Floating-point output carries 12 significant digits.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::bounds::{fair_optimize, figure1_scan, figure2_scan, BoundsError};
use crate::protocol::{
    analyze, builtin_protocol, load_protocol, monte_carlo_with, BobVerification, ProtocolError,
    ProtocolSpec, SimConfig, Strategy, BUILTIN_PROTOCOLS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "csqbc",
    version,
    about = "Cheat-sensitive quantum bit commitment toolkit"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form report for a built-in protocol or a protocol JSON file.
    Analyze {
        #[arg(long)]
        protocol: String,
        /// Overrides the protocol's check probability.
        #[arg(long)]
        zeta: Option<f64>,
    },
    /// Bob's pass probability and information gain against alpha (`alpha,p_b,i_m`).
    Fig1 {
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Combined lower bound over trace distance and zeta (`d,zeta,bound`).
    Fig2 {
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimum of the fair protocol family.
    Fair {
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Seeded Monte Carlo run of the commit/hold/unveil protocol.
    Montecarlo {
        #[arg(long)]
        protocol: String,
        #[arg(long, default_value = "honest")]
        alice: Strategy,
        #[arg(long, default_value = "honest")]
        bob: Strategy,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value_t = BobCheck::Projective)]
        bob_check: BobCheck,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BobCheck {
    Projective,
    Decode,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Invalid(String),
}

/// Parses `args` (program name first) and runs the subcommand; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(config) => config,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let rendered = e.to_string();
                    let line = rendered
                        .lines()
                        .find(|l| !l.trim().is_empty())
                        .unwrap_or("invalid arguments");
                    let _ = writeln!(stderr, "{}", line.trim());
                    EXIT_FAILURE
                }
            };
        }
    };
    match execute(&config.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.to_string().replace('\n', " "));
            EXIT_FAILURE
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Analyze { protocol, zeta } => {
            let spec = resolve_protocol(protocol, *zeta)?;
            let report = analyze(&spec)?;
            let lines = [
                ("protocol", spec.name.clone()),
                ("trace distance D", fmt12(report.d)),
                ("fidelity F", fmt12(report.f)),
                ("decode reliability", fmt12(report.reliability)),
                ("P_B", fmt12(report.p_b)),
                ("P_A", fmt12(report.p_a)),
                ("zeta", fmt12(report.zeta)),
                ("P_A*", fmt12(report.p_a_star)),
                ("P_B*", fmt12(report.p_b_star)),
            ];
            for (label, value) in lines {
                emit(out, &format!("{label}: {value}"))?;
            }
            emit(out, &to_json(&report))
        }
        Command::Fig1 { step, out: path } => {
            let rows = figure1_scan(*step)?;
            let body = csv(
                "alpha,p_b,i_m",
                rows.iter().map(|r| [r.alpha, r.p_b, r.i_m]),
            );
            write_atomic(path, &body)?;
            emit(
                out,
                &format!("wrote {} rows to {}", rows.len(), path.display()),
            )
        }
        Command::Fig2 { step, out: path } => {
            let rows = figure2_scan(*step)?;
            let body = csv("d,zeta,bound", rows.iter().map(|r| [r.d, r.zeta, r.bound]));
            write_atomic(path, &body)?;
            emit(
                out,
                &format!("wrote {} rows to {}", rows.len(), path.display()),
            )
        }
        Command::Fair { tolerance } => {
            if !(*tolerance > 0.0 && tolerance.is_finite()) {
                return Err(CliError::Invalid(format!(
                    "--tolerance must be positive, got {tolerance}"
                )));
            }
            let opt = fair_optimize(*tolerance);
            #[derive(Serialize)]
            struct Fair {
                alpha: f64,
                zeta: f64,
                p_star: f64,
            }
            emit(
                out,
                &to_json(&Fair {
                    alpha: opt.alpha_star,
                    zeta: opt.zeta_star,
                    p_star: opt.p_star,
                }),
            )
        }
        Command::Montecarlo {
            protocol,
            alice,
            bob,
            trials,
            seed,
            zeta,
            workers,
            bob_check,
        } => {
            if *workers == Some(0) {
                return Err(CliError::Invalid("--workers must be at least 1".into()));
            }
            let spec = resolve_protocol(protocol, *zeta)?;
            let config = SimConfig {
                bob_verification: match bob_check {
                    BobCheck::Projective => BobVerification::Projective,
                    BobCheck::Decode => BobVerification::DecodeAndCompare,
                },
                workers: *workers,
            };
            let stats = monte_carlo_with(&spec, *alice, *bob, *trials, *seed, config)?;
            emit(out, &to_json(&stats))
        }
    }
}

/// A built-in protocol name, otherwise a path to a protocol JSON file.
pub fn resolve_protocol(name: &str, zeta: Option<f64>) -> Result<ProtocolSpec, CliError> {
    let spec = if BUILTIN_PROTOCOLS.contains(&name) {
        builtin_protocol(name)?
    } else {
        let text = fs::read_to_string(name).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => {
                CliError::Protocol(ProtocolError::UnknownProtocol(name.into()))
            }
            _ => CliError::Io {
                path: name.into(),
                source: e,
            },
        })?;
        load_protocol(&text)?
    };
    Ok(match zeta {
        Some(z) => spec.with_zeta(z)?,
        None => spec,
    })
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Decimal rendering of [`round12`], without exponent or negative zero.
pub fn fmt12(x: f64) -> String {
    format!("{}", round12(x))
}

/// Pretty JSON with every float rounded by [`round12`].
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report serializes");
    round_floats(&mut v);
    serde_json::to_string_pretty(&v).expect("value serializes")
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round12)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn csv(header: &str, rows: impl Iterator<Item = [f64; 3]>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for [a, b, c] in rows {
        s.push_str(&format!("{},{},{}\n", fmt12(a), fmt12(b), fmt12(c)));
    }
    s
}

/// Writes `body` beside `path` and renames it into place.
fn write_atomic(path: &Path, body: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Invalid(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::write(&tmp, body).and_then(|()| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

fn emit(out: &mut dyn Write, line: &str) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}
