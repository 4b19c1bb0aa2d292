mod files;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mamrealize_core::{
    check_conditions, check_conditions3, check_conditions_pkpd, controllable_canonical,
    impulse_max_difference, realize, realize3, realize_pkpd, simulate_impulse, ConditionReport,
    RealizationError, StateSpaceModel, Tolerances, TransferFunction, Verdict,
};

use files::{read_model, read_transfer_function, write_output, write_stdout, ModelOut};
use report::{Envelope, Verification};

/// Exit status contract shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Positive = 0,
    Error = 1,
    NotPositive = 2,
    NoRealization = 3,
}

impl Status {
    fn from_verdict(v: Verdict) -> Status {
        if v.is_positive() {
            Status::Positive
        } else if v.is_realizable() {
            Status::NotPositive
        } else {
            Status::NoRealization
        }
    }
}

#[derive(Debug)]
pub struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "mamrealize",
    version,
    about = "Mammillary compartmental realization of transfer functions and PK-PD effect-site enumeration"
)]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    /// Root is real iff |Im r| <= tol_im (1 + |r|)
    #[arg(long = "tol-im", env = "MAMREALIZE_TOL_IM", global = true)]
    tol_im: Option<f64>,
    /// Roots coincide iff |ri - rj| <= tol_sep (1 + |ri|)
    #[arg(long = "tol-sep", env = "MAMREALIZE_TOL_SEP", global = true)]
    tol_sep: Option<f64>,
    /// Allowed coefficientwise mismatch when verifying a realization
    #[arg(long = "tol-verify", env = "MAMREALIZE_TOL_VERIFY", global = true)]
    tol_verify: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<Tolerances, CliError> {
        let mut t = Tolerances::default();
        for (name, value, slot) in [
            ("--tol-im", self.tol_im, &mut t.tol_im),
            ("--tol-sep", self.tol_sep, &mut t.tol_sep),
            ("--tol-verify", self.tol_verify, &mut t.tol_verify),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError(format!(
                        "{name} must be positive and finite, got {v}"
                    )));
                }
                *slot = v;
            }
        }
        Ok(t)
    }
}

#[derive(Args)]
struct ImpulseArgs {
    /// Also compare impulse responses against a companion-form realization
    #[arg(long = "verify-impulse")]
    verify_impulse: bool,
    /// Horizon for --verify-impulse
    #[arg(long = "T", default_value_t = 2000.0, requires = "verify_impulse")]
    t_end: f64,
    /// Step for --verify-impulse
    #[arg(long, default_value_t = 1.0, requires = "verify_impulse")]
    dt: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// PK-PD for degree-4 denominators with relative degree 2, else mammillary
    Auto,
    Mammillary,
    Order3,
    Pkpd,
}

#[derive(Subcommand)]
enum Command {
    /// Realize a transfer function as a mammillary model
    Realize {
        /// Transfer function JSON ({"num": [...], "den": [...]}), or - for stdin
        input: PathBuf,
        /// Use the closed-form three-compartment algorithm
        #[arg(long)]
        order3: bool,
        #[command(flatten)]
        impulse: ImpulseArgs,
    },
    /// Enumerate PK-PD effect-site realizations of a fourth-order transfer function
    Pkpd {
        input: PathBuf,
        /// Select the accepted branch whose ke0 is closest to this value
        #[arg(long = "ref-ke0")]
        ref_ke0: Option<f64>,
        #[command(flatten)]
        impulse: ImpulseArgs,
    },
    /// Transfer function of a parameter file
    Forward {
        /// Model JSON with "kind": "mammillary" | "pkpd" | "state_space"
        params: PathBuf,
    },
    /// Impulse response of a parameter file as CSV (t,y,x1..xn)
    Simulate {
        params: PathBuf,
        #[arg(long = "T")]
        t_end: f64,
        #[arg(long)]
        dt: f64,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the realizability conditions without realizing
    Check {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Status::Error as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let status = match run(cli) {
        Ok(s) => s,
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            Status::Error
        }
    };
    ExitCode::from(status as u8)
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let tol = cli.tol.resolve()?;
    match cli.command {
        Command::Realize {
            input,
            order3,
            impulse,
        } => cmd_realize(&input, order3, &impulse, &tol),
        Command::Pkpd {
            input,
            ref_ke0,
            impulse,
        } => cmd_pkpd(&input, ref_ke0, &impulse, &tol),
        Command::Forward { params } => cmd_forward(&params),
        Command::Simulate {
            params,
            t_end,
            dt,
            out,
        } => cmd_simulate(&params, t_end, dt, out.as_deref()),
        Command::Check { input, mode } => cmd_check(&input, mode, &tol),
    }
}

fn impulse_error(
    realized: &StateSpaceModel,
    h: &TransferFunction,
    args: &ImpulseArgs,
) -> Result<Option<f64>, CliError> {
    if !args.verify_impulse {
        return Ok(None);
    }
    let canonical = controllable_canonical(h);
    Ok(Some(impulse_max_difference(
        realized, &canonical, args.t_end, args.dt,
    )?))
}

fn cmd_realize(
    input: &std::path::Path,
    order3: bool,
    impulse: &ImpulseArgs,
    tol: &Tolerances,
) -> Result<Status, CliError> {
    let h = read_transfer_function(input)?;
    let result = if order3 {
        realize3(&h, tol)
    } else {
        realize(&h, tol)
    };
    let mut env = Envelope::new("realize", h.clone(), *tol);
    let status = match result {
        Ok(r) => {
            let model = mamrealize_core::build_mammillary(&r.params);
            env.verification = Some(Verification {
                coefficient_residual: r.verification_residual,
                impulse_max_error: impulse_error(&model, &h, impulse)?,
            });
            env.warnings.extend(r.report.warnings.iter().cloned());
            env.set_report(r.report);
            env.params = Some(ModelOut::Mammillary(r.params));
            Status::from_verdict(env.verdict.expect("report set"))
        }
        Err(RealizationError::ConditionsFailed(report)) => {
            env.warnings.extend(report.warnings.iter().cloned());
            env.set_report(*report);
            Status::NoRealization
        }
        Err(e) => return Err(e.into()),
    };
    env.emit()?;
    Ok(status)
}

fn cmd_pkpd(
    input: &std::path::Path,
    ref_ke0: Option<f64>,
    impulse: &ImpulseArgs,
    tol: &Tolerances,
) -> Result<Status, CliError> {
    let h = read_transfer_function(input)?;
    let mut env = Envelope::new("pkpd", h.clone(), *tol);
    let status = match realize_pkpd(&h, ref_ke0, tol) {
        Ok(e) => {
            let mut residual = 0.0_f64;
            let mut impulse_max: Option<f64> = None;
            for p in e.accepted_params() {
                residual = residual.max(p.transfer_function().coefficient_residual(&h));
                if let Some(err) = impulse_error(&mamrealize_core::build_pkpd(&p), &h, impulse)? {
                    impulse_max = Some(impulse_max.map_or(err, |m| m.max(err)));
                }
            }
            if e.accepted_count() > 0 {
                env.verification = Some(Verification {
                    coefficient_residual: residual,
                    impulse_max_error: impulse_max,
                });
            } else {
                eprintln!("no accepted branch");
            }
            let status = if e.accepted_count() > 0 {
                Status::Positive
            } else {
                Status::NoRealization
            };
            env.warnings.extend(e.report.warnings.iter().cloned());
            env.verdict = Some(e.report.verdict);
            if let Some(p) = e.selected.and_then(|i| e.branches[i].params.clone()) {
                env.params = Some(ModelOut::Pkpd(p));
            }
            env.enumeration = Some(e);
            status
        }
        Err(RealizationError::ConditionsFailed(report)) => {
            env.warnings.extend(report.warnings.iter().cloned());
            env.set_report(*report);
            Status::NoRealization
        }
        Err(e) => return Err(e.into()),
    };
    env.emit()?;
    Ok(status)
}

fn cmd_forward(params: &std::path::Path) -> Result<Status, CliError> {
    let loaded = read_model(params)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let h = mamrealize_core::transfer_function(&loaded.model)?;
    #[derive(serde::Serialize)]
    struct Forward<'a> {
        num: &'a [f64],
        den: &'a [f64],
        #[serde(skip_serializing_if = "Option::is_none")]
        permutation: Option<&'a [usize]>,
    }
    write_output(&Forward {
        num: h.num().coeffs(),
        den: h.den().coeffs(),
        permutation: loaded.permutation.as_deref(),
    })?;
    Ok(Status::Positive)
}

fn cmd_simulate(
    params: &std::path::Path,
    t_end: f64,
    dt: f64,
    out: Option<&std::path::Path>,
) -> Result<Status, CliError> {
    let loaded = read_model(params)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let tr = simulate_impulse(&loaded.model, t_end, dt)?;
    let csv = tr.to_csv();
    match out {
        Some(path) => {
            std::fs::write(path, csv)
                .map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {} rows to {}", tr.len(), path.display());
        }
        None => write_stdout(&csv)?,
    }
    Ok(Status::Positive)
}

fn cmd_check(input: &std::path::Path, mode: Mode, tol: &Tolerances) -> Result<Status, CliError> {
    let h = read_transfer_function(input)?;
    let mode = match mode {
        Mode::Auto if h.order() == 4 && h.relative_degree() == 2 => Mode::Pkpd,
        Mode::Auto => Mode::Mammillary,
        m => m,
    };
    let report: ConditionReport = match mode {
        Mode::Pkpd => check_conditions_pkpd(&h, tol)?,
        Mode::Order3 => check_conditions3(&h, tol)?,
        _ => check_conditions(&h, tol),
    };
    let mut env = Envelope::new("check", h, *tol);
    env.warnings.extend(report.warnings.iter().cloned());
    let status = Status::from_verdict(report.verdict);
    env.set_report(report);
    env.emit()?;
    Ok(status)
}
