//! The `mnexp` command line.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::exact_arith::{check_odd_prime, fmt_rat, parse_rat, Rat};
use crate::expansions::{
    build_named, registry, residual_check, Method, uniformizer, verify_many, NamedParams, VerificationReport, NAMED_IDS,
};
use crate::mn_series::MnCtx;
use crate::newton::newton_cyclotomic;
use crate::selftest;

#[derive(Parser, Debug)]
#[command(name = "mnexp", version, about = "Exact truncated expansions in the Mal'cev-Neumann field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Run identity checks from the registry.
    Verify(VerifyArgs),
    /// Print a named closed-form element.
    Expand(ExpandArgs),
    /// Run the Newton loop on the cyclotomic polynomial of order p^n.
    Newton(NewtonArgs),
    /// Build the uniformizer pi^(m,1) and certify its valuation.
    Uniformizer(UniformizerArgs),
    /// Compare the truncated sigma expansion of zeta_(p^n) with a Newton root.
    Residual(ResidualArgs),
    /// Run the property suites at reduced sizes.
    Selftest,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    prime: i64,
    #[arg(long, conflicts_with = "all", required_unless_present = "all")]
    id: Option<String>,
    #[arg(long)]
    all: bool,
    /// With `--all`, keep only the ids checked by this method.
    #[arg(long, value_enum, requires = "all")]
    method: Option<MethodArg>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Congruence,
    MnExact,
    Sigma,
    Slope,
}

impl MethodArg {
    fn method(self) -> Method {
        match self {
            MethodArg::Congruence => Method::Congruence,
            MethodArg::MnExact => Method::MnExact,
            MethodArg::Sigma => Method::Sigma,
            MethodArg::Slope => Method::Slope,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[arg(long)]
    name: String,
    #[arg(long)]
    prime: i64,
    #[arg(long, default_value_t = 2)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    beta: i64,
    #[arg(long = "sigma-terms", default_value_t = 3)]
    sigma_terms: u32,
    /// Truncation for elements that are exact finite sums.
    #[arg(long, default_value = "3")]
    trunc: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
pub struct NewtonArgs {
    #[arg(long)]
    prime: i64,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    steps: usize,
    /// Working precision; tried along a ladder when absent.
    #[arg(long)]
    trunc: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
pub struct UniformizerArgs {
    #[arg(long)]
    prime: i64,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
pub struct ResidualArgs {
    #[arg(long)]
    prime: i64,
    #[arg(long)]
    n: u32,
    #[arg(long = "sigma-terms", default_value_t = 3)]
    sigma_terms: u32,
    #[arg(long)]
    json: bool,
}

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses `argv` (including the program name), runs the command and writes
/// its output to `out`. Returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

struct Usage(String);

fn prime(p: i64) -> Result<(), Usage> {
    check_odd_prime(p).map(|_| ()).map_err(|e| Usage(e.to_string()))
}

fn emit(out: &mut dyn Write, s: impl std::fmt::Display) {
    let _ = writeln!(out, "{s}");
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

fn execute(cmd: CliCommand, out: &mut dyn Write) -> Result<i32, Usage> {
    match cmd {
        CliCommand::Verify(a) => {
            prime(a.prime)?;
            let ids: Vec<&str> = match &a.id {
                Some(id) => {
                    if !registry().iter().any(|e| e.id == id) {
                        return Err(Usage(format!("unknown identity id {id:?}")));
                    }
                    vec![id.as_str()]
                }
                None => registry()
                    .iter()
                    .filter(|e| a.method.map_or(true, |m| m.method() == e.method))
                    .map(|e| e.id)
                    .collect(),
            };
            let reports = verify_many(&ids, a.prime);
            print_reports(out, &reports, a.json, a.id.is_some());
            Ok(if reports.iter().all(VerificationReport::passed) { EXIT_OK } else { EXIT_FAIL })
        }
        CliCommand::Expand(a) => {
            prime(a.prime)?;
            if !NAMED_IDS.contains(&a.name.as_str()) {
                return Err(Usage(format!("unknown element name {:?}; known: {}", a.name, NAMED_IDS.join(", "))));
            }
            let trunc = parse_rat(&a.trunc).map_err(|e| Usage(e.to_string()))?;
            let params = NamedParams { n: a.n, beta: a.beta, sigma_terms: a.sigma_terms, trunc };
            match build_named(&a.name, a.prime, &params) {
                Ok(x) => {
                    match a.format {
                        Format::Text => emit(out, &x),
                        Format::Json => emit(out, pretty(&x.to_json())),
                    }
                    Ok(EXIT_OK)
                }
                Err(e) => Err(Usage(e.to_string())),
            }
        }
        CliCommand::Newton(a) => {
            prime(a.prime)?;
            if a.n < 1 || a.steps < 1 {
                return Err(Usage("newton needs --n >= 1 and --steps >= 1".into()));
            }
            let work = match &a.trunc {
                Some(t) => Some(parse_rat(t).map_err(|e| Usage(e.to_string()))?),
                None => None,
            };
            let ctx = MnCtx::new(a.prime).map_err(|e| Usage(e.to_string()))?;
            match newton_cyclotomic(&ctx, a.n, a.steps, work.as_ref()) {
                Ok((root, trace)) => {
                    if a.json {
                        emit(out, pretty(&json!({"approximation": root.to_json(), "trace": trace.to_json(&ctx)})));
                    } else {
                        emit(out, &root);
                        let f = ctx.field();
                        for s in &trace.steps {
                            emit(
                                out,
                                format!(
                                    "step {}: s_max {} m_max {} root {} v(P(r)) {}",
                                    s.step,
                                    fmt_rat(&s.s_max),
                                    s.m_max,
                                    f.format(s.root),
                                    s.value_valuation.as_ref().map(fmt_rat).unwrap_or_else(|| "inf".into())
                                ),
                            );
                        }
                    }
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(EXIT_FAIL)
                }
            }
        }
        CliCommand::Uniformizer(a) => {
            prime(a.prime)?;
            if a.m < 2 {
                return Err(Usage("uniformizer needs --m >= 2".into()));
            }
            match uniformizer(a.prime, a.m) {
                Ok(u) => {
                    let pi = a.prime;
                    let expected = Rat::new(1.into(), (pi.pow(a.m) * (pi - 1)).into());
                    let ok = u.valuation.as_ref() == Some(&expected);
                    let v = u.valuation.as_ref().map(fmt_rat);
                    if a.json {
                        let mut e = u.element.to_json();
                        e["p"] = pi.into();
                        emit(
                            out,
                            pretty(&json!({
                                "p": pi,
                                "m": a.m,
                                "element": e,
                                "valuation": v,
                                "status": if ok { "PASS" } else { "certification-failed" },
                            })),
                        );
                    } else {
                        emit(out, &u.element);
                        emit(out, v.clone().unwrap_or_else(|| "certification-failed".into()));
                    }
                    Ok(if ok { EXIT_OK } else { EXIT_FAIL })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(EXIT_FAIL)
                }
            }
        }
        CliCommand::Residual(a) => {
            prime(a.prime)?;
            let r = residual_check(a.prime, a.n, a.sigma_terms);
            print_reports(out, std::slice::from_ref(&r), a.json, true);
            Ok(if r.passed() { EXIT_OK } else { EXIT_FAIL })
        }
        CliCommand::Selftest => {
            let results = selftest::run_all(selftest::Size::Reduced);
            for r in &results {
                emit(out, r);
            }
            Ok(if results.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

fn print_reports(out: &mut dyn Write, reports: &[VerificationReport], as_json: bool, single: bool) {
    if as_json {
        let v = if single {
            reports[0].to_json()
        } else {
            Value::Array(reports.iter().map(VerificationReport::to_json).collect())
        };
        emit(out, pretty(&v));
    } else {
        for r in reports {
            emit(out, r);
        }
    }
}
