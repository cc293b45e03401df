use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use cgf_core::su11::{disentangle_regularized, exponent_factor, Bracket};
use cgf_core::verify::{self, fmt_complex};
use cgf_core::vdw::{second_order_energy, second_order_energy_checked, C6Result, VdwConfig};
use cgf_core::{Branch, Error};

use crate::parse::{parse_expr, ParseError};

pub const SCHEMA: &str = "cgf/1";

#[derive(Debug, Parser)]
#[command(name = "cgf", version, about = "Algebraic Coulomb Green operator toolkit")]
pub struct Cli {
    /// Emit a JSON record instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Closure,
    Norms,
    FirstOrder,
    Disentangle,
    Eq24,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Closure => "closure",
            Suite::Norms => "norms",
            Suite::FirstOrder => "first-order",
            Suite::Disentangle => "disentangle",
            Suite::Eq24 => "eq24",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the canonical normal-ordered form.
    NormalOrder {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Print `[a, b]` in normal order.
    Commutator {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Exact vacuum expectation value.
    Vev {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// `<0|left exp(-it(r p²/2 + v² r/2)) right|0>` via the disentangled propagator.
    MatrixElement {
        #[arg(long, allow_negative_numbers = true)]
        omega: f64,
        #[arg(long, allow_negative_numbers = true)]
        v: f64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value = "r*x_3", allow_hyphen_values = true)]
        left: String,
        #[arg(long, default_value = "r*x_3", allow_hyphen_values = true)]
        right: String,
    },
    /// Dispersion coefficient of two ground-state hydrogen atoms.
    C6 {
        #[arg(long, default_value_t = 1e-12)]
        series_tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        quad_tol: f64,
        /// Defaults to ω².
        #[arg(long)]
        contour_scale: Option<f64>,
        /// Rerun with Fock-space resolvents and report the relative difference.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 160)]
        truncation: u32,
        /// Integrate the same-sign square J(α)² instead of J(α)J(-α).
        #[arg(long)]
        literal_square: bool,
    },
    /// Run an invariant suite; exit code 1 if any check fails.
    Verify { suite: Suite },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            code: 0,
        }
    }
}

enum Failure {
    Parse(ParseError),
    Domain(Error),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Parse(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

struct Record {
    command: &'static str,
    inputs: Value,
    result: Value,
    provenance: Value,
    exact: bool,
    text: String,
    passed: bool,
}

impl Record {
    fn new(command: &'static str, inputs: Value, result: Value, text: String) -> Self {
        Self {
            command,
            inputs,
            result,
            provenance: json!({}),
            exact: true,
            text,
            passed: true,
        }
    }

    fn to_json(&self) -> String {
        let v = json!({
            "schema": SCHEMA,
            "command": self.command,
            "inputs": self.inputs,
            "result": self.result,
            "provenance": self.provenance,
            "exact": self.exact,
        });
        serde_json::to_string_pretty(&v).expect("plain JSON values") + "\n"
    }
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn execute(command: &Command) -> Result<Record, Failure> {
    Ok(match command {
        Command::NormalOrder { expr } => {
            let e = parse_expr(expr)?;
            let text = e.to_string();
            Record::new("normal-order", json!({ "expr": expr }), json!(text), text)
        }
        Command::Commutator { a, b } => {
            let c = parse_expr(a)?.commutator(&parse_expr(b)?);
            let text = c.to_string();
            Record::new("commutator", json!({ "a": a, "b": b }), json!(text), text)
        }
        Command::Vev { expr } => {
            let text = parse_expr(expr)?.vacuum_expectation().to_string();
            Record::new("vev", json!({ "expr": expr }), json!(text), text)
        }
        Command::MatrixElement {
            omega,
            v,
            t,
            left,
            right,
        } => {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("v must be positive, got {v}")).into());
            }
            let (l, r) = (parse_expr(left)?, parse_expr(right)?);
            let factor = exponent_factor(*omega, Complex64::new(*v, 0.0), Branch::Bound)?;
            let (dis, nudged) = disentangle_regularized(&factor, Complex64::new(*t, 0.0))?;
            let value = Bracket::new(&l, &r).eval(&dis, *omega)?;
            let mut rec = Record::new(
                "matrix-element",
                json!({ "omega": omega, "v": v, "t": t, "left": left, "right": right }),
                complex_json(value),
                fmt_complex(value),
            );
            rec.exact = false;
            rec.provenance = json!({
                "c_plus": complex_json(dis.c_plus),
                "c_zero": complex_json(dis.c_zero),
                "c_minus": complex_json(dis.c_minus),
                "regularized_t": nudged,
            });
            rec
        }
        Command::C6 {
            series_tol,
            quad_tol,
            contour_scale,
            oracle,
            truncation,
            literal_square,
        } => {
            let base = VdwConfig::default();
            let cfg = VdwConfig {
                series_tol: *series_tol,
                quad_tol: *quad_tol,
                contour_scale: contour_scale.unwrap_or(base.omega * base.omega),
                truncation: *truncation,
                literal_square: *literal_square,
                ..base
            };
            let r = if *oracle {
                second_order_energy_checked(&cfg)?
            } else {
                second_order_energy(&cfg)?
            };
            c6_record(&cfg, &r)
        }
        Command::Verify { suite } => {
            let report = verify::run(suite.name())?;
            let checks: Vec<Value> = report
                .checks
                .iter()
                .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
                .collect();
            let mut rec = Record::new(
                "verify",
                json!({ "suite": suite.name() }),
                json!({ "passed": report.passed(), "checks": checks, "lines": report.lines }),
                report.to_string().trim_end().to_string(),
            );
            rec.passed = report.passed();
            rec
        }
    })
}

fn c6_record(cfg: &VdwConfig, r: &C6Result) -> Record {
    let mut text = format!(
        "c6 = {:.12}\nestimated_error = {:.3e}\nseries_terms_used = {}\nquad_nodes_used = {}",
        r.c6, r.estimated_error, r.series_terms_used, r.quad_nodes_used
    );
    if let Some(d) = r.oracle_delta {
        text.push_str(&format!("\noracle_delta = {d:.3e}"));
    }
    let mut rec = Record::new(
        "c6",
        serde_json::to_value(cfg).expect("config serializes"),
        json!({
            "c6": r.c6,
            "estimated_error": r.estimated_error,
            "oracle_delta": r.oracle_delta,
            "imag_part": r.imag_part,
        }),
        text,
    );
    rec.exact = false;
    rec.provenance = json!({
        "series_terms_used": r.series_terms_used,
        "quad_nodes_used": r.quad_nodes_used,
        "truncation": r.oracle_delta.map(|_| cfg.truncation),
    });
    rec
}

/// Runs one command. Exit codes: 0 success, 1 failed verification,
/// 2 domain error, 3 parse error.
pub fn run(cli: &Cli) -> Outcome {
    match execute(&cli.command) {
        Ok(rec) => {
            let stdout = if cli.json { rec.to_json() } else { rec.text.clone() + "\n" };
            Outcome {
                code: if rec.passed { 0 } else { 1 },
                ..Outcome::ok(stdout)
            }
        }
        Err(Failure::Parse(e)) => Outcome {
            stdout: String::new(),
            stderr: format!("error: ParseError: {e}\n"),
            code: 3,
        },
        Err(Failure::Domain(e)) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {}: {e}\n", e.name()),
            code: 2,
        },
    }
}
