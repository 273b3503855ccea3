//! The `flowsym` command line.
//!
//! Exit codes: 0 success, 1 a check or assertion failed, 2 usage or input
//! error, 3 internal error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::expr::{Context, Expression};
use crate::numeric::{EvaluationConfig, FieldSpec, FlowDerivative, Oracle};
use crate::render::{parse, time_to_prefix, time_to_text, to_latex, to_prefix, to_text};
use crate::rewrite::RewriteConfig;
use crate::scenarios::{run_check_with, CheckId, ElementaryDifferentials, REFERENCE_COUNTS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "flowsym",
    version,
    about = "Symbolic calculus for flows of evolution equations"
)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Highest order of generated reduction identity.
    #[arg(long, global = true, default_value_t = RewriteConfig::default().max_identity_order)]
    max_identity_order: usize,
    /// Maximum rewrite steps per operation.
    #[arg(long, global = true, default_value_t = RewriteConfig::default().step_budget)]
    step_budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run identity checks and print one JSON report per line.
    Verify {
        /// check1, check2, check2a, check3, check4, check5, jacobi or all.
        #[arg(default_value = "all")]
        check: String,
    },
    /// Count the terms of successive time derivatives of a flow.
    Count {
        #[arg(long)]
        max_order: usize,
        /// Fail unless the counts equal the reference table.
        #[arg(long)]
        expect_paper: bool,
    },
    /// Evaluate an expression on random or given fields and check it is zero.
    Eval {
        #[arg(long)]
        expr: PathBuf,
        /// Field specification; unnamed fields are drawn at random.
        #[arg(long)]
        fields: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = EvaluationConfig::default().steps_per_unit)]
        steps_per_unit: usize,
        /// Use central differences with this step for flow derivatives of order >= 2.
        #[arg(long)]
        finite_difference: Option<f64>,
    },
    /// Print an expression file in another notation.
    Render {
        #[arg(long)]
        expr: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Latex,
    Prefix,
}

/// An expression together with the declarations it needs.
///
/// ```text
/// # comment
/// time t s
/// space u v
/// functions A B
/// nonautonomous S
/// d2E_A(t,u)*A(u) - A(E_A(t,u))
/// ```
///
/// Declaration lines start with a keyword; all other lines are joined to
/// form the expression.
#[derive(Debug, Clone)]
pub struct ExprFile {
    pub context: Context,
    pub expression: Expression,
}

impl ExprFile {
    pub fn parse(text: &str) -> crate::Result<ExprFile> {
        let mut ctx = Context::new();
        let mut body = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            let mut words = line.split_whitespace();
            let names: Vec<&str> = words.clone().skip(1).collect();
            match words.next() {
                None => {}
                Some("time") => drop(ctx.time_vars(&names)?),
                Some("space") => drop(ctx.space_vars(&names)?),
                Some("functions") => drop(ctx.functions(&names)?),
                Some("nonautonomous") => drop(ctx.nonautonomous_functions(&names)?),
                Some(_) => body.push(line),
            }
        }
        if body.is_empty() {
            return Err(Error::Syntax {
                pos: 0,
                msg: "no expression".into(),
            });
        }
        let expression = parse(&body.join(" "), &ctx)?;
        Ok(ExprFile {
            context: ctx,
            expression,
        })
    }

    fn read(path: &Path) -> Result<ExprFile, CliError> {
        Self::parse(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. }
            | Error::UndeclaredSymbol(_)
            | Error::DeclarationConflict(_)
            | Error::InvalidIdentifier(_)
            | Error::InvalidConfig(_)
            | Error::Unbound(_)
            | Error::DimensionMismatch { .. } => CliError::Input(e.to_string()),
            e => CliError::Internal(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn io(e: std::io::Error) -> CliError {
    CliError::Internal(e.to_string())
}

/// Runs the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(CliError::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Internal(m)) => {
            let _ = writeln!(err, "internal error: {m}");
            EXIT_INTERNAL
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let rewrite = RewriteConfig {
        max_identity_order: cli.max_identity_order,
        step_budget: cli.step_budget,
    };
    match &cli.command {
        Command::Verify { check } => verify(check, &rewrite, out),
        Command::Count {
            max_order,
            expect_paper,
        } => count(*max_order, *expect_paper, out),
        Command::Eval {
            expr,
            fields,
            trials,
            steps_per_unit,
            finite_difference,
        } => {
            let file = ExprFile::read(expr)?;
            let Expression::Space(ex) = file.expression else {
                return Err(CliError::Input("eval needs a space expression".into()));
            };
            let mut oracle = Oracle::default().with_seed(cli.seed);
            if let Some(path) = fields {
                let spec = FieldSpec::parse(&read(path)?)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                oracle = oracle.with_fields(&spec);
            }
            oracle.cfg.steps_per_unit = *steps_per_unit;
            if let Some(h) = finite_difference {
                oracle.cfg.flow_derivative = FlowDerivative::FiniteDifference { h: *h };
            }
            oracle.cfg.validate()?;
            let report = oracle.assert_zero(&ex, *trials)?;
            writeln!(
                out,
                "{}",
                serde_json::to_string(&report).map_err(|e| CliError::Internal(e.to_string()))?
            )
            .map_err(io)?;
            Ok(if report.passed { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Render { expr, format } => {
            let file = ExprFile::read(expr)?;
            let shown = match (&file.expression.canonicalize(), format) {
                (Expression::Space(e), Format::Text) => to_text(e),
                (Expression::Space(e), Format::Latex) => to_latex(e),
                (Expression::Space(e), Format::Prefix) => to_prefix(e),
                (Expression::Time(t), Format::Prefix) => time_to_prefix(t),
                (Expression::Time(t), _) => time_to_text(t),
            };
            writeln!(out, "{shown}").map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

fn verify(which: &str, cfg: &RewriteConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let ids: Vec<CheckId> = if which == "all" {
        CheckId::ALL.to_vec()
    } else {
        vec![which.parse().map_err(|_| {
            CliError::Input(format!(
                "unknown check `{which}`; expected one of all, {}",
                CheckId::ALL.map(CheckId::as_str).join(", ")
            ))
        })?]
    };
    // each check owns its context, so they run in parallel; lines are
    // printed in the fixed order afterwards
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = ids
            .iter()
            .map(|&id| s.spawn(move || run_check_with(id, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("check thread panicked"))
            .collect()
    });
    let mut all = true;
    for r in results {
        let record = r?.record();
        all &= record.passed;
        let line = serde_json::to_string(&record).map_err(|e| CliError::Internal(e.to_string()))?;
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(if all { EXIT_OK } else { EXIT_FAILED })
}

fn count(max_order: usize, expect: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    if max_order == 0 {
        return Err(CliError::Input("--max-order must be at least 1".into()));
    }
    if expect && max_order > REFERENCE_COUNTS.len() {
        return Err(CliError::Input(format!(
            "the reference table stops at order {}",
            REFERENCE_COUNTS.len()
        )));
    }
    writeln!(out, "order\tterms").map_err(io)?;
    let mut ok = true;
    for (order, terms) in ElementaryDifferentials::new().take(max_order) {
        let expected = REFERENCE_COUNTS.get(order - 1).copied().unwrap_or(terms);
        if expect && terms != expected {
            ok = false;
            writeln!(out, "{order}\t{terms}\texpected {expected}").map_err(io)?;
        } else {
            writeln!(out, "{order}\t{terms}").map_err(io)?;
        }
        out.flush().map_err(io)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}
