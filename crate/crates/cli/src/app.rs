//! Argument parsing and the non-server subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cx_core::api::{render, ExplainFormulaRequest, ExplainRequest, LoadError, QueryError, Session};
use cx_core::smv::{build_diagram, parse_model};
use serde_json::Value as Json;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad arguments or unreadable files.
    pub const USAGE: i32 = 1;
    /// The trace disagrees with simulation and `--strict` was given.
    pub const MISMATCH: i32 = 2;
    /// The model, trace or formula does not parse or type-check.
    pub const INVALID: i32 = 3;
    /// The query names a gate, block or step that does not exist.
    pub const NOT_FOUND: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "cx-explain", version, about = "Explain NuSMV counterexamples on function block diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Inputs {
    /// NuSMV model.
    #[arg(long)]
    pub model: PathBuf,
    /// Counterexample, NuSMV text or native JSON.
    #[arg(long)]
    pub trace: PathBuf,
    /// LTL formula; defaults to the first LTLSPEC of the model.
    #[arg(long, conflicts_with = "ltl_file")]
    pub ltl: Option<String>,
    /// File holding the LTL formula.
    #[arg(long)]
    pub ltl_file: Option<PathBuf>,
    /// Fail with status 2 if the trace disagrees with simulation.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Export {
    /// Diagram interchange document.
    Diagram,
    /// The trace: native JSON, or NuSMV text with `--format text`.
    Trace,
    /// Simulated values of every gate.
    Extended,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load everything, replay the trace and evaluate the formula.
    Check {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Explain one assignment.
    Explain {
        #[command(flatten)]
        inputs: Inputs,
        /// Declared variable, gate path or gate id; a pin name with `--block`.
        #[arg(long)]
        var: String,
        #[arg(long)]
        block: Option<String>,
        /// Display step, counted from 0.
        #[arg(long)]
        step: usize,
        /// Complex block whose input interface bounds the search.
        #[arg(long)]
        scope: Option<String>,
        /// Print only the terminating assignments.
        #[arg(long)]
        terminating_only: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Explain the formula value at a step.
    ExplainFormula {
        #[command(flatten)]
        inputs: Inputs,
        /// Display step, counted from 0.
        #[arg(long, default_value_t = 0)]
        step: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Write the diagram, trace or simulated values.
    Export {
        #[arg(value_enum)]
        what: Export,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Last step (1-based) of the extended trace.
        #[arg(long)]
        up_to: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// A failed command: exit status and a diagnostic for stderr.
#[derive(Debug)]
pub struct Failure {
    pub status: i32,
    pub message: String,
    /// Machine-readable report for stdout, if any.
    pub report: Option<Json>,
}

impl Failure {
    fn usage(message: String) -> Self {
        Failure {
            status: exit::USAGE,
            message,
            report: None,
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure {
            status: exit::INVALID,
            message: e.to_string(),
            report: Some(e.to_json()),
        }
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        let status = match e {
            _ if e.is_not_found() => exit::NOT_FOUND,
            QueryError::NoFormula => exit::USAGE,
            _ => exit::INVALID,
        };
        Failure {
            status,
            message: e.to_string(),
            report: Some(e.to_json()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

/// Reads the inputs and builds a session.
pub fn load(inputs: &Inputs) -> Result<Session, Failure> {
    let model = read(&inputs.model)?;
    let trace = read(&inputs.trace)?;
    let formula = match (&inputs.ltl, &inputs.ltl_file) {
        (Some(text), _) => Some(text.clone()),
        (None, Some(path)) => Some(read(path)?.trim().to_string()),
        (None, None) => parse_model(&model)
            .ok()
            .and_then(|m| m.ltlspecs().next().map(str::to_string)),
    };
    Ok(Session::load(&model, &trace, formula.as_deref())?)
}

fn mismatch_warnings(session: &Session, err: &mut dyn Write) {
    for m in &session.mismatches {
        let _ = writeln!(
            err,
            "warning: `{}` is {} at display step {} in the trace but {} in simulation",
            m.var,
            m.trace_value,
            m.step - 1,
            m.simulated_value
        );
    }
}

/// Loads a session and applies `--strict`.
fn session(inputs: &Inputs, err: &mut dyn Write) -> Result<Session, Failure> {
    let s = load(inputs)?;
    mismatch_warnings(&s, err);
    if inputs.strict && !s.mismatches.is_empty() {
        return Err(Failure {
            status: exit::MISMATCH,
            message: format!("{} trace values disagree with simulation", s.mismatches.len()),
            report: Some(s.check_json()),
        });
    }
    Ok(s)
}

fn check_text(s: &Session) -> String {
    let d = &s.diagram;
    let mut out = format!(
        "model: {} blocks ({} basic), {} gates, {} variables\n",
        d.block_count(),
        d.basic_block_count(),
        d.gate_count(),
        s.declared.len()
    );
    out += &format!("trace: {} steps", s.trace.len());
    match s.trace.loop_start() {
        Some(j) => out += &format!(", loop back to display step {}\n", j - 1),
        None => out += ", no loop\n",
    }
    if s.mismatches.is_empty() {
        out += "consistency: ok\n";
    } else {
        out += &format!("consistency: {} mismatches\n", s.mismatches.len());
    }
    if let (Some(f), Some(t)) = (&s.formula, &s.table) {
        out += &format!("formula: {f} is {} at display step 0\n", t.value(f.root(), 1));
    }
    out
}

fn formula_text(s: &Session, display_step: usize) -> Result<String, Failure> {
    let cause = s.explain_formula(display_step)?;
    let f = s.formula.as_ref().expect("explained formula is loaded");
    let mut out = format!("{f} is {} at display step {display_step}\n", cause.value);
    for a in &cause.assignments {
        out += &format!("{} {} {}\n", a.step - 1, a.var, a.value);
    }
    Ok(out)
}

/// Runs every subcommand except `serve`, returning what goes to stdout.
pub fn execute(command: &Command, err: &mut dyn Write) -> Result<String, Failure> {
    match command {
        Command::Check { inputs, format } => {
            let s = session(inputs, err)?;
            Ok(match format {
                Format::Json => render(&s.check_json()),
                Format::Text => check_text(&s),
            })
        }
        Command::Explain {
            inputs,
            var,
            block,
            step,
            scope,
            terminating_only,
            format,
        } => {
            let s = session(inputs, err)?;
            match format {
                Format::Json => {
                    let req = ExplainRequest {
                        var: var.clone(),
                        block: block.clone(),
                        step: *step,
                        scope: scope.clone(),
                        terminating_only: *terminating_only,
                    };
                    Ok(render(&s.explain_request(&req)?))
                }
                Format::Text => {
                    let r = s.explain(var, block.as_deref(), *step, scope.as_deref())?;
                    Ok(s.terminating_text(&r))
                }
            }
        }
        Command::ExplainFormula { inputs, step, format } => {
            let s = session(inputs, err)?;
            match format {
                Format::Json => Ok(render(&s.explain_formula_request(&ExplainFormulaRequest { step: *step })?)),
                Format::Text => formula_text(&s, *step),
            }
        }
        Command::Export {
            what,
            model,
            trace,
            up_to,
            format,
        } => {
            if *what == Export::Diagram {
                let ast = parse_model(&read(model)?).map_err(LoadError::from)?;
                let d = build_diagram(&ast).map_err(LoadError::from)?;
                let doc = serde_json::to_value(d.to_document()).expect("document serializes");
                return Ok(render(&doc));
            }
            let Some(trace) = trace else {
                return Err(Failure::usage(format!("exporting the {what:?} needs --trace").to_lowercase()));
            };
            let inputs = Inputs {
                model: model.clone(),
                trace: trace.clone(),
                ltl: None,
                ltl_file: None,
                strict: false,
            };
            let s = load(&inputs)?;
            match (what, format) {
                (Export::Trace, Format::Json) => Ok(render(&serde_json::to_value(s.trace.to_native()).expect("trace serializes"))),
                (Export::Trace, Format::Text) => Ok(s.trace.to_nusmv()),
                _ => Ok(render(&s.extended_json(*up_to)?)),
            }
        }
        Command::Serve { .. } => unreachable!("serve is handled by the caller"),
    }
}

/// Parses `args` and runs the command; returns the exit status.
pub fn run(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return status;
        }
    };
    if let Command::Serve { inputs, port, host } = &cli.command {
        let s = match session(inputs, err) {
            Ok(s) => s,
            Err(f) => return report(f, out, err),
        };
        let addr = format!("{host}:{port}");
        return match crate::server::serve_blocking(s, &addr, err) {
            Ok(()) => exit::OK,
            Err(e) => {
                let _ = writeln!(err, "error: {addr}: {e}");
                exit::USAGE
            }
        };
    }
    match execute(&cli.command, err) {
        Ok(text) => {
            let _ = write!(out, "{text}");
            exit::OK
        }
        Err(f) => report(f, out, err),
    }
}

fn report(f: Failure, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "error: {}", f.message);
    if let Some(doc) = &f.report {
        let _ = write!(out, "{}", render(doc));
    }
    f.status
}
