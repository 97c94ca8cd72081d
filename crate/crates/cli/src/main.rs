use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use recsolve::classify::{solve_problem, Mode, Outcome, SolveOptions};
use recsolve::exprcore::Rat;
use recsolve::recmodel::{parse, parse_initial_conditions, ParseError, Problem, SolutionKind};
use recsolve::verify::{iterate_oracle, sample_bindings};

#[derive(Parser)]
#[command(name = "recsolve", version, about = "Classify, solve and bound recurrence relations exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one recurrence (or a `;`-separated system).
    Solve {
        recurrence: String,
        /// Initial conditions, e.g. "x(0)=0; x(1)=1".
        #[arg(long)]
        init: Option<String>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Solve every stanza of a file; stanzas are separated by blank lines.
    Batch {
        file: std::path::PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

#[derive(Args, Clone)]
struct CommonOpts {
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Largest index checked against direct iteration.
    #[arg(long = "verify", default_value_t = 64)]
    verify: i64,
    /// Emit the iterated values up to this index.
    #[arg(long)]
    table: Option<i64>,
    /// Enclosure width for dominant characteristic roots, as p/q.
    #[arg(long = "root-width", default_value = "1/1000")]
    root_width: Rat,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exact,
    Bounds,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

const EXIT_USAGE: u8 = 1;
const EXIT_UNSOLVED: u8 = 2;
const EXIT_UNVERIFIED: u8 = 3;

#[derive(Serialize)]
struct VerificationJson {
    checked_up_to: i64,
    ok: bool,
    detail: String,
}

#[derive(Serialize)]
struct Report {
    classification: String,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modulus: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    branches: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    domain: String,
    assumptions: Vec<String>,
    verification: VerificationJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<Vec<(String, String)>>,
    #[serde(skip)]
    unknown: String,
    #[serde(skip)]
    index: String,
}

impl Report {
    fn exit_code(&self) -> u8 {
        match self.status {
            "unsolved" => EXIT_UNSOLVED,
            _ if !self.verification.ok => EXIT_UNVERIFIED,
            _ => 0,
        }
    }

    fn text(&self) -> String {
        let mut out = String::new();
        let head = format!("{}({})", self.unknown, self.index);
        let _ = writeln!(out, "classification: {}", self.classification);
        let _ = writeln!(out, "status: {}", self.status);
        if let Some(c) = &self.closed_form {
            let _ = writeln!(out, "{head} = {c}");
        }
        if let (Some(m), Some(bs)) = (self.modulus, &self.branches) {
            for (r, b) in bs.iter().enumerate() {
                let _ = writeln!(out, "  {} mod {m} = {r}: {b}", self.index);
            }
        }
        if let (Some(l), Some(u)) = (&self.lower, &self.upper) {
            let _ = writeln!(out, "lower: {l}");
            let _ = writeln!(out, "upper: {u}");
        }
        if let Some(r) = &self.reason {
            let _ = writeln!(out, "reason: {r}");
        }
        if !self.domain.is_empty() {
            let _ = writeln!(out, "domain: {}", self.domain);
        }
        for a in &self.assumptions {
            let _ = writeln!(out, "assumption: {a}");
        }
        if self.status != "unsolved" {
            let v = &self.verification;
            let verdict = if v.ok { "ok" } else { "FAILED" };
            let _ = writeln!(out, "verification: {verdict} up to {} ({})", v.checked_up_to, v.detail);
            if !v.ok {
                let _ = writeln!(out, "WARNING: the result above did not pass verification");
            }
        }
        if let Some(rows) = &self.table {
            let _ = writeln!(out, "{},value", self.index);
            for (n, v) in rows {
                let _ = writeln!(out, "{n},{v}");
            }
        }
        out
    }
}

fn report(outcome: &Outcome, problem: &Problem, table: Option<i64>) -> Report {
    let sol = &outcome.solution;
    let (unknown, index) = match problem {
        Problem::Single(s) => (s.unknown.clone(), s.index_vars.join(", ")),
        Problem::System(sys) => (sys.equations[0].unknown.clone(), sys.equations[0].index_vars.join(", ")),
    };
    let mut r = Report {
        classification: outcome.classification.to_string(),
        status: "exact",
        closed_form: None,
        modulus: None,
        branches: None,
        lower: None,
        upper: None,
        reason: None,
        domain: sol.domain.clone(),
        assumptions: sol.assumptions.clone(),
        verification: match &sol.verification {
            Some(v) => VerificationJson { checked_up_to: v.checked_up_to, ok: v.ok, detail: v.detail.clone() },
            None => VerificationJson { checked_up_to: 0, ok: false, detail: "not checked".into() },
        },
        table: None,
        unknown,
        index,
    };
    match &sol.kind {
        SolutionKind::Exact(e) => r.closed_form = Some(e.to_string()),
        SolutionKind::Piecewise { modulus, branches } => {
            r.modulus = Some(*modulus);
            r.branches = Some(branches.iter().map(|b| b.to_string()).collect());
        }
        SolutionKind::Bounds { lower, upper } => {
            r.status = "bounds";
            r.lower = Some(lower.to_string());
            r.upper = Some(upper.to_string());
        }
        SolutionKind::Unsolved(why) => {
            r.status = "unsolved";
            r.reason = Some(why.clone());
        }
    }
    if let (Some(n), Some(spec)) = (table, &outcome.checked) {
        let b = sample_bindings(&spec.parameters());
        r.table = Some(match iterate_oracle(spec, &b, n) {
            Ok(t) => t
                .points
                .iter()
                .map(|(idx, v)| (idx.iter().map(Rat::to_string).collect::<Vec<_>>().join(" "), v.to_string()))
                .collect(),
            Err(e) => vec![("error".into(), e.to_string())],
        });
    }
    r
}

fn options(o: &CommonOpts) -> SolveOptions {
    let mode = match o.mode {
        ModeArg::Auto => Mode::Auto,
        ModeArg::Exact => Mode::Exact,
        ModeArg::Bounds => Mode::Bounds,
    };
    SolveOptions { mode, horizon: o.verify, root_width: o.root_width.clone() }
}

/// The input with a caret under the failing position.
fn diagnose(input: &str, e: &ParseError) -> String {
    match e {
        ParseError::Syntax { pos, .. } => format!("error: {e}\n  {input}\n  {}^", " ".repeat(*pos)),
        _ => format!("error: {e}"),
    }
}

fn load(recurrence: &str, init: Option<&str>) -> Result<Problem, String> {
    let problem = parse(recurrence).map_err(|e| diagnose(recurrence, &e))?;
    match init {
        Some(text) => {
            let ics = parse_initial_conditions(text).map_err(|e| diagnose(text, &e))?;
            Ok(problem.with_initial_conditions(&ics))
        }
        None => Ok(problem),
    }
}

fn run_one(problem: &Problem, opts: &CommonOpts) -> Report {
    let outcome = solve_problem(problem, &options(opts));
    report(&outcome, problem, opts.table)
}

fn emit(r: &Report, format: Format) {
    match format {
        Format::Text => print!("{}", r.text()),
        Format::Json => println!("{}", serde_json::to_string(r).expect("serializable report")),
    }
}

/// Stanza: a recurrence line, then optional `init:` and `mode:` lines.
fn run_batch(path: &std::path::Path, opts: &CommonOpts) -> Result<u8, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("error: {}: {e}", path.display()))?;
    let mut worst = 0;
    for stanza in text.split("\n\n").map(str::trim).filter(|s| !s.is_empty()) {
        let mut recurrence = None;
        let mut init = None;
        let mut local = opts.clone();
        for line in stanza.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(rest) = line.strip_prefix("init:") {
                init = Some(rest.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("mode:") {
                local.mode = ModeArg::from_str(rest.trim(), true).map_err(|e| format!("error: {e}"))?;
            } else {
                recurrence = Some(line.to_string());
            }
        }
        let Some(recurrence) = recurrence else { continue };
        let code = match load(&recurrence, init.as_deref()) {
            Ok(problem) => {
                let r = run_one(&problem, &local);
                emit(&r, opts.format);
                r.exit_code()
            }
            Err(msg) => {
                match opts.format {
                    Format::Json => println!("{}", serde_json::json!({ "input": recurrence, "error": msg })),
                    Format::Text => println!("{msg}"),
                }
                EXIT_USAGE
            }
        };
        worst = worst.max(code);
        if opts.format == Format::Text {
            println!();
        }
    }
    Ok(worst)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Solve { recurrence, init, opts } => match load(recurrence, init.as_deref()) {
            Ok(problem) => {
                let r = run_one(&problem, opts);
                emit(&r, opts.format);
                r.exit_code()
            }
            Err(msg) => {
                eprintln!("{msg}");
                EXIT_USAGE
            }
        },
        Command::Batch { file, opts } => run_batch(file, opts).unwrap_or_else(|msg| {
            eprintln!("{msg}");
            EXIT_USAGE
        }),
    };
    ExitCode::from(code)
}
