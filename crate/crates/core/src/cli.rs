//! Command-line front end.
//!
//! Exit codes: 0 when the check succeeds, 1 when it fails, 2 for usage,
//! I/O and parse errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::decorations::infer_kind;
use crate::memory::MemorySignature;
use crate::script::{check_script, replay, Expectation, ProofScript, ScriptError};
use crate::semantics::{check_semantic, Counterexample, SemanticVerdict};
use crate::sweep::{sweep, SweepConfig, DEFAULT_SEED};
use crate::syntax::{parse_file, parse_signature, FileBody, ParseError, ParseErrorKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "deco-state", version, about = "Decorated equational logic for global state")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Signature file (`locations i:{0,1} ...`); overrides any inline one.
    #[arg(long, global = true)]
    pub signature: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infer the least decoration of a term.
    CheckKind { file: PathBuf },
    /// Check a proof script with the kernel.
    CheckProof { file: PathBuf },
    /// Decide an equation by exhaustive enumeration.
    Validate { file: PathBuf },
    /// Replay scripts against their expectations; directories replay every `.proof` file.
    Replay {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Randomized soundness sweep over all kernel rules.
    Sweep {
        /// Accepted instances per rule.
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Fail,
}

/// Schema-stable command result.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub details: Json,
    pub elapsed_ms: f64,
}

/// A finished command: the report, its exit code and its text rendering.
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
    pub text: String,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                serde_json::to_string_pretty(&self.report).expect("report serializes") + "\n"
            }
        }
    }
}

struct Failure {
    code: i32,
    details: Json,
    text: String,
}

fn usage(msg: String) -> Failure {
    Failure {
        code: 2,
        details: json!({ "error": { "kind": "UsageError", "message": msg } }),
        text: format!("error: {msg}\n"),
    }
}

fn parse_failure(file: &Path, e: &ParseError) -> Failure {
    // ill-typed input is a failed check; anything else is malformed input
    let code = if e.kind == ParseErrorKind::TypeMismatch { 1 } else { 2 };
    Failure {
        code,
        details: json!({ "error": {
            "kind": e.kind.code(),
            "line": e.span.line,
            "col": e.span.col,
            "message": e.message,
        }}),
        text: format!("{}:{}: {}: {}\n", file.display(), e.span, e.kind.code(), e.message),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_signature(path: Option<&Path>) -> Result<Option<MemorySignature>, Failure> {
    match path {
        None => Ok(None),
        Some(p) => parse_signature(&read(p)?)
            .map(Some)
            .map_err(|e| parse_failure(p, &e)),
    }
}

pub fn counterexample_json(c: &Counterexample, sig: &MemorySignature) -> Json {
    json!({
        "input": c.input.to_string(),
        "store": c.store.show(sig),
        "lhs": { "result": c.lhs_out.0.to_string(), "store": c.lhs_out.1.show(sig) },
        "rhs": { "result": c.rhs_out.0.to_string(), "store": c.rhs_out.1.show(sig) },
    })
}

fn verdict_json(r: &Result<crate::script::CheckedScript, ScriptError>) -> Json {
    match r {
        Ok(c) => json!({
            "status": "accepted",
            "goal": c.goal.to_string(),
            "top_rule": c.proof.rule.camel_name(),
            "nodes": c.proof.size(),
            "labels": c.proof.labels(),
        }),
        Err(e) => {
            let mut v = json!({ "status": "rejected", "reason": e.code(), "message": e.to_string() });
            if let Some(p) = e.failing_path() {
                v["failing_path"] = json!(p);
            }
            v
        }
    }
}

fn cmd_check_kind(cli: &Cli, file: &Path) -> Result<(Json, String), Failure> {
    let sig = load_signature(cli.signature.as_deref())?;
    let src = read(file)?;
    let parsed = parse_file(&src, sig.as_ref(), true).map_err(|e| parse_failure(file, &e))?;
    let t = match parsed.body {
        FileBody::Term(t) => t,
        FileBody::Equation(_) => {
            return Err(usage(format!("{}: expected a term, found an equation", file.display())))
        }
    };
    let kind = infer_kind(&t);
    Ok((
        json!({ "term": t.to_string(), "dom": t.dom().to_string(), "cod": t.cod().to_string(), "kind": kind }),
        format!("{kind}\n"),
    ))
}

fn load_script(cli: &Cli, file: &Path) -> Result<(ProofScript, MemorySignature), Failure> {
    let sig = load_signature(cli.signature.as_deref())?;
    let script = ProofScript::parse(&read(file)?).map_err(|e| parse_failure(file, &e))?;
    let sig = script
        .resolve_signature(sig.as_ref())
        .map_err(|e| usage(format!("{}: {e}", file.display())))?;
    Ok((script, sig))
}

fn cmd_check_proof(cli: &Cli, file: &Path) -> Result<(Json, String), Failure> {
    let (script, sig) = load_script(cli, file)?;
    let r = check_script(&script, &sig);
    if let Err(ScriptError::Parse(e)) = &r {
        return Err(parse_failure(file, e));
    }
    let details = json!({ "file": file.display().to_string(), "verdict": verdict_json(&r) });
    match r {
        Ok(c) => Ok((
            details,
            format!(
                "ok: {} ({} nodes, top rule {})\n",
                c.goal,
                c.proof.size(),
                c.proof.rule.camel_name()
            ),
        )),
        Err(e) => {
            let mut text = format!("rejected: {}: {e}\n", e.code());
            if let Some(p) = e.failing_path() {
                let _ = writeln!(text, "at: {p}");
            }
            Err(Failure {
                code: 1,
                details,
                text,
            })
        }
    }
}

fn cmd_validate(cli: &Cli, file: &Path) -> Result<(Json, String), Failure> {
    let sig = load_signature(cli.signature.as_deref())?;
    let src = read(file)?;
    let parsed = parse_file(&src, sig.as_ref(), false).map_err(|e| parse_failure(file, &e))?;
    let eq = match parsed.body {
        FileBody::Equation(e) => e,
        FileBody::Term(_) => {
            return Err(usage(format!("{}: expected an equation, found a term", file.display())))
        }
    };
    let sig = parsed.signature;
    let verdict = check_semantic(&sig, &eq).map_err(|e| usage(e.to_string()))?;
    let mode = match eq.mode() {
        crate::kernel::Mode::Strong => "strong",
        crate::kernel::Mode::Weak => "weak",
    };
    match verdict {
        SemanticVerdict::Holds => Ok((
            json!({ "mode": mode, "holds": true, "equation": eq.to_string(), "stores": sig.store_count() }),
            format!("holds ({mode}): {eq}\n"),
        )),
        SemanticVerdict::Counterexample(c) => Err(Failure {
            code: 1,
            details: json!({
                "mode": mode,
                "holds": false,
                "equation": eq.to_string(),
                "counterexample": counterexample_json(&c, &sig),
            }),
            text: format!("fails ({mode}): {eq}\ncounterexample: {}\n", c.show(&sig)),
        }),
    }
}

fn proof_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "proof"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn cmd_replay(cli: &Cli, paths: &[PathBuf]) -> Result<(Json, String), Failure> {
    let mut entries = Vec::new();
    let mut text = String::new();
    let mut all_ok = true;
    for file in proof_files(paths)? {
        let (script, sig) = load_script(cli, &file)?;
        let r = replay(&script, &sig);
        all_ok &= r.ok;
        let expect = match &r.expect {
            Expectation::Accept => "accept".to_string(),
            Expectation::Reject(None) => "reject".to_string(),
            Expectation::Reject(Some(c)) => format!("reject {c}"),
            Expectation::Counterexample => "counterexample".to_string(),
        };
        let semantic = r.semantic.as_ref().map(|v| match v {
            SemanticVerdict::Holds => json!({ "holds": true }),
            SemanticVerdict::Counterexample(c) => {
                json!({ "holds": false, "counterexample": counterexample_json(c, &sig) })
            }
        });
        let _ = writeln!(
            text,
            "{} {} (expect {expect}; {}) {:.1} ms",
            if r.ok { "ok  " } else { "FAIL" },
            file.display(),
            match &r.check {
                Ok(_) => "accepted".to_string(),
                Err(e) => format!("rejected: {}", e.code()),
            },
            r.elapsed.as_secs_f64() * 1e3
        );
        entries.push(json!({
            "file": file.display().to_string(),
            "name": r.name,
            "expect": expect,
            "ok": r.ok,
            "verdict": verdict_json(&r.check),
            "semantic": semantic,
            "elapsed_ms": r.elapsed.as_secs_f64() * 1e3,
        }));
    }
    let details = json!({ "scripts": entries });
    if all_ok {
        Ok((details, text))
    } else {
        Err(Failure {
            code: 1,
            details,
            text,
        })
    }
}

fn cmd_sweep(cli: &Cli, count: usize) -> Result<(Json, String), Failure> {
    let sig = load_signature(cli.signature.as_deref())?.unwrap_or_else(crate::corpus::default_signature);
    let cfg = SweepConfig {
        seed: cli.seed,
        per_rule: count,
        ..SweepConfig::default()
    };
    let r = sweep(&sig, &cfg);
    let mut text = format!("seed {} pool {} terms\n", r.seed, r.pool_size);
    for s in &r.rules {
        let _ = writeln!(
            text,
            "{:<18} accepted {:>5} rejected {:>5} violations {}",
            s.rule,
            s.accepted,
            s.rejected,
            s.violations.len()
        );
    }
    let details = serde_json::to_value(&r).expect("sweep report serializes");
    if r.passed() {
        Ok((details, text))
    } else {
        Err(Failure {
            code: 1,
            details,
            text,
        })
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let (name, result) = match &cli.command {
        Command::CheckKind { file } => ("check-kind", cmd_check_kind(cli, file)),
        Command::CheckProof { file } => ("check-proof", cmd_check_proof(cli, file)),
        Command::Validate { file } => ("validate", cmd_validate(cli, file)),
        Command::Replay { paths } => ("replay", cmd_replay(cli, paths)),
        Command::Sweep { count } => ("sweep", cmd_sweep(cli, *count)),
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let (status, details, text, exit_code) = match result {
        Ok((d, t)) => (Status::Ok, d, t, 0),
        Err(f) => (Status::Fail, f.details, f.text, f.code),
    };
    Outcome {
        report: Report {
            command: name.to_string(),
            status,
            details,
            elapsed_ms,
        },
        exit_code,
        text,
    }
}
