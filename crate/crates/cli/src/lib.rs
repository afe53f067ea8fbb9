//! The `deformq` command line: `graphs`, `weight`, `star`, `verify` and
//! `brackets`. [`run`] maps an argument list to an exit status and the text
//! written to stdout and stderr.

pub mod error;
pub mod plan;

use std::ffi::OsString;

use clap::Parser;
use deformq_core::graphs::enumerate_capped;
use deformq_core::hochschild::{gerstenhaber_bracket, hkr, hochschild_d};
use deformq_core::multivector::schouten_bracket;
use deformq_core::star::{apply_star, star_product, verify_associativity, verify_quantization};
use deformq_core::weights::{mzv_eval, weight_exact, weight_mc};
use deformq_core::{Error, FormalSeries, Polynomial};
use serde_json::{json, Value};

pub use error::CliError;
pub use plan::{Cli, Command, CommandPlan, Format};
use plan::{BracketPlan, StarPlan, WeightMethod};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable with the default worker thread count.
pub const THREADS_ENV: &str = "DEFORMQ_THREADS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(message: String) -> Self {
        Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: message,
        }
    }
}

const GRAMMAR: &str = "\
term lists:  [-] term (+|- term)*,  term := factor (* factor)*
factor:      n | n/m | x | y | z | x1..xd [^k] | d/dx [^ d/dy ...] | d<slot>/dx [^k]
operators:   arity N: <term list>
graphs:      n; t t; t t; ...  with t in 1..n, L, R";

fn describe(e: &CliError) -> String {
    match e {
        CliError::Core(Error::Parse { .. }) => format!("error: {e}\nexpected grammar:\n{GRAMMAR}\n"),
        _ => format!("error: {e}\n"),
    }
}

/// Parse, validate and execute one invocation.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome::usage(text)
            };
        }
    };
    let plan = match CommandPlan::new(cli) {
        Ok(p) => p,
        Err(e) => return Outcome::usage(describe(&e)),
    };
    match execute(&plan) {
        Ok((passed, body)) => Outcome {
            code: if passed { EXIT_OK } else { EXIT_FAILED },
            stdout: body,
            stderr: String::new(),
        },
        Err(e) => Outcome::usage(describe(&e)),
    }
}

fn render(format: Format, text: String, value: Value) -> String {
    match format {
        Format::Text => {
            let mut t = text;
            if !t.ends_with('\n') {
                t.push('\n');
            }
            t
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("json output serializes");
            s.push('\n');
            s
        }
    }
}

/// Run a validated plan; the flag is false when a verification failed.
pub fn execute(plan: &CommandPlan) -> Result<(bool, String), CliError> {
    let f = plan.format;
    match &plan.command {
        Command::Graphs { order, cap } => {
            let graphs = enumerate_capped(*order, *cap)?;
            let text = graphs.iter().map(|g| g.encode()).collect::<Vec<_>>().join("\n");
            let value = json!({
                "order": order,
                "count": graphs.len(),
                "graphs": graphs.iter().map(|g| g.to_json()).collect::<Vec<_>>(),
            });
            Ok((true, render(f, text, value)))
        }
        Command::Weight {
            graph,
            method,
            extra,
            precision,
        } => weight(f, graph, *method, extra, *precision),
        Command::Star { star, apply } => star_cmd(f, star, apply.as_ref()),
        Command::Verify { star, degree_cap } => verify(f, star, *degree_cap),
        Command::Bracket(b) => bracket(f, b),
    }
}

fn weight(
    f: Format,
    graph: &deformq_core::AdmissibleGraph,
    method: WeightMethod,
    extra: &deformq_core::weights::WeightTable,
    precision: u32,
) -> Result<(bool, String), CliError> {
    let enc = graph.encode();
    match method {
        WeightMethod::Exact => {
            let w = weight_exact(graph, Some(extra))?.ok_or_else(|| Error::MissingWeight(enc.clone()))?;
            let numeric = mzv_eval(&w, precision)?;
            let text = if w.is_rational() {
                w.to_string()
            } else {
                format!("{w} ≈ {numeric:e}")
            };
            let value = json!({
                "graph": enc,
                "method": "exact",
                "value": w.to_string(),
                "numeric": numeric,
            });
            Ok((true, render(f, text, value)))
        }
        WeightMethod::MonteCarlo { samples, seed } => {
            let e = weight_mc(graph, samples, seed)?;
            let text = format!(
                "{:.6} ± {:.6} ({} samples, seed {}, {} rejected)",
                e.mean, e.standard_error, e.samples, e.seed, e.rejected
            );
            let value = json!({
                "graph": enc,
                "method": "mc",
                "mean": e.mean,
                "standard_error": e.standard_error,
                "samples": e.samples,
                "seed": e.seed,
                "rejected": e.rejected,
            });
            Ok((true, render(f, text, value)))
        }
    }
}

/// `p₀ + p₁*h + (p₂)*h^2 …`, parenthesising sums.
pub fn format_h_series(s: &FormalSeries<Polynomial>) -> String {
    let mut out = String::new();
    for (k, p) in s.coeffs().iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let body = p.to_string();
        let (negative, body) = if p.len() == 1 {
            match body.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, body),
            }
        } else {
            (false, format!("({body})"))
        };
        let term = match k {
            0 => body,
            1 => format!("{body}*h"),
            _ => format!("{body}*h^{k}"),
        };
        match (out.is_empty(), negative) {
            (true, false) => out.push_str(&term),
            (true, true) => out.push_str(&format!("-{term}")),
            (false, false) => out.push_str(&format!(" + {term}")),
            (false, true) => out.push_str(&format!(" - {term}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn star_cmd(f: Format, plan: &StarPlan, apply: Option<&(Polynomial, Polynomial)>) -> Result<(bool, String), CliError> {
    let s = star_product(&plan.pi, plan.order, &plan.source, plan.options)?;
    let head = json!({
        "dim": s.dim(),
        "order": s.order(),
        "pi": plan.pi.to_string(),
        "dirac": plan.options.dirac,
        "exact": s.is_exact(),
    });
    let mut value = head;
    let text = match apply {
        Some((a, b)) => {
            let r = apply_star(&s, a, b)?;
            let text = format_h_series(&r);
            value["f"] = json!(a.to_string());
            value["g"] = json!(b.to_string());
            value["coefficients"] = json!(r.coeffs().iter().map(|p| p.to_string()).collect::<Vec<_>>());
            value["result"] = json!(text);
            text
        }
        None => {
            value["operators"] =
                json!(s.series().coeffs().iter().map(|b| b.to_string()).collect::<Vec<_>>());
            s.to_text()
        }
    };
    Ok((true, render(f, text, value)))
}

fn verify(f: Format, plan: &StarPlan, degree_cap: u32) -> Result<(bool, String), CliError> {
    let s = star_product(&plan.pi, plan.order, &plan.source, plan.options)?;
    let report = verify_associativity(&s, degree_cap)?;
    let normalized = plan.order == 0 || verify_quantization(&s);
    let passed = report.passed() && normalized;
    let text = format!(
        "{report}\nnormalization: {}\n{}",
        if normalized { "ok" } else { "skew part of B1 differs from the structure" },
        if passed { "PASS" } else { "FAIL" }
    );
    let failure = report.sample_failure.as_ref().map(|(a, b, c, n)| {
        json!({"f": a.to_string(), "g": b.to_string(), "h": c.to_string(), "order": n})
    });
    let value = json!({
        "order": plan.order,
        "associative": report.passed(),
        "normalized": normalized,
        "passed": passed,
        "first_failing_order": report.first_failing_order(),
        "residuals": report.residuals.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        "triples_checked": report.triples_checked,
        "sample_failure": failure,
    });
    Ok((passed, render(f, text, value)))
}

fn bracket(f: Format, plan: &BracketPlan) -> Result<(bool, String), CliError> {
    let (text, shape) = match plan {
        BracketPlan::Schouten(a, b) => {
            let r = schouten_bracket(a, b)?;
            (r.to_string(), json!({"degree": r.degree()}))
        }
        BracketPlan::Gerstenhaber(a, b) => {
            let r = gerstenhaber_bracket(a, b)?;
            (r.to_string(), json!({"arity": r.arity()}))
        }
        BracketPlan::HochschildD(a) => {
            let r = hochschild_d(a)?;
            (r.to_string(), json!({"arity": r.arity()}))
        }
        BracketPlan::Hkr(a) => {
            let r = hkr(a)?;
            (r.to_string(), json!({"arity": r.arity()}))
        }
    };
    let mut value = json!({"operation": plan.name(), "result": text});
    if let (Value::Object(v), Value::Object(s)) = (&mut value, shape) {
        v.extend(s);
    }
    Ok((true, render(f, text, value)))
}
