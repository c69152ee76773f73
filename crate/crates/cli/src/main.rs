//! `causal-id`: identification, separation and verification from the shell.
//!
//! Exit status is 0 on success, 1 on usage or input errors, and 3 when the
//! answer is negative (not identifiable, not separated, verification failed).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use causal_id::estimand::print_estimand;
use causal_id::graph::{parse_graph_with, Admg, Graph, LatentDag, ParseOptions};
use causal_id::identify::{id_algorithm, instrument_candidates, IdentifyResult, Query, Treatment};
use causal_id::oracle::{random_scm, verify, Cardinalities};

#[derive(Parser)]
#[command(name = "causal-id", version, about = "Identify interventional distributions in causal graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether p(Y(a)) is identifiable and print the estimand or a hedge.
    Identify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Test whether X and Y are m-separated given Z.
    Dsep {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        /// Conditioning set; may be omitted or empty.
        #[arg(long, value_delimiter = ',')]
        z: Vec<String>,
    },
    /// Check the identified estimand against random discrete models.
    Verify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        query: QueryArgs,
        /// Number of random models.
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Seed of the first model; trial i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest accepted sup-norm error.
        #[arg(long, default_value_t = 1e-9, value_parser = positive)]
        tol: f64,
    },
    /// List the districts (bidirected components) of the graph.
    Districts {
        #[command(flatten)]
        input: Input,
    },
    /// Print the canonical latent DAG: one latent parent per bidirected edge.
    PrintCanonical {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Args)]
struct Input {
    /// Graph file in the line-oriented graph language.
    #[arg(long)]
    graph: PathBuf,
    /// Require every vertex to be declared with `node` or `latent`.
    #[arg(long)]
    strict: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct QueryArgs {
    /// Treatments as VAR, VAR=symbol or VAR=value, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    treatment: Vec<String>,
    /// Outcome variables, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    outcome: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, found {s:?}")),
    }
}

const NEGATIVE: u8 = 3;

/// Result of a command: stdout text, stderr diagnostics and the exit status.
struct Report {
    stdout: String,
    stderr: String,
    code: u8,
}

impl Report {
    fn new(stdout: String, code: u8) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            code,
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable");
    s.push('\n');
    s
}

fn load(input: &Input) -> Result<Graph, String> {
    let text = std::fs::read_to_string(&input.graph).map_err(|e| format!("{}: {e}", input.graph.display()))?;
    parse_graph_with(&text, ParseOptions { strict: input.strict })
        .map_err(|e| format!("{}: {e}", input.graph.display()))
}

fn query(args: &QueryArgs) -> Result<Query, String> {
    Ok(Query {
        treatments: args
            .treatment
            .iter()
            .map(|t| Treatment::parse(t).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?,
        outcomes: args.outcome.clone(),
    })
}

fn braces(names: &[String]) -> String {
    format!("{{{}}}", names.join(", "))
}

#[derive(Serialize)]
struct HedgeJson<'a> {
    inner: &'a [String],
    outer: &'a [String],
}

#[derive(Serialize)]
struct IdentifyJson<'a> {
    identifiable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimand: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hedge: Option<HedgeJson<'a>>,
}

/// Report for a non-identifiable query, shared by `identify` and `verify`.
fn hedge_report(g: &Admg, q: &Query, inner: &[String], outer: &[String], format: Format) -> Result<Report, String> {
    let stdout = match format {
        Format::Json => json(&IdentifyJson {
            identifiable: false,
            estimand: None,
            hedge: Some(HedgeJson { inner, outer }),
        }),
        Format::Text => format!("not identifiable\nhedge: inner {} outer {}\n", braces(inner), braces(outer)),
    };
    let mut report = Report::new(stdout, NEGATIVE);
    let instruments = instrument_candidates(g, q).map_err(|e| e.to_string())?;
    if !instruments.is_empty() {
        let noun = if instruments.len() == 1 { "candidate" } else { "candidates" };
        report.stderr = format!(
            "not identifiable; graph contains instrument {noun} {}\n",
            instruments.join(", ")
        );
    }
    Ok(report)
}

fn identify(input: &Input, args: &QueryArgs) -> Result<Report, String> {
    let g = load(input)?.into_admg();
    let q = query(args)?;
    match id_algorithm(&g, &q).map_err(|e| e.to_string())? {
        IdentifyResult::Estimand(e) => {
            let text = print_estimand(&e);
            let stdout = match input.format {
                Format::Json => json(&IdentifyJson {
                    identifiable: true,
                    estimand: Some(text),
                    hedge: None,
                }),
                Format::Text => text + "\n",
            };
            Ok(Report::new(stdout, 0))
        }
        IdentifyResult::Hedge { inner, outer } => hedge_report(&g, &q, &inner, &outer, input.format),
    }
}

fn dsep(input: &Input, x: &[String], y: &[String], z: &[String]) -> Result<Report, String> {
    // Latent vertices stay in the graph so they can be queried too.
    let g = match load(input)? {
        Graph::Admg(g) => g,
        Graph::Latent(d) => d.as_dag(),
    };
    let set = |names: &[String]| g.resolve(names.iter().filter(|n| !n.is_empty())).map_err(|e| e.to_string());
    let separated = g.m_separated(&set(x)?, &set(y)?, &set(z)?).map_err(|e| e.to_string())?;
    let stdout = match input.format {
        Format::Json => json(&serde_json::json!({ "separated": separated })),
        Format::Text => format!("{separated}\n"),
    };
    Ok(Report::new(stdout, if separated { 0 } else { NEGATIVE }))
}

#[derive(Serialize)]
struct TrialJson {
    seed: u64,
    max_abs_error: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    estimand: String,
    tol: f64,
    max_abs_error: f64,
    pass: bool,
    trials: &'a [TrialJson],
}

fn run_verify(input: &Input, args: &QueryArgs, trials: u64, seed: u64, tol: f64) -> Result<Report, String> {
    let graph = load(input)?;
    let dag: LatentDag = match &graph {
        Graph::Latent(d) => d.clone(),
        Graph::Admg(g) => g.canonical_dag(),
    };
    let g = graph.into_admg();
    let q = query(args)?;
    let e = match id_algorithm(&g, &q).map_err(|e| e.to_string())? {
        IdentifyResult::Estimand(e) => e,
        IdentifyResult::Hedge { inner, outer } => return hedge_report(&g, &q, &inner, &outer, input.format),
    };
    let mut results = Vec::with_capacity(trials as usize);
    for i in 0..trials {
        let s = seed.wrapping_add(i);
        let m = random_scm(&dag, s, &Cardinalities::default()).map_err(|e| e.to_string())?;
        let r = verify(&e, &m, &q, tol).map_err(|e| e.to_string())?;
        results.push(TrialJson {
            seed: s,
            max_abs_error: r.max_abs_error,
            pass: r.pass,
        });
    }
    let worst = results
        .iter()
        .fold(&results[0], |w, t| if t.max_abs_error > w.max_abs_error { t } else { w });
    let pass = results.iter().all(|t| t.pass);
    let text = print_estimand(&e);
    let stdout = match input.format {
        Format::Json => json(&VerifyJson {
            estimand: text,
            tol,
            max_abs_error: worst.max_abs_error,
            pass,
            trials: &results,
        }),
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "estimand: {text}").unwrap();
            writeln!(out, "trials: {trials} (seeds {seed}..={})", seed.wrapping_add(trials - 1)).unwrap();
            writeln!(out, "max_abs_error: {:e} (seed {})", worst.max_abs_error, worst.seed).unwrap();
            writeln!(out, "result: {} at tol {tol:e}", if pass { "pass" } else { "fail" }).unwrap();
            out
        }
    };
    Ok(Report::new(stdout, if pass { 0 } else { NEGATIVE }))
}

fn districts(input: &Input) -> Result<Report, String> {
    let g = load(input)?.into_admg();
    let blocks: Vec<Vec<String>> = g.districts().iter().map(|d| g.names_of(d)).collect();
    let stdout = match input.format {
        Format::Json => json(&serde_json::json!({ "districts": blocks })),
        Format::Text => blocks.iter().map(|b| braces(b) + "\n").collect(),
    };
    Ok(Report::new(stdout, 0))
}

fn print_canonical(input: &Input) -> Result<Report, String> {
    let dsl = load(input)?.into_admg().canonical_dag().to_dsl();
    let stdout = match input.format {
        Format::Json => json(&serde_json::json!({ "graph": dsl })),
        Format::Text => dsl,
    };
    Ok(Report::new(stdout, 0))
}

fn dispatch(command: &Command) -> Result<Report, String> {
    match command {
        Command::Identify { input, query } => identify(input, query),
        Command::Dsep { input, x, y, z } => dsep(input, x, y, z),
        Command::Verify {
            input,
            query,
            trials,
            seed,
            tol,
        } => run_verify(input, query, *trials, *seed, *tol),
        Command::Districts { input } => districts(input),
        Command::PrintCanonical { input } => print_canonical(input),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests succeed; everything else is misuse.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli.command) {
        Ok(report) => {
            print!("{}", report.stdout);
            eprint!("{}", report.stderr);
            ExitCode::from(report.code)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(positive("1e-9").is_ok());
        assert!(positive("0").is_err());
        assert!(positive("-1").is_err());
        assert!(positive("inf").is_err());
        assert!(positive("x").is_err());
    }

    #[test]
    fn braces_lists_names() {
        assert_eq!(braces(&["A".into(), "Y".into()]), "{A, Y}");
        assert_eq!(braces(&[]), "{}");
    }

    #[test]
    fn loads_report_the_path() {
        let input = Input {
            graph: PathBuf::from("/nonexistent/graph.g"),
            strict: false,
            format: Format::Text,
        };
        assert!(load(&input).unwrap_err().contains("/nonexistent/graph.g"));
    }
}
