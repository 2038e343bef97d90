mod gen;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cgr_core::logic::{phi_graph, phi_rule, phi_support};
use cgr_core::rules::closure_with;
use cgr_core::{
    ask, check, emit_result, irredundant_form, parse_kb, print_kb, Budget, KbDocument, Model,
    Outcome, RuleError,
};
use clap::{Parser, Subcommand};

const EXIT_UNKNOWN: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cgr",
    version,
    about = "Reasoning with simple conceptual graphs, rules and constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Consistency of the facts with the constraints, under the inference rules.
    Check {
        #[arg(long)]
        kb: PathBuf,
        /// Search limit; 0 means unbounded.
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        /// Accepted for compatibility; the search is always sequential.
        #[arg(long)]
        deterministic: bool,
    },
    /// Whether the query can be deduced in the given model.
    Ask {
        #[arg(long)]
        kb: PathBuf,
        /// Graph lines of the query; defaults to the [query] section of the KB.
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(long)]
        model: Model,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        #[arg(long)]
        deterministic: bool,
    },
    /// Prints the knowledge base with its facts closed under the inference rules.
    Closure {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, default_value_t = 0)]
        budget: u64,
    },
    /// Prints the knowledge base in canonical form.
    Normalize {
        #[arg(long)]
        kb: PathBuf,
    },
    /// Prints the knowledge base with its facts replaced by their irredundant form.
    Core {
        #[arg(long)]
        kb: PathBuf,
    },
    /// Prints the first order formulas of the knowledge base.
    ExportFol {
        #[arg(long)]
        kb: PathBuf,
    },
    /// Generates an instance of a reduction with an oracle sidecar.
    Gen(gen::GenArgs),
}

fn budget(n: u64) -> Budget {
    if n == 0 {
        Budget::unbounded()
    } else {
        Budget::uniform(n)
    }
}

fn load(path: &Path) -> Result<KbDocument> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_kb(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Parses the query file against the KB text with its own [query] section
/// dropped, so both share one support.
fn load_with_query(kb: &Path, query: &Path) -> Result<KbDocument> {
    let text = std::fs::read_to_string(kb).with_context(|| format!("reading {}", kb.display()))?;
    let body =
        std::fs::read_to_string(query).with_context(|| format!("reading {}", query.display()))?;
    let mut merged = String::new();
    let mut skipping = false;
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with('[') {
            skipping = t == "[query]";
        }
        if !skipping {
            merged.push_str(line);
            merged.push('\n');
        }
    }
    if !body.lines().any(|l| l.trim() == "[query]") {
        merged.push_str("\n[query]\n");
    }
    merged.push_str(&body);
    let doc = parse_kb(&merged).with_context(|| format!("parsing {}", query.display()))?;
    if doc.query.is_none() {
        bail!("the query file is empty");
    }
    Ok(doc)
}

fn verdict_exit(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Proved => 0,
        Outcome::Refuted => 1,
        Outcome::Unknown => EXIT_UNKNOWN,
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check { kb, budget: n, .. } => {
            let doc = load(&kb)?;
            let model = if doc.kb.rules.is_empty() {
                Model::Sgc
            } else {
                Model::Src
            };
            let v = check(&doc.kb, budget(n))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&emit_result(&v, Some(model)))?
            );
            Ok(verdict_exit(v.outcome))
        }
        Command::Ask {
            kb,
            query,
            model,
            budget: n,
            ..
        } => {
            let doc = match &query {
                Some(p) => load_with_query(&kb, p)?,
                None => load(&kb)?,
            };
            let q = doc
                .query
                .as_ref()
                .context("no query given and the KB has no [query] section")?;
            let v = ask(model, q, &doc.kb, budget(n))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&emit_result(&v, Some(model)))?
            );
            Ok(verdict_exit(v.outcome))
        }
        Command::Closure { kb, budget: n } => {
            let mut doc = load(&kb)?;
            let bound = (n > 0).then_some(n);
            match closure_with(&doc.kb.facts, &doc.kb.rules, bound) {
                Ok(d) => {
                    doc.kb.facts = d.graph;
                    print!("{}", print_kb(&doc.kb, doc.query.as_ref()));
                    Ok(0)
                }
                Err(RuleError::BudgetExhausted(b)) => {
                    eprintln!("closure not reached within {b} rule applications");
                    Ok(EXIT_UNKNOWN)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Normalize { kb } => {
            let doc = load(&kb)?;
            print!("{}", print_kb(&doc.kb, doc.query.as_ref()));
            Ok(0)
        }
        Command::Core { kb } => {
            let mut doc = load(&kb)?;
            doc.kb.facts = irredundant_form(&doc.kb.facts)?.core;
            print!("{}", print_kb(&doc.kb, doc.query.as_ref()));
            Ok(0)
        }
        Command::ExportFol { kb } => {
            let doc = load(&kb)?;
            let kb = &doc.kb;
            for f in phi_support(&kb.support) {
                println!("support: {}", f.canonical());
            }
            println!("facts: {}", phi_graph(&kb.facts).canonical());
            for r in &kb.rules {
                println!("rule {}: {}", r.name, phi_rule(r).canonical());
            }
            for r in &kb.evolutions {
                println!("evolution {}: {}", r.name, phi_rule(r).canonical());
            }
            for c in &kb.constraints {
                println!(
                    "constraint {}: {}",
                    c.name(),
                    phi_rule(&c.colored).canonical()
                );
            }
            if let Some(q) = &doc.query {
                println!("query: {}", phi_graph(q).canonical());
            }
            Ok(0)
        }
        Command::Gen(args) => {
            gen::run(&args)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
