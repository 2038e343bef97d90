use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use cgr_core::oracles::{
    csp_satisfiable, exists_forall_exists, forall_exists, mixed_consistent, rewrites_to, sat,
    Reachability,
};
use cgr_core::reductions::{
    csp_to_projection, gen_sat3_2c_sgc, gen_sat3_3_sec, gen_sat3_projection, gen_sgc_to_sec,
    gen_word_problem_sr, mixed_to_sgc, CnfFormula, MixedCsp, SemiThueSystem,
};
use cgr_core::{print_kb, KnowledgeBase, Model};
use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Sat3,
    #[value(name = "sat3-2c")]
    Sat3TwoC,
    #[value(name = "sat3-3")]
    Sat3Three,
    Word,
    Csp,
    Mixed,
    Sgc2sec,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    pub kind: Kind,
    /// Writes `<OUT>.kb` and `<OUT>.oracle.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub vars: usize,
    #[arg(long, default_value_t = 6)]
    pub clauses: usize,
    /// Quantifier block sizes, e.g. `2,2`; overrides `--vars`.
    #[arg(long, value_delimiter = ',')]
    pub blocks: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub letters: usize,
    #[arg(long, default_value_t = 2)]
    pub rules: usize,
    #[arg(long, default_value_t = 3)]
    pub max_len: usize,
    /// Rewriting depth explored by the word problem oracle.
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, default_value_t = 3)]
    pub domain: usize,
    #[arg(long, default_value_t = 1)]
    pub uncontrollable: usize,
    #[arg(long, default_value_t = 0.6)]
    pub density: f64,
    #[arg(long, default_value_t = 0.5)]
    pub tightness: f64,
}

struct Instance {
    text: String,
    command: &'static str,
    model: Option<Model>,
    expected: Option<bool>,
    problem: Value,
    oracle: Value,
}

fn block_sizes(args: &GenArgs, n: usize) -> Result<Vec<usize>> {
    if !args.blocks.is_empty() {
        if args.blocks.len() != n {
            bail!("expected {n} block sizes, got {}", args.blocks.len());
        }
        return Ok(args.blocks.clone());
    }
    if args.vars < n {
        bail!("at least {n} variables are needed");
    }
    Ok((0..n)
        .map(|i| args.vars / n + usize::from(i < args.vars % n))
        .collect())
}

fn formula(args: &GenArgs, rng: &mut ChaCha8Rng, blocks: usize) -> Result<CnfFormula> {
    let sizes = block_sizes(args, blocks)?;
    let mut f = CnfFormula::random(rng, sizes.iter().sum(), args.clauses);
    if blocks > 1 {
        f.partition = f.blocks(&sizes);
    }
    Ok(f)
}

fn build(args: &GenArgs) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    Ok(match args.kind {
        Kind::Sat3 => {
            let f = formula(args, &mut rng, 1)?;
            let (q, g) = gen_sat3_projection(&f)?;
            let s = sat(&f);
            Instance {
                text: print_kb(&KnowledgeBase::with_facts(&g), Some(&q)),
                command: "ask",
                model: Some(Model::Sg),
                expected: Some(s),
                problem: json!(f),
                oracle: json!({ "satisfiable": s }),
            }
        }
        Kind::Sat3TwoC => {
            let f = formula(args, &mut rng, 2)?;
            let (g, c) = gen_sat3_2c_sgc(&f)?;
            let v = forall_exists(&f, &f.partition[0], &f.partition[1]);
            Instance {
                text: print_kb(&KnowledgeBase::with_facts(&g).constraint(c), None),
                command: "check",
                model: None,
                expected: Some(v),
                problem: json!(f),
                oracle: json!({ "forall_exists": v }),
            }
        }
        Kind::Sat3Three => {
            let f = formula(args, &mut rng, 3)?;
            let (kb, goal) = gen_sat3_3_sec(&f)?;
            let p = &f.partition;
            let v = exists_forall_exists(&f, &p[0], &p[1], &p[2]);
            Instance {
                text: print_kb(&kb, Some(&goal)),
                command: "ask",
                model: Some(Model::Sec),
                expected: Some(v),
                problem: json!(f),
                oracle: json!({ "exists_forall_exists": v }),
            }
        }
        Kind::Word => {
            let s = SemiThueSystem::random(&mut rng, args.letters, args.rules, args.max_len);
            let (kb, goal) = gen_word_problem_sr(&s)?;
            let r = rewrites_to(&s, args.depth, 100_000);
            let (expected, oracle) = match r {
                Reachability::Reachable(d) => (Some(true), json!({ "reachable_in": d })),
                Reachability::Unreachable => (Some(false), json!({ "reachable": false })),
                Reachability::Unknown => (None, json!({ "reachable": null, "depth": args.depth })),
            };
            Instance {
                text: print_kb(&kb, Some(&goal)),
                command: "ask",
                model: Some(Model::Sr),
                expected,
                problem: json!(s),
                oracle,
            }
        }
        Kind::Csp => {
            let p = MixedCsp::random(
                &mut rng,
                args.vars,
                args.domain,
                0,
                args.density,
                args.tightness,
            );
            let (q, t) = csp_to_projection(&p)?;
            let v = csp_satisfiable(&p);
            Instance {
                text: print_kb(&KnowledgeBase::with_facts(&t), Some(&q)),
                command: "ask",
                model: Some(Model::Sg),
                expected: Some(v),
                problem: json!(p),
                oracle: json!({ "satisfiable": v }),
            }
        }
        Kind::Mixed => {
            if args.uncontrollable > args.vars {
                bail!("more uncontrollable variables than variables");
            }
            let p = MixedCsp::random(
                &mut rng,
                args.vars,
                args.domain,
                args.uncontrollable,
                args.density,
                args.tightness,
            );
            let (t, c) = mixed_to_sgc(&p)?;
            let v = mixed_consistent(&p);
            Instance {
                text: print_kb(&KnowledgeBase::with_facts(&t).constraint(c), None),
                command: "check",
                model: None,
                expected: Some(v),
                problem: json!(p),
                oracle: json!({ "consistent": v }),
            }
        }
        Kind::Sgc2sec => {
            let f = formula(args, &mut rng, 2)?;
            let (g, c) = gen_sat3_2c_sgc(&f)?;
            let (kb, goal) = gen_sgc_to_sec(&g, &c)?;
            let v = forall_exists(&f, &f.partition[0], &f.partition[1]);
            Instance {
                text: print_kb(&kb, Some(&goal)),
                command: "ask",
                model: Some(Model::Sec),
                expected: Some(!v),
                problem: json!(f),
                oracle: json!({ "forall_exists": v }),
            }
        }
    })
}

pub fn run(args: &GenArgs) -> Result<()> {
    let inst = build(args)?;
    let kb_path = args.out.with_extension("kb");
    let oracle_path = args.out.with_extension("oracle.json");
    let expected = inst.expected.map(|p| if p { "Proved" } else { "Refuted" });
    let sidecar = json!({
        "schema": 1,
        "kind": args.kind.to_possible_value().map(|v| v.get_name().to_string()),
        "seed": args.seed,
        "command": inst.command,
        "model": inst.model.map(|m| m.name()),
        "expected": expected,
        "oracle": inst.oracle,
        "problem": inst.problem,
    });
    std::fs::write(&kb_path, inst.text)
        .with_context(|| format!("writing {}", kb_path.display()))?;
    std::fs::write(&oracle_path, serde_json::to_string_pretty(&sidecar)? + "\n")
        .with_context(|| format!("writing {}", oracle_path.display()))?;
    println!("{}", kb_path.display());
    Ok(())
}
