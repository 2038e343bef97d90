//! Decision procedures of the six models, with budgets, three-valued
//! verdicts and replayable certificates.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{Checker, Constraint, ConstraintError, Polarity, Violation};
use crate::forms::{equivalent, irredundant_form, iso_invariant, isomorphic, FormsError};
use crate::graph::{GraphError, SimpleGraph};
use crate::homomorphism::{
    exists_projection, find_projection, for_each_projection, is_projection, Projection,
    ProjectionError,
};
use crate::kb::KnowledgeBase;
use crate::rules::{
    apply_rule, first_non_range_restricted, replay_trace, ColoredGraph, DerivationTrace,
    DeriveStatus, Deriver, RuleError, Strategy, TraceStep,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Proved,
    Refuted,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Proved => "Proved",
            Outcome::Refuted => "Refuted",
            Outcome::Unknown => "Unknown",
        })
    }
}

/// The six reasoning models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Sg,
    Sr,
    Sgc,
    Src,
    Sec,
    Srec,
}

impl Model {
    pub const ALL: [Model; 6] = [
        Model::Sg,
        Model::Sr,
        Model::Sgc,
        Model::Src,
        Model::Sec,
        Model::Srec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::Sg => "sg",
            Model::Sr => "sr",
            Model::Sgc => "sgc",
            Model::Src => "src",
            Model::Sec => "sec",
            Model::Srec => "srec",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown model `{s}`"))
    }
}

/// Search limits. `None` means unbounded, which is only accepted where the
/// search is guaranteed to terminate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_applications: Option<u64>,
    pub max_worlds: Option<u64>,
    pub max_restore_depth: Option<u64>,
}

impl Budget {
    pub fn unbounded() -> Self {
        Budget::default()
    }

    /// The same limit for every dimension.
    pub fn uniform(n: u64) -> Self {
        Budget {
            max_applications: Some(n),
            max_worlds: Some(n),
            max_restore_depth: Some(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonerError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(
        "unbounded search requested but rule `{0}` is not range restricted; give a finite budget"
    )]
    Unbounded(String),
    #[error("certificate does not check: {0}")]
    BadCertificate(String),
}

/// One world of an evolution path: the inference derivation saturating it,
/// then the evolution step leading to the next world.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldStep {
    pub closure: DerivationTrace,
    pub evolution: Option<TraceStep>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    /// Inference derivation from the facts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<DerivationTrace>,
    /// World path for the evolution models.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub worlds: Vec<WorldStep>,
    /// Query node id -> node id of the final graph.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
    /// The answer rests on an exhausted search rather than a witness.
    pub exhaustive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_fingerprint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub budget_spent: u64,
    pub certificate: Option<Certificate>,
    pub diagnostics: Vec<String>,
}

impl Verdict {
    fn new(outcome: Outcome, spent: u64, certificate: Certificate) -> Self {
        Verdict {
            outcome,
            budget_spent: spent,
            certificate: Some(certificate),
            diagnostics: Vec::new(),
        }
    }

    fn unknown(spent: u64, note: impl Into<String>) -> Self {
        Verdict {
            outcome: Outcome::Unknown,
            budget_spent: spent,
            certificate: None,
            diagnostics: vec![note.into()],
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.diagnostics.push(note.into());
        self
    }

    pub fn is_proved(&self) -> bool {
        self.outcome == Outcome::Proved
    }

    pub fn is_refuted(&self) -> bool {
        self.outcome == Outcome::Refuted
    }
}

fn ignored(kb: &KnowledgeBase, model: Model) -> Vec<String> {
    let mut out = Vec::new();
    let uses_r = matches!(model, Model::Sr | Model::Src | Model::Srec);
    let uses_e = matches!(model, Model::Sr | Model::Sec | Model::Srec);
    let uses_c = matches!(model, Model::Sgc | Model::Src | Model::Sec | Model::Srec);
    if !uses_r && !kb.rules.is_empty() {
        out.push(format!(
            "{} inference rule(s) ignored by the {model} model",
            kb.rules.len()
        ));
    }
    if !uses_e && !kb.evolutions.is_empty() {
        out.push(format!(
            "{} evolution rule(s) ignored by the {model} model",
            kb.evolutions.len()
        ));
    }
    if !uses_c && !kb.constraints.is_empty() {
        out.push(format!(
            "{} constraint(s) ignored by the {model} model",
            kb.constraints.len()
        ));
    }
    out
}

fn require_bound(rules: &[ColoredGraph], bound: Option<u64>) -> Result<Option<u64>, ReasonerError> {
    match first_non_range_restricted(rules) {
        None => Ok(None),
        Some(r) => match bound {
            Some(b) => Ok(Some(b)),
            None => Err(ReasonerError::Unbounded(r.name.clone())),
        },
    }
}

/// Deduction with facts only.
pub fn sg_deduce(q: &SimpleGraph, kb: &KnowledgeBase) -> Result<Verdict, ReasonerError> {
    let g = kb.facts.normal_form();
    let mut v = match find_projection(q, &g)? {
        Some(p) => Verdict::new(
            Outcome::Proved,
            0,
            Certificate {
                projection: Some(p.id_map(q, &g)),
                final_fingerprint: Some(g.fingerprint()),
                ..Default::default()
            },
        ),
        None => Verdict::new(
            Outcome::Refuted,
            0,
            Certificate {
                exhaustive: true,
                final_fingerprint: Some(g.fingerprint()),
                ..Default::default()
            },
        ),
    };
    v.diagnostics = ignored(kb, Model::Sg);
    Ok(v)
}

/// Forward chaining from `g` with a goal check after every step.
fn chase_for_goal(
    q: &SimpleGraph,
    g: &SimpleGraph,
    rules: &[ColoredGraph],
    bound: Option<u64>,
) -> Result<Verdict, ReasonerError> {
    let mut d = Deriver::new(g, rules)?;
    let mut found = find_projection(q, d.graph())?;
    let mut status = DeriveStatus::Stopped;
    if found.is_none() {
        let mut err = None;
        status = d.run(
            Strategy::BreadthRoundRobin,
            bound,
            &mut |h| match find_projection(q, h) {
                Ok(Some(p)) => {
                    found = Some(p);
                    ControlFlow::Break(())
                }
                Ok(None) => ControlFlow::Continue(()),
                Err(e) => {
                    err = Some(e);
                    ControlFlow::Break(())
                }
            },
        )?;
        if let Some(e) = err {
            return Err(e.into());
        }
    }
    let spent = d.steps();
    let (graph, trace) = d.into_parts();
    Ok(match (found, status) {
        (Some(p), _) => Verdict::new(
            Outcome::Proved,
            spent,
            Certificate {
                projection: Some(p.id_map(q, &graph)),
                final_fingerprint: Some(graph.fingerprint()),
                derivation: Some(trace),
                ..Default::default()
            },
        ),
        (None, DeriveStatus::Closed) => Verdict::new(
            Outcome::Refuted,
            spent,
            Certificate {
                derivation: Some(trace),
                exhaustive: true,
                final_fingerprint: Some(graph.fingerprint()),
                ..Default::default()
            },
        ),
        (None, _) => Verdict::unknown(spent, format!("no answer within {spent} rule applications")),
    })
}

/// Deduction with inference and evolution rules, which coincide here.
pub fn sr_deduce(
    q: &SimpleGraph,
    kb: &KnowledgeBase,
    budget: Budget,
) -> Result<Verdict, ReasonerError> {
    let rules: Vec<ColoredGraph> = kb.rules.iter().chain(&kb.evolutions).cloned().collect();
    let bound = require_bound(&rules, budget.max_applications)?;
    let mut v = chase_for_goal(q, &kb.facts, &rules, bound)?;
    v.diagnostics.extend(ignored(kb, Model::Sr));
    Ok(v)
}

/// Consistency of facts with constraints.
pub fn sgc_consistent(kb: &KnowledgeBase) -> Result<Verdict, ReasonerError> {
    let g = kb.facts.normal_form();
    let mut checker = Checker::new(&g);
    let mut v = match checker.first_violation(&kb.constraints)? {
        Some(violation) => Verdict::new(
            Outcome::Refuted,
            0,
            Certificate {
                violation: Some(violation),
                final_fingerprint: Some(g.fingerprint()),
                ..Default::default()
            },
        ),
        None => Verdict::new(
            Outcome::Proved,
            0,
            Certificate {
                exhaustive: true,
                final_fingerprint: Some(g.fingerprint()),
                ..Default::default()
            },
        ),
    };
    v.diagnostics = ignored(kb, Model::Sgc);
    Ok(v)
}

pub fn sgc_deduce(q: &SimpleGraph, kb: &KnowledgeBase) -> Result<Verdict, ReasonerError> {
    let c = sgc_consistent(kb)?;
    if c.outcome != Outcome::Proved {
        return Ok(c.note("knowledge base is inconsistent"));
    }
    let mut v = sg_deduce(q, kb)?;
    v.diagnostics = ignored(kb, Model::Sgc);
    Ok(v)
}

/// Consistency with inference rules and constraints. Exact when the rules
/// are range restricted or the derivation closes within budget.
pub fn src_consistent(kb: &KnowledgeBase, budget: Budget) -> Result<Verdict, ReasonerError> {
    let mut v = src_consistent_from(&kb.facts, &kb.rules, &kb.constraints, budget)?;
    v.diagnostics.extend(ignored(kb, Model::Src));
    Ok(v)
}

fn src_consistent_from(
    facts: &SimpleGraph,
    rules: &[ColoredGraph],
    constraints: &[Constraint],
    budget: Budget,
) -> Result<Verdict, ReasonerError> {
    if constraints.is_empty() {
        return Ok(Verdict::new(
            Outcome::Proved,
            0,
            Certificate {
                exhaustive: true,
                ..Default::default()
            },
        ));
    }
    let bound = require_bound(rules, budget.max_applications)?;
    let mut d = Deriver::new(facts, rules)?;
    let status = d.run(Strategy::BreadthRoundRobin, bound, &mut |_| {
        ControlFlow::Continue(())
    })?;
    let spent = d.steps();
    let (graph, trace) = d.into_parts();
    let mut checker = Checker::new(&graph);
    let certificate = |violation, exhaustive| Certificate {
        derivation: Some(trace.clone()),
        violation,
        exhaustive,
        final_fingerprint: Some(graph.fingerprint()),
        ..Default::default()
    };
    if status == DeriveStatus::Closed {
        return Ok(match checker.first_violation(constraints)? {
            Some(v) => Verdict::new(Outcome::Refuted, spent, certificate(Some(v), false)),
            None => Verdict::new(Outcome::Proved, spent, certificate(None, true)),
        });
    }
    let negatives: Vec<Constraint> = constraints
        .iter()
        .filter(|c| c.polarity == Polarity::Negative)
        .cloned()
        .collect();
    Ok(match checker.first_violation(&negatives)? {
        Some(v) => Verdict::new(Outcome::Refuted, spent, certificate(Some(v), false)),
        None => Verdict::unknown(
            spent,
            format!("derivation not closed after {spent} rule applications"),
        ),
    })
}

/// Whether a violation of `c` in `g` can be repaired by inference rules.
pub fn restorable(
    c: &Constraint,
    violation: &Violation,
    g: &SimpleGraph,
    rules: &[ColoredGraph],
    budget: Budget,
) -> Result<Verdict, ReasonerError> {
    if c.polarity == Polarity::Negative {
        return Ok(Verdict::new(
            Outcome::Refuted,
            0,
            Certificate {
                violation: Some(violation.clone()),
                ..Default::default()
            },
        )
        .note("violations of negative constraints are never restorable"));
    }
    let core = irredundant_form(g)?.core;
    let pi = Projection::from_id_map(&violation.map, c.trigger(), &core)
        .ok_or_else(|| ReasonerError::BadCertificate("violation does not resolve".into()))?;
    let glued = apply_rule(&c.colored, &core, &pi)?.graph;
    let bound = require_bound(rules, budget.max_restore_depth)?;
    chase_for_goal(&glued, g, rules, bound)
}

/// Deduction with inference rules and constraints.
pub fn src_deduce(
    q: &SimpleGraph,
    kb: &KnowledgeBase,
    budget: Budget,
) -> Result<Verdict, ReasonerError> {
    let c = src_consistent(kb, budget)?;
    if c.outcome != Outcome::Proved {
        return Ok(c.note("knowledge base is not known to be consistent"));
    }
    let bound = require_bound(&kb.rules, budget.max_applications)?;
    let mut v = chase_for_goal(q, &kb.facts, &kb.rules, bound)?;
    v.budget_spent += c.budget_spent;
    v.diagnostics.extend(ignored(kb, Model::Src));
    Ok(v)
}

/// Deduction with evolution rules and constraints.
pub fn sec_deduce(
    q: &SimpleGraph,
    kb: &KnowledgeBase,
    budget: Budget,
) -> Result<Verdict, ReasonerError> {
    let mut v = world_search(q, &kb.facts, &[], &kb.evolutions, &kb.constraints, budget)?;
    v.diagnostics.extend(ignored(kb, Model::Sec));
    Ok(v)
}

/// Deduction with inference rules, evolution rules and constraints.
pub fn srec_deduce(
    q: &SimpleGraph,
    kb: &KnowledgeBase,
    budget: Budget,
) -> Result<Verdict, ReasonerError> {
    world_search(
        q,
        &kb.facts,
        &kb.rules,
        &kb.evolutions,
        &kb.constraints,
        budget,
    )
}

/// Runs the procedure of a model.
pub fn ask(
    model: Model,
    q: &SimpleGraph,
    kb: &KnowledgeBase,
    budget: Budget,
) -> Result<Verdict, ReasonerError> {
    match model {
        Model::Sg => sg_deduce(q, kb),
        Model::Sr => sr_deduce(q, kb, budget),
        Model::Sgc => sgc_deduce(q, kb),
        Model::Src => src_deduce(q, kb, budget),
        Model::Sec => sec_deduce(q, kb, budget),
        Model::Srec => srec_deduce(q, kb, budget),
    }
}

/// Consistency of the initial world.
pub fn check(kb: &KnowledgeBase, budget: Budget) -> Result<Verdict, ReasonerError> {
    if kb.rules.is_empty() {
        sgc_consistent(kb)
    } else {
        src_consistent(kb, budget)
    }
}

enum Consistency {
    Consistent,
    Inconsistent(Violation),
    Unknown,
}

struct Evaluated {
    saturated: SimpleGraph,
    closure: DerivationTrace,
    consistency: Consistency,
    spent: u64,
}

fn evaluate(
    world: &SimpleGraph,
    rules: &[ColoredGraph],
    constraints: &[Constraint],
    bound: Option<u64>,
) -> Result<Evaluated, ReasonerError> {
    let mut d = Deriver::new(world, rules)?;
    let status = d.run(Strategy::BreadthRoundRobin, bound, &mut |_| {
        ControlFlow::Continue(())
    })?;
    let spent = d.steps();
    let (saturated, closure) = d.into_parts();
    let mut checker = Checker::new(&saturated);
    let consistency = if status == DeriveStatus::Closed {
        match checker.first_violation(constraints)? {
            Some(v) => Consistency::Inconsistent(v),
            None => Consistency::Consistent,
        }
    } else {
        let negatives: Vec<Constraint> = constraints
            .iter()
            .filter(|c| c.polarity == Polarity::Negative)
            .cloned()
            .collect();
        match checker.first_violation(&negatives)? {
            Some(v) => Consistency::Inconsistent(v),
            None => Consistency::Unknown,
        }
    };
    Ok(Evaluated {
        saturated,
        closure,
        consistency,
        spent,
    })
}

struct World {
    saturated: SimpleGraph,
    path: Vec<WorldStep>,
    closure: DerivationTrace,
    seen: HashSet<(usize, Projection)>,
}

/// Breadth-first search over evolution worlds. Every world is saturated by
/// the inference rules and must be consistent; duplicate worlds (up to
/// isomorphism) are explored once.
fn world_search(
    q: &SimpleGraph,
    facts: &SimpleGraph,
    rules: &[ColoredGraph],
    evolutions: &[ColoredGraph],
    constraints: &[Constraint],
    budget: Budget,
) -> Result<Verdict, ReasonerError> {
    let r_bound = require_bound(rules, budget.max_applications)?;
    let w_bound = match first_non_range_restricted(evolutions) {
        Some(e) if budget.max_worlds.is_none() => {
            return Err(ReasonerError::Unbounded(e.name.clone()))
        }
        _ => budget.max_worlds,
    };
    let mut spent = 0u64;
    let root = evaluate(facts, rules, constraints, r_bound)?;
    spent += root.spent;
    match root.consistency {
        Consistency::Inconsistent(v) => {
            return Ok(Verdict::new(
                Outcome::Refuted,
                spent,
                Certificate {
                    worlds: vec![WorldStep {
                        closure: root.closure,
                        evolution: None,
                    }],
                    violation: Some(v),
                    ..Default::default()
                },
            )
            .note("the initial world is inconsistent"));
        }
        Consistency::Unknown => {
            return Ok(Verdict::unknown(
                spent,
                "consistency of the initial world is unknown",
            ));
        }
        Consistency::Consistent => {}
    }
    let mut uncertain = false;
    let mut explored = 1u64;
    let mut known: HashMap<u64, Vec<SimpleGraph>> = HashMap::new();
    known
        .entry(iso_invariant(&root.saturated))
        .or_default()
        .push(root.saturated.clone());
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(World {
        saturated: root.saturated,
        path: Vec::new(),
        closure: root.closure,
        seen: HashSet::new(),
    });
    while let Some(world) = queue.pop_front() {
        if let Some(p) = find_projection(q, &world.saturated)? {
            let mut path = world.path.clone();
            path.push(WorldStep {
                closure: world.closure.clone(),
                evolution: None,
            });
            return Ok(Verdict::new(
                Outcome::Proved,
                spent,
                Certificate {
                    worlds: path,
                    projection: Some(p.id_map(q, &world.saturated)),
                    final_fingerprint: Some(world.saturated.fingerprint()),
                    ..Default::default()
                },
            )
            .note(format!("{explored} world(s) explored")));
        }
        for (e, rule) in evolutions.iter().enumerate() {
            let mut pending = Vec::new();
            for_each_projection(rule.zero_part(), &world.saturated, None, |p| {
                if !world.seen.contains(&(e, p.clone())) {
                    pending.push(p.clone());
                }
                ControlFlow::Continue(())
            })?;
            for pi in pending {
                let app = apply_rule(rule, &world.saturated, &pi)?;
                if !app.changed() {
                    continue;
                }
                if w_bound.is_some_and(|b| explored >= b) {
                    return Ok(Verdict::unknown(
                        spent,
                        format!("world budget of {explored} exhausted"),
                    ));
                }
                explored += 1;
                spent += 1;
                let step = TraceStep {
                    rule: rule.name.clone(),
                    map: pi.id_map(rule.zero_part(), &world.saturated),
                    fingerprint: app.graph.fingerprint(),
                };
                let child = evaluate(&app.graph, rules, constraints, r_bound)?;
                spent += child.spent;
                match child.consistency {
                    Consistency::Inconsistent(_) => continue,
                    Consistency::Unknown => {
                        uncertain = true;
                        continue;
                    }
                    Consistency::Consistent => {}
                }
                let key = iso_invariant(&child.saturated);
                let bucket = known.entry(key).or_default();
                let mut duplicate = false;
                for other in bucket.iter() {
                    if isomorphic(other, &child.saturated)? {
                        duplicate = true;
                        break;
                    }
                }
                if duplicate {
                    continue;
                }
                bucket.push(child.saturated.clone());
                let mut seen = world.seen.clone();
                seen.insert((e, pi));
                let mut path = world.path.clone();
                path.push(WorldStep {
                    closure: world.closure.clone(),
                    evolution: Some(step),
                });
                queue.push_back(World {
                    saturated: child.saturated,
                    path,
                    closure: child.closure,
                    seen,
                });
            }
        }
    }
    if uncertain {
        return Ok(Verdict::unknown(
            spent,
            "some worlds could not be shown consistent within budget",
        ));
    }
    Ok(Verdict::new(
        Outcome::Refuted,
        spent,
        Certificate {
            exhaustive: true,
            ..Default::default()
        },
    )
    .note(format!("{explored} world(s) explored")))
}

/// Reference consistency check with inference rules: enumerates every
/// derivable graph (up to isomorphism) and, for every violation found in
/// one of them, searches its descendants for a repair.
pub fn src_consistent_exhaustive(
    kb: &KnowledgeBase,
    budget: Budget,
) -> Result<Verdict, ReasonerError> {
    let rules = &kb.rules;
    let start = kb.facts.normal_form();
    let mut states: Vec<SimpleGraph> = vec![start.clone()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut known: HashMap<u64, Vec<usize>> = HashMap::new();
    known.entry(iso_invariant(&start)).or_default().push(0);
    let mut next = 0;
    let mut spent = 0u64;
    while next < states.len() {
        let current = states[next].clone();
        for rule in rules {
            let mut projections = Vec::new();
            for_each_projection(rule.zero_part(), &current, None, |p| {
                projections.push(p.clone());
                ControlFlow::Continue(())
            })?;
            for pi in projections {
                let app = apply_rule(rule, &current, &pi)?;
                if !app.changed() {
                    continue;
                }
                spent += 1;
                let key = iso_invariant(&app.graph);
                let mut found = None;
                for &i in known.get(&key).into_iter().flatten() {
                    if isomorphic(&states[i], &app.graph)? {
                        found = Some(i);
                        break;
                    }
                }
                let idx = match found {
                    Some(i) => i,
                    None => {
                        if budget.max_worlds.is_some_and(|b| states.len() as u64 >= b) {
                            return Ok(Verdict::unknown(spent, "state budget exhausted"));
                        }
                        states.push(app.graph);
                        children.push(Vec::new());
                        known.entry(key).or_default().push(states.len() - 1);
                        states.len() - 1
                    }
                };
                if !children[next].contains(&idx) {
                    children[next].push(idx);
                }
            }
        }
        next += 1;
    }
    for (i, h) in states.iter().enumerate() {
        let descendants = reachable(&children, i);
        let mut checker = Checker::new(h);
        for c in &kb.constraints {
            for violation in checker.violations(c, None)? {
                if c.polarity == Polarity::Negative {
                    return Ok(Verdict::new(
                        Outcome::Refuted,
                        spent,
                        Certificate {
                            violation: Some(violation),
                            final_fingerprint: Some(h.fingerprint()),
                            ..Default::default()
                        },
                    ));
                }
                let core = checker.core()?.clone();
                let glued = apply_rule(&c.colored, &core, &violation.projection)?.graph;
                let mut repaired = false;
                for &d in &descendants {
                    if exists_projection(&glued, &states[d])? {
                        repaired = true;
                        break;
                    }
                }
                if !repaired {
                    return Ok(Verdict::new(
                        Outcome::Refuted,
                        spent,
                        Certificate {
                            violation: Some(violation),
                            final_fingerprint: Some(h.fingerprint()),
                            ..Default::default()
                        },
                    ));
                }
            }
        }
    }
    Ok(Verdict::new(
        Outcome::Proved,
        spent,
        Certificate {
            exhaustive: true,
            ..Default::default()
        },
    )
    .note(format!("{} derivable graph(s) examined", states.len())))
}

fn reachable(children: &[Vec<usize>], from: usize) -> Vec<usize> {
    let mut seen = vec![false; children.len()];
    let mut stack = vec![from];
    let mut out = Vec::new();
    while let Some(i) = stack.pop() {
        if std::mem::replace(&mut seen[i], true) {
            continue;
        }
        out.push(i);
        stack.extend(children[i].iter().copied());
    }
    out.sort_unstable();
    out
}

/// True if every rule application on `g` yields a graph equivalent to `g`.
pub fn is_full(g: &SimpleGraph, rules: &[ColoredGraph]) -> Result<bool, ReasonerError> {
    for rule in rules {
        let mut projections = Vec::new();
        for_each_projection(rule.zero_part(), g, None, |p| {
            projections.push(p.clone());
            ControlFlow::Continue(())
        })?;
        for pi in projections {
            let app = apply_rule(rule, g, &pi)?;
            if app.changed() && !equivalent(&app.graph, g)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn bad(reason: impl Into<String>) -> ReasonerError {
    ReasonerError::BadCertificate(reason.into())
}

fn check_projection(
    q: &SimpleGraph,
    g: &SimpleGraph,
    map: &BTreeMap<String, String>,
) -> Result<(), ReasonerError> {
    let p = Projection::from_id_map(map, q, g).ok_or_else(|| bad("projection does not resolve"))?;
    if !is_projection(q, g, &p) {
        return Err(bad("node map is not a projection"));
    }
    Ok(())
}

fn check_violation(
    g: &SimpleGraph,
    constraints: &[Constraint],
    v: &Violation,
) -> Result<(), ReasonerError> {
    let c = constraints
        .iter()
        .find(|c| c.name() == v.constraint)
        .ok_or_else(|| bad("unknown constraint"))?;
    let mut checker = Checker::new(g);
    let all = checker.violations(c, None)?;
    if !all.iter().any(|w| w.map == v.map) {
        return Err(bad("reported violation does not occur"));
    }
    Ok(())
}

fn replay_worlds(
    q: &SimpleGraph,
    facts: &SimpleGraph,
    rules: &[ColoredGraph],
    evolutions: &[ColoredGraph],
    constraints: &[Constraint],
    cert: &Certificate,
) -> Result<(), ReasonerError> {
    let mut world = facts.normal_form();
    for (k, step) in cert.worlds.iter().enumerate() {
        let saturated = replay_trace(&world, rules, &step.closure)?;
        if !is_full(&saturated, rules)? {
            return Err(bad(format!("world {k} is not saturated")));
        }
        let last = k + 1 == cert.worlds.len();
        let mut checker = Checker::new(&saturated);
        match (&cert.violation, last) {
            (Some(v), true) => check_violation(&saturated, constraints, v)?,
            _ => {
                if checker.first_violation(constraints)?.is_some() {
                    return Err(bad(format!("world {k} is inconsistent")));
                }
            }
        }
        match &step.evolution {
            Some(ev) => {
                let r = evolutions
                    .iter()
                    .find(|r| r.name == ev.rule)
                    .ok_or_else(|| bad("unknown evolution rule"))?;
                let pi = Projection::from_id_map(&ev.map, r.zero_part(), &saturated)
                    .ok_or_else(|| bad("evolution step does not resolve"))?;
                world = apply_rule(r, &saturated, &pi)?.graph;
                if world.fingerprint() != ev.fingerprint {
                    return Err(bad("evolution fingerprint mismatch"));
                }
            }
            None => {
                if !last {
                    return Err(bad("missing evolution step"));
                }
                if let Some(map) = &cert.projection {
                    check_projection(q, &saturated, map)?;
                }
            }
        }
    }
    Ok(())
}

/// Checks a verdict's certificate. Witness certificates are checked directly;
/// answers resting on an exhausted search are recomputed.
pub fn replay(
    model: Model,
    q: &SimpleGraph,
    kb: &KnowledgeBase,
    budget: Budget,
    verdict: &Verdict,
) -> Result<(), ReasonerError> {
    let Some(cert) = &verdict.certificate else {
        return if verdict.outcome == Outcome::Unknown {
            Ok(())
        } else {
            Err(bad("missing certificate"))
        };
    };
    if verdict.outcome == Outcome::Unknown {
        return Err(bad("unknown verdict carries a certificate"));
    }
    if cert.exhaustive && cert.violation.is_none() && cert.projection.is_none() {
        let again = ask(model, q, kb, budget)?;
        if again.outcome != verdict.outcome {
            return Err(bad("recomputed outcome differs"));
        }
        return Ok(());
    }
    let facts = &kb.facts;
    match model {
        Model::Sg | Model::Sgc => {
            let g = facts.normal_form();
            if let Some(v) = &cert.violation {
                check_violation(&g, &kb.constraints, v)?;
            }
            if let Some(map) = &cert.projection {
                check_projection(q, &g, map)?;
            }
        }
        Model::Sr | Model::Src => {
            let rules: Vec<ColoredGraph> = if model == Model::Sr {
                kb.rules.iter().chain(&kb.evolutions).cloned().collect()
            } else {
                kb.rules.clone()
            };
            let trace = cert.derivation.clone().unwrap_or_default();
            let g = replay_trace(facts, &rules, &trace)?;
            if let Some(v) = &cert.violation {
                if kb
                    .constraints
                    .iter()
                    .any(|c| c.name() == v.constraint && c.polarity == Polarity::Positive)
                    && !is_full(&g, &rules)?
                {
                    return Err(bad(
                        "positive violation reported on a graph that is not full",
                    ));
                }
                check_violation(&g, &kb.constraints, v)?;
            }
            if let Some(map) = &cert.projection {
                check_projection(q, &g, map)?;
                if model == Model::Src && src_consistent(kb, budget)?.outcome != Outcome::Proved {
                    return Err(bad("knowledge base is not consistent"));
                }
            }
            if verdict.outcome == Outcome::Refuted && cert.violation.is_none() {
                if !is_full(&g, &rules)? {
                    return Err(bad("refutation graph is not full"));
                }
                if exists_projection(q, &g)? {
                    return Err(bad("query projects into the refutation graph"));
                }
            }
        }
        Model::Sec | Model::Srec => {
            let rules: &[ColoredGraph] = if model == Model::Sec { &[] } else { &kb.rules };
            replay_worlds(q, facts, rules, &kb.evolutions, &kb.constraints, cert)?;
        }
    }
    Ok(())
}
