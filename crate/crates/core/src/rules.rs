//! Bicolored graphs used as rules, rule application, derivations and
//! closures.

use std::collections::{BTreeMap, HashSet};
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{irredundant_form, FormsError};
use crate::graph::{GraphError, SimpleGraph};
use crate::homomorphism::{
    enumerate_projections, for_each_projection, is_projection, Projection, ProjectionError,
};
use crate::support::{common_support, Marker, Support};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Zero,
    One,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error("`{0}`: coloring does not cover every node")]
    ColoringSize(String),
    #[error("`{graph}`: relation node `{relation}` is colored 0 but its neighbor `{concept}` is colored 1")]
    ZeroPartNotClosed {
        graph: String,
        relation: String,
        concept: String,
    },
    #[error("invalid projection of the hypothesis of `{0}`")]
    InvalidProjection(String),
    #[error("useless application of `{0}`: this projection was already used")]
    Useless(String),
    #[error("rule `{0}` is not range restricted; an explicit budget is required")]
    NotRangeRestricted(String),
    #[error("budget of {0} rule applications exhausted before reaching a closed graph")]
    BudgetExhausted(u64),
    #[error("derivation step {step}: {reason}")]
    Replay { step: usize, reason: String },
}

/// A simple graph with a {0,1} coloring whose 0-colored part is itself a
/// simple graph.
#[derive(Debug, Clone)]
pub struct ColoredGraph {
    pub name: String,
    graph: SimpleGraph,
    concept_colors: Vec<Color>,
    relation_colors: Vec<Color>,
    zero: SimpleGraph,
    /// Zero-part concept index -> graph concept index.
    zero_concepts: Vec<usize>,
    zero_relations: Vec<usize>,
    /// Graph concept index -> zero-part concept index.
    to_zero: Vec<Option<usize>>,
}

/// Syntactic classification of a bicolored graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleClassification {
    pub range_restricted: bool,
    pub disconnected: bool,
}

impl ColoredGraph {
    pub fn new(
        name: impl Into<String>,
        graph: SimpleGraph,
        concept_colors: Vec<Color>,
        relation_colors: Vec<Color>,
    ) -> Result<Self, RuleError> {
        let name = name.into();
        if concept_colors.len() != graph.concept_count()
            || relation_colors.len() != graph.relation_count()
        {
            return Err(RuleError::ColoringSize(name));
        }
        for (i, r) in graph.relations().iter().enumerate() {
            if relation_colors[i] == Color::Zero {
                if let Some(&a) = r.args.iter().find(|&&a| concept_colors[a] == Color::One) {
                    return Err(RuleError::ZeroPartNotClosed {
                        graph: name,
                        relation: r.id.to_string(),
                        concept: graph.concept(a).id.to_string(),
                    });
                }
            }
        }
        let kc: Vec<bool> = concept_colors.iter().map(|&c| c == Color::Zero).collect();
        let kr: Vec<bool> = relation_colors.iter().map(|&c| c == Color::Zero).collect();
        let (zero, cmap, rmap) = graph.retain(&kc, &kr);
        let mut zero_concepts = vec![0; zero.concept_count()];
        for (i, m) in cmap.iter().enumerate() {
            if let Some(z) = m {
                zero_concepts[*z] = i;
            }
        }
        let mut zero_relations = vec![0; zero.relation_count()];
        for (i, m) in rmap.iter().enumerate() {
            if let Some(z) = m {
                zero_relations[*z] = i;
            }
        }
        Ok(ColoredGraph {
            name,
            graph,
            concept_colors,
            relation_colors,
            zero,
            zero_concepts,
            zero_relations,
            to_zero: cmap,
        })
    }

    /// Every node colored with `color`.
    pub fn uniform(
        name: impl Into<String>,
        graph: SimpleGraph,
        color: Color,
    ) -> Result<Self, RuleError> {
        let c = vec![color; graph.concept_count()];
        let r = vec![color; graph.relation_count()];
        Self::new(name, graph, c, r)
    }

    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }

    pub fn support(&self) -> &Arc<Support> {
        self.graph.support()
    }

    pub fn concept_colors(&self) -> &[Color] {
        &self.concept_colors
    }

    pub fn relation_colors(&self) -> &[Color] {
        &self.relation_colors
    }

    pub fn concept_color(&self, i: usize) -> Color {
        self.concept_colors[i]
    }

    pub fn relation_color(&self, i: usize) -> Color {
        self.relation_colors[i]
    }

    /// The 0-colored part (hypothesis or trigger).
    pub fn zero_part(&self) -> &SimpleGraph {
        &self.zero
    }

    /// Graph index of each zero-part concept node.
    pub fn zero_concepts(&self) -> &[usize] {
        &self.zero_concepts
    }

    pub fn zero_relations(&self) -> &[usize] {
        &self.zero_relations
    }

    /// Zero-part index of a graph concept node, if it is colored 0.
    pub fn zero_index(&self, concept: usize) -> Option<usize> {
        self.to_zero[concept]
    }

    /// The 1-colored part as a simple graph, with the frontier concept nodes
    /// it touches.
    pub fn one_part(&self) -> SimpleGraph {
        let kc: Vec<bool> = (0..self.graph.concept_count())
            .map(|i| self.concept_colors[i] == Color::One || self.is_frontier(i))
            .collect();
        let kr: Vec<bool> = self
            .relation_colors
            .iter()
            .map(|&c| c == Color::One)
            .collect();
        self.graph.retain(&kc, &kr).0
    }

    pub fn one_count(&self) -> usize {
        self.concept_colors
            .iter()
            .filter(|&&c| c == Color::One)
            .count()
            + self
                .relation_colors
                .iter()
                .filter(|&&c| c == Color::One)
                .count()
    }

    /// 0-colored concept nodes with a 1-colored neighbor.
    pub fn is_frontier(&self, concept: usize) -> bool {
        self.concept_colors[concept] == Color::Zero
            && self
                .graph
                .incidence(concept)
                .iter()
                .any(|&(r, _)| self.relation_colors[r] == Color::One)
    }

    /// Frontier concept nodes in graph index order.
    pub fn frontier(&self) -> Vec<usize> {
        (0..self.graph.concept_count())
            .filter(|&c| self.is_frontier(c))
            .collect()
    }

    pub fn classify(&self) -> RuleClassification {
        let range_restricted = self
            .graph
            .concepts()
            .iter()
            .zip(&self.concept_colors)
            .all(|(c, &col)| col == Color::Zero || !c.label.marker.is_generic());
        let disconnected = (0..self.graph.concept_count()).all(|c| !self.is_frontier(c));
        RuleClassification {
            range_restricted,
            disconnected,
        }
    }

    pub fn is_range_restricted(&self) -> bool {
        self.classify().range_restricted
    }

    /// Same graph with every node colored `color`.
    pub fn recolored(&self, color: Color) -> ColoredGraph {
        Self::uniform(self.name.clone(), self.graph.clone(), color).unwrap()
    }

    /// Same bicolored graph over an extension of its support.
    pub fn with_support(&self, support: &Arc<Support>) -> Result<ColoredGraph, RuleError> {
        Self::new(
            self.name.clone(),
            self.graph.with_support(support)?,
            self.concept_colors.clone(),
            self.relation_colors.clone(),
        )
    }
}

pub fn classify_rule(rule: &ColoredGraph) -> RuleClassification {
    rule.classify()
}

/// Result of applying a rule once.
#[derive(Debug, Clone)]
pub struct Application {
    pub graph: SimpleGraph,
    /// Image of every rule concept node in the result.
    pub concept_map: Vec<usize>,
    /// Image of every rule relation node in the result.
    pub relation_map: Vec<usize>,
    pub added_concepts: usize,
    pub added_relations: usize,
}

impl Application {
    pub fn changed(&self) -> bool {
        self.added_concepts + self.added_relations > 0
    }
}

/// All projections of the rule's hypothesis into `g`.
pub fn applicable_projections(
    rule: &ColoredGraph,
    g: &SimpleGraph,
) -> Result<Vec<Projection>, RuleError> {
    Ok(enumerate_projections(rule.zero_part(), g, None)?.projections)
}

/// Grafts a copy of the conclusion onto `g` along `pi`. Individual conclusion
/// nodes are merged with existing nodes of the same marker and a relation
/// node identical to an existing one is not created.
pub fn apply_rule(
    rule: &ColoredGraph,
    g: &SimpleGraph,
    pi: &Projection,
) -> Result<Application, RuleError> {
    if !is_projection(rule.zero_part(), g, pi) {
        return Err(RuleError::InvalidProjection(rule.name.clone()));
    }
    let support = common_support(rule.support(), g.support())
        .ok_or(GraphError::SupportMismatch)?
        .clone();
    let mut out = g.with_support(&support)?;
    let rg = rule.graph();
    let mut concept_map = vec![usize::MAX; rg.concept_count()];
    let mut added_concepts = 0;
    for (i, c) in rg.concepts().iter().enumerate() {
        match rule.zero_index(i) {
            Some(z) => concept_map[i] = pi.concepts[z],
            None => {
                let existing = match c.label.marker {
                    Marker::Individual(m) => out.individual_node(m),
                    Marker::Generic => None,
                };
                concept_map[i] = match existing {
                    Some(e) => e,
                    None => {
                        added_concepts += 1;
                        let id = out.fresh_id(&c.id);
                        out.add_concept(id, c.label)?
                    }
                };
            }
        }
    }
    let mut relation_map = vec![usize::MAX; rg.relation_count()];
    for (z, &r) in rule.zero_relations().iter().enumerate() {
        relation_map[r] = pi.relations[z];
    }
    let mut added_relations = 0;
    for (i, r) in rg.relations().iter().enumerate() {
        if rule.relation_color(i) == Color::Zero {
            continue;
        }
        let args: Vec<usize> = r.args.iter().map(|&a| concept_map[a]).collect();
        let twin = out
            .incidence(args[0])
            .iter()
            .find(|&&(t, p)| p == 0 && out.relation(t).ty == r.ty && out.relation(t).args == args)
            .map(|&(t, _)| t);
        relation_map[i] = match twin {
            Some(t) => t,
            None => {
                added_relations += 1;
                let id = out.fresh_id(&r.id);
                out.add_relation(id, r.ty, args)?
            }
        };
    }
    Ok(Application {
        graph: out,
        concept_map,
        relation_map,
        added_concepts,
        added_relations,
    })
}

/// One recorded rule application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: String,
    /// Hypothesis node id -> node id in the graph the rule was applied to.
    pub map: BTreeMap<String, String>,
    /// Fingerprint of the graph after the step.
    pub fingerprint: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub start_fingerprint: String,
    pub steps: Vec<TraceStep>,
}

impl DerivationTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Rules take turns; on its turn a rule is applied along every unused
    /// projection found in the current graph.
    #[default]
    BreadthRoundRobin,
    /// Always apply the first unused projection of the first rule that has
    /// one.
    DepthFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeriveStatus {
    /// No rule has an unused application: the graph is closed.
    Closed,
    /// The step budget ran out while unused applications remained.
    BudgetExhausted,
    /// The step callback asked to stop.
    Stopped,
}

#[derive(Debug, Clone)]
pub struct Derived {
    pub graph: SimpleGraph,
    pub trace: DerivationTrace,
    pub status: DeriveStatus,
}

/// Incremental derivation state.
pub struct Deriver<'a> {
    rules: &'a [ColoredGraph],
    graph: SimpleGraph,
    trace: DerivationTrace,
    seen: HashSet<(usize, Projection)>,
}

impl<'a> Deriver<'a> {
    /// Starts from the normal form of `g`.
    pub fn new(g: &SimpleGraph, rules: &'a [ColoredGraph]) -> Result<Self, RuleError> {
        let mut support = g.support().clone();
        for r in rules {
            support = common_support(&support, r.support())
                .ok_or(GraphError::SupportMismatch)?
                .clone();
        }
        let graph = g.normal_form().with_support(&support)?;
        let trace = DerivationTrace {
            start_fingerprint: graph.fingerprint(),
            steps: Vec::new(),
        };
        Ok(Deriver {
            rules,
            graph,
            trace,
            seen: HashSet::new(),
        })
    }

    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }

    pub fn trace(&self) -> &DerivationTrace {
        &self.trace
    }

    pub fn steps(&self) -> u64 {
        self.trace.steps.len() as u64
    }

    pub fn into_parts(self) -> (SimpleGraph, DerivationTrace) {
        (self.graph, self.trace)
    }

    /// Unused projections of rule `r` into the current graph, up to `limit`.
    fn unseen(&self, r: usize, limit: Option<usize>) -> Result<Vec<Projection>, RuleError> {
        let mut out = Vec::new();
        for_each_projection(self.rules[r].zero_part(), &self.graph, None, |p| {
            if !self.seen.contains(&(r, p.clone())) {
                out.push(p.clone());
                if limit.is_some_and(|l| out.len() >= l) {
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        })?;
        Ok(out)
    }

    /// True if some rule has an unused application.
    pub fn has_unseen(&self) -> Result<bool, RuleError> {
        for r in 0..self.rules.len() {
            if !self.unseen(r, Some(1))?.is_empty() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Applies rule `r` along `pi`; returns whether the graph changed.
    pub fn apply(&mut self, r: usize, pi: Projection) -> Result<bool, RuleError> {
        let rule = &self.rules[r];
        if self.seen.contains(&(r, pi.clone())) {
            return Err(RuleError::Useless(rule.name.clone()));
        }
        let app = apply_rule(rule, &self.graph, &pi)?;
        let map = pi.id_map(rule.zero_part(), &self.graph);
        self.seen.insert((r, pi));
        if !app.changed() {
            return Ok(false);
        }
        self.graph = app.graph;
        self.trace.steps.push(TraceStep {
            rule: rule.name.clone(),
            map,
            fingerprint: self.graph.fingerprint(),
        });
        Ok(true)
    }

    /// Runs until closed, out of budget, or stopped by `on_step`, which is
    /// called after every step that changed the graph.
    pub fn run(
        &mut self,
        strategy: Strategy,
        budget: Option<u64>,
        on_step: &mut dyn FnMut(&SimpleGraph) -> ControlFlow<()>,
    ) -> Result<DeriveStatus, RuleError> {
        loop {
            let mut progressed = false;
            for r in 0..self.rules.len() {
                let limit = match strategy {
                    Strategy::BreadthRoundRobin => None,
                    Strategy::DepthFirst => Some(1),
                };
                let pending = self.unseen(r, limit)?;
                for pi in pending {
                    if budget.is_some_and(|b| self.steps() >= b) {
                        let app = apply_rule(&self.rules[r], &self.graph, &pi)?;
                        if app.changed() {
                            return Ok(DeriveStatus::BudgetExhausted);
                        }
                        self.seen.insert((r, pi));
                        progressed = true;
                        continue;
                    }
                    progressed = true;
                    if self.apply(r, pi)? && on_step(&self.graph).is_break() {
                        return Ok(DeriveStatus::Stopped);
                    }
                }
                if progressed && strategy == Strategy::DepthFirst {
                    break;
                }
            }
            if !progressed {
                return Ok(DeriveStatus::Closed);
            }
        }
    }
}

/// Derivation from `g` with the given strategy and step budget.
pub fn derive(
    g: &SimpleGraph,
    rules: &[ColoredGraph],
    strategy: Strategy,
    budget: Option<u64>,
) -> Result<Derived, RuleError> {
    let mut d = Deriver::new(g, rules)?;
    let status = d.run(strategy, budget, &mut |_| ControlFlow::Continue(()))?;
    let (graph, trace) = d.into_parts();
    Ok(Derived {
        graph,
        trace,
        status,
    })
}

/// First rule that is not range restricted.
pub fn first_non_range_restricted(rules: &[ColoredGraph]) -> Option<&ColoredGraph> {
    rules.iter().find(|r| !r.is_range_restricted())
}

/// Closed graph derived from `g`. Without a budget every rule must be range
/// restricted.
pub fn closure_with(
    g: &SimpleGraph,
    rules: &[ColoredGraph],
    budget: Option<u64>,
) -> Result<Derived, RuleError> {
    if budget.is_none() {
        if let Some(r) = first_non_range_restricted(rules) {
            return Err(RuleError::NotRangeRestricted(r.name.clone()));
        }
    }
    let d = derive(g, rules, Strategy::BreadthRoundRobin, budget)?;
    match d.status {
        DeriveStatus::Closed => Ok(d),
        _ => Err(RuleError::BudgetExhausted(budget.unwrap_or(0))),
    }
}

pub fn closure(g: &SimpleGraph, rules: &[ColoredGraph]) -> Result<SimpleGraph, RuleError> {
    Ok(closure_with(g, rules, None)?.graph)
}

/// Irredundant form of the closure.
pub fn full_graph(g: &SimpleGraph, rules: &[ColoredGraph]) -> Result<SimpleGraph, RuleError> {
    Ok(irredundant_form(&closure(g, rules)?)?.core)
}

pub fn full_graph_with(
    g: &SimpleGraph,
    rules: &[ColoredGraph],
    budget: Option<u64>,
) -> Result<(SimpleGraph, Derived), RuleError> {
    let d = closure_with(g, rules, budget)?;
    Ok((irredundant_form(&d.graph)?.core, d))
}

/// Replays a trace from `g`, checking every fingerprint.
pub fn replay_trace(
    g: &SimpleGraph,
    rules: &[ColoredGraph],
    trace: &DerivationTrace,
) -> Result<SimpleGraph, RuleError> {
    let mut d = Deriver::new(g, rules)?;
    if d.graph.fingerprint() != trace.start_fingerprint {
        return Err(RuleError::Replay {
            step: 0,
            reason: "start graph differs".into(),
        });
    }
    for (k, step) in trace.steps.iter().enumerate() {
        let fail = |reason: &str| RuleError::Replay {
            step: k + 1,
            reason: reason.to_string(),
        };
        let r = rules
            .iter()
            .position(|r| r.name == step.rule)
            .ok_or_else(|| fail("unknown rule"))?;
        let pi = Projection::from_id_map(&step.map, rules[r].zero_part(), &d.graph)
            .ok_or_else(|| fail("node map does not resolve"))?;
        if !d.apply(r, pi)? {
            return Err(fail("application adds nothing"));
        }
        if d.graph.fingerprint() != step.fingerprint {
            return Err(fail("fingerprint mismatch"));
        }
    }
    Ok(d.graph)
}

/// Size bounds on the closure under range-restricted rules.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureBounds {
    /// Individual nodes creatable.
    pub m: u128,
    /// Relation nodes creatable.
    pub n: u128,
    /// Derivation length bound, `n + m`.
    pub l: u128,
    /// Number of relation types of each arity `1..=k` in rule conclusions.
    pub per_arity: Vec<u128>,
    pub max_arity: usize,
}

impl ClosureBounds {
    pub fn compute(g: &SimpleGraph, rules: &[ColoredGraph]) -> ClosureBounds {
        let max_conclusion = rules.iter().map(|r| r.one_count()).max().unwrap_or(0) as u128;
        let m = (rules.len() as u128).saturating_mul(max_conclusion);
        let mut types: BTreeMap<usize, HashSet<String>> = BTreeMap::new();
        for r in rules {
            for (i, rel) in r.graph().relations().iter().enumerate() {
                if r.relation_color(i) == Color::One {
                    types
                        .entry(rel.args.len())
                        .or_default()
                        .insert(r.support().relation_name(rel.ty).to_string());
                }
            }
        }
        let max_arity = types.keys().copied().max().unwrap_or(0);
        let per_arity: Vec<u128> = (1..=max_arity)
            .map(|a| types.get(&a).map_or(0, |s| s.len() as u128))
            .collect();
        let base = (g.normal_form().concept_count() as u128).saturating_add(m);
        let n = per_arity.iter().enumerate().fold(0u128, |acc, (k, &p)| {
            acc.saturating_add(p.saturating_mul(base.saturating_pow(k as u32 + 1)))
        });
        ClosureBounds {
            m,
            n,
            l: n.saturating_add(m),
            per_arity,
            max_arity,
        }
    }
}

/// Splits a range-restricted rule into rules with a single conclusion node.
pub fn decompose_rr(rule: &ColoredGraph) -> Result<Vec<ColoredGraph>, RuleError> {
    if !rule.is_range_restricted() {
        return Err(RuleError::NotRangeRestricted(rule.name.clone()));
    }
    let g = rule.graph();
    let nc = g.concept_count();
    let nr = g.relation_count();
    let mut out = Vec::new();
    let mut k = 0;
    for c in 0..nc {
        if rule.concept_color(c) == Color::One {
            k += 1;
            let mut kc: Vec<bool> = (0..nc)
                .map(|i| rule.concept_color(i) == Color::Zero)
                .collect();
            kc[c] = true;
            let kr: Vec<bool> = (0..nr)
                .map(|i| rule.relation_color(i) == Color::Zero)
                .collect();
            out.push(sub_rule(rule, k, &kc, &kr, |i| i == c, |_| false)?);
        }
    }
    for r in 0..nr {
        if rule.relation_color(r) == Color::One {
            k += 1;
            let kc = vec![true; nc];
            let kr: Vec<bool> = (0..nr)
                .map(|i| i == r || rule.relation_color(i) == Color::Zero)
                .collect();
            out.push(sub_rule(rule, k, &kc, &kr, |_| false, |i| i == r)?);
        }
    }
    Ok(out)
}

fn sub_rule(
    rule: &ColoredGraph,
    k: usize,
    kc: &[bool],
    kr: &[bool],
    one_concept: impl Fn(usize) -> bool,
    one_relation: impl Fn(usize) -> bool,
) -> Result<ColoredGraph, RuleError> {
    let (graph, cmap, rmap) = rule.graph().retain(kc, kr);
    let mut cc = vec![Color::Zero; graph.concept_count()];
    for (old, new) in cmap.iter().enumerate() {
        if let Some(n) = new {
            if one_concept(old) {
                cc[*n] = Color::One;
            }
        }
    }
    let mut rc = vec![Color::Zero; graph.relation_count()];
    for (old, new) in rmap.iter().enumerate() {
        if let Some(n) = new {
            if one_relation(old) {
                rc[*n] = Color::One;
            }
        }
    }
    ColoredGraph::new(format!("{}.{k}", rule.name), graph, cc, rc)
}

/// True if the rule has an empty hypothesis; such a rule applies once, like
/// a fact.
pub fn is_fact_rule(rule: &ColoredGraph) -> bool {
    rule.zero_part().is_empty()
}
