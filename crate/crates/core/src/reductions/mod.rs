//! Instance generators encoding classical decision problems as graph,
//! rule and constraint problems.

mod problems;

pub use problems::{CnfFormula, CspConstraint, CspVariable, Literal, MixedCsp, SemiThueSystem};

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::constraints::{Constraint, Polarity};
use crate::forms::{irredundant_form, FormsError};
use crate::graph::{GraphError, NodeId, RawGraph, SimpleGraph};
use crate::kb::KnowledgeBase;
use crate::rules::{Color, ColoredGraph, RuleError};
use crate::support::{Support, SupportDecl, SupportError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("constraint `{0}` has no frontier node")]
    EmptyFrontier(String),
    #[error("constraint `{0}` is not positive")]
    NotPositive(String),
    #[error(transparent)]
    Support(#[from] SupportError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

/// Raw graph whose nodes are tagged with a color.
#[derive(Default)]
struct Painter {
    raw: RawGraph,
    ones: BTreeSet<String>,
}

impl Painter {
    fn concept(&mut self, id: &str, ty: &str, marker: Option<&str>, color: Color) {
        self.raw = std::mem::take(&mut self.raw).concept(id, ty, marker);
        if color == Color::One {
            self.ones.insert(id.to_string());
        }
    }

    fn relation(&mut self, id: &str, ty: &str, args: &[&str], color: Color) {
        self.raw = std::mem::take(&mut self.raw).relation(id, ty, args);
        if color == Color::One {
            self.ones.insert(id.to_string());
        }
    }

    fn graph(&self, s: &Arc<Support>) -> Result<SimpleGraph, GraphError> {
        self.raw.validate(s)
    }

    fn colored(&self, name: &str, s: &Arc<Support>) -> Result<ColoredGraph, ReductionError> {
        let g = self.graph(s)?;
        let color = |id: &NodeId| {
            if self.ones.contains(id.as_str()) {
                Color::One
            } else {
                Color::Zero
            }
        };
        let cc = g.concepts().iter().map(|c| color(&c.id)).collect();
        let rc = g.relations().iter().map(|r| color(&r.id)).collect();
        Ok(ColoredGraph::new(name, g, cc, rc)?)
    }
}

fn sat_support(f: &CnfFormula) -> Result<Arc<Support>, ReductionError> {
    let mut decl = SupportDecl::new();
    for x in &f.variables {
        let v = format!("{x}v");
        decl = decl
            .concept(x, &[])
            .concept(&v, &[])
            .concept(&format!("{x}t"), &[&v])
            .concept(&format!("{x}f"), &[&v]);
    }
    decl = decl.relation("val", 2, &[]);
    for (i, c) in f.clauses.iter().enumerate() {
        decl = decl.relation(&format!("C{}", i + 1), c.len(), &[]);
    }
    Ok(Arc::new(decl.validate()?))
}

/// The target graph: every variable linked to both of its truth values, and
/// one relation node per satisfying valuation of each clause. Variables in
/// `unlinked` keep their value nodes but lose the links.
fn sat_target(f: &CnfFormula, unlinked: &BTreeSet<usize>) -> Painter {
    let mut p = Painter::default();
    for (i, x) in f.variables.iter().enumerate() {
        p.concept(x, x, None, Color::Zero);
        for v in ["t", "f"] {
            let node = format!("{x}{v}");
            p.concept(&node, &node, None, Color::Zero);
            if !unlinked.contains(&i) {
                p.relation(&format!("{x}.val.{v}"), "val", &[x, &node], Color::Zero);
            }
        }
    }
    for (i, c) in f.clauses.iter().enumerate() {
        let ty = format!("C{}", i + 1);
        for bits in 0..1usize << c.len() {
            let values: Vec<bool> = (0..c.len()).map(|j| bits >> j & 1 == 1).collect();
            if !c.iter().zip(&values).any(|(l, &v)| v == l.positive) {
                continue;
            }
            let args: Vec<String> = c
                .iter()
                .zip(&values)
                .map(|(l, &v)| format!("{}{}", f.variables[l.var], if v { "t" } else { "f" }))
                .collect();
            let tag: String = values.iter().map(|&v| if v { 't' } else { 'f' }).collect();
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            p.relation(&format!("c{}.{tag}", i + 1), &ty, &args, Color::Zero);
        }
    }
    p
}

/// The query graph: each variable linked to a value node of its value type,
/// and one relation node per clause. `one` selects the variables whose
/// gadget is colored 1; clause nodes get `clause_color`.
fn sat_query(f: &CnfFormula, one: &BTreeSet<usize>, clause_color: Color) -> Painter {
    let mut p = Painter::default();
    for (i, x) in f.variables.iter().enumerate() {
        let color = if one.contains(&i) {
            Color::One
        } else {
            Color::Zero
        };
        let v = format!("{x}v");
        p.concept(x, x, None, color);
        p.concept(&v, &v, None, color);
        p.relation(&format!("{x}.val"), "val", &[x, &v], color);
    }
    for (i, c) in f.clauses.iter().enumerate() {
        let args: Vec<String> = c
            .iter()
            .map(|l| format!("{}v", f.variables[l.var]))
            .collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        p.relation(
            &format!("c{}", i + 1),
            &format!("C{}", i + 1),
            &args,
            clause_color,
        );
    }
    p
}

/// Satisfiability as projection: returns `(query, target)`; the query
/// projects into the target iff the formula is satisfiable.
pub fn gen_sat3_projection(f: &CnfFormula) -> Result<(SimpleGraph, SimpleGraph), ReductionError> {
    f.validate()?;
    let s = sat_support(f)?;
    let q = sat_query(f, &BTreeSet::new(), Color::Zero).graph(&s)?;
    let g = sat_target(f, &BTreeSet::new()).graph(&s)?;
    Ok((q, g))
}

fn blocks<const N: usize>(f: &CnfFormula) -> Result<[BTreeSet<usize>; N], ReductionError> {
    if f.partition.len() != N {
        return Err(ReductionError::Invalid(format!(
            "expected a partition into {N} blocks"
        )));
    }
    Ok(std::array::from_fn(|i| {
        f.partition[i].iter().copied().collect()
    }))
}

/// For-all/exists satisfiability as consistency: returns the target graph and
/// a positive constraint it satisfies iff every valuation of the first block
/// extends to a satisfying valuation through the second block.
pub fn gen_sat3_2c_sgc(f: &CnfFormula) -> Result<(SimpleGraph, Constraint), ReductionError> {
    f.validate()?;
    let [_, x2] = blocks::<2>(f)?;
    let s = sat_support(f)?;
    let g = sat_target(f, &BTreeSet::new()).graph(&s)?;
    let c = sat_query(f, &x2, Color::One).colored("C", &s)?;
    Ok((g, Constraint::new(c, Polarity::Positive)))
}

/// Exists/for-all/exists satisfiability as deduction with evolution rules.
/// The first block starts unvalued; one evolution rule picks its values.
pub fn gen_sat3_3_sec(f: &CnfFormula) -> Result<(KnowledgeBase, SimpleGraph), ReductionError> {
    f.validate()?;
    let [x1, _, x3] = blocks::<3>(f)?;
    let s = sat_support(f)?;
    let g = sat_target(f, &x1).graph(&s)?;
    let mut kb = KnowledgeBase::with_facts(&g);

    let mut e = Painter::default();
    let mut goal = Painter::default();
    for &i in &x1 {
        let x = &f.variables[i];
        let v = format!("{x}v");
        e.concept(x, x, None, Color::Zero);
        e.concept(&v, &v, None, Color::Zero);
        e.relation(&format!("{x}.val"), "val", &[x, &v], Color::One);
        goal.concept(x, x, None, Color::Zero);
        goal.concept(&v, &v, None, Color::Zero);
        goal.relation(&format!("{x}.val"), "val", &[x, &v], Color::Zero);
    }
    if !x1.is_empty() {
        kb = kb.evolution(e.colored("E", &s)?);
    }
    let c = sat_query(f, &x3, Color::One).colored("C", &s)?;
    kb = kb.constraint(Constraint::new(c, Polarity::Positive));
    Ok((kb, goal.graph(&s)?))
}

fn word_graph(s: &SemiThueSystem, w: &[usize]) -> Painter {
    let mut p = Painter::default();
    p.concept("begin", "B", None, Color::Zero);
    let mut prev = "begin".to_string();
    for (i, &l) in w.iter().enumerate() {
        let id = format!("n{}", i + 1);
        p.concept(&id, &s.alphabet[l], None, Color::Zero);
        p.relation(&format!("s{i}"), "s", &[&prev, &id], Color::Zero);
        prev = id;
    }
    p.concept("end", "E", None, Color::Zero);
    p.relation(&format!("s{}", w.len()), "s", &[&prev, "end"], Color::Zero);
    p
}

/// Word problem as deduction: letters become concept types, words become
/// successor paths between a begin and an end node, and each rewrite rule
/// grafts a new path parallel to a matched one.
pub fn gen_word_problem_sr(
    s: &SemiThueSystem,
) -> Result<(KnowledgeBase, SimpleGraph), ReductionError> {
    s.validate()?;
    if let Some(l) = s
        .alphabet
        .iter()
        .find(|l| ["T", "B", "E"].contains(&l.as_str()))
    {
        return Err(ReductionError::Invalid(format!("letter `{l}` is reserved")));
    }
    let mut decl = SupportDecl::new()
        .concept("T", &[])
        .concept("B", &["T"])
        .concept("E", &["T"]);
    for l in &s.alphabet {
        decl = decl.concept(l, &["T"]);
    }
    let support = Arc::new(decl.relation("s", 2, &[]).validate()?);
    let g = word_graph(s, &s.source).graph(&support)?;
    let mut kb = KnowledgeBase::with_facts(&g);
    for (k, (alpha, beta)) in s.rules.iter().enumerate() {
        let mut p = Painter::default();
        p.concept("from", "T", None, Color::Zero);
        p.concept("to", "T", None, Color::Zero);
        let mut prev = "from".to_string();
        for (i, &l) in alpha.iter().enumerate() {
            let id = format!("y{}", i + 1);
            p.concept(&id, &s.alphabet[l], None, Color::Zero);
            p.relation(&format!("h{i}"), "s", &[&prev, &id], Color::Zero);
            prev = id;
        }
        p.relation(
            &format!("h{}", alpha.len()),
            "s",
            &[&prev, "to"],
            Color::Zero,
        );
        let mut prev = "from".to_string();
        for (i, &l) in beta.iter().enumerate() {
            let id = format!("z{}", i + 1);
            p.concept(&id, &s.alphabet[l], None, Color::One);
            p.relation(&format!("c{i}"), "s", &[&prev, &id], Color::One);
            prev = id;
        }
        p.relation(&format!("c{}", beta.len()), "s", &[&prev, "to"], Color::One);
        kb = kb.rule(p.colored(&format!("U{}", k + 1), &support)?);
    }
    let goal = word_graph(s, &s.target).graph(&support)?;
    Ok((kb, goal))
}

fn unique_id(taken: &SimpleGraph, base: &str) -> NodeId {
    let mut id = NodeId::new(base);
    while taken.contains_id(&id) {
        id.0.push('\'');
    }
    id
}

/// Consistency of `(g, c)` as non-deduction: an evolution rule marks each
/// trigger image of the frontier with a fresh `found` relation, a negative
/// constraint forbids marks whose frontier extends to the obligation, and
/// the goal asks for a mark. The goal is deducible iff `g` violates `c`.
pub fn gen_sgc_to_sec(
    g: &SimpleGraph,
    c: &Constraint,
) -> Result<(KnowledgeBase, SimpleGraph), ReductionError> {
    if c.polarity != Polarity::Positive {
        return Err(ReductionError::NotPositive(c.name().to_string()));
    }
    let frontier = c.colored.frontier();
    if frontier.is_empty() {
        return Err(ReductionError::EmptyFrontier(c.name().to_string()));
    }
    let base = crate::support::common_support(g.support(), c.colored.support())
        .ok_or(GraphError::SupportMismatch)?;
    let found = base.fresh_relation_name("found");
    let support =
        Arc::new(base.extend(&SupportDecl::new().relation(&found, frontier.len(), &[]))?);
    let ft = support.relation_type(&found, frontier.len()).unwrap();
    let colored = c.colored.with_support(&support)?;
    let cg = colored.graph();

    // Evolution rule: trigger, plus the mark on the frontier.
    let zero = colored.zero_part().clone();
    let mut rule = zero.clone();
    let zargs: Vec<usize> = frontier
        .iter()
        .map(|&f| colored.zero_index(f).unwrap())
        .collect();
    rule.add_relation(unique_id(&rule, "found"), ft, zargs)?;
    let mut rc = vec![Color::Zero; rule.relation_count()];
    *rc.last_mut().unwrap() = Color::One;
    let e = ColoredGraph::new(
        format!("E.{}", c.name()),
        rule,
        vec![Color::Zero; zero.concept_count()],
        rc,
    )?;

    // Negative constraint: obligation, frontier and the mark.
    let keep_c: Vec<bool> = (0..cg.concept_count())
        .map(|i| colored.concept_color(i) == Color::One || colored.is_frontier(i))
        .collect();
    let keep_r: Vec<bool> = (0..cg.relation_count())
        .map(|i| colored.relation_color(i) == Color::One)
        .collect();
    let (mut neg, cmap, _) = cg.retain(&keep_c, &keep_r);
    let nargs: Vec<usize> = frontier.iter().map(|&f| cmap[f].unwrap()).collect();
    neg.add_relation(unique_id(&neg, "found"), ft, nargs)?;
    let cc = (0..neg.concept_count())
        .map(|i| {
            if is_frontier_image(&frontier, &cmap, i) {
                Color::Zero
            } else {
                Color::One
            }
        })
        .collect();
    let mut rc = vec![Color::One; neg.relation_count()];
    *rc.last_mut().unwrap() = Color::Zero;
    let negative = ColoredGraph::new(format!("N.{}", c.name()), neg, cc, rc)?;

    // Goal: the mark on the frontier.
    let keep_c: Vec<bool> = (0..cg.concept_count())
        .map(|i| colored.is_frontier(i))
        .collect();
    let (mut goal, gmap, _) = cg.retain(&keep_c, &vec![false; cg.relation_count()]);
    let gargs: Vec<usize> = frontier.iter().map(|&f| gmap[f].unwrap()).collect();
    goal.add_relation(unique_id(&goal, "found"), ft, gargs)?;

    let facts = irredundant_form(&g.with_support(&support)?)?.core;
    let kb = KnowledgeBase::with_facts(&facts)
        .evolution(e)
        .constraint(Constraint::new(negative, Polarity::Negative));
    Ok((kb, goal))
}

fn is_frontier_image(frontier: &[usize], cmap: &[Option<usize>], i: usize) -> bool {
    frontier.iter().any(|&f| cmap[f] == Some(i))
}

fn domain_types(p: &MixedCsp) -> Vec<(Vec<String>, String)> {
    let mut out: Vec<(Vec<String>, String)> = Vec::new();
    for v in &p.variables {
        if !out.iter().any(|(d, _)| *d == v.domain) {
            let name = format!("D{}", out.len() + 1);
            out.push((v.domain.clone(), name));
        }
    }
    out
}

fn csp_support(p: &MixedCsp) -> Result<Arc<Support>, ReductionError> {
    let mut decl = SupportDecl::new();
    for (domain, ty) in domain_types(p) {
        decl = decl.concept(&ty, &[]);
        for v in domain {
            decl = decl.individual(&format!("{ty}_{v}"), &ty);
        }
    }
    for c in &p.constraints {
        decl = decl.relation(&c.name, c.scope.len(), &[]);
    }
    Ok(Arc::new(decl.validate()?))
}

fn domain_type(p: &MixedCsp, v: usize) -> String {
    domain_types(p)
        .into_iter()
        .find(|(d, _)| *d == p.variables[v].domain)
        .map(|(_, t)| t)
        .unwrap()
}

/// Constraint definitions: one individual node per domain value and one
/// relation node per allowed tuple.
fn csp_target(p: &MixedCsp, s: &Arc<Support>) -> Result<SimpleGraph, ReductionError> {
    let mut raw = RawGraph::new();
    for (domain, ty) in domain_types(p) {
        for v in domain {
            let m = format!("{ty}_{v}");
            raw = raw.concept(&m, &ty, Some(&m));
        }
    }
    for c in &p.constraints {
        for (k, t) in c.allowed.iter().enumerate() {
            let args: Vec<String> = t
                .iter()
                .zip(&c.scope)
                .map(|(&x, &v)| format!("{}_{}", domain_type(p, v), p.variables[v].domain[x]))
                .collect();
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            raw = raw.relation(&format!("{}.{}", c.name, k + 1), &c.name, &args);
        }
    }
    Ok(raw.validate(s)?)
}

/// Network structure: one generic node per variable and one relation node
/// per constraint; uncontrollable variables and constraints among them are
/// colored 0.
fn csp_structure(p: &MixedCsp) -> Painter {
    let mut q = Painter::default();
    let color = |controllable: bool| {
        if controllable {
            Color::One
        } else {
            Color::Zero
        }
    };
    for (i, v) in p.variables.iter().enumerate() {
        q.concept(&v.name, &domain_type(p, i), None, color(v.controllable));
    }
    for c in &p.constraints {
        let args: Vec<&str> = c
            .scope
            .iter()
            .map(|&v| p.variables[v].name.as_str())
            .collect();
        let mixed = c.scope.iter().any(|&v| p.variables[v].controllable);
        q.relation(&format!("q.{}", c.name), &c.name, &args, color(mixed));
    }
    q
}

/// Satisfiability of a network without uncontrollable variables as
/// projection of its structure into its constraint definitions.
pub fn csp_to_projection(p: &MixedCsp) -> Result<(SimpleGraph, SimpleGraph), ReductionError> {
    p.validate()?;
    if !p.uncontrollable().is_empty() {
        return Err(ReductionError::Invalid(
            "network has uncontrollable variables".into(),
        ));
    }
    let s = csp_support(p)?;
    Ok((csp_structure(p).graph(&s)?, csp_target(p, &s)?))
}

/// Mixed network consistency as satisfaction of one positive constraint by
/// the constraint definitions graph.
pub fn mixed_to_sgc(p: &MixedCsp) -> Result<(SimpleGraph, Constraint), ReductionError> {
    p.validate()?;
    let s = csp_support(p)?;
    let c = csp_structure(p).colored("C", &s)?;
    Ok((csp_target(p, &s)?, Constraint::new(c, Polarity::Positive)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::is_redundant;
    use crate::homomorphism::exists_projection;

    fn fig4() -> CnfFormula {
        CnfFormula::new(
            &["a", "b", "c", "d"],
            vec![
                vec![Literal::pos(0), Literal::pos(1), Literal::neg(2)],
                vec![Literal::neg(0), Literal::pos(2), Literal::neg(3)],
            ],
        )
    }

    #[test]
    fn clause_nodes_count_satisfying_valuations() {
        let (q, g) = gen_sat3_projection(&fig4()).unwrap();
        assert_eq!(q.concept_count(), 8);
        assert_eq!(q.relation_count(), 4 + 2);
        assert_eq!(g.concept_count(), 12);
        assert_eq!(g.relation_count(), 8 + 7 + 7);
        assert!(exists_projection(&q, &g).unwrap());
    }

    #[test]
    fn unit_clause_gives_one_unary_node() {
        let f = CnfFormula::new(&["x"], vec![vec![Literal::pos(0)]]);
        let (_, g) = gen_sat3_projection(&f).unwrap();
        let c1 = g.support().relation_type("C1", 1).unwrap();
        assert_eq!(g.relations().iter().filter(|r| r.ty == c1).count(), 1);
    }

    #[test]
    fn sat_target_is_irredundant() {
        let f = fig4().with_partition(vec![vec![0, 1], vec![2, 3]]);
        let (g, c) = gen_sat3_2c_sgc(&f).unwrap();
        assert!(!is_redundant(&g).unwrap());
        assert_eq!(c.trigger().concept_count(), 4);
    }

    #[test]
    fn frontierless_constraint_is_rejected() {
        let f = CnfFormula::new(&["x"], vec![vec![Literal::pos(0)]])
            .with_partition(vec![vec![], vec![0]]);
        let (g, c) = gen_sat3_2c_sgc(&f).unwrap();
        assert!(c.trigger().is_empty());
        assert!(matches!(
            gen_sgc_to_sec(&g, &c),
            Err(ReductionError::EmptyFrontier(_))
        ));
    }
}
