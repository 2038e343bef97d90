//! Translation of supports, graphs and rules into first-order formulas, and
//! the embeddings between graphs and conjunctive existential formulas.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::graph::{GraphError, NodeId, SimpleGraph};
use crate::rules::{Color, ColoredGraph};
use crate::support::{
    flat_support_with_top, ConceptLabel, Marker, Support, SupportError, Vocabulary, FLAT_TOP,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Formulas of the two shapes produced by the translation: existentially
/// closed conjunctions, and universally closed implications between
/// conjunctions with existential variables in the conclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FolFormula {
    Exists {
        vars: Vec<String>,
        atoms: Vec<Atom>,
    },
    Forall {
        vars: Vec<String>,
        premise: Vec<Atom>,
        exists: Vec<String>,
        conclusion: Vec<Atom>,
    },
}

fn conjunction(atoms: &[Atom]) -> String {
    if atoms.is_empty() {
        return "⊤".to_string();
    }
    let mut texts: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
    texts.sort();
    texts.join(" ∧ ")
}

fn prefix(q: &str, vars: &[String]) -> String {
    vars.iter().map(|v| format!("{q}{v}")).collect()
}

impl FolFormula {
    /// Deterministic text with atoms sorted.
    pub fn canonical(&self) -> String {
        match self {
            FolFormula::Exists { vars, atoms } => {
                if atoms.is_empty() && vars.is_empty() {
                    "⊤".to_string()
                } else {
                    format!("{}({})", prefix("∃", vars), conjunction(atoms))
                }
            }
            FolFormula::Forall {
                vars,
                premise,
                exists,
                conclusion,
            } => {
                let head = if exists.is_empty() {
                    conjunction(conclusion)
                } else {
                    format!("{}({})", prefix("∃", exists), conjunction(conclusion))
                };
                format!("{}({} → {})", prefix("∀", vars), conjunction(premise), head)
            }
        }
    }

    /// Atoms of an existential formula with duplicates removed.
    pub fn atom_set(&self) -> BTreeSet<String> {
        match self {
            FolFormula::Exists { atoms, .. } => atoms.iter().map(|a| a.to_string()).collect(),
            FolFormula::Forall {
                premise,
                conclusion,
                ..
            } => premise
                .iter()
                .chain(conclusion)
                .map(|a| a.to_string())
                .collect(),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        match self {
            FolFormula::Exists { atoms, .. } => atoms,
            FolFormula::Forall { premise, .. } => premise,
        }
    }
}

impl fmt::Display for FolFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// One implication per comparable pair of distinct types.
pub fn phi_support(s: &Support) -> Vec<FolFormula> {
    let mut out = Vec::new();
    let ch = s.concept_types();
    let names: Vec<&str> = s.concept_names().collect();
    for a in 0..ch.len() {
        for b in ch.supertypes(a) {
            if a != b {
                out.push(implication(names[a], names[b], 1));
            }
        }
    }
    let rh = s.relation_types();
    let sigs: Vec<(&str, usize)> = s.relation_signatures().collect();
    for a in 0..rh.len() {
        for b in rh.supertypes(a) {
            if a != b {
                out.push(implication(sigs[a].0, sigs[b].0, sigs[a].1));
            }
        }
    }
    out
}

fn implication(sub: &str, sup: &str, arity: usize) -> FolFormula {
    let vars: Vec<String> = (1..=arity).map(|i| format!("x{i}")).collect();
    let args: Vec<Term> = vars.iter().cloned().map(Term::Var).collect();
    FolFormula::Forall {
        vars,
        premise: vec![Atom {
            predicate: sub.to_string(),
            args: args.clone(),
        }],
        exists: Vec::new(),
        conclusion: vec![Atom {
            predicate: sup.to_string(),
            args,
        }],
    }
}

fn term_of(g: &SimpleGraph, c: usize, names: &BTreeMap<usize, String>) -> Term {
    match g.concept(c).label.marker {
        Marker::Individual(m) => Term::Const(g.support().marker_name(m).to_string()),
        Marker::Generic => Term::Var(names[&c].clone()),
    }
}

fn graph_atoms(
    g: &SimpleGraph,
    concepts: &[usize],
    relations: &[usize],
    names: &BTreeMap<usize, String>,
) -> Vec<Atom> {
    let s = g.support();
    let mut atoms = Vec::new();
    for &c in concepts {
        atoms.push(Atom {
            predicate: s.concept_name(g.concept(c).label.ty).to_string(),
            args: vec![term_of(g, c, names)],
        });
    }
    for &r in relations {
        let rel = g.relation(r);
        atoms.push(Atom {
            predicate: s.relation_name(rel.ty).to_string(),
            args: rel.args.iter().map(|&a| term_of(g, a, names)).collect(),
        });
    }
    atoms
}

fn generic_by_id(g: &SimpleGraph, nodes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = nodes
        .filter(|&c| g.concept(c).label.marker.is_generic())
        .collect();
    v.sort_by(|&a, &b| g.concept(a).id.cmp(&g.concept(b).id));
    v
}

/// Existential closure of the conjunction of the graph's atoms.
pub fn phi_graph(g: &SimpleGraph) -> FolFormula {
    let generic = generic_by_id(g, 0..g.concept_count());
    let names: BTreeMap<usize, String> = generic
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, format!("x{}", i + 1)))
        .collect();
    let concepts: Vec<usize> = (0..g.concept_count()).collect();
    let relations: Vec<usize> = (0..g.relation_count()).collect();
    FolFormula::Exists {
        vars: generic.iter().map(|c| names[c].clone()).collect(),
        atoms: graph_atoms(g, &concepts, &relations, &names),
    }
}

/// Universal closure over hypothesis variables of the implication from
/// hypothesis to conclusion, whose own variables are existential.
pub fn phi_rule(rule: &ColoredGraph) -> FolFormula {
    let g = rule.graph();
    let zero = |c: usize| rule.concept_color(c) == Color::Zero;
    let hyp_vars = generic_by_id(g, (0..g.concept_count()).filter(|&c| zero(c)));
    let con_vars = generic_by_id(g, (0..g.concept_count()).filter(|&c| !zero(c)));
    let mut names = BTreeMap::new();
    for (i, &c) in hyp_vars.iter().enumerate() {
        names.insert(c, format!("x{}", i + 1));
    }
    for (i, &c) in con_vars.iter().enumerate() {
        names.insert(c, format!("y{}", i + 1));
    }
    let hc: Vec<usize> = (0..g.concept_count()).filter(|&c| zero(c)).collect();
    let cc: Vec<usize> = (0..g.concept_count()).filter(|&c| !zero(c)).collect();
    let hr: Vec<usize> = (0..g.relation_count())
        .filter(|&r| rule.relation_color(r) == Color::Zero)
        .collect();
    let cr: Vec<usize> = (0..g.relation_count())
        .filter(|&r| rule.relation_color(r) == Color::One)
        .collect();
    FolFormula::Forall {
        vars: hyp_vars.iter().map(|c| names[c].clone()).collect(),
        premise: graph_atoms(g, &hc, &hr, &names),
        exists: con_vars.iter().map(|c| names[c].clone()).collect(),
        conclusion: graph_atoms(g, &cc, &cr, &names),
    }
}

/// Predicates and constants of a set of formulas.
pub fn vocabulary_of(formulas: &[&FolFormula]) -> Vocabulary {
    let mut preds = BTreeSet::new();
    let mut consts = BTreeSet::new();
    for f in formulas {
        let atoms: Vec<&Atom> = match f {
            FolFormula::Exists { atoms, .. } => atoms.iter().collect(),
            FolFormula::Forall {
                premise,
                conclusion,
                ..
            } => premise.iter().chain(conclusion).collect(),
        };
        for a in atoms {
            preds.insert((a.predicate.clone(), a.args.len()));
            for t in &a.args {
                if let Term::Const(c) = t {
                    consts.insert(c.clone());
                }
            }
        }
    }
    Vocabulary {
        predicates: preds.into_iter().collect(),
        constants: consts.into_iter().collect(),
    }
}

fn unique_id(g: &SimpleGraph, base: &str) -> NodeId {
    let mut id = NodeId::new(base);
    while g.contains_id(&id) {
        id.0.push('\'');
    }
    id
}

/// Normal graph of an existential conjunction over a flat support: one top
/// node per term and one relation node per atom.
pub fn f2g(f: &FolFormula, support: &Arc<Support>) -> Result<SimpleGraph, GraphError> {
    let FolFormula::Exists { atoms, .. } = f else {
        return Err(GraphError::Support(SupportError::UnknownConcept(
            "universal formula".into(),
        )));
    };
    let top = support
        .concept_type(flat_top(support))
        .ok_or_else(|| GraphError::Support(SupportError::UnknownConcept(FLAT_TOP.to_string())))?;
    let mut g = SimpleGraph::new(Arc::clone(support));
    let mut nodes: BTreeMap<Term, usize> = BTreeMap::new();
    let mut terms: Vec<Term> = atoms.iter().flat_map(|a| a.args.iter().cloned()).collect();
    if let FolFormula::Exists { vars, .. } = f {
        terms.extend(vars.iter().cloned().map(Term::Var));
    }
    terms.sort();
    terms.dedup();
    for t in terms {
        let (base, marker) = match &t {
            Term::Var(v) => (v.clone(), Marker::Generic),
            Term::Const(c) => {
                let m = support
                    .marker(c)
                    .ok_or_else(|| SupportError::UnknownMarker(c.clone()))?;
                (c.clone(), Marker::Individual(m))
            }
        };
        let id = unique_id(&g, &base);
        let idx = g.add_concept(id, ConceptLabel { ty: top, marker })?;
        nodes.insert(t, idx);
    }
    let top_name = flat_top(support);
    for (k, a) in atoms.iter().enumerate() {
        // Type atoms of the top concept are carried by the nodes themselves.
        if a.args.len() == 1
            && a.predicate == top_name
            && support.relation_type(top_name, 1).is_none()
        {
            continue;
        }
        let rt = support
            .relation_type(&a.predicate, a.args.len())
            .ok_or_else(|| SupportError::UnknownRelation(a.predicate.clone(), a.args.len()))?;
        let args = a.args.iter().map(|t| nodes[t]).collect();
        let id = unique_id(&g, &format!("a{}", k + 1));
        g.add_relation(id, rt, args)?;
    }
    Ok(g)
}

fn flat_top(s: &Support) -> &str {
    s.concept_names().next().unwrap_or(FLAT_TOP)
}

/// Expansion of graphs over a support into graphs over the flat support
/// whose predicates are all concept and relation types.
pub struct Expansion {
    source: Arc<Support>,
    flat: Arc<Support>,
}

impl Expansion {
    pub fn new(source: &Arc<Support>) -> Result<Self, SupportError> {
        let mut top = FLAT_TOP.to_string();
        let mut k = 0;
        while source.concept_type(&top).is_some()
            || !source.relation_arities(&top).is_empty()
            || source.marker(&top).is_some()
        {
            k += 1;
            top = format!("{FLAT_TOP}{k}");
        }
        let mut predicates: Vec<(String, usize)> =
            source.concept_names().map(|n| (n.to_string(), 1)).collect();
        predicates.extend(
            source
                .relation_signatures()
                .map(|(n, a)| (n.to_string(), a)),
        );
        let vocabulary = Vocabulary {
            predicates,
            constants: source.marker_names().map(str::to_string).collect(),
        };
        let flat = flat_support_with_top(&vocabulary, &top)?;
        Ok(Expansion {
            source: Arc::clone(source),
            flat: Arc::new(flat),
        })
    }

    pub fn flat_support(&self) -> &Arc<Support> {
        &self.flat
    }

    /// Every concept node becomes a top node carrying one unary relation node
    /// per supertype of its type; every relation node is repeated once per
    /// supertype of its type.
    pub fn expand(&self, g: &SimpleGraph) -> Result<SimpleGraph, GraphError> {
        let s = &self.source;
        if !s.extends(g.support()) && !g.support().extends(s) {
            return Err(GraphError::SupportMismatch);
        }
        let gs = g.support();
        let top = self.flat.concept_type(flat_top(&self.flat)).unwrap();
        let mut out = SimpleGraph::new(Arc::clone(&self.flat));
        for c in g.concepts() {
            let marker = match c.label.marker {
                Marker::Generic => Marker::Generic,
                Marker::Individual(m) => Marker::Individual(
                    self.flat
                        .marker(gs.marker_name(m))
                        .ok_or_else(|| SupportError::UnknownMarker(gs.marker_name(m).into()))?,
                ),
            };
            out.add_concept(c.id.clone(), ConceptLabel { ty: top, marker })?;
        }
        for (i, c) in g.concepts().iter().enumerate() {
            for t in gs.concept_types().supertypes(c.label.ty.0 as usize) {
                let name = gs.concept_name(crate::support::ConceptType(t as u32));
                let rt = self
                    .flat
                    .relation_type(name, 1)
                    .ok_or_else(|| SupportError::UnknownRelation(name.into(), 1))?;
                let id = unique_id(&out, &format!("{}.{}", c.id, name));
                out.add_relation(id, rt, vec![i])?;
            }
        }
        for r in g.relations() {
            for t in gs.relation_types().supertypes(r.ty.0 as usize) {
                let rt0 = crate::support::RelationType(t as u32);
                let name = gs.relation_name(rt0);
                let arity = gs.arity(rt0);
                let rt = self
                    .flat
                    .relation_type(name, arity)
                    .ok_or_else(|| SupportError::UnknownRelation(name.into(), arity))?;
                let id = unique_id(&out, &format!("{}.{}", r.id, name));
                out.add_relation(id, rt, r.args.clone())?;
            }
        }
        Ok(out)
    }

    /// Formula of the expansion.
    pub fn g2f(&self, g: &SimpleGraph) -> Result<FolFormula, GraphError> {
        Ok(phi_graph(&self.expand(g)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RawGraph;
    use crate::support::{flat_support, SupportDecl};

    #[test]
    fn empty_graph_is_truth() {
        let s = Arc::new(SupportDecl::new().concept("T", &[]).validate().unwrap());
        assert_eq!(phi_graph(&SimpleGraph::new(s)).canonical(), "⊤");
    }

    #[test]
    fn f2g_builds_one_node_per_term() {
        let v = Vocabulary {
            predicates: vec![("r".into(), 2)],
            constants: vec!["a".into()],
        };
        let s = Arc::new(flat_support(&v).unwrap());
        let f = FolFormula::Exists {
            vars: vec!["x".into()],
            atoms: vec![Atom {
                predicate: "r".into(),
                args: vec![Term::Var("x".into()), Term::Const("a".into())],
            }],
        };
        let g = f2g(&f, &s).unwrap();
        assert_eq!(g.concept_count(), 2);
        assert_eq!(g.relation_count(), 1);
        assert_eq!(phi_graph(&g).canonical(), "∃x1(r(x1,a) ∧ ⊤(a) ∧ ⊤(x1))");
    }

    #[test]
    fn support_formulas_count_comparable_pairs() {
        let s = SupportDecl::new()
            .concept("Person", &[])
            .concept("Researcher", &["Person"])
            .validate()
            .unwrap();
        let f = phi_support(&s);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].canonical(), "∀x1(Researcher(x1) → Person(x1))");
        let flat = flat_support(&Vocabulary::default()).unwrap();
        assert!(phi_support(&flat).is_empty());
    }

    #[test]
    fn expansion_adds_supertype_atoms() {
        let s = Arc::new(
            SupportDecl::new()
                .concept("Top", &[])
                .concept("Person", &["Top"])
                .concept("Researcher", &["Person"])
                .individual("K", "Researcher")
                .validate()
                .unwrap(),
        );
        let g = RawGraph::new()
            .concept("k", "Researcher", Some("K"))
            .validate(&s)
            .unwrap();
        let e = Expansion::new(&s).unwrap();
        let x = e.expand(&g).unwrap();
        assert_eq!(x.concept_count(), 1);
        assert_eq!(x.relation_count(), 3);
        assert_eq!(
            e.g2f(&g).unwrap().canonical(),
            "(Person(K) ∧ Researcher(K) ∧ Top(K) ∧ ⊤(K))"
        );
    }
}
