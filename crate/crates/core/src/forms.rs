//! Redundancy, irredundant forms (cores), equivalence and isomorphism.

use std::collections::{BTreeMap, HashMap};
use std::hash::{DefaultHasher, Hash, Hasher};

use thiserror::Error;

use crate::graph::{NodeRef, SimpleGraph};
use crate::homomorphism::{exists_projection, find_projection, Projection, ProjectionError};

/// Default node bound for [`isomorphic`].
pub const ISOMORPHISM_BOUND: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormsError {
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("graph has {0} nodes, above the isomorphism bound {1}")]
    BoundExceeded(usize, usize),
}

/// Order in which nodes are tried for removal while computing a core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RemovalOrder {
    #[default]
    Ascending,
    Descending,
}

/// A projection from a graph onto one of its subgraphs that is the identity
/// on that subgraph.
#[derive(Debug, Clone)]
pub struct Folding {
    /// Maps the original graph into `core` indices.
    pub projection: Projection,
    pub core: SimpleGraph,
    /// Original index of each core concept node.
    pub core_concepts: Vec<usize>,
    /// Original index of each core relation node.
    pub core_relations: Vec<usize>,
}

impl Folding {
    /// True if every core node is mapped to itself.
    pub fn fixes_core(&self) -> bool {
        self.core_concepts
            .iter()
            .enumerate()
            .all(|(i, &o)| self.projection.concepts[o] == i)
            && self
                .core_relations
                .iter()
                .enumerate()
                .all(|(i, &o)| self.projection.relations[o] == i)
    }
}

/// True if `g` projects into one of its strict subgraphs.
pub fn is_redundant(g: &SimpleGraph) -> Result<bool, FormsError> {
    Ok(redundancy_witness(g, RemovalOrder::Ascending)?.is_some())
}

/// A node `x` and a projection of `g` into `g - x`, expressed in `g` indices.
fn redundancy_witness(
    g: &SimpleGraph,
    order: RemovalOrder,
) -> Result<Option<Projection>, FormsError> {
    let mut nodes: Vec<NodeRef> = (0..g.concept_count())
        .map(NodeRef::Concept)
        .chain((0..g.relation_count()).map(NodeRef::Relation))
        .collect();
    if order == RemovalOrder::Descending {
        nodes.reverse();
    }
    for x in nodes {
        let mut kc = vec![true; g.concept_count()];
        let mut kr = vec![true; g.relation_count()];
        match x {
            NodeRef::Concept(i) => kc[i] = false,
            NodeRef::Relation(i) => kr[i] = false,
        }
        let (sub, cmap, rmap) = g.retain(&kc, &kr);
        if let Some(p) = find_projection(g, &sub)? {
            let cback = invert(&cmap, sub.concept_count());
            let rback = invert(&rmap, sub.relation_count());
            return Ok(Some(Projection {
                concepts: p.concepts.iter().map(|&c| cback[c]).collect(),
                relations: p.relations.iter().map(|&r| rback[r]).collect(),
            }));
        }
    }
    Ok(None)
}

fn invert(map: &[Option<usize>], len: usize) -> Vec<usize> {
    let mut back = vec![usize::MAX; len];
    for (old, new) in map.iter().enumerate() {
        if let Some(n) = new {
            back[*n] = old;
        }
    }
    back
}

/// Irredundant form of `g` with its folding.
pub fn irredundant_form(g: &SimpleGraph) -> Result<Folding, FormsError> {
    irredundant_form_with(g, RemovalOrder::Ascending)
}

/// Irredundant form computed by trying node removals in the given order.
pub fn irredundant_form_with(g: &SimpleGraph, order: RemovalOrder) -> Result<Folding, FormsError> {
    let mut current = g.clone();
    // current index -> original index
    let mut orig_c: Vec<usize> = (0..g.concept_count()).collect();
    let mut orig_r: Vec<usize> = (0..g.relation_count()).collect();
    let mut folding = Projection::identity(g);
    while let Some(p) = redundancy_witness(&current, order)? {
        let mut kc = vec![false; current.concept_count()];
        let mut kr = vec![false; current.relation_count()];
        for &c in &p.concepts {
            kc[c] = true;
        }
        for &r in &p.relations {
            kr[r] = true;
        }
        let (image, cmap, rmap) = current.retain(&kc, &kr);
        let step = Projection {
            concepts: p.concepts.iter().map(|&c| cmap[c].unwrap()).collect(),
            relations: p.relations.iter().map(|&r| rmap[r].unwrap()).collect(),
        };
        folding = folding.then(&step);
        orig_c = keep_mapped(&orig_c, &cmap, image.concept_count());
        orig_r = keep_mapped(&orig_r, &rmap, image.relation_count());
        current = image;
    }
    // The folding restricted to the core is an automorphism; undo it so the
    // core is fixed pointwise.
    let sigma = Projection {
        concepts: orig_c.iter().map(|&o| folding.concepts[o]).collect(),
        relations: orig_r.iter().map(|&o| folding.relations[o]).collect(),
    };
    let inverse = Projection {
        concepts: invert(
            &sigma.concepts.iter().map(|&c| Some(c)).collect::<Vec<_>>(),
            sigma.concepts.len(),
        ),
        relations: invert(
            &sigma.relations.iter().map(|&r| Some(r)).collect::<Vec<_>>(),
            sigma.relations.len(),
        ),
    };
    Ok(Folding {
        projection: folding.then(&inverse),
        core: current,
        core_concepts: orig_c,
        core_relations: orig_r,
    })
}

fn keep_mapped(orig: &[usize], map: &[Option<usize>], len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for (i, m) in map.iter().enumerate() {
        if let Some(n) = m {
            out[*n] = orig[i];
        }
    }
    out
}

/// True if the two graphs project into each other.
pub fn equivalent(g: &SimpleGraph, h: &SimpleGraph) -> Result<bool, FormsError> {
    Ok(exists_projection(g, h)? && exists_projection(h, g)?)
}

fn hash_of<T: Hash + ?Sized>(value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

/// Color refinement of concept nodes by label and numbered neighborhood.
fn refine(g: &SimpleGraph) -> Vec<u64> {
    let s = g.support();
    let mut colors: Vec<u64> = g
        .concepts()
        .iter()
        .enumerate()
        .map(|(i, c)| hash_of(&(s.display_label(&c.label), g.incidence(i).len())))
        .collect();
    let mut classes = distinct(&colors);
    for _ in 0..g.concept_count().max(1) {
        let next: Vec<u64> = (0..g.concept_count())
            .map(|i| {
                let mut sig: Vec<(u64, usize, Vec<u64>)> = g
                    .incidence(i)
                    .iter()
                    .map(|&(r, p)| {
                        let rel = g.relation(r);
                        (
                            hash_of(s.relation_name(rel.ty)),
                            p,
                            rel.args.iter().map(|&a| colors[a]).collect(),
                        )
                    })
                    .collect();
                sig.sort();
                hash_of(&(colors[i], sig))
            })
            .collect();
        let n = distinct(&next);
        colors = next;
        if n == classes {
            break;
        }
        classes = n;
    }
    colors
}

fn distinct(colors: &[u64]) -> usize {
    let mut v = colors.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Identifier-independent invariant: isomorphic graphs have equal
/// invariants.
pub fn iso_invariant(g: &SimpleGraph) -> u64 {
    let s = g.support();
    let colors = refine(g);
    let mut cs = colors.clone();
    cs.sort_unstable();
    let mut rs: Vec<(String, Vec<u64>)> = g
        .relations()
        .iter()
        .map(|r| {
            (
                s.relation_name(r.ty).to_string(),
                r.args.iter().map(|&a| colors[a]).collect(),
            )
        })
        .collect();
    rs.sort();
    hash_of(&(cs, rs))
}

/// True if a label- and numbering-preserving bijection exists.
pub fn isomorphic(g: &SimpleGraph, h: &SimpleGraph) -> Result<bool, FormsError> {
    isomorphic_bounded(g, h, ISOMORPHISM_BOUND)
}

pub fn isomorphic_bounded(
    g: &SimpleGraph,
    h: &SimpleGraph,
    bound: usize,
) -> Result<bool, FormsError> {
    for x in [g, h] {
        if x.node_count() > bound {
            return Err(FormsError::BoundExceeded(x.node_count(), bound));
        }
    }
    if crate::support::common_support(g.support(), h.support()).is_none() {
        return Err(ProjectionError::SupportMismatch.into());
    }
    if g.concept_count() != h.concept_count()
        || g.relation_count() != h.relation_count()
        || g.label_census() != h.label_census()
    {
        return Ok(false);
    }
    let cg = refine(g);
    let ch = refine(h);
    let mut sg = cg.clone();
    let mut sh = ch.clone();
    sg.sort_unstable();
    sh.sort_unstable();
    if sg != sh {
        return Ok(false);
    }
    let key = |x: &SimpleGraph, r: &crate::graph::RelationNode| {
        (x.support().relation_name(r.ty).to_string(), r.args.clone())
    };
    let mut h_rel: HashMap<(String, Vec<usize>), usize> = HashMap::new();
    for r in h.relations() {
        *h_rel.entry(key(h, r)).or_insert(0) += 1;
    }
    let mut order: Vec<usize> = (0..g.concept_count()).collect();
    let class_size: BTreeMap<u64, usize> = cg.iter().fold(BTreeMap::new(), |mut m, &c| {
        *m.entry(c).or_insert(0) += 1;
        m
    });
    order.sort_by_key(|&i| (class_size[&cg[i]], i));
    let mut search = IsoSearch {
        g,
        h,
        cg: &cg,
        ch: &ch,
        h_rel: &h_rel,
        order: &order,
        map: vec![None; g.concept_count()],
        used: vec![false; h.concept_count()],
    };
    Ok(search.run(0))
}

struct IsoSearch<'a> {
    g: &'a SimpleGraph,
    h: &'a SimpleGraph,
    cg: &'a [u64],
    ch: &'a [u64],
    h_rel: &'a HashMap<(String, Vec<usize>), usize>,
    order: &'a [usize],
    map: Vec<Option<usize>>,
    used: Vec<bool>,
}

impl IsoSearch<'_> {
    fn run(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return self.relations_match();
        }
        let v = self.order[depth];
        let label = self.g.concept(v).label;
        for w in 0..self.h.concept_count() {
            if self.used[w] || self.ch[w] != self.cg[v] || self.h.concept(w).label != label {
                continue;
            }
            self.map[v] = Some(w);
            self.used[w] = true;
            if self.consistent(v) && self.run(depth + 1) {
                return true;
            }
            self.map[v] = None;
            self.used[w] = false;
        }
        false
    }

    fn consistent(&self, v: usize) -> bool {
        let s = self.g.support();
        self.g.incidence(v).iter().all(|&(r, _)| {
            let rel = self.g.relation(r);
            let mapped: Option<Vec<usize>> = rel.args.iter().map(|&a| self.map[a]).collect();
            match mapped {
                Some(args) => self
                    .h_rel
                    .contains_key(&(s.relation_name(rel.ty).to_string(), args)),
                None => true,
            }
        })
    }

    fn relations_match(&self) -> bool {
        let s = self.g.support();
        let mut counts: HashMap<(String, Vec<usize>), usize> = HashMap::new();
        for r in self.g.relations() {
            let args = r.args.iter().map(|&a| self.map[a].unwrap()).collect();
            *counts
                .entry((s.relation_name(r.ty).to_string(), args))
                .or_insert(0) += 1;
        }
        &counts == self.h_rel
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{disjoint_union, RawGraph};
    use crate::homomorphism::is_projection;
    use crate::support::{Support, SupportDecl};
    use std::sync::Arc;

    fn support() -> Arc<Support> {
        Arc::new(
            SupportDecl::new()
                .concept("T", &[])
                .concept("A", &["T"])
                .relation("r", 2, &[])
                .individual("a", "A")
                .validate()
                .unwrap(),
        )
    }

    fn path(s: &Arc<Support>) -> SimpleGraph {
        RawGraph::new()
            .concept("x", "A", Some("a"))
            .concept("y", "T", None)
            .concept("z", "T", None)
            .relation("e1", "r", &["x", "y"])
            .relation("e2", "r", &["x", "z"])
            .validate(s)
            .unwrap()
    }

    #[test]
    fn duplicated_graph_is_redundant() {
        let s = support();
        let g = RawGraph::new()
            .concept("y", "T", None)
            .validate(&s)
            .unwrap();
        assert!(!is_redundant(&g).unwrap());
        let u = disjoint_union(&s, &[&g, &g]).unwrap();
        assert!(is_redundant(&u).unwrap());
    }

    #[test]
    fn core_of_fork_is_single_edge() {
        let s = support();
        let g = path(&s);
        for order in [RemovalOrder::Ascending, RemovalOrder::Descending] {
            let f = irredundant_form_with(&g, order).unwrap();
            assert_eq!(f.core.concept_count(), 2);
            assert_eq!(f.core.relation_count(), 1);
            assert!(f.fixes_core());
            assert!(is_projection(&g, &f.core, &f.projection));
            assert!(!is_redundant(&f.core).unwrap());
            assert!(equivalent(&g, &f.core).unwrap());
        }
        let a = irredundant_form_with(&g, RemovalOrder::Ascending).unwrap();
        let d = irredundant_form_with(&g, RemovalOrder::Descending).unwrap();
        assert!(isomorphic(&a.core, &d.core).unwrap());
        assert_eq!(iso_invariant(&a.core), iso_invariant(&d.core));
    }

    #[test]
    fn isomorphism_ignores_ids_but_not_direction() {
        let s = support();
        let g = path(&s);
        let renamed = RawGraph::new()
            .concept("q", "T", None)
            .concept("p", "A", Some("a"))
            .concept("o", "T", None)
            .relation("f2", "r", &["p", "o"])
            .relation("f1", "r", &["p", "q"])
            .validate(&s)
            .unwrap();
        assert!(isomorphic(&g, &renamed).unwrap());
        let flipped = RawGraph::new()
            .concept("x", "A", Some("a"))
            .concept("y", "T", None)
            .concept("z", "T", None)
            .relation("e1", "r", &["y", "x"])
            .relation("e2", "r", &["x", "z"])
            .validate(&s)
            .unwrap();
        assert!(!isomorphic(&g, &flipped).unwrap());
        assert!(isomorphic_bounded(&g, &g, 2).is_err());
    }
}
