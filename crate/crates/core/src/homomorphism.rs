//! Projection (labeled graph homomorphism) solver.
//!
//! Query concept nodes are variables whose domains are the label-compatible
//! target concept nodes; query relation nodes are constraints whose allowed
//! tuples are the argument lists of compatible target relation nodes. The
//! search maintains generalized arc consistency, picks the variable with the
//! smallest domain and tries values in target identifier order.

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::SimpleGraph;
use crate::support::{common_support, Support};

/// Default node bound for [`brute_force_projections`].
pub const BRUTE_FORCE_BOUND: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectionError {
    #[error("graphs are defined over different supports")]
    SupportMismatch,
    #[error("query has {0} nodes, above the brute-force bound {1}")]
    BoundExceeded(usize, usize),
    #[error("invalid partial projection: {0}")]
    InvalidPartial(String),
}

/// Target indices of every query concept and relation node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Projection {
    pub concepts: Vec<usize>,
    pub relations: Vec<usize>,
}

impl Projection {
    pub fn identity(g: &SimpleGraph) -> Self {
        Projection {
            concepts: (0..g.concept_count()).collect(),
            relations: (0..g.relation_count()).collect(),
        }
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Projection) -> Projection {
        Projection {
            concepts: self.concepts.iter().map(|&c| next.concepts[c]).collect(),
            relations: self.relations.iter().map(|&r| next.relations[r]).collect(),
        }
    }

    /// Node map keyed by query identifiers.
    pub fn id_map(&self, query: &SimpleGraph, target: &SimpleGraph) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        for (i, &t) in self.concepts.iter().enumerate() {
            map.insert(
                query.concept(i).id.to_string(),
                target.concept(t).id.to_string(),
            );
        }
        for (i, &t) in self.relations.iter().enumerate() {
            map.insert(
                query.relation(i).id.to_string(),
                target.relation(t).id.to_string(),
            );
        }
        map
    }

    /// Rebuilds a projection from an identifier map.
    pub fn from_id_map(
        map: &BTreeMap<String, String>,
        query: &SimpleGraph,
        target: &SimpleGraph,
    ) -> Option<Projection> {
        let concepts = query
            .concepts()
            .iter()
            .map(|c| target.concept_index(map.get(c.id.as_str())?))
            .collect::<Option<Vec<_>>>()?;
        let relations = query
            .relations()
            .iter()
            .map(|r| target.relation_index(map.get(r.id.as_str())?))
            .collect::<Option<Vec<_>>>()?;
        Some(Projection {
            concepts,
            relations,
        })
    }

    pub fn as_partial(&self) -> PartialProjection {
        PartialProjection {
            concepts: self.concepts.iter().map(|&c| Some(c)).collect(),
            relations: self.relations.iter().map(|&r| Some(r)).collect(),
        }
    }
}

/// A projection defined on a subset of the query's nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialProjection {
    pub concepts: Vec<Option<usize>>,
    pub relations: Vec<Option<usize>>,
}

impl PartialProjection {
    pub fn empty(query: &SimpleGraph) -> Self {
        PartialProjection {
            concepts: vec![None; query.concept_count()],
            relations: vec![None; query.relation_count()],
        }
    }

    pub fn is_total(&self) -> bool {
        self.concepts.iter().all(Option::is_some) && self.relations.iter().all(Option::is_some)
    }
}

/// Result of a bounded enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub projections: Vec<Projection>,
    pub truncated: bool,
}

fn support_of<'a>(
    query: &'a SimpleGraph,
    target: &'a SimpleGraph,
) -> Result<&'a Arc<Support>, ProjectionError> {
    common_support(query.support(), target.support()).ok_or(ProjectionError::SupportMismatch)
}

/// Checks both projection conditions.
pub fn is_projection(query: &SimpleGraph, target: &SimpleGraph, p: &Projection) -> bool {
    let Ok(s) = support_of(query, target) else {
        return false;
    };
    if p.concepts.len() != query.concept_count() || p.relations.len() != query.relation_count() {
        return false;
    }
    if p.concepts.iter().any(|&c| c >= target.concept_count())
        || p.relations.iter().any(|&r| r >= target.relation_count())
    {
        return false;
    }
    query
        .concepts()
        .iter()
        .enumerate()
        .all(|(i, c)| s.leq_label(&target.concept(p.concepts[i]).label, &c.label))
        && query.relations().iter().enumerate().all(|(i, r)| {
            let t = target.relation(p.relations[i]);
            s.leq_relation(t.ty, r.ty)
                && t.args.len() == r.args.len()
                && r.args
                    .iter()
                    .zip(&t.args)
                    .all(|(&qa, &ta)| p.concepts[qa] == ta)
        })
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet {
            words: vec![0; n.div_ceil(64)],
            len: 0,
        }
    }

    fn insert(&mut self, i: usize) {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        if self.words[w] & b == 0 {
            self.words[w] |= b;
            self.len += 1;
        }
    }

    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1u64 << (i % 64)) != 0
    }

    fn intersect(&mut self, other: &BitSet) -> bool {
        let mut len = 0;
        let mut changed = false;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            let n = *a & *b;
            changed |= n != *a;
            *a = n;
            len += n.count_ones() as usize;
        }
        self.len = len;
        changed
    }

    fn singleton(n: usize, i: usize) -> Self {
        let mut s = BitSet::new(n);
        s.insert(i);
        s
    }
}

struct Problem<'a> {
    query: &'a SimpleGraph,
    target: &'a SimpleGraph,
    /// Query relations incident to each query concept.
    incident: Vec<Vec<usize>>,
    /// Target concept indices sorted by identifier.
    value_order: Vec<usize>,
}

#[derive(Clone)]
struct State {
    domains: Vec<BitSet>,
    supports: Vec<Vec<usize>>,
    assigned: Vec<bool>,
}

impl<'a> Problem<'a> {
    fn new(
        query: &'a SimpleGraph,
        target: &'a SimpleGraph,
        partial: Option<&PartialProjection>,
    ) -> Result<(Self, Option<State>), ProjectionError> {
        let s = support_of(query, target)?;
        let n = target.concept_count();
        if let Some(p) = partial {
            validate_partial(query, target, s, p)?;
        }
        let mut incident = vec![Vec::new(); query.concept_count()];
        for (i, r) in query.relations().iter().enumerate() {
            for &a in &r.args {
                if !incident[a].contains(&i) {
                    incident[a].push(i);
                }
            }
        }
        let mut value_order: Vec<usize> = (0..n).collect();
        value_order.sort_by(|&a, &b| target.concept(a).id.cmp(&target.concept(b).id));
        let mut relation_order: Vec<usize> = (0..target.relation_count()).collect();
        relation_order.sort_by(|&a, &b| target.relation(a).id.cmp(&target.relation(b).id));

        let mut domains = Vec::with_capacity(query.concept_count());
        for (i, c) in query.concepts().iter().enumerate() {
            let fixed = partial.and_then(|p| p.concepts[i]);
            let mut d = BitSet::new(n);
            match fixed {
                Some(t) => d.insert(t),
                None => {
                    for (t, tc) in target.concepts().iter().enumerate() {
                        if s.leq_label(&tc.label, &c.label) {
                            d.insert(t);
                        }
                    }
                }
            }
            domains.push(d);
        }
        let mut supports = Vec::with_capacity(query.relation_count());
        for (i, r) in query.relations().iter().enumerate() {
            let fixed = partial.and_then(|p| p.relations[i]);
            let list: Vec<usize> = relation_order
                .iter()
                .copied()
                .filter(|&t| fixed.is_none_or(|f| f == t))
                .filter(|&t| {
                    let tr = target.relation(t);
                    tr.args.len() == r.args.len()
                        && s.leq_relation(tr.ty, r.ty)
                        && r.args.iter().enumerate().all(|(p, &qa)| {
                            r.args[..p]
                                .iter()
                                .zip(&tr.args)
                                .all(|(&qb, &tb)| qb != qa || tb == tr.args[p])
                        })
                })
                .collect();
            supports.push(list);
        }
        let problem = Problem {
            query,
            target,
            incident,
            value_order,
        };
        let mut state = State {
            domains,
            supports,
            assigned: vec![false; query.concept_count()],
        };
        let all: Vec<usize> = (0..query.concept_count()).collect();
        let ok = state.domains.iter().all(|d| d.len > 0)
            && problem.propagate(&mut state, all)
            && (0..query.relation_count()).all(|r| !state.supports[r].is_empty());
        Ok((problem, ok.then_some(state)))
    }

    /// Generalized arc consistency from the given changed variables.
    fn propagate(&self, state: &mut State, mut queue: Vec<usize>) -> bool {
        let n = self.target.concept_count();
        let mut queued = vec![false; self.query.concept_count()];
        for &v in &queue {
            queued[v] = true;
        }
        while let Some(v) = queue.pop() {
            queued[v] = false;
            for &r in &self.incident[v] {
                let args = &self.query.relation(r).args;
                let domains = &state.domains;
                state.supports[r].retain(|&t| {
                    let targs = &self.target.relation(t).args;
                    args.iter()
                        .zip(targs)
                        .all(|(&qa, &ta)| domains[qa].contains(ta))
                });
                if state.supports[r].is_empty() {
                    return false;
                }
                for (p, &u) in args.iter().enumerate() {
                    if args[..p].contains(&u) {
                        continue;
                    }
                    let mut allowed = BitSet::new(n);
                    for &t in &state.supports[r] {
                        allowed.insert(self.target.relation(t).args[p]);
                    }
                    if state.domains[u].intersect(&allowed) {
                        if state.domains[u].len == 0 {
                            return false;
                        }
                        if !queued[u] {
                            queued[u] = true;
                            queue.push(u);
                        }
                    }
                }
            }
        }
        true
    }

    fn search<F>(&self, state: State, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Projection) -> ControlFlow<()>,
    {
        let var = (0..self.query.concept_count())
            .filter(|&v| !state.assigned[v])
            .min_by_key(|&v| state.domains[v].len);
        let Some(var) = var else {
            return self.emit_relations(&state, f);
        };
        let n = self.target.concept_count();
        for &value in &self.value_order {
            if !state.domains[var].contains(value) {
                continue;
            }
            let mut next = state.clone();
            next.assigned[var] = true;
            next.domains[var] = BitSet::singleton(n, value);
            if self.propagate(&mut next, vec![var]) {
                self.search(next, f)?;
            }
        }
        ControlFlow::Continue(())
    }

    fn emit_relations<F>(&self, state: &State, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Projection) -> ControlFlow<()>,
    {
        let concepts: Vec<usize> = state
            .domains
            .iter()
            .map(|d| {
                self.value_order
                    .iter()
                    .copied()
                    .find(|&v| d.contains(v))
                    .unwrap()
            })
            .collect();
        let choices: Vec<Vec<usize>> = self
            .query
            .relations()
            .iter()
            .enumerate()
            .map(|(r, qr)| {
                state.supports[r]
                    .iter()
                    .copied()
                    .filter(|&t| {
                        qr.args
                            .iter()
                            .zip(&self.target.relation(t).args)
                            .all(|(&qa, &ta)| concepts[qa] == ta)
                    })
                    .collect()
            })
            .collect();
        if choices.iter().any(Vec::is_empty) {
            return ControlFlow::Continue(());
        }
        let mut pick = vec![0usize; choices.len()];
        loop {
            let p = Projection {
                concepts: concepts.clone(),
                relations: pick.iter().zip(&choices).map(|(&k, c)| c[k]).collect(),
            };
            f(&p)?;
            let mut i = choices.len();
            loop {
                if i == 0 {
                    return ControlFlow::Continue(());
                }
                i -= 1;
                pick[i] += 1;
                if pick[i] < choices[i].len() {
                    break;
                }
                pick[i] = 0;
            }
        }
    }
}

fn validate_partial(
    query: &SimpleGraph,
    target: &SimpleGraph,
    s: &Support,
    p: &PartialProjection,
) -> Result<(), ProjectionError> {
    let bad = |m: String| Err(ProjectionError::InvalidPartial(m));
    if p.concepts.len() != query.concept_count() || p.relations.len() != query.relation_count() {
        return bad("size does not match the query".into());
    }
    for (i, c) in p.concepts.iter().enumerate() {
        if let Some(t) = *c {
            if t >= target.concept_count() {
                return bad(format!("no target concept #{t}"));
            }
            if !s.leq_label(&target.concept(t).label, &query.concept(i).label) {
                return bad(format!(
                    "`{}` cannot map to `{}`",
                    query.concept(i).id,
                    target.concept(t).id
                ));
            }
        }
    }
    for (i, r) in p.relations.iter().enumerate() {
        if let Some(t) = *r {
            if t >= target.relation_count() {
                return bad(format!("no target relation #{t}"));
            }
            let qr = query.relation(i);
            let tr = target.relation(t);
            let args_ok = qr.args.len() == tr.args.len()
                && qr
                    .args
                    .iter()
                    .zip(&tr.args)
                    .all(|(&qa, &ta)| p.concepts[qa].is_none_or(|c| c == ta));
            if !s.leq_relation(tr.ty, qr.ty) || !args_ok {
                return bad(format!("`{}` cannot map to `{}`", qr.id, tr.id));
            }
        }
    }
    Ok(())
}

/// Calls `f` on every projection of `query` into `target` agreeing with
/// `partial`, in deterministic order, until `f` breaks.
pub fn for_each_projection<F>(
    query: &SimpleGraph,
    target: &SimpleGraph,
    partial: Option<&PartialProjection>,
    mut f: F,
) -> Result<(), ProjectionError>
where
    F: FnMut(&Projection) -> ControlFlow<()>,
{
    let (problem, state) = Problem::new(query, target, partial)?;
    if let Some(state) = state {
        let _ = problem.search(state, &mut f);
    }
    Ok(())
}

pub fn find_projection(
    query: &SimpleGraph,
    target: &SimpleGraph,
) -> Result<Option<Projection>, ProjectionError> {
    let mut found = None;
    for_each_projection(query, target, None, |p| {
        found = Some(p.clone());
        ControlFlow::Break(())
    })?;
    Ok(found)
}

pub fn exists_projection(
    query: &SimpleGraph,
    target: &SimpleGraph,
) -> Result<bool, ProjectionError> {
    Ok(find_projection(query, target)?.is_some())
}

/// All projections, truncated at `limit` when given.
pub fn enumerate_projections(
    query: &SimpleGraph,
    target: &SimpleGraph,
    limit: Option<usize>,
) -> Result<Enumeration, ProjectionError> {
    enumerate_extensions(query, target, None, limit)
}

fn enumerate_extensions(
    query: &SimpleGraph,
    target: &SimpleGraph,
    partial: Option<&PartialProjection>,
    limit: Option<usize>,
) -> Result<Enumeration, ProjectionError> {
    let mut projections = Vec::new();
    let mut truncated = false;
    for_each_projection(query, target, partial, |p| {
        if limit.is_some_and(|l| projections.len() >= l) {
            truncated = true;
            return ControlFlow::Break(());
        }
        projections.push(p.clone());
        ControlFlow::Continue(())
    })?;
    Ok(Enumeration {
        projections,
        truncated,
    })
}

/// Every projection of `whole` into `target` that agrees with `partial` on
/// its defined nodes.
pub fn extend_projection(
    whole: &SimpleGraph,
    partial: &PartialProjection,
    target: &SimpleGraph,
    limit: Option<usize>,
) -> Result<Enumeration, ProjectionError> {
    enumerate_extensions(whole, target, Some(partial), limit)
}

pub fn exists_extension(
    whole: &SimpleGraph,
    partial: &PartialProjection,
    target: &SimpleGraph,
) -> Result<bool, ProjectionError> {
    let mut found = false;
    for_each_projection(whole, target, Some(partial), |_| {
        found = true;
        ControlFlow::Break(())
    })?;
    Ok(found)
}

/// Exhaustive reference enumeration trying every concept assignment.
/// Output is sorted.
pub fn brute_force_projections(
    query: &SimpleGraph,
    target: &SimpleGraph,
    bound: usize,
) -> Result<Vec<Projection>, ProjectionError> {
    let s = support_of(query, target)?;
    if query.node_count() > bound {
        return Err(ProjectionError::BoundExceeded(query.node_count(), bound));
    }
    let n = query.concept_count();
    let m = target.concept_count();
    let mut out = Vec::new();
    if n > 0 && m == 0 {
        return Ok(out);
    }
    let mut assignment = vec![0usize; n];
    loop {
        let labels_ok = (0..n).all(|i| {
            s.leq_label(
                &target.concept(assignment[i]).label,
                &query.concept(i).label,
            )
        });
        if labels_ok {
            let images: Vec<Vec<usize>> = query
                .relations()
                .iter()
                .map(|qr| {
                    (0..target.relation_count())
                        .filter(|&t| {
                            let tr = target.relation(t);
                            s.leq_relation(tr.ty, qr.ty)
                                && tr.args.len() == qr.args.len()
                                && qr
                                    .args
                                    .iter()
                                    .zip(&tr.args)
                                    .all(|(&qa, &ta)| assignment[qa] == ta)
                        })
                        .collect()
                })
                .collect();
            cartesian(&images, &mut |relations| {
                out.push(Projection {
                    concepts: assignment.clone(),
                    relations: relations.to_vec(),
                })
            });
        }
        let mut i = n;
        loop {
            if i == 0 {
                out.sort();
                return Ok(out);
            }
            i -= 1;
            assignment[i] += 1;
            if assignment[i] < m {
                break;
            }
            assignment[i] = 0;
        }
    }
}

fn cartesian(choices: &[Vec<usize>], f: &mut dyn FnMut(&[usize])) {
    fn go(choices: &[Vec<usize>], acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        match choices.split_first() {
            None => f(acc),
            Some((first, rest)) => {
                for &c in first {
                    acc.push(c);
                    go(rest, acc, f);
                    acc.pop();
                }
            }
        }
    }
    go(choices, &mut Vec::new(), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RawGraph;
    use crate::support::SupportDecl;

    fn support() -> Arc<Support> {
        Arc::new(
            SupportDecl::new()
                .concept("T", &[])
                .concept("A", &["T"])
                .relation("r", 2, &[])
                .relation("s", 2, &["r"])
                .individual("a", "A")
                .validate()
                .unwrap(),
        )
    }

    #[test]
    fn empty_query_has_one_projection() {
        let s = support();
        let g = RawGraph::new()
            .concept("x", "A", None)
            .validate(&s)
            .unwrap();
        let q = SimpleGraph::new(Arc::clone(&s));
        let e = enumerate_projections(&q, &g, None).unwrap();
        assert_eq!(e.projections.len(), 1);
        assert!(!e.truncated);
    }

    #[test]
    fn twins_multiply_projections() {
        let s = support();
        let g = RawGraph::new()
            .concept("x", "A", None)
            .concept("y", "A", None)
            .relation("e1", "s", &["x", "y"])
            .relation("e2", "r", &["x", "y"])
            .validate(&s)
            .unwrap();
        let q = RawGraph::new()
            .concept("u", "T", None)
            .concept("v", "T", None)
            .relation("f", "r", &["u", "v"])
            .validate(&s)
            .unwrap();
        let e = enumerate_projections(&q, &g, None).unwrap();
        assert_eq!(e.projections.len(), 2);
        let mut bf = brute_force_projections(&q, &g, BRUTE_FORCE_BOUND).unwrap();
        let mut got = e.projections.clone();
        got.sort();
        bf.sort();
        assert_eq!(got, bf);
        let lim = enumerate_projections(&q, &g, Some(1)).unwrap();
        assert!(lim.truncated);
        assert_eq!(lim.projections.len(), 1);
    }

    #[test]
    fn reflexive_query_needs_reflexive_image() {
        let s = support();
        let g = RawGraph::new()
            .concept("x", "A", None)
            .concept("y", "A", None)
            .relation("e", "r", &["x", "y"])
            .validate(&s)
            .unwrap();
        let q = RawGraph::new()
            .concept("u", "T", None)
            .relation("f", "r", &["u", "u"])
            .validate(&s)
            .unwrap();
        assert!(!exists_projection(&q, &g).unwrap());
        assert!(brute_force_projections(&q, &g, 12).unwrap().is_empty());
    }

    #[test]
    fn partial_extension_respects_fixed_nodes() {
        let s = support();
        let g = RawGraph::new()
            .concept("x", "A", None)
            .concept("y", "A", None)
            .concept("z", "A", None)
            .relation("e1", "r", &["x", "y"])
            .relation("e2", "r", &["z", "y"])
            .validate(&s)
            .unwrap();
        let q = RawGraph::new()
            .concept("u", "T", None)
            .concept("v", "T", None)
            .relation("f", "r", &["u", "v"])
            .validate(&s)
            .unwrap();
        let mut partial = PartialProjection::empty(&q);
        partial.concepts[0] = Some(2);
        let e = extend_projection(&q, &partial, &g, None).unwrap();
        assert_eq!(e.projections.len(), 1);
        assert_eq!(e.projections[0].relations, vec![1]);
        partial.concepts[1] = Some(0);
        assert!(extend_projection(&q, &partial, &g, None)
            .unwrap()
            .projections
            .is_empty());
        let mut wrong = PartialProjection::empty(&q);
        wrong.relations[0] = Some(0);
        wrong.concepts[0] = Some(2);
        assert!(matches!(
            extend_projection(&q, &wrong, &g, None),
            Err(ProjectionError::InvalidPartial(_))
        ));
    }

    #[test]
    fn identity_and_composition() {
        let s = support();
        let g = RawGraph::new()
            .concept("x", "A", Some("a"))
            .concept("y", "A", None)
            .relation("e", "s", &["x", "y"])
            .validate(&s)
            .unwrap();
        let id = Projection::identity(&g);
        assert!(is_projection(&g, &g, &id));
        assert!(is_projection(&g, &g, &id.then(&id)));
        let map = id.id_map(&g, &g);
        assert_eq!(Projection::from_id_map(&map, &g, &g), Some(id));
    }

    #[test]
    fn brute_force_bound_is_enforced() {
        let s = support();
        let mut raw = RawGraph::new();
        for i in 0..13 {
            raw = raw.concept(&format!("x{i}"), "T", None);
        }
        let q = raw.validate(&s).unwrap();
        assert!(matches!(
            brute_force_projections(&q, &q, BRUTE_FORCE_BOUND),
            Err(ProjectionError::BoundExceeded(13, 12))
        ));
    }
}
