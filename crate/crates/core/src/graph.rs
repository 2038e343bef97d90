//! Simple graphs: bipartite labeled multigraphs of concept and relation nodes
//! with numbered edges.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::support::{ConceptLabel, Marker, RelationType, Support, SupportError};

/// Stable, opaque node identifier. Identifiers created by the engine start
/// with `~` and therefore sort after every identifier that does not.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(s: impl Into<String>) -> Self {
        NodeId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_fresh(&self) -> bool {
        self.0.starts_with('~')
    }

    /// The user-facing part of an engine-generated identifier.
    pub fn base(&self) -> &str {
        let mut s = self.0.as_str();
        while let Some(rest) = s.strip_prefix('~') {
            match rest.find('.') {
                Some(i) => s = &rest[i + 1..],
                None => return rest,
            }
        }
        s
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

/// True if `s` can be used as a node identifier in the textual format.
pub fn is_valid_id(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| {
            c.is_alphanumeric() || matches!(c, '_' | '.' | '\'' | '-' | '~' | '#' | '+' | '*')
        })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptNode {
    pub id: NodeId,
    pub label: ConceptLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationNode {
    pub id: NodeId,
    pub ty: RelationType,
    /// Concept node indices; position `i` is edge number `i + 1`.
    pub args: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Concept(usize),
    Relation(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Support(#[from] SupportError),
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("invalid node id `{0}`")]
    InvalidId(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("relation node `{0}` references `{1}`, which is not a concept node")]
    NotAConcept(String, String),
    #[error("relation node `{id}` of type `{ty}/{arity}`: missing position {position}")]
    MissingPosition {
        id: String,
        ty: String,
        arity: usize,
        position: usize,
    },
    #[error("relation node `{id}` of type `{ty}/{arity}`: unexpected position {position}")]
    ExtraPosition {
        id: String,
        ty: String,
        arity: usize,
        position: usize,
    },
    #[error("concept node `{id}` has type `{ty}` but marker `{marker}` has type `{expected}`")]
    TauMismatch {
        id: String,
        ty: String,
        marker: String,
        expected: String,
    },
    #[error("graphs are defined over different supports")]
    SupportMismatch,
    #[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Many(Vec<GraphError>),
}

impl GraphError {
    /// Flattened list of individual problems.
    pub fn issues(&self) -> Vec<&GraphError> {
        match self {
            GraphError::Many(list) => list.iter().flat_map(|e| e.issues()).collect(),
            other => vec![other],
        }
    }
}

fn collect(mut errors: Vec<GraphError>) -> Result<(), GraphError> {
    match errors.len() {
        0 => Ok(()),
        1 => Err(errors.pop().unwrap()),
        _ => Err(GraphError::Many(errors)),
    }
}

/// Raw, unvalidated graph declarations by name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawGraph {
    /// `(id, concept type, marker)`
    pub concepts: Vec<(String, String, Option<String>)>,
    /// `(id, relation type, argument ids)`
    pub relations: Vec<(String, String, Vec<String>)>,
}

impl RawGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn concept(mut self, id: &str, ty: &str, marker: Option<&str>) -> Self {
        self.concepts
            .push((id.to_string(), ty.to_string(), marker.map(str::to_string)));
        self
    }

    pub fn relation(mut self, id: &str, ty: &str, args: &[&str]) -> Self {
        self.relations.push((
            id.to_string(),
            ty.to_string(),
            args.iter().map(|a| a.to_string()).collect(),
        ));
        self
    }

    pub fn validate(&self, support: &Arc<Support>) -> Result<SimpleGraph, GraphError> {
        validate_graph(self, support)
    }
}

/// Validates raw declarations against a support, reporting every problem.
pub fn validate_graph(raw: &RawGraph, support: &Arc<Support>) -> Result<SimpleGraph, GraphError> {
    let mut g = SimpleGraph::new(Arc::clone(support));
    let mut errors = Vec::new();
    for (id, ty, marker) in &raw.concepts {
        if !is_valid_id(id) {
            errors.push(GraphError::InvalidId(id.clone()));
            continue;
        }
        let label = match support.label(ty, marker.as_deref()) {
            Ok(l) => l,
            Err(e) => {
                errors.push(e.into());
                continue;
            }
        };
        if let Marker::Individual(m) = label.marker {
            if support.tau(m) != label.ty {
                errors.push(GraphError::TauMismatch {
                    id: id.clone(),
                    ty: ty.clone(),
                    marker: support.marker_name(m).to_string(),
                    expected: support.concept_name(support.tau(m)).to_string(),
                });
                continue;
            }
        }
        if let Err(e) = g.add_concept(NodeId::new(id.as_str()), label) {
            errors.push(e);
        }
    }
    for (id, ty, args) in &raw.relations {
        if !is_valid_id(id) {
            errors.push(GraphError::InvalidId(id.clone()));
            continue;
        }
        let rt = match support.relation_type(ty, args.len()) {
            Some(rt) => rt,
            None => {
                let arities = support.relation_arities(ty);
                match arities.first() {
                    None => {
                        errors.push(SupportError::UnknownRelation(ty.clone(), args.len()).into())
                    }
                    Some(&arity) if arity > args.len() => {
                        errors.push(GraphError::MissingPosition {
                            id: id.clone(),
                            ty: ty.clone(),
                            arity,
                            position: args.len() + 1,
                        })
                    }
                    Some(&arity) => errors.push(GraphError::ExtraPosition {
                        id: id.clone(),
                        ty: ty.clone(),
                        arity,
                        position: arity + 1,
                    }),
                }
                continue;
            }
        };
        let mut indices = Vec::with_capacity(args.len());
        let mut ok = true;
        for a in args {
            match g.index.get(&NodeId::new(a.as_str())) {
                Some(NodeRef::Concept(c)) => indices.push(*c),
                Some(NodeRef::Relation(_)) => {
                    errors.push(GraphError::NotAConcept(id.clone(), a.clone()));
                    ok = false;
                }
                None => {
                    errors.push(GraphError::UnknownNode(a.clone()));
                    ok = false;
                }
            }
        }
        if ok {
            if let Err(e) = g.add_relation(NodeId::new(id.as_str()), rt, indices) {
                errors.push(e);
            }
        }
    }
    collect(errors)?;
    Ok(g)
}

/// A simple graph over a support.
#[derive(Debug, Clone)]
pub struct SimpleGraph {
    support: Arc<Support>,
    concepts: Vec<ConceptNode>,
    relations: Vec<RelationNode>,
    index: HashMap<NodeId, NodeRef>,
    incidence: Vec<Vec<(usize, usize)>>,
    fresh: u64,
}

impl PartialEq for SimpleGraph {
    fn eq(&self, other: &Self) -> bool {
        self.concepts == other.concepts && self.relations == other.relations
    }
}

impl Eq for SimpleGraph {}

impl SimpleGraph {
    pub fn new(support: Arc<Support>) -> Self {
        SimpleGraph {
            support,
            concepts: Vec::new(),
            relations: Vec::new(),
            index: HashMap::new(),
            incidence: Vec::new(),
            fresh: 0,
        }
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn concepts(&self) -> &[ConceptNode] {
        &self.concepts
    }

    pub fn relations(&self) -> &[RelationNode] {
        &self.relations
    }

    pub fn concept(&self, i: usize) -> &ConceptNode {
        &self.concepts[i]
    }

    pub fn relation(&self, i: usize) -> &RelationNode {
        &self.relations[i]
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn node_count(&self) -> usize {
        self.concepts.len() + self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.relations.is_empty()
    }

    pub fn lookup(&self, id: &str) -> Option<NodeRef> {
        self.index.get(&NodeId::new(id)).copied()
    }

    pub fn concept_index(&self, id: &str) -> Option<usize> {
        match self.lookup(id) {
            Some(NodeRef::Concept(i)) => Some(i),
            _ => None,
        }
    }

    pub fn relation_index(&self, id: &str) -> Option<usize> {
        match self.lookup(id) {
            Some(NodeRef::Relation(i)) => Some(i),
            _ => None,
        }
    }

    pub fn node_id(&self, node: NodeRef) -> &NodeId {
        match node {
            NodeRef::Concept(i) => &self.concepts[i].id,
            NodeRef::Relation(i) => &self.relations[i].id,
        }
    }

    /// `(relation index, position)` pairs incident to a concept node.
    pub fn incidence(&self, concept: usize) -> &[(usize, usize)] {
        &self.incidence[concept]
    }

    pub fn edge_count(&self) -> usize {
        self.relations.iter().map(|r| r.args.len()).sum()
    }

    pub fn contains_id(&self, id: &NodeId) -> bool {
        self.index.contains_key(id)
    }

    pub fn add_concept(&mut self, id: NodeId, label: ConceptLabel) -> Result<usize, GraphError> {
        if self.index.contains_key(&id) {
            return Err(GraphError::DuplicateId(id.0));
        }
        if !self.support.label_is_valid(&label) {
            let m = label.marker.individual().unwrap();
            return Err(GraphError::TauMismatch {
                id: id.0,
                ty: self.support.concept_name(label.ty).to_string(),
                marker: self.support.marker_name(m).to_string(),
                expected: self.support.concept_name(self.support.tau(m)).to_string(),
            });
        }
        let i = self.concepts.len();
        self.index.insert(id.clone(), NodeRef::Concept(i));
        self.concepts.push(ConceptNode { id, label });
        self.incidence.push(Vec::new());
        Ok(i)
    }

    pub fn add_relation(
        &mut self,
        id: NodeId,
        ty: RelationType,
        args: Vec<usize>,
    ) -> Result<usize, GraphError> {
        if self.index.contains_key(&id) {
            return Err(GraphError::DuplicateId(id.0));
        }
        let arity = self.support.arity(ty);
        if args.len() != arity {
            let name = self.support.relation_name(ty).to_string();
            return Err(if args.len() < arity {
                GraphError::MissingPosition {
                    id: id.0,
                    ty: name,
                    arity,
                    position: args.len() + 1,
                }
            } else {
                GraphError::ExtraPosition {
                    id: id.0,
                    ty: name,
                    arity,
                    position: arity + 1,
                }
            });
        }
        if let Some(&bad) = args.iter().find(|&&a| a >= self.concepts.len()) {
            return Err(GraphError::UnknownNode(format!("#{bad}")));
        }
        let i = self.relations.len();
        for (pos, &a) in args.iter().enumerate() {
            self.incidence[a].push((i, pos));
        }
        self.index.insert(id.clone(), NodeRef::Relation(i));
        self.relations.push(RelationNode { id, ty, args });
        Ok(i)
    }

    /// A fresh identifier derived from `base`, unused in this graph.
    pub fn fresh_id(&mut self, base: &NodeId) -> NodeId {
        loop {
            self.fresh += 1;
            let id = NodeId(format!("~{:06}.{}", self.fresh, base.base()));
            if !self.index.contains_key(&id) {
                return id;
            }
        }
    }

    /// Same graph viewed over a support that extends the current one.
    pub fn with_support(&self, support: &Arc<Support>) -> Result<SimpleGraph, GraphError> {
        if Arc::ptr_eq(support, &self.support) {
            return Ok(self.clone());
        }
        if !support.extends(&self.support) {
            return Err(GraphError::SupportMismatch);
        }
        let mut g = self.clone();
        g.support = Arc::clone(support);
        Ok(g)
    }

    /// Concept node holding the given individual marker, if any.
    pub fn individual_node(&self, marker: crate::support::MarkerId) -> Option<usize> {
        self.concepts
            .iter()
            .position(|c| c.label.marker == Marker::Individual(marker))
    }

    /// Subgraph keeping the flagged nodes. Relation nodes whose arguments are
    /// not all kept are dropped. Returns the graph and the old→new concept and
    /// relation index maps.
    pub fn retain(
        &self,
        keep_concepts: &[bool],
        keep_relations: &[bool],
    ) -> (SimpleGraph, Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut g = SimpleGraph::new(Arc::clone(&self.support));
        g.fresh = self.fresh;
        let mut cmap = vec![None; self.concepts.len()];
        for (i, c) in self.concepts.iter().enumerate() {
            if keep_concepts[i] {
                cmap[i] = Some(g.add_concept(c.id.clone(), c.label).unwrap());
            }
        }
        let mut rmap = vec![None; self.relations.len()];
        for (i, r) in self.relations.iter().enumerate() {
            if !keep_relations[i] {
                continue;
            }
            let args: Option<Vec<usize>> = r.args.iter().map(|&a| cmap[a]).collect();
            if let Some(args) = args {
                rmap[i] = Some(g.add_relation(r.id.clone(), r.ty, args).unwrap());
            }
        }
        (g, cmap, rmap)
    }

    /// Graph without the given node; removing a concept node also removes its
    /// incident relation nodes.
    pub fn without(&self, node: NodeRef) -> SimpleGraph {
        let mut kc = vec![true; self.concepts.len()];
        let mut kr = vec![true; self.relations.len()];
        match node {
            NodeRef::Concept(i) => kc[i] = false,
            NodeRef::Relation(i) => kr[i] = false,
        }
        self.retain(&kc, &kr).0
    }

    /// Pairs of relation nodes with the same type and identical ordered
    /// arguments.
    pub fn twins(&self) -> Vec<(usize, usize)> {
        let mut seen: HashMap<(RelationType, &[usize]), usize> = HashMap::new();
        let mut out = Vec::new();
        for (i, r) in self.relations.iter().enumerate() {
            match seen.get(&(r.ty, r.args.as_slice())) {
                Some(&j) => out.push((j, i)),
                None => {
                    seen.insert((r.ty, r.args.as_slice()), i);
                }
            }
        }
        out
    }

    pub fn has_relation(&self, ty: RelationType, args: &[usize]) -> bool {
        match args.first() {
            Some(&a) => self.incidence[a].iter().any(|&(r, p)| {
                p == 0 && self.relations[r].ty == ty && self.relations[r].args == args
            }),
            None => self
                .relations
                .iter()
                .any(|r| r.ty == ty && r.args.is_empty()),
        }
    }

    pub fn is_normal(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.concepts
            .iter()
            .filter_map(|c| c.label.marker.individual())
            .all(|m| seen.insert(m))
    }

    /// Merges concept nodes sharing an individual marker, keeping the
    /// lexicographically smallest identifier. Returns the graph and the
    /// old→new concept index map; relation indices are unchanged.
    pub fn normal_form_with_map(&self) -> (SimpleGraph, Vec<usize>) {
        let mut keeper: HashMap<crate::support::MarkerId, usize> = HashMap::new();
        for (i, c) in self.concepts.iter().enumerate() {
            if let Marker::Individual(m) = c.label.marker {
                keeper
                    .entry(m)
                    .and_modify(|k| {
                        if c.id < self.concepts[*k].id {
                            *k = i;
                        }
                    })
                    .or_insert(i);
            }
        }
        let representative = |i: usize| match self.concepts[i].label.marker {
            Marker::Individual(m) => keeper[&m],
            Marker::Generic => i,
        };
        let mut g = SimpleGraph::new(Arc::clone(&self.support));
        g.fresh = self.fresh;
        let mut new_index = vec![usize::MAX; self.concepts.len()];
        for (i, c) in self.concepts.iter().enumerate() {
            if representative(i) == i {
                new_index[i] = g.add_concept(c.id.clone(), c.label).unwrap();
            }
        }
        let map: Vec<usize> = (0..self.concepts.len())
            .map(|i| new_index[representative(i)])
            .collect();
        for r in &self.relations {
            let args = r.args.iter().map(|&a| map[a]).collect();
            g.add_relation(r.id.clone(), r.ty, args).unwrap();
        }
        (g, map)
    }

    pub fn normal_form(&self) -> SimpleGraph {
        self.normal_form_with_map().0
    }

    /// Canonical text of the graph in internal order.
    pub fn canonical_text(&self) -> String {
        let s = &self.support;
        let mut out = String::new();
        for c in &self.concepts {
            out.push_str(c.id.as_str());
            out.push_str(" : ");
            out.push_str(s.concept_name(c.label.ty));
            if let Marker::Individual(m) = c.label.marker {
                out.push_str(" = ");
                out.push_str(s.marker_name(m));
            }
            out.push('\n');
        }
        for r in &self.relations {
            out.push_str(r.id.as_str());
            out.push_str(" : ");
            out.push_str(s.relation_name(r.ty));
            out.push('(');
            for (k, &a) in r.args.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push_str(self.concepts[a].id.as_str());
            }
            out.push_str(")\n");
        }
        out
    }

    /// Short stable digest of [`SimpleGraph::canonical_text`].
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        hex::encode(&digest[..8])
    }

    /// Multiset of concept labels and relation signatures, independent of
    /// node identifiers.
    pub fn label_census(&self) -> BTreeMap<String, usize> {
        let mut census = BTreeMap::new();
        for c in &self.concepts {
            *census
                .entry(format!("c:{}", self.support.display_label(&c.label)))
                .or_insert(0) += 1;
        }
        for r in &self.relations {
            *census
                .entry(format!(
                    "r:{}/{}",
                    self.support.relation_name(r.ty),
                    r.args.len()
                ))
                .or_insert(0) += 1;
        }
        census
    }

    pub(crate) fn set_fresh_floor(&mut self, floor: u64) {
        self.fresh = self.fresh.max(floor);
    }

    pub(crate) fn fresh_counter(&self) -> u64 {
        self.fresh
    }
}

impl fmt::Display for SimpleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

/// Node-disjoint union of graphs over a common support. Identifiers that
/// collide with earlier ones get primes appended.
pub fn disjoint_union(
    support: &Arc<Support>,
    graphs: &[&SimpleGraph],
) -> Result<SimpleGraph, GraphError> {
    let mut out = SimpleGraph::new(Arc::clone(support));
    for g in graphs {
        if !support.extends(g.support()) {
            return Err(GraphError::SupportMismatch);
        }
        append(&mut out, g);
    }
    Ok(out)
}

/// Appends a copy of `g` to `out`, renaming colliding identifiers. Returns
/// the concept and relation index maps of the copy.
pub fn append(out: &mut SimpleGraph, g: &SimpleGraph) -> (Vec<usize>, Vec<usize>) {
    let rename = |out: &SimpleGraph, id: &NodeId| {
        let mut id = id.clone();
        while out.contains_id(&id) {
            id.0.push('\'');
        }
        id
    };
    let mut cmap = Vec::with_capacity(g.concept_count());
    for c in g.concepts() {
        let id = rename(out, &c.id);
        cmap.push(out.add_concept(id, c.label).unwrap());
    }
    let mut rmap = Vec::with_capacity(g.relation_count());
    for r in g.relations() {
        let id = rename(out, &r.id);
        let args = r.args.iter().map(|&a| cmap[a]).collect();
        rmap.push(out.add_relation(id, r.ty, args).unwrap());
    }
    out.set_fresh_floor(g.fresh_counter());
    (cmap, rmap)
}
