//! Ontology vocabulary: concept and relation type orders, individual markers
//! and their typing map.
//!
//! A [`Support`] is built once from raw declarations ([`SupportDecl`]) and is
//! immutable afterwards. Reachability in each type order is precomputed at
//! validation time so that every `leq` query is a table lookup.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

/// Default ceiling on relation arity.
pub const DEFAULT_MAX_ARITY: usize = 8;

/// Name of the reserved concept type used when a negative constraint is
/// rewritten as a positive one.
pub const NOT_THERE: &str = "NotThere";

/// Name given to the single concept type of a flat support.
pub const FLAT_TOP: &str = "⊤";

static NEXT_SUPPORT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConceptType(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationType(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarkerId(pub u32);

/// Marker of a concept node: either the generic marker or an individual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Marker {
    Generic,
    Individual(MarkerId),
}

impl Marker {
    pub fn is_generic(self) -> bool {
        matches!(self, Marker::Generic)
    }

    pub fn individual(self) -> Option<MarkerId> {
        match self {
            Marker::Generic => None,
            Marker::Individual(m) => Some(m),
        }
    }
}

/// Label of a concept node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConceptLabel {
    pub ty: ConceptType,
    pub marker: Marker,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SupportError {
    #[error("duplicate concept type `{0}`")]
    DuplicateConcept(String),
    #[error("duplicate relation type `{0}/{1}`")]
    DuplicateRelation(String, usize),
    #[error("duplicate individual marker `{0}`")]
    DuplicateMarker(String),
    #[error("`{0}` is declared both as a concept type and a relation type")]
    ConceptRelationClash(String),
    #[error("marker `{0}` clashes with a type name")]
    MarkerClash(String),
    #[error("unknown concept type `{0}`")]
    UnknownConcept(String),
    #[error("unknown relation type `{0}/{1}`")]
    UnknownRelation(String, usize),
    #[error("unknown individual marker `{0}`")]
    UnknownMarker(String),
    #[error("relation type `{0}/{1}` cannot be ordered under `{2}/{3}`: arities differ")]
    CrossArity(String, usize, String, usize),
    #[error("cycle in type order through {}", .0.join(", "))]
    Cycle(Vec<String>),
    #[error("marker `{0}` has no type")]
    MissingTau(String),
    #[error("relation type `{0}` has arity {1}, outside 1..={2}")]
    BadArity(String, usize, usize),
    #[error("`{NOT_THERE}` is reserved for constraint rewriting")]
    ReservedNotThere,
    #[error("{}", display_list(.0))]
    Many(Vec<SupportError>),
}

fn display_list(errors: &[SupportError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Raw support declarations, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupportDecl {
    /// `(name, direct supertypes)`
    pub concepts: Vec<(String, Vec<String>)>,
    /// `(name, arity, direct supertypes)`; supertypes are `(name, arity)`.
    pub relations: Vec<(String, usize, Vec<(String, usize)>)>,
    /// `(marker, concept type)`
    pub markers: Vec<(String, String)>,
    pub max_arity: Option<usize>,
}

impl SupportDecl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn concept(mut self, name: &str, parents: &[&str]) -> Self {
        self.concepts.push((
            name.to_string(),
            parents.iter().map(|p| p.to_string()).collect(),
        ));
        self
    }

    pub fn relation(mut self, name: &str, arity: usize, parents: &[&str]) -> Self {
        self.relations.push((
            name.to_string(),
            arity,
            parents.iter().map(|p| (p.to_string(), arity)).collect(),
        ));
        self
    }

    pub fn individual(mut self, marker: &str, ty: &str) -> Self {
        self.markers.push((marker.to_string(), ty.to_string()));
        self
    }

    pub fn validate(self) -> Result<Support, SupportError> {
        validate_support(self)
    }
}

/// A finite partial order stored as Hasse edges plus its reflexive-transitive
/// closure.
#[derive(Debug, Clone)]
pub struct TypeHierarchy {
    len: usize,
    parents: Vec<Vec<usize>>,
    closure: Vec<bool>,
}

impl TypeHierarchy {
    fn build(parents: Vec<Vec<usize>>) -> Result<Self, Vec<usize>> {
        let len = parents.len();
        let mut closure = vec![false; len * len];
        for start in 0..len {
            let mut stack = vec![start];
            while let Some(node) = stack.pop() {
                if closure[start * len + node] {
                    continue;
                }
                closure[start * len + node] = true;
                stack.extend(parents[node].iter().copied());
            }
        }
        let cyclic: Vec<usize> = (0..len)
            .filter(|&a| {
                parents[a].contains(&a)
                    || (0..len).any(|b| b != a && closure[a * len + b] && closure[b * len + a])
            })
            .collect();
        if !cyclic.is_empty() {
            return Err(cyclic);
        }
        Ok(Self {
            len,
            parents,
            closure,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.closure[a * self.len + b]
    }

    pub fn parents(&self, a: usize) -> &[usize] {
        &self.parents[a]
    }

    /// All `b` with `a <= b`, including `a`, in index order.
    pub fn supertypes(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&b| self.leq(a, b))
    }
}

/// A validated support: concept types, relation types (per arity), individual
/// markers and the typing map of markers.
#[derive(Debug, Clone)]
pub struct Support {
    id: u64,
    lineage: Vec<u64>,
    decl: SupportDecl,
    concept_names: Vec<String>,
    concept_index: HashMap<String, ConceptType>,
    concepts: TypeHierarchy,
    relation_names: Vec<String>,
    relation_arity: Vec<usize>,
    relation_index: HashMap<(String, usize), RelationType>,
    relations: TypeHierarchy,
    marker_names: Vec<String>,
    marker_index: HashMap<String, MarkerId>,
    tau: Vec<ConceptType>,
    max_arity: usize,
    not_there: Option<ConceptType>,
}

/// Validates raw declarations into a [`Support`].
pub fn validate_support(decl: SupportDecl) -> Result<Support, SupportError> {
    build_support(decl, None, &[])
}

fn build_support(
    decl: SupportDecl,
    not_there: Option<&str>,
    lineage: &[u64],
) -> Result<Support, SupportError> {
    let mut errors = Vec::new();
    let max_arity = decl.max_arity.unwrap_or(DEFAULT_MAX_ARITY);

    let mut concept_names = Vec::new();
    let mut concept_index = HashMap::new();
    for (name, _) in &decl.concepts {
        if name == NOT_THERE && not_there.is_none() {
            errors.push(SupportError::ReservedNotThere);
        }
        if concept_index
            .insert(name.clone(), ConceptType(concept_names.len() as u32))
            .is_some()
        {
            errors.push(SupportError::DuplicateConcept(name.clone()));
        }
        concept_names.push(name.clone());
    }
    let mut concept_parents = vec![Vec::new(); concept_names.len()];
    for (i, (_, parents)) in decl.concepts.iter().enumerate() {
        for p in parents {
            match concept_index.get(p) {
                Some(t) => concept_parents[i].push(t.0 as usize),
                None => errors.push(SupportError::UnknownConcept(p.clone())),
            }
        }
    }

    let mut relation_names = Vec::new();
    let mut relation_arity = Vec::new();
    let mut relation_index = HashMap::new();
    for (name, arity, _) in &decl.relations {
        if *arity == 0 || *arity > max_arity {
            errors.push(SupportError::BadArity(name.clone(), *arity, max_arity));
        }
        if concept_index.contains_key(name) {
            errors.push(SupportError::ConceptRelationClash(name.clone()));
        }
        let key = (name.clone(), *arity);
        if relation_index
            .insert(key, RelationType(relation_names.len() as u32))
            .is_some()
        {
            errors.push(SupportError::DuplicateRelation(name.clone(), *arity));
        }
        relation_names.push(name.clone());
        relation_arity.push(*arity);
    }
    let mut relation_parents = vec![Vec::new(); relation_names.len()];
    for (i, (name, arity, parents)) in decl.relations.iter().enumerate() {
        for (pname, parity) in parents {
            if parity != arity {
                errors.push(SupportError::CrossArity(
                    name.clone(),
                    *arity,
                    pname.clone(),
                    *parity,
                ));
                continue;
            }
            match relation_index.get(&(pname.clone(), *parity)) {
                Some(t) => relation_parents[i].push(t.0 as usize),
                None => {
                    if let Some(other) = relation_names
                        .iter()
                        .enumerate()
                        .find(|(_, n)| *n == pname)
                        .map(|(j, _)| relation_arity[j])
                    {
                        errors.push(SupportError::CrossArity(
                            name.clone(),
                            *arity,
                            pname.clone(),
                            other,
                        ));
                    } else {
                        errors.push(SupportError::UnknownRelation(pname.clone(), *parity));
                    }
                }
            }
        }
    }

    let mut marker_names = Vec::new();
    let mut marker_index = HashMap::new();
    let mut tau = Vec::new();
    for (marker, ty) in &decl.markers {
        if concept_index.contains_key(marker) || relation_names.contains(marker) {
            errors.push(SupportError::MarkerClash(marker.clone()));
        }
        if marker_index
            .insert(marker.clone(), MarkerId(marker_names.len() as u32))
            .is_some()
        {
            errors.push(SupportError::DuplicateMarker(marker.clone()));
        }
        match concept_index.get(ty) {
            Some(t) => tau.push(*t),
            None => {
                if ty.is_empty() {
                    errors.push(SupportError::MissingTau(marker.clone()));
                } else {
                    errors.push(SupportError::UnknownConcept(ty.clone()));
                }
                tau.push(ConceptType(0));
            }
        }
        marker_names.push(marker.clone());
    }

    let concepts = match TypeHierarchy::build(concept_parents) {
        Ok(h) => Some(h),
        Err(cycle) => {
            errors.push(SupportError::Cycle(
                cycle.iter().map(|&i| concept_names[i].clone()).collect(),
            ));
            None
        }
    };
    let relations = match TypeHierarchy::build(relation_parents) {
        Ok(h) => Some(h),
        Err(cycle) => {
            errors.push(SupportError::Cycle(
                cycle
                    .iter()
                    .map(|&i| format!("{}/{}", relation_names[i], relation_arity[i]))
                    .collect(),
            ));
            None
        }
    };

    if !errors.is_empty() {
        return Err(if errors.len() == 1 {
            errors.pop().unwrap()
        } else {
            SupportError::Many(errors)
        });
    }

    let id = NEXT_SUPPORT_ID.fetch_add(1, Ordering::Relaxed);
    let mut full_lineage = vec![id];
    full_lineage.extend_from_slice(lineage);
    let not_there = not_there.and_then(|n| concept_index.get(n).copied());
    Ok(Support {
        id,
        lineage: full_lineage,
        decl,
        concept_names,
        concept_index,
        concepts: concepts.unwrap(),
        relation_names,
        relation_arity,
        relation_index,
        relations: relations.unwrap(),
        marker_names,
        marker_index,
        tau,
        max_arity,
        not_there,
    })
}

/// Vocabulary of a set of function-free formulas.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub predicates: Vec<(String, usize)>,
    pub constants: Vec<String>,
}

/// Builds the flat support of a vocabulary: one concept type, one relation
/// type per predicate, every constant typed by the single concept type, and
/// no comparable pair of distinct types.
pub fn flat_support(vocabulary: &Vocabulary) -> Result<Support, SupportError> {
    flat_support_with_top(vocabulary, FLAT_TOP)
}

pub(crate) fn flat_support_with_top(
    vocabulary: &Vocabulary,
    top: &str,
) -> Result<Support, SupportError> {
    let mut decl = SupportDecl::new().concept(top, &[]);
    decl.max_arity = vocabulary
        .predicates
        .iter()
        .map(|(_, a)| *a)
        .max()
        .map(|a| a.max(DEFAULT_MAX_ARITY));
    for (name, arity) in &vocabulary.predicates {
        decl.relations.push((name.clone(), *arity, Vec::new()));
    }
    for constant in &vocabulary.constants {
        decl.markers.push((constant.clone(), top.to_string()));
    }
    validate_support(decl)
}

impl Support {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn decl(&self) -> &SupportDecl {
        &self.decl
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    /// True if `self` is `other` or was obtained from it by [`Support::extend`].
    pub fn extends(&self, other: &Support) -> bool {
        self.lineage.contains(&other.id)
    }

    pub fn concept_types(&self) -> &TypeHierarchy {
        &self.concepts
    }

    pub fn relation_types(&self) -> &TypeHierarchy {
        &self.relations
    }

    pub fn concept_count(&self) -> usize {
        self.concept_names.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relation_names.len()
    }

    pub fn marker_count(&self) -> usize {
        self.marker_names.len()
    }

    pub fn concept_type(&self, name: &str) -> Option<ConceptType> {
        self.concept_index.get(name).copied()
    }

    pub fn relation_type(&self, name: &str, arity: usize) -> Option<RelationType> {
        self.relation_index.get(&(name.to_string(), arity)).copied()
    }

    /// Arities under which a relation name is declared.
    pub fn relation_arities(&self, name: &str) -> Vec<usize> {
        self.relation_names
            .iter()
            .zip(&self.relation_arity)
            .filter(|(n, _)| *n == name)
            .map(|(_, a)| *a)
            .collect()
    }

    pub fn marker(&self, name: &str) -> Option<MarkerId> {
        self.marker_index.get(name).copied()
    }

    pub fn concept_name(&self, t: ConceptType) -> &str {
        &self.concept_names[t.0 as usize]
    }

    pub fn relation_name(&self, t: RelationType) -> &str {
        &self.relation_names[t.0 as usize]
    }

    pub fn arity(&self, t: RelationType) -> usize {
        self.relation_arity[t.0 as usize]
    }

    pub fn marker_name(&self, m: MarkerId) -> &str {
        &self.marker_names[m.0 as usize]
    }

    pub fn tau(&self, m: MarkerId) -> ConceptType {
        self.tau[m.0 as usize]
    }

    pub fn not_there(&self) -> Option<ConceptType> {
        self.not_there
    }

    pub fn is_not_there(&self, t: ConceptType) -> bool {
        self.not_there == Some(t)
    }

    pub fn leq_concept(&self, a: ConceptType, b: ConceptType) -> bool {
        self.concepts.leq(a.0 as usize, b.0 as usize)
    }

    pub fn leq_relation(&self, a: RelationType, b: RelationType) -> bool {
        self.relations.leq(a.0 as usize, b.0 as usize)
    }

    pub fn leq_label(&self, a: &ConceptLabel, b: &ConceptLabel) -> bool {
        self.leq_concept(a.ty, b.ty) && (b.marker.is_generic() || a.marker == b.marker)
    }

    /// `leq` on type names; errors on unknown names.
    pub fn leq_type(&self, a: &str, b: &str) -> Result<bool, SupportError> {
        let ta = self
            .concept_type(a)
            .ok_or_else(|| SupportError::UnknownConcept(a.to_string()))?;
        let tb = self
            .concept_type(b)
            .ok_or_else(|| SupportError::UnknownConcept(b.to_string()))?;
        Ok(self.leq_concept(ta, tb))
    }

    /// Builds a concept label from names, enforcing that an individual node is
    /// typed by its marker's type.
    pub fn label(&self, ty: &str, marker: Option<&str>) -> Result<ConceptLabel, SupportError> {
        let t = self
            .concept_type(ty)
            .ok_or_else(|| SupportError::UnknownConcept(ty.to_string()))?;
        let marker = match marker {
            None => Marker::Generic,
            Some(m) => {
                let id = self
                    .marker(m)
                    .ok_or_else(|| SupportError::UnknownMarker(m.to_string()))?;
                Marker::Individual(id)
            }
        };
        Ok(ConceptLabel { ty: t, marker })
    }

    pub fn label_is_valid(&self, label: &ConceptLabel) -> bool {
        match label.marker {
            Marker::Generic => true,
            Marker::Individual(m) => self.tau(m) == label.ty,
        }
    }

    pub fn display_label(&self, label: &ConceptLabel) -> String {
        match label.marker {
            Marker::Generic => self.concept_name(label.ty).to_string(),
            Marker::Individual(m) => {
                format!("{}:{}", self.concept_name(label.ty), self.marker_name(m))
            }
        }
    }

    /// Returns a new support with extra declarations appended. Existing type
    /// and marker identifiers are unchanged, and new types may only be placed
    /// under existing ones, so every order query on old types is preserved.
    pub fn extend(&self, extra: &SupportDecl) -> Result<Support, SupportError> {
        let mut decl = self.decl.clone();
        decl.concepts.extend(extra.concepts.iter().cloned());
        decl.relations.extend(extra.relations.iter().cloned());
        decl.markers.extend(extra.markers.iter().cloned());
        if let Some(a) = extra.max_arity {
            decl.max_arity = Some(a.max(self.max_arity));
        }
        let reserved = self.not_there.map(|_| NOT_THERE);
        build_support(decl, reserved, &self.lineage)
    }

    /// Support extended with the reserved `NotThere` concept type, which is
    /// incomparable with every other type. Returns `self` when already present.
    pub fn with_not_there(self: &Arc<Self>) -> Result<Arc<Support>, SupportError> {
        if self.not_there.is_some() {
            return Ok(Arc::clone(self));
        }
        if self.concept_index.contains_key(NOT_THERE) {
            return Err(SupportError::ReservedNotThere);
        }
        let mut decl = self.decl.clone();
        decl.concepts.push((NOT_THERE.to_string(), Vec::new()));
        build_support(decl, Some(NOT_THERE), &self.lineage).map(Arc::new)
    }

    /// A relation name of the given arity not yet used in this support.
    pub fn fresh_relation_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.relation_names.contains(&name)
            || self.concept_index.contains_key(&name)
            || self.marker_index.contains_key(&name)
        {
            name.push('\'');
        }
        name
    }

    pub fn concept_names(&self) -> impl Iterator<Item = &str> {
        self.concept_names.iter().map(String::as_str)
    }

    pub fn relation_signatures(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relation_names
            .iter()
            .map(String::as_str)
            .zip(self.relation_arity.iter().copied())
    }

    pub fn marker_names(&self) -> impl Iterator<Item = &str> {
        self.marker_names.iter().map(String::as_str)
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "support({} concept types, {} relation types, {} markers)",
            self.concept_count(),
            self.relation_count(),
            self.marker_count()
        )
    }
}

/// Returns whichever of the two supports extends the other, if any.
pub fn common_support<'a>(a: &'a Arc<Support>, b: &'a Arc<Support>) -> Option<&'a Arc<Support>> {
    if a.extends(b) {
        Some(a)
    } else if b.extends(a) {
        Some(b)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn office_support() -> Support {
        SupportDecl::new()
            .concept("Top", &[])
            .concept("Person", &["Top"])
            .concept("Researcher", &["Person"])
            .concept("Office", &["Top"])
            .relation("near", 2, &[])
            .relation("adjoin", 2, &["near"])
            .individual("K", "Researcher")
            .validate()
            .unwrap()
    }

    #[test]
    fn leq_type_follows_declared_order() {
        let s = office_support();
        assert!(s.leq_type("Researcher", "Person").unwrap());
        assert!(s.leq_type("Researcher", "Top").unwrap());
        assert!(s.leq_type("Person", "Person").unwrap());
        assert!(!s.leq_type("Person", "Researcher").unwrap());
        assert!(!s.leq_type("Office", "Person").unwrap());
        assert!(s.leq_type("Nope", "Person").is_err());
    }

    #[test]
    fn label_order_uses_generic_as_top_marker() {
        let s = office_support();
        let rk = s.label("Researcher", Some("K")).unwrap();
        let person = s.label("Person", None).unwrap();
        let r = s.label("Researcher", None).unwrap();
        assert!(s.leq_label(&rk, &person));
        assert!(s.leq_label(&rk, &rk));
        assert!(!s.leq_label(&r, &rk));
        assert!(!s.leq_label(&person, &r));
    }

    #[test]
    fn cycles_are_rejected() {
        let err = SupportDecl::new()
            .concept("a", &["b"])
            .concept("b", &["a"])
            .validate()
            .unwrap_err();
        assert!(matches!(err, SupportError::Cycle(_)), "{err}");
    }

    #[test]
    fn cross_arity_order_is_rejected() {
        let mut decl = SupportDecl::new().relation("t", 3, &[]);
        decl.relations.push(("b".into(), 2, vec![("t".into(), 3)]));
        let err = decl.validate().unwrap_err();
        assert!(matches!(err, SupportError::CrossArity(..)), "{err}");
    }

    #[test]
    fn unknown_marker_type_is_rejected() {
        let err = SupportDecl::new()
            .concept("A", &[])
            .individual("m", "")
            .validate()
            .unwrap_err();
        assert!(matches!(err, SupportError::MissingTau(_)));
        let err = SupportDecl::new()
            .concept("A", &[])
            .individual("m", "B")
            .validate()
            .unwrap_err();
        assert!(matches!(err, SupportError::UnknownConcept(_)));
    }

    #[test]
    fn several_problems_are_reported_together() {
        let err = SupportDecl::new()
            .concept("A", &["Missing"])
            .concept("A", &[])
            .validate()
            .unwrap_err();
        match err {
            SupportError::Many(list) => assert_eq!(list.len(), 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn arity_ceiling_is_enforced() {
        let err = SupportDecl::new()
            .relation("big", 9, &[])
            .validate()
            .unwrap_err();
        assert!(matches!(err, SupportError::BadArity(_, 9, 8)));
        let mut decl = SupportDecl::new().relation("big", 9, &[]);
        decl.max_arity = Some(12);
        assert!(decl.validate().is_ok());
    }

    #[test]
    fn flat_support_examples() {
        let v = Vocabulary {
            predicates: vec![("r".into(), 2), ("s".into(), 2), ("u".into(), 2)],
            constants: vec!["a".into()],
        };
        let s = flat_support(&v).unwrap();
        assert_eq!(s.concept_count(), 1);
        assert_eq!(s.relation_count(), 3);
        assert_eq!(s.tau(s.marker("a").unwrap()), ConceptType(0));

        let empty = flat_support(&Vocabulary::default()).unwrap();
        assert_eq!(empty.concept_count(), 1);
        assert_eq!(empty.relation_count(), 0);

        let v = Vocabulary {
            predicates: vec![("p".into(), 1), ("p".into(), 2)],
            constants: vec![],
        };
        let s = flat_support(&v).unwrap();
        let p1 = s.relation_type("p", 1).unwrap();
        let p2 = s.relation_type("p", 2).unwrap();
        assert_ne!(p1, p2);
        assert!(!s.leq_relation(p1, p2) && !s.leq_relation(p2, p1));

        let dup = Vocabulary {
            predicates: vec![("p".into(), 1), ("p".into(), 1)],
            constants: vec![],
        };
        assert!(flat_support(&dup).is_err());
    }

    #[test]
    fn not_there_is_reserved_and_incomparable() {
        let s = Arc::new(office_support());
        let ext = s.with_not_there().unwrap();
        let nt = ext.not_there().unwrap();
        assert!(ext.extends(&s));
        for t in 0..ext.concept_count() as u32 {
            let t = ConceptType(t);
            if t != nt {
                assert!(!ext.leq_concept(t, nt) && !ext.leq_concept(nt, t));
            }
        }
        assert!(SupportDecl::new()
            .concept(NOT_THERE, &[])
            .validate()
            .is_err());
    }
}
