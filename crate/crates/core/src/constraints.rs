//! Positive and negative constraints.

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{irredundant_form, Folding, FormsError};
use crate::graph::{GraphError, NodeId, SimpleGraph};
use crate::homomorphism::{
    exists_extension, exists_projection, for_each_projection, PartialProjection, Projection,
    ProjectionError,
};
use crate::rules::{Color, ColoredGraph, RuleError};
use crate::support::ConceptLabel;
use crate::support::{Marker, SupportError, NOT_THERE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Support(#[from] SupportError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("constraint `{0}` is not negative")]
    NotNegative(String),
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub colored: ColoredGraph,
    pub polarity: Polarity,
}

impl Constraint {
    pub fn new(colored: ColoredGraph, polarity: Polarity) -> Self {
        Constraint { colored, polarity }
    }

    pub fn name(&self) -> &str {
        &self.colored.name
    }

    pub fn trigger(&self) -> &SimpleGraph {
        self.colored.zero_part()
    }
}

/// A trigger projection that breaks a constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub polarity: Polarity,
    /// Trigger node id -> node id of the checked graph.
    pub map: BTreeMap<String, String>,
    /// Trigger projection into the graph the check ran on (the irredundant
    /// form for positive constraints).
    #[serde(skip)]
    pub projection: Projection,
}

fn partial_of(c: &ColoredGraph, pi: &Projection) -> PartialProjection {
    let mut p = PartialProjection::empty(c.graph());
    for (z, &gi) in c.zero_concepts().iter().enumerate() {
        p.concepts[gi] = Some(pi.concepts[z]);
    }
    for (z, &gi) in c.zero_relations().iter().enumerate() {
        p.relations[gi] = Some(pi.relations[z]);
    }
    p
}

/// Checks constraints against one graph, computing its irredundant form at
/// most once.
pub struct Checker<'a> {
    graph: &'a SimpleGraph,
    core: Option<Folding>,
}

impl<'a> Checker<'a> {
    pub fn new(graph: &'a SimpleGraph) -> Self {
        Checker { graph, core: None }
    }

    /// Reuses an irredundant form computed elsewhere.
    pub fn with_core(graph: &'a SimpleGraph, core: Folding) -> Self {
        Checker {
            graph,
            core: Some(core),
        }
    }

    pub fn core(&mut self) -> Result<&SimpleGraph, ConstraintError> {
        if self.core.is_none() {
            self.core = Some(irredundant_form(self.graph)?);
        }
        Ok(&self.core.as_ref().unwrap().core)
    }

    /// Violations of `c`, up to `limit`.
    pub fn violations(
        &mut self,
        c: &Constraint,
        limit: Option<usize>,
    ) -> Result<Vec<Violation>, ConstraintError> {
        let target = match c.polarity {
            Polarity::Positive => self.core()?.clone(),
            Polarity::Negative => self.graph.clone(),
        };
        let colored = &c.colored;
        let trigger = colored.zero_part();
        // Disconnected positive constraint: the obligation either holds
        // globally or fails for every trigger projection.
        let disconnected_holds =
            if c.polarity == Polarity::Positive && colored.classify().disconnected {
                Some(exists_projection(&colored.one_part(), &target)?)
            } else {
                None
            };
        let mut out = Vec::new();
        let mut error = None;
        for_each_projection(trigger, &target, None, |pi| {
            let violated = match (c.polarity, disconnected_holds) {
                (Polarity::Positive, Some(holds)) => !holds,
                (polarity, _) => {
                    match exists_extension(colored.graph(), &partial_of(colored, pi), &target) {
                        Ok(ext) => (polarity == Polarity::Positive) != ext,
                        Err(e) => {
                            error = Some(e);
                            return ControlFlow::Break(());
                        }
                    }
                }
            };
            if violated {
                out.push(Violation {
                    constraint: colored.name.clone(),
                    polarity: c.polarity,
                    map: pi.id_map(trigger, &target),
                    projection: pi.clone(),
                });
                if limit.is_some_and(|l| out.len() >= l) {
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        })?;
        if let Some(e) = error {
            return Err(e.into());
        }
        Ok(out)
    }

    pub fn satisfies(&mut self, c: &Constraint) -> Result<bool, ConstraintError> {
        Ok(self.violations(c, Some(1))?.is_empty())
    }

    /// First violation among `constraints`, in order.
    pub fn first_violation(
        &mut self,
        constraints: &[Constraint],
    ) -> Result<Option<Violation>, ConstraintError> {
        for c in constraints {
            if let Some(v) = self.violations(c, Some(1))?.into_iter().next() {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }
}

pub fn violations(
    g: &SimpleGraph,
    c: &Constraint,
    limit: Option<usize>,
) -> Result<Vec<Violation>, ConstraintError> {
    Checker::new(g).violations(c, limit)
}

pub fn satisfies(g: &SimpleGraph, c: &Constraint) -> Result<bool, ConstraintError> {
    Checker::new(g).satisfies(c)
}

/// Rewrites a negative constraint as a positive one: the whole graph becomes
/// the trigger and the obligation is a single generic `NotThere` node.
pub fn negative_to_positive(c: &Constraint) -> Result<Constraint, ConstraintError> {
    if c.polarity != Polarity::Negative {
        return Err(ConstraintError::NotNegative(c.name().to_string()));
    }
    let support = c.colored.support().with_not_there()?;
    let mut graph = c.colored.graph().with_support(&support)?;
    let ty = support.not_there().expect("support has NotThere");
    let mut id = NodeId::new(NOT_THERE.to_lowercase());
    while graph.contains_id(&id) {
        id.0.push('\'');
    }
    graph.add_concept(
        id,
        ConceptLabel {
            ty,
            marker: Marker::Generic,
        },
    )?;
    let mut cc = vec![Color::Zero; graph.concept_count()];
    *cc.last_mut().unwrap() = Color::One;
    let rc = vec![Color::Zero; graph.relation_count()];
    let colored = ColoredGraph::new(c.name().to_string(), graph, cc, rc)?;
    Ok(Constraint::new(colored, Polarity::Positive))
}

/// Same constraint over a support that extends its own.
pub fn lift(
    c: &Constraint,
    support: &Arc<crate::support::Support>,
) -> Result<Constraint, ConstraintError> {
    Ok(Constraint::new(
        c.colored.with_support(support)?,
        c.polarity,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RawGraph;
    use crate::support::{Support, SupportDecl};

    fn support() -> Arc<Support> {
        Arc::new(
            SupportDecl::new()
                .concept("T", &[])
                .concept("P", &["T"])
                .concept("O", &["T"])
                .relation("in", 2, &[])
                .validate()
                .unwrap(),
        )
    }

    fn person_has_office(s: &Arc<Support>, polarity: Polarity) -> Constraint {
        let g = RawGraph::new()
            .concept("p", "P", None)
            .concept("o", "O", None)
            .relation("i", "in", &["p", "o"])
            .validate(s)
            .unwrap();
        let c = ColoredGraph::new("c", g, vec![Color::Zero, Color::One], vec![Color::One]).unwrap();
        Constraint::new(c, polarity)
    }

    #[test]
    fn positive_constraint_needs_obligation() {
        let s = support();
        let c = person_has_office(&s, Polarity::Positive);
        let lonely = RawGraph::new()
            .concept("x", "P", None)
            .validate(&s)
            .unwrap();
        assert_eq!(violations(&lonely, &c, None).unwrap().len(), 1);
        let housed = RawGraph::new()
            .concept("x", "P", None)
            .concept("y", "O", None)
            .relation("e", "in", &["x", "y"])
            .validate(&s)
            .unwrap();
        assert!(satisfies(&housed, &c).unwrap());
        assert!(satisfies(&SimpleGraph::new(Arc::clone(&s)), &c).unwrap());
    }

    #[test]
    fn negative_rewrite_agrees() {
        let s = support();
        let neg = person_has_office(&s, Polarity::Negative);
        let pos = negative_to_positive(&neg).unwrap();
        assert_eq!(pos.polarity, Polarity::Positive);
        for housed in [false, true] {
            let mut raw = RawGraph::new()
                .concept("x", "P", None)
                .concept("y", "O", None);
            if housed {
                raw = raw.relation("e", "in", &["x", "y"]);
            }
            let g = raw.validate(&s).unwrap();
            assert_eq!(satisfies(&g, &neg).unwrap(), satisfies(&g, &pos).unwrap());
            assert_eq!(satisfies(&g, &neg).unwrap(), !housed);
        }
        assert!(negative_to_positive(&pos).is_err());
    }
}
