//! Knowledge bases: facts, inference rules, evolution rules and constraints
//! over one support.

use std::sync::Arc;

use crate::constraints::{Constraint, Polarity};
use crate::graph::{GraphError, SimpleGraph};
use crate::rules::ColoredGraph;
use crate::support::{common_support, Support};

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    pub support: Arc<Support>,
    /// Union of all fact graphs, in normal form.
    pub facts: SimpleGraph,
    pub rules: Vec<ColoredGraph>,
    pub evolutions: Vec<ColoredGraph>,
    pub constraints: Vec<Constraint>,
}

impl KnowledgeBase {
    pub fn new(support: Arc<Support>) -> Self {
        KnowledgeBase {
            facts: SimpleGraph::new(Arc::clone(&support)),
            support,
            rules: Vec::new(),
            evolutions: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Knowledge base with the given facts, normalized.
    pub fn with_facts(facts: &SimpleGraph) -> Self {
        let mut kb = KnowledgeBase::new(Arc::clone(facts.support()));
        kb.facts = facts.normal_form();
        kb
    }

    pub fn rule(mut self, rule: ColoredGraph) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn evolution(mut self, rule: ColoredGraph) -> Self {
        self.evolutions.push(rule);
        self
    }

    pub fn constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn positive_constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints
            .iter()
            .filter(|c| c.polarity == Polarity::Positive)
    }

    pub fn negative_constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints
            .iter()
            .filter(|c| c.polarity == Polarity::Negative)
    }

    /// The largest support among all components; every component's support
    /// must be extended by it.
    pub fn working_support(&self) -> Result<Arc<Support>, GraphError> {
        let mut s = Arc::clone(&self.support);
        let others = self
            .rules
            .iter()
            .chain(&self.evolutions)
            .map(|r| r.support())
            .chain(self.constraints.iter().map(|c| c.colored.support()))
            .chain(std::iter::once(self.facts.support()));
        for o in others {
            s = common_support(&s, o)
                .ok_or(GraphError::SupportMismatch)?
                .clone();
        }
        Ok(s)
    }
}
