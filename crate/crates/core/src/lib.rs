pub mod constraints;
pub mod forms;
pub mod graph;
pub mod homomorphism;
pub mod io;
pub mod kb;
pub mod logic;
pub mod oracles;
pub mod reasoner;
pub mod reductions;
pub mod rules;
pub mod support;

pub use constraints::{Constraint, Polarity, Violation};
pub use forms::{equivalent, irredundant_form, isomorphic, RemovalOrder};
pub use graph::{disjoint_union, GraphError, NodeId, RawGraph, SimpleGraph};
pub use homomorphism::{enumerate_projections, exists_projection, find_projection, Projection};
pub use io::{emit_result, parse_kb, print_kb, KbDocument, KbError};
pub use kb::KnowledgeBase;
pub use reasoner::{
    ask, check, replay, Budget, Certificate, Model, Outcome, ReasonerError, Verdict,
};
pub use rules::{closure, full_graph, ClosureBounds, Color, ColoredGraph, RuleError};
pub use support::{Support, SupportDecl, SupportError};
