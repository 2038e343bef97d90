//! Instance builders shared by the benchmarks.

use std::sync::Arc;

use cgr_core::reductions::{gen_sat3_projection, CnfFormula};
use cgr_core::{Color, ColoredGraph, RawGraph, SimpleGraph, Support, SupportDecl};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Projection instance of a random formula.
pub fn sat3_instance(vars: usize, clauses: usize, seed: u64) -> (SimpleGraph, SimpleGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = CnfFormula::random(&mut rng, vars, clauses);
    gen_sat3_projection(&f).expect("generated formula is valid")
}

fn cycle_support() -> Arc<Support> {
    Arc::new(
        SupportDecl::new()
            .concept("T", &[])
            .relation("r", 2, &[])
            .relation("s", 2, &[])
            .validate()
            .expect("valid support"),
    )
}

/// Directed cycle of length `n` with `extra` random chords; its core is
/// usually much smaller than the graph.
pub fn redundant_graph(n: usize, extra: usize, seed: u64) -> SimpleGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = RawGraph::new();
    for i in 0..n {
        raw = raw.concept(&format!("c{i}"), "T", None);
    }
    for i in 0..n {
        raw = raw.relation(
            &format!("e{i}"),
            "r",
            &[&format!("c{i}"), &format!("c{}", (i + 1) % n)],
        );
    }
    for j in 0..extra {
        let a = rng.gen_range(0..n);
        raw = raw.relation(
            &format!("x{j}"),
            "r",
            &[&format!("c{a}"), &format!("c{}", (a + 2) % n)],
        );
    }
    raw.validate(&cycle_support()).expect("valid graph")
}

/// A path of `n` nodes and the transitivity rule over `s` seeded by `r`.
pub fn transitive_instance(n: usize) -> (SimpleGraph, Vec<ColoredGraph>) {
    let s = cycle_support();
    let mut raw = RawGraph::new();
    for i in 0..n {
        raw = raw.concept(&format!("c{i}"), "T", None);
    }
    for i in 1..n {
        raw = raw.relation(
            &format!("e{i}"),
            "r",
            &[&format!("c{}", i - 1), &format!("c{i}")],
        );
    }
    let g = raw.validate(&s).expect("valid graph");
    let lift = RawGraph::new()
        .concept("x", "T", None)
        .concept("y", "T", None)
        .relation("a", "r", &["x", "y"])
        .relation("b", "s", &["x", "y"])
        .validate(&s)
        .expect("valid rule");
    let trans = RawGraph::new()
        .concept("x", "T", None)
        .concept("y", "T", None)
        .concept("z", "T", None)
        .relation("a", "s", &["x", "y"])
        .relation("b", "s", &["y", "z"])
        .relation("c", "s", &["x", "z"])
        .validate(&s)
        .expect("valid rule");
    let z = Color::Zero;
    let o = Color::One;
    let rules = vec![
        ColoredGraph::new("lift", lift, vec![z, z], vec![z, o]).expect("valid coloring"),
        ColoredGraph::new("trans", trans, vec![z, z, z], vec![z, z, o]).expect("valid coloring"),
    ];
    (g, rules)
}
