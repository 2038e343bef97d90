#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use cgr_core::{parse_kb, KbDocument, RawGraph, SimpleGraph, Support, SupportDecl};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn load(name: &str) -> KbDocument {
    let text = std::fs::read_to_string(data_path(name)).expect("fixture readable");
    parse_kb(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Small support: a concept chain `T > A > B`, a sibling `C < T`, binary
/// relations `r > s` and `p`, a unary `u`, a ternary `t`, and markers.
pub fn small_support() -> Arc<Support> {
    Arc::new(
        SupportDecl::new()
            .concept("T", &[])
            .concept("A", &["T"])
            .concept("B", &["A"])
            .concept("C", &["T"])
            .relation("r", 2, &[])
            .relation("s", 2, &["r"])
            .relation("p", 2, &[])
            .relation("u", 1, &[])
            .relation("t", 3, &[])
            .individual("a", "B")
            .individual("b", "A")
            .individual("c", "C")
            .validate()
            .unwrap(),
    )
}

const TYPES: [&str; 4] = ["T", "A", "B", "C"];
const MARKERS: [(&str, &str); 3] = [("a", "B"), ("b", "A"), ("c", "C")];
const RELATIONS: [(&str, usize); 5] = [("r", 2), ("s", 2), ("p", 2), ("u", 1), ("t", 3)];

/// Random graph over `small_support` with at most the given node counts.
/// Individual markers appear at most once, so the result is normal.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    s: &Arc<Support>,
    max_concepts: usize,
    max_relations: usize,
    max_arity: usize,
) -> SimpleGraph {
    let nc = rng.gen_range(1..=max_concepts);
    let nr = rng.gen_range(0..=max_relations);
    let mut raw = RawGraph::new();
    let mut used = Vec::new();
    for i in 0..nc {
        let id = format!("c{i}");
        if rng.gen_bool(0.25) {
            let free: Vec<_> = MARKERS.iter().filter(|(m, _)| !used.contains(m)).collect();
            if let Some(&&(m, ty)) = free.choose(rng) {
                used.push(m);
                raw = raw.concept(&id, ty, Some(m));
                continue;
            }
        }
        raw = raw.concept(&id, TYPES.choose(rng).unwrap(), None);
    }
    let rels: Vec<_> = RELATIONS.iter().filter(|(_, k)| *k <= max_arity).collect();
    for j in 0..nr {
        let &&(name, k) = rels.choose(rng).unwrap();
        let args: Vec<String> = (0..k)
            .map(|_| format!("c{}", rng.gen_range(0..nc)))
            .collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        raw = raw.relation(&format!("r{j}"), name, &args);
    }
    raw.validate(s).unwrap()
}

/// Random bicolored graph over `small_support`. The 0-part has at most
/// `hyp_concepts` concepts and `hyp_relations` relations; at most `extra`
/// 1-colored nodes are added. With `range_restricted` every 1-colored
/// concept node is individual.
pub fn random_colored<R: Rng>(
    rng: &mut R,
    s: &Arc<Support>,
    name: &str,
    hyp_concepts: usize,
    hyp_relations: usize,
    extra: usize,
    max_arity: usize,
    range_restricted: bool,
) -> cgr_core::ColoredGraph {
    use cgr_core::Color;
    let nh = rng.gen_range(1..=hyp_concepts);
    let mut raw = RawGraph::new();
    let mut cc = Vec::new();
    let mut rc = Vec::new();
    let mut used = Vec::new();
    let mut concepts: Vec<String> = Vec::new();
    fn add_concept<R: Rng>(
        raw: RawGraph,
        rng: &mut R,
        used: &mut Vec<&'static str>,
        id: String,
        generic_ok: bool,
    ) -> RawGraph {
        let free: Vec<_> = MARKERS.iter().filter(|(m, _)| !used.contains(m)).collect();
        if !free.is_empty() && (!generic_ok || rng.gen_bool(0.25)) {
            let &&(m, ty) = free.choose(rng).unwrap();
            used.push(m);
            return raw.concept(&id, ty, Some(m));
        }
        raw.concept(&id, TYPES.choose(rng).unwrap(), None)
    }
    for i in 0..nh {
        let id = format!("h{i}");
        raw = add_concept(raw, rng, &mut used, id.clone(), true);
        concepts.push(id);
        cc.push(Color::Zero);
    }
    let rels: Vec<_> = RELATIONS.iter().filter(|(_, k)| *k <= max_arity).collect();
    let relation = |raw: RawGraph, rng: &mut R, id: String, among: &[String]| {
        let &&(name, k) = rels.choose(rng).unwrap();
        let args: Vec<&str> = (0..k)
            .map(|_| among.choose(rng).unwrap().as_str())
            .collect();
        raw.relation(&id, name, &args)
    };
    for j in 0..rng.gen_range(0..=hyp_relations) {
        raw = relation(raw, rng, format!("hr{j}"), &concepts);
        rc.push(Color::Zero);
    }
    let ne = rng.gen_range(1..=extra.max(1));
    for j in 0..ne {
        let can_add_concept = !range_restricted || used.len() < MARKERS.len();
        if can_add_concept && rng.gen_bool(0.3) {
            let id = format!("n{j}");
            raw = add_concept(raw, rng, &mut used, id.clone(), !range_restricted);
            concepts.push(id);
            cc.push(Color::One);
        } else {
            raw = relation(raw, rng, format!("cr{j}"), &concepts);
            rc.push(Color::One);
        }
    }
    let g = raw.validate(s).unwrap();
    cgr_core::ColoredGraph::new(name, g, cc, rc).unwrap()
}
