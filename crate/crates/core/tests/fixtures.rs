mod common;

use cgr_core::constraints::satisfies;
use cgr_core::logic::phi_graph;
use cgr_core::rules::applicable_projections;
use cgr_core::{
    ask, closure, disjoint_union, enumerate_projections, equivalent, exists_projection, replay,
    Budget, Model, Outcome, RawGraph,
};
use common::load;

#[test]
fn shared_project_query_has_one_answer() {
    let doc = load("researchers.kb");
    let q = doc.query.unwrap();
    let all = enumerate_projections(&q, &doc.kb.facts, None).unwrap();
    assert_eq!(all.projections.len(), 1);
    let v = ask(Model::Sg, &q, &doc.kb, Budget::unbounded()).unwrap();
    assert!(v.is_proved());
    let map = v.certificate.as_ref().unwrap().projection.as_ref().unwrap();
    assert_eq!(map["p"], "x");
    assert_eq!(map["k"], "k");
    replay(Model::Sg, &q, &doc.kb, Budget::unbounded(), &v).unwrap();
}

#[test]
fn colleagues_sharing_an_office_break_the_rule() {
    let doc = load("researchers.kb");
    let c1 = doc
        .kb
        .constraints
        .iter()
        .find(|c| c.name() == "colleagues")
        .unwrap();
    assert!(!satisfies(&doc.kb.facts, c1).unwrap());
    let v = ask(
        Model::Sgc,
        doc.query.as_ref().unwrap(),
        &doc.kb,
        Budget::unbounded(),
    )
    .unwrap();
    assert!(v.is_refuted());
}

#[test]
fn normal_form_restores_projection() {
    let doc = load("normal_forms.kb");
    let s = doc.kb.support.clone();
    let h = RawGraph::new()
        .concept("x", "t", None)
        .concept("a1", "t", Some("a"))
        .concept("a2", "t", Some("a"))
        .relation("r1", "r", &["x", "a1"])
        .relation("s1", "s", &["x", "a2"])
        .relation("u1", "u", &["x", "a2"])
        .validate(&s)
        .unwrap();
    let g = doc.query.unwrap();
    assert!(!exists_projection(&g, &h).unwrap());
    assert!(exists_projection(&g, &h.normal_form()).unwrap());
    assert_eq!(phi_graph(&g).canonical(), phi_graph(&h).canonical());
}

#[test]
fn nearness_rules_answer_the_query() {
    let doc = load("offices.kb");
    let kb = &doc.kb;
    let r2 = kb.rules.iter().find(|r| r.name == "adjoin-twice").unwrap();
    assert_eq!(applicable_projections(r2, &kb.facts).unwrap().len(), 2);

    let mut h = RawGraph::new();
    for i in 1..=4 {
        h = h.concept(&format!("o{i}"), "Office", Some(&format!("#{i}")));
    }
    for (a, b) in [(1, 2), (2, 3), (3, 4)] {
        h = h.relation(
            &format!("a{a}{b}"),
            "adjoin",
            &[&format!("o{a}"), &format!("o{b}")],
        );
    }
    for (a, b) in [(1, 3), (2, 4), (2, 1), (3, 2), (4, 3), (3, 1), (4, 2)] {
        h = h.relation(
            &format!("n{a}{b}"),
            "near",
            &[&format!("o{a}"), &format!("o{b}")],
        );
    }
    let h = h.validate(&kb.support).unwrap();
    let star = closure(&kb.facts, &kb.rules).unwrap();
    assert!(equivalent(&star, &h).unwrap());

    let q = doc.query.unwrap();
    assert!(!exists_projection(&q, &kb.facts).unwrap());
    let v = ask(Model::Sr, &q, kb, Budget::unbounded()).unwrap();
    assert!(v.is_proved());
    replay(Model::Sr, &q, kb, Budget::unbounded(), &v).unwrap();
}

#[test]
fn assigned_offices_are_consistent_with_rules() {
    let doc = load("offices_assigned.kb");
    let sgc = cgr_core::reasoner::sgc_consistent(&doc.kb).unwrap();
    assert!(sgc.is_refuted());
    let src = cgr_core::reasoner::src_consistent(&doc.kb, Budget::unbounded()).unwrap();
    assert!(src.is_proved());
}

#[test]
fn same_graph_as_rule_or_constraint() {
    let doc = load("membership.kb");
    let q = doc.query.unwrap();
    let budget = Budget::uniform(20);
    assert!(ask(Model::Sr, &q, &doc.kb, budget).unwrap().is_proved());
    assert!(ask(Model::Sgc, &q, &doc.kb, budget).unwrap().is_refuted());
}

#[test]
fn redundant_copy_still_satisfies() {
    let doc = load("redundancy.kb");
    let c = &doc.kb.constraints[0];
    let g = &doc.kb.facts;
    assert!(satisfies(g, c).unwrap());
    let h = disjoint_union(g.support(), &[g, c.trigger()]).unwrap();
    assert!(equivalent(g, &h).unwrap());
    assert!(satisfies(&h, c).unwrap());
}

#[test]
fn successor_constraint_under_evolution_and_inference() {
    let doc = load("successor.kb");
    let q = doc.query.unwrap();
    for n in [1, 10, 100] {
        let sec = ask(Model::Sec, &q, &doc.kb, Budget::uniform(n)).unwrap();
        assert_eq!(sec.outcome, Outcome::Refuted, "budget {n}");
        let src = ask(Model::Src, &q, &doc.kb, Budget::uniform(n)).unwrap();
        assert_eq!(src.outcome, Outcome::Unknown, "budget {n}");
    }
    assert!(ask(Model::Src, &q, &doc.kb, Budget::unbounded()).is_err());
}

#[test]
fn office_allocation_finds_a_placement() {
    let doc = load("office_allocation.kb");
    let q = doc.query.unwrap();
    let budget = Budget::uniform(500);
    let v = ask(Model::Srec, &q, &doc.kb, budget).unwrap();
    assert!(v.is_proved(), "{:?}", v.diagnostics);
    replay(Model::Srec, &q, &doc.kb, budget, &v).unwrap();
}
