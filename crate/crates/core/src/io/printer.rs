use std::fmt::Write;

use crate::constraints::Polarity;
use crate::graph::SimpleGraph;
use crate::kb::KnowledgeBase;
use crate::rules::{Color, ColoredGraph};
use crate::support::{Marker, Support};

fn concept_line(g: &SimpleGraph, i: usize) -> String {
    let s = g.support();
    let c = g.concept(i);
    let ty = s.concept_name(c.label.ty);
    match c.label.marker {
        Marker::Generic => format!("{} : {ty}", c.id),
        Marker::Individual(m) => format!("{} : {ty} = {}", c.id, s.marker_name(m)),
    }
}

fn relation_line(g: &SimpleGraph, i: usize) -> String {
    let r = g.relation(i);
    let args: Vec<&str> = r.args.iter().map(|&a| g.concept(a).id.as_str()).collect();
    format!(
        "{} : {}({})",
        r.id,
        g.support().relation_name(r.ty),
        args.join(", ")
    )
}

/// Graph lines, concepts first, in internal order.
pub fn print_graph(g: &SimpleGraph) -> String {
    let mut out = String::new();
    for i in 0..g.concept_count() {
        writeln!(out, "{}", concept_line(g, i)).unwrap();
    }
    for i in 0..g.relation_count() {
        writeln!(out, "{}", relation_line(g, i)).unwrap();
    }
    out
}

fn print_colored(out: &mut String, c: &ColoredGraph, first: &str, second: &str) {
    let g = c.graph();
    for (block, color) in [(first, Color::Zero), (second, Color::One)] {
        writeln!(out, "{block}:").unwrap();
        for i in 0..g.concept_count() {
            if c.concept_color(i) == color {
                writeln!(out, "  {}", concept_line(g, i)).unwrap();
            }
        }
        for i in 0..g.relation_count() {
            if c.relation_color(i) == color {
                writeln!(out, "  {}", relation_line(g, i)).unwrap();
            }
        }
    }
}

pub fn print_support(s: &Support) -> String {
    let d = s.decl();
    let mut out = String::from("[support]\n");
    if let Some(a) = d.max_arity {
        writeln!(out, "max_arity {a}").unwrap();
    }
    for (name, parents) in &d.concepts {
        if parents.is_empty() {
            writeln!(out, "concept {name}").unwrap();
        } else {
            writeln!(out, "concept {name} < {}", parents.join(", ")).unwrap();
        }
    }
    for (name, arity, parents) in &d.relations {
        if parents.is_empty() {
            writeln!(out, "relation {name}/{arity}").unwrap();
        } else {
            let ps: Vec<String> = parents.iter().map(|(p, a)| format!("{p}/{a}")).collect();
            writeln!(out, "relation {name}/{arity} < {}", ps.join(", ")).unwrap();
        }
    }
    for (marker, ty) in &d.markers {
        writeln!(out, "individual {marker} : {ty}").unwrap();
    }
    out
}

/// Canonical text of a knowledge base and optional query.
pub fn print_kb(kb: &KnowledgeBase, query: Option<&SimpleGraph>) -> String {
    let mut out = print_support(&kb.support);
    if !kb.facts.is_empty() {
        write!(out, "\n[fact main]\n{}", print_graph(&kb.facts)).unwrap();
    }
    for r in &kb.rules {
        writeln!(out, "\n[rule {}]", r.name).unwrap();
        print_colored(&mut out, r, "hyp", "con");
    }
    for r in &kb.evolutions {
        writeln!(out, "\n[evolution {}]", r.name).unwrap();
        print_colored(&mut out, r, "hyp", "con");
    }
    for c in &kb.constraints {
        let (word, second) = match c.polarity {
            Polarity::Positive => ("positive", "must"),
            Polarity::Negative => ("negative", "not"),
        };
        writeln!(out, "\n[constraint {} {word}]", c.name()).unwrap();
        print_colored(&mut out, &c.colored, "trigger", second);
    }
    if let Some(q) = query {
        write!(out, "\n[query]\n{}", print_graph(q)).unwrap();
    }
    out
}
