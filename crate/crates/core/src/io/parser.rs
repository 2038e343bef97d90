use std::sync::Arc;

use crate::constraints::{Constraint, Polarity};
use crate::graph::{disjoint_union, RawGraph, SimpleGraph};
use crate::kb::KnowledgeBase;
use crate::rules::{Color, ColoredGraph};
use crate::support::{Support, SupportDecl};

use super::{KbDocument, KbError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
}

const PUNCT: &[char] = &[':', '=', '(', ')', ',', '<', '[', ']', '/'];

fn strip_comment(line: &str) -> &str {
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    for (k, &(i, ch)) in chars.iter().enumerate() {
        if ch != '#' {
            continue;
        }
        let before = k == 0 || chars[k - 1].1.is_whitespace();
        let after = k + 1 == chars.len() || chars[k + 1].1.is_whitespace();
        if before && (after || line[..i].trim().is_empty()) {
            return &line[..i];
        }
    }
    line
}

fn tokenize(line: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut word = String::new();
    let mut start = 0;
    for (col, ch) in line.chars().enumerate() {
        if ch.is_whitespace() || PUNCT.contains(&ch) {
            if !word.is_empty() {
                out.push(Token {
                    tok: Tok::Word(std::mem::take(&mut word)),
                    column: start + 1,
                });
            }
            if !ch.is_whitespace() {
                out.push(Token {
                    tok: Tok::Punct(ch),
                    column: col + 1,
                });
            }
        } else {
            if word.is_empty() {
                start = col;
            }
            word.push(ch);
        }
    }
    if !word.is_empty() {
        out.push(Token {
            tok: Tok::Word(word),
            column: start + 1,
        });
    }
    out
}

/// Cursor over the tokens of one line.
struct Line {
    number: usize,
    tokens: Vec<Token>,
    pos: usize,
    width: usize,
}

impl Line {
    fn error(&self, message: impl Into<String>) -> KbError {
        let column = self
            .tokens
            .get(self.pos)
            .map(|t| t.column)
            .unwrap_or(self.width + 1);
        KbError::Syntax {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos == self.tokens.len()
    }

    fn word(&mut self, what: &str) -> Result<String, KbError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn eat(&mut self, p: char) -> bool {
        if self.peek() == Some(&Tok::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: char) -> Result<(), KbError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{p}`")))
        }
    }

    fn finish(&self) -> Result<(), KbError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, KbError> {
        let before = self.pos;
        let w = self.word(what)?;
        w.parse().map_err(|_| {
            self.pos = before;
            self.error(format!("expected {what}"))
        })
    }

    /// `name/arity`
    fn signature(&mut self) -> Result<(String, usize), KbError> {
        let name = self.word("a relation type name")?;
        self.expect('/')?;
        Ok((name, self.number("an arity")?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    Support,
    Fact(String),
    Rule(String),
    Evolution(String),
    Constraint(String, Polarity),
    Query,
}

impl Kind {
    fn label(&self) -> String {
        match self {
            Kind::Support => "support".into(),
            Kind::Fact(n) => format!("fact {n}"),
            Kind::Rule(n) => format!("rule {n}"),
            Kind::Evolution(n) => format!("evolution {n}"),
            Kind::Constraint(n, _) => format!("constraint {n}"),
            Kind::Query => "query".into(),
        }
    }
}

struct Section {
    kind: Kind,
    lines: Vec<Line>,
}

fn header(line: &mut Line) -> Result<Kind, KbError> {
    line.expect('[')?;
    let kw = line.word("a section name")?;
    let kind = match kw.as_str() {
        "support" => Kind::Support,
        "query" => Kind::Query,
        "fact" => Kind::Fact(line.word("a fact name")?),
        "rule" => Kind::Rule(line.word("a rule name")?),
        "evolution" => Kind::Evolution(line.word("a rule name")?),
        "constraint" => {
            let name = line.word("a constraint name")?;
            let polarity = match line.word("`positive` or `negative`")?.as_str() {
                "positive" => Polarity::Positive,
                "negative" => Polarity::Negative,
                _ => {
                    line.pos -= 1;
                    return Err(line.error("expected `positive` or `negative`"));
                }
            };
            Kind::Constraint(name, polarity)
        }
        _ => {
            line.pos -= 1;
            return Err(line.error(format!("unknown section `{kw}`")));
        }
    };
    line.expect(']')?;
    line.finish()?;
    Ok(kind)
}

fn sections(text: &str) -> Result<Vec<Section>, KbError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = strip_comment(raw);
        let mut line = Line {
            number: i + 1,
            tokens: tokenize(body),
            pos: 0,
            width: body.chars().count(),
        };
        if line.at_end() {
            continue;
        }
        if line.peek() == Some(&Tok::Punct('[')) {
            let kind = header(&mut line)?;
            let label = kind.label();
            let duplicate = out.iter().any(|s| match (&s.kind, &kind) {
                (Kind::Support, Kind::Support) | (Kind::Query, Kind::Query) => true,
                (a, b) => a.label() == b.label() || same_name(a, b),
            });
            if duplicate {
                line.pos = 0;
                return Err(line.error(format!("duplicate section [{label}]")));
            }
            out.push(Section {
                kind,
                lines: Vec::new(),
            });
        } else {
            match out.last_mut() {
                Some(s) => s.lines.push(line),
                None => return Err(line.error("content before the first section")),
            }
        }
    }
    Ok(out)
}

fn same_name(a: &Kind, b: &Kind) -> bool {
    let name = |k: &Kind| match k {
        Kind::Rule(n) | Kind::Evolution(n) | Kind::Constraint(n, _) => Some(n.clone()),
        _ => None,
    };
    name(a).is_some() && name(a) == name(b)
}

fn parse_support(lines: &mut [Line]) -> Result<SupportDecl, KbError> {
    let mut decl = SupportDecl::new();
    for line in lines {
        let kw = line.word("`concept`, `relation`, `individual` or `max_arity`")?;
        match kw.as_str() {
            "concept" => {
                let name = line.word("a concept type name")?;
                let mut parents = Vec::new();
                if line.eat('<') {
                    loop {
                        parents.push(line.word("a concept type name")?);
                        if !line.eat(',') {
                            break;
                        }
                    }
                }
                decl.concepts.push((name, parents));
            }
            "relation" => {
                let (name, arity) = line.signature()?;
                let mut parents = Vec::new();
                if line.eat('<') {
                    loop {
                        parents.push(line.signature()?);
                        if !line.eat(',') {
                            break;
                        }
                    }
                }
                decl.relations.push((name, arity, parents));
            }
            "individual" => {
                let marker = line.word("a marker")?;
                line.expect(':')?;
                let ty = line.word("a concept type name")?;
                decl.markers.push((marker, ty));
            }
            "max_arity" => {
                decl.max_arity = Some(line.number("a maximum arity")?);
            }
            _ => {
                line.pos -= 1;
                return Err(line.error(format!("unknown declaration `{kw}`")));
            }
        }
        line.finish()?;
    }
    Ok(decl)
}

/// One graph line into `raw`; returns the node id.
fn graph_line(line: &mut Line, raw: &mut RawGraph) -> Result<String, KbError> {
    let id = line.word("a node identifier")?;
    line.expect(':')?;
    let ty = line.word("a type name")?;
    if line.eat('(') {
        let mut args = Vec::new();
        if !line.eat(')') {
            loop {
                args.push(line.word("a node identifier")?);
                if line.eat(')') {
                    break;
                }
                line.expect(',')?;
            }
        }
        line.finish()?;
        raw.relations.push((id.clone(), ty, args));
    } else {
        let marker = if line.eat('=') {
            Some(line.word("a marker")?)
        } else {
            None
        };
        line.finish()?;
        raw.concepts.push((id.clone(), ty, marker));
    }
    Ok(id)
}

fn parse_graph(lines: &mut [Line]) -> Result<RawGraph, KbError> {
    let mut raw = RawGraph::new();
    for line in lines {
        graph_line(line, &mut raw)?;
    }
    Ok(raw)
}

/// Two blocks introduced by `first:` and one of `second`.
fn parse_colored(
    lines: &mut [Line],
    first: &str,
    second: &[&str],
) -> Result<(RawGraph, Vec<String>), KbError> {
    let mut raw = RawGraph::new();
    let mut ones = Vec::new();
    let mut block = 0;
    for line in lines.iter_mut() {
        let is_block = line.tokens.len() == 2 && line.tokens[1].tok == Tok::Punct(':');
        if is_block {
            let kw = line.word("a block name")?;
            let expected = if block == 0 {
                vec![first]
            } else {
                second.to_vec()
            };
            if block >= 2 || !expected.contains(&kw.as_str()) {
                line.pos = 0;
                return Err(line.error(format!("unexpected block `{kw}:`")));
            }
            block += 1;
            continue;
        }
        if block == 0 {
            return Err(line.error(format!("expected `{first}:`")));
        }
        let id = graph_line(line, &mut raw)?;
        if block == 2 {
            ones.push(id);
        }
    }
    Ok((raw, ones))
}

fn colored(
    name: &str,
    raw: &RawGraph,
    ones: &[String],
    support: &Arc<Support>,
    section: &str,
) -> Result<ColoredGraph, KbError> {
    let g = raw.validate(support).map_err(|error| KbError::Graph {
        section: section.to_string(),
        error,
    })?;
    let color = |id: &str| {
        if ones.iter().any(|o| o == id) {
            Color::One
        } else {
            Color::Zero
        }
    };
    let cc = g.concepts().iter().map(|c| color(c.id.as_str())).collect();
    let rc = g.relations().iter().map(|r| color(r.id.as_str())).collect();
    ColoredGraph::new(name, g, cc, rc).map_err(|error| KbError::Rule {
        section: section.to_string(),
        error,
    })
}

/// Parses and validates a knowledge base document.
pub fn parse_kb(text: &str) -> Result<KbDocument, KbError> {
    let mut secs = sections(text)?;
    let Some(si) = secs.iter().position(|s| s.kind == Kind::Support) else {
        return Err(KbError::MissingSupport);
    };
    let decl = parse_support(&mut secs[si].lines)?;
    let support = Arc::new(decl.validate()?);
    let mut kb = KnowledgeBase::new(Arc::clone(&support));
    let mut facts = Vec::new();
    let mut query = None;
    for s in &mut secs {
        let label = s.kind.label();
        let graph_err = |error| KbError::Graph {
            section: label.clone(),
            error,
        };
        match &s.kind {
            Kind::Support => {}
            Kind::Fact(_) => {
                let raw = parse_graph(&mut s.lines)?;
                facts.push(raw.validate(&support).map_err(graph_err)?);
            }
            Kind::Query => {
                let raw = parse_graph(&mut s.lines)?;
                query = Some(raw.validate(&support).map_err(graph_err)?);
            }
            Kind::Rule(name) | Kind::Evolution(name) => {
                let name = name.clone();
                let (raw, ones) = parse_colored(&mut s.lines, "hyp", &["con"])?;
                let r = colored(&name, &raw, &ones, &support, &label)?;
                if matches!(s.kind, Kind::Rule(_)) {
                    kb.rules.push(r);
                } else {
                    kb.evolutions.push(r);
                }
            }
            Kind::Constraint(name, polarity) => {
                let (name, polarity) = (name.clone(), *polarity);
                let (raw, ones) = parse_colored(&mut s.lines, "trigger", &["must", "not"])?;
                let c = colored(&name, &raw, &ones, &support, &label)?;
                kb.constraints.push(Constraint::new(c, polarity));
            }
        }
    }
    let refs: Vec<&SimpleGraph> = facts.iter().collect();
    kb.facts = disjoint_union(&support, &refs)
        .map_err(|error| KbError::Graph {
            section: "fact".into(),
            error,
        })?
        .normal_form();
    Ok(KbDocument { kb, query })
}
