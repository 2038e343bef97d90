//! Brute-force deciders for the abstract problems behind the reductions.
//! None of them touches graphs, projections or rules.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::logic::{Atom, FolFormula, Term};
use crate::reductions::{CnfFormula, MixedCsp, SemiThueSystem};

/// Truth-table satisfiability.
pub fn sat(f: &CnfFormula) -> bool {
    let n = f.variables.len();
    (0..1u64 << n).any(|bits| f.evaluate(&unpack(bits, n)))
}

fn unpack(bits: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| bits >> i & 1 == 1).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// Truth value of a prenex quantified formula whose blocks are given in
/// order; variables outside every block are existential and innermost.
pub fn quantified(f: &CnfFormula, blocks: &[(Quantifier, &[usize])]) -> bool {
    let mut assignment = vec![false; f.variables.len()];
    let mut order: Vec<(Quantifier, usize)> = blocks
        .iter()
        .flat_map(|(q, vs)| vs.iter().map(move |&v| (*q, v)))
        .collect();
    let listed: BTreeSet<usize> = order.iter().map(|&(_, v)| v).collect();
    order.extend(
        (0..f.variables.len())
            .filter(|v| !listed.contains(v))
            .map(|v| (Quantifier::Exists, v)),
    );
    eval(f, &order, &mut assignment)
}

fn eval(f: &CnfFormula, order: &[(Quantifier, usize)], a: &mut Vec<bool>) -> bool {
    let Some(&(q, v)) = order.first() else {
        return f.evaluate(a);
    };
    let branch = |value: bool, a: &mut Vec<bool>| {
        a[v] = value;
        eval(f, &order[1..], a)
    };
    match q {
        Quantifier::Exists => branch(false, a) || branch(true, a),
        Quantifier::Forall => branch(false, a) && branch(true, a),
    }
}

/// For every valuation of the first block, some valuation of the second
/// satisfies the formula.
pub fn forall_exists(f: &CnfFormula, x1: &[usize], x2: &[usize]) -> bool {
    quantified(f, &[(Quantifier::Forall, x1), (Quantifier::Exists, x2)])
}

pub fn exists_forall_exists(f: &CnfFormula, x1: &[usize], x2: &[usize], x3: &[usize]) -> bool {
    quantified(
        f,
        &[
            (Quantifier::Exists, x1),
            (Quantifier::Forall, x2),
            (Quantifier::Exists, x3),
        ],
    )
}

/// Calls `visit` on every assignment of `vars` (value indices) that keeps
/// all fully assigned constraints satisfied, stopping when it returns true.
fn search(
    p: &MixedCsp,
    vars: &[usize],
    a: &mut Vec<Option<usize>>,
    visit: &mut dyn FnMut(&[Option<usize>]) -> bool,
) -> bool {
    let Some((&v, rest)) = vars.split_first() else {
        return visit(a);
    };
    for x in 0..p.variables[v].domain.len() {
        a[v] = Some(x);
        let ok = p
            .constraints
            .iter()
            .all(|c| p.satisfied(c, a) != Some(false));
        if ok && search(p, rest, a, visit) {
            a[v] = None;
            return true;
        }
    }
    a[v] = None;
    false
}

/// Whether the whole network has a solution.
pub fn csp_satisfiable(p: &MixedCsp) -> bool {
    let vars: Vec<usize> = (0..p.variables.len()).collect();
    let mut a = vec![None; vars.len()];
    search(p, &vars, &mut a, &mut |_| true)
}

/// Every solution of the subnetwork over the uncontrollable variables
/// extends to a solution of the whole network.
pub fn mixed_consistent(p: &MixedCsp) -> bool {
    let delta = p.uncontrollable();
    let controllable: Vec<usize> = (0..p.variables.len())
        .filter(|v| !delta.contains(v))
        .collect();
    let mut a = vec![None; p.variables.len()];
    let mut counterexample = |partial: &[Option<usize>]| {
        let mut b = partial.to_vec();
        !search(p, &controllable, &mut b, &mut |_| true)
    };
    !search(p, &delta, &mut a, &mut counterexample)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reachability {
    /// Reachable in this many rewriting steps.
    Reachable(usize),
    /// Every reachable word was explored.
    Unreachable,
    /// Search bounds were hit first.
    Unknown,
}

/// Breadth-first rewriting from the source word.
pub fn rewrites_to(s: &SemiThueSystem, max_depth: usize, max_words: usize) -> Reachability {
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(s.source.clone());
    queue.push_back((s.source.clone(), 0));
    let mut truncated = false;
    while let Some((w, d)) = queue.pop_front() {
        if w == s.target {
            return Reachability::Reachable(d);
        }
        if d == max_depth {
            truncated = true;
            continue;
        }
        for (alpha, beta) in &s.rules {
            if alpha.len() > w.len() {
                continue;
            }
            for i in 0..=w.len() - alpha.len() {
                if w[i..i + alpha.len()] != alpha[..] {
                    continue;
                }
                let mut next = w[..i].to_vec();
                next.extend_from_slice(beta);
                next.extend_from_slice(&w[i + alpha.len()..]);
                if seen.contains(&next) {
                    continue;
                }
                if seen.len() >= max_words {
                    truncated = true;
                    continue;
                }
                seen.insert(next.clone());
                queue.push_back((next, d + 1));
            }
        }
    }
    if truncated {
        Reachability::Unknown
    } else {
        Reachability::Unreachable
    }
}

/// Whether the existential conjunction `g` entails `h`: some substitution of
/// the variables of `h` by terms of `g` sends every atom of `h` to an atom
/// of `g`.
pub fn entails(g: &FolFormula, h: &FolFormula) -> bool {
    let facts: BTreeSet<&Atom> = g.atoms().iter().collect();
    let mut terms: BTreeSet<Term> = g
        .atoms()
        .iter()
        .flat_map(|a| a.args.iter().cloned())
        .collect();
    if let FolFormula::Exists { vars, .. } = g {
        terms.extend(vars.iter().cloned().map(Term::Var));
    }
    let terms: Vec<Term> = terms.into_iter().collect();
    let vars: Vec<String> = h
        .atoms()
        .iter()
        .flat_map(|a| a.args.iter())
        .filter_map(|t| match t {
            Term::Var(v) => Some(v.clone()),
            Term::Const(_) => None,
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut sub: BTreeMap<String, Term> = BTreeMap::new();
    substitute(&vars, &terms, &mut sub, &|sub| {
        h.atoms().iter().all(|a| {
            let image = Atom {
                predicate: a.predicate.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => sub[v].clone(),
                        c => c.clone(),
                    })
                    .collect(),
            };
            facts.contains(&image)
        })
    })
}

fn substitute(
    vars: &[String],
    terms: &[Term],
    sub: &mut BTreeMap<String, Term>,
    check: &dyn Fn(&BTreeMap<String, Term>) -> bool,
) -> bool {
    let Some((v, rest)) = vars.split_first() else {
        return check(sub);
    };
    for t in terms {
        sub.insert(v.clone(), t.clone());
        if substitute(rest, terms, sub, check) {
            return true;
        }
    }
    sub.remove(v);
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::{CspConstraint, CspVariable, Literal};

    #[test]
    fn truth_tables() {
        let f = CnfFormula::new(&["a"], vec![vec![Literal::pos(0)], vec![Literal::neg(0)]]);
        assert!(!sat(&f));
        let g = CnfFormula::new(
            &["a", "b"],
            vec![
                vec![Literal::pos(0), Literal::pos(1)],
                vec![Literal::neg(0), Literal::neg(1)],
            ],
        );
        assert!(sat(&g));
        // b must differ from a: for all a there is b, but not conversely.
        assert!(forall_exists(&g, &[0], &[1]));
        assert!(!quantified(
            &g,
            &[(Quantifier::Exists, &[1]), (Quantifier::Forall, &[0])]
        ));
    }

    #[test]
    fn triangle_is_not_two_colorable() {
        let var = |n: &str| CspVariable {
            name: n.into(),
            domain: vec!["r".into(), "g".into()],
            controllable: true,
        };
        let neq: BTreeSet<Vec<usize>> = [vec![0, 1], vec![1, 0]].into_iter().collect();
        let c = |n: &str, a, b| CspConstraint {
            name: n.into(),
            scope: vec![a, b],
            allowed: neq.clone(),
        };
        let p = MixedCsp {
            variables: vec![var("x"), var("y"), var("z")],
            constraints: vec![c("C1", 0, 1), c("C2", 1, 2), c("C3", 0, 2)],
        };
        assert!(!csp_satisfiable(&p));
        let mut q = p.clone();
        q.constraints.pop();
        assert!(csp_satisfiable(&q));
        q.variables[0].controllable = false;
        assert!(mixed_consistent(&q));
    }

    #[test]
    fn rewriting_search() {
        let s = SemiThueSystem::from_strs(&[("a", "c")], "ab", "cb");
        assert_eq!(rewrites_to(&s, 5, 100), Reachability::Reachable(1));
        let t = SemiThueSystem::from_strs(&[("a", "c")], "ab", "ba");
        assert_eq!(rewrites_to(&t, 5, 100), Reachability::Unreachable);
        let u = SemiThueSystem::from_strs(&[("a", "aa")], "a", "b");
        assert_eq!(rewrites_to(&u, 5, 100), Reachability::Unknown);
    }
}
