//! Abstract problem instances consumed by the generators and the oracles.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ReductionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal {
            var,
            positive: true,
        }
    }

    pub fn neg(var: usize) -> Self {
        Literal {
            var,
            positive: false,
        }
    }
}

/// CNF formula with clauses of at most three literals and an optional
/// partition of its variables into quantifier blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    pub variables: Vec<String>,
    pub clauses: Vec<Vec<Literal>>,
    #[serde(default)]
    pub partition: Vec<Vec<usize>>,
}

impl CnfFormula {
    pub fn new(variables: &[&str], clauses: Vec<Vec<Literal>>) -> Self {
        CnfFormula {
            variables: variables.iter().map(|v| v.to_string()).collect(),
            clauses,
            partition: Vec::new(),
        }
    }

    pub fn with_partition(mut self, blocks: Vec<Vec<usize>>) -> Self {
        self.partition = blocks;
        self
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        let names: BTreeSet<&str> = self.variables.iter().map(String::as_str).collect();
        if names.len() != self.variables.len() {
            return Err(ReductionError::Invalid("duplicate variable name".into()));
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if c.is_empty() || c.len() > 3 {
                return Err(ReductionError::Invalid(format!(
                    "clause {} has {} literals",
                    i + 1,
                    c.len()
                )));
            }
            let vars: BTreeSet<usize> = c.iter().map(|l| l.var).collect();
            if vars.len() != c.len() {
                return Err(ReductionError::Invalid(format!(
                    "clause {} repeats a variable",
                    i + 1
                )));
            }
            if let Some(l) = c.iter().find(|l| l.var >= self.variables.len()) {
                return Err(ReductionError::Invalid(format!(
                    "unknown variable {}",
                    l.var
                )));
            }
        }
        if !self.partition.is_empty() {
            let mut seen = vec![false; self.variables.len()];
            for &v in self.partition.iter().flatten() {
                if v >= seen.len() || seen[v] {
                    return Err(ReductionError::Invalid("partition is not disjoint".into()));
                }
                seen[v] = true;
            }
            if seen.contains(&false) {
                return Err(ReductionError::Invalid(
                    "partition does not cover all variables".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| assignment[l.var] == l.positive))
    }

    /// Random formula over `v1..vn` with clause lengths in 1..=3.
    pub fn random<R: Rng>(rng: &mut R, vars: usize, clauses: usize) -> Self {
        let variables: Vec<String> = (1..=vars).map(|i| format!("v{i}")).collect();
        let all: Vec<usize> = (0..vars).collect();
        let clauses = (0..clauses)
            .map(|_| {
                let len = rng.gen_range(1..=3.min(vars));
                all.choose_multiple(rng, len)
                    .map(|&var| Literal {
                        var,
                        positive: rng.gen(),
                    })
                    .collect()
            })
            .collect();
        CnfFormula {
            variables,
            clauses,
            partition: Vec::new(),
        }
    }

    /// Splits the variables into consecutive blocks of the given sizes.
    pub fn blocks(&self, sizes: &[usize]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut next = 0;
        for &s in sizes {
            out.push((next..next + s).collect());
            next += s;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspVariable {
    pub name: String,
    pub domain: Vec<String>,
    pub controllable: bool,
}

/// Allowed tuples hold indices into the domains of the scope variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspConstraint {
    pub name: String,
    pub scope: Vec<usize>,
    pub allowed: BTreeSet<Vec<usize>>,
}

/// Constraint network whose variables are controllable or not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedCsp {
    pub variables: Vec<CspVariable>,
    pub constraints: Vec<CspConstraint>,
}

impl MixedCsp {
    pub fn validate(&self) -> Result<(), ReductionError> {
        let mut names = BTreeSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(ReductionError::Invalid(format!(
                    "duplicate name `{}`",
                    v.name
                )));
            }
            let values: BTreeSet<&String> = v.domain.iter().collect();
            if values.len() != v.domain.len() {
                return Err(ReductionError::Invalid(format!(
                    "domain of `{}` repeats a value",
                    v.name
                )));
            }
        }
        for c in &self.constraints {
            if !names.insert(c.name.as_str()) {
                return Err(ReductionError::Invalid(format!(
                    "duplicate name `{}`",
                    c.name
                )));
            }
            let scope: BTreeSet<usize> = c.scope.iter().copied().collect();
            if c.scope.is_empty() || scope.len() != c.scope.len() {
                return Err(ReductionError::Invalid(format!(
                    "constraint `{}` has an empty or repeating scope",
                    c.name
                )));
            }
            if c.scope.iter().any(|&v| v >= self.variables.len()) {
                return Err(ReductionError::Invalid(format!(
                    "constraint `{}` names an unknown variable",
                    c.name
                )));
            }
            for t in &c.allowed {
                let fits = t.len() == c.scope.len()
                    && t.iter()
                        .zip(&c.scope)
                        .all(|(&x, &v)| x < self.variables[v].domain.len());
                if !fits {
                    return Err(ReductionError::Invalid(format!(
                        "constraint `{}` allows a tuple outside the domains",
                        c.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn uncontrollable(&self) -> Vec<usize> {
        (0..self.variables.len())
            .filter(|&v| !self.variables[v].controllable)
            .collect()
    }

    /// Whether the assignment satisfies every constraint whose scope is
    /// assigned. `None` marks unassigned variables.
    pub fn satisfied(&self, c: &CspConstraint, assignment: &[Option<usize>]) -> Option<bool> {
        let t: Option<Vec<usize>> = c.scope.iter().map(|&v| assignment[v]).collect();
        t.map(|t| c.allowed.contains(&t))
    }

    /// Random binary network. Domains hold values `0..d`; each pair of
    /// variables is constrained with probability `density`, each tuple
    /// allowed with probability `tightness`.
    pub fn random<R: Rng>(
        rng: &mut R,
        vars: usize,
        max_domain: usize,
        uncontrollable: usize,
        density: f64,
        tightness: f64,
    ) -> Self {
        let variables: Vec<CspVariable> = (0..vars)
            .map(|i| {
                let d = rng.gen_range(1..=max_domain);
                CspVariable {
                    name: format!("x{}", i + 1),
                    domain: (0..d).map(|v| v.to_string()).collect(),
                    controllable: i >= uncontrollable,
                }
            })
            .collect();
        let mut constraints = Vec::new();
        for a in 0..vars {
            for b in a + 1..vars {
                if !rng.gen_bool(density) {
                    continue;
                }
                let mut allowed = BTreeSet::new();
                for i in 0..variables[a].domain.len() {
                    for j in 0..variables[b].domain.len() {
                        if rng.gen_bool(tightness) {
                            allowed.insert(vec![i, j]);
                        }
                    }
                }
                constraints.push(CspConstraint {
                    name: format!("C{}", constraints.len() + 1),
                    scope: vec![a, b],
                    allowed,
                });
            }
        }
        MixedCsp {
            variables,
            constraints,
        }
    }
}

/// Word problem instance: can `source` be rewritten into `target`?
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemiThueSystem {
    pub alphabet: Vec<String>,
    pub rules: Vec<(Vec<usize>, Vec<usize>)>,
    pub source: Vec<usize>,
    pub target: Vec<usize>,
}

impl SemiThueSystem {
    /// Builds a system over single-character letters.
    pub fn from_strs(rules: &[(&str, &str)], source: &str, target: &str) -> Self {
        let mut alphabet: Vec<String> = Vec::new();
        let mut word = |s: &str| -> Vec<usize> {
            s.chars()
                .map(|ch| {
                    let l = ch.to_string();
                    match alphabet.iter().position(|a| *a == l) {
                        Some(i) => i,
                        None => {
                            alphabet.push(l);
                            alphabet.len() - 1
                        }
                    }
                })
                .collect()
        };
        let rules = rules.iter().map(|(a, b)| (word(a), word(b))).collect();
        let source = word(source);
        let target = word(target);
        SemiThueSystem {
            alphabet,
            rules,
            source,
            target,
        }
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        let mut words = vec![&self.source, &self.target];
        for (a, b) in &self.rules {
            words.push(a);
            words.push(b);
        }
        if words.iter().any(|w| w.is_empty()) {
            return Err(ReductionError::Invalid("empty word".into()));
        }
        if words
            .iter()
            .any(|w| w.iter().any(|&l| l >= self.alphabet.len()))
        {
            return Err(ReductionError::Invalid(
                "letter outside the alphabet".into(),
            ));
        }
        let letters: BTreeSet<&str> = self.alphabet.iter().map(String::as_str).collect();
        if letters.len() != self.alphabet.len() {
            return Err(ReductionError::Invalid("duplicate letter".into()));
        }
        Ok(())
    }

    pub fn random<R: Rng>(rng: &mut R, letters: usize, rules: usize, max_len: usize) -> Self {
        let alphabet: Vec<String> = (0..letters)
            .map(|i| char::from(b'a' + i as u8).to_string())
            .collect();
        let word = |rng: &mut R| -> Vec<usize> {
            let n = rng.gen_range(1..=max_len);
            (0..n).map(|_| rng.gen_range(0..letters)).collect()
        };
        let rules = (0..rules).map(|_| (word(rng), word(rng))).collect();
        let source = word(rng);
        let target = word(rng);
        SemiThueSystem {
            alphabet,
            rules,
            source,
            target,
        }
    }
}
