//! Definite clauses and the hypotheses built from them.

use std::collections::BTreeSet;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use super::canon::canonical_rule;
use super::term::{Literal, PredSig, Var};

/// A definite clause: one head atom and a set of body atoms.
///
/// The body is kept sorted and deduplicated, so structural equality already
/// ignores body order. Equality up to variable renaming needs
/// [`canonical_rule`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Rule {
    pub head: Literal,
    body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Literal, body: impl IntoIterator<Item = Literal>) -> Self {
        let mut body: Vec<Literal> = body.into_iter().collect();
        body.sort();
        body.dedup();
        Rule { head, body }
    }

    pub fn body(&self) -> &[Literal] {
        &self.body
    }

    /// Number of literals, head included.
    pub fn size(&self) -> usize {
        1 + self.body.len()
    }

    pub fn is_recursive(&self) -> bool {
        self.body.iter().any(|l| l.same_pred(&self.head))
    }

    /// Distinct variables, in first-occurrence order over head then body.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = Vec::new();
        for v in self.head.vars().chain(self.body.iter().flat_map(|l| l.vars())) {
            if !seen.contains(&v) {
                seen.push(v);
            }
        }
        seen
    }

    pub fn var_count(&self) -> usize {
        self.vars().len()
    }

    pub fn canonical(&self) -> Rule {
        canonical_rule(self)
    }

    /// Every head variable also occurs in the body.
    pub fn is_range_restricted(&self) -> bool {
        self.head.vars().all(|v| self.body.iter().any(|l| l.vars().any(|w| w == v)))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(":- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}

/// Number of literals in a program.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Cost(pub usize);

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        Cost(iter.map(|c| c.0).sum())
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of canonical rules.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Hypothesis {
    rules: Vec<Rule>,
}

impl Hypothesis {
    /// Canonicalises and deduplicates the given rules.
    pub fn new(rules: impl IntoIterator<Item = Rule>) -> Self {
        Self::from_canonical(rules.into_iter().map(|r| canonical_rule(&r)))
    }

    /// Builds a hypothesis from rules that are already canonical.
    pub fn from_canonical(rules: impl IntoIterator<Item = Rule>) -> Self {
        let mut rules: Vec<Rule> = rules.into_iter().collect();
        rules.sort();
        rules.dedup();
        Hypothesis { rules }
    }

    pub fn empty() -> Self {
        Hypothesis::default()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn cost(&self) -> Cost {
        program_cost(self)
    }

    pub fn is_recursive(&self) -> bool {
        let heads: BTreeSet<PredSig> = self.rules.iter().map(|r| r.head.sig()).collect();
        self.rules.iter().any(|r| r.body().iter().any(|l| heads.contains(&l.sig())))
    }

    pub fn union(&self, other: &Hypothesis) -> Hypothesis {
        Hypothesis::from_canonical(self.rules.iter().chain(other.rules.iter()).cloned())
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rules.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Sum over rules of one plus the body size.
pub fn program_cost(h: &Hypothesis) -> Cost {
    h.rules.iter().map(|r| Cost(r.size())).sum()
}

/// A program is separable when it has at least two rules and no head
/// predicate occurs in any body.
pub fn is_separable(h: &Hypothesis) -> bool {
    h.len() >= 2 && !h.is_recursive()
}
