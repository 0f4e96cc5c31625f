//! Positive and negative examples with stable 1-based IDs.

use thiserror::Error;

use crate::logic::parse::{ast_to_literal, read_clauses, ParseError, VarScope};
use crate::logic::{Literal, PredSig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExampleError {
    #[error("syntax error: {0}")]
    Syntax(#[from] ParseError),
    #[error("line {0}: expected pos(Atom). or neg(Atom).")]
    Malformed(usize),
    #[error("example {0} is not ground")]
    NonGround(String),
    #[error("examples use more than one predicate: {0} and {1}")]
    MixedTargets(String, String),
}

/// Example `i` (1-based) of each list keeps its ID for the whole run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExampleSet {
    pos: Vec<Literal>,
    neg: Vec<Literal>,
}

impl ExampleSet {
    pub fn new(pos: Vec<Literal>, neg: Vec<Literal>) -> Result<Self, ExampleError> {
        let mut target: Option<PredSig> = None;
        for e in pos.iter().chain(&neg) {
            if !e.is_ground() {
                return Err(ExampleError::NonGround(e.to_string()));
            }
            match &target {
                None => target = Some(e.sig()),
                Some(t) if *t != e.sig() => return Err(ExampleError::MixedTargets(t.to_string(), e.sig().to_string())),
                _ => {}
            }
        }
        Ok(ExampleSet { pos, neg })
    }

    /// Parses `pos(f(a)).` and `neg(f(b)).` lines.
    pub fn parse(text: &str) -> Result<Self, ExampleError> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for c in read_clauses(text)? {
            let (name, args) = c.head.functor().ok_or(ExampleError::Malformed(c.line))?;
            if !c.body.is_empty() || args.len() != 1 || !matches!(name, "pos" | "neg") {
                return Err(ExampleError::Malformed(c.line));
            }
            let lit = ast_to_literal(&args[0], &mut VarScope::default(), c.line)?;
            if name == "pos" {
                pos.push(lit);
            } else {
                neg.push(lit);
            }
        }
        Self::new(pos, neg)
    }

    pub fn pos(&self) -> &[Literal] {
        &self.pos
    }

    pub fn neg(&self) -> &[Literal] {
        &self.neg
    }

    pub fn num_pos(&self) -> usize {
        self.pos.len()
    }

    pub fn num_neg(&self) -> usize {
        self.neg.len()
    }

    pub fn target(&self) -> Option<PredSig> {
        self.pos.first().or(self.neg.first()).map(Literal::sig)
    }

    /// Atoms listed as both positive and negative.
    pub fn contradictions(&self) -> Vec<&Literal> {
        self.pos.iter().filter(|p| self.neg.contains(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_ids() {
        let exs = ExampleSet::parse("pos(f([1,3,5,7])).\npos(f([6,4,2])).\nneg(f([2,3,1])). % comment\n").unwrap();
        assert_eq!(exs.num_pos(), 2);
        assert_eq!(exs.pos()[0].to_string(), "f([1,3,5,7])");
        assert_eq!(exs.target(), Some(PredSig::new("f", 1)));
        assert!(exs.contradictions().is_empty());
    }

    #[test]
    fn rejects_bad_examples() {
        assert!(matches!(ExampleSet::parse("pos(f(X))."), Err(ExampleError::NonGround(_))));
        assert!(matches!(ExampleSet::parse("ex(f(a))."), Err(ExampleError::Malformed(1))));
        assert!(matches!(ExampleSet::parse("pos(f(a)). neg(g(a))."), Err(ExampleError::MixedTargets(..))));
    }
}
