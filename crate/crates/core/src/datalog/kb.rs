//! Background knowledge: ground facts plus definite rules, closed once.

use rustc_hash::FxHashMap;
use thiserror::Error;

use super::eval::{compile, fixpoint, EvalBudget, EvalError, LocalSymbols, Symbols};
use super::relation::Relation;
use crate::logic::parse::{clause_to_rule, read_clauses, ParseError};
use crate::logic::{Literal, PredSig, Rule, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbError {
    #[error("syntax error: {0}")]
    Syntax(#[from] ParseError),
    #[error("fact {0} is not ground")]
    NonGroundFact(String),
    #[error("background rule {0} has a head variable missing from its body")]
    NotRangeRestricted(String),
    #[error("background knowledge mentions the target predicate {0}")]
    UsesTarget(String),
    #[error("closing the background rules failed: {0}")]
    Eval(#[from] EvalError),
}

/// Background knowledge with its least model precomputed.
#[derive(Clone, Debug)]
pub struct KnowledgeBase {
    facts: Vec<Literal>,
    rules: Vec<Rule>,
    pub(crate) syms: Symbols,
    /// Least model of facts and rules, indexed by predicate id.
    pub(crate) closure: Vec<Relation>,
}

impl KnowledgeBase {
    pub fn new(facts: Vec<Literal>, rules: Vec<Rule>) -> Result<Self, KbError> {
        Self::with_budget(facts, rules, &EvalBudget::default())
    }

    pub fn with_budget(facts: Vec<Literal>, rules: Vec<Rule>, budget: &EvalBudget) -> Result<Self, KbError> {
        if let Some(f) = facts.iter().find(|f| !f.is_ground()) {
            return Err(KbError::NonGroundFact(f.to_string()));
        }
        if let Some(r) = rules.iter().find(|r| !r.is_range_restricted()) {
            return Err(KbError::NotRangeRestricted(r.to_string()));
        }
        let mut syms = Symbols::default();
        for lit in facts.iter().chain(rules.iter().flat_map(|r| std::iter::once(&r.head).chain(r.body()))) {
            syms.preds.intern(&lit.sig());
            for t in &lit.args {
                if let Term::Const(c) = t {
                    syms.consts.intern(c);
                }
            }
        }
        let mut closure: Vec<Relation> = (0..syms.preds.len()).map(|p| Relation::new(syms.preds.resolve(p as u32).arity)).collect();
        for f in &facts {
            let p = syms.preds.get(&f.sig()).unwrap();
            let t: Vec<u32> = f
                .args
                .iter()
                .map(|a| match a {
                    Term::Const(c) => syms.consts.get(c).unwrap(),
                    Term::Var(_) => unreachable!("facts are ground"),
                })
                .collect();
            closure[p as usize].insert(&t);
        }
        if !rules.is_empty() {
            let mut local = LocalSymbols::new(&syms);
            let compiled: Vec<_> = rules.iter().map(|r| compile(r, &mut local)).collect();
            let mut overlay = FxHashMap::default();
            fixpoint(&closure, &mut overlay, &compiled, budget)?;
            for (p, rel) in overlay {
                closure[p as usize] = rel;
            }
        }
        Ok(KnowledgeBase { facts, rules, syms, closure })
    }

    /// Parses a background file: facts and definite rules, one clause each.
    pub fn parse(text: &str) -> Result<Self, KbError> {
        let (facts, rules) = Self::parse_clauses(text)?;
        Self::new(facts, rules)
    }

    /// Splits a background file into facts and rules without closing it.
    pub fn parse_clauses(text: &str) -> Result<(Vec<Literal>, Vec<Rule>), KbError> {
        let mut facts = Vec::new();
        let mut rules = Vec::new();
        for c in read_clauses(text)? {
            let r = clause_to_rule(&c)?;
            if r.body().is_empty() {
                if !r.head.is_ground() {
                    return Err(KbError::NonGroundFact(r.head.to_string()));
                }
                facts.push(r.head);
            } else {
                rules.push(r);
            }
        }
        Ok((facts, rules))
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new()).expect("empty background is valid")
    }

    pub fn facts(&self) -> &[Literal] {
        &self.facts
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Number of atoms in the closed background model.
    pub fn model_size(&self) -> usize {
        self.closure.iter().map(Relation::len).sum()
    }

    /// Rejects background knowledge that defines or uses the target.
    pub fn check_target(&self, target: &PredSig) -> Result<(), KbError> {
        let hit = self.facts.iter().any(|f| f.sig() == *target)
            || self.rules.iter().any(|r| r.head.sig() == *target || r.body().iter().any(|l| l.sig() == *target));
        if hit {
            Err(KbError::UsesTarget(target.to_string()))
        } else {
            Ok(())
        }
    }

    /// Relations holding only the ground facts.
    pub(crate) fn fact_relations(&self) -> Vec<Relation> {
        let mut rels: Vec<Relation> =
            (0..self.syms.preds.len()).map(|p| Relation::new(self.syms.preds.resolve(p as u32).arity)).collect();
        for f in &self.facts {
            let t: Vec<u32> = f.args.iter().filter_map(|a| match a {
                Term::Const(c) => self.syms.consts.get(c),
                Term::Var(_) => None,
            }).collect();
            rels[self.syms.preds.get(&f.sig()).unwrap() as usize].insert(&t);
        }
        rels
    }

    /// Whether some background rule body reads one of `preds`.
    pub(crate) fn reads_any(&self, preds: &[PredSig]) -> bool {
        self.rules.iter().any(|r| r.body().iter().any(|l| preds.contains(&l.sig())))
    }
}
