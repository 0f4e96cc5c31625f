//! Bottom-up evaluation of hypotheses against background knowledge and
//! classification of the resulting example coverage.

mod eval;
mod examples;
mod kb;
mod relation;

use std::collections::BTreeSet;
use std::fmt;

use fixedbitset::FixedBitSet;
use rustc_hash::FxHashMap;

pub use eval::{EvalBudget, EvalError};
pub use examples::{ExampleError, ExampleSet};
pub use kb::{KbError, KnowledgeBase};
pub use relation::Relation;

use eval::{compile, fixpoint, rule_derives, LocalSymbols, View};
use crate::logic::{Hypothesis, Literal, PredSig, Term};

/// Ground atoms of a least model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    atoms: BTreeSet<Literal>,
}

impl Model {
    pub fn contains(&self, atom: &Literal) -> bool {
        self.atoms.contains(atom)
    }

    pub fn atoms(&self) -> &BTreeSet<Literal> {
        &self.atoms
    }

    pub fn atoms_of(&self, pred: &PredSig) -> BTreeSet<Literal> {
        self.atoms.iter().filter(|a| a.sig() == *pred).cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

fn check_range_restricted(h: &Hypothesis) -> Result<(), EvalError> {
    match h.rules().iter().find(|r| !r.is_range_restricted()) {
        Some(r) => Err(EvalError::NotRangeRestricted(r.to_string())),
        None => Ok(()),
    }
}

fn head_sigs(h: &Hypothesis) -> Vec<PredSig> {
    let mut v: Vec<PredSig> = h.rules().iter().map(|r| r.head.sig()).collect();
    v.sort();
    v.dedup();
    v
}

/// Runs `h` over the knowledge base and hands the final relations to `k`.
fn evaluate<R>(
    h: &Hypothesis,
    kb: &KnowledgeBase,
    budget: &EvalBudget,
    k: impl FnOnce(&LocalSymbols<'_>, View<'_>) -> R,
) -> Result<R, EvalError> {
    check_range_restricted(h)?;
    let mut local = LocalSymbols::new(&kb.syms);
    let mut overlay = FxHashMap::default();
    if kb.reads_any(&head_sigs(h)) {
        // background rules depend on the hypothesis: close everything again
        let base = kb.fact_relations();
        let rules: Vec<_> = kb.rules().iter().chain(h.rules()).map(|r| compile(r, &mut local)).collect();
        fixpoint(&base, &mut overlay, &rules, budget)?;
        Ok(k(&local, View { base: &base, overlay: &overlay }))
    } else {
        let rules: Vec<_> = h.rules().iter().map(|r| compile(r, &mut local)).collect();
        fixpoint(&kb.closure, &mut overlay, &rules, budget)?;
        Ok(k(&local, View { base: &kb.closure, overlay: &overlay }))
    }
}

/// The least model of the background knowledge extended with `h`.
pub fn least_model(h: &Hypothesis, kb: &KnowledgeBase) -> Result<Model, EvalError> {
    least_model_with(h, kb, &EvalBudget::default())
}

pub fn least_model_with(h: &Hypothesis, kb: &KnowledgeBase, budget: &EvalBudget) -> Result<Model, EvalError> {
    evaluate(h, kb, budget, |local, view| {
        let mut preds: BTreeSet<u32> = (0..kb.closure.len() as u32).collect();
        preds.extend(view.overlay.keys().copied());
        let mut atoms = BTreeSet::new();
        for p in preds {
            let sig = local.pred_sig(p);
            for t in view.get(p).tuples() {
                let args = t.iter().map(|c| Term::Const(local.const_name(*c).clone())).collect();
                atoms.insert(Literal::new(sig.name.clone(), args));
            }
        }
        Model { atoms }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Completeness {
    Complete,
    Partial,
    TotallyIncomplete,
}

impl fmt::Display for Completeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Completeness::Complete => "complete",
            Completeness::Partial => "partial",
            Completeness::TotallyIncomplete => "totally incomplete",
        })
    }
}

/// Which examples a hypothesis entails. Bit `i - 1` stands for example `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageRecord {
    pub pos_covered: FixedBitSet,
    pub neg_covered: FixedBitSet,
    /// Evaluation hit its budget; the record then claims no coverage.
    pub eval_failed: bool,
}

impl CoverageRecord {
    pub fn failed(num_pos: usize, num_neg: usize) -> Self {
        CoverageRecord {
            pos_covered: FixedBitSet::with_capacity(num_pos),
            neg_covered: FixedBitSet::with_capacity(num_neg),
            eval_failed: true,
        }
    }

    pub fn tp(&self) -> usize {
        self.pos_covered.count_ones(..)
    }

    pub fn fp(&self) -> usize {
        self.neg_covered.count_ones(..)
    }

    pub fn fn_(&self) -> usize {
        self.pos_covered.len() - self.tp()
    }

    pub fn tn(&self) -> usize {
        self.neg_covered.len() - self.fp()
    }

    pub fn completeness(&self) -> Completeness {
        let tp = self.tp();
        if tp == self.pos_covered.len() {
            Completeness::Complete
        } else if tp == 0 {
            Completeness::TotallyIncomplete
        } else {
            Completeness::Partial
        }
    }

    pub fn is_complete(&self) -> bool {
        self.completeness() == Completeness::Complete
    }

    pub fn is_totally_incomplete(&self) -> bool {
        self.tp() == 0
    }

    pub fn is_consistent(&self) -> bool {
        self.fp() == 0
    }

    /// Covers at least one positive and no negative example.
    pub fn is_promising(&self) -> bool {
        self.tp() > 0 && self.is_consistent()
    }
}

/// Examples resolved against a knowledge base's symbol table, ready for
/// repeated coverage tests.
pub struct Tester<'a> {
    kb: &'a KnowledgeBase,
    target: Option<PredSig>,
    pos: Vec<Option<Vec<u32>>>,
    neg: Vec<Option<Vec<u32>>>,
    budget: EvalBudget,
}

impl<'a> Tester<'a> {
    pub fn new(kb: &'a KnowledgeBase, exs: &ExampleSet) -> Self {
        Self::with_budget(kb, exs, EvalBudget::default())
    }

    pub fn with_budget(kb: &'a KnowledgeBase, exs: &ExampleSet, budget: EvalBudget) -> Self {
        let resolve = |e: &Literal| -> Option<Vec<u32>> {
            e.args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => kb.syms.consts.get(c),
                    Term::Var(_) => None,
                })
                .collect()
        };
        Tester {
            kb,
            target: exs.target(),
            pos: exs.pos().iter().map(resolve).collect(),
            neg: exs.neg().iter().map(resolve).collect(),
            budget,
        }
    }

    pub fn num_pos(&self) -> usize {
        self.pos.len()
    }

    pub fn num_neg(&self) -> usize {
        self.neg.len()
    }

    pub fn kb(&self) -> &KnowledgeBase {
        self.kb
    }

    /// Tests `h`. A budget overrun yields an empty record flagged
    /// `eval_failed`.
    pub fn coverage(&self, h: &Hypothesis) -> CoverageRecord {
        self.try_coverage(h).unwrap_or_else(|_| CoverageRecord::failed(self.pos.len(), self.neg.len()))
    }

    pub fn try_coverage(&self, h: &Hypothesis) -> Result<CoverageRecord, EvalError> {
        let mut rec = CoverageRecord {
            pos_covered: FixedBitSet::with_capacity(self.pos.len()),
            neg_covered: FixedBitSet::with_capacity(self.neg.len()),
            eval_failed: false,
        };
        let Some(target) = &self.target else { return Ok(rec) };
        if !h.is_recursive() && !self.kb.reads_any(&head_sigs(h)) {
            check_range_restricted(h)?;
            let mut local = LocalSymbols::new(&self.kb.syms);
            let rules: Vec<_> =
                h.rules().iter().filter(|r| r.head.sig() == *target).map(|r| compile(r, &mut local)).collect();
            let empty = FxHashMap::default();
            let view = View { base: &self.kb.closure, overlay: &empty };
            let holds = |e: &Option<Vec<u32>>| e.as_ref().is_some_and(|args| rules.iter().any(|r| rule_derives(r, args, view)));
            mark(&mut rec.pos_covered, &self.pos, holds);
            mark(&mut rec.neg_covered, &self.neg, holds);
            return Ok(rec);
        }
        evaluate(h, self.kb, &self.budget, |local, view| {
            let rel = local.find_pred(target).map(|p| view.get(p));
            let holds = |e: &Option<Vec<u32>>| match (e, rel) {
                (Some(args), Some(rel)) => rel.contains(args),
                _ => false,
            };
            mark(&mut rec.pos_covered, &self.pos, holds);
            mark(&mut rec.neg_covered, &self.neg, holds);
        })?;
        Ok(rec)
    }
}

fn mark(bits: &mut FixedBitSet, exs: &[Option<Vec<u32>>], holds: impl Fn(&Option<Vec<u32>>) -> bool) {
    for (i, e) in exs.iter().enumerate() {
        if holds(e) {
            bits.insert(i);
        }
    }
}

/// Coverage of `h` on `exs`.
pub fn coverage(h: &Hypothesis, kb: &KnowledgeBase, exs: &ExampleSet) -> CoverageRecord {
    Tester::new(kb, exs).coverage(h)
}
