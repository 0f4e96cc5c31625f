//! Brute-force reference learner for small instances.
//!
//! Enumerates every canonical rule the bias admits with its own nested
//! loops, then every set of such rules (separable sets included) up to a
//! cost cap. It shares evaluation with the engine but none of the
//! generator's pruning, so it can check the search independently.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use thiserror::Error;

use crate::bias::BiasSpec;
use crate::datalog::{EvalBudget, ExampleSet, KnowledgeBase, Tester};
use crate::logic::{Cost, Hypothesis, Literal, Rule, Term, Var};

/// Default cap on the number of hypotheses evaluated in full.
pub const DEFAULT_MAX_EVALUATIONS: u64 = 2_000_000;
/// Default cap on the number of candidate rules.
pub const DEFAULT_MAX_RULES: usize = 5_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("hypothesis space too large for the oracle: {what} exceeds {limit}")]
    TooLarge { what: &'static str, limit: u64 },
}

#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub max_rules: usize,
    pub max_evaluations: u64,
    pub budget: EvalBudget,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_rules: DEFAULT_MAX_RULES, max_evaluations: DEFAULT_MAX_EVALUATIONS, budget: EvalBudget::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    /// `None` when no solution of cost at most the cap exists.
    pub optimum_cost: Option<Cost>,
    /// The optimum with the smallest rendering.
    pub witness: Option<Hypothesis>,
    pub num_optima: usize,
}

/// All canonical rules valid under `spec` with at most `max_size`
/// literals, in rendering order.
pub fn enumerate_rules(spec: &BiasSpec, max_size: usize, max_rules: usize) -> Result<Vec<Rule>, OracleError> {
    let head = spec.head_literal();
    let vars = spec.max_vars.max(head.arity());
    let mut lits = Vec::new();
    for sig in spec.body_vocabulary() {
        let mut choices: Vec<Vec<Term>> = Vec::with_capacity(sig.arity);
        for pos in 0..sig.arity {
            let mut c: Vec<Term> = (0..vars as Var).map(Term::Var).collect();
            c.extend(spec.constants_for(spec.slot_type(&sig.name, pos)).into_iter().map(Term::Const));
            choices.push(c);
        }
        let mut idx = vec![0usize; sig.arity];
        loop {
            lits.push(Literal::new(sig.name.clone(), idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect()));
            let mut p = 0;
            while p < sig.arity {
                idx[p] += 1;
                if idx[p] < choices[p].len() {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
            if p == sig.arity {
                break;
            }
        }
    }
    let max_body = spec.max_body.min(max_size.saturating_sub(1));
    let mut found = BTreeSet::new();
    let mut body = Vec::new();
    collect_bodies(spec, &head, &lits, 0, max_body, &mut body, &mut found, max_rules)?;
    let mut rules: Vec<(String, Rule)> = found.into_iter().map(|r: Rule| (r.to_string(), r)).collect();
    rules.sort();
    Ok(rules.into_iter().map(|(_, r)| r).collect())
}

#[allow(clippy::too_many_arguments)]
fn collect_bodies(
    spec: &BiasSpec,
    head: &Literal,
    lits: &[Literal],
    from: usize,
    max_body: usize,
    body: &mut Vec<Literal>,
    found: &mut BTreeSet<Rule>,
    max_rules: usize,
) -> Result<(), OracleError> {
    if !body.is_empty() {
        let rule = Rule::new(head.clone(), body.iter().cloned());
        if spec.is_valid_rule(&rule) {
            found.insert(rule.canonical());
            if found.len() > max_rules {
                return Err(OracleError::TooLarge { what: "candidate rules", limit: max_rules as u64 });
            }
        }
    }
    if body.len() == max_body {
        return Ok(());
    }
    for i in from..lits.len() {
        body.push(lits[i].clone());
        collect_bodies(spec, head, lits, i + 1, max_body, body, found, max_rules)?;
        body.pop();
    }
    Ok(())
}

struct Candidate {
    rule: Rule,
    recursive: bool,
    pos: FixedBitSet,
    neg: FixedBitSet,
}

#[derive(Default)]
struct Best {
    cost: Option<usize>,
    count: usize,
    witness: Option<(String, Hypothesis)>,
}

impl Best {
    fn offer(&mut self, cost: usize, h: Hypothesis) {
        self.merge_in(Best { cost: Some(cost), count: 1, witness: Some((h.to_string(), h)) });
    }

    fn merge_in(&mut self, other: Best) {
        let Some(c) = other.cost else { return };
        match self.cost {
            Some(mine) if mine < c => {}
            Some(mine) if mine == c => {
                self.count += other.count;
                if other.witness.as_ref().map(|w| &w.0) < self.witness.as_ref().map(|w| &w.0) {
                    self.witness = other.witness;
                }
            }
            _ => *self = other,
        }
    }
}

struct Search<'a> {
    tester: &'a Tester<'a>,
    cands: &'a [Candidate],
    max_clauses: usize,
    cap: &'a AtomicUsize,
    evaluations: &'a AtomicU64,
    max_evaluations: u64,
}

/// A consistent set of candidates under construction.
struct Partial {
    chosen: Vec<usize>,
    cost: usize,
    pos: FixedBitSet,
    neg: FixedBitSet,
    recursive: bool,
}

impl Search<'_> {
    /// Adds candidate `i` to `set`, records a solution and recurses into
    /// larger sets. Leaves `set` as it found it.
    fn visit(&self, i: usize, set: &Partial, best: &mut Best) -> Result<(), OracleError> {
        let c = &self.cands[i];
        let cost = set.cost + c.rule.size();
        if cost > self.cap.load(Ordering::Relaxed) || set.chosen.len() == self.max_clauses {
            return Ok(());
        }
        let mut chosen = set.chosen.clone();
        chosen.push(i);
        let recursive = set.recursive || c.recursive;
        let (pos, neg) = if recursive {
            if self.evaluations.fetch_add(1, Ordering::Relaxed) >= self.max_evaluations {
                return Err(OracleError::TooLarge { what: "evaluated hypotheses", limit: self.max_evaluations });
            }
            let rec = self.tester.coverage(&self.hypothesis(&chosen));
            (rec.pos_covered, rec.neg_covered)
        } else {
            let mut pos = set.pos.clone();
            pos.union_with(&c.pos);
            let mut neg = set.neg.clone();
            neg.union_with(&c.neg);
            (pos, neg)
        };
        // Definite programs are monotone, so an inconsistent set has only
        // inconsistent supersets. A failed evaluation reports no coverage
        // and is therefore never a solution, but its supersets are kept.
        if !neg.is_clear() {
            return Ok(());
        }
        if pos.is_full() {
            best.offer(cost, self.hypothesis(&chosen));
            self.cap.fetch_min(cost, Ordering::Relaxed);
        }
        let next = Partial { chosen, cost, pos, neg, recursive };
        for j in i + 1..self.cands.len() {
            self.visit(j, &next, best)?;
        }
        Ok(())
    }

    fn hypothesis(&self, chosen: &[usize]) -> Hypothesis {
        Hypothesis::from_canonical(chosen.iter().map(|&i| self.cands[i].rule.clone()))
    }
}

/// The minimal cost of a complete, consistent hypothesis with cost at most
/// `size_cap`, one witness and the number of optima.
pub fn brute_force_optimal(
    kb: &KnowledgeBase,
    exs: &ExampleSet,
    spec: &BiasSpec,
    size_cap: Cost,
) -> Result<OracleResult, OracleError> {
    brute_force_optimal_with(kb, exs, spec, size_cap, &OracleLimits::default())
}

pub fn brute_force_optimal_with(
    kb: &KnowledgeBase,
    exs: &ExampleSet,
    spec: &BiasSpec,
    size_cap: Cost,
    limits: &OracleLimits,
) -> Result<OracleResult, OracleError> {
    let tester = Tester::with_budget(kb, exs, limits.budget);
    let rules = enumerate_rules(spec, size_cap.0, limits.max_rules)?;
    let cands: Vec<Candidate> = rules
        .into_iter()
        .filter_map(|rule| {
            let recursive = rule.is_recursive();
            let (pos, neg) = if recursive {
                (FixedBitSet::with_capacity(exs.num_pos()), FixedBitSet::with_capacity(exs.num_neg()))
            } else {
                let rec = tester.coverage(&Hypothesis::from_canonical([rule.clone()]));
                if !rec.is_consistent() {
                    return None;
                }
                (rec.pos_covered, rec.neg_covered)
            };
            Some(Candidate { rule, recursive, pos, neg })
        })
        .collect();
    let cap = AtomicUsize::new(size_cap.0);
    let evaluations = AtomicU64::new(0);
    let search = Search {
        tester: &tester,
        cands: &cands,
        max_clauses: spec.max_clauses,
        cap: &cap,
        evaluations: &evaluations,
        max_evaluations: limits.max_evaluations,
    };
    let root = Partial {
        chosen: Vec::new(),
        cost: 0,
        pos: FixedBitSet::with_capacity(exs.num_pos()),
        neg: FixedBitSet::with_capacity(exs.num_neg()),
        recursive: false,
    };
    let best = (0..cands.len())
        .into_par_iter()
        .map(|first| {
            let mut best = Best::default();
            search.visit(first, &root, &mut best).map(|_| best)
        })
        .try_reduce(Best::default, |mut a, b| {
            a.merge_in(b);
            Ok(a)
        })?;
    Ok(OracleResult {
        optimum_cost: best.cost.map(Cost),
        witness: best.witness.map(|(_, h)| h),
        num_optima: best.count,
    })
}
