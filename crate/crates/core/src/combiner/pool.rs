//! Promising programs with interned rule IDs.

use fixedbitset::FixedBitSet;
use rustc_hash::FxHashMap;

use crate::logic::{Hypothesis, Rule};

/// Rule IDs start at 1.
pub type RuleId = u32;

#[derive(Clone, Debug)]
pub struct PooledProgram {
    pub hypothesis: Hypothesis,
    /// IDs in the program's rule order.
    pub rule_ids: Vec<RuleId>,
    /// IDs this program introduced to the pool.
    pub new_rule_ids: Vec<RuleId>,
    /// Positive examples covered; bit `i - 1` is example `i`.
    pub coverage: FixedBitSet,
}

/// Programs that cover some positives and no negatives, sharing rule IDs
/// across programs, plus rule sets known to be inconsistent together.
#[derive(Clone, Debug)]
pub struct PromisingPool {
    num_pos: usize,
    rules: Vec<Rule>,
    index: FxHashMap<Rule, RuleId>,
    programs: Vec<PooledProgram>,
    blocked: Vec<Vec<RuleId>>,
}

impl PromisingPool {
    pub fn new(num_pos: usize) -> Self {
        PromisingPool { num_pos, rules: Vec::new(), index: FxHashMap::default(), programs: Vec::new(), blocked: Vec::new() }
    }

    pub fn num_pos(&self) -> usize {
        self.num_pos
    }

    /// Adds a program and its positive coverage, interning new rules.
    pub fn add(&mut self, h: &Hypothesis, coverage: FixedBitSet) -> usize {
        assert_eq!(coverage.len(), self.num_pos, "coverage width must match the positive examples");
        let mut rule_ids = Vec::with_capacity(h.len());
        let mut new_rule_ids = Vec::new();
        for r in h.rules() {
            let id = match self.index.get(r) {
                Some(id) => *id,
                None => {
                    self.rules.push(r.clone());
                    let id = self.rules.len() as RuleId;
                    self.index.insert(r.clone(), id);
                    new_rule_ids.push(id);
                    id
                }
            };
            rule_ids.push(id);
        }
        self.programs.push(PooledProgram { hypothesis: h.clone(), rule_ids, new_rule_ids, coverage });
        self.programs.len() - 1
    }

    /// Forbids selecting all of `ids` together (and any superset).
    pub fn block(&mut self, mut ids: Vec<RuleId>) {
        ids.sort_unstable();
        ids.dedup();
        if !self.blocked.contains(&ids) {
            self.blocked.push(ids);
        }
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id as usize - 1]
    }

    pub fn rule_size(&self, id: RuleId) -> usize {
        self.rule(id).size()
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn programs(&self) -> &[PooledProgram] {
        &self.programs
    }

    pub fn blocked(&self) -> &[Vec<RuleId>] {
        &self.blocked
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.programs.len()
    }

    /// Total size of the distinct rules in `ids`.
    pub fn cost_of(&self, ids: &[RuleId]) -> usize {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        ids.iter().map(|id| self.rule_size(*id)).sum()
    }

    /// Union of the coverage of every program whose rules all lie in `ids`.
    pub fn credited_coverage(&self, ids: &[RuleId]) -> FixedBitSet {
        let mut cov = FixedBitSet::with_capacity(self.num_pos);
        for p in &self.programs {
            if p.rule_ids.iter().all(|r| ids.contains(r)) {
                cov.union_with(&p.coverage);
            }
        }
        cov
    }

    pub fn is_blocked(&self, ids: &[RuleId]) -> bool {
        self.blocked.iter().any(|b| b.iter().all(|r| ids.contains(r)))
    }

    pub fn hypothesis_of(&self, ids: &[RuleId]) -> Hypothesis {
        Hypothesis::from_canonical(ids.iter().map(|id| self.rule(*id).clone()))
    }
}
