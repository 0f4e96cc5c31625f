//! Exact lexicographic selection over promising programs by
//! branch-and-bound.

use fixedbitset::FixedBitSet;

use super::pool::{PromisingPool, RuleId};
use crate::datalog::Tester;
use crate::logic::{Cost, Hypothesis};

/// The optimum found by [`optimise`]: sorted rule IDs, credited coverage
/// and total size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub rule_ids: Vec<RuleId>,
    pub coverage: FixedBitSet,
    pub cost: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineStatus {
    Solution,
    NoSolution,
}

#[derive(Clone, Debug)]
pub struct CombineResult {
    pub status: CombineStatus,
    pub selected: Vec<RuleId>,
    pub hypothesis: Hypothesis,
    pub coverage: FixedBitSet,
    pub cost: Cost,
    /// Recursive selections rejected on the negatives during this call.
    pub rejected: usize,
}

struct Search<'a> {
    pool: &'a PromisingPool,
    order: Vec<usize>,
    prog_rules: Vec<FixedBitSet>,
    suffix_rules: Vec<FixedBitSet>,
    sizes: Vec<usize>,
    blocked: Vec<FixedBitSet>,
    bound: usize,
    best: Option<(usize, usize, Vec<RuleId>)>,
    best_is_incumbent: bool,
}

fn ids_of(set: &FixedBitSet) -> Vec<RuleId> {
    set.ones().map(|i| i as RuleId + 1).collect()
}

impl Search<'_> {
    fn marginal(&self, p: usize, sel: &FixedBitSet) -> usize {
        self.prog_rules[p].difference(sel).map(|r| self.sizes[r]).sum()
    }

    fn consider(&mut self, sel: &FixedBitSet, cost: usize, cov: &FixedBitSet) {
        let n = cov.count_ones(..);
        if n == 0 {
            return;
        }
        let better = match &self.best {
            None => true,
            Some((bc, bk, bids)) => {
                n > *bc
                    || (n == *bc && cost < *bk)
                    || (n == *bc && cost == *bk && !self.best_is_incumbent && ids_of(sel) < *bids)
            }
        };
        if better {
            self.best = Some((n, cost, ids_of(sel)));
            self.best_is_incumbent = false;
        }
    }

    /// Whether nothing reachable below this node can beat the best.
    fn hopeless(&self, depth: usize, sel: &FixedBitSet, cost: usize, cov: &FixedBitSet) -> bool {
        let Some((bc, bk, _)) = &self.best else { return false };
        let mut reachable = sel.clone();
        reachable.union_with(&self.suffix_rules[depth]);
        let mut ub = cov.clone();
        let mut useful: Vec<(usize, usize)> = Vec::new();
        for (p, prog) in self.pool.programs().iter().enumerate() {
            if prog.coverage.is_subset(cov) || !self.prog_rules[p].is_subset(&reachable) {
                continue;
            }
            let m = self.marginal(p, sel);
            if cost + m < self.bound {
                ub.union_with(&prog.coverage);
                useful.push((p, m));
            }
        }
        let ub_n = ub.count_ones(..);
        if ub_n != *bc {
            return ub_n < *bc;
        }
        // matching the best coverage means covering every example in
        // `ub - cov`; each needs at least its cheapest program
        let mut lb = 0;
        for e in ub.difference(cov) {
            let cheapest = useful
                .iter()
                .filter(|(p, _)| self.pool.programs()[*p].coverage.contains(e))
                .map(|(_, m)| *m)
                .min()
                .unwrap_or(usize::MAX);
            lb = lb.max(cheapest);
        }
        let total = cost.saturating_add(lb);
        total > *bk || (self.best_is_incumbent && total >= *bk)
    }

    fn dfs(&mut self, depth: usize, sel: &FixedBitSet, cost: usize, cov: &FixedBitSet) {
        if depth == self.order.len() || self.hopeless(depth, sel, cost, cov) {
            return;
        }
        let p = self.order[depth];
        if !self.prog_rules[p].is_subset(sel) {
            let extra = self.marginal(p, sel);
            if cost + extra < self.bound {
                let mut next = sel.clone();
                next.union_with(&self.prog_rules[p]);
                if !self.blocked.iter().any(|b| b.is_subset(&next)) {
                    let mut next_cov = cov.clone();
                    for (q, prog) in self.pool.programs().iter().enumerate() {
                        if self.prog_rules[q].is_subset(&next) {
                            next_cov.union_with(&prog.coverage);
                        }
                    }
                    self.consider(&next, cost + extra, &next_cov);
                    self.dfs(depth + 1, &next, cost + extra, &next_cov);
                }
            }
        }
        self.dfs(depth + 1, sel, cost, cov);
    }
}

/// The selection maximising credited coverage, then minimising total
/// size, among selections of size below `bound` containing no blocked
/// set. Ties go to the lexicographically smallest sorted ID list. With an
/// incumbent `(covered, cost)` only strictly better selections count.
pub fn optimise(pool: &PromisingPool, bound: Option<usize>, incumbent: Option<(usize, usize)>) -> Option<Selection> {
    let nr = pool.num_rules();
    let to_set = |ids: &[RuleId]| {
        let mut s = FixedBitSet::with_capacity(nr);
        for id in ids {
            s.insert(*id as usize - 1);
        }
        s
    };
    let prog_rules: Vec<FixedBitSet> = pool.programs().iter().map(|p| to_set(&p.rule_ids)).collect();
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by_key(|&p| {
        let prog = &pool.programs()[p];
        (std::cmp::Reverse(prog.coverage.count_ones(..)), pool.cost_of(&prog.rule_ids), p)
    });
    let mut suffix_rules = vec![FixedBitSet::with_capacity(nr); order.len() + 1];
    for i in (0..order.len()).rev() {
        let mut s = suffix_rules[i + 1].clone();
        s.union_with(&prog_rules[order[i]]);
        suffix_rules[i] = s;
    }
    let mut search = Search {
        pool,
        order,
        sizes: (1..=nr as RuleId).map(|id| pool.rule_size(id)).collect(),
        blocked: pool.blocked().iter().map(|b| to_set(b)).collect(),
        prog_rules,
        suffix_rules,
        bound: bound.unwrap_or(usize::MAX),
        best: incumbent.map(|(c, k)| (c, k, Vec::new())),
        best_is_incumbent: incumbent.is_some(),
    };
    let empty = FixedBitSet::with_capacity(nr);
    search.dfs(0, &empty, 0, &FixedBitSet::with_capacity(pool.num_pos()));
    if search.best_is_incumbent {
        return None;
    }
    let (_, cost, rule_ids) = search.best?;
    Some(Selection { coverage: pool.credited_coverage(&rule_ids), rule_ids, cost })
}

/// Finds the best selection and re-tests it on the negatives when it is
/// recursive; an inconsistent (or unevaluable) recursive selection is
/// blocked together with its supersets and the search resumes.
pub fn solve_combine(
    pool: &mut PromisingPool,
    bound: Option<usize>,
    tester: &Tester<'_>,
    incumbent: Option<(usize, usize)>,
) -> CombineResult {
    let mut rejected = 0;
    loop {
        let Some(sel) = optimise(pool, bound, incumbent) else {
            return CombineResult {
                status: CombineStatus::NoSolution,
                selected: Vec::new(),
                hypothesis: Hypothesis::empty(),
                coverage: FixedBitSet::with_capacity(pool.num_pos()),
                cost: Cost(0),
                rejected,
            };
        };
        let h = pool.hypothesis_of(&sel.rule_ids);
        if h.is_recursive() {
            let rec = tester.coverage(&h);
            if rec.eval_failed || !rec.is_consistent() {
                if rec.eval_failed {
                    log::warn!("could not evaluate combination {h}; blocking it");
                }
                pool.block(sel.rule_ids);
                rejected += 1;
                continue;
            }
        }
        return CombineResult {
            status: CombineStatus::Solution,
            cost: Cost(sel.cost),
            hypothesis: h,
            coverage: sel.coverage,
            selected: sel.rule_ids,
            rejected,
        };
    }
}
