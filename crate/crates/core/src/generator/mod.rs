//! Enumeration of candidate programs in non-decreasing cost, skipping
//! programs ruled out by the constraint store.
//!
//! In combo mode only non-separable programs are produced: single
//! non-recursive rules, and multi-rule programs containing recursion. Every
//! multi-rule program includes a non-recursive base rule, since without
//! one nothing is derivable. Baseline mode also produces separable unions.

mod space;
mod store;

pub use store::{ConstraintKind, ConstraintStore};

use space::{Key, RuleSpace};
use store::MaskedRule;

use crate::bias::BiasSpec;
use crate::logic::Hypothesis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Combo,
    Baseline,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Next {
    Program(Hypothesis),
    /// Nothing of the current size is left.
    Exhausted,
}

/// Nondecreasing key sequences of length `k` whose costs sum to `total`.
fn compositions(keys: &[Key], k: usize, total: usize, mode: Mode) -> Vec<Vec<Key>> {
    fn go(keys: &[Key], from: usize, k: usize, left: usize, cur: &mut Vec<Key>, out: &mut Vec<Vec<Key>>) {
        if cur.len() == k {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for (i, key) in keys.iter().enumerate().skip(from) {
            if key.0 <= left {
                cur.push(*key);
                go(keys, i, k, left - key.0, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(keys, 0, k, total, &mut Vec::new(), &mut out);
    out.retain(|c| {
        let rec = c.iter().filter(|k| k.1).count();
        let base = c.len() - rec;
        if c.len() == 1 {
            base == 1
        } else {
            base >= 1 && (mode == Mode::Baseline || rec >= 1)
        }
    });
    out
}

struct Cursor {
    keys: Vec<Key>,
    idx: Vec<usize>,
    started: bool,
}

/// Yields each canonical program of the current size at most once.
pub struct Generator {
    space: RuleSpace,
    mode: Mode,
    max_clauses: usize,
    size: usize,
    plan: Vec<Vec<Key>>,
    next_plan: usize,
    cursor: Option<Cursor>,
}

impl Generator {
    pub fn new(spec: &BiasSpec, mode: Mode) -> Self {
        Generator {
            space: RuleSpace::new(spec),
            mode,
            max_clauses: spec.max_clauses,
            size: 0,
            plan: Vec::new(),
            next_plan: 0,
            cursor: None,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of distinct valid rules built so far.
    pub fn rule_count(&self) -> usize {
        self.space.rule_count()
    }

    /// Starts enumerating programs of cost exactly `size`.
    pub fn set_size(&mut self, size: usize) {
        self.space.ensure_cost(size);
        let keys = self.space.keys_up_to(size);
        self.size = size;
        self.plan = (1..=self.max_clauses).flat_map(|k| compositions(&keys, k, size, self.mode)).collect();
        self.next_plan = 0;
        self.cursor = None;
    }

    /// Smallest non-banned index `>= lb` in the bucket of `key`.
    fn first_valid(&mut self, key: Key, lb: usize, store: &ConstraintStore) -> Option<usize> {
        let n = self.space.bucket(key).len();
        (lb..n).find(|&i| !self.space.is_banned(key, i, store))
    }

    /// Moves the cursor to its next combination of non-banned rules.
    fn step(&mut self, store: &ConstraintStore) -> bool {
        let mut cur = self.cursor.take().expect("cursor");
        let k = cur.keys.len();
        let (mut p, mut lb) = if cur.started { (k - 1, cur.idx[k - 1] + 1) } else { (0, 0) };
        cur.started = true;
        let found = loop {
            match self.first_valid(cur.keys[p], lb, store) {
                Some(i) => {
                    cur.idx[p] = i;
                    if p + 1 == k {
                        break true;
                    }
                    p += 1;
                    lb = if cur.keys[p] == cur.keys[p - 1] { i + 1 } else { 0 };
                }
                None => {
                    if p == 0 {
                        break false;
                    }
                    p -= 1;
                    lb = cur.idx[p] + 1;
                }
            }
        };
        self.cursor = Some(cur);
        found
    }

    fn pruned_by_specialisations(&mut self, store: &ConstraintStore) -> bool {
        let cur = self.cursor.as_ref().unwrap();
        let slots: Vec<(Key, usize)> = cur.keys.iter().copied().zip(cur.idx.iter().copied()).collect();
        let mut common: Vec<u32> = self.space.spec_subsumers(slots[0].0, slots[0].1, store).to_vec();
        for &(key, i) in &slots[1..] {
            if common.is_empty() {
                break;
            }
            let other = self.space.spec_subsumers(key, i, store);
            common.retain(|g| other.binary_search(g).is_ok());
        }
        !common.is_empty()
    }

    /// The next unpruned program of the current size.
    pub fn next_program(&mut self, store: &ConstraintStore) -> Next {
        self.space.sync(store);
        loop {
            if self.cursor.is_none() {
                let Some(keys) = self.plan.get(self.next_plan).cloned() else {
                    return Next::Exhausted;
                };
                self.next_plan += 1;
                let k = keys.len();
                self.cursor = Some(Cursor { keys, idx: vec![0; k], started: false });
            }
            if !self.step(store) {
                self.cursor = None;
                continue;
            }
            if self.pruned_by_specialisations(store) {
                continue;
            }
            let cur = self.cursor.as_ref().unwrap();
            let rules: Vec<MaskedRule> = cur
                .keys
                .iter()
                .zip(&cur.idx)
                .map(|(key, i)| self.space.bucket(*key)[*i].rule.clone())
                .collect();
            if store.is_pruned_by_multi(&rules) {
                continue;
            }
            return Next::Program(Hypothesis::from_canonical(rules.into_iter().map(|m| m.rule)));
        }
    }

    /// Every program of cost `size` not pruned by `store`, in order.
    pub fn all_of_size(&mut self, size: usize, store: &ConstraintStore) -> Vec<Hypothesis> {
        self.set_size(size);
        let mut out = Vec::new();
        while let Next::Program(h) = self.next_program(store) {
            out.push(h);
        }
        out
    }
}
