//! Lazily built catalogue of canonical, bias-valid rules grouped by cost.

use std::collections::BTreeMap;

use rustc_hash::FxHashSet;

use super::store::{ConstraintStore, MaskedRule};
use crate::bias::{candidate_literals, BiasSpec, TypeEnv};
use crate::logic::{Literal, Rule};

/// Rules are grouped by `(cost, is_recursive)`.
pub(crate) type Key = (usize, bool);

pub(crate) struct RuleEntry {
    pub rule: MaskedRule,
    gen_checked: usize,
    banned: bool,
    spec_checked: usize,
    spec_subsumers: Vec<u32>,
}

pub(crate) struct RuleSpace {
    spec: BiasSpec,
    head: Literal,
    /// `layers[k]`: canonical rules with `k` body literals, valid or not.
    layers: Vec<Vec<Rule>>,
    seen: FxHashSet<Rule>,
    buckets: BTreeMap<Key, Vec<RuleEntry>>,
    /// Store the per-rule caches were computed against.
    store_id: Option<u64>,
}

impl RuleSpace {
    pub fn new(spec: &BiasSpec) -> Self {
        let head = spec.head_literal();
        RuleSpace {
            spec: spec.clone(),
            layers: vec![vec![Rule::new(head.clone(), [])]],
            head,
            seen: FxHashSet::default(),
            buckets: BTreeMap::new(),
            store_id: None,
        }
    }

    /// Builds every rule whose cost is at most `cost`.
    pub fn ensure_cost(&mut self, cost: usize) {
        let want = cost.saturating_sub(1).min(self.spec.max_body);
        while self.layers.len() <= want {
            self.grow();
        }
    }

    fn grow(&mut self) {
        let k = self.layers.len();
        let mut next = Vec::new();
        for partial in &self.layers[k - 1] {
            let env = TypeEnv::for_rule(&self.spec, partial).expect("partial rules are type consistent");
            for lit in candidate_literals(&self.spec, &env) {
                if lit == self.head || partial.body().contains(&lit) {
                    continue;
                }
                let body = partial.body().iter().cloned().chain(std::iter::once(lit));
                let rule = Rule::new(self.head.clone(), body).canonical();
                if self.seen.insert(rule.clone()) {
                    next.push(rule);
                }
            }
        }
        let mut valid: Vec<(String, Rule)> =
            next.iter().filter(|r| self.spec.is_valid_rule(r)).map(|r| (r.to_string(), r.clone())).collect();
        valid.sort();
        for (_, r) in valid {
            let key = (r.size(), r.is_recursive());
            self.buckets.entry(key).or_default().push(RuleEntry {
                rule: MaskedRule::new(r),
                gen_checked: 0,
                banned: false,
                spec_checked: 0,
                spec_subsumers: Vec::new(),
            });
        }
        self.layers.push(next);
    }

    pub fn keys_up_to(&self, cost: usize) -> Vec<Key> {
        self.buckets.iter().filter(|(k, v)| k.0 <= cost && !v.is_empty()).map(|(k, _)| *k).collect()
    }

    pub fn bucket(&self, key: Key) -> &[RuleEntry] {
        self.buckets.get(&key).map_or(&[], |v| v.as_slice())
    }

    pub fn rule_count(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    /// Drops cached verdicts when asked about a different store.
    pub fn sync(&mut self, store: &ConstraintStore) {
        if self.store_id != Some(store.id()) {
            for e in self.buckets.values_mut().flatten() {
                e.gen_checked = 0;
                e.banned = false;
                e.spec_checked = 0;
                e.spec_subsumers.clear();
            }
            self.store_id = Some(store.id());
        }
    }

    /// Whether the rule generalises some single-rule generalisation record,
    /// which rules it out of every program.
    pub fn is_banned(&mut self, key: Key, i: usize, store: &ConstraintStore) -> bool {
        let e = &mut self.buckets.get_mut(&key).unwrap()[i];
        let gens = store.single_generalisations();
        if !e.banned {
            e.banned = gens[e.gen_checked..].iter().any(|g| e.rule.subsumes(g));
        }
        e.gen_checked = gens.len();
        e.banned
    }

    /// Indices of single-rule specialisation records subsuming the rule.
    pub fn spec_subsumers(&mut self, key: Key, i: usize, store: &ConstraintStore) -> &[u32] {
        let e = &mut self.buckets.get_mut(&key).unwrap()[i];
        let specs = store.single_specialisations();
        for (j, g) in specs.iter().enumerate().skip(e.spec_checked) {
            if g.subsumes(&e.rule) {
                e.spec_subsumers.push(j as u32);
            }
        }
        e.spec_checked = specs.len();
        &e.spec_subsumers
    }
}
