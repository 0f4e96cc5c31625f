//! Generalisation and specialisation constraints learned from failures.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};

use rustc_hash::{FxHashSet, FxHasher};

use crate::logic::{subsumes_clause, Hypothesis, Rule, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintKind {
    /// Prune the program and everything more general.
    Generalisation,
    /// Prune the program and everything more specific.
    Specialisation,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Generalisation => "generalisation",
            ConstraintKind::Specialisation => "specialisation",
        })
    }
}

/// Bloom-style mask of the predicates and constants in a rule body.
/// `c1 ⪯ c2` requires `mask(c1) ⊆ mask(c2)`.
pub(crate) fn rule_mask(rule: &Rule) -> u128 {
    let mut m = 0u128;
    let mut bit = |x: &dyn Fn(&mut FxHasher)| {
        let mut h = FxHasher::default();
        x(&mut h);
        m |= 1u128 << (h.finish() % 128);
    };
    for lit in rule.body() {
        bit(&|h| {
            0u8.hash(h);
            lit.pred.as_str().hash(h);
            lit.arity().hash(h);
        });
        for t in &lit.args {
            if let Term::Const(c) = t {
                bit(&|h| {
                    1u8.hash(h);
                    c.as_str().hash(h);
                });
            }
        }
    }
    m
}

fn masked_subsumes(c1: &Rule, m1: u128, c2: &Rule, m2: u128) -> bool {
    m1 & !m2 == 0 && subsumes_clause(c1, c2)
}

#[derive(Clone, Debug)]
pub(crate) struct MaskedRule {
    pub rule: Rule,
    pub mask: u128,
}

impl MaskedRule {
    pub fn new(rule: Rule) -> Self {
        let mask = rule_mask(&rule);
        MaskedRule { rule, mask }
    }

    /// `self ⪯ other`.
    pub fn subsumes(&self, other: &MaskedRule) -> bool {
        masked_subsumes(&self.rule, self.mask, &other.rule, other.mask)
    }
}

#[derive(Clone, Debug)]
struct MultiRecord {
    rules: Vec<MaskedRule>,
    kind: ConstraintKind,
}

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

/// Constraints accumulated from tested programs. Single-rule records are
/// kept apart so callers can cache per-rule verdicts; `id` tells those
/// caches which store they describe.
#[derive(Debug)]
pub struct ConstraintStore {
    id: u64,
    seen: FxHashSet<(Hypothesis, ConstraintKind)>,
    single_gen: Vec<MaskedRule>,
    single_spec: Vec<MaskedRule>,
    multi: Vec<MultiRecord>,
}

impl Default for ConstraintStore {
    fn default() -> Self {
        ConstraintStore {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            seen: FxHashSet::default(),
            single_gen: Vec::new(),
            single_spec: Vec::new(),
            multi: Vec::new(),
        }
    }
}

impl Clone for ConstraintStore {
    fn clone(&self) -> Self {
        ConstraintStore {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            seen: self.seen.clone(),
            single_gen: self.single_gen.clone(),
            single_spec: self.single_spec.clone(),
            multi: self.multi.clone(),
        }
    }
}

impl ConstraintStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn id(&self) -> u64 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    /// Adds a record; returns false if it was already present.
    pub fn register(&mut self, h: &Hypothesis, kind: ConstraintKind) -> bool {
        if h.is_empty() || !self.seen.insert((h.clone(), kind)) {
            return false;
        }
        if let [r] = h.rules() {
            let m = MaskedRule::new(r.clone());
            match kind {
                ConstraintKind::Generalisation => self.single_gen.push(m),
                ConstraintKind::Specialisation => self.single_spec.push(m),
            }
        } else {
            self.multi.push(MultiRecord { rules: h.rules().iter().cloned().map(MaskedRule::new).collect(), kind });
        }
        true
    }

    pub(crate) fn single_generalisations(&self) -> &[MaskedRule] {
        &self.single_gen
    }

    pub(crate) fn single_specialisations(&self) -> &[MaskedRule] {
        &self.single_spec
    }

    /// True iff some generalisation record `g` has `h ⪯ g`, or some
    /// specialisation record `g` has `g ⪯ h`.
    pub fn is_pruned(&self, h: &Hypothesis) -> bool {
        let rules: Vec<MaskedRule> = h.rules().iter().cloned().map(MaskedRule::new).collect();
        if rules.is_empty() {
            return false;
        }
        // h ⪯ {g}: some rule of h subsumes g
        if self.single_gen.iter().any(|g| rules.iter().any(|r| r.subsumes(g))) {
            return true;
        }
        // {g} ⪯ h: g subsumes every rule of h
        if self.single_spec.iter().any(|g| rules.iter().all(|r| g.subsumes(r))) {
            return true;
        }
        self.is_pruned_by_multi(&rules)
    }

    /// Only the multi-rule records, for callers that handle single-rule
    /// records through their own caches.
    pub(crate) fn is_pruned_by_multi(&self, rules: &[MaskedRule]) -> bool {
        self.multi.iter().any(|rec| match rec.kind {
            ConstraintKind::Generalisation => rec.rules.iter().all(|g| rules.iter().any(|r| r.subsumes(g))),
            ConstraintKind::Specialisation => rules.iter().all(|r| rec.rules.iter().any(|g| g.subsumes(r))),
        })
    }
}
