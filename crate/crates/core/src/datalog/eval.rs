//! Semi-naive fixpoints over interned relations, with compiled rule joins.

use std::ops::ControlFlow;
use std::sync::LazyLock;

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use super::relation::Relation;
use crate::logic::{PredSig, Rule, Symbol, Term};

/// Limits on a single bottom-up evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalBudget {
    pub max_facts: usize,
    pub max_iterations: usize,
}

impl Default for EvalBudget {
    fn default() -> Self {
        EvalBudget { max_facts: 10_000_000, max_iterations: 10_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("evaluation derived more than {0} facts")]
    TooManyFacts(usize),
    #[error("evaluation did not converge within {0} iterations")]
    TooManyIterations(usize),
    #[error("rule {0} has a head variable missing from its body")]
    NotRangeRestricted(String),
}

/// Dense ids for values of type `T`.
#[derive(Clone, Debug)]
pub struct Interner<T> {
    map: FxHashMap<T, u32>,
    items: Vec<T>,
}

impl<T> Default for Interner<T> {
    fn default() -> Self {
        Interner { map: FxHashMap::default(), items: Vec::new() }
    }
}

impl<T: Clone + Eq + std::hash::Hash> Interner<T> {
    pub fn intern(&mut self, t: &T) -> u32 {
        if let Some(id) = self.map.get(t) {
            return *id;
        }
        let id = self.items.len() as u32;
        self.map.insert(t.clone(), id);
        self.items.push(t.clone());
        id
    }

    pub fn get(&self, t: &T) -> Option<u32> {
        self.map.get(t).copied()
    }

    pub fn resolve(&self, id: u32) -> &T {
        &self.items[id as usize]
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Symbols {
    pub consts: Interner<Symbol>,
    pub preds: Interner<PredSig>,
}

/// Symbol ids for one evaluation: the shared tables plus ids for symbols
/// the knowledge base has never seen, numbered after the shared ones.
pub(crate) struct LocalSymbols<'a> {
    base: &'a Symbols,
    consts: Interner<Symbol>,
    preds: Interner<PredSig>,
}

impl<'a> LocalSymbols<'a> {
    pub fn new(base: &'a Symbols) -> Self {
        LocalSymbols { base, consts: Interner::default(), preds: Interner::default() }
    }

    pub fn const_id(&mut self, c: &Symbol) -> u32 {
        match self.base.consts.get(c) {
            Some(id) => id,
            None => self.base.consts.len() as u32 + self.consts.intern(c),
        }
    }

    pub fn pred_id(&mut self, p: &PredSig) -> u32 {
        match self.base.preds.get(p) {
            Some(id) => id,
            None => self.base.preds.len() as u32 + self.preds.intern(p),
        }
    }

    pub fn find_pred(&self, p: &PredSig) -> Option<u32> {
        self.base.preds.get(p).or_else(|| self.preds.get(p).map(|id| self.base.preds.len() as u32 + id))
    }

    pub fn const_name(&self, id: u32) -> &Symbol {
        let n = self.base.consts.len() as u32;
        if id < n {
            self.base.consts.resolve(id)
        } else {
            self.consts.resolve(id - n)
        }
    }

    pub fn pred_sig(&self, id: u32) -> &PredSig {
        let n = self.base.preds.len() as u32;
        if id < n {
            self.base.preds.resolve(id)
        } else {
            self.preds.resolve(id - n)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Arg {
    Var(usize),
    Const(u32),
}

#[derive(Clone, Debug)]
pub(crate) struct CLit {
    pub pred: u32,
    pub args: Vec<Arg>,
}

#[derive(Clone, Debug)]
pub(crate) struct CRule {
    pub head: CLit,
    pub body: Vec<CLit>,
    pub nvars: usize,
}

pub(crate) fn compile(rule: &Rule, syms: &mut LocalSymbols<'_>) -> CRule {
    let mut slots: Vec<u32> = Vec::new();
    let mut lit = |l: &crate::logic::Literal, syms: &mut LocalSymbols<'_>| CLit {
        pred: syms.pred_id(&l.sig()),
        args: l
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Arg::Const(syms.const_id(c)),
                Term::Var(v) => Arg::Var(match slots.iter().position(|s| s == v) {
                    Some(i) => i,
                    None => {
                        slots.push(*v);
                        slots.len() - 1
                    }
                }),
            })
            .collect(),
    };
    let head = lit(&rule.head, syms);
    let body = rule.body().iter().map(|l| lit(l, syms)).collect();
    CRule { head, body, nvars: slots.len() }
}

static EMPTY: LazyLock<Relation> = LazyLock::new(Relation::default);

/// Read access to relations: an overlay shadowing a base table.
#[derive(Clone, Copy)]
pub(crate) struct View<'a> {
    pub base: &'a [Relation],
    pub overlay: &'a FxHashMap<u32, Relation>,
}

impl<'a> View<'a> {
    pub fn get(&self, pred: u32) -> &'a Relation {
        match self.overlay.get(&pred) {
            Some(r) => r,
            None => self.base.get(pred as usize).unwrap_or(&EMPTY),
        }
    }
}

const UNBOUND: u32 = u32::MAX;

fn bound_args(lit: &CLit, bound: &[bool]) -> usize {
    lit.args
        .iter()
        .filter(|a| match a {
            Arg::Const(_) => true,
            Arg::Var(v) => bound[*v],
        })
        .count()
}

/// Greedy join order: literals with bound arguments first, smaller
/// relations first, the delta literal preferred among unbound ones.
fn plan(body: &[CLit], rels: &[&Relation], nvars: usize, pre_bound: &[usize], delta: Option<usize>) -> Vec<usize> {
    let mut bound = vec![false; nvars];
    for v in pre_bound {
        bound[*v] = true;
    }
    let mut left: Vec<usize> = (0..body.len()).collect();
    let mut order = Vec::with_capacity(body.len());
    while !left.is_empty() {
        let (pos, _) = left
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| {
                let b = bound_args(&body[i], &bound);
                let all = b == body[i].args.len();
                (!all, b == 0, Some(i) != delta, rels[i].len(), i)
            })
            .unwrap();
        let i = left.remove(pos);
        for a in &body[i].args {
            if let Arg::Var(v) = a {
                bound[*v] = true;
            }
        }
        order.push(i);
    }
    order
}

fn search(
    body: &[CLit],
    rels: &[&Relation],
    order: &[usize],
    binding: &mut [u32],
    f: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let Some((&i, rest)) = order.split_first() else {
        return f(binding);
    };
    let lit = &body[i];
    let rel = rels[i];
    if rel.is_empty() {
        return ControlFlow::Continue(());
    }
    let mut best: Option<&[u32]> = None;
    for (col, a) in lit.args.iter().enumerate() {
        let v = match a {
            Arg::Const(c) => *c,
            Arg::Var(v) if binding[*v] != UNBOUND => binding[*v],
            _ => continue,
        };
        let ids = rel.lookup(col, v);
        if best.is_none_or(|b| ids.len() < b.len()) {
            best = Some(ids);
        }
    }
    let mut newly: Vec<usize> = Vec::with_capacity(lit.args.len());
    let mut visit = |t: &[u32], binding: &mut [u32]| -> ControlFlow<()> {
        newly.clear();
        let mut ok = true;
        for (a, &x) in lit.args.iter().zip(t) {
            match a {
                Arg::Const(c) => ok = *c == x,
                Arg::Var(v) => {
                    if binding[*v] == UNBOUND {
                        binding[*v] = x;
                        newly.push(*v);
                    } else {
                        ok = binding[*v] == x;
                    }
                }
            }
            if !ok {
                break;
            }
        }
        let flow = if ok { search(body, rels, rest, binding, f) } else { ControlFlow::Continue(()) };
        for v in &newly {
            binding[*v] = UNBOUND;
        }
        flow
    };
    match best {
        Some(ids) => {
            for &id in ids {
                visit(rel.tuple(id), binding)?;
            }
        }
        None => {
            for t in rel.tuples() {
                visit(t, binding)?;
            }
        }
    }
    ControlFlow::Continue(())
}

fn head_tuple(head: &CLit, binding: &[u32], out: &mut Vec<u32>) {
    out.clear();
    out.extend(head.args.iter().map(|a| match a {
        Arg::Const(c) => *c,
        Arg::Var(v) => binding[*v],
    }));
}

/// Whether `rule` derives the head atom with arguments `args`.
pub(crate) fn rule_derives(rule: &CRule, args: &[u32], view: View<'_>) -> bool {
    let mut binding = vec![UNBOUND; rule.nvars];
    let mut pre = Vec::new();
    for (a, &x) in rule.head.args.iter().zip(args) {
        match a {
            Arg::Const(c) if *c != x => return false,
            Arg::Const(_) => {}
            Arg::Var(v) => {
                if binding[*v] == UNBOUND {
                    binding[*v] = x;
                    pre.push(*v);
                } else if binding[*v] != x {
                    return false;
                }
            }
        }
    }
    let rels: Vec<&Relation> = rule.body.iter().map(|l| view.get(l.pred)).collect();
    let order = plan(&rule.body, &rels, rule.nvars, &pre, None);
    search(&rule.body, &rels, &order, &mut binding, &mut |_| ControlFlow::Break(())).is_break()
}

fn derive_round(
    rules: &[CRule],
    view: View<'_>,
    delta: Option<&FxHashMap<u32, Relation>>,
    out: &mut FxHashMap<u32, Relation>,
    derived: &mut usize,
    budget: &EvalBudget,
) -> Result<(), EvalError> {
    let mut tuple = Vec::new();
    for rule in rules {
        let positions: Vec<Option<usize>> = match delta {
            None => vec![None],
            Some(d) => (0..rule.body.len())
                .filter(|&j| d.get(&rule.body[j].pred).is_some_and(|r| !r.is_empty()))
                .map(Some)
                .collect(),
        };
        for pos in positions {
            let rels: Vec<&Relation> = rule
                .body
                .iter()
                .enumerate()
                .map(|(j, l)| match (pos, delta) {
                    (Some(p), Some(d)) if p == j => &d[&l.pred],
                    _ => view.get(l.pred),
                })
                .collect();
            let order = plan(&rule.body, &rels, rule.nvars, &[], pos);
            let mut binding = vec![UNBOUND; rule.nvars];
            let full = view.get(rule.head.pred);
            let arity = rule.head.args.len();
            let mut overflow = false;
            let _ = search(&rule.body, &rels, &order, &mut binding, &mut |b| {
                head_tuple(&rule.head, b, &mut tuple);
                if !full.contains(&tuple) && out.entry(rule.head.pred).or_insert_with(|| Relation::new(arity)).insert(&tuple) {
                    *derived += 1;
                    if *derived > budget.max_facts {
                        overflow = true;
                        return ControlFlow::Break(());
                    }
                }
                ControlFlow::Continue(())
            });
            if overflow {
                return Err(EvalError::TooManyFacts(budget.max_facts));
            }
        }
    }
    Ok(())
}

/// Extends `overlay` to the least fixpoint of `rules` over `base` and
/// `overlay`. Head predicates get overlay relations seeded from `base`.
pub(crate) fn fixpoint(
    base: &[Relation],
    overlay: &mut FxHashMap<u32, Relation>,
    rules: &[CRule],
    budget: &EvalBudget,
) -> Result<usize, EvalError> {
    let mut heads: Vec<u32> = Vec::new();
    for r in rules {
        if !heads.contains(&r.head.pred) {
            heads.push(r.head.pred);
        }
        overlay
            .entry(r.head.pred)
            .or_insert_with(|| base.get(r.head.pred as usize).cloned().unwrap_or_else(|| Relation::new(r.head.args.len())));
    }
    let idb: FxHashSet<u32> = heads.iter().copied().collect();
    let recursive: Vec<CRule> =
        rules.iter().filter(|r| r.body.iter().any(|l| idb.contains(&l.pred))).cloned().collect();
    let mut derived = 0usize;
    let mut delta = FxHashMap::default();
    derive_round(rules, View { base, overlay }, None, &mut delta, &mut derived, budget)?;
    let mut iterations = 1;
    loop {
        if delta.values().all(|r: &Relation| r.is_empty()) {
            return Ok(derived);
        }
        let mut preds: Vec<u32> = delta.keys().copied().collect();
        preds.sort_unstable();
        for p in preds {
            let rel = overlay.get_mut(&p).expect("head relation");
            for t in delta[&p].tuples() {
                rel.insert(t);
            }
        }
        if recursive.is_empty() {
            return Ok(derived);
        }
        if iterations >= budget.max_iterations {
            return Err(EvalError::TooManyIterations(budget.max_iterations));
        }
        let mut next = FxHashMap::default();
        derive_round(&recursive, View { base, overlay }, Some(&delta), &mut next, &mut derived, budget)?;
        delta = next;
        iterations += 1;
    }
}
