//! Canonical representatives of rules modulo variable renaming.
//!
//! Head variables are numbered by first occurrence in the head. Body-only
//! variables are first split into classes by a renaming-invariant
//! occurrence signature; the representative is the lexicographically least
//! sorted body over all numberings that respect the class order. A final
//! pass renumbers variables in first-occurrence order (head, then body in
//! literal order), which is a deterministic function of that least body and
//! therefore keeps the result canonical.

use rustc_hash::FxHashMap;

use super::rule::Rule;
use super::term::{Literal, Symbol, Term, Var};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Head(Var),
    Const(Symbol),
    Me,
    Other,
}

type Occurrence = (Symbol, usize, usize, Vec<Slot>);

fn rename_lit(lit: &Literal, map: &FxHashMap<Var, Var>) -> Literal {
    Literal {
        pred: lit.pred.clone(),
        args: lit
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(*map.get(v).unwrap_or(v)),
                c => c.clone(),
            })
            .collect(),
    }
}

fn renamed_body(body: &[Literal], map: &FxHashMap<Var, Var>) -> Vec<Literal> {
    let mut out: Vec<Literal> = body.iter().map(|l| rename_lit(l, map)).collect();
    out.sort();
    out.dedup();
    out
}

fn signature(v: Var, body: &[Literal], head_index: &FxHashMap<Var, Var>) -> Vec<Occurrence> {
    let mut occ = Vec::new();
    for lit in body {
        for (pos, t) in lit.args.iter().enumerate() {
            if *t != Term::Var(v) {
                continue;
            }
            let slots = lit
                .args
                .iter()
                .map(|a| match a {
                    Term::Const(c) => Slot::Const(c.clone()),
                    Term::Var(w) if *w == v => Slot::Me,
                    Term::Var(w) => match head_index.get(w) {
                        Some(i) => Slot::Head(*i),
                        None => Slot::Other,
                    },
                })
                .collect();
            occ.push((lit.pred.clone(), lit.args.len(), pos, slots));
        }
    }
    occ.sort();
    occ
}

/// Calls `visit` once per assignment of indices to the class members,
/// permuting only within each class.
fn for_each_numbering(
    classes: &[Vec<Var>],
    first_index: Var,
    map: &mut FxHashMap<Var, Var>,
    visit: &mut dyn FnMut(&FxHashMap<Var, Var>),
) {
    fn permute(
        classes: &[Vec<Var>],
        class: usize,
        used: &mut Vec<bool>,
        base: Var,
        map: &mut FxHashMap<Var, Var>,
        visit: &mut dyn FnMut(&FxHashMap<Var, Var>),
    ) {
        if class == classes.len() {
            visit(map);
            return;
        }
        let members = &classes[class];
        let placed = used.iter().filter(|u| **u).count();
        if placed == members.len() {
            let mut fresh = vec![false; classes.get(class + 1).map_or(0, |c| c.len())];
            permute(classes, class + 1, &mut fresh, base + members.len() as Var, map, visit);
            return;
        }
        for i in 0..members.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            map.insert(members[i], base + placed as Var);
            permute(classes, class, used, base, map, visit);
            used[i] = false;
        }
    }
    if classes.is_empty() {
        visit(map);
        return;
    }
    let mut used = vec![false; classes[0].len()];
    permute(classes, 0, &mut used, first_index, map, visit);
}

/// Returns the unique representative of `rule`'s renaming class.
pub fn canonical_rule(rule: &Rule) -> Rule {
    let mut head_index: FxHashMap<Var, Var> = FxHashMap::default();
    for v in rule.head.vars() {
        let next = head_index.len() as Var;
        head_index.entry(v).or_insert(next);
    }
    let head = rename_lit(&rule.head, &head_index);

    let mut body_vars: Vec<Var> = Vec::new();
    for v in rule.body().iter().flat_map(|l| l.vars()) {
        if !head_index.contains_key(&v) && !body_vars.contains(&v) {
            body_vars.push(v);
        }
    }

    let mut keyed: Vec<(Vec<Occurrence>, Var)> =
        body_vars.iter().map(|&v| (signature(v, rule.body(), &head_index), v)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let mut classes: Vec<Vec<Var>> = Vec::new();
    for (i, (sig, v)) in keyed.iter().enumerate() {
        if i > 0 && keyed[i - 1].0 == *sig {
            classes.last_mut().unwrap().push(*v);
        } else {
            classes.push(vec![*v]);
        }
    }

    let mut best: Option<Vec<Literal>> = None;
    let mut map = head_index.clone();
    for_each_numbering(&classes, head_index.len() as Var, &mut map, &mut |m| {
        let candidate = renamed_body(rule.body(), m);
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
    });
    let mut body = best.unwrap_or_default();

    // first-occurrence renumbering until stable
    for _ in 0..8 {
        let mut order: FxHashMap<Var, Var> = FxHashMap::default();
        for v in head.vars().chain(body.iter().flat_map(|l| l.vars())) {
            let next = order.len() as Var;
            order.entry(v).or_insert(next);
        }
        let next = renamed_body(&body, &order);
        if next == body {
            break;
        }
        body = next;
    }
    Rule::new(head, body)
}
