//! Independent reference implementations and random instance builders
//! shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use nonsep_core::bias::{parse_bias, BiasSpec};
use nonsep_core::combiner::{PromisingPool, RuleId};
use nonsep_core::datalog::{least_model, ExampleSet, KnowledgeBase};
use nonsep_core::logic::{Hypothesis, Literal, Rule, Term, Var};
use nonsep_core::oracle::enumerate_rules;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Naive fixpoint: every rule is tried under every assignment of its
/// variables to domain constants until nothing new appears.
pub fn naive_model(facts: &[Literal], rules: &[Rule]) -> BTreeSet<Literal> {
    let mut model: BTreeSet<Literal> = facts.iter().cloned().collect();
    let mut domain: BTreeSet<Term> = BTreeSet::new();
    for f in facts {
        domain.extend(f.args.iter().cloned());
    }
    for r in rules {
        for l in std::iter::once(&r.head).chain(r.body()) {
            domain.extend(l.args.iter().filter(|t| !t.is_var()).cloned());
        }
    }
    let domain: Vec<Term> = domain.into_iter().collect();
    loop {
        let mut added = Vec::new();
        for r in rules {
            let vars = r.vars();
            let n = vars.len();
            let mut idx = vec![0usize; n];
            'assign: loop {
                let ground = |l: &Literal| {
                    Literal::new(
                        l.pred.clone(),
                        l.args
                            .iter()
                            .map(|t| match t {
                                Term::Var(v) => domain[idx[vars.iter().position(|w| w == v).unwrap()]].clone(),
                                c => c.clone(),
                            })
                            .collect(),
                    )
                };
                if (!domain.is_empty() || n == 0) && r.body().iter().all(|b| model.contains(&ground(b))) {
                    let h = ground(&r.head);
                    if !model.contains(&h) {
                        added.push(h);
                    }
                }
                let mut k = 0;
                loop {
                    if k == n || domain.is_empty() {
                        break 'assign;
                    }
                    idx[k] += 1;
                    if idx[k] < domain.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }
        if added.is_empty() {
            return model;
        }
        model.extend(added);
    }
}

pub fn v(i: Var) -> Term {
    Term::Var(i)
}

pub fn lit(p: &str, args: Vec<Term>) -> Literal {
    Literal::new(p, args)
}

/// Random directed graph `edge/2` (and a unary `mark/1`) over `n` nodes.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> Vec<Literal> {
    let mut facts = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.random_bool(0.25) {
                facts.push(Literal::ground("edge", &[&format!("n{a}"), &format!("n{b}")]));
            }
        }
        if rng.random_bool(0.4) {
            facts.push(Literal::ground("mark", &[&format!("n{a}")]));
        }
    }
    facts
}

/// A random range-restricted rule with head `head(A,B)` over `edge/2`,
/// `mark/1` and, when `recursive`, the head predicate itself.
pub fn random_rule(rng: &mut impl Rng, head: &str, recursive: bool, max_body: usize) -> Rule {
    loop {
        let len = rng.random_range(1..=max_body);
        let mut body = Vec::new();
        for _ in 0..len {
            let choices: &[&str] = if recursive { &["edge", "mark", head] } else { &["edge", "mark"] };
            let p = *choices.choose(rng).unwrap();
            let arity = if p == "mark" { 1 } else { 2 };
            body.push(lit(p, (0..arity).map(|_| v(rng.random_range(0..3))).collect()));
        }
        let r = Rule::new(lit(head, vec![v(0), v(1)]), body);
        if r.is_range_restricted() {
            return r;
        }
    }
}

/// A small learning task whose labels come from a hidden target program.
pub struct MicroTask {
    pub seed: u64,
    pub kb: KnowledgeBase,
    pub exs: ExampleSet,
    pub spec: BiasSpec,
    pub target: Hypothesis,
}

/// Draws a micro-task: a random graph over at most 8 nodes with `edge/2`,
/// `red/1` and `blue/1`, a target of one or two random bias-valid rules,
/// and examples labelled by the target's least model. `None` when the draw
/// is degenerate (no positive or no negative example).
pub fn micro_task(seed: u64) -> Option<MicroTask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..=8usize);
    let mut facts = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.random_bool(0.25) {
                facts.push(Literal::ground("edge", &[&format!("n{a}"), &format!("n{b}")]));
            }
        }
        for p in ["red", "blue"] {
            if rng.random_bool(0.4) {
                facts.push(Literal::ground(p, &[&format!("n{a}")]));
            }
        }
    }
    let binary = rng.random_bool(0.4);
    let bias = if binary {
        "head_pred(f,2). body_pred(edge,2). body_pred(red,1). max_vars(3). max_body(3). max_clause(2)."
    } else {
        "head_pred(f,1). body_pred(edge,2). body_pred(red,1). body_pred(blue,1). max_vars(3). max_body(3). max_clause(3)."
    };
    let spec = parse_bias(bias).unwrap();
    let kb = KnowledgeBase::new(facts, vec![]).unwrap();
    let rules = enumerate_rules(&spec, 4, usize::MAX).unwrap();
    let (base, rec): (Vec<&Rule>, Vec<&Rule>) = rules.iter().partition(|r| !r.is_recursive());
    let mut target = vec![(*base.choose(&mut rng).unwrap()).clone()];
    match rng.random_range(0..4) {
        0 => {}
        1 => target.push((*base.choose(&mut rng).unwrap()).clone()),
        2 if !binary => {
            target.push((*base.choose(&mut rng).unwrap()).clone());
            target.push((*base.choose(&mut rng).unwrap()).clone());
        }
        _ => target.push((*rec.choose(&mut rng).unwrap()).clone()),
    }
    let target = Hypothesis::from_canonical(target);
    let model = least_model(&target, &kb).ok()?;
    let consts: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let atoms: Vec<Literal> = if binary {
        consts.iter().flat_map(|a| consts.iter().map(move |b| Literal::ground("f", &[a, b]))).collect()
    } else {
        consts.iter().map(|a| Literal::ground("f", &[a])).collect()
    };
    let (mut pos, mut neg): (Vec<Literal>, Vec<Literal>) = atoms.into_iter().partition(|a| model.contains(a));
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    pos.truncate(12);
    neg.truncate(20);
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let exs = ExampleSet::new(pos, neg).unwrap();
    Some(MicroTask { seed, kb, exs, spec, target })
}

pub fn bits(n: usize, ones: &[usize]) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    for i in ones {
        b.insert(*i);
    }
    b
}

/// A rule `f(A)` with `size - 1` private unary body literals.
pub fn simple_rule(i: usize, size: usize) -> Rule {
    let body = (0..size - 1).map(|j| Literal::new(format!("p{i}_{j}"), vec![Term::Var(0)]));
    Rule::new(Literal::new("f", vec![Term::Var(0)]), body)
}

/// Random pool of distinct programs over `num_rules` simple rules, with
/// random coverage of `num_pos` examples.
pub fn random_pool(rng: &mut impl Rng, num_programs: usize, num_rules: usize, num_pos: usize) -> PromisingPool {
    let rules: Vec<Rule> = (0..num_rules).map(|i| simple_rule(i, rng.random_range(2..=4))).collect();
    let mut pool = PromisingPool::new(num_pos);
    let mut seen = std::collections::BTreeSet::new();
    let mut attempts = 0;
    while pool.len() < num_programs && attempts < 1000 {
        attempts += 1;
        let k = rng.random_range(1..=3);
        let h = Hypothesis::new((0..k).map(|_| rules[rng.random_range(0..num_rules)].clone()));
        if !seen.insert(h.clone()) {
            continue;
        }
        let cov: Vec<usize> = (0..num_pos).filter(|_| rng.random_bool(0.3)).collect();
        pool.add(&h, bits(num_pos, &cov));
    }
    pool
}

/// Best (covered, cost, ids) over all subsets of programs.
pub fn exhaustive(pool: &PromisingPool, bound: Option<usize>) -> Option<(usize, usize, Vec<RuleId>)> {
    let n = pool.len();
    let mut best: Option<(usize, usize, Vec<RuleId>)> = None;
    for mask in 1u32..(1 << n) {
        let mut ids: Vec<RuleId> =
            (0..n).filter(|i| mask >> i & 1 == 1).flat_map(|i| pool.programs()[i].rule_ids.clone()).collect();
        ids.sort_unstable();
        ids.dedup();
        let cost = pool.cost_of(&ids);
        if bound.is_some_and(|b| cost >= b) || pool.is_blocked(&ids) {
            continue;
        }
        let cov = pool.credited_coverage(&ids).count_ones(..);
        if cov == 0 {
            continue;
        }
        let cand = (cov, cost, ids);
        let better = match &best {
            None => true,
            Some(b) => cand.0 > b.0 || (cand.0 == b.0 && (cand.1 < b.1 || (cand.1 == b.1 && cand.2 < b.2))),
        };
        if better {
            best = Some(cand);
        }
    }
    best
}
