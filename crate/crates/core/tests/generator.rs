use std::collections::BTreeSet;

use nonsep_core::bias::{parse_bias, BiasSpec};
use nonsep_core::generator::{ConstraintKind, ConstraintStore, Generator, Mode, Next};
use nonsep_core::logic::{canonical_rule, is_separable, parse_hypothesis, Hypothesis, Literal, Rule, Term};

/// All canonical valid rules, by trying every body over the fixed
/// variable pool `V0..max_vars`.
fn brute_rules(spec: &BiasSpec) -> Vec<Rule> {
    let mut vocab: Vec<Literal> = Vec::new();
    let nv = spec.max_vars as u32;
    for sig in spec.body_vocabulary() {
        let mut args = vec![0u32; sig.arity];
        loop {
            vocab.push(Literal::new(sig.name.clone(), args.iter().map(|&v| Term::Var(v)).collect()));
            let mut i = 0;
            while i < sig.arity {
                args[i] += 1;
                if args[i] < nv {
                    break;
                }
                args[i] = 0;
                i += 1;
            }
            if i == sig.arity {
                break;
            }
        }
    }
    let mut rules = BTreeSet::new();
    let n = vocab.len();
    for mask in 1u64..(1 << n) {
        if mask.count_ones() as usize > spec.max_body {
            continue;
        }
        let body: Vec<Literal> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| vocab[i].clone()).collect();
        let r = canonical_rule(&Rule::new(spec.head_literal(), body));
        if spec.is_valid_rule(&r) {
            rules.insert(r);
        }
    }
    rules.into_iter().collect()
}

fn brute_programs(spec: &BiasSpec, max_cost: usize, mode: Mode) -> BTreeSet<Hypothesis> {
    let rules = brute_rules(spec);
    let mut out = BTreeSet::new();
    fn go(rules: &[Rule], from: usize, cur: &mut Vec<Rule>, left: usize, spec: &BiasSpec, mode: Mode, out: &mut BTreeSet<Hypothesis>) {
        if !cur.is_empty() {
            let rec = cur.iter().filter(|r| r.is_recursive()).count();
            let base = cur.len() - rec;
            let ok = if cur.len() == 1 { base == 1 } else { base >= 1 && (mode == Mode::Baseline || rec >= 1) };
            if ok {
                out.insert(Hypothesis::new(cur.clone()));
            }
        }
        if cur.len() == spec.max_clauses {
            return;
        }
        for i in from..rules.len() {
            if rules[i].size() <= left {
                cur.push(rules[i].clone());
                go(rules, i + 1, cur, left - rules[i].size(), spec, mode, out);
                cur.pop();
            }
        }
    }
    go(&rules, 0, &mut Vec::new(), max_cost, spec, mode, &mut out);
    out
}

fn generated(spec: &BiasSpec, max_cost: usize, mode: Mode) -> Vec<Hypothesis> {
    let mut g = Generator::new(spec, mode);
    let store = ConstraintStore::new();
    (1..=max_cost).flat_map(|s| g.all_of_size(s, &store)).collect()
}

fn tiny(max_clause: usize) -> BiasSpec {
    parse_bias(&format!("max_clause({max_clause}). max_vars(3). max_body(2). head_pred(f,1). body_pred(p,2).")).unwrap()
}

#[test]
fn matches_brute_force_enumeration() {
    for (spec, mode) in [(tiny(1), Mode::Combo), (tiny(3), Mode::Combo), (tiny(3), Mode::Baseline)] {
        let got = generated(&spec, 7, mode);
        let as_set: BTreeSet<Hypothesis> = got.iter().cloned().collect();
        assert_eq!(as_set.len(), got.len(), "a program was yielded twice");
        assert_eq!(as_set, brute_programs(&spec, 7, mode), "mode {mode:?}, max_clause {}", spec.max_clauses);
        let mut prev = 0;
        for h in &got {
            assert!(h.cost().0 >= prev, "costs must not decrease");
            prev = h.cost().0;
        }
    }
}

#[test]
fn typed_bias_matches_brute_force() {
    let spec = parse_bias(
        "max_clause(2). max_vars(3). max_body(2). head_pred(f,1). body_pred(head,2). body_pred(tail,2).
         type(f,(list,)). type(head,(list,elem)). type(tail,(list,list)).
         direction(f,(in,)). direction(head,(in,out)). direction(tail,(in,out)).",
    )
    .unwrap();
    let got: BTreeSet<Hypothesis> = generated(&spec, 8, Mode::Combo).into_iter().collect();
    assert_eq!(got, brute_programs(&spec, 8, Mode::Combo));
}

#[test]
fn combo_never_yields_separable_programs() {
    let spec = tiny(3);
    let all = generated(&spec, 8, Mode::Combo);
    assert!(!all.is_empty());
    assert!(all.iter().all(|h| !is_separable(h)));
    assert!(all.iter().filter(|h| h.len() > 1).all(|h| h.rules().iter().any(|r| !r.is_recursive())));
    let baseline = generated(&spec, 8, Mode::Baseline);
    assert!(baseline.iter().any(is_separable));
}

fn list_bias() -> BiasSpec {
    parse_bias(
        "max_clause(2). max_vars(2). max_body(3). head_pred(f,1). body_pred(head,2). body_pred(tail,2).
         type(f,(list,)). type(head,(list,elem)). type(tail,(list,list)).
         direction(f,(in,)). direction(head,(in,out)). direction(tail,(in,out)).
         constant(elem,1). constant(elem,2). constant(elem,3). constant(elem,7). constant(elem,9).",
    )
    .unwrap()
}

#[test]
fn size_two_yields_single_head_rules() {
    let mut g = Generator::new(&list_bias(), Mode::Combo);
    let store = ConstraintStore::new();
    let two: Vec<String> = g.all_of_size(2, &store).iter().map(|h| h.to_string()).collect();
    assert!(two.contains(&"f(A):- head(A,1).".to_string()));
    assert!(two.iter().all(|h| !h.contains('\n')));
}

#[test]
fn generalisation_record_prunes_h4() {
    let mut store = ConstraintStore::new();
    store.register(&parse_hypothesis("f(A):- head(A,2).").unwrap(), ConstraintKind::Generalisation);
    let h4 = parse_hypothesis("f(A):- head(A,2). f(A):- tail(A,B),f(B).").unwrap();
    let mut g = Generator::new(&list_bias(), Mode::Combo);
    let five = g.all_of_size(5, &store);
    assert!(!five.contains(&h4));
    assert!(g.all_of_size(5, &ConstraintStore::new()).contains(&h4));
    assert!(g.all_of_size(2, &store).iter().all(|h| h.to_string() != "f(A):- head(A,2)."));
}

#[test]
fn specialisation_record_prunes_h5() {
    let mut store = ConstraintStore::new();
    store.register(&parse_hypothesis("f(A):- head(A,3).").unwrap(), ConstraintKind::Specialisation);
    let h5 = parse_hypothesis("f(A):- head(A,3),tail(A,B),head(B,9).").unwrap();
    let mut g = Generator::new(&list_bias(), Mode::Combo);
    assert!(g.all_of_size(4, &ConstraintStore::new()).contains(&h5));
    let four = g.all_of_size(4, &store);
    assert!(!four.contains(&h5));
    assert!(four.iter().all(|h| !store.is_pruned(h)));
}

#[test]
fn constrained_stream_is_a_subsequence() {
    let spec = list_bias();
    let mut free = Generator::new(&spec, Mode::Combo);
    let empty = ConstraintStore::new();
    let stream: Vec<Hypothesis> = (1..=6).flat_map(|s| free.all_of_size(s, &empty)).collect();
    // constraints from every third program of the prefix
    let mut store = ConstraintStore::new();
    for (i, h) in stream.iter().take(60).enumerate() {
        let kind = if i % 2 == 0 { ConstraintKind::Specialisation } else { ConstraintKind::Generalisation };
        if i % 3 == 0 {
            store.register(h, kind);
        }
    }
    let mut constrained = Generator::new(&spec, Mode::Combo);
    let replay: Vec<Hypothesis> = (1..=6).flat_map(|s| constrained.all_of_size(s, &store)).collect();
    assert!(replay.len() < stream.len());
    let mut it = stream.iter();
    for h in &replay {
        assert!(it.any(|x| x == h), "{h} out of order or not in the free stream");
        assert!(!store.is_pruned(h));
    }
}

#[test]
fn exhausted_after_last_program() {
    let mut g = Generator::new(&tiny(1), Mode::Combo);
    g.set_size(1);
    assert_eq!(g.next_program(&ConstraintStore::new()), Next::Exhausted);
}
