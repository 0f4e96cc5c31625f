//! Acceptance suite. Each test checks one criterion and prints a single
//! PASS or FAIL line to stderr (uncaptured, so it shows in normal runs).

mod common;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use nonsep_core::bias::{parse_bias, BiasSpec};
use nonsep_core::combiner::{emit_asp_encoding, solve_combine, CombineStatus, PromisingPool};
use nonsep_core::datalog::{coverage, least_model, ExampleSet, KnowledgeBase, Tester};
use nonsep_core::engine::{learn_baseline, learn_combo, LearnConfig, LearnStatus};
use nonsep_core::generator::{ConstraintStore, Generator, Mode, Next};
use nonsep_core::logic::{is_separable, parse_hypothesis, subsumes_theory, PredSig, Substitution};
use nonsep_core::oracle::brute_force_optimal;
use nonsep_core::task::load_task;
use nonsep_core::{Cost, Hypothesis, Literal, Rule, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances and sizes.
const C1_COST: Cost = Cost(13);
const C1_MAX_TIME: Duration = Duration::from_secs(10);
const C2_TASKS: usize = 50;
const C2_MAX_COST: Cost = Cost(8);
const C2_MAX_TIME: Duration = Duration::from_secs(120);
const C3_POOLS: u64 = 100;
const C3_MAX_PROGRAMS: usize = 12;
const C3_MAX_TIME: Duration = Duration::from_secs(30);
const C5_HYPOTHESES: usize = 10_000;
const C5_MAX_SIZE: usize = 12;
const C5_PER_BIAS: usize = 3_500;
const C6_PAIRS: usize = 1_000;
const C7_PAIRS: usize = 500;
const C8_MIN_RATIO: u64 = 10;
const C8_BASELINE_BUDGET: Duration = Duration::from_secs(60);
const C8_COMBO_MAX_TIME: Duration = Duration::from_secs(5);

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2} {name}: {verdict} ({detail})");
}

fn task_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../tasks").join(name)
}

/// Outcome of a criterion: verdict, a one-line summary and a transcript
/// without wall-clock figures.
struct Outcome {
    pass: bool,
    detail: String,
    transcript: String,
}

fn motivating_example() -> Outcome {
    let task = load_task(&task_dir("motivating")).unwrap();
    let oracle = brute_force_optimal(&task.kb, &task.examples, &task.bias, C1_COST).unwrap();
    let start = Instant::now();
    let res = learn_combo(&task.kb, &task.examples, &task.bias, &LearnConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let rec = coverage(&res.best, &task.kb, &task.examples);
    let pass = oracle.optimum_cost == Some(C1_COST)
        && res.cost == C1_COST
        && res.proven_optimal
        && rec.is_complete()
        && rec.is_consistent()
        && elapsed < C1_MAX_TIME;
    let mut transcript = format!("oracle {:?} optima {}\n", oracle.optimum_cost, oracle.num_optima);
    for t in &res.trace {
        let _ = writeln!(transcript, "tp:{} fn:{} size:{}\n{}", t.tp, t.fn_, t.cost, t.hypothesis);
    }
    let _ = writeln!(transcript, "final {} {:?}\n{}", res.cost, res.status, res.best);
    Outcome {
        pass,
        detail: format!(
            "cost {} proven_optimal {} oracle {:?} in {:.2}s, limit {}s",
            res.cost,
            res.proven_optimal,
            oracle.optimum_cost.map(|c| c.0),
            elapsed.as_secs_f64(),
            C1_MAX_TIME.as_secs()
        ),
        transcript,
    }
}

/// Micro-tasks with an oracle optimum of at most `C2_MAX_COST`, in seed
/// order, together with that optimum.
fn oracle_suite() -> Vec<(common::MicroTask, Cost)> {
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < C2_TASKS {
        if let Some(m) = common::micro_task(seed) {
            let o = brute_force_optimal(&m.kb, &m.exs, &m.spec, C2_MAX_COST).unwrap();
            if let Some(cost) = o.optimum_cost {
                let w = o.witness.unwrap();
                let rec = coverage(&w, &m.kb, &m.exs);
                assert!(rec.is_complete() && rec.is_consistent(), "oracle witness of seed {seed} is not a solution");
                out.push((m, cost));
            }
        }
        seed += 1;
    }
    out
}

fn oracle_equivalence(constraints: bool) -> Outcome {
    let start = Instant::now();
    let suite = oracle_suite();
    let mut mismatches = Vec::new();
    let mut transcript = String::new();
    let mut costs = BTreeSet::new();
    for (m, opt) in &suite {
        let cfg = LearnConfig { max_size: C2_MAX_COST.0, constraints, ..Default::default() };
        let res = learn_combo(&m.kb, &m.exs, &m.spec, &cfg).unwrap();
        let rec = coverage(&res.best, &m.kb, &m.exs);
        let ok = res.cost == *opt && rec.is_complete() && rec.is_consistent() && res.proven_optimal;
        if !ok {
            mismatches.push(m.seed);
        }
        costs.insert(opt.0);
        let _ = writeln!(transcript, "seed {} oracle {} combo {}\n{}", m.seed, opt, res.cost, res.best);
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: mismatches.is_empty() && suite.len() >= C2_TASKS && elapsed < C2_MAX_TIME,
        detail: format!(
            "{} tasks, optimum costs {:?}, mismatching seeds {:?}, {:.1}s, limit {}s",
            suite.len(),
            costs,
            mismatches,
            elapsed.as_secs_f64(),
            C2_MAX_TIME.as_secs()
        ),
        transcript,
    }
}

fn combine_exactness() -> Outcome {
    let start = Instant::now();
    let kb = KnowledgeBase::empty();
    let exs = ExampleSet::default();
    let tester = Tester::new(&kb, &exs);
    let mut bad = Vec::new();
    let mut transcript = String::new();
    for seed in 0..C3_POOLS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=C3_MAX_PROGRAMS);
        let rules = rng.random_range(3..=20);
        let mut pool = common::random_pool(&mut rng, n, rules, 10);
        let bound = if rng.random_bool(0.5) { Some(rng.random_range(3..20)) } else { None };
        let expected = common::exhaustive(&pool, bound).map(|(c, k, _)| (c, k));
        let res = solve_combine(&mut pool, bound, &tester, None);
        let got = (res.status == CombineStatus::Solution).then(|| (res.coverage.count_ones(..), res.cost.0));
        if got != expected {
            bad.push(seed);
        }
        let _ = writeln!(transcript, "pool {seed} size {} -> {got:?}", pool.len());
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: bad.is_empty() && elapsed < C3_MAX_TIME,
        detail: format!(
            "{C3_POOLS} pools, mismatching seeds {bad:?}, {:.2}s, limit {}s",
            elapsed.as_secs_f64(),
            C3_MAX_TIME.as_secs()
        ),
        transcript,
    }
}

#[test]
fn criterion_01_motivating_example() {
    let o = motivating_example();
    report(1, "motivating example", o.pass, &o.detail);
    assert!(o.pass, "{}", o.detail);
}

#[test]
fn criterion_02_oracle_equivalence() {
    let o = oracle_equivalence(true);
    report(2, "oracle equivalence", o.pass, &o.detail);
    assert!(o.pass, "{}", o.detail);
}

#[test]
fn criterion_03_combine_exactness() {
    let o = combine_exactness();
    report(3, "combine exactness", o.pass, &o.detail);
    assert!(o.pass, "{}", o.detail);
}

#[test]
fn criterion_04_constraints_preserve_optimality() {
    let o = oracle_equivalence(false);
    report(4, "constraint optimality preservation", o.pass, &o.detail);
    assert!(o.pass, "{}", o.detail);
}

#[test]
fn criterion_05_non_separability() {
    // The zendo space grows about twentyfold per size step past 5.
    let biases: Vec<(BiasSpec, usize)> = vec![
        (parse_bias(include_str!("data/zendo_bias.pl")).unwrap(), 5),
        (load_task(&task_dir("motivating")).unwrap().bias, C5_MAX_SIZE),
        (load_task(&task_dir("trains3")).unwrap().bias, C5_MAX_SIZE),
        (
            parse_bias("head_pred(f,2). body_pred(edge,2). body_pred(red,1). max_vars(3). max_body(3). max_clause(3).")
                .unwrap(),
            C5_MAX_SIZE,
        ),
        (
            parse_bias(
                "head_pred(f,1). body_pred(edge,2). body_pred(red,1). body_pred(blue,1). max_vars(3). max_body(2). max_clause(4).",
            )
            .unwrap(),
            C5_MAX_SIZE,
        ),
    ];
    // Each bias contributes at most a fixed share; small spaces run dry
    // early and leave the rest to the larger ones.
    let cap = C5_PER_BIAS;
    let store = ConstraintStore::new();
    let (mut total, mut separable, mut multi) = (0, 0, 0);
    let mut per_bias = Vec::new();
    for (spec, max_size) in &biases {
        let mut gen = Generator::new(spec, Mode::Combo);
        let mut count = 0;
        'sizes: for size in 1..=*max_size {
            gen.set_size(size);
            while let Next::Program(h) = gen.next_program(&store) {
                count += 1;
                multi += usize::from(h.len() >= 2);
                separable += usize::from(is_separable(&h));
                if count == cap || total + count == C5_HYPOTHESES {
                    break 'sizes;
                }
            }
        }
        total += count;
        per_bias.push(count);
    }
    let pass = total >= C5_HYPOTHESES && separable == 0;
    let detail = format!("{total} hypotheses, per bias {per_bias:?}, {multi} with several rules, {separable} separable");
    report(5, "non-separability", pass, &detail);
    assert!(pass, "{detail}");
}

/// A specialisation of `r`: extra body literals, a variable merge, or both.
fn specialise(rng: &mut impl Rng, r: &Rule) -> Rule {
    let mut body: Vec<Literal> = r.body().to_vec();
    for _ in 0..rng.random_range(0..=2) {
        let arity = rng.random_range(1..=2);
        let p = if arity == 1 { "mark" } else { "edge" };
        body.push(common::lit(p, (0..arity).map(|_| common::v(rng.random_range(0..4))).collect()));
    }
    let mut rule = Rule::new(r.head.clone(), body);
    if rng.random_bool(0.4) {
        let vars = rule.vars();
        let from = vars[rng.random_range(0..vars.len())];
        let to = vars[rng.random_range(0..vars.len())];
        let mut s = Substitution::new();
        s.bind(from, Term::Var(to));
        rule = Rule::new(s.apply(&rule.head), rule.body().iter().map(|l| s.apply(l)));
    }
    rule
}

#[test]
fn criterion_06_subsumption_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = PredSig::new("f", 2);
    let (mut pairs, mut violations, mut not_subsuming) = (0, 0, 0);
    while pairs < C6_PAIRS {
        let n = rng.random_range(3..=6);
        let kb = KnowledgeBase::new(common::random_graph(&mut rng, n), vec![]).unwrap();
        let k = rng.random_range(1..=2);
        let h1 = Hypothesis::new((0..k).map(|i| {
            let recursive = i > 0 && rng.random_bool(0.5);
            common::random_rule(&mut rng, "f", recursive, 2)
        }));
        let h2 = Hypothesis::new((0..rng.random_range(1..=2)).map(|_| {
            let r = &h1.rules()[rng.random_range(0..h1.len())];
            specialise(&mut rng, r)
        }));
        if !subsumes_theory(&h1, &h2) {
            not_subsuming += 1;
            continue;
        }
        pairs += 1;
        let m1 = least_model(&h1, &kb).unwrap().atoms_of(&f);
        let m2 = least_model(&h2, &kb).unwrap().atoms_of(&f);
        if !m2.is_subset(&m1) {
            violations += 1;
        }
    }
    let pass = violations == 0;
    let detail = format!("{pairs} pairs, {violations} violations ({not_subsuming} draws discarded as not subsuming)");
    report(6, "subsumption soundness", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_07_separable_union_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut pairs, mut violations) = (0, 0);
    while pairs < C7_PAIRS {
        let n = rng.random_range(3..=6);
        let kb = KnowledgeBase::new(common::random_graph(&mut rng, n), vec![]).unwrap();
        let atom = |a: usize, b: usize| Literal::ground("f", &[&format!("n{a}"), &format!("n{b}")]);
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for a in 0..n {
            for b in 0..n {
                match rng.random_range(0..4) {
                    0 => pos.push(atom(a, b)),
                    1 => neg.push(atom(a, b)),
                    _ => {}
                }
            }
        }
        let Ok(exs) = ExampleSet::new(pos, neg) else { continue };
        let tester = Tester::new(&kb, &exs);
        // Some worlds admit no consistent rule at all; redraw those.
        let consistent = |rng: &mut ChaCha8Rng| {
            (0..200).find_map(|_| {
                let h = Hypothesis::new((0..rng.random_range(1..=2)).map(|_| common::random_rule(rng, "f", false, 2)));
                tester.coverage(&h).is_consistent().then_some(h)
            })
        };
        let (Some(p1), Some(p2)) = (consistent(&mut rng), consistent(&mut rng)) else { continue };
        let union = p1.union(&p2);
        if !is_separable(&union) {
            continue;
        }
        pairs += 1;
        if !tester.coverage(&union).is_consistent() {
            violations += 1;
        }
    }
    let pass = violations == 0;
    let detail = format!("{pairs} pairs, {violations} violations");
    report(7, "separable union consistency", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_08_performance_trend() {
    let task = load_task(&task_dir("trains3")).unwrap();
    let start = Instant::now();
    let combo = learn_combo(&task.kb, &task.examples, &task.bias, &LearnConfig::default()).unwrap();
    let combo_time = start.elapsed();
    let start = Instant::now();
    let cfg = LearnConfig { timeout: Some(C8_BASELINE_BUDGET), ..Default::default() };
    let base = learn_baseline(&task.kb, &task.examples, &task.bias, &cfg).unwrap();
    let base_time = start.elapsed();
    let (c, b) = (combo.stats.programs_tested, base.stats.programs_tested);
    let by_count = combo.status == LearnStatus::Optimal && b >= C8_MIN_RATIO * c;
    let by_time = base.status == LearnStatus::TimedOut && combo_time < C8_COMBO_MAX_TIME;
    let pass = by_count || by_time;
    let detail = format!(
        "combo tested {c} (cost {}, {:.2}s), baseline tested {b} (cost {}, {:?}, {:.2}s), ratio {:.1}, required {C8_MIN_RATIO}",
        combo.cost,
        combo_time.as_secs_f64(),
        base.cost,
        base.status,
        base_time.as_secs_f64(),
        b as f64 / c.max(1) as f64
    );
    report(8, "performance trend", pass, &detail);
    assert!(pass, "{detail}");
}

/// Three programs from the motivating example, each covering one positive.
fn golden_pool() -> PromisingPool {
    let mut pool = PromisingPool::new(3);
    for (text, covered) in [
        ("f(A):- head(A,7). f(A):- tail(A,B),f(B).", 0),
        ("f(A):- head(A,4),tail(A,B),head(B,4). f(A):- tail(A,B),f(B).", 1),
        ("f(A):- head(A,23),tail(A,B),head(B,24). f(A):- tail(A,B),f(B).", 2),
    ] {
        pool.add(&parse_hypothesis(text).unwrap(), common::bits(3, &[covered]));
    }
    pool
}

#[test]
fn criterion_09_encoding_golden() {
    let text = emit_asp_encoding(&golden_pool(), Some(14));
    let golden = include_str!("data/golden_pool.lp");
    let literals = ["{rule(R)}:-size(R,_).", ":~ example(E), not covered(E). [1@2, (E,)]", ":~ rule(R),size(R,K). [K@1, (R,)]"];
    let pass = text == golden && literals.iter().all(|l| golden.contains(l));
    let detail = format!("{} bytes, byte-exact {}", text.len(), text == golden);
    report(9, "encoding golden file", pass, &detail);
    assert!(pass, "{detail}\n{text}");
}

#[test]
fn criterion_10_determinism() {
    let runs: Vec<Vec<String>> = (0..2)
        .map(|_| vec![motivating_example().transcript, oracle_equivalence(true).transcript, combine_exactness().transcript])
        .collect();
    let same: Vec<bool> = runs[0].iter().zip(&runs[1]).map(|(a, b)| a == b).collect();
    let pass = same.iter().all(|s| *s);
    let bytes: usize = runs[0].iter().map(String::len).sum();
    let detail = format!("criteria 1-3 run twice, identical transcripts {same:?}, {bytes} bytes compared");
    report(10, "determinism", pass, &detail);
    assert!(pass, "{detail}");
}
