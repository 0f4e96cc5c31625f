//! The combo learning loop, plus the baseline loop that never combines.

use std::collections::VecDeque;
use std::fmt;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use thiserror::Error;

use crate::bias::BiasSpec;
use crate::combiner::{solve_combine, CombineStatus, PromisingPool};
use crate::datalog::{CoverageRecord, EvalBudget, ExampleSet, KnowledgeBase, Tester};
use crate::generator::{ConstraintKind, ConstraintStore, Generator, Next};
use crate::logic::{Cost, Hypothesis};
use crate::task::{validate, Task, TaskError};

pub use crate::generator::Mode;

#[derive(Clone, Debug)]
pub struct LearnConfig {
    /// Largest program size (literal count) considered.
    pub max_size: usize,
    pub timeout: Option<Duration>,
    pub mode: Mode,
    pub budget: EvalBudget,
    /// Register constraints from failed tests. Turning this off only costs
    /// time.
    pub constraints: bool,
    /// Worker threads for testing; 1 tests sequentially. Results do not
    /// depend on this.
    pub threads: usize,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            max_size: 20,
            timeout: None,
            mode: Mode::Combo,
            budget: EvalBudget::default(),
            constraints: true,
            threads: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid task: {0}")]
    Task(#[from] TaskError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LearnStatus {
    /// A complete, consistent program with no smaller solution.
    Optimal,
    /// The clock ran out; the result is the best found so far.
    TimedOut,
    /// No solution of size at most `max_size` exists.
    NoSolution,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageStats {
    pub calls: u64,
    pub total: Duration,
    pub max: Duration,
}

impl StageStats {
    fn record(&mut self, d: Duration) {
        self.calls += 1;
        self.total += d;
        self.max = self.max.max(d);
    }

    pub fn mean(&self) -> Duration {
        if self.calls == 0 {
            Duration::ZERO
        } else {
            self.total / self.calls as u32
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub generate: StageStats,
    pub test: StageStats,
    pub combine: StageStats,
    pub constrain: StageStats,
    /// Programs handed to the test stage.
    pub programs_tested: u64,
    pub constraints: usize,
    pub promising: usize,
    /// Recursive combinations rejected on the negatives.
    pub rejected_combinations: usize,
    /// Hypotheses whose evaluation hit the budget.
    pub eval_failures: u64,
}

/// One improvement of the incumbent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub hypothesis: Hypothesis,
    /// Positives credited to the combination.
    pub tp: usize,
    pub fn_: usize,
    pub cost: Cost,
}

impl TraceEntry {
    pub fn is_complete(&self) -> bool {
        self.fn_ == 0
    }
}

#[derive(Clone, Debug)]
pub struct LearnResult {
    pub best: Hypothesis,
    pub cost: Cost,
    pub tp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
    pub status: LearnStatus,
    pub proven_optimal: bool,
    pub stats: Stats,
    pub trace: Vec<TraceEntry>,
    /// Final promising pool (combo mode).
    pub pool: PromisingPool,
    /// Size bound in force at the end, as passed to the combiner.
    pub bound: Option<usize>,
    pub elapsed: Duration,
}

impl LearnResult {
    pub fn is_solution(&self) -> bool {
        !self.best.is_empty() && self.fn_ == 0 && self.fp == 0
    }
}

/// Progress notifications, in order.
#[derive(Clone, Copy, Debug)]
pub enum Event<'a> {
    Examples { pos: usize, neg: usize },
    SizeStart(usize),
    NewBest(&'a TraceEntry),
}

impl fmt::Display for Event<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Examples { pos, neg } => write!(f, "Num. pos examples: {pos}\nNum. neg examples: {neg}"),
            Event::SizeStart(s) => write!(f, "Searching programs of size: {s}"),
            Event::NewBest(e) => {
                writeln!(f, "********************")?;
                writeln!(f, "New best hypothesis:")?;
                writeln!(f, "tp:{} fn:{} size:{}", e.tp, e.fn_, e.cost)?;
                if !e.hypothesis.is_empty() {
                    writeln!(f, "{}", e.hypothesis)?;
                }
                write!(f, "********************")
            }
        }
    }
}

/// Constraint kinds implied by a test outcome.
///
/// Combo: an inconsistent program yields a generalisation constraint; a
/// totally incomplete or a consistent one yields a specialisation
/// constraint. A partially complete, inconsistent program is not
/// specialised since a specialisation may still be useful.
/// Baseline: incomplete gives specialisation, inconsistent gives
/// generalisation.
pub fn outcome_to_constraints(rec: &CoverageRecord, mode: Mode) -> Vec<ConstraintKind> {
    let mut kinds = Vec::new();
    if !rec.is_consistent() {
        kinds.push(ConstraintKind::Generalisation);
    }
    let specialise = match mode {
        Mode::Combo => rec.is_totally_incomplete() || rec.is_consistent(),
        Mode::Baseline => !rec.is_complete(),
    };
    if specialise {
        kinds.push(ConstraintKind::Specialisation);
    }
    kinds
}

fn timed<T>(stage: &mut StageStats, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    stage.record(t.elapsed());
    out
}

/// Pulls programs from the generator and tests them, optionally in
/// parallel batches. Programs pruned by constraints added after they were
/// pulled are skipped, so the processed sequence, and every call count, is
/// what a sequential run would see.
struct Feed<'a> {
    tester: &'a Tester<'a>,
    pool: Option<rayon::ThreadPool>,
    /// Program, generation time, coverage, test time.
    queue: VecDeque<(Hypothesis, Duration, CoverageRecord, Duration)>,
    exhausted: bool,
    /// Generation time spent on skipped programs.
    carry: Duration,
}

impl<'a> Feed<'a> {
    fn new(tester: &'a Tester<'a>, threads: usize) -> Self {
        let pool = (threads > 1).then(|| rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool"));
        Feed { tester, pool, queue: VecDeque::new(), exhausted: false, carry: Duration::ZERO }
    }

    fn clear(&mut self) {
        self.queue.clear();
        self.exhausted = false;
        self.carry = Duration::ZERO;
    }

    fn next(
        &mut self,
        gen: &mut Generator,
        store: &ConstraintStore,
        stats: &mut Stats,
    ) -> Option<(Hypothesis, CoverageRecord)> {
        loop {
            if let Some((h, gen_time, rec, test_time)) = self.queue.pop_front() {
                if self.pool.is_some() && store.is_pruned(&h) {
                    self.carry += gen_time;
                    continue;
                }
                stats.generate.record(gen_time + std::mem::take(&mut self.carry));
                stats.test.record(test_time);
                stats.programs_tested += 1;
                return Some((h, rec));
            }
            if self.exhausted {
                return None;
            }
            let batch = if self.pool.is_some() { 64 } else { 1 };
            let mut progs = Vec::with_capacity(batch);
            while progs.len() < batch {
                let t = Instant::now();
                match gen.next_program(store) {
                    Next::Program(h) => progs.push((h, t.elapsed())),
                    Next::Exhausted => {
                        stats.generate.record(t.elapsed() + std::mem::take(&mut self.carry));
                        self.exhausted = true;
                        break;
                    }
                }
            }
            let tester = self.tester;
            let test = |(h, gen_time): (Hypothesis, Duration)| {
                let t = Instant::now();
                let rec = tester.coverage(&h);
                (h, gen_time, rec, t.elapsed())
            };
            match &self.pool {
                Some(p) => {
                    let tested: Vec<_> = p.install(|| progs.into_par_iter().map(test).collect());
                    self.queue.extend(tested);
                }
                None => self.queue.extend(progs.into_iter().map(test)),
            }
        }
    }
}

/// Learns with the mode in `config`.
pub fn learn(
    kb: &KnowledgeBase,
    exs: &ExampleSet,
    spec: &BiasSpec,
    config: &LearnConfig,
    on_event: &mut dyn FnMut(Event<'_>),
) -> Result<LearnResult, LearnError> {
    validate(spec, kb, exs)?;
    if config.max_size == 0 {
        return Err(LearnError::Config("max_size must be at least 1".into()));
    }
    if config.threads == 0 {
        return Err(LearnError::Config("threads must be at least 1".into()));
    }
    if !exs.contradictions().is_empty() {
        log::warn!("{} examples are both positive and negative; no solution exists", exs.contradictions().len());
    }
    let tester = Tester::with_budget(kb, exs, config.budget);
    on_event(Event::Examples { pos: exs.num_pos(), neg: exs.num_neg() });
    Ok(Loop::new(&tester, spec, config).run(on_event))
}

pub fn learn_task(task: &Task, config: &LearnConfig, on_event: &mut dyn FnMut(Event<'_>)) -> Result<LearnResult, LearnError> {
    learn(&task.kb, &task.examples, &task.bias, config, on_event)
}

pub fn learn_combo(kb: &KnowledgeBase, exs: &ExampleSet, spec: &BiasSpec, config: &LearnConfig) -> Result<LearnResult, LearnError> {
    learn(kb, exs, spec, &LearnConfig { mode: Mode::Combo, ..config.clone() }, &mut |_| {})
}

pub fn learn_baseline(
    kb: &KnowledgeBase,
    exs: &ExampleSet,
    spec: &BiasSpec,
    config: &LearnConfig,
) -> Result<LearnResult, LearnError> {
    learn(kb, exs, spec, &LearnConfig { mode: Mode::Baseline, ..config.clone() }, &mut |_| {})
}

struct Loop<'a> {
    tester: &'a Tester<'a>,
    config: &'a LearnConfig,
    gen: Generator,
    store: ConstraintStore,
    pool: PromisingPool,
    stats: Stats,
    trace: Vec<TraceEntry>,
    best: Option<(Hypothesis, FixedBitSet, usize)>,
    /// Largest size still worth searching.
    ceiling: usize,
    start: Instant,
}

impl<'a> Loop<'a> {
    fn new(tester: &'a Tester<'a>, spec: &BiasSpec, config: &'a LearnConfig) -> Self {
        Loop {
            tester,
            config,
            gen: Generator::new(spec, config.mode),
            store: ConstraintStore::new(),
            pool: PromisingPool::new(tester.num_pos()),
            stats: Stats::default(),
            trace: Vec::new(),
            best: None,
            ceiling: config.max_size,
            start: Instant::now(),
        }
    }

    fn timed_out(&self) -> bool {
        self.config.timeout.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn best_is_complete(&self) -> bool {
        self.best.as_ref().is_some_and(|(_, cov, _)| cov.count_ones(..) == self.tester.num_pos())
    }

    fn improve(&mut self, h: Hypothesis, cov: FixedBitSet, cost: usize, on_event: &mut dyn FnMut(Event<'_>)) {
        let tp = cov.count_ones(..);
        let entry = TraceEntry { hypothesis: h.clone(), tp, fn_: self.tester.num_pos() - tp, cost: Cost(cost) };
        self.best = Some((h, cov, cost));
        if entry.is_complete() {
            self.ceiling = self.ceiling.min(cost - 1);
        }
        on_event(Event::NewBest(&entry));
        self.trace.push(entry);
    }

    fn run(mut self, on_event: &mut dyn FnMut(Event<'_>)) -> LearnResult {
        let mut feed = Feed::new(self.tester, self.config.threads);
        let mut timed_out = false;
        let mut size = 1;
        'sizes: while size <= self.ceiling {
            on_event(Event::SizeStart(size));
            self.gen.set_size(size);
            feed.clear();
            loop {
                if self.timed_out() {
                    timed_out = true;
                    break 'sizes;
                }
                let Some((h, rec)) = feed.next(&mut self.gen, &self.store, &mut self.stats) else { break };
                if rec.eval_failed {
                    self.stats.eval_failures += 1;
                    log::warn!("evaluation budget exceeded testing:\n{h}");
                }
                match self.config.mode {
                    Mode::Combo => self.combo_step(&h, &rec, on_event),
                    Mode::Baseline => {
                        if rec.is_complete() && rec.is_consistent() && !rec.eval_failed {
                            let cost = h.cost().0;
                            self.improve(h.clone(), rec.pos_covered.clone(), cost, on_event);
                        }
                    }
                }
                self.constrain(&h, &rec);
                if size > self.ceiling {
                    break 'sizes;
                }
            }
            size += 1;
        }
        self.finish(timed_out)
    }

    fn combo_step(&mut self, h: &Hypothesis, rec: &CoverageRecord, on_event: &mut dyn FnMut(Event<'_>)) {
        if !rec.is_promising() || rec.eval_failed {
            return;
        }
        self.pool.add(h, rec.pos_covered.clone());
        self.stats.promising += 1;
        let incumbent = self.best.as_ref().map(|(_, cov, cost)| (cov.count_ones(..), *cost));
        let bound = Some(self.ceiling + 1);
        let (tester, pool) = (self.tester, &mut self.pool);
        let res = timed(&mut self.stats.combine, || solve_combine(pool, bound, tester, incumbent));
        self.stats.rejected_combinations += res.rejected;
        if res.status == CombineStatus::Solution {
            self.improve(res.hypothesis, res.coverage, res.cost.0, on_event);
        }
    }

    fn constrain(&mut self, h: &Hypothesis, rec: &CoverageRecord) {
        if !self.config.constraints || rec.eval_failed {
            return;
        }
        let kinds = outcome_to_constraints(rec, self.config.mode);
        let store = &mut self.store;
        timed(&mut self.stats.constrain, || {
            for k in kinds {
                store.register(h, k);
            }
        });
    }

    fn finish(mut self, timed_out: bool) -> LearnResult {
        self.stats.constraints = self.store.len();
        let complete = self.best_is_complete();
        let status = if timed_out {
            LearnStatus::TimedOut
        } else if complete {
            LearnStatus::Optimal
        } else {
            LearnStatus::NoSolution
        };
        let (best, cost) = match &self.best {
            Some((h, _, c)) => (h.clone(), Cost(*c)),
            None => (Hypothesis::empty(), Cost(0)),
        };
        let rec = if best.is_empty() {
            let mut r = CoverageRecord::failed(self.tester.num_pos(), self.tester.num_neg());
            r.eval_failed = false;
            r
        } else {
            self.tester.coverage(&best)
        };
        LearnResult {
            cost,
            tp: rec.tp(),
            fn_: rec.fn_(),
            tn: rec.tn(),
            fp: rec.fp(),
            proven_optimal: status == LearnStatus::Optimal,
            status,
            best,
            stats: self.stats,
            trace: self.trace,
            pool: self.pool,
            bound: (self.config.mode == Mode::Combo).then_some(self.ceiling + 1),
            elapsed: self.start.elapsed(),
        }
    }
}
