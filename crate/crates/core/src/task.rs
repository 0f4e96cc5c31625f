//! Task directories: `bias.pl`, `bk.pl`, `exs.pl` and an optional
//! `ground.toml` manifest that turns list-valued examples into finite
//! background facts.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::bias::{parse_bias, BiasError, BiasSpec};
use crate::datalog::{ExampleError, ExampleSet, KbError, KnowledgeBase};
use crate::logic::parse::{read_clauses, Ast};
use crate::logic::{Literal, Term};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("missing task file {}", .0.display())]
    Missing(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bias: {0}")]
    Bias(#[from] BiasError),
    #[error("background: {0}")]
    Background(#[from] KbError),
    #[error("examples: {0}")]
    Examples(#[from] ExampleError),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("examples are about {found} but the bias declares head {declared}")]
    TargetMismatch { declared: String, found: String },
    #[error("the task has no positive examples")]
    NoPositives,
}

/// Grounding instructions for list tasks.
#[derive(Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GroundManifest {
    /// Lists to ground in addition to those found in the examples.
    #[serde(default)]
    pub lists: Vec<String>,
    /// Integers `n` that get a unary fact `c<n>(n)`.
    #[serde(default)]
    pub element_preds: Vec<i64>,
    /// Inclusive bounds every list element must respect.
    #[serde(default)]
    pub int_range: Option<[i64; 2]>,
}

impl GroundManifest {
    pub fn parse(text: &str) -> Result<Self, TaskError> {
        toml::from_str(text).map_err(|e| TaskError::Manifest(e.to_string()))
    }
}

/// A loaded learning task.
#[derive(Clone, Debug)]
pub struct Task {
    pub bias: BiasSpec,
    pub kb: KnowledgeBase,
    pub examples: ExampleSet,
}

/// Checks the cross-file invariants every learner relies on: some
/// positive examples, examples about the declared head, and background
/// knowledge that leaves the head predicate alone.
pub fn validate(bias: &BiasSpec, kb: &KnowledgeBase, examples: &ExampleSet) -> Result<(), TaskError> {
    if examples.num_pos() == 0 {
        return Err(TaskError::NoPositives);
    }
    if let Some(t) = examples.target() {
        if t != bias.head {
            return Err(TaskError::TargetMismatch { declared: bias.head.to_string(), found: t.to_string() });
        }
    }
    kb.check_target(&bias.head)?;
    Ok(())
}

impl Task {
    pub fn new(bias: BiasSpec, kb: KnowledgeBase, examples: ExampleSet) -> Result<Self, TaskError> {
        validate(&bias, &kb, &examples)?;
        Ok(Task { bias, kb, examples })
    }
}

fn read(path: &Path) -> Result<String, TaskError> {
    if !path.exists() {
        return Err(TaskError::Missing(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| TaskError::Io { path: path.to_path_buf(), source })
}

/// Loads `dir/bias.pl`, `dir/bk.pl`, `dir/exs.pl` and, when present,
/// grounds lists according to `dir/ground.toml`.
pub fn load_task(dir: &Path) -> Result<Task, TaskError> {
    let bias = parse_bias(&read(&dir.join("bias.pl"))?)?;
    let (mut facts, rules) = KnowledgeBase::parse_clauses(&read(&dir.join("bk.pl"))?)?;
    let examples = ExampleSet::parse(&read(&dir.join("exs.pl"))?)?;
    let manifest = dir.join("ground.toml");
    if manifest.exists() {
        let manifest = GroundManifest::parse(&read(&manifest)?)?;
        facts.extend(ground_lists(&manifest, &examples)?);
    }
    Task::new(bias, KnowledgeBase::new(facts, rules)?, examples)
}

fn list_items(text: &str) -> Result<Vec<String>, TaskError> {
    let bad = || TaskError::Manifest(format!("not a list: {text}"));
    let clauses = read_clauses(&format!("l({text}).")).map_err(|_| bad())?;
    let [c] = clauses.as_slice() else { return Err(bad()) };
    match c.head.functor() {
        Some((_, [Ast::List(items)])) => items.iter().map(|i| i.constant_text().ok_or_else(bad)).collect(),
        _ => Err(bad()),
    }
}

fn render_list(items: &[String]) -> String {
    format!("[{}]", items.join(","))
}

/// Ground facts describing every suffix of every list: `head/2`, `tail/2`
/// and `empty/1`, plus `c<n>(n)` for each declared element predicate.
/// Lists come from the manifest and from list-valued example arguments.
pub fn ground_lists(manifest: &GroundManifest, examples: &ExampleSet) -> Result<Vec<Literal>, TaskError> {
    let mut lists: BTreeSet<String> = BTreeSet::new();
    for l in &manifest.lists {
        lists.insert(render_list(&list_items(l)?));
    }
    for e in examples.pos().iter().chain(examples.neg()) {
        for t in &e.args {
            if let Term::Const(c) = t {
                if c.as_str().starts_with('[') {
                    lists.insert(c.to_string());
                }
            }
        }
    }
    let mut facts: BTreeSet<Literal> = BTreeSet::new();
    for l in &lists {
        let items = list_items(l)?;
        if let Some([lo, hi]) = manifest.int_range {
            for it in &items {
                match it.parse::<i64>() {
                    Ok(n) if (lo..=hi).contains(&n) => {}
                    _ => return Err(TaskError::Manifest(format!("element {it} of {l} is outside {lo}..={hi}"))),
                }
            }
        }
        for i in 0..items.len() {
            let this = render_list(&items[i..]);
            let rest = render_list(&items[i + 1..]);
            facts.insert(Literal::ground("head", &[&this, &items[i]]));
            facts.insert(Literal::ground("tail", &[&this, &rest]));
        }
        facts.insert(Literal::ground("empty", &["[]"]));
    }
    for n in &manifest.element_preds {
        if let Some([lo, hi]) = manifest.int_range {
            if !(lo..=hi).contains(n) {
                return Err(TaskError::Manifest(format!("element predicate c{n} is outside {lo}..={hi}")));
            }
        }
        facts.insert(Literal::ground(&format!("c{n}"), &[&n.to_string()]));
    }
    Ok(facts.into_iter().collect())
}
