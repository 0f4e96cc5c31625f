//! Hypothesis-space declarations.
//!
//! A bias file is a list of directives:
//!
//! ```text
//! max_clause(6).  max_vars(6).  max_body(6).
//! head_pred(zendo,1).
//! body_pred(piece,2).
//! type(piece,(state,piece)).
//! direction(piece,(in,out)).
//! constant(int,7).
//! ```
//!
//! `constant(Type,Value)` declares a constant that hypotheses may use in a
//! body slot of that type. Without any `type` directive every slot shares
//! one implicit type; without `direction` directives every argument is an
//! output, which switches safety checking off.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::logic::parse::{read_clauses, Ast, ParseError};
use crate::logic::{Literal, PredSig, Rule, Symbol, Term, Var};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Direction {
    In,
    Out,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::In => "in",
            Direction::Out => "out",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BiasError {
    #[error("syntax error: {0}")]
    Syntax(#[from] ParseError),
    #[error("missing head_pred directive")]
    MissingHead,
    #[error("line {line}: unknown directive {name}")]
    UnknownDirective { line: usize, name: String },
    #[error("line {line}: malformed {directive} directive")]
    Malformed { line: usize, directive: String },
    #[error("{directive} for {pred} has {found} entries but the predicate has arity {arity}")]
    ArityMismatch { directive: &'static str, pred: String, arity: usize, found: usize },
    #[error("line {line}: {message}")]
    Conflict { line: usize, message: String },
    #[error("{directive} given for undeclared predicate {pred}")]
    Undeclared { directive: &'static str, pred: String },
    #[error("{0}")]
    Invalid(String),
}

/// A validated hypothesis-space declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasSpec {
    pub max_clauses: usize,
    pub max_vars: usize,
    pub max_body: usize,
    pub head: PredSig,
    pub body_preds: BTreeSet<PredSig>,
    pub types: BTreeMap<Symbol, Vec<Symbol>>,
    pub directions: BTreeMap<Symbol, Vec<Direction>>,
    /// Constants usable in hypotheses, keyed by type name.
    pub constants: BTreeMap<Symbol, BTreeSet<Symbol>>,
}

pub const DEFAULT_MAX_CLAUSES: usize = 1;
pub const DEFAULT_MAX_VARS: usize = 6;
pub const DEFAULT_MAX_BODY: usize = 6;

fn positive(ast: &Ast, line: usize, directive: &str) -> Result<usize, BiasError> {
    match ast {
        Ast::Num(n) => n.parse().map_err(|_| BiasError::Malformed { line, directive: directive.into() }),
        _ => Err(BiasError::Malformed { line, directive: directive.into() }),
    }
}

fn atom(ast: &Ast, line: usize, directive: &str) -> Result<String, BiasError> {
    match ast {
        Ast::Atom(a) => Ok(a.clone()),
        _ => Err(BiasError::Malformed { line, directive: directive.into() }),
    }
}

fn tuple(ast: &Ast, line: usize, directive: &str) -> Result<Vec<String>, BiasError> {
    match ast {
        Ast::Tuple(items) => items.iter().map(|i| atom(i, line, directive)).collect(),
        _ => Err(BiasError::Malformed { line, directive: directive.into() }),
    }
}

fn set_once<T: PartialEq + fmt::Debug>(
    slot: &mut Option<T>,
    value: T,
    line: usize,
    what: &str,
) -> Result<(), BiasError> {
    match slot {
        Some(old) if *old != value => Err(BiasError::Conflict {
            line,
            message: format!("conflicting {what}: {old:?} vs {value:?}"),
        }),
        _ => {
            *slot = Some(value);
            Ok(())
        }
    }
}

/// Parses and validates a bias file.
pub fn parse_bias(text: &str) -> Result<BiasSpec, BiasError> {
    let mut max_clauses = None;
    let mut max_vars = None;
    let mut max_body = None;
    let mut head: Option<PredSig> = None;
    let mut body_preds: BTreeMap<String, usize> = BTreeMap::new();
    let mut types: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut directions: BTreeMap<String, Vec<Direction>> = BTreeMap::new();
    let mut constants: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();

    for clause in read_clauses(text)? {
        let line = clause.line;
        let Some((name, args)) = clause.head.functor() else {
            return Err(BiasError::Malformed { line, directive: "directive".into() });
        };
        if !clause.body.is_empty() {
            return Err(BiasError::Malformed { line, directive: name.into() });
        }
        let want = |n: usize| -> Result<(), BiasError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(BiasError::Malformed { line, directive: name.into() })
            }
        };
        match name {
            "max_clause" | "max_vars" | "max_body" => {
                want(1)?;
                let n = positive(&args[0], line, name)?;
                let slot = match name {
                    "max_clause" => &mut max_clauses,
                    "max_vars" => &mut max_vars,
                    _ => &mut max_body,
                };
                set_once(slot, n, line, name)?;
            }
            "head_pred" | "body_pred" => {
                want(2)?;
                let p = atom(&args[0], line, name)?;
                let a = positive(&args[1], line, name)?;
                if name == "head_pred" {
                    set_once(&mut head, PredSig::new(&p, a), line, name)?;
                } else if let Some(old) = body_preds.insert(p.clone(), a) {
                    if old != a {
                        return Err(BiasError::Conflict { line, message: format!("{p} declared with arities {old} and {a}") });
                    }
                }
            }
            "type" => {
                want(2)?;
                let p = atom(&args[0], line, name)?;
                let ts = tuple(&args[1], line, name)?;
                if let Some(old) = types.insert(p.clone(), ts.clone()) {
                    if old != ts {
                        return Err(BiasError::Conflict { line, message: format!("conflicting types for {p}") });
                    }
                }
            }
            "direction" => {
                want(2)?;
                let p = atom(&args[0], line, name)?;
                let ds = tuple(&args[1], line, name)?
                    .iter()
                    .map(|d| match d.as_str() {
                        "in" => Ok(Direction::In),
                        "out" => Ok(Direction::Out),
                        _ => Err(BiasError::Malformed { line, directive: name.into() }),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(old) = directions.insert(p.clone(), ds.clone()) {
                    if old != ds {
                        return Err(BiasError::Conflict { line, message: format!("conflicting directions for {p}") });
                    }
                }
            }
            "constant" => {
                want(2)?;
                let t = atom(&args[0], line, name)?;
                let c = args[1].constant_text().ok_or(BiasError::Malformed { line, directive: name.into() })?;
                constants.entry(Symbol::from(t)).or_default().insert(Symbol::from(c));
            }
            other => return Err(BiasError::UnknownDirective { line, name: other.into() }),
        }
    }

    let head = head.ok_or(BiasError::MissingHead)?;
    let spec = BiasSpec {
        max_clauses: max_clauses.unwrap_or(DEFAULT_MAX_CLAUSES),
        max_vars: max_vars.unwrap_or(DEFAULT_MAX_VARS),
        max_body: max_body.unwrap_or(DEFAULT_MAX_BODY),
        head,
        body_preds: body_preds.into_iter().map(|(p, a)| PredSig::new(&p, a)).collect(),
        types: types.into_iter().map(|(p, ts)| (Symbol::from(p), ts.into_iter().map(Symbol::from).collect())).collect(),
        directions: directions.into_iter().map(|(p, d)| (Symbol::from(p), d)).collect(),
        constants,
    };
    spec.validate()?;
    Ok(spec)
}

impl BiasSpec {
    fn arity_of(&self, pred: &Symbol) -> Option<usize> {
        if self.head.name == *pred {
            return Some(self.head.arity);
        }
        self.body_preds.iter().find(|p| p.name == *pred).map(|p| p.arity)
    }

    fn validate(&self) -> Result<(), BiasError> {
        if self.max_body == 0 {
            return Err(BiasError::Invalid("max_body must be at least 1".into()));
        }
        if self.max_clauses == 0 {
            return Err(BiasError::Invalid("max_clause must be at least 1".into()));
        }
        if self.max_vars < self.head.arity.max(1) {
            return Err(BiasError::Invalid(format!(
                "max_vars ({}) is smaller than the head arity ({})",
                self.max_vars, self.head.arity
            )));
        }
        for (p, ts) in &self.types {
            let arity = self.arity_of(p).ok_or(BiasError::Undeclared { directive: "type", pred: p.to_string() })?;
            if arity != ts.len() {
                return Err(BiasError::ArityMismatch { directive: "type", pred: p.to_string(), arity, found: ts.len() });
            }
        }
        for (p, ds) in &self.directions {
            let arity =
                self.arity_of(p).ok_or(BiasError::Undeclared { directive: "direction", pred: p.to_string() })?;
            if arity != ds.len() {
                return Err(BiasError::ArityMismatch { directive: "direction", pred: p.to_string(), arity, found: ds.len() });
            }
        }
        Ok(())
    }

    pub fn is_typed(&self) -> bool {
        !self.types.is_empty()
    }

    /// Multi-rule programs are only ever recursive, so recursion is on
    /// exactly when more than one clause is allowed.
    pub fn allows_recursion(&self) -> bool {
        self.max_clauses >= 2
    }

    /// Predicates that may occur in a body: the declared body predicates,
    /// plus the head predicate when recursion is allowed.
    pub fn body_vocabulary(&self) -> Vec<PredSig> {
        let mut v: BTreeSet<PredSig> = self.body_preds.clone();
        if self.allows_recursion() {
            v.insert(self.head.clone());
        }
        v.into_iter().collect()
    }

    pub fn slot_type(&self, pred: &Symbol, pos: usize) -> Option<&Symbol> {
        self.types.get(pred).and_then(|ts| ts.get(pos))
    }

    pub fn slot_direction(&self, pred: &Symbol, pos: usize) -> Direction {
        self.directions.get(pred).and_then(|ds| ds.get(pos)).copied().unwrap_or(Direction::Out)
    }

    /// Constants that may fill a slot of the given type.
    pub fn constants_for(&self, slot: Option<&Symbol>) -> Vec<Symbol> {
        match slot {
            Some(t) if self.is_typed() => self.constants.get(t).map(|s| s.iter().cloned().collect()).unwrap_or_default(),
            _ => {
                let all: BTreeSet<Symbol> = self.constants.values().flatten().cloned().collect();
                all.into_iter().collect()
            }
        }
    }

    fn constant_fits(&self, c: &Symbol, slot: Option<&Symbol>) -> bool {
        match slot {
            Some(t) if self.is_typed() => self.constants.get(t).is_some_and(|s| s.contains(c)),
            _ => self.constants.values().any(|s| s.contains(c)),
        }
    }

    /// The canonical head atom `p(A,B,...)`.
    pub fn head_literal(&self) -> Literal {
        Literal::new(self.head.name.clone(), (0..self.head.arity as Var).map(Term::Var).collect())
    }

    pub fn is_valid_rule(&self, rule: &Rule) -> bool {
        self.check_rule(rule).is_ok()
    }

    /// Checks `rule` against the declared space: head shape, body size,
    /// variable count, vocabulary, typing, range restriction and safety.
    pub fn check_rule(&self, rule: &Rule) -> Result<(), RuleViolation> {
        let head = &rule.head;
        if head.sig() != self.head {
            return Err(RuleViolation::Head);
        }
        let head_vars: Vec<Var> = head.vars().collect();
        if head_vars.len() != head.arity() || (1..head_vars.len()).any(|i| head_vars[..i].contains(&head_vars[i])) {
            return Err(RuleViolation::Head);
        }
        if rule.body().is_empty() || rule.body().len() > self.max_body {
            return Err(RuleViolation::BodySize);
        }
        if rule.var_count() > self.max_vars {
            return Err(RuleViolation::TooManyVars);
        }
        let vocab = self.body_vocabulary();
        for lit in rule.body() {
            if !vocab.contains(&lit.sig()) {
                return Err(RuleViolation::Vocabulary);
            }
            if lit == head {
                return Err(RuleViolation::Tautology);
            }
        }
        if TypeEnv::for_rule(self, rule).is_none() {
            return Err(RuleViolation::Types);
        }
        for lit in rule.body() {
            for (i, t) in lit.args.iter().enumerate() {
                if let Term::Const(c) = t {
                    if !self.constant_fits(c, self.slot_type(&lit.pred, i)) {
                        return Err(RuleViolation::Types);
                    }
                }
            }
        }
        if !rule.is_range_restricted() {
            return Err(RuleViolation::Unbound);
        }
        if !self.is_safe(rule) {
            return Err(RuleViolation::Unsafe);
        }
        Ok(())
    }

    /// Some body order binds every `in` argument before use, starting from
    /// the head's `in` arguments.
    fn is_safe(&self, rule: &Rule) -> bool {
        let mut bound: BTreeSet<Var> = BTreeSet::new();
        for (i, t) in rule.head.args.iter().enumerate() {
            if let Term::Var(v) = t {
                if self.slot_direction(&rule.head.pred, i) == Direction::In {
                    bound.insert(*v);
                }
            }
        }
        let mut pending: Vec<&Literal> = rule.body().iter().collect();
        loop {
            let before = pending.len();
            pending.retain(|lit| {
                let ready = lit.args.iter().enumerate().all(|(i, t)| match t {
                    Term::Var(v) => self.slot_direction(&lit.pred, i) == Direction::Out || bound.contains(v),
                    Term::Const(_) => true,
                });
                if ready {
                    bound.extend(lit.vars());
                }
                !ready
            });
            if pending.is_empty() {
                return true;
            }
            if pending.len() == before {
                return false;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleViolation {
    Head,
    BodySize,
    TooManyVars,
    Vocabulary,
    Tautology,
    Types,
    Unbound,
    Unsafe,
}

impl fmt::Display for BiasSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max_clause({}).", self.max_clauses)?;
        writeln!(f, "max_vars({}).", self.max_vars)?;
        writeln!(f, "max_body({}).", self.max_body)?;
        writeln!(f, "head_pred({},{}).", self.head.name, self.head.arity)?;
        for p in &self.body_preds {
            writeln!(f, "body_pred({},{}).", p.name, p.arity)?;
        }
        let tup = |items: Vec<String>| {
            if items.len() == 1 {
                format!("({},)", items[0])
            } else {
                format!("({})", items.join(","))
            }
        };
        for (p, ts) in &self.types {
            writeln!(f, "type({},{}).", p, tup(ts.iter().map(|t| t.to_string()).collect()))?;
        }
        for (p, ds) in &self.directions {
            writeln!(f, "direction({},{}).", p, tup(ds.iter().map(|d| d.to_string()).collect()))?;
        }
        for (t, cs) in &self.constants {
            for c in cs {
                writeln!(f, "constant({t},{c}).")?;
            }
        }
        Ok(())
    }
}

/// Per-variable types of a rule under construction. `None` means the
/// variable has only filled untyped slots so far.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeEnv {
    types: Vec<Option<Symbol>>,
}

impl TypeEnv {
    /// `n` variables with no type information.
    pub fn untyped(n: usize) -> Self {
        TypeEnv { types: vec![None; n] }
    }

    pub fn with_types(types: Vec<Option<Symbol>>) -> Self {
        TypeEnv { types }
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn get(&self, v: Var) -> Option<&Symbol> {
        self.types.get(v as usize).and_then(|t| t.as_ref())
    }

    fn assign(&mut self, v: Var, t: Option<&Symbol>) -> bool {
        let i = v as usize;
        if i >= self.types.len() {
            self.types.resize(i + 1, None);
        }
        match (&self.types[i], t) {
            (_, None) => true,
            (None, Some(t)) => {
                self.types[i] = Some(t.clone());
                true
            }
            (Some(old), Some(t)) => old == t,
        }
    }

    /// Infers variable types from the head and body of `rule`; `None` when
    /// some variable would need two types.
    pub fn for_rule(spec: &BiasSpec, rule: &Rule) -> Option<TypeEnv> {
        let mut env = TypeEnv::untyped(0);
        for lit in std::iter::once(&rule.head).chain(rule.body()) {
            if !env.add_literal(spec, lit) {
                return None;
            }
        }
        let n = rule.vars().into_iter().max().map_or(0, |v| v as usize + 1);
        if env.types.len() < n {
            env.types.resize(n, None);
        }
        Some(env)
    }

    pub fn add_literal(&mut self, spec: &BiasSpec, lit: &Literal) -> bool {
        lit.args.iter().enumerate().all(|(i, t)| match t {
            Term::Var(v) => self.assign(*v, spec.slot_type(&lit.pred, i)),
            Term::Const(_) => true,
        })
    }
}

fn compatible(var_type: Option<&Symbol>, slot: Option<&Symbol>) -> bool {
    match (var_type, slot) {
        (Some(a), Some(b)) => a == b,
        _ => true,
    }
}

/// Every body literal over the vocabulary whose arguments are variables of
/// `scope` (respecting their types), fresh variables numbered from
/// `scope.len()` upwards in order of first use, or declared constants,
/// using at most `max_vars` variables in total.
pub fn candidate_literals(spec: &BiasSpec, scope: &TypeEnv) -> Vec<Literal> {
    let mut out = Vec::new();
    for sig in spec.body_vocabulary() {
        let mut args = Vec::with_capacity(sig.arity);
        let mut fresh: Vec<Option<Symbol>> = Vec::new();
        fill_slots(spec, scope, &sig, &mut args, &mut fresh, &mut out);
    }
    out
}

fn fill_slots(
    spec: &BiasSpec,
    scope: &TypeEnv,
    sig: &PredSig,
    args: &mut Vec<Term>,
    fresh: &mut Vec<Option<Symbol>>,
    out: &mut Vec<Literal>,
) {
    let pos = args.len();
    if pos == sig.arity {
        out.push(Literal::new(sig.name.clone(), args.clone()));
        return;
    }
    let slot = spec.slot_type(&sig.name, pos).cloned();
    let n = scope.len();
    for v in 0..n {
        if compatible(scope.get(v as Var), slot.as_ref()) {
            args.push(Term::Var(v as Var));
            fill_slots(spec, scope, sig, args, fresh, out);
            args.pop();
        }
    }
    for f in 0..fresh.len() {
        let old = fresh[f].clone();
        if compatible(old.as_ref(), slot.as_ref()) {
            if old.is_none() {
                fresh[f] = slot.clone();
            }
            args.push(Term::Var((n + f) as Var));
            fill_slots(spec, scope, sig, args, fresh, out);
            args.pop();
            fresh[f] = old;
        }
    }
    if n + fresh.len() < spec.max_vars {
        fresh.push(slot.clone());
        args.push(Term::Var((n + fresh.len() - 1) as Var));
        fill_slots(spec, scope, sig, args, fresh, out);
        args.pop();
        fresh.pop();
    }
    for c in spec.constants_for(slot.as_ref()) {
        args.push(Term::Const(c));
        fill_slots(spec, scope, sig, args, fresh, out);
        args.pop();
    }
}
