//! Interned symbols and the atoms built over them.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// An interned-by-value name: a predicate symbol or a constant.
///
/// Lists and numbers are opaque constants whose text is their canonical
/// spelling (`[1,3,5,7]`, `42`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A variable index. Printed as `A`, `B`, ... in canonical order.
pub type Var = u32;

/// Variables sort before constants.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Var),
    Const(Symbol),
}

impl Term {
    pub fn constant(name: &str) -> Self {
        Term::Const(Symbol::new(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        }
    }
}

/// Renders a variable index the way the learned programs print it.
pub fn var_name(v: Var) -> String {
    if v < 26 {
        char::from(b'A' + v as u8).to_string()
    } else {
        format!("V{v}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(&var_name(*v)),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// A predicate symbol together with its arity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PredSig {
    pub name: Symbol,
    pub arity: usize,
}

impl PredSig {
    pub fn new(name: &str, arity: usize) -> Self {
        PredSig { name: Symbol::new(name), arity }
    }
}

impl fmt::Display for PredSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A positive atom `p(t1,...,tn)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Literal {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(pred: impl Into<Symbol>, args: Vec<Term>) -> Self {
        Literal { pred: pred.into(), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn sig(&self) -> PredSig {
        PredSig { name: self.pred.clone(), arity: self.args.len() }
    }

    pub fn same_pred(&self, other: &Literal) -> bool {
        self.pred == other.pred && self.args.len() == other.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.args.iter().filter_map(Term::as_var)
    }

    /// Ground atom from a predicate name and constant spellings.
    pub fn ground(pred: &str, args: &[&str]) -> Self {
        Literal::new(pred, args.iter().map(|a| Term::constant(a)).collect())
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pred
            .cmp(&other.pred)
            .then(self.args.len().cmp(&other.args.len()))
            .then_with(|| self.args.cmp(&other.args))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A substitution θ from variables to terms, applied simultaneously.
#[derive(Clone, Default, Debug, PartialEq, Eq)]
pub struct Substitution {
    bindings: std::collections::BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v/t`. Identity bindings are dropped.
    pub fn bind(&mut self, v: Var, t: Term) {
        if t == Term::Var(v) {
            self.bindings.remove(&v);
        } else {
            self.bindings.insert(v, t);
        }
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.bindings.get(&v)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
        }
    }

    pub fn apply(&self, lit: &Literal) -> Literal {
        Literal { pred: lit.pred.clone(), args: lit.args.iter().map(|t| self.apply_term(t)).collect() }
    }
}
