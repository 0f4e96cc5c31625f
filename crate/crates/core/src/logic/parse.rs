//! A small reader for the Prolog-like clause syntax shared by all task files.
//!
//! Terms are atoms, numbers, quoted atoms, variables, flat or nested lists
//! (read as opaque constants), tuples `(a,b)` / `(a,)` and compounds.

use std::collections::HashMap;

use thiserror::Error;

use super::rule::{Hypothesis, Rule};
use super::term::{Literal, Symbol, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ast {
    Atom(String),
    Var(String),
    Num(String),
    Compound(String, Vec<Ast>),
    List(Vec<Ast>),
    Tuple(Vec<Ast>),
}

impl Ast {
    /// Spelling of a ground, function-free term (lists included).
    pub fn constant_text(&self) -> Option<String> {
        match self {
            Ast::Atom(s) | Ast::Num(s) => Some(s.clone()),
            Ast::List(items) => {
                let parts: Option<Vec<String>> = items.iter().map(Ast::constant_text).collect();
                Some(format!("[{}]", parts?.join(",")))
            }
            _ => None,
        }
    }

    pub fn functor(&self) -> Option<(&str, &[Ast])> {
        match self {
            Ast::Atom(s) => Some((s, &[])),
            Ast::Compound(s, args) => Some((s, args)),
            _ => None,
        }
    }
}

/// One clause as read from text, before conversion to a [`Rule`].
#[derive(Clone, Debug)]
pub struct Clause {
    pub head: Ast,
    pub body: Vec<Ast>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Atom(String),
    Var(String),
    Num(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Neck,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.char_indices().peekable(), src, line: 1 }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        while let Some(&(i, c)) = self.chars.peek() {
            match c {
                '\n' => {
                    self.line += 1;
                    self.chars.next();
                }
                c if c.is_whitespace() => {
                    self.chars.next();
                }
                '%' => {
                    while let Some(&(_, c)) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.chars.next();
                    }
                }
                '(' | ')' | '[' | ']' | ',' => {
                    self.chars.next();
                    let t = match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBrack,
                        ']' => Tok::RBrack,
                        _ => Tok::Comma,
                    };
                    out.push((t, self.line));
                }
                '.' => {
                    self.chars.next();
                    out.push((Tok::Dot, self.line));
                }
                ':' => {
                    self.chars.next();
                    match self.chars.next() {
                        Some((_, '-')) => out.push((Tok::Neck, self.line)),
                        _ => return Err(ParseError::new(self.line, "expected ':-'")),
                    }
                }
                '\'' => {
                    self.chars.next();
                    let start = i;
                    let mut end = None;
                    for (j, c) in self.chars.by_ref() {
                        if c == '\'' {
                            end = Some(j);
                            break;
                        }
                        if c == '\n' {
                            self.line += 1;
                        }
                    }
                    let end = end.ok_or_else(|| ParseError::new(self.line, "unterminated quoted atom"))?;
                    out.push((Tok::Atom(self.src[start..=end].to_string()), self.line));
                }
                c if c.is_ascii_digit() || c == '-' => {
                    let start = i;
                    self.chars.next();
                    let mut end = start + c.len_utf8();
                    if c == '-' && !matches!(self.chars.peek(), Some((_, d)) if d.is_ascii_digit()) {
                        return Err(ParseError::new(self.line, "unexpected '-'"));
                    }
                    while let Some(&(j, d)) = self.chars.peek() {
                        if d.is_ascii_digit() {
                            self.chars.next();
                            end = j + 1;
                        } else if d == '.' {
                            // a decimal point only when a digit follows
                            let rest = &self.src[j + 1..];
                            if rest.starts_with(|x: char| x.is_ascii_digit()) {
                                self.chars.next();
                                end = j + 1;
                            } else {
                                break;
                            }
                        } else {
                            break;
                        }
                    }
                    out.push((Tok::Num(self.src[start..end].to_string()), self.line));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    let mut end = i;
                    while let Some(&(j, d)) = self.chars.peek() {
                        if d.is_alphanumeric() || d == '_' {
                            end = j + d.len_utf8();
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    let word = self.src[start..end].to_string();
                    let tok = if c.is_uppercase() || c == '_' { Tok::Var(word) } else { Tok::Atom(word) };
                    out.push((tok, self.line));
                }
                other => return Err(ParseError::new(self.line, format!("unexpected character {other:?}"))),
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(1, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let line = self.line();
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(ParseError::new(line, format!("expected {what}, found {t:?}"))),
            None => Err(ParseError::new(line, format!("expected {what}, found end of input"))),
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let line = self.line();
        match self.next() {
            Some(Tok::Var(v)) => Ok(Ast::Var(v)),
            Some(Tok::Num(n)) => Ok(Ast::Num(n)),
            Some(Tok::Atom(a)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.next();
                    let args = self.seq(Tok::RParen)?;
                    Ok(Ast::Compound(a, args))
                } else {
                    Ok(Ast::Atom(a))
                }
            }
            Some(Tok::LBrack) => Ok(Ast::List(self.seq(Tok::RBrack)?)),
            Some(Tok::LParen) => Ok(Ast::Tuple(self.seq(Tok::RParen)?)),
            Some(t) => Err(ParseError::new(line, format!("unexpected token {t:?}"))),
            None => Err(ParseError::new(line, "unexpected end of input")),
        }
    }

    /// Comma separated terms up to `close`; a trailing comma is allowed.
    fn seq(&mut self, close: Tok) -> Result<Vec<Ast>, ParseError> {
        let mut items = Vec::new();
        if self.peek() == Some(&close) {
            self.next();
            return Ok(items);
        }
        loop {
            items.push(self.term()?);
            let line = self.line();
            match self.next() {
                Some(Tok::Comma) => {
                    if self.peek() == Some(&close) {
                        self.next();
                        return Ok(items);
                    }
                }
                Some(t) if t == close => return Ok(items),
                Some(t) => return Err(ParseError::new(line, format!("expected ',' or closing bracket, found {t:?}"))),
                None => return Err(ParseError::new(line, "unclosed bracket")),
            }
        }
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let line = self.line();
        let head = self.term()?;
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Neck) {
            self.next();
            loop {
                body.push(self.term()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot, "'.'")?;
        Ok(Clause { head, body, line })
    }
}

/// Reads every clause in `src`. `%` starts a comment.
pub fn read_clauses(src: &str) -> Result<Vec<Clause>, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.clause()?);
    }
    Ok(out)
}

/// Variable scope for one clause.
#[derive(Default)]
pub struct VarScope {
    names: HashMap<String, Var>,
    next: Var,
}

impl VarScope {
    fn var(&mut self, name: &str) -> Var {
        if name == "_" {
            self.next += 1;
            return self.next - 1;
        }
        if let Some(v) = self.names.get(name) {
            return *v;
        }
        let v = self.next;
        self.names.insert(name.to_string(), v);
        self.next += 1;
        v
    }
}

pub fn ast_to_term(ast: &Ast, scope: &mut VarScope, line: usize) -> Result<Term, ParseError> {
    match ast {
        Ast::Var(v) => Ok(Term::Var(scope.var(v))),
        other => other
            .constant_text()
            .map(|t| Term::Const(Symbol::from(t)))
            .ok_or_else(|| ParseError::new(line, "nested compound terms are not supported")),
    }
}

pub fn ast_to_literal(ast: &Ast, scope: &mut VarScope, line: usize) -> Result<Literal, ParseError> {
    let (name, args) = ast.functor().ok_or_else(|| ParseError::new(line, "expected an atom"))?;
    let args = args.iter().map(|a| ast_to_term(a, scope, line)).collect::<Result<Vec<_>, _>>()?;
    Ok(Literal::new(name, args))
}

pub fn clause_to_rule(c: &Clause) -> Result<Rule, ParseError> {
    let mut scope = VarScope::default();
    let head = ast_to_literal(&c.head, &mut scope, c.line)?;
    let body = c.body.iter().map(|b| ast_to_literal(b, &mut scope, c.line)).collect::<Result<Vec<_>, _>>()?;
    Ok(Rule::new(head, body))
}

/// Parses exactly one rule, e.g. `f(A):- head(A,7).`
pub fn parse_rule(src: &str) -> Result<Rule, ParseError> {
    let clauses = read_clauses(src)?;
    match clauses.as_slice() {
        [c] => clause_to_rule(c),
        _ => Err(ParseError::new(1, format!("expected one clause, found {}", clauses.len()))),
    }
}

pub fn parse_hypothesis(src: &str) -> Result<Hypothesis, ParseError> {
    let rules = read_clauses(src)?.iter().map(clause_to_rule).collect::<Result<Vec<_>, _>>()?;
    Ok(Hypothesis::new(rules))
}

/// Parses a single ground atom such as `f([1,3,5,7])`.
pub fn parse_atom(src: &str) -> Result<Literal, ParseError> {
    let r = parse_rule(&format!("{src}."))?;
    if !r.body().is_empty() || !r.head.is_ground() {
        return Err(ParseError::new(1, "expected a ground atom"));
    }
    Ok(r.head)
}
