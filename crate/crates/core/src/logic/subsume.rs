//! θ-subsumption between clauses and between clausal theories.

use super::rule::{Hypothesis, Rule};
use super::term::{Literal, Term, Var};

/// Partial map from variables of the subsuming clause to terms of the
/// subsumed one. Variables of the subsumed clause are treated as constants.
struct Matcher {
    binding: Vec<Option<Term>>,
    trail: Vec<Var>,
}

impl Matcher {
    fn new(vars: usize) -> Self {
        Matcher { binding: vec![None; vars], trail: Vec::new() }
    }

    fn mark(&self) -> usize {
        self.trail.len()
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.binding[v as usize] = None;
        }
    }

    fn unify_lit(&mut self, general: &Literal, specific: &Literal) -> bool {
        if !general.same_pred(specific) {
            return false;
        }
        let mark = self.mark();
        for (g, s) in general.args.iter().zip(&specific.args) {
            let ok = match g {
                Term::Const(_) => g == s,
                Term::Var(v) => match &self.binding[*v as usize] {
                    Some(t) => t == s,
                    None => {
                        self.binding[*v as usize] = Some(s.clone());
                        self.trail.push(*v);
                        true
                    }
                },
            };
            if !ok {
                self.undo(mark);
                return false;
            }
        }
        true
    }
}

fn max_var(rule: &Rule) -> usize {
    rule.head
        .vars()
        .chain(rule.body().iter().flat_map(|l| l.vars()))
        .max()
        .map_or(0, |v| v as usize + 1)
}

fn search(m: &mut Matcher, order: &[&Literal], target: &[Literal]) -> bool {
    let Some((first, rest)) = order.split_first() else {
        return true;
    };
    for cand in target {
        let mark = m.mark();
        if m.unify_lit(first, cand) {
            if search(m, rest, target) {
                return true;
            }
            m.undo(mark);
        }
    }
    false
}

/// `c1 ⪯ c2`: some θ maps the head of `c1` onto the head of `c2` and every
/// body literal of `c1` into the body of `c2`.
pub fn subsumes_clause(c1: &Rule, c2: &Rule) -> bool {
    let mut m = Matcher::new(max_var(c1));
    if !m.unify_lit(&c1.head, &c2.head) {
        return false;
    }
    // most constrained literal first: fewest candidates in c2
    let mut order: Vec<(usize, &Literal)> = Vec::with_capacity(c1.body().len());
    for lit in c1.body() {
        let n = c2.body().iter().filter(|l| l.same_pred(lit)).count();
        if n == 0 {
            return false;
        }
        order.push((n, lit));
    }
    order.sort_by_key(|(n, _)| *n);
    let order: Vec<&Literal> = order.into_iter().map(|(_, l)| l).collect();
    search(&mut m, &order, c2.body())
}

/// `h1 ⪯ h2`: every clause of `h2` is subsumed by some clause of `h1`.
pub fn subsumes_theory(h1: &Hypothesis, h2: &Hypothesis) -> bool {
    h2.rules().iter().all(|c2| h1.rules().iter().any(|c1| subsumes_clause(c1, c2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::{parse_hypothesis, parse_rule};

    fn sub(a: &str, b: &str) -> bool {
        subsumes_clause(&parse_rule(a).unwrap(), &parse_rule(b).unwrap())
    }

    #[test]
    fn reflexive() {
        assert!(sub("f(A):- tail(A,B),f(B).", "f(A):- tail(A,B),f(B)."));
    }

    #[test]
    fn adding_a_literal_specialises() {
        assert!(sub("f(A,B):- head(A,B).", "f(A,B):- head(A,B),even(B)."));
        assert!(!sub("f(A,B):- head(A,B),even(B).", "f(A,B):- head(A,B)."));
    }

    #[test]
    fn merging_literals_via_theta() {
        assert!(sub("p(X):- q(X,Y),q(X,Z).", "p(X):- q(X,Y)."));
    }

    #[test]
    fn constants_must_match() {
        assert!(!sub("f(A):- head(A,3).", "f(A):- head(A,2)."));
        assert!(sub("f(A):- head(A,B).", "f(A):- head(A,2)."));
        assert!(sub("f(A):- head(A,3).", "f(A):- head(A,3),tail(A,B),head(B,9)."));
    }

    #[test]
    fn head_must_map_to_head() {
        assert!(!sub("f(A,A):- e(A,A).", "f(A,B):- e(A,A)."));
        assert!(sub("f(A,B):- e(A,B).", "f(A,A):- e(A,A)."));
    }

    #[test]
    fn theory_generalisation_from_motivating_example() {
        let h4 = parse_hypothesis("f(A):- head(A,2). f(A):- tail(A,B),f(B).").unwrap();
        let h2 = parse_hypothesis("f(A):- head(A,2).").unwrap();
        assert!(subsumes_theory(&h4, &h2));
        assert!(!subsumes_theory(&h2, &h4));
        assert!(subsumes_theory(&h4, &h4));
    }
}
