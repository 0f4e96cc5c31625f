//! Terms, rules, hypotheses, canonical forms and θ-subsumption.

pub mod canon;
pub mod parse;
pub mod rule;
pub mod subsume;
pub mod term;

pub use canon::canonical_rule;
pub use parse::{parse_atom, parse_hypothesis, parse_rule, ParseError};
pub use rule::{is_separable, program_cost, Cost, Hypothesis, Rule};
pub use subsume::{subsumes_clause, subsumes_theory};
pub use term::{var_name, Literal, PredSig, Substitution, Symbol, Term, Var};
