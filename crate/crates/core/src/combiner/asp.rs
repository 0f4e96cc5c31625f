//! Text encoding of a combine problem for an external answer set solver.

use std::fmt::Write;

use super::pool::PromisingPool;

/// The combine problem as ASP text. Programs appear in pool order; a
/// bound `b` admits only selections of total size below `b`.
pub fn emit_asp_encoding(pool: &PromisingPool, bound: Option<usize>) -> String {
    let mut out = String::new();
    for i in 1..=pool.num_pos() {
        writeln!(out, "example({i}).").unwrap();
    }
    for p in pool.programs() {
        for id in &p.new_rule_ids {
            writeln!(out, "size({id},{}).", pool.rule_size(*id)).unwrap();
        }
        let body = p.rule_ids.iter().map(|id| format!("rule({id})")).collect::<Vec<_>>().join(", ");
        for e in p.coverage.ones() {
            writeln!(out, "covered({}) :- {body}.", e + 1).unwrap();
        }
    }
    out.push_str("{rule(R)}:-size(R,_).\n");
    out.push_str(":~ example(E), not covered(E). [1@2, (E,)]\n");
    out.push_str(":~ rule(R),size(R,K). [K@1, (R,)]\n");
    for b in pool.blocked() {
        let body = b.iter().map(|id| format!("rule({id})")).collect::<Vec<_>>().join(", ");
        writeln!(out, ":- {body}.").unwrap();
    }
    if let Some(b) = bound {
        writeln!(out, ":- #sum{{K,R : rule(R), size(R,K)}} >= {b}.").unwrap();
    }
    out
}
