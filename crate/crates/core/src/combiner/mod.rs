//! Combining promising programs: pick the rules whose programs cover the
//! most positives at the least total size.

mod asp;
mod pool;
mod solve;

pub use asp::emit_asp_encoding;
pub use pool::{PooledProgram, PromisingPool, RuleId};
pub use solve::{optimise, solve_combine, CombineResult, CombineStatus, Selection};
