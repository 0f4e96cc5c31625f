//! Learn optimal definite programs from examples. Small non-separable
//! programs are generated and tested; the promising ones are then combined
//! by an exact lexicographic optimiser.

pub mod bias;
pub mod combiner;
pub mod datalog;
pub mod engine;
pub mod generator;
pub mod logic;
pub mod oracle;
pub mod task;

pub use bias::BiasSpec;
pub use datalog::{ExampleSet, KnowledgeBase};
pub use engine::{learn_baseline, learn_combo, LearnConfig, LearnResult, LearnStatus};
pub use logic::{Cost, Hypothesis, Literal, Rule, Symbol, Term};
pub use task::{load_task, Task};
