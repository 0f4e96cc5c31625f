//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use nonsep_core::task::{load_task, Task};

/// Loads a task bundled under `tasks/` at the workspace root.
pub fn bundled_task(name: &str) -> Task {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../tasks").join(name);
    load_task(&dir).unwrap_or_else(|e| panic!("cannot load {name}: {e}"))
}
