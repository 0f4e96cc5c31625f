//! Interned tuples with per-column hash indexes.

use rustc_hash::{FxHashMap, FxHashSet};

pub type Tuple = Box<[u32]>;

#[derive(Clone, Debug, Default)]
pub struct Relation {
    arity: usize,
    tuples: Vec<Tuple>,
    set: FxHashSet<Tuple>,
    index: Vec<FxHashMap<u32, Vec<u32>>>,
}

impl Relation {
    pub fn new(arity: usize) -> Self {
        Relation { arity, tuples: Vec::new(), set: FxHashSet::default(), index: vec![FxHashMap::default(); arity] }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[u32]) -> bool {
        self.set.contains(t)
    }

    /// Returns false when the tuple was already present.
    pub fn insert(&mut self, t: &[u32]) -> bool {
        debug_assert_eq!(t.len(), self.arity);
        if self.set.contains(t) {
            return false;
        }
        let id = self.tuples.len() as u32;
        for (col, v) in t.iter().enumerate() {
            self.index[col].entry(*v).or_default().push(id);
        }
        let t: Tuple = t.into();
        self.set.insert(t.clone());
        self.tuples.push(t);
        true
    }

    pub fn tuple(&self, id: u32) -> &[u32] {
        &self.tuples[id as usize]
    }

    pub fn tuples(&self) -> impl Iterator<Item = &[u32]> {
        self.tuples.iter().map(|t| &t[..])
    }

    /// IDs of tuples whose column `col` equals `v`.
    pub fn lookup(&self, col: usize, v: u32) -> &[u32] {
        self.index.get(col).and_then(|ix| ix.get(&v)).map_or(&[], |ids| ids.as_slice())
    }
}
