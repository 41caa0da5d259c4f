//! Vertex subsets as bitsets. One `u64` word covers instances up to 64
//! vertices; larger instances spill into additional words.

use crate::Vertex;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet {
            n,
            words: vec![0; (n + 64) / 64],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 1..=n {
            s.insert(v);
        }
        s
    }

    /// Interpret the low `n` bits of `mask` as membership of vertices
    /// `1..=n`; only usable for `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64);
        let mut s = Self::empty(n);
        for v in 1..=n {
            if mask >> (v - 1) & 1 == 1 {
                s.insert(v);
            }
        }
        s
    }

    pub fn from_vertices(n: usize, vs: impl IntoIterator<Item = Vertex>) -> Self {
        let mut s = Self::empty(n);
        for v in vs {
            s.insert(v);
        }
        s
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, v: Vertex) -> bool {
        debug_assert!(v <= self.n);
        v != 0 && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn insert(&mut self, v: Vertex) {
        debug_assert!(v >= 1 && v <= self.n);
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: Vertex) {
        debug_assert!(v >= 1 && v <= self.n);
        self.words[v / 64] &= !(1 << (v % 64));
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Ascending iterator over members.
    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        (1..=self.n).filter(move |&v| self.contains(v))
    }
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
