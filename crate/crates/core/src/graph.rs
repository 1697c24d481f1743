//! Bit-pattern primitives shared by every layer: state sets, transfer graphs
//! (relations on states stored as one row mask per source state) and sets of
//! state pairs.

use std::fmt;

/// Upper bound on the number of NFA states; rows are single `u64` masks.
pub const MAX_STATES: usize = 64;

/// A set of state indices, one bit per state.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StateSet(u64);

impl StateSet {
    pub const EMPTY: StateSet = StateSet(0);

    pub fn from_bits(bits: u64) -> Self {
        StateSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(q: usize) -> Self {
        debug_assert!(q < MAX_STATES);
        StateSet(1 << q)
    }

    /// All states `0..n`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            StateSet(u64::MAX)
        } else {
            StateSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, q: usize) -> bool {
        q < MAX_STATES && self.0 >> q & 1 == 1
    }

    pub fn insert(&mut self, q: usize) {
        self.0 |= 1 << q;
    }

    pub fn remove(&mut self, q: usize) {
        self.0 &= !(1 << q);
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: StateSet) -> StateSet {
        StateSet(self.0 | other.0)
    }

    pub fn intersection(self, other: StateSet) -> StateSet {
        StateSet(self.0 & other.0)
    }

    pub fn difference(self, other: StateSet) -> StateSet {
        StateSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: StateSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: StateSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Lowest member, if any.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> StateSetIter {
        StateSetIter(self.0)
    }
}

impl FromIterator<usize> for StateSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = StateSet::EMPTY;
        for q in iter {
            s.insert(q);
        }
        s
    }
}

impl IntoIterator for StateSet {
    type Item = usize;
    type IntoIter = StateSetIter;

    fn into_iter(self) -> StateSetIter {
        self.iter()
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct StateSetIter(u64);

impl Iterator for StateSetIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let q = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(q)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for StateSetIter {}

/// A subset of `Q x Q`: row `q` holds the successors of `q`.
///
/// Domain and image are always derived from the rows, never stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransferGraph {
    rows: Box<[StateSet]>,
}

impl TransferGraph {
    pub fn empty(n: usize) -> Self {
        TransferGraph {
            rows: vec![StateSet::EMPTY; n].into_boxed_slice(),
        }
    }

    /// The identity relation restricted to `support`.
    pub fn identity(n: usize, support: StateSet) -> Self {
        let mut g = TransferGraph::empty(n);
        for q in support {
            g.rows[q] = StateSet::singleton(q);
        }
        g
    }

    pub fn from_rows(rows: Vec<StateSet>) -> Self {
        TransferGraph {
            rows: rows.into_boxed_slice(),
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = TransferGraph::empty(n);
        for (q, r) in edges {
            g.add_edge(q, r);
        }
        g
    }

    /// Number of states the relation ranges over.
    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, q: usize) -> StateSet {
        self.rows[q]
    }

    pub fn rows(&self) -> &[StateSet] {
        &self.rows
    }

    pub fn set_row(&mut self, q: usize, row: StateSet) {
        self.rows[q] = row;
    }

    pub fn add_edge(&mut self, q: usize, r: usize) {
        self.rows[q].insert(r);
    }

    pub fn has_edge(&self, q: usize, r: usize) -> bool {
        self.rows[q].contains(r)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn dom(&self) -> StateSet {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
            .map(|(q, _)| q)
            .collect()
    }

    pub fn im(&self) -> StateSet {
        self.rows
            .iter()
            .fold(StateSet::EMPTY, |acc, r| acc.union(*r))
    }

    /// Image of a set of states.
    pub fn image_of(&self, set: StateSet) -> StateSet {
        set.iter()
            .fold(StateSet::EMPTY, |acc, q| acc.union(self.rows[q]))
    }

    /// Edges in lexicographic `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(q, row)| row.iter().map(move |r| (q, r)))
    }

    /// Relational composition: `(a, b)` is an edge iff `a -> z` in `self`
    /// and `z -> b` in `other` for some `z`.
    pub fn compose(&self, other: &TransferGraph) -> TransferGraph {
        debug_assert_eq!(self.order(), other.order());
        let rows = self.rows.iter().map(|row| other.image_of(*row)).collect();
        TransferGraph::from_rows(rows)
    }

    /// True when every image state has exactly one predecessor.
    pub fn is_injective(&self) -> bool {
        let mut seen = StateSet::EMPTY;
        for row in self.rows.iter() {
            if seen.intersects(*row) {
                return false;
            }
            seen = seen.union(*row);
        }
        true
    }
}

impl fmt::Debug for TransferGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.edges()).finish()
    }
}

/// A set of ordered state pairs `(r, t)`, stored as rows indexed by `r`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PairSet {
    rows: Box<[StateSet]>,
}

impl PairSet {
    pub fn empty(n: usize) -> Self {
        PairSet {
            rows: vec![StateSet::EMPTY; n].into_boxed_slice(),
        }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut s = PairSet::empty(n);
        for (r, t) in pairs {
            s.insert(r, t);
        }
        s
    }

    pub fn insert(&mut self, r: usize, t: usize) {
        self.rows[r].insert(t);
    }

    pub fn contains(&self, r: usize, t: usize) -> bool {
        self.rows[r].contains(t)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn is_subset(&self, other: &PairSet) -> bool {
        self.rows
            .iter()
            .zip(other.rows.iter())
            .all(|(a, b)| a.is_subset(*b))
    }

    pub fn union_with(&mut self, other: &PairSet) {
        for (a, b) in self.rows.iter_mut().zip(other.rows.iter()) {
            *a = a.union(*b);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |t| (r, t)))
    }
}

impl fmt::Debug for PairSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
