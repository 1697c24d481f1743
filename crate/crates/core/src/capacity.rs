//! Separations, leaks and the tracking list, plus brute-force capacity
//! oracles on finite and ultimately periodic plays.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{PairSet, StateSet, TransferGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CapacityError {
    #[error("accumulator has {found} sets, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("accumulator set {index} is not contained in the support")]
    NotInSupport { index: usize },
    #[error("accumulator is not successor-closed at index {index}")]
    NotSuccessorClosed { index: usize },
    #[error("graphs do not chain at position {index}")]
    BrokenChain { index: usize },
    #[error("lasso cycle is empty")]
    EmptyCycle,
    #[error("graph is not a loop on the given support")]
    NotALoop,
}

/// Pairs `(r, t)` of image states told apart by `g`: some source reaches `r`
/// but not `t`.
pub fn separations(g: &TransferGraph) -> PairSet {
    let im = g.im();
    let mut sep = PairSet::empty(g.order());
    for row in g.rows() {
        if row.is_empty() {
            continue;
        }
        let missing = im.difference(*row);
        for r in *row {
            for t in missing {
                sep.insert(r, t);
            }
        }
    }
    sep
}

/// A witness `(q, x, y)` that `g` leaks at `h`: `(q, y) ∈ g·h`, `(x, y) ∈ h`
/// and `(q, x) ∉ g`. The lexicographically least `(q, x)` is reported with
/// the smallest `y`.
pub fn leaks_at(g: &TransferGraph, h: &TransferGraph) -> Option<(usize, usize, usize)> {
    for q in 0..g.order() {
        let row = g.row(q);
        if row.is_empty() {
            continue;
        }
        let reach = h.image_of(row);
        for x in 0..h.order() {
            if row.contains(x) {
                continue;
            }
            if let Some(y) = h.row(x).intersection(reach).first() {
                return Some((q, x, y));
            }
        }
    }
    None
}

/// Levels (1-based) at which an update leaked and first changed; `len + 1`
/// stands for "nowhere".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LevelEvents {
    pub leak_level: usize,
    pub change_level: usize,
}

/// Compositions `H_1, ..., H_l` of suffixes of the play with strictly
/// growing separation sets.
///
/// Cloning is cheap; the graphs are shared.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrackingList {
    graphs: Arc<[TransferGraph]>,
}

impl TrackingList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_graphs(graphs: Vec<TransferGraph>) -> Self {
        TrackingList {
            graphs: graphs.into(),
        }
    }

    pub fn graphs(&self) -> &[TransferGraph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Composes every entry with `g`, appends `g`, then keeps an entry only
    /// if it separates a pair no earlier entry separates.
    pub fn update(&self, g: &TransferGraph) -> (TrackingList, LevelEvents) {
        let len = self.graphs.len();
        let leak_level = self
            .graphs
            .iter()
            .position(|h| leaks_at(h, g).is_some())
            .map_or(len + 1, |r| r + 1);
        let composed: Vec<TransferGraph> = self.graphs.iter().map(|h| h.compose(g)).collect();
        let mut kept = Vec::with_capacity(len + 1);
        let mut seen = PairSet::empty(g.order());
        for cand in composed.iter().chain(std::iter::once(g)) {
            let sep = separations(cand);
            if !sep.is_subset(&seen) {
                seen.union_with(&sep);
                kept.push(cand.clone());
            }
        }
        let change_level = (0..len)
            .find(|&r| kept.get(r) != Some(&composed[r]))
            .map_or(len + 1, |r| r + 1);
        (
            TrackingList {
                graphs: kept.into(),
            },
            LevelEvents {
                leak_level,
                change_level,
            },
        )
    }
}

/// Compositions of every suffix of `history`, first index first:
/// `result[i] = G_{i+1} · ... · G_n`.
pub fn suffix_compositions(history: &[TransferGraph]) -> Vec<TransferGraph> {
    let mut out: Vec<TransferGraph> = Vec::with_capacity(history.len());
    for g in history.iter().rev() {
        let next = match out.last() {
            Some(acc) => g.compose(acc),
            None => g.clone(),
        };
        out.push(next);
    }
    out.reverse();
    out
}

/// The exact tracking list: suffix compositions at which the separation set
/// grows strictly.
pub fn exact_list(history: &[TransferGraph]) -> TrackingList {
    let mut kept = Vec::new();
    let Some(first) = history.first() else {
        return TrackingList::new();
    };
    let mut seen = PairSet::empty(first.order());
    for g in suffix_compositions(history) {
        let sep = separations(&g);
        if !sep.is_subset(&seen) {
            seen.union_with(&sep);
            kept.push(g);
        }
    }
    TrackingList::from_graphs(kept)
}

/// Counts entries into an accumulator: edges `(s, t)` of `G_{j+1}` with
/// `s ∉ T_j` and `t ∈ T_{j+1}`. `acc` has one more set than `play` has
/// graphs; set `j` must lie within the support before graph `j + 1` and be
/// closed under it.
pub fn count_entries(play: &[TransferGraph], acc: &[StateSet]) -> Result<usize, CapacityError> {
    if acc.len() != play.len() + 1 {
        return Err(CapacityError::LengthMismatch {
            expected: play.len() + 1,
            found: acc.len(),
        });
    }
    let mut entries = 0;
    for (j, g) in play.iter().enumerate() {
        let support = if j == 0 { g.dom() } else { play[j - 1].im() };
        if !acc[j].is_subset(support) {
            return Err(CapacityError::NotInSupport { index: j });
        }
        if !g.image_of(acc[j]).is_subset(acc[j + 1]) {
            return Err(CapacityError::NotSuccessorClosed { index: j });
        }
        for s in support.difference(acc[j]) {
            entries += g.row(s).intersection(acc[j + 1]).len();
        }
    }
    if let Some(last) = play.last() {
        if !acc[play.len()].is_subset(last.im()) {
            return Err(CapacityError::NotInSupport { index: play.len() });
        }
    }
    Ok(entries)
}

/// An ultimately periodic play `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoPlay {
    prefix: Vec<TransferGraph>,
    cycle: Vec<TransferGraph>,
}

impl LassoPlay {
    pub fn new(
        prefix: Vec<TransferGraph>,
        cycle: Vec<TransferGraph>,
    ) -> Result<Self, CapacityError> {
        if cycle.is_empty() {
            return Err(CapacityError::EmptyCycle);
        }
        let all: Vec<&TransferGraph> = prefix.iter().chain(cycle.iter()).collect();
        for i in 1..all.len() {
            if all[i - 1].im() != all[i].dom() {
                return Err(CapacityError::BrokenChain { index: i });
            }
        }
        if cycle.last().map(|g| g.im()) != cycle.first().map(|g| g.dom()) {
            return Err(CapacityError::BrokenChain { index: all.len() });
        }
        Ok(LassoPlay { prefix, cycle })
    }

    pub fn prefix(&self) -> &[TransferGraph] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[TransferGraph] {
        &self.cycle
    }

    /// Graph played at 0-based position `k`.
    pub fn graph(&self, k: usize) -> &TransferGraph {
        let p = self.prefix.len();
        if k < p {
            &self.prefix[k]
        } else {
            &self.cycle[(k - p) % self.cycle.len()]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CapacityVerdict {
    Finite,
    /// `composed` is the product of positions `start..step`; it leaks at the
    /// graph at position `step`, and this recurs forever.
    Infinite {
        start: usize,
        step: usize,
        composed: TransferGraph,
    },
}

impl CapacityVerdict {
    pub fn is_infinite(&self) -> bool {
        matches!(self, CapacityVerdict::Infinite { .. })
    }
}

/// Decides whether some start index has its composed graph leaking at the
/// next graph infinitely often. Starts `i` and `i + |cycle|` (past the
/// prefix) produce the same sequence, so one window of starts suffices; for
/// each start, the pair (composed graph, cycle position) eventually repeats.
pub fn lasso_capacity(play: &LassoPlay) -> CapacityVerdict {
    let p = play.prefix.len();
    let c = play.cycle.len();
    for start in 0..p + c {
        let mut cur = play.graph(start).clone();
        let mut j = start + 1;
        let mut seen: HashMap<(TransferGraph, usize), usize> = HashMap::new();
        let mut leaks: Vec<Option<usize>> = Vec::new();
        loop {
            if j >= p {
                let key = (cur.clone(), (j - p) % c);
                if let Some(&first) = seen.get(&key) {
                    if let Some(step) = leaks[first..].iter().flatten().next() {
                        let composed = (start + 1..*step)
                            .fold(play.graph(start).clone(), |acc, k| {
                                acc.compose(play.graph(k))
                            });
                        return CapacityVerdict::Infinite {
                            start,
                            step: *step,
                            composed,
                        };
                    }
                    break;
                }
                seen.insert(key, leaks.len());
            }
            let next = play.graph(j);
            leaks.push(leaks_at(&cur, next).map(|_| j));
            cur = cur.compose(next);
            j += 1;
        }
    }
    CapacityVerdict::Finite
}

/// For a loop `h` on `support`, finds `support = T ⊎ U` with `U` nonempty,
/// `h(U) ⊆ U` and some edge from `T` into `U`. Exhaustive over subsets.
pub fn loop_partition(
    h: &TransferGraph,
    support: StateSet,
) -> Result<Option<(StateSet, StateSet)>, CapacityError> {
    if h.dom() != support || h.im() != support {
        return Err(CapacityError::NotALoop);
    }
    let full = support.bits();
    let mut u = 0u64;
    loop {
        u = (u | !full).wrapping_add(1) & full;
        if u == 0 {
            return Ok(None);
        }
        let us = StateSet::from_bits(u);
        let ts = support.difference(us);
        if h.image_of(us).is_subset(us) && h.image_of(ts).intersects(us) {
            return Ok(Some((ts, us)));
        }
    }
}
