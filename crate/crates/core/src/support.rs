//! Supports, compatible transfer graphs and the infinite-population game.

use std::collections::{HashMap, VecDeque};

use crate::graph::{StateSet, TransferGraph};
use crate::nfa::Nfa;
use crate::Player;

/// Every edge `(q, r)` of `g` satisfies `r ∈ delta(q, a)`.
pub fn is_compatible(nfa: &Nfa, g: &TransferGraph, a: usize) -> bool {
    (0..g.order()).all(|q| g.row(q).is_subset(nfa.successors(q, a)))
}

pub fn maximal_graph(nfa: &Nfa, support: StateSet, a: usize) -> TransferGraph {
    let mut g = TransferGraph::empty(nfa.num_states());
    for q in support {
        g.set_row(q, nfa.successors(q, a));
    }
    g
}

pub fn post_support(nfa: &Nfa, support: StateSet, a: usize) -> StateSet {
    nfa.post(support, a)
}

/// Graphs with domain `support`, compatible with `a`.
pub fn compatible_graphs(nfa: &Nfa, support: StateSet, a: usize) -> CompatibleGraphs {
    let states: Vec<usize> = support.iter().collect();
    let masks: Vec<u64> = states
        .iter()
        .map(|&q| nfa.successors(q, a).bits())
        .collect();
    CompatibleGraphs {
        current: Some(masks.iter().map(|&m| m & m.wrapping_neg()).collect()),
        order: nfa.num_states(),
        states,
        masks,
    }
}

/// Number of graphs [`compatible_graphs`] yields, saturating.
pub fn compatible_count(nfa: &Nfa, support: StateSet, a: usize) -> u64 {
    support.iter().fold(1u64, |acc, q| {
        let k = nfa.successors(q, a).len() as u32;
        acc.saturating_mul(1u64.checked_shl(k).map_or(u64::MAX, |v| v - 1))
    })
}

/// Odometer over per-state nonempty submasks of `delta(q, a)`, each digit in
/// increasing numeric order, last state fastest. The final graph is the
/// maximal one.
#[derive(Debug, Clone)]
pub struct CompatibleGraphs {
    order: usize,
    states: Vec<usize>,
    masks: Vec<u64>,
    current: Option<Vec<u64>>,
}

impl Iterator for CompatibleGraphs {
    type Item = TransferGraph;

    fn next(&mut self) -> Option<TransferGraph> {
        let cur = self.current.as_mut()?;
        let mut g = TransferGraph::empty(self.order);
        for (&q, &row) in self.states.iter().zip(cur.iter()) {
            g.set_row(q, StateSet::from_bits(row));
        }
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            let d = self.masks[i];
            let next = (cur[i] | !d).wrapping_add(1) & d;
            if next != 0 {
                cur[i] = next;
                break;
            }
            cur[i] = d & d.wrapping_neg();
        }
        Some(g)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SupportWitness {
    /// Letters whose maximal-graph run from `{q0}` ends in `{f}`.
    Word(Vec<usize>),
    /// Supports reachable from `{q0}`; none of them is `{f}`.
    Safe(Vec<StateSet>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportGameResult {
    pub winner: Player,
    pub witness: SupportWitness,
}

/// Outcome of a breadth-first search of the deterministic support automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyncSearch {
    /// A shortest word moving every agent of the start support to the target.
    Word(Vec<usize>),
    /// No such word; the reachable supports in discovery order.
    Unreachable(Vec<StateSet>),
    /// More than the allowed number of supports were discovered.
    GaveUp,
}

/// Searches for a word taking `from` to the target support under maximal
/// graphs. Post is monotone, so the word also works for every subset.
pub fn sync_word(nfa: &Nfa, from: StateSet, max_supports: usize) -> SyncSearch {
    let goal = nfa.target_set();
    let mut parent: HashMap<StateSet, Option<(StateSet, usize)>> = HashMap::new();
    let mut order = vec![from];
    parent.insert(from, None);
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        if s == goal {
            let mut word = Vec::new();
            let mut cur = s;
            while let Some(&Some((prev, a))) = parent.get(&cur) {
                word.push(a);
                cur = prev;
            }
            word.reverse();
            return SyncSearch::Word(word);
        }
        for a in 0..nfa.num_actions() {
            let t = post_support(nfa, s, a);
            if !parent.contains_key(&t) {
                if parent.len() >= max_supports {
                    return SyncSearch::GaveUp;
                }
                parent.insert(t, Some((s, a)));
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    SyncSearch::Unreachable(order)
}

/// Player 2 loses nothing by always playing the maximal graph, so the game
/// reduces to reachability in the deterministic support automaton.
pub fn solve_support_game(nfa: &Nfa) -> SupportGameResult {
    match sync_word(nfa, StateSet::singleton(nfa.initial()), usize::MAX) {
        SyncSearch::Word(word) => SupportGameResult {
            winner: Player::One,
            witness: SupportWitness::Word(word),
        },
        SyncSearch::Unreachable(order) => SupportGameResult {
            winner: Player::Two,
            witness: SupportWitness::Safe(order),
        },
        SyncSearch::GaveUp => unreachable!("unbounded search"),
    }
}
