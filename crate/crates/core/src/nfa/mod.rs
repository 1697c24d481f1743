//! The agent template: a complete NFA with a distinguished target state.
//!
//! States and actions are identified by their declaration index; names are
//! kept for display and serialization only.

mod gadgets;
mod random;
mod text;

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{StateSet, MAX_STATES};

pub use gadgets::{generate, GadgetKind, GadgetSpec};
pub use random::random_complete;
pub use text::parse_nfa;

/// Name given to the state that absorbs unspecified transitions of parsed input.
pub const PARSE_SINK: &str = "_sink";
/// Winning sink introduced by gadgets and by [`Nfa::normalize_target_sink`].
pub const WIN_SINK: &str = "☺";
/// Losing sink introduced by gadgets and by [`Nfa::normalize_target_sink`].
pub const LOSE_SINK: &str = "☹";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NfaError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown state `{name}`")]
    UnknownState { line: usize, name: String },
    #[error("line {line}: unknown action `{name}`")]
    UnknownAction { line: usize, name: String },
    #[error("no target declared")]
    NoTarget,
    #[error("no initial state declared")]
    NoInitial,
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("no states declared")]
    NoStates,
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("too many states: {0} (at most {MAX_STATES} supported)")]
    TooManyStates(usize),
    #[error("gadget parameter {parameter} out of range for {kind}")]
    Parameter { kind: String, parameter: u32 },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Nfa {
    states: Vec<String>,
    actions: Vec<String>,
    initial: usize,
    target: usize,
    /// `delta[q * |actions| + a]`, never empty.
    delta: Vec<StateSet>,
}

impl std::fmt::Debug for Nfa {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl Nfa {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    pub fn action_name(&self, a: usize) -> &str {
        &self.actions[a]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|s| s == name)
    }

    pub fn all_states(&self) -> StateSet {
        StateSet::full(self.num_states())
    }

    /// `delta(q, a)`; nonempty by construction.
    pub fn successors(&self, q: usize, a: usize) -> StateSet {
        self.delta[q * self.actions.len() + a]
    }

    /// Union of `delta(q, a)` over `q` in `set`.
    pub fn post(&self, set: StateSet, a: usize) -> StateSet {
        set.iter()
            .fold(StateSet::EMPTY, |acc, q| acc.union(self.successors(q, a)))
    }

    pub fn is_sink(&self, q: usize) -> bool {
        (0..self.num_actions()).all(|a| self.successors(q, a) == StateSet::singleton(q))
    }

    pub fn target_set(&self) -> StateSet {
        StateSet::singleton(self.target)
    }

    /// States from which the target is reachable in the underlying graph.
    pub fn coreachable(&self) -> StateSet {
        let mut good = self.target_set();
        loop {
            let mut next = good;
            for q in 0..self.num_states() {
                if !next.contains(q)
                    && (0..self.num_actions()).any(|a| self.successors(q, a).intersects(good))
                {
                    next.insert(q);
                }
            }
            if next == good {
                return good;
            }
            good = next;
        }
    }

    /// States from which Player 1 cannot force even a single agent into the
    /// target, although he sees where it is. An agent in such a state can be
    /// kept away from the target forever, so any support meeting this set is
    /// lost for every population size.
    pub fn doomed(&self) -> StateSet {
        let mut good = self.target_set();
        loop {
            let mut next = good;
            for q in 0..self.num_states() {
                if !next.contains(q)
                    && (0..self.num_actions()).any(|a| self.successors(q, a).is_subset(good))
                {
                    next.insert(q);
                }
            }
            if next == good {
                return self.all_states().difference(good);
            }
            good = next;
        }
    }

    /// Makes the target a sink: if it is not one already, a fresh action moves
    /// the target to a new winning sink and every other state to a new losing
    /// sink; both sinks loop on every action.
    pub fn normalize_target_sink(&self) -> Nfa {
        if self.is_sink(self.target) {
            return self.clone();
        }
        let fresh = |base: &str, taken: &[String]| {
            let mut name = base.to_string();
            while taken.contains(&name) {
                name.push('\'');
            }
            name
        };
        let mut b = NfaBuilder::new();
        for s in &self.states {
            b.state(s);
        }
        let win = b.state(&fresh(WIN_SINK, &self.states));
        let lose = b.state(&fresh(LOSE_SINK, &self.states));
        for a in &self.actions {
            b.action(a);
        }
        let end = b.action(&fresh("end", &self.actions));
        for q in 0..self.num_states() {
            for a in 0..self.num_actions() {
                for r in self.successors(q, a) {
                    b.edge(q, a, r);
                }
            }
            b.edge(q, end, if q == self.target { win } else { lose });
        }
        for a in 0..=self.num_actions() {
            b.edge(win, a, win);
            b.edge(lose, a, lose);
        }
        b.initial(self.initial);
        b.target(win);
        b.build(None).expect("normalized automaton is complete")
    }
}

/// Incremental construction of an [`Nfa`]; `build` completes missing
/// transitions into a named sink when one is given.
#[derive(Debug, Default, Clone)]
pub struct NfaBuilder {
    states: Vec<String>,
    actions: Vec<String>,
    index: HashMap<String, usize>,
    action_index: HashMap<String, usize>,
    edges: Vec<(usize, usize, usize)>,
    initial: Option<usize>,
    target: Option<usize>,
}

impl NfaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a state (or returns the existing index for that name).
    pub fn state(&mut self, name: &str) -> usize {
        if let Some(&q) = self.index.get(name) {
            return q;
        }
        let q = self.states.len();
        self.states.push(name.to_string());
        self.index.insert(name.to_string(), q);
        q
    }

    pub fn action(&mut self, name: &str) -> usize {
        if let Some(&a) = self.action_index.get(name) {
            return a;
        }
        let a = self.actions.len();
        self.actions.push(name.to_string());
        self.action_index.insert(name.to_string(), a);
        a
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn action_id(&self, name: &str) -> Option<usize> {
        self.action_index.get(name).copied()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn edge(&mut self, q: usize, a: usize, r: usize) -> &mut Self {
        self.edges.push((q, a, r));
        self
    }

    pub fn initial(&mut self, q: usize) -> &mut Self {
        self.initial = Some(q);
        self
    }

    pub fn target(&mut self, q: usize) -> &mut Self {
        self.target = Some(q);
        self
    }

    /// Whether `(q, a)` already has an outgoing edge.
    pub fn has_transition(&self, q: usize, a: usize) -> bool {
        self.edges.iter().any(|&(p, b, _)| p == q && b == a)
    }

    /// Finalizes the automaton. Missing `(q, a)` pairs are routed to the sink
    /// named `sink`, which is added only if some pair is missing. Without a
    /// sink name, an incomplete automaton is a bug and panics.
    pub fn build(mut self, sink: Option<&str>) -> Result<Nfa, NfaError> {
        if self.states.is_empty() {
            return Err(NfaError::NoStates);
        }
        if self.actions.is_empty() {
            return Err(NfaError::EmptyAlphabet);
        }
        let initial = self.initial.ok_or(NfaError::NoInitial)?;
        let target = self.target.ok_or(NfaError::NoTarget)?;
        if self.states.len() > MAX_STATES {
            return Err(NfaError::TooManyStates(self.states.len()));
        }
        let na = self.actions.len();
        let mut delta = vec![StateSet::EMPTY; self.states.len() * na];
        for &(q, a, r) in &self.edges {
            delta[q * na + a].insert(r);
        }
        if delta.iter().any(|s| s.is_empty()) {
            let name = sink.expect("incomplete automaton without a sink name");
            let sink_q = match self.index.get(name) {
                Some(&q) => q,
                None => {
                    let q = self.states.len();
                    if q >= MAX_STATES {
                        return Err(NfaError::TooManyStates(q + 1));
                    }
                    self.states.push(name.to_string());
                    delta.extend(std::iter::repeat_n(StateSet::EMPTY, na));
                    q
                }
            };
            for s in delta.iter_mut() {
                if s.is_empty() {
                    *s = StateSet::singleton(sink_q);
                }
            }
        }
        Ok(Nfa {
            states: self.states,
            actions: self.actions,
            initial,
            target,
            delta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split() -> Nfa {
        generate(&GadgetSpec::new(GadgetKind::Split, 0)).unwrap()
    }

    #[test]
    fn split_successors_match_figure() {
        let nfa = split();
        let q0 = nfa.state_index("q0").unwrap();
        let q1 = nfa.state_index("q1").unwrap();
        let q2 = nfa.state_index("q2").unwrap();
        let f = nfa.state_index("f").unwrap();
        let delta = nfa.action_index("delta").unwrap();
        let a = nfa.action_index("a").unwrap();
        assert_eq!(
            nfa.successors(q0, delta),
            [q1, q2].into_iter().collect::<StateSet>()
        );
        assert_eq!(nfa.successors(f, a), StateSet::singleton(f));
        assert!(nfa.is_sink(f));
    }

    #[test]
    fn sink_state_loops_on_everything() {
        let nfa = parse_nfa("states: a b\ninit: a\ntarget: b\nalphabet: x y\na x b\n").unwrap();
        let sink = nfa.state_index(PARSE_SINK).unwrap();
        for act in 0..nfa.num_actions() {
            assert_eq!(nfa.successors(sink, act), StateSet::singleton(sink));
        }
    }

    #[test]
    fn normalize_keeps_sink_targets() {
        let nfa = split();
        assert_eq!(nfa.normalize_target_sink(), nfa);
    }

    #[test]
    fn normalize_adds_fresh_action_and_sinks() {
        let text = "states: q0 q1 f\ninit: q0\ntarget: f\nalphabet: a\nq0 a f\nq1 a q1\nf a q1\n";
        let nfa = parse_nfa(text).unwrap();
        assert!(!nfa.is_sink(nfa.target()));
        let norm = nfa.normalize_target_sink();
        assert_eq!(norm.num_actions(), nfa.num_actions() + 1);
        assert_eq!(norm.num_states(), nfa.num_states() + 2);
        let win = norm.state_index(WIN_SINK).unwrap();
        let lose = norm.state_index(LOSE_SINK).unwrap();
        assert_eq!(norm.target(), win);
        // every state is checked by scanning all actions
        for q in [win, lose] {
            assert!(norm.is_sink(q));
        }
        let end = norm.num_actions() - 1;
        let f = norm.state_index("f").unwrap();
        for q in 0..nfa.num_states() {
            let expect = if q == f { win } else { lose };
            assert_eq!(norm.successors(q, end), StateSet::singleton(expect));
        }
        // original transitions are untouched
        for q in 0..nfa.num_states() {
            assert_eq!(norm.successors(q, 0), nfa.successors(q, 0));
        }
        assert_eq!(norm.normalize_target_sink(), norm);
    }

    #[test]
    fn coreachable_excludes_losing_sink() {
        let nfa = generate(&GadgetSpec::new(GadgetKind::Linear, 3)).unwrap();
        let lose = nfa.state_index(LOSE_SINK).unwrap();
        let good = nfa.coreachable();
        assert!(!good.contains(lose));
        assert_eq!(good.len(), nfa.num_states() - 1);
    }
}
