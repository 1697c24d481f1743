//! Interactive play: the synthesized controller is Player 1 and the user
//! resolves nondeterminism one split at a time.

use std::collections::BTreeMap;
use std::sync::Arc;

use popctl_core::popsim::{apply_split, validate_split, Config, SimError, Split};
use popctl_core::synth::{decide, ArenaOptions, Controller};
use popctl_core::{Nfa, Player};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Moves accepted per session before it is declared inconclusive.
pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error("{message}")]
    Invalid {
        state: Option<String>,
        message: String,
    },
    #[error("session is {0:?}; no further moves")]
    NotRunning(Status),
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("no controller: {0}")]
    NoController(String),
}

impl SessionError {
    fn invalid(state: Option<String>, message: impl Into<String>) -> Self {
        SessionError::Invalid {
            state,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Running,
    Won,
    Inconclusive,
}

/// Split as sent by clients: state name to successor name to count.
pub type NamedSplit = BTreeMap<String, BTreeMap<String, u64>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub id: String,
    pub m: u64,
    pub step: usize,
    pub status: Status,
    /// State names in automaton order.
    pub states: Vec<String>,
    pub target: String,
    pub counts: BTreeMap<String, u64>,
    pub proposed_action: Option<String>,
    /// Successors of every occupied state under the proposed action.
    pub legal_successors: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone)]
struct Played {
    config: Config,
    node: usize,
    action: usize,
    split: Split,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    nfa: Arc<Nfa>,
    m: u64,
    controller: Arc<Controller>,
    history: Vec<Played>,
    config: Config,
    node: usize,
    max_steps: usize,
}

/// Synthesizes the controller sessions on `nfa` play with.
pub fn controller_for(nfa: &Arc<Nfa>) -> Result<Controller, SessionError> {
    let d = decide(nfa, ArenaOptions::default())
        .map_err(|e| SessionError::NoController(e.to_string()))?;
    match (d.winner, d.controller) {
        (Player::One, Some(c)) => Ok(c),
        _ => Err(SessionError::NoController(
            "Player 2 wins for some population size".into(),
        )),
    }
}

impl Session {
    pub fn new(
        id: String,
        nfa: Arc<Nfa>,
        controller: Arc<Controller>,
        m: u64,
    ) -> Result<Self, SessionError> {
        let config =
            Config::initial(&nfa, m).map_err(|e| SessionError::invalid(None, e.to_string()))?;
        Ok(Session {
            id,
            node: controller.initial(),
            nfa,
            m,
            controller,
            history: Vec::new(),
            config,
            max_steps: DEFAULT_MAX_STEPS,
        })
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn nfa(&self) -> &Nfa {
        &self.nfa
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn step(&self) -> usize {
        self.history.len()
    }

    pub fn status(&self) -> Status {
        if self.config.is_final(&self.nfa) {
            Status::Won
        } else if self.history.len() >= self.max_steps {
            Status::Inconclusive
        } else {
            Status::Running
        }
    }

    pub fn proposed_action(&self) -> Option<usize> {
        match self.status() {
            Status::Running => self.controller.choose(self.node),
            _ => None,
        }
    }

    pub fn view(&self) -> SessionView {
        let nfa = &self.nfa;
        let name = |q: usize| nfa.state_name(q).to_string();
        let action = self.proposed_action();
        let legal_successors = match action {
            Some(a) => self
                .config
                .support()
                .iter()
                .map(|q| (name(q), nfa.successors(q, a).iter().map(name).collect()))
                .collect(),
            None => BTreeMap::new(),
        };
        SessionView {
            id: self.id.clone(),
            m: self.m,
            step: self.step(),
            status: self.status(),
            states: nfa.state_names().to_vec(),
            target: name(nfa.target()),
            counts: (0..nfa.num_states())
                .map(|q| (name(q), self.config.count(q)))
                .collect(),
            proposed_action: action.map(|a| nfa.action_name(a).to_string()),
            legal_successors,
        }
    }

    fn resolve(&self, split: &NamedSplit) -> Result<Split, SessionError> {
        let nfa = &self.nfa;
        let lookup = |s: &String| {
            nfa.state_index(s)
                .ok_or_else(|| SessionError::invalid(Some(s.clone()), format!("unknown state {s}")))
        };
        let mut out = Split::zero(nfa.num_states());
        for (from, row) in split {
            let q = lookup(from)?;
            for (to, &c) in row {
                out.add(q, lookup(to)?, c);
            }
        }
        Ok(out)
    }

    /// Applies the user's split for the proposed action and advances the
    /// controller.
    pub fn play(&mut self, split: &NamedSplit) -> Result<SessionView, SessionError> {
        let status = self.status();
        let Some(a) = self.proposed_action() else {
            return Err(SessionError::NotRunning(status));
        };
        let split = self.resolve(split)?;
        validate_split(&self.nfa, &self.config, a, &split).map_err(|e| {
            let state = match &e {
                SimError::Conservation { state, .. } | SimError::IllegalEdge { state, .. } => {
                    Some(state.clone())
                }
                _ => None,
            };
            SessionError::invalid(state, e.to_string())
        })?;
        let next = apply_split(&self.nfa, &self.config, a, &split)
            .map_err(|e| SessionError::invalid(None, e.to_string()))?;
        let node = self
            .controller
            .advance(self.node, &split.graph())
            .map_err(|e| SessionError::invalid(None, e.to_string()))?;
        let prev = std::mem::replace(&mut self.config, next);
        self.history.push(Played {
            config: prev,
            node: self.node,
            action: a,
            split,
        });
        self.node = node;
        Ok(self.view())
    }

    pub fn undo(&mut self) -> Result<SessionView, SessionError> {
        let last = self.history.pop().ok_or(SessionError::NothingToUndo)?;
        self.config = last.config;
        self.node = last.node;
        Ok(self.view())
    }

    /// Replays the history from the initial configuration; true iff it ends
    /// where the session is.
    pub fn replay_consistent(&self) -> bool {
        let Ok(mut cfg) = Config::initial(&self.nfa, self.m) else {
            return false;
        };
        let mut node = self.controller.initial();
        for p in &self.history {
            if p.config != cfg || p.node != node || self.controller.choose(node) != Some(p.action) {
                return false;
            }
            let Ok(next) = apply_split(&self.nfa, &cfg, p.action, &p.split) else {
                return false;
            };
            let Ok(n) = self.controller.advance(node, &p.split.graph()) else {
                return false;
            };
            cfg = next;
            node = n;
        }
        cfg == self.config && node == self.node
    }
}

/// Even split of the current configuration under the proposed action, as
/// the `Even` adversary would play it.
pub fn even_split(session: &Session) -> Option<NamedSplit> {
    let a = session.proposed_action()?;
    let nfa = session.nfa();
    let s = popctl_core::popsim::Adversary::Even
        .split(nfa, session.config(), a)
        .ok()?;
    let mut out = NamedSplit::new();
    for (q, r, c) in s.entries() {
        out.entry(nfa.state_name(q).to_string())
            .or_default()
            .insert(nfa.state_name(r).to_string(), c);
    }
    Some(out)
}
