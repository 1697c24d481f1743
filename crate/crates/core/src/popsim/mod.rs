//! m-population games under the counting abstraction: configurations,
//! splits, adversaries, simulation runs and exact small-m solving.

mod exact;

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{StateSet, TransferGraph};
use crate::nfa::Nfa;
use crate::synth::{ControllerCursor, ControllerError};

pub use exact::{
    exact_winner, exhaustive_verify, find_cutoff, CutoffError, CutoffResult, ExactBudget,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("split for state {state} moves {found} agents, expected {expected}")]
    Conservation {
        state: String,
        expected: u64,
        found: u64,
    },
    #[error("split moves agents from {state} to {successor}, which is not a successor")]
    IllegalEdge { state: String, successor: String },
    #[error("split has wrong dimensions")]
    Shape,
    #[error("scripted adversary ran out of splits")]
    ScriptExhausted,
    #[error("population must have at least one agent")]
    EmptyPopulation,
    #[error("resource budget exceeded after {explored} configurations")]
    Budget { explored: usize },
    #[error(transparent)]
    Controller(#[from] ControllerError),
}

/// Number of agents per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    counts: Vec<u64>,
}

impl Config {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self, SimError> {
        if counts.iter().sum::<u64>() == 0 {
            return Err(SimError::EmptyPopulation);
        }
        Ok(Config { counts })
    }

    /// All `m` agents in the initial state.
    pub fn initial(nfa: &Nfa, m: u64) -> Result<Self, SimError> {
        let mut counts = vec![0; nfa.num_states()];
        counts[nfa.initial()] = m;
        Config::from_counts(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, q: usize) -> u64 {
        self.counts[q]
    }

    pub fn m(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn support(&self) -> StateSet {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(q, _)| q)
            .collect()
    }

    /// Every agent is in the target.
    pub fn is_final(&self, nfa: &Nfa) -> bool {
        self.support() == nfa.target_set()
    }

    pub fn render(&self, nfa: &Nfa) -> String {
        let parts: Vec<String> = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(q, c)| format!("{}:{c}", nfa.state_name(q)))
            .collect();
        parts.join(",")
    }
}

/// How many agents move along each edge in one step; `flow[q][r]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Split {
    n: usize,
    flow: Vec<u64>,
}

impl Split {
    pub fn zero(n: usize) -> Self {
        Split {
            n,
            flow: vec![0; n * n],
        }
    }

    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize, u64)>) -> Self {
        let mut s = Split::zero(n);
        for (q, r, c) in entries {
            s.add(q, r, c);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, q: usize, r: usize) -> u64 {
        self.flow[q * self.n + r]
    }

    pub fn set(&mut self, q: usize, r: usize, c: u64) {
        self.flow[q * self.n + r] = c;
    }

    pub fn add(&mut self, q: usize, r: usize, c: u64) {
        self.flow[q * self.n + r] += c;
    }

    pub fn outflow(&self, q: usize) -> u64 {
        self.flow[q * self.n..(q + 1) * self.n].iter().sum()
    }

    /// Nonzero entries `(q, r, count)` in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.flow
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (i / self.n, i % self.n, c))
    }

    /// Edges carrying at least one agent.
    pub fn graph(&self) -> TransferGraph {
        TransferGraph::from_edges(self.n, self.entries().map(|(q, r, _)| (q, r)))
    }

    pub fn render(&self, nfa: &Nfa) -> String {
        let parts: Vec<String> = self
            .entries()
            .map(|(q, r, c)| format!("{}->{}:{c}", nfa.state_name(q), nfa.state_name(r)))
            .collect();
        parts.join(",")
    }
}

/// Checks conservation and legality of `split` for `cfg` under `a`.
pub fn validate_split(nfa: &Nfa, cfg: &Config, a: usize, split: &Split) -> Result<(), SimError> {
    let n = nfa.num_states();
    if split.order() != n || cfg.counts.len() != n {
        return Err(SimError::Shape);
    }
    for q in 0..n {
        let out = split.outflow(q);
        if out != cfg.counts[q] {
            return Err(SimError::Conservation {
                state: nfa.state_name(q).to_string(),
                expected: cfg.counts[q],
                found: out,
            });
        }
        let succ = nfa.successors(q, a);
        for r in 0..n {
            if split.get(q, r) > 0 && !succ.contains(r) {
                return Err(SimError::IllegalEdge {
                    state: nfa.state_name(q).to_string(),
                    successor: nfa.state_name(r).to_string(),
                });
            }
        }
    }
    Ok(())
}

pub fn apply_split(nfa: &Nfa, cfg: &Config, a: usize, split: &Split) -> Result<Config, SimError> {
    validate_split(nfa, cfg, a, split)?;
    let n = nfa.num_states();
    let mut counts = vec![0; n];
    for (_, r, c) in split.entries() {
        counts[r] += c;
    }
    Ok(Config { counts })
}

/// Support before, transfer graph, support after.
pub fn project(
    nfa: &Nfa,
    cfg: &Config,
    a: usize,
    split: &Split,
) -> Result<(StateSet, TransferGraph, StateSet), SimError> {
    let next = apply_split(nfa, cfg, a, split)?;
    Ok((cfg.support(), split.graph(), next.support()))
}

/// Resolves nondeterminism for Player 2.
#[derive(Debug, Clone)]
pub enum Adversary {
    /// As even as possible per state; remainders go to the lowest-index
    /// successors.
    Even,
    /// One agent to the second successor whenever a state with several
    /// agents has several successors; the rest to the first.
    OneOff,
    /// Uniform over the compositions of each count.
    Random(Box<ChaCha8Rng>),
    Scripted(VecDeque<Split>),
}

impl Adversary {
    pub fn random(seed: u64) -> Self {
        Adversary::Random(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    pub fn split(&mut self, nfa: &Nfa, cfg: &Config, a: usize) -> Result<Split, SimError> {
        let n = nfa.num_states();
        let mut s = Split::zero(n);
        match self {
            Adversary::Scripted(script) => {
                return script.pop_front().ok_or(SimError::ScriptExhausted)
            }
            Adversary::Even => {
                for q in cfg.support() {
                    let succ: Vec<usize> = nfa.successors(q, a).iter().collect();
                    let c = cfg.count(q);
                    let k = succ.len() as u64;
                    for (i, &r) in succ.iter().enumerate() {
                        let extra = u64::from((i as u64) < c % k);
                        s.add(q, r, c / k + extra);
                    }
                }
            }
            Adversary::OneOff => {
                for q in cfg.support() {
                    let succ: Vec<usize> = nfa.successors(q, a).iter().collect();
                    let c = cfg.count(q);
                    if succ.len() > 1 && c > 1 {
                        s.add(q, succ[1], 1);
                        s.add(q, succ[0], c - 1);
                    } else {
                        s.add(q, succ[0], c);
                    }
                }
            }
            Adversary::Random(rng) => {
                for q in cfg.support() {
                    let succ: Vec<usize> = nfa.successors(q, a).iter().collect();
                    let c = cfg.count(q) as usize;
                    let k = succ.len();
                    // stars and bars: k - 1 bars among c + k - 1 slots
                    let mut bars: Vec<usize> =
                        rand::seq::index::sample(rng.as_mut(), c + k - 1, k - 1).into_vec();
                    bars.sort_unstable();
                    let mut prev = 0;
                    for (i, &r) in succ.iter().enumerate() {
                        let end = bars.get(i).copied().unwrap_or(c + k - 1);
                        s.add(q, r, (end - prev) as u64);
                        prev = end + 1;
                    }
                }
            }
        }
        Ok(s)
    }
}

/// Player 1 in a simulation.
pub trait Strategy {
    fn action(&mut self, nfa: &Nfa, cfg: &Config) -> usize;

    /// Called after the chosen action moved the population along `split`.
    fn observe(&mut self, _graph: &TransferGraph) -> Result<(), SimError> {
        Ok(())
    }
}

impl Strategy for ControllerCursor<'_> {
    fn action(&mut self, _nfa: &Nfa, _cfg: &Config) -> usize {
        ControllerCursor::action(self)
    }

    fn observe(&mut self, graph: &TransferGraph) -> Result<(), SimError> {
        ControllerCursor::observe(self, graph).map_err(SimError::from)
    }
}

/// Hand-written strategy for the try/keep timing automaton: `try` while
/// agents wait in `q0`, `keep` while both branches are occupied, `top` or
/// `bot` when a single branch is, and `restart` once only `k` remains.
#[derive(Debug, Clone)]
pub struct ScriptedTime {
    q0: usize,
    top: usize,
    bot: usize,
    k: usize,
    act: [usize; 5],
}

impl ScriptedTime {
    /// `None` unless `nfa` has the timing automaton's state and action names.
    pub fn new(nfa: &Nfa) -> Option<Self> {
        let s = |n: &str| nfa.state_index(n);
        let a = |n: &str| nfa.action_index(n);
        Some(ScriptedTime {
            q0: s("q0")?,
            top: s("qtop")?,
            bot: s("qbot")?,
            k: s("k")?,
            act: [a("try")?, a("keep")?, a("top")?, a("bot")?, a("restart")?],
        })
    }
}

impl Strategy for ScriptedTime {
    fn action(&mut self, _nfa: &Nfa, cfg: &Config) -> usize {
        let [try_, keep, top, bot, restart] = self.act;
        let (t, b) = (cfg.count(self.top) > 0, cfg.count(self.bot) > 0);
        match (t, b) {
            (true, true) => keep,
            (true, false) => top,
            (false, true) => bot,
            (false, false) if cfg.count(self.q0) > 0 => try_,
            _ if cfg.count(self.k) > 0 => restart,
            _ => try_,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Won,
    /// Some agent sits in a state from which Player 2 can keep it away from
    /// the target forever.
    Lost,
    /// Step budget exhausted.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub action: usize,
    pub split: Split,
    pub config: Config,
}

impl TraceStep {
    /// `step k: action=<a> split=<q->r:count,...> config=<q:count,...>`
    pub fn render(&self, nfa: &Nfa, k: usize) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "step {k}: action={} split={} config={}",
            nfa.action_name(self.action),
            self.split.render(nfa),
            self.config.render(nfa)
        );
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub steps: usize,
    pub final_config: Config,
    pub trace: Option<Vec<TraceStep>>,
}

impl RunOutcome {
    pub fn won(&self) -> bool {
        self.status == RunStatus::Won
    }

    pub fn render_trace(&self, nfa: &Nfa) -> String {
        let mut out = String::new();
        for (k, step) in self.trace.iter().flatten().enumerate() {
            out.push_str(&step.render(nfa, k + 1));
            out.push('\n');
        }
        out
    }
}

/// Plays `strategy` against `adversary` from `m` agents in the initial
/// state for at most `budget` steps.
pub fn run(
    nfa: &Nfa,
    strategy: &mut dyn Strategy,
    m: u64,
    adversary: &mut Adversary,
    budget: usize,
    record_trace: bool,
) -> Result<RunOutcome, SimError> {
    let doomed = nfa.doomed();
    let mut cfg = Config::initial(nfa, m)?;
    let mut trace = record_trace.then(Vec::new);
    let mut steps = 0;
    let status = loop {
        if cfg.is_final(nfa) {
            break RunStatus::Won;
        }
        if cfg.support().intersects(doomed) {
            break RunStatus::Lost;
        }
        if steps == budget {
            break RunStatus::Inconclusive;
        }
        let a = strategy.action(nfa, &cfg);
        let split = adversary.split(nfa, &cfg, a)?;
        let next = apply_split(nfa, &cfg, a, &split)?;
        strategy.observe(&split.graph())?;
        steps += 1;
        if let Some(t) = trace.as_mut() {
            t.push(TraceStep {
                action: a,
                split,
                config: next.clone(),
            });
        }
        cfg = next;
    };
    Ok(RunOutcome {
        status,
        steps,
        final_config: cfg,
        trace,
    })
}

/// Calls `f` on every legal split of `cfg` under `a`.
pub fn for_each_split(nfa: &Nfa, cfg: &Config, a: usize, mut f: impl FnMut(&Split)) {
    let n = nfa.num_states();
    let occupied: Vec<(usize, Vec<usize>)> = cfg
        .support()
        .iter()
        .map(|q| (q, nfa.successors(q, a).iter().collect()))
        .collect();
    let mut split = Split::zero(n);
    fn rec(
        occ: &[(usize, Vec<usize>)],
        cfg: &Config,
        i: usize,
        j: usize,
        left: u64,
        split: &mut Split,
        f: &mut dyn FnMut(&Split),
    ) {
        if i == occ.len() {
            f(split);
            return;
        }
        let (q, succ) = &occ[i];
        if j + 1 == succ.len() {
            split.set(*q, succ[j], left);
            let next_left = occ.get(i + 1).map_or(0, |(q2, _)| cfg.count(*q2));
            rec(occ, cfg, i + 1, 0, next_left, split, f);
            split.set(*q, succ[j], 0);
            return;
        }
        for c in (0..=left).rev() {
            split.set(*q, succ[j], c);
            rec(occ, cfg, i, j + 1, left - c, split, f);
        }
        split.set(*q, succ[j], 0);
    }
    let first = occupied.first().map_or(0, |(q, _)| cfg.count(*q));
    rec(&occupied, cfg, 0, 0, first, &mut split, &mut f);
}
