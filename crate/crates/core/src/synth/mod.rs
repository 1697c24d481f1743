//! The parity game over (support, tracking list) positions, its solution and
//! controller extraction.

mod controller;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::capacity::{LevelEvents, TrackingList};
use crate::graph::StateSet;
use crate::nfa::Nfa;
use crate::parity::EdgeParityGame;
use crate::support::{compatible_graphs, sync_word, SyncSearch};
use crate::Player;

pub use controller::{Controller, ControllerCursor, ControllerError, ControllerNode};

pub const DEFAULT_NODE_BUDGET: usize = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArenaError {
    #[error("node budget exceeded after {nodes} nodes")]
    Budget { nodes: usize },
}

/// Priority of a Player 2 move. Reaching the target support gives 1;
/// otherwise `min(2 * leak + 1, 2 * change)`.
pub fn transition_priority(
    goal_bit: bool,
    next: StateSet,
    target: StateSet,
    events: LevelEvents,
) -> u32 {
    if goal_bit || next == target {
        return 1;
    }
    (2 * events.leak_level + 1).min(2 * events.change_level) as u32
}

/// Largest priority that can occur for `n` states; also the neutral
/// priority of the node-priority encoding.
pub fn max_priority(n: usize) -> u32 {
    (2 * n * n + 2) as u32
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArenaNode {
    /// Player 1 picks an action.
    Choice {
        support: StateSet,
        list: TrackingList,
    },
    /// Player 2 picks a transfer graph for `action` from `parent`'s support.
    Response { parent: usize, action: usize },
    /// Target reached; absorbing, priority 1.
    Win,
    /// Some agent can be kept from the target forever; absorbing, priority 2.
    Doomed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArenaOptions {
    pub node_budget: usize,
    /// Collapse positions whose support meets `Nfa::doomed` into one losing
    /// node.
    pub prune_doomed: bool,
    /// At positions whose support has a synchronizing word into the target,
    /// offer only the first letter of a shortest such word. That letter
    /// alone wins from there, so no winner changes.
    pub sync_shortcut: bool,
}

impl Default for ArenaOptions {
    fn default() -> Self {
        ArenaOptions {
            node_budget: DEFAULT_NODE_BUDGET,
            prune_doomed: true,
            sync_shortcut: true,
        }
    }
}

/// Supports explored per synchronizing-word search before giving up.
const SYNC_SEARCH_LIMIT: usize = 4096;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArenaStats {
    pub choice_nodes: usize,
    pub response_nodes: usize,
    pub edges: usize,
    pub priorities: BTreeMap<u32, usize>,
}

impl ArenaStats {
    pub fn nodes(&self) -> usize {
        self.choice_nodes + self.response_nodes + 2
    }
}

#[derive(Debug, Clone)]
pub struct ParityArena {
    pub nodes: Vec<ArenaNode>,
    pub game: EdgeParityGame,
    pub initial: usize,
    pub win: usize,
    pub doomed: usize,
    /// Per choice node, `(action, response node)` parallel to its edges.
    responses: HashMap<usize, Vec<(usize, usize)>>,
    index: HashMap<(StateSet, TrackingList), usize>,
}

impl ParityArena {
    pub fn response(&self, choice: usize, action: usize) -> Option<usize> {
        self.responses
            .get(&choice)?
            .iter()
            .find(|&&(a, _)| a == action)
            .map(|&(_, r)| r)
    }

    /// Action played by edge `edge` of choice node `choice`.
    pub fn edge_action(&self, choice: usize, edge: usize) -> usize {
        self.responses[&choice][edge].0
    }

    pub fn choice_index(&self, support: StateSet, list: &TrackingList) -> Option<usize> {
        self.index.get(&(support, list.clone())).copied()
    }

    pub fn stats(&self) -> ArenaStats {
        let mut stats = ArenaStats::default();
        for (v, node) in self.nodes.iter().enumerate() {
            match node {
                ArenaNode::Choice { .. } => stats.choice_nodes += 1,
                ArenaNode::Response { .. } => stats.response_nodes += 1,
                _ => {}
            }
            for &(p, _) in self.game.edges(v) {
                stats.edges += 1;
                *stats.priorities.entry(p).or_default() += 1;
            }
        }
        stats
    }
}

/// Breadth-first construction from `({q0}, [])`.
pub fn build_arena(nfa: &Nfa, options: ArenaOptions) -> Result<ParityArena, ArenaError> {
    let n = nfa.num_states();
    let target = nfa.target_set();
    let hopeless = if options.prune_doomed {
        nfa.doomed()
    } else {
        StateSet::EMPTY
    };
    let mut game = EdgeParityGame::new(max_priority(n));
    let mut nodes = Vec::new();
    let win = game.add_node(Player::One);
    nodes.push(ArenaNode::Win);
    game.add_edge(win, 1, win);
    let doomed = game.add_node(Player::Two);
    nodes.push(ArenaNode::Doomed);
    game.add_edge(doomed, 2, doomed);

    let mut index: HashMap<(StateSet, TrackingList), usize> = HashMap::new();
    let mut responses: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    let mut sync_first: HashMap<StateSet, Option<usize>> = HashMap::new();

    let check = |count: usize| {
        if count > options.node_budget {
            Err(ArenaError::Budget { nodes: count })
        } else {
            Ok(())
        }
    };

    let start = StateSet::singleton(nfa.initial());
    let initial = if start == target {
        win
    } else if start.intersects(hopeless) {
        doomed
    } else {
        let v = game.add_node(Player::One);
        nodes.push(ArenaNode::Choice {
            support: start,
            list: TrackingList::new(),
        });
        index.insert((start, TrackingList::new()), v);
        queue.push_back(v);
        v
    };

    while let Some(v) = queue.pop_front() {
        let ArenaNode::Choice { support, list } = nodes[v].clone() else {
            unreachable!()
        };
        let shortcut = options
            .sync_shortcut
            .then(|| {
                *sync_first.entry(support).or_insert_with(|| {
                    match sync_word(nfa, support, SYNC_SEARCH_LIMIT) {
                        SyncSearch::Word(w) => w.first().copied(),
                        _ => None,
                    }
                })
            })
            .flatten();
        let actions: Vec<usize> = match shortcut {
            Some(a) => vec![a],
            None => (0..nfa.num_actions()).collect(),
        };
        let mut resp = Vec::with_capacity(actions.len());
        for a in actions {
            check(nodes.len() + 1)?;
            let r = game.add_node(Player::Two);
            nodes.push(ArenaNode::Response {
                parent: v,
                action: a,
            });
            game.add_edge(v, max_priority(n), r);
            resp.push((a, r));

            if nfa.post(support, a).intersects(hopeless) {
                game.add_edge(r, 2, doomed);
                continue;
            }
            let mut seen: HashSet<(u32, usize)> = HashSet::new();
            for g in compatible_graphs(nfa, support, a) {
                let next = g.im();
                let (prio, to) = if next == target {
                    (1, win)
                } else {
                    let (list2, events) = list.update(&g);
                    let prio = transition_priority(false, next, target, events);
                    let key = (next, list2);
                    let to = match index.get(&key) {
                        Some(&t) => t,
                        None => {
                            check(nodes.len() + 1)?;
                            let t = game.add_node(Player::One);
                            nodes.push(ArenaNode::Choice {
                                support: key.0,
                                list: key.1.clone(),
                            });
                            index.insert(key, t);
                            queue.push_back(t);
                            t
                        }
                    };
                    (prio, to)
                };
                if seen.insert((prio, to)) {
                    game.add_edge(r, prio, to);
                }
            }
        }
        responses.insert(v, resp);
    }
    Ok(ParityArena {
        nodes,
        game,
        initial,
        win,
        doomed,
        responses,
        index,
    })
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub winner: Player,
    pub controller: Option<Controller>,
    pub stats: ArenaStats,
}

/// Solves the population control problem for `nfa`: Player 1 wins iff one
/// controller gathers every finite population in the target.
pub fn decide(nfa: &Arc<Nfa>, options: ArenaOptions) -> Result<Decision, ArenaError> {
    let arena = build_arena(nfa, options)?;
    let mut solution = arena.game.solve();
    let winner = solution.winner[arena.initial];
    if winner == Player::One {
        refine(
            nfa,
            &arena,
            &solution.winner,
            &mut solution.choice,
            REFINE_WORK,
        );
    }
    let controller = (winner == Player::One)
        .then(|| Controller::extract(Arc::clone(nfa), &arena, &solution.choice));
    Ok(Decision {
        winner,
        controller,
        stats: arena.stats(),
    })
}

/// Edge visits spent on strategy refinement before giving up on it.
const REFINE_WORK: usize = 20_000_000;

/// Rewrites Player 1's choices towards actions that finish or at least move
/// the support. A switch is kept only if it closes no cycle with an even
/// least priority, so the strategy stays winning on Player 1's region.
fn refine(
    nfa: &Nfa,
    arena: &ParityArena,
    winner: &[Player],
    choice: &mut [Option<usize>],
    mut work: usize,
) {
    let game = &arena.game;
    let n = game.len();
    let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut evens: Vec<u32> = Vec::new();
    for v in 0..n {
        for (i, &(p, t)) in game.edges(v).iter().enumerate() {
            preds[t].push((v, i));
            if p % 2 == 0 {
                evens.push(p);
            }
        }
    }
    evens.sort_unstable();
    evens.dedup();
    let target = nfa.target_set();

    let mut visited = vec![false; n];
    let mut queue = std::collections::VecDeque::from([arena.initial]);
    visited[arena.initial] = true;
    while let Some(v) = queue.pop_front() {
        if let ArenaNode::Choice { support, .. } = &arena.nodes[v] {
            let rank = |e: usize| {
                let a = arena.edge_action(v, e);
                let post = nfa.post(*support, a);
                (post != target, post == *support, a)
            };
            let mut edges: Vec<usize> = (0..game.edges(v).len()).collect();
            edges.sort_by_key(|&e| rank(e));
            let current = choice[v].expect("winning choice node without a move");
            for e in edges {
                if rank(e) >= rank(current) || work == 0 {
                    break;
                }
                let r = game.edges(v)[e].1;
                if winner[r] != Player::One {
                    continue;
                }
                choice[v] = Some(e);
                if evens
                    .iter()
                    .any(|&p| even_cycle_through(game, &preds, choice, v, p, &mut work))
                {
                    choice[v] = Some(current);
                } else {
                    break;
                }
            }
        }
        let next: Vec<usize> = match game.owner(v) {
            Player::One => choice[v].map(|i| game.edges(v)[i].1).into_iter().collect(),
            Player::Two => game.edges(v).iter().map(|&(_, t)| t).collect(),
        };
        for t in next {
            if !visited[t] {
                visited[t] = true;
                queue.push_back(t);
            }
        }
    }
}

/// Whether the strategy-restricted graph has a cycle through `v` whose
/// least priority is `p`. Running out of `work` counts as a cycle.
fn even_cycle_through(
    game: &EdgeParityGame,
    preds: &[Vec<(usize, usize)>],
    choice: &[Option<usize>],
    v: usize,
    p: u32,
    work: &mut usize,
) -> bool {
    let usable = |x: usize, i: usize| game.owner(x) == Player::Two || choice[x] == Some(i);
    let mut fwd = HashSet::from([v]);
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        for (i, &(q, t)) in game.edges(x).iter().enumerate() {
            if *work == 0 {
                return true;
            }
            *work -= 1;
            if q >= p && usable(x, i) && fwd.insert(t) {
                stack.push(t);
            }
        }
    }
    let mut bwd = HashSet::from([v]);
    stack.push(v);
    while let Some(y) = stack.pop() {
        for &(x, i) in &preds[y] {
            if *work == 0 {
                return true;
            }
            *work -= 1;
            if fwd.contains(&x) && game.edges(x)[i].0 >= p && usable(x, i) && bwd.insert(x) {
                stack.push(x);
            }
        }
    }
    bwd.iter().any(|&x| {
        game.edges(x)
            .iter()
            .enumerate()
            .any(|(i, &(q, t))| q == p && bwd.contains(&t) && usable(x, i))
    })
}
