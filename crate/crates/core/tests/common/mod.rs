#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use popctl_core::parity::ParityGame;
use popctl_core::popsim::{apply_split, Adversary, Config};
use popctl_core::support::compatible_graphs;
use popctl_core::{Nfa, Player, StateSet, TransferGraph};
use rand::Rng;

pub fn set(states: &[usize]) -> StateSet {
    states.iter().copied().collect()
}

pub fn graph(n: usize, edges: &[(usize, usize)]) -> TransferGraph {
    TransferGraph::from_edges(n, edges.iter().copied())
}

/// Random game without dead ends.
pub fn random_game<R: Rng>(rng: &mut R, max_nodes: usize, max_priority: u32) -> ParityGame {
    let n = rng.gen_range(1..=max_nodes);
    let mut g = ParityGame::new();
    for _ in 0..n {
        let owner = if rng.gen_bool(0.5) {
            Player::One
        } else {
            Player::Two
        };
        g.add_node(owner, rng.gen_range(1..=max_priority));
    }
    for v in 0..n {
        let k = rng.gen_range(1..=3.min(n));
        let mut targets: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            targets.swap(i, j);
            g.add_edge(v, targets[i]);
        }
    }
    g
}

/// Winner of every node by enumerating Player 1's positional strategies.
/// Once his choices are fixed, Player 2 wins from `v` iff she can reach a
/// cycle whose least priority is even.
pub fn brute_parity(game: &ParityGame) -> Vec<Player> {
    let n = game.len();
    let p1: Vec<usize> = (0..n).filter(|&v| game.owner(v) == Player::One).collect();
    let mut wins = vec![false; n];
    let mut choice = vec![0usize; p1.len()];
    loop {
        let succ = |v: usize| -> Vec<usize> {
            match p1.iter().position(|&u| u == v) {
                Some(i) => vec![game.successors(v)[choice[i]]],
                None => game.successors(v).to_vec(),
            }
        };
        let bad = bad_cycle_nodes(game, &succ);
        for (v, w) in wins.iter_mut().enumerate() {
            if !*w && !reach(n, v, &succ).iter().any(|&u| bad[u]) {
                *w = true;
            }
        }
        let mut i = 0;
        loop {
            if i == p1.len() {
                return wins
                    .into_iter()
                    .map(|w| if w { Player::One } else { Player::Two })
                    .collect();
            }
            choice[i] += 1;
            if choice[i] < game.successors(p1[i]).len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn reach(n: usize, v: usize, succ: &dyn Fn(usize) -> Vec<usize>) -> Vec<usize> {
    let mut seen = vec![false; n];
    let mut stack = vec![v];
    seen[v] = true;
    let mut out = vec![v];
    while let Some(x) = stack.pop() {
        for y in succ(x) {
            if !seen[y] {
                seen[y] = true;
                out.push(y);
                stack.push(y);
            }
        }
    }
    out
}

/// Nodes lying on a cycle whose least priority is even, and equal to the
/// node's own priority.
fn bad_cycle_nodes(game: &ParityGame, succ: &dyn Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let n = game.len();
    let mut bad = vec![false; n];
    for u in 0..n {
        let p = game.priority(u);
        if p % 2 == 1 {
            continue;
        }
        let restricted = |x: usize| -> Vec<usize> {
            succ(x)
                .into_iter()
                .filter(|&y| game.priority(y) >= p)
                .collect()
        };
        let back = restricted(u)
            .into_iter()
            .any(|y| reach(n, y, &restricted).contains(&u));
        bad[u] = back;
    }
    bad
}

/// Support game solved as an alternating reachability game over every
/// compatible graph, without the maximal-graph shortcut.
pub fn brute_support_winner(nfa: &Nfa) -> Player {
    let n = nfa.num_states();
    let target = nfa.target_set();
    let mut win: HashSet<StateSet> = HashSet::from([target]);
    let all: Vec<StateSet> = (1..(1u64 << n)).map(StateSet::from_bits).collect();
    loop {
        let mut grew = false;
        for &s in &all {
            if win.contains(&s) {
                continue;
            }
            let good = (0..nfa.num_actions())
                .any(|a| compatible_graphs(nfa, s, a).all(|g| win.contains(&g.im())));
            if good {
                win.insert(s);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    if win.contains(&StateSet::singleton(nfa.initial())) {
        Player::One
    } else {
        Player::Two
    }
}

/// Loop on a random nonempty `S ⊆ {0..n}`: every state of `S` has a nonempty
/// row inside `S` and every state of `S` is hit.
pub fn random_loop<R: Rng>(rng: &mut R, n: usize) -> (TransferGraph, StateSet) {
    loop {
        let s = StateSet::from_bits(rng.gen_range(1..(1u64 << n)));
        let members: Vec<usize> = s.iter().collect();
        let mut g = TransferGraph::empty(n);
        for &q in &members {
            let mut row = StateSet::EMPTY;
            while row.is_empty() {
                for &r in &members {
                    if rng.gen_bool(0.4) {
                        row.insert(r);
                    }
                }
            }
            g.set_row(q, row);
        }
        if g.im() == s {
            return (g, s);
        }
    }
}

/// Chain of random graphs `G_1 .. G_len` with `dom(G_{i+1}) = im(G_i)` and
/// every row nonempty.
pub fn random_history<R: Rng>(rng: &mut R, n: usize, len: usize) -> Vec<TransferGraph> {
    let mut out = Vec::with_capacity(len);
    let mut dom = StateSet::full(n);
    for _ in 0..len {
        let mut g = TransferGraph::empty(n);
        for q in dom {
            let row = StateSet::from_bits(rng.gen_range(1..(1u64 << n)));
            g.set_row(q, row);
        }
        dom = g.im();
        out.push(g);
    }
    out
}

/// `Sep(G)` by the definition, restricted to the image of `G`.
pub fn sep_oracle(g: &TransferGraph) -> Vec<(usize, usize)> {
    let n = g.order();
    let im = g.im();
    let mut out = Vec::new();
    for r in im {
        for t in im {
            if (0..n).any(|q| g.has_edge(q, r) && !g.has_edge(q, t)) {
                out.push((r, t));
            }
        }
    }
    out
}

/// Product `G_1 · ... · G_k` computed edge by edge.
pub fn compose_oracle(gs: &[TransferGraph]) -> TransferGraph {
    let n = gs[0].order();
    let mut reach: Vec<StateSet> = (0..n).map(StateSet::singleton).collect();
    for g in gs {
        for row in reach.iter_mut() {
            let mut next = StateSet::EMPTY;
            for x in *row {
                next = next.union(g.row(x));
            }
            *row = next;
        }
    }
    let mut out = TransferGraph::empty(n);
    for q in 0..n {
        if !gs[0].row(q).is_empty() {
            out.set_row(q, reach[q]);
        }
    }
    out
}

/// Fewest steps any Player 1 needs against a deterministic adversary, by
/// breadth-first search over configurations. `None` past `max_configs`.
pub fn min_steps(nfa: &Nfa, m: u64, adversary: &Adversary, max_configs: usize) -> Option<usize> {
    let doomed = nfa.doomed();
    let start = Config::initial(nfa, m).ok()?;
    let mut dist: HashMap<Config, usize> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(cfg) = queue.pop_front() {
        let d = dist[&cfg];
        if cfg.is_final(nfa) {
            return Some(d);
        }
        for a in 0..nfa.num_actions() {
            let split = adversary.clone().split(nfa, &cfg, a).ok()?;
            let next = apply_split(nfa, &cfg, a, &split).ok()?;
            if next.support().intersects(doomed) || dist.contains_key(&next) {
                continue;
            }
            if dist.len() >= max_configs {
                return None;
            }
            dist.insert(next.clone(), d + 1);
            queue.push_back(next);
        }
    }
    None
}

pub fn gadget(spec: &str) -> std::sync::Arc<Nfa> {
    let spec: popctl_core::GadgetSpec = spec.parse().unwrap();
    std::sync::Arc::new(popctl_core::generate(&spec).unwrap())
}

pub fn controller(nfa: &std::sync::Arc<Nfa>) -> popctl_core::synth::Controller {
    let d = popctl_core::synth::decide(nfa, Default::default()).unwrap();
    d.controller.expect("positive instance")
}
