//! Min-parity games: Player 1 wins a play iff the least priority seen
//! infinitely often is odd. Solved with Zielonka's recursive algorithm.

use crate::Player;

/// Node-priority game without dead ends.
#[derive(Debug, Clone, Default)]
pub struct ParityGame {
    owner: Vec<Player>,
    priority: Vec<u32>,
    succ: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParitySolution {
    pub winner: Vec<Player>,
    /// For a node won by its owner, the successor that owner plays.
    pub strategy: Vec<Option<usize>>,
}

impl ParityGame {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, owner: Player, priority: u32) -> usize {
        self.owner.push(owner);
        self.priority.push(priority);
        self.succ.push(Vec::new());
        self.owner.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.succ[from].push(to);
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn priority(&self, v: usize) -> u32 {
        self.priority[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn solve(&self) -> ParitySolution {
        let n = self.len();
        assert!(
            self.succ.iter().all(|s| !s.is_empty()),
            "parity game has a dead end"
        );
        let mut pred = vec![Vec::new(); n];
        for (v, ss) in self.succ.iter().enumerate() {
            for &w in ss {
                pred[w].push(v);
            }
        }
        let mut solver = Zielonka {
            game: self,
            pred,
            winner: vec![Player::Two; n],
            strategy: vec![None; n],
            count: vec![0; n],
        };
        let all: Vec<usize> = (0..n).collect();
        let mut inside = vec![true; n];
        solver.solve(&all, &mut inside);
        // attractor moves of nodes later lost by their owner are stale
        for v in 0..n {
            if solver.winner[v] != self.owner[v] {
                solver.strategy[v] = None;
            }
        }
        ParitySolution {
            winner: solver.winner,
            strategy: solver.strategy,
        }
    }
}

fn parity_player(p: u32) -> Player {
    if p % 2 == 1 {
        Player::One
    } else {
        Player::Two
    }
}

struct Zielonka<'a> {
    game: &'a ParityGame,
    pred: Vec<Vec<usize>>,
    winner: Vec<Player>,
    strategy: Vec<Option<usize>>,
    /// Scratch for attractor computations.
    count: Vec<usize>,
}

impl Zielonka<'_> {
    /// Attractor for `player` to `target` inside the subgame `inside`.
    /// Records attractor moves for `player` on newly added nodes.
    fn attractor(
        &mut self,
        player: Player,
        target: &[usize],
        nodes: &[usize],
        inside: &[bool],
    ) -> Vec<bool> {
        let n = self.game.len();
        let mut attr = vec![false; n];
        for &v in nodes {
            self.count[v] = self.game.succ[v].iter().filter(|&&w| inside[w]).count();
        }
        let mut queue: Vec<usize> = Vec::new();
        for &v in target {
            if !attr[v] {
                attr[v] = true;
                queue.push(v);
            }
        }
        while let Some(w) = queue.pop() {
            for i in 0..self.pred[w].len() {
                let v = self.pred[w][i];
                if !inside[v] || attr[v] {
                    continue;
                }
                if self.game.owner[v] == player {
                    attr[v] = true;
                    self.strategy[v] = Some(w);
                    queue.push(v);
                } else {
                    self.count[v] -= 1;
                    if self.count[v] == 0 {
                        attr[v] = true;
                        queue.push(v);
                    }
                }
            }
        }
        attr
    }

    /// Solves the subgame on `nodes` (marked in `inside`). On return every
    /// node has its winner set and winner-owned nodes have a strategy that
    /// stays in the winner's region. `inside` is restored.
    fn solve(&mut self, nodes: &[usize], inside: &mut [bool]) {
        let mut current: Vec<usize> = nodes.to_vec();
        let mut removed: Vec<usize> = Vec::new();
        while !current.is_empty() {
            let p = current
                .iter()
                .map(|&v| self.game.priority[v])
                .min()
                .unwrap();
            let alpha = parity_player(p);
            let top: Vec<usize> = current
                .iter()
                .copied()
                .filter(|&v| self.game.priority[v] == p)
                .collect();
            let a = self.attractor(alpha, &top, &current, inside);
            let rest: Vec<usize> = current.iter().copied().filter(|&v| !a[v]).collect();
            for &v in &current {
                if a[v] {
                    inside[v] = false;
                }
            }
            self.solve(&rest, inside);
            for &v in &current {
                if a[v] {
                    inside[v] = true;
                }
            }
            let lost: Vec<usize> = rest
                .iter()
                .copied()
                .filter(|&v| self.winner[v] != alpha)
                .collect();
            if lost.is_empty() {
                for &v in &current {
                    self.winner[v] = alpha;
                }
                for &v in &top {
                    if self.game.owner[v] == alpha {
                        let w = self.game.succ[v].iter().copied().find(|&w| inside[w]);
                        self.strategy[v] = w;
                    }
                }
                break;
            }
            let beta = alpha.opponent();
            let b = self.attractor(beta, &lost, &current, inside);
            for &v in &current {
                if b[v] {
                    self.winner[v] = beta;
                    inside[v] = false;
                    removed.push(v);
                }
            }
            current.retain(|&v| !b[v]);
        }
        for v in removed {
            inside[v] = true;
        }
    }
}

/// Game with priorities on edges. Solved by routing every edge whose
/// priority differs from `neutral` through a relay node carrying that
/// priority; original nodes carry `neutral`, which must be even and at least
/// every edge priority. Relays have one successor, so their owner is
/// immaterial; one relay serves every edge with the same priority and target.
#[derive(Debug, Clone)]
pub struct EdgeParityGame {
    neutral: u32,
    owner: Vec<Player>,
    edges: Vec<Vec<(u32, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSolution {
    pub winner: Vec<Player>,
    /// For a node won by its owner, the index of the chosen edge.
    pub choice: Vec<Option<usize>>,
}

impl EdgeParityGame {
    pub fn new(neutral: u32) -> Self {
        assert!(neutral.is_multiple_of(2), "neutral priority must be even");
        EdgeParityGame {
            neutral,
            owner: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn add_node(&mut self, owner: Player) -> usize {
        self.owner.push(owner);
        self.edges.push(Vec::new());
        self.owner.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, priority: u32, to: usize) {
        assert!(
            priority >= 1 && priority <= self.neutral,
            "priority out of range"
        );
        self.edges[from].push((priority, to));
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn edges(&self, v: usize) -> &[(u32, usize)] {
        &self.edges[v]
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn neutral(&self) -> u32 {
        self.neutral
    }

    /// The equivalent node-priority game. Nodes `0..len()` are the original
    /// nodes; relays follow.
    pub fn to_node_game(&self) -> ParityGame {
        let n = self.len();
        let mut game = ParityGame::new();
        for &o in &self.owner {
            game.add_node(o, self.neutral);
        }
        let mut relays = std::collections::HashMap::new();
        for v in 0..n {
            for &(p, t) in &self.edges[v] {
                if p == self.neutral {
                    game.add_edge(v, t);
                    continue;
                }
                let r = *relays.entry((p, t)).or_insert_with(|| {
                    let r = game.add_node(self.owner[t], p);
                    game.add_edge(r, t);
                    r
                });
                game.add_edge(v, r);
            }
        }
        game
    }

    pub fn solve(&self) -> EdgeSolution {
        let game = self.to_node_game();
        let sol = game.solve();
        let n = self.len();
        let mut choice = vec![None; n];
        for v in 0..n {
            if sol.winner[v] != self.owner[v] {
                continue;
            }
            let Some(s) = sol.strategy[v] else { continue };
            choice[v] = self.edges[v].iter().position(|&(p, t)| {
                if p == self.neutral {
                    s == t
                } else {
                    s >= n && game.priority(s) == p && game.successors(s)[0] == t
                }
            });
        }
        EdgeSolution {
            winner: sol.winner[..n].to_vec(),
            choice,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_loops() {
        for (p, w) in [(1, Player::One), (2, Player::Two)] {
            let mut g = EdgeParityGame::new(4);
            let v = g.add_node(Player::One);
            g.add_edge(v, p, v);
            let s = g.solve();
            assert_eq!(s.winner, vec![w]);
        }
    }

    #[test]
    fn player_two_stays_on_even() {
        // v0 (P2): to v1 with 3, or self-loop with 4; v1 (P1): back with 3
        let mut g = EdgeParityGame::new(6);
        let v0 = g.add_node(Player::Two);
        let v1 = g.add_node(Player::One);
        g.add_edge(v0, 3, v1);
        g.add_edge(v0, 4, v0);
        g.add_edge(v1, 3, v0);
        let s = g.solve();
        assert_eq!(s.winner, vec![Player::Two, Player::Two]);
        assert_eq!(s.choice[v0], Some(1));
    }

    #[test]
    fn strategy_is_recorded_for_winner() {
        // P1 at v0 chooses between a losing loop (2) and a winning loop (1)
        let mut g = EdgeParityGame::new(4);
        let v0 = g.add_node(Player::One);
        let v1 = g.add_node(Player::Two);
        let v2 = g.add_node(Player::Two);
        g.add_edge(v0, 4, v1);
        g.add_edge(v0, 4, v2);
        g.add_edge(v1, 2, v1);
        g.add_edge(v2, 1, v2);
        let s = g.solve();
        assert_eq!(s.winner, vec![Player::One, Player::Two, Player::One]);
        assert_eq!(s.choice[v0], Some(1));
    }

    #[test]
    fn node_game_regions_are_consistent_with_strategies() {
        let mut g = ParityGame::new();
        let a = g.add_node(Player::One, 2);
        let b = g.add_node(Player::Two, 1);
        let c = g.add_node(Player::Two, 3);
        g.add_edge(a, b);
        g.add_edge(b, a);
        g.add_edge(b, c);
        g.add_edge(c, c);
        let s = g.solve();
        assert!(s.winner.iter().all(|&w| w == Player::One));
    }
}
