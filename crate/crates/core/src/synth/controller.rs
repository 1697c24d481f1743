use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{ArenaNode, ParityArena};
use crate::capacity::TrackingList;
use crate::graph::{StateSet, TransferGraph};
use crate::nfa::Nfa;
use crate::support::{compatible_count, compatible_graphs, is_compatible};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ControllerError {
    #[error("graph is not compatible with the action chosen at node {node}")]
    Incompatible { node: usize },
    #[error("graph leads outside the controller from node {node}")]
    NotClosed { node: usize },
    #[error("no node {0}")]
    UnknownNode(usize),
    #[error("controller was built for a different automaton")]
    HashMismatch,
    #[error("malformed controller document: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerNode {
    pub support: StateSet,
    pub list: TrackingList,
    /// `None` at the target node.
    pub action: Option<usize>,
}

/// Finite-memory strategy: memory is the (support, tracking list) position,
/// updated from the observed transfer graph.
#[derive(Debug, Clone)]
pub struct Controller {
    nfa: Arc<Nfa>,
    nodes: Vec<ControllerNode>,
    index: HashMap<(StateSet, TrackingList), usize>,
    initial: usize,
}

impl PartialEq for Controller {
    fn eq(&self, other: &Self) -> bool {
        self.nfa == other.nfa && self.nodes == other.nodes && self.initial == other.initial
    }
}

impl Controller {
    /// Restricts the solved arena to what Player 1's strategy can reach.
    pub(super) fn extract(nfa: Arc<Nfa>, arena: &ParityArena, choice: &[Option<usize>]) -> Self {
        let mut c = Controller {
            nfa,
            nodes: Vec::new(),
            index: HashMap::new(),
            initial: 0,
        };
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let visit = |v: usize,
                     c: &mut Controller,
                     ids: &mut HashMap<usize, usize>,
                     queue: &mut VecDeque<usize>|
         -> usize {
            if let Some(&id) = ids.get(&v) {
                return id;
            }
            let (support, list) = match &arena.nodes[v] {
                ArenaNode::Choice { support, list } => (*support, list.clone()),
                ArenaNode::Win => (c.nfa.target_set(), TrackingList::new()),
                other => panic!("strategy reaches non-winning node {other:?}"),
            };
            let id = c.nodes.len();
            c.nodes.push(ControllerNode {
                support,
                list: list.clone(),
                action: None,
            });
            c.index.insert((support, list), id);
            ids.insert(v, id);
            if v != arena.win {
                queue.push_back(v);
            }
            id
        };
        c.initial = visit(arena.initial, &mut c, &mut ids, &mut queue);
        while let Some(v) = queue.pop_front() {
            let e = choice[v].expect("winning choice node has a strategy");
            let a = arena.edge_action(v, e);
            c.nodes[ids[&v]].action = Some(a);
            let r = arena.response(v, a).expect("response node");
            for &(_, t) in arena.game.edges(r) {
                visit(t, &mut c, &mut ids, &mut queue);
            }
        }
        c
    }

    pub fn nfa(&self) -> &Arc<Nfa> {
        &self.nfa
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn nodes(&self) -> &[ControllerNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> Result<&ControllerNode, ControllerError> {
        self.nodes.get(id).ok_or(ControllerError::UnknownNode(id))
    }

    pub fn is_win(&self, id: usize) -> bool {
        self.nodes.get(id).is_some_and(|n| n.action.is_none())
    }

    pub fn choose(&self, id: usize) -> Option<usize> {
        self.nodes.get(id).and_then(|n| n.action)
    }

    /// Memory update after the controller's action produced `g`.
    pub fn advance(&self, id: usize, g: &TransferGraph) -> Result<usize, ControllerError> {
        let node = self.node(id)?;
        let target = self.nfa.target_set();
        let Some(a) = node.action else {
            // every action keeps the target in place
            return if g.dom() == target && g.im() == target {
                Ok(id)
            } else {
                Err(ControllerError::Incompatible { node: id })
            };
        };
        if g.dom() != node.support || !is_compatible(&self.nfa, g, a) {
            return Err(ControllerError::Incompatible { node: id });
        }
        let next = g.im();
        if next == target {
            return self
                .index
                .get(&(target, TrackingList::new()))
                .copied()
                .ok_or(ControllerError::NotClosed { node: id });
        }
        let (list, _) = node.list.update(g);
        self.index
            .get(&(next, list))
            .copied()
            .ok_or(ControllerError::NotClosed { node: id })
    }

    /// The action for `id` together with the successor memory.
    pub fn step(
        &self,
        id: usize,
        observed: &TransferGraph,
    ) -> Result<(usize, usize), ControllerError> {
        let a = self
            .choose(id)
            .ok_or(ControllerError::Incompatible { node: id })?;
        Ok((a, self.advance(id, observed)?))
    }

    /// Copy with the action of `id` replaced; the result need not be closed
    /// or winning. Useful for checking that verification catches mistakes.
    pub fn with_action(&self, id: usize, action: usize) -> Result<Controller, ControllerError> {
        if self.node(id)?.action.is_none() || action >= self.nfa.num_actions() {
            return Err(ControllerError::Incompatible { node: id });
        }
        let mut c = self.clone();
        c.nodes[id].action = Some(action);
        Ok(c)
    }

    pub fn cursor(&self) -> ControllerCursor<'_> {
        ControllerCursor {
            controller: self,
            node: self.initial,
            last_action: None,
        }
    }

    /// Every node, every graph compatible with its action: the successor is a
    /// node of this controller.
    pub fn check_closed(&self) -> Result<(), ControllerError> {
        for (id, node) in self.nodes.iter().enumerate() {
            if let Some(a) = node.action {
                for g in compatible_graphs(&self.nfa, node.support, a) {
                    self.advance(id, &g)?;
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("controller document serializes")
    }

    fn to_document(&self) -> ControllerDoc {
        let nfa = &self.nfa;
        let name = |q: usize| nfa.state_name(q).to_string();
        let pairs = |g: &TransferGraph| -> Vec<(String, String)> {
            g.edges().map(|(q, r)| (name(q), name(r))).collect()
        };
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| NodeDoc {
                id,
                support: n.support.iter().map(name).collect(),
                list: n.list.graphs().iter().map(pairs).collect(),
                action: n.action.map(|a| nfa.action_name(a).to_string()),
            })
            .collect();
        let mut edges = Vec::new();
        for (id, n) in self.nodes.iter().enumerate() {
            let Some(a) = n.action else { continue };
            for g in compatible_graphs(nfa, n.support, a) {
                let to = self.advance(id, &g).expect("controller is closed");
                edges.push(EdgeDoc {
                    from: id,
                    graph: pairs(&g),
                    to,
                });
            }
        }
        ControllerDoc {
            nfa_hash: nfa_hash(nfa),
            initial: self.initial,
            nodes,
            edges,
        }
    }

    /// Reads a document written by [`Controller::to_json`] for `nfa`, checking
    /// every recorded edge against the memory update.
    pub fn from_json(text: &str, nfa: Arc<Nfa>) -> Result<Self, ControllerError> {
        let doc: ControllerDoc =
            serde_json::from_str(text).map_err(|e| ControllerError::Malformed(e.to_string()))?;
        if doc.nfa_hash != nfa_hash(&nfa) {
            return Err(ControllerError::HashMismatch);
        }
        let state = |s: &str| {
            nfa.state_index(s)
                .ok_or_else(|| ControllerError::Malformed(format!("unknown state `{s}`")))
        };
        let graph = |pairs: &[(String, String)]| -> Result<TransferGraph, ControllerError> {
            let mut g = TransferGraph::empty(nfa.num_states());
            for (q, r) in pairs {
                g.add_edge(state(q)?, state(r)?);
            }
            Ok(g)
        };
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        let mut index = HashMap::new();
        for (pos, nd) in doc.nodes.iter().enumerate() {
            if nd.id != pos {
                return Err(ControllerError::Malformed(format!(
                    "node {} out of order",
                    nd.id
                )));
            }
            let support: StateSet = nd
                .support
                .iter()
                .map(|s| state(s))
                .collect::<Result<_, _>>()?;
            if support.is_empty() {
                return Err(ControllerError::Malformed(format!(
                    "node {pos} has an empty support"
                )));
            }
            let list = TrackingList::from_graphs(
                nd.list.iter().map(|g| graph(g)).collect::<Result<_, _>>()?,
            );
            let action =
                match &nd.action {
                    Some(a) => Some(nfa.action_index(a).ok_or_else(|| {
                        ControllerError::Malformed(format!("unknown action `{a}`"))
                    })?),
                    None => None,
                };
            if index.insert((support, list.clone()), pos).is_some() {
                return Err(ControllerError::Malformed(format!("duplicate node {pos}")));
            }
            nodes.push(ControllerNode {
                support,
                list,
                action,
            });
        }
        if doc.initial >= nodes.len() {
            return Err(ControllerError::UnknownNode(doc.initial));
        }
        let c = Controller {
            nfa: Arc::clone(&nfa),
            nodes,
            index,
            initial: doc.initial,
        };
        let mut per_node = vec![0u64; c.nodes.len()];
        for e in &doc.edges {
            let g = graph(&e.graph)?;
            if c.advance(e.from, &g)? != e.to {
                return Err(ControllerError::Malformed(format!(
                    "edge from node {} disagrees with the memory update",
                    e.from
                )));
            }
            per_node[e.from] += 1;
        }
        for (id, n) in c.nodes.iter().enumerate() {
            let expected = n
                .action
                .map_or(0, |a| compatible_count(&c.nfa, n.support, a));
            if per_node[id] != expected {
                return Err(ControllerError::Malformed(format!(
                    "node {id} lists {} edges, expected {expected}",
                    per_node[id]
                )));
            }
        }
        Ok(c)
    }
}

/// Hex SHA-256 of the automaton's text form.
pub fn nfa_hash(nfa: &Nfa) -> String {
    Sha256::digest(nfa.to_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct ControllerDoc {
    nfa_hash: String,
    initial: usize,
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    support: Vec<String>,
    list: Vec<Vec<(String, String)>>,
    action: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeDoc {
    from: usize,
    graph: Vec<(String, String)>,
    to: usize,
}

/// A running controller: current memory plus the last action played, which
/// is repeated once the target is reached.
#[derive(Debug, Clone)]
pub struct ControllerCursor<'a> {
    controller: &'a Controller,
    node: usize,
    last_action: Option<usize>,
}

impl ControllerCursor<'_> {
    pub fn node(&self) -> usize {
        self.node
    }

    pub fn at_win(&self) -> bool {
        self.controller.is_win(self.node)
    }

    pub fn action(&self) -> usize {
        self.controller
            .choose(self.node)
            .or(self.last_action)
            .unwrap_or(0)
    }

    /// Records that `action()` was played and produced `g`.
    pub fn observe(&mut self, g: &TransferGraph) -> Result<(), ControllerError> {
        let a = self.action();
        self.node = self.controller.advance(self.node, g)?;
        self.last_action = Some(a);
        Ok(())
    }

    pub fn reset(&mut self) {
        self.node = self.controller.initial;
        self.last_action = None;
    }
}
