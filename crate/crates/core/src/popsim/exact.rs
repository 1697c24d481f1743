use std::collections::HashMap;

use thiserror::Error;

use super::{for_each_split, Config, SimError};
use crate::nfa::Nfa;
use crate::synth::{Controller, ControllerError};
use crate::Player;

/// Limits for explicit configuration-graph searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactBudget {
    pub max_configs: usize,
    /// Distinct successor configurations of one (configuration, action) pair.
    pub max_successors: usize,
}

impl Default for ExactBudget {
    fn default() -> Self {
        ExactBudget {
            max_configs: 2_000_000,
            max_successors: 200_000,
        }
    }
}

fn successors(
    nfa: &Nfa,
    cfg: &Config,
    a: usize,
    budget: &ExactBudget,
    explored: usize,
) -> Result<Vec<Config>, SimError> {
    let mut out: Vec<Config> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut over = false;
    for_each_split(nfa, cfg, a, |s| {
        if over {
            return;
        }
        let mut counts = vec![0; nfa.num_states()];
        for (_, r, c) in s.entries() {
            counts[r] += c;
        }
        let next = Config { counts };
        if seen.insert(next.clone()) {
            out.push(next);
            over = out.len() > budget.max_successors;
        }
    });
    if over {
        return Err(SimError::Budget { explored });
    }
    Ok(out)
}

/// Winner of the `m`-population game: reachability of the all-in-target
/// configuration in the explicit game over configurations.
pub fn exact_winner(nfa: &Nfa, m: u64, budget: ExactBudget) -> Result<Player, SimError> {
    let hopeless = nfa.doomed();
    let start = Config::initial(nfa, m)?;
    let mut configs = vec![start.clone()];
    let mut index: HashMap<Config, usize> = HashMap::from([(start, 0)]);
    // pair p = (owner config, successor ids)
    let mut pair_owner: Vec<usize> = Vec::new();
    let mut remaining: Vec<usize> = Vec::new();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new()];
    let mut win = vec![false];
    let mut queue = Vec::new();
    let mut i = 0;
    while i < configs.len() {
        let cfg = configs[i].clone();
        if cfg.is_final(nfa) {
            win[i] = true;
            queue.push(i);
            i += 1;
            continue;
        }
        if cfg.support().intersects(hopeless) {
            i += 1;
            continue;
        }
        for a in 0..nfa.num_actions() {
            let succ = successors(nfa, &cfg, a, &budget, configs.len())?;
            let p = pair_owner.len();
            pair_owner.push(i);
            remaining.push(succ.len());
            for next in succ {
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if configs.len() >= budget.max_configs {
                            return Err(SimError::Budget {
                                explored: configs.len(),
                            });
                        }
                        let id = configs.len();
                        index.insert(next.clone(), id);
                        configs.push(next);
                        preds.push(Vec::new());
                        win.push(false);
                        id
                    }
                };
                preds[id].push(p);
            }
        }
        i += 1;
    }
    while let Some(v) = queue.pop() {
        for &p in &preds[v] {
            remaining[p] -= 1;
            let owner = pair_owner[p];
            if remaining[p] == 0 && !win[owner] {
                win[owner] = true;
                queue.push(owner);
            }
        }
    }
    Ok(if win[0] { Player::One } else { Player::Two })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffResult {
    /// Player 1 wins every `m` below the value and loses at the value.
    Cutoff(u64),
    NoneUpTo(u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cut-off search stopped{}: {source}", last_decided.map(|m| format!(" after m = {m}")).unwrap_or_default())]
pub struct CutoffError {
    /// Largest `m` already shown to be won by Player 1.
    pub last_decided: Option<u64>,
    pub source: SimError,
}

/// Scans `m = 1..=m_max`; by monotonicity the first loss is the cut-off.
pub fn find_cutoff(
    nfa: &Nfa,
    m_max: u64,
    budget: ExactBudget,
) -> Result<CutoffResult, CutoffError> {
    for m in 1..=m_max {
        match exact_winner(nfa, m, budget) {
            Ok(Player::One) => {}
            Ok(Player::Two) => return Ok(CutoffResult::Cutoff(m)),
            Err(source) => {
                return Err(CutoffError {
                    last_decided: (m > 1).then_some(m - 1),
                    source,
                })
            }
        }
    }
    Ok(CutoffResult::NoneUpTo(m_max))
}

/// Explores every adversary behaviour against `controller` with `m` agents.
/// True iff every branch reaches the all-in-target configuration; a branch
/// that revisits a position on the current path can be repeated forever.
pub fn exhaustive_verify(
    nfa: &Nfa,
    controller: &Controller,
    m: u64,
    max_states: usize,
) -> Result<bool, SimError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        OnPath,
        Good,
    }
    let hopeless = nfa.doomed();
    let start = (Config::initial(nfa, m)?, controller.initial());
    let mut mark: HashMap<(Config, usize), Mark> = HashMap::new();
    // position, its children, next child
    type Frame = ((Config, usize), Vec<(Config, usize)>, usize);
    let mut stack: Vec<Frame> = Vec::new();

    let expand = |pos: &(Config, usize)| -> Result<Option<Vec<(Config, usize)>>, SimError> {
        let (cfg, node) = pos;
        if cfg.is_final(nfa) {
            return Ok(Some(Vec::new()));
        }
        if cfg.support().intersects(hopeless) {
            return Ok(None);
        }
        let Some(a) = controller.choose(*node) else {
            return Ok(None);
        };
        let mut children = Vec::new();
        let mut failed = false;
        let mut err = None;
        for_each_split(nfa, cfg, a, |s| {
            if failed || err.is_some() {
                return;
            }
            let mut counts = vec![0; nfa.num_states()];
            for (_, r, c) in s.entries() {
                counts[r] += c;
            }
            match controller.advance(*node, &s.graph()) {
                Ok(next) => {
                    let child = (Config { counts }, next);
                    if !children.contains(&child) {
                        children.push(child);
                    }
                }
                Err(ControllerError::NotClosed { .. }) => failed = true,
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        Ok((!failed).then_some(children))
    };

    let Some(children) = expand(&start)? else {
        return Ok(false);
    };
    mark.insert(start.clone(), Mark::OnPath);
    stack.push((start, children, 0));
    while let Some(frame) = stack.last_mut() {
        if frame.2 == frame.1.len() {
            let (pos, _, _) = stack.pop().unwrap();
            mark.insert(pos, Mark::Good);
            continue;
        }
        let child = frame.1[frame.2].clone();
        frame.2 += 1;
        match mark.get(&child) {
            Some(Mark::Good) => continue,
            Some(Mark::OnPath) => return Ok(false),
            None => {}
        }
        if mark.len() >= max_states {
            return Err(SimError::Budget {
                explored: mark.len(),
            });
        }
        let Some(grand) = expand(&child)? else {
            return Ok(false);
        };
        mark.insert(child.clone(), Mark::OnPath);
        stack.push((child, grand, 0));
    }
    Ok(true)
}
