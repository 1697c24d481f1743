use std::fmt::Write as _;

use super::{Nfa, NfaBuilder, NfaError, PARSE_SINK};

const DIRECTIVES: [&str; 4] = ["states", "init", "target", "alphabet"];

/// Parses the line-based text format:
///
/// ```text
/// states: q0 q1 f
/// init: q0
/// target: f
/// alphabet: a b
/// q0 a q1
/// ```
///
/// Directives come first in this order; every further line is one edge
/// `src action dst`. `#` starts a comment. Pairs `(q, a)` without an edge go
/// to an added `_sink` state that loops on every action.
pub fn parse_nfa(text: &str) -> Result<Nfa, NfaError> {
    let mut b = NfaBuilder::new();
    let mut next_directive = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if next_directive < DIRECTIVES.len() {
            let (key, rest) = content.split_once(':').ok_or_else(|| NfaError::Syntax {
                line,
                message: format!("expected `{}:`", DIRECTIVES[next_directive]),
            })?;
            let key = key.trim();
            if key != DIRECTIVES[next_directive] {
                return Err(NfaError::Syntax {
                    line,
                    message: format!(
                        "expected `{}:` but found `{key}:`",
                        DIRECTIVES[next_directive]
                    ),
                });
            }
            let names: Vec<&str> = rest.split_whitespace().collect();
            match key {
                "states" => {
                    for n in &names {
                        if b.state_id(n).is_some() {
                            return Err(NfaError::Duplicate(n.to_string()));
                        }
                        b.state(n);
                    }
                }
                "init" | "target" => {
                    let [name] = names[..] else {
                        return Err(NfaError::Syntax {
                            line,
                            message: format!("`{key}` takes exactly one state"),
                        });
                    };
                    let q = b.state_id(name).ok_or_else(|| NfaError::UnknownState {
                        line,
                        name: name.to_string(),
                    })?;
                    if key == "init" {
                        b.initial(q);
                    } else {
                        b.target(q);
                    }
                }
                _ => {
                    if names.is_empty() {
                        return Err(NfaError::EmptyAlphabet);
                    }
                    for n in &names {
                        if b.action_id(n).is_some() {
                            return Err(NfaError::Duplicate(n.to_string()));
                        }
                        b.action(n);
                    }
                }
            }
            next_directive += 1;
            continue;
        }
        let parts: Vec<&str> = content.split_whitespace().collect();
        let [src, act, dst] = parts[..] else {
            return Err(NfaError::Syntax {
                line,
                message: "expected `src action dst`".to_string(),
            });
        };
        let lookup_state = |name: &str| {
            b.state_id(name).ok_or_else(|| NfaError::UnknownState {
                line,
                name: name.to_string(),
            })
        };
        let q = lookup_state(src)?;
        let r = lookup_state(dst)?;
        let a = b.action_id(act).ok_or_else(|| NfaError::UnknownAction {
            line,
            name: act.to_string(),
        })?;
        b.edge(q, a, r);
    }
    match next_directive {
        0 => Err(NfaError::NoStates),
        1 => Err(NfaError::NoInitial),
        2 => Err(NfaError::NoTarget),
        3 => Err(NfaError::EmptyAlphabet),
        _ => b.build(Some(PARSE_SINK)),
    }
}

impl Nfa {
    /// Renders the automaton in the text format accepted by [`parse_nfa`],
    /// with states, actions and edges in index order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states: {}", self.states.join(" "));
        let _ = writeln!(out, "init: {}", self.states[self.initial]);
        let _ = writeln!(out, "target: {}", self.states[self.target]);
        let _ = writeln!(out, "alphabet: {}", self.actions.join(" "));
        for q in 0..self.num_states() {
            for a in 0..self.num_actions() {
                for r in self.successors(q, a) {
                    let _ = writeln!(
                        out,
                        "{} {} {}",
                        self.states[q], self.actions[a], self.states[r]
                    );
                }
            }
        }
        out
    }
}
