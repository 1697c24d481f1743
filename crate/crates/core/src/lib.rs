//! Population control: deciding whether one controller can gather every
//! finite population of NFA agents in the target state, and synthesizing it.

pub mod batch;
pub mod capacity;
pub mod graph;
pub mod nfa;
pub mod parity;
pub mod popsim;
pub mod support;
pub mod synth;

pub use graph::{PairSet, StateSet, TransferGraph};
pub use nfa::{generate, parse_nfa, GadgetKind, GadgetSpec, Nfa, NfaBuilder, NfaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Player {
    /// Chooses actions; wants every agent in the target.
    One,
    /// Resolves nondeterminism.
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl std::fmt::Display for Player {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Player::One => "Player1",
            Player::Two => "Player2",
        })
    }
}
