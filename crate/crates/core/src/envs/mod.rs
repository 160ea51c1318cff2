//! Environments implementing the common [`GameState`] contract.
//!
//! Two-player games report terminal values from the first player's
//! perspective, in `[-1, 1]`. Actions are indices into a fixed per-game
//! action space; legal action lists are always in ascending order.

mod bandit;
mod go;
mod mnk;
mod text;

pub use bandit::{BanditSpec, BanditState, RewardLaw};
pub use go::{GoState, Stone, DEFAULT_KOMI};
pub use mnk::{Cell, MnkState};
pub use text::TextBoard;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::SearchRng;

pub type Action = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    First,
    Second,
    /// Single-agent environments (bandits).
    Single,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::First => Player::Second,
            Player::Second => Player::First,
            Player::Single => Player::Single,
        }
    }

    /// Sign that converts a first-player value into this player's perspective.
    pub fn sign(self) -> f64 {
        match self {
            Player::Second => -1.0,
            Player::First | Player::Single => 1.0,
        }
    }
}

pub trait GameState: Clone + Send + Sync {
    fn player_to_move(&self) -> Player;

    fn move_number(&self) -> usize;

    /// Ascending list of legal actions; empty iff the state is terminal.
    fn legal_actions(&self) -> Vec<Action>;

    /// Returns the successor state. `self` is left untouched.
    fn apply(&self, action: Action) -> Result<Self>;

    fn is_terminal(&self) -> bool;

    /// Outcome of a terminal state, first-player perspective.
    fn terminal_value(&self) -> f64;

    /// Size of the action space (board points, plus pass where applicable).
    fn action_space(&self) -> usize;

    /// Whether values alternate perspective every ply.
    fn two_player(&self) -> bool {
        self.player_to_move() != Player::Single
    }

    /// Plays uniformly random moves to the end and returns the terminal value.
    fn random_playout(&self, rng: &mut SearchRng) -> f64 {
        let mut state = self.clone();
        while !state.is_terminal() {
            let legal = state.legal_actions();
            let a = legal[rng.random_range(0..legal.len())];
            state = state.apply(a).expect("legal action");
        }
        state.terminal_value()
    }
}
