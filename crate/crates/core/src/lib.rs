//! P-UCT Monte Carlo tree search with virtual expansion and early termination.
//!
//! The crate is organised bottom-up:
//!
//! * [`envs`] holds the games (m,n,k boards, Go, multi-armed bandits) behind
//!   the [`envs::GameState`] trait, plus a small text board format.
//! * [`eval`] provides leaf evaluators: random rollouts, exact minimax, a Go
//!   area heuristic and a bandit arm puller.
//! * [`tree`] is the arena search tree with backup and min-max bounds.
//! * [`search`] runs plain P-UCT iterations and picks the move.
//! * [`virtual_expansion`] adds root-only virtual expansion, the termination
//!   rule and the ablation variants.
//! * [`theory`] checks the sample-complexity bounds on bandit instances.
//! * [`cli`] drives searches, matches, sweeps and interactive play.
//!
//! ```
//! use vmcts::envs::MnkState;
//! use vmcts::eval::RolloutEvaluator;
//! use vmcts::search::SearchConfig;
//! use vmcts::virtual_expansion::{search_vmcts, VetConfig};
//!
//! let cfg = SearchConfig { budget: 60, seed: 7, ..Default::default() };
//! let out = search_vmcts(&MnkState::tictactoe(), &RolloutEvaluator::new(4), &cfg, &VetConfig::default())
//!     .unwrap();
//! assert!(out.iterations_used <= 60);
//! ```

pub mod cli;
pub mod envs;
pub mod error;
pub mod eval;
pub mod rng;
pub mod search;
pub mod theory;
pub mod tree;
pub mod virtual_expansion;

pub use error::{Error, Result};
pub use search::{Policy, SearchConfig, SearchOutcome};
pub use virtual_expansion::{ExpansionMode, Norm, VetConfig};
