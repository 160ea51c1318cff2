//! Self-contained 7x7 gomoku game between V-MCTS (X) and full-budget MCTS (O),
//! printing the budget each side spent per move.
//!
//! cargo run --release --example gomoku_vmcts -- [seed]

use vmcts::envs::{GameState, MnkState, Player, TextBoard};
use vmcts::eval::RolloutEvaluator;
use vmcts::rng::derive_seed;
use vmcts::search::{search_vanilla, SearchConfig};
use vmcts::virtual_expansion::{search_vmcts, VetConfig};

fn main() -> vmcts::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let evaluator = RolloutEvaluator::new(16);
    let vet = VetConfig::default();
    let mut state = MnkState::gomoku(7);
    let mut spent = [0u32; 2];
    while !state.is_terminal() {
        let cfg = SearchConfig {
            budget: 150,
            seed: derive_seed(seed, state.move_number() as u64),
            ..Default::default()
        };
        let (side, out) = match state.player_to_move() {
            Player::First => (0, search_vmcts(&state, &evaluator, &cfg, &vet)?),
            _ => (1, search_vanilla(&state, &evaluator, &cfg)?),
        };
        spent[side] += out.iterations_used;
        println!(
            "{:>2}. {} {:<4} k = {:>3}",
            state.move_number() + 1,
            if side == 0 { "X" } else { "O" },
            state.format_action(out.chosen_action),
            out.iterations_used
        );
        if out.resigned {
            println!("{} resigns", if side == 0 { "X" } else { "O" });
            break;
        }
        state = state.apply(out.chosen_action)?;
    }
    println!("\n{}", state.to_text());
    println!("result for X: {:+}", state.terminal_value());
    println!("iterations spent: X {} O {}", spent[0], spent[1]);
    Ok(())
}
