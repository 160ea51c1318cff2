//! 9x9 Go with the area-score heuristic: V-MCTS plays both colors and the
//! final position is scored with area counting and komi.
//!
//! cargo run --release --example go_heuristic

use vmcts::envs::{GameState, GoState, TextBoard};
use vmcts::eval::GoHeuristicEvaluator;
use vmcts::rng::derive_seed;
use vmcts::search::SearchConfig;
use vmcts::virtual_expansion::{search_vmcts, VetConfig};

fn main() -> vmcts::Result<()> {
    let evaluator = GoHeuristicEvaluator::default();
    let vet = VetConfig::default();
    let mut state = GoState::new(9);
    let mut total = 0u64;
    let mut moves = 0u64;
    while !state.is_terminal() && moves < 60 {
        let cfg = SearchConfig {
            budget: 100,
            seed: derive_seed(3, moves),
            resign_threshold: None,
            ..Default::default()
        };
        let out = search_vmcts(&state, &evaluator, &cfg, &vet)?;
        total += out.iterations_used as u64;
        moves += 1;
        state = state.apply(out.chosen_action)?;
    }
    println!("{}", state.to_text());
    let (black, white) = state.area();
    println!(
        "after {moves} moves: black area {black}, white area {white}, score {:+.1}",
        state.score()
    );
    println!(
        "mean iterations per move {:.1} of 100",
        total as f64 / moves as f64
    );
    Ok(())
}
