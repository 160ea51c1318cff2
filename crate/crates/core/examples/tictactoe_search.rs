//! One V-MCTS search on a tic-tac-toe position, compared with the exact
//! minimax value of every move.
//!
//! cargo run --release --example tictactoe_search

use vmcts::envs::{GameState, MnkState, TextBoard};
use vmcts::eval::{MinimaxEvaluator, RolloutEvaluator};
use vmcts::search::SearchConfig;
use vmcts::virtual_expansion::{search_vmcts, VetConfig};

fn main() -> vmcts::Result<()> {
    // X to move can win at c1.
    let state = MnkState::from_text("XX.\nOO.\n...\n")?;
    println!("{}", state.to_text());

    let cfg = SearchConfig {
        budget: 200,
        seed: 1,
        ..Default::default()
    };
    let out = search_vmcts(
        &state,
        &RolloutEvaluator::new(8),
        &cfg,
        &VetConfig::default(),
    )?;
    println!(
        "rollouts: {} after {}/{} iterations (stopped early: {})",
        state.format_action(out.chosen_action),
        out.iterations_used,
        cfg.budget,
        out.terminated_early
    );
    for (a, p) in out.policy.actions().iter().zip(out.policy.probabilities()) {
        println!("  {:>3} {:.3}", state.format_action(*a), p);
    }

    let exact = MinimaxEvaluator::solve(&state, 100_000)?;
    let out = search_vmcts(&state, &exact, &cfg, &VetConfig::default())?;
    println!(
        "minimax: {} after {} iterations, {} positions solved",
        state.format_action(out.chosen_action),
        out.iterations_used,
        exact.positions()
    );
    for a in state.legal_actions() {
        let v = exact.value(&state.apply(a)?)?;
        println!("  {:>3} value for X {v:+.0}", state.format_action(a));
    }
    Ok(())
}
