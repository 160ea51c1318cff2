//! A seeded match through the library API, written as CSV to stdout.
//!
//! cargo run --release --example match_runner -- [games]

use vmcts::cli::{match_only, EnvKind, ExpansionKind, RunConfig};

fn main() -> vmcts::Result<()> {
    let games = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);
    let cfg = RunConfig {
        env: EnvKind::Gomoku,
        n: 100,
        rollouts: 8,
        games,
        expansion: ExpansionKind::Vmcts,
        opponent_expansion: ExpansionKind::Vanilla,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..Default::default()
    };
    let report = match_only(&cfg)?;
    print!("{}", report.to_csv());
    let s = &report.summary;
    eprintln!(
        "V-MCTS score {:.3} ± {:.3}, budget {:.1} ± {:.1} vs {:.1}",
        s.win_rate, s.win_rate_stderr, s.budget_a_mean, s.budget_a_sd, s.budget_b_mean
    );
    Ok(())
}
