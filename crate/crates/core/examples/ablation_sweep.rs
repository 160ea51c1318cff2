//! Sweeps the termination tolerance and then the completion mode of a
//! search forcibly stopped at 20% of the budget.
//!
//! cargo run --release --example ablation_sweep

use vmcts::cli::{sweep_only, EnvKind, ExpansionKind, RunConfig, SweepAxis};

fn main() -> vmcts::Result<()> {
    let base = RunConfig {
        env: EnvKind::Gomoku,
        n: 100,
        rollouts: 8,
        games: 20,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..Default::default()
    };
    let eps = RunConfig {
        sweep_axis: Some(SweepAxis::Epsilon),
        sweep_grid: ["0", "0.05", "0.1", "0.2", "0.5"]
            .map(String::from)
            .to_vec(),
        ..base.clone()
    };
    print!("{}", sweep_only(&eps)?.summary_csv());

    let modes = RunConfig {
        sweep_axis: Some(SweepAxis::ExpansionMode),
        sweep_grid: ["truncated", "greedy", "virtual"]
            .map(String::from)
            .to_vec(),
        opponent_expansion: ExpansionKind::Vanilla,
        ..base
    };
    print!("{}", sweep_only(&modes)?.summary_csv());
    Ok(())
}
