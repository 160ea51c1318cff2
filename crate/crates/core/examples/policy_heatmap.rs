//! Prints the early policy and the full-budget policy of one search side by
//! side as text heatmaps (per-mille).
//!
//! cargo run --release --example policy_heatmap

use vmcts::cli::{search_only, EnvKind, RunConfig};

fn print_grid(title: &str, probs: &[f64], width: usize) {
    println!("{title}");
    for row in probs.chunks(width) {
        let cells: Vec<String> = row
            .iter()
            .map(|p| format!("{:>4}", (p * 1000.0).round() as u32))
            .collect();
        println!("  {}", cells.join(""));
    }
}

fn main() -> vmcts::Result<()> {
    let cfg = RunConfig {
        env: EnvKind::Gomoku,
        n: 1500,
        rollouts: 16,
        // O must block the open three at d3 or d7.
        moves: Some("d4 a1 d5 a2 d6".into()),
        ..Default::default()
    };
    let report = search_only(&cfg)?;
    let h = &report.heatmap;
    println!(
        "stopped at k = {} of {} (early: {}), plays {}",
        h.iterations_used, h.budget, h.terminated_early, h.chosen_action
    );
    print_grid("early policy", &h.pi_hat_k, h.width);
    print_grid("full-budget policy", &h.pi_n, h.width);
    let l1: f64 = h
        .pi_hat_k
        .iter()
        .zip(&h.pi_n)
        .map(|(a, b)| (a - b).abs())
        .sum();
    println!("L1 distance {l1:.3}");
    Ok(())
}
