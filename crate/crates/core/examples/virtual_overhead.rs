//! Time of `T` virtual selections on a 7x7 gomoku root after 30 real
//! iterations, with a least-squares line through the medians.
//!
//! cargo run --release --example virtual_overhead

use vmcts::envs::MnkState;
use vmcts::eval::RolloutEvaluator;
use vmcts::search::{search_vanilla_with_tree, SearchConfig};
use vmcts::virtual_expansion::time_virtual_steps;

fn main() -> vmcts::Result<()> {
    let cfg = SearchConfig {
        budget: 30,
        seed: 7,
        ..Default::default()
    };
    let (_, tree) =
        search_vanilla_with_tree(&MnkState::gomoku(7), &RolloutEvaluator::new(4), &cfg)?;
    let mut points = Vec::new();
    for t in [30u32, 60, 90, 120, 240, 480] {
        let mut ns: Vec<u64> = (0..501)
            .map(|_| time_virtual_steps(&tree, t, &cfg))
            .collect::<Result<_, _>>()?;
        ns.sort_unstable();
        println!("T = {t:>3}: median {:>7} ns", ns[250]);
        points.push((t as f64, ns[250] as f64));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    println!(
        "about {slope:.0} ns per virtual step, {:.0} ns fixed",
        my - slope * mx
    );
    Ok(())
}
