//! Mean stopping iteration on an easy bandit (one clearly best arm) and a
//! hard one (near-equal arms) for a few tolerances.
//!
//! cargo run --release --example adaptivity

use vmcts::theory::{adaptivity_probe, easy_instance, hard_instance, TheoryConfig};

fn main() -> vmcts::Result<()> {
    let cfg = TheoryConfig {
        trials: 500,
        ..Default::default()
    };
    println!("eps    easy k        hard k        p");
    for eps in [0.05, 0.1, 0.2] {
        let a = adaptivity_probe(&easy_instance(), &hard_instance(), &cfg, eps)?;
        println!(
            "{eps:<5}  {:>5.1} ± {:<5.1}  {:>5.1} ± {:<5.1}  {:.1e}",
            a.easy_mean_k, a.easy_sd_k, a.hard_mean_k, a.hard_sd_k, a.p_value
        );
    }
    Ok(())
}
