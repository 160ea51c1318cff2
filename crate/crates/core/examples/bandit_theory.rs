//! Checks the sample-complexity bounds on the default 5-arm bandit and
//! prints one line per claim.
//!
//! cargo run --release --example bandit_theory -- [trials] [seed]

use vmcts::theory::{verify_all, TheoryConfig};

fn main() -> vmcts::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = TheoryConfig {
        trials,
        seed,
        ..Default::default()
    };
    let report = verify_all(&cfg)?;
    for c in &report.claims {
        println!(
            "{:<10} {:?}  freq {:.5} ({}/{})  bound {:.6}  eps_k {:.4}  eps_N {:.4}{}",
            c.claim,
            c.status,
            c.empirical_frequency,
            c.events,
            c.trials,
            c.theoretical_bound,
            c.epsilon_k,
            c.epsilon_n,
            c.trigger_rate
                .map(|r| format!("  trigger rate {r:.3}"))
                .unwrap_or_default()
        );
    }
    if let Some(a) = &report.adaptivity {
        println!(
            "adaptivity easy k {:.1} ± {:.1}, hard k {:.1} ± {:.1}, t {:.2}, p {:.2e}",
            a.easy_mean_k, a.easy_sd_k, a.hard_mean_k, a.hard_sd_k, a.t_statistic, a.p_value
        );
    }
    Ok(())
}
