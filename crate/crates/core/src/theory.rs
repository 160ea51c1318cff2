//! Monte-Carlo checks of the sample-complexity guarantees on bandits.
//!
//! Each check runs independent seeded trials of the bandit search and
//! compares an empirical event frequency against a closed-form lower bound.
//! Bounds are compared with `>=` and no slack.
//!
//! The guarantees are stated for iid samples, while the search picks arms
//! adaptively, so a weak arm may only be pulled once or twice. Instances
//! used here have bounded reward noise to keep that gap visible but small.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::envs::{BanditSpec, BanditState, RewardLaw};
use crate::error::{Error, Result};
use crate::eval::BanditEvaluator;
use crate::rng::{derive_seed, rng_from_seed};
use crate::search::{argmax_index, visit_policy, SearchConfig, Session};
use crate::virtual_expansion::{
    continue_search, search_vmcts_with_tree, virtual_expand, virtual_policy, Norm, VetConfig,
};

/// `ε_k = sqrt(ln(100 k² / δ) / (2k))`.
pub fn epsilon_k(k: u32, delta: f64) -> f64 {
    let k = k as f64;
    ((100.0 * k * k / delta).ln() / (2.0 * k)).sqrt()
}

/// Lower bound on the probability that every frozen value estimate is within `ε_k`.
pub fn value_consistency_bound(budget: u32, ratio: f64, delta: f64, arms: usize) -> f64 {
    let n = budget as f64;
    1.0 - std::f64::consts::E * delta * arms as f64 / (50.0 * ratio * ratio * n * n)
}

/// Lower bound on the probability that the chosen arm's value matches the best arm's.
pub fn best_action_bound(k: u32, budget: u32, delta: f64) -> f64 {
    let k = k as f64;
    let n = budget as f64;
    1.0 - 2.0
        * (delta / (50.0 * k * k) * (1.0 / (1.61 * k.sqrt())).exp()
            + delta / (50.0 * n * n) * (1.0 / n).exp())
}

/// Lower bound on the probability that `‖π_N − π̂_k‖₁ < 3ε` once the rule fires.
pub fn policy_error_bound(budget: u32, ratio: f64, delta: f64, arms: usize) -> f64 {
    let n = budget as f64;
    1.0 - std::f64::consts::E * delta * arms as f64 / (50.0 * n * n) * (1.0 + 4.0 / (ratio * ratio))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryConfig {
    pub spec: BanditSpec,
    pub budget: u32,
    pub min_ratio: f64,
    pub delta: f64,
    pub trials: u32,
    pub seed: u64,
    /// Tolerance used by the early-termination checks.
    pub epsilon: f64,
    pub norm: Norm,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig {
            spec: default_instance(),
            budget: 150,
            min_ratio: 0.2,
            delta: 0.1,
            trials: 1000,
            seed: 0,
            epsilon: 0.1,
            norm: Norm::L1,
        }
    }
}

/// Five evenly spread arms with uniform priors and bounded uniform rewards.
pub fn default_instance() -> BanditSpec {
    BanditSpec::uniform(vec![0.9, 0.75, 0.6, 0.4, 0.25], RewardLaw::UniformBounded)
        .expect("valid instance")
}

/// One dominant arm, gap 0.5 to the rest.
pub fn easy_instance() -> BanditSpec {
    BanditSpec::uniform(vec![0.8, 0.3, 0.3, 0.3, 0.3], RewardLaw::Bernoulli)
        .expect("valid instance")
}

/// Near-equal arms, gap 0.05.
pub fn hard_instance() -> BanditSpec {
    BanditSpec::uniform(vec![0.55, 0.5, 0.5, 0.5, 0.5], RewardLaw::Bernoulli)
        .expect("valid instance")
}

impl TheoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 100 {
            return Err(Error::Config(
                "theory checks need at least 100 trials".into(),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("delta must lie in (0, 1)".into()));
        }
        self.vet().validate()?;
        self.search_config(0).validate()
    }

    /// `k = ⌈rN⌉`.
    pub fn k(&self) -> u32 {
        self.vet().min_iterations(self.budget)
    }

    pub fn vet(&self) -> VetConfig {
        VetConfig {
            min_ratio: self.min_ratio,
            epsilon: self.epsilon,
            norm: self.norm,
            check_every: 1,
        }
    }

    fn search_config(&self, trial: u32) -> SearchConfig {
        SearchConfig::bandit(self.budget).with_seed(derive_seed(self.seed, trial as u64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub claim: String,
    /// Trials the frequency is taken over (triggering trials for conditional claims).
    pub trials: u32,
    pub events: u32,
    pub empirical_frequency: f64,
    pub theoretical_bound: f64,
    pub epsilon_k: f64,
    pub epsilon_n: f64,
    pub status: ClaimStatus,
    /// Set when the bound is vacuous (not positive) at this configuration.
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trigger_rate: Option<f64>,
}

impl ClaimRecord {
    fn new(claim: &str, cfg: &TheoryConfig, trials: u32, events: u32, bound: f64) -> Self {
        let (frequency, status) = if trials == 0 {
            (0.0, ClaimStatus::Inconclusive)
        } else {
            let f = events as f64 / trials as f64;
            (
                f,
                if f >= bound {
                    ClaimStatus::Pass
                } else {
                    ClaimStatus::Fail
                },
            )
        };
        ClaimRecord {
            claim: claim.to_string(),
            trials,
            events,
            empirical_frequency: frequency,
            theoretical_bound: bound,
            epsilon_k: epsilon_k(cfg.k(), cfg.delta),
            epsilon_n: epsilon_k(cfg.budget, cfg.delta),
            status,
            degenerate: bound <= 0.0,
            trigger_rate: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == ClaimStatus::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptivityReport {
    pub trials: u32,
    pub easy_mean_k: f64,
    pub easy_sd_k: f64,
    pub hard_mean_k: f64,
    pub hard_sd_k: f64,
    /// Welch statistic for `mean(hard) - mean(easy)`.
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    /// One-sided p-value for "easy terminates earlier".
    pub p_value: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub config: TheoryConfig,
    pub claims: Vec<ClaimRecord>,
    pub adaptivity: Option<AdaptivityReport>,
}

impl TheoryReport {
    /// True when some claim with a non-vacuous bound failed.
    pub fn any_failure(&self) -> bool {
        self.claims
            .iter()
            .any(|c| c.status == ClaimStatus::Fail && !c.degenerate)
            || self.adaptivity.as_ref().is_some_and(|a| !a.pass)
    }
}

/// Per-trial events of the fixed-`k` checks.
#[derive(Clone, Copy, Debug, PartialEq)]
struct FixedKTrial {
    all_visited: bool,
    values_consistent: bool,
    best_identified: bool,
}

fn fixed_k_trial(cfg: &TheoryConfig, trial: u32) -> Result<FixedKTrial> {
    let state = BanditState::new(cfg.spec.clone());
    let scfg = cfg.search_config(trial);
    let mut session = Session::start(&state, &BanditEvaluator, &scfg)?;
    let k = cfg.k();
    for _ in 0..k {
        session.step()?;
    }
    let tree = session.into_tree();
    // Virtual steps never move Q; running them keeps the check faithful to
    // the procedure and asserts the counts add up.
    let counts = virtual_expand(&tree, cfg.budget, &scfg)?;
    virtual_policy(&counts, cfg.budget)?;

    let eps_k = epsilon_k(k, cfg.delta);
    let eps_n = epsilon_k(cfg.budget, cfg.delta);
    let default_q = tree.unvisited_q_default(tree.root(), false)?;
    let frozen: Vec<f64> = tree
        .root_means()
        .iter()
        .map(|m| m.unwrap_or(default_q))
        .collect();
    let all_visited = tree.root_visits().iter().all(|&n| n >= 1);
    let values_consistent = frozen
        .iter()
        .zip(&cfg.spec.means)
        .all(|(q_hat, q)| (q_hat - q).abs() < eps_k);

    let star = argmax_index(&frozen);
    let best_arm = argmax_index(&cfg.spec.means);
    let full = continue_search(
        tree,
        &state,
        &BanditEvaluator,
        &scfg,
        rng_from_seed(derive_seed(scfg.seed, 1)),
    )?;
    let best_full = full.root_means()[best_arm].unwrap_or(default_q);
    let best_identified = (frozen[star] - best_full).abs() < eps_k + eps_n;
    Ok(FixedKTrial {
        all_visited,
        values_consistent,
        best_identified,
    })
}

fn fixed_k_trials(cfg: &TheoryConfig) -> Result<Vec<FixedKTrial>> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| fixed_k_trial(cfg, t))
        .collect()
}

fn count(trials: &[FixedKTrial], f: impl Fn(&FixedKTrial) -> bool) -> u32 {
    trials.iter().filter(|t| f(t)).count() as u32
}

fn all_arms_visited_record(cfg: &TheoryConfig, trials: &[FixedKTrial]) -> ClaimRecord {
    ClaimRecord::new(
        "all_arms_visited",
        cfg,
        trials.len() as u32,
        count(trials, |t| t.all_visited),
        1.0,
    )
}

fn value_consistency_record(cfg: &TheoryConfig, trials: &[FixedKTrial]) -> ClaimRecord {
    let bound = value_consistency_bound(cfg.budget, cfg.min_ratio, cfg.delta, cfg.spec.arms());
    ClaimRecord::new(
        "value_consistency",
        cfg,
        trials.len() as u32,
        count(trials, |t| t.values_consistent),
        bound,
    )
}

fn best_action_record(cfg: &TheoryConfig, trials: &[FixedKTrial]) -> ClaimRecord {
    let bound = best_action_bound(cfg.k(), cfg.budget, cfg.delta);
    ClaimRecord::new(
        "best_action",
        cfg,
        trials.len() as u32,
        count(trials, |t| t.best_identified),
        bound,
    )
}

/// Fraction of trials in which every arm has been visited after `⌈rN⌉` steps.
pub fn verify_all_arms_visited(cfg: &TheoryConfig) -> Result<ClaimRecord> {
    Ok(all_arms_visited_record(cfg, &fixed_k_trials(cfg)?))
}

pub fn verify_value_consistency(cfg: &TheoryConfig) -> Result<ClaimRecord> {
    Ok(value_consistency_record(cfg, &fixed_k_trials(cfg)?))
}

pub fn verify_best_action(cfg: &TheoryConfig) -> Result<ClaimRecord> {
    Ok(best_action_record(cfg, &fixed_k_trials(cfg)?))
}

/// Result of one early-terminating bandit search.
#[derive(Clone, Copy, Debug, PartialEq)]
struct VmctsTrial {
    k: u32,
    triggered: bool,
    within: bool,
}

fn vmcts_trial(
    cfg: &TheoryConfig,
    spec: &BanditSpec,
    trial: u32,
    epsilon: f64,
) -> Result<VmctsTrial> {
    let state = BanditState::new(spec.clone());
    let scfg = cfg.search_config(trial);
    let vet = cfg.vet().with_epsilon(epsilon);
    let (out, tree) = search_vmcts_with_tree(&state, &BanditEvaluator, &scfg, &vet)?;
    if !out.terminated_early {
        return Ok(VmctsTrial {
            k: out.iterations_used,
            triggered: false,
            within: false,
        });
    }
    let full = continue_search(
        tree,
        &state,
        &BanditEvaluator,
        &scfg,
        rng_from_seed(derive_seed(scfg.seed, 1)),
    )?;
    let oracle = visit_policy(&full)?;
    Ok(VmctsTrial {
        k: out.iterations_used,
        triggered: true,
        within: oracle.l1_distance(&out.policy) < 3.0 * epsilon,
    })
}

/// Conditional on the rule firing, how often the early policy is within `3ε` of `π_N`.
pub fn verify_policy_error(cfg: &TheoryConfig, epsilon: f64) -> Result<ClaimRecord> {
    cfg.validate()?;
    let trials: Vec<VmctsTrial> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| vmcts_trial(cfg, &cfg.spec, t, epsilon))
        .collect::<Result<_>>()?;
    let triggered = trials.iter().filter(|t| t.triggered).count() as u32;
    let within = trials.iter().filter(|t| t.within).count() as u32;
    let bound = policy_error_bound(cfg.budget, cfg.min_ratio, cfg.delta, cfg.spec.arms());
    let mut record = ClaimRecord::new("policy_error", cfg, triggered, within, bound);
    record.trigger_rate = Some(triggered as f64 / cfg.trials as f64);
    Ok(record)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Compares mean termination iterations on an easy and a hard instance.
pub fn adaptivity_probe(
    easy: &BanditSpec,
    hard: &BanditSpec,
    cfg: &TheoryConfig,
    epsilon: f64,
) -> Result<AdaptivityReport> {
    cfg.validate()?;
    let run = |spec: &BanditSpec, salt: u64| -> Result<Vec<f64>> {
        let shifted = TheoryConfig {
            seed: derive_seed(cfg.seed, salt),
            ..cfg.clone()
        };
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| vmcts_trial_k(&shifted, spec, t, epsilon))
            .collect()
    };
    let easy_k = run(easy, 0xea5e)?;
    let hard_k = run(hard, 0x4a4d)?;
    let (em, es) = mean_sd(&easy_k);
    let (hm, hs) = mean_sd(&hard_k);
    let n = cfg.trials as f64;
    let (ve, vh) = (es * es / n, hs * hs / n);
    let se = (ve + vh).sqrt();
    let (t, df, p) = if se == 0.0 {
        let p = if hm > em { 0.0 } else { 1.0 };
        (if hm > em { f64::INFINITY } else { 0.0 }, 2.0 * n - 2.0, p)
    } else {
        let t = (hm - em) / se;
        let df = (ve + vh).powi(2) / (ve * ve / (n - 1.0) + vh * vh / (n - 1.0));
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Config(e.to_string()))?;
        (t, df, 1.0 - dist.cdf(t))
    };
    Ok(AdaptivityReport {
        trials: cfg.trials,
        easy_mean_k: em,
        easy_sd_k: es,
        hard_mean_k: hm,
        hard_sd_k: hs,
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        pass: em < hm && p < 0.05,
    })
}

fn vmcts_trial_k(cfg: &TheoryConfig, spec: &BanditSpec, trial: u32, epsilon: f64) -> Result<f64> {
    let state = BanditState::new(spec.clone());
    let scfg = cfg.search_config(trial);
    let vet = cfg.vet().with_epsilon(epsilon);
    let (out, _) = search_vmcts_with_tree(&state, &BanditEvaluator, &scfg, &vet)?;
    Ok(out.iterations_used as f64)
}

/// Runs every check; the adaptivity probe uses the built-in easy and hard instances.
pub fn verify_all(cfg: &TheoryConfig) -> Result<TheoryReport> {
    let fixed = fixed_k_trials(cfg)?;
    let claims = vec![
        all_arms_visited_record(cfg, &fixed),
        value_consistency_record(cfg, &fixed),
        best_action_record(cfg, &fixed),
        verify_policy_error(cfg, cfg.epsilon)?,
    ];
    let adaptivity = adaptivity_probe(&easy_instance(), &hard_instance(), cfg, cfg.epsilon)?;
    Ok(TheoryReport {
        config: cfg.clone(),
        claims,
        adaptivity: Some(adaptivity),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from 40-digit arithmetic.
    #[test]
    fn epsilon_matches_reference() {
        let cases = [
            (1, 0.01, 2.145_966_026_289_347),
            (1, 1.0, 1.517_427_129_385_146_4),
            (30, 0.1, 0.478_019_351_810_266_6),
            (150, 0.1, 0.237_550_176_223_709_6),
            (1, 0.5, 1.627_623_630_718_729_3),
            (7, 0.05, 0.906_040_158_273_221_9),
        ];
        for (k, d, want) in cases {
            assert!((epsilon_k(k, d) - want).abs() < 1e-12, "k={k} delta={d}");
        }
    }

    #[test]
    fn epsilon_halves_shrink() {
        for d in [0.01, 0.1, 0.5, 0.99] {
            for k in 1..500 {
                assert!(epsilon_k(2 * k, d) < epsilon_k(k, d));
            }
        }
    }

    #[test]
    fn bounds_match_reference() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(
            value_consistency_bound(150, 0.2, 0.1, 5),
            0.999_969_796_868_572_7
        ));
        assert!(close(
            best_action_bound(30, 150, 0.1),
            0.999_994_842_899_723_9
        ));
        assert!(close(
            policy_error_bound(150, 0.2, 0.1, 5),
            0.999_877_979_349_033_6
        ));
        assert!(close(
            value_consistency_bound(50, 0.3, 0.05, 3),
            0.999_963_756_242_287_2
        ));
        assert!(close(
            best_action_bound(15, 50, 0.05),
            0.999_988_748_750_250_8
        ));
        assert!(close(
            policy_error_bound(50, 0.3, 0.05, 3),
            0.999_851_763_030_954_7
        ));
    }

    fn small(spec: BanditSpec) -> TheoryConfig {
        TheoryConfig {
            spec,
            budget: 40,
            trials: 100,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn degenerate_bandit_is_always_consistent() {
        let spec = BanditSpec::uniform(vec![1.0, 0.0], RewardLaw::UniformBounded).unwrap();
        for budget in [10, 40] {
            let cfg = TheoryConfig {
                budget,
                ..small(spec.clone())
            };
            let r = verify_value_consistency(&cfg).unwrap();
            assert_eq!(r.events, r.trials);
            assert!(r.passed());
        }
    }

    #[test]
    fn checks_are_reproducible() {
        let cfg = small(default_instance());
        assert_eq!(
            verify_best_action(&cfg).unwrap(),
            verify_best_action(&cfg).unwrap()
        );
        assert_eq!(
            verify_policy_error(&cfg, 0.1).unwrap(),
            verify_policy_error(&cfg, 0.1).unwrap()
        );
    }

    #[test]
    fn no_trigger_is_inconclusive() {
        let r = verify_policy_error(&small(default_instance()), 0.0).unwrap();
        assert_eq!(r.status, ClaimStatus::Inconclusive);
        assert_eq!(r.trigger_rate, Some(0.0));
    }

    #[test]
    fn too_few_trials_rejected() {
        let cfg = TheoryConfig {
            trials: 10,
            ..Default::default()
        };
        assert!(verify_all_arms_visited(&cfg).is_err());
    }

    #[test]
    fn vacuous_bounds_are_degenerate() {
        let cfg = small(default_instance());
        let rec = ClaimRecord::new("x", &cfg, 10, 0, -0.5);
        assert!(rec.degenerate);
        let report = TheoryReport {
            config: cfg,
            claims: vec![rec],
            adaptivity: None,
        };
        assert!(!report.any_failure());
    }
}
