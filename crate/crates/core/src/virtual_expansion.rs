//! Virtual expansion, the VET termination rule and the V-MCTS driver.
//!
//! After `k` real iterations the remaining `N - k` selections are simulated
//! at the root only: Q-values stay frozen and only scratch visit counts
//! `N̂` advance. `N̂ / N` is the virtual expanded policy `π̂_k`. The search
//! stops once `k ≥ ⌈rN⌉` and `‖π̂_k − π̂_⌊k/2⌋‖ < ε`.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::envs::{Action, GameState};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::rng::SearchRng;
use crate::search::{
    argmax_index, argmax_puct, elapsed_ns, search_vanilla, selection_inputs, visit_policy, Policy,
    SearchConfig, SearchOutcome, Session, TraceRecord,
};
use crate::tree::SearchTree;

/// Scratch root visit counts `N̂` produced by virtual expansion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VirtualRootCounts {
    pub actions: Vec<Action>,
    pub counts: Vec<u32>,
    pub total: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn distance(self, a: &Policy, b: &Policy) -> f64 {
        match self {
            Norm::L1 => a.l1_distance(b),
            Norm::L2 => a.l2_distance(b),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            _ => Err(Error::Config(format!(
                "unknown norm '{s}' (expected l1 or l2)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VetConfig {
    /// Minimum fraction `r` of the budget searched before stopping is allowed.
    pub min_ratio: f64,
    pub epsilon: f64,
    pub norm: Norm,
    /// Snapshot and check every `m`-th iteration.
    pub check_every: u32,
}

impl Default for VetConfig {
    fn default() -> Self {
        VetConfig {
            min_ratio: 0.2,
            epsilon: 0.1,
            norm: Norm::L1,
            check_every: 1,
        }
    }
}

impl VetConfig {
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        VetConfig { epsilon, ..self }
    }

    /// `⌈r·N⌉`, at least 1.
    pub fn min_iterations(&self, budget: u32) -> u32 {
        // The small offset keeps products like 0.2·150 from rounding up past 30.
        ((self.min_ratio * budget as f64 - 1e-9).ceil() as u32).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_ratio > 0.0 && self.min_ratio < 1.0) {
            return Err(Error::Config("min_ratio must lie in (0, 1)".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Config("epsilon must be nonnegative".into()));
        }
        if self.check_every == 0 {
            return Err(Error::Config("check_every must be positive".into()));
        }
        Ok(())
    }
}

/// Virtual expanded policies indexed by the iteration that produced them.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PolicySnapshotLog {
    snapshots: BTreeMap<u32, Policy>,
}

impl PolicySnapshotLog {
    pub fn insert(&mut self, k: u32, policy: Policy) {
        self.snapshots.insert(k, policy);
    }

    pub fn get(&self, k: u32) -> Option<&Policy> {
        self.snapshots.get(&k)
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// The comparison iteration for `k`: `⌊k/2⌋`, rounded down to the
    /// snapshot grid when snapshots are thinned.
    pub fn half_index(k: u32, check_every: u32) -> u32 {
        (k / 2) / check_every * check_every
    }
}

/// Simulates the remaining `N - k` root selections on frozen Q-values.
///
/// The tree is not modified. Returns `N̂` with `total == budget`.
pub fn virtual_expand(
    tree: &SearchTree,
    budget: u32,
    cfg: &SearchConfig,
) -> Result<VirtualRootCounts> {
    virtual_expand_steps(tree, budget, cfg, None)
}

fn virtual_expand_steps(
    tree: &SearchTree,
    budget: u32,
    cfg: &SearchConfig,
    steps: Option<u32>,
) -> Result<VirtualRootCounts> {
    let root = tree.root();
    let inputs = selection_inputs(tree, root, cfg)?;
    let mut counts = tree.root_visits();
    let done: u32 = counts.iter().sum();
    if done > budget {
        return Err(Error::BudgetExceeded { done, budget });
    }
    let mut total = done;
    for _ in 0..steps.unwrap_or(budget - done) {
        let best = argmax_puct(&inputs, &counts, total, cfg);
        counts[best] += 1;
        total += 1;
    }
    Ok(VirtualRootCounts {
        actions: tree.root_actions(),
        counts,
        total,
    })
}

/// `π̂(a) = N̂(a) / N`.
pub fn virtual_policy(counts: &VirtualRootCounts, budget: u32) -> Result<Policy> {
    if counts.total != budget || counts.counts.iter().sum::<u32>() != budget {
        return Err(Error::CountMismatch {
            total: counts.total,
            budget,
        });
    }
    Policy::from_counts(counts.actions.clone(), &counts.counts, budget)
}

/// The VET rule: `k ≥ ⌈rN⌉` and `‖π̂_k − π̂_⌊k/2⌋‖ < ε` (strict).
pub fn vet_check(log: &PolicySnapshotLog, k: u32, vet: &VetConfig, budget: u32) -> Result<bool> {
    if k < vet.min_iterations(budget) {
        return Ok(false);
    }
    let current = log.get(k).ok_or(Error::MissingSnapshot(k))?;
    let half = PolicySnapshotLog::half_index(k, vet.check_every);
    let earlier = log.get(half).ok_or(Error::MissingSnapshot(half))?;
    Ok(vet.norm.distance(current, earlier) < vet.epsilon)
}

/// V-MCTS: vanilla iterations with a virtual-expansion snapshot after each,
/// stopping as soon as the VET rule holds.
pub fn search_vmcts<S: GameState, E: Evaluator<S> + ?Sized>(
    state: &S,
    evaluator: &E,
    cfg: &SearchConfig,
    vet: &VetConfig,
) -> Result<SearchOutcome> {
    search_vmcts_with_tree(state, evaluator, cfg, vet).map(|(o, _)| o)
}

pub fn search_vmcts_with_tree<S: GameState, E: Evaluator<S> + ?Sized>(
    state: &S,
    evaluator: &E,
    cfg: &SearchConfig,
    vet: &VetConfig,
) -> Result<(SearchOutcome, SearchTree)> {
    vet.validate()?;
    let budget = cfg.budget;
    let mut session = Session::start(state, evaluator, cfg)?;
    let mut log = PolicySnapshotLog::default();
    let mut trace = Vec::new();
    for k in 1..=budget {
        session.step()?;
        if k % vet.check_every != 0 {
            continue;
        }
        let started = Instant::now();
        let counts = virtual_expand(session.tree(), budget, cfg)?;
        let snapshot = virtual_policy(&counts, budget)?;
        let virtual_time_ns = elapsed_ns(started);
        let half = PolicySnapshotLog::half_index(k, vet.check_every);
        let deltas = log
            .get(half)
            .map(|earlier| (snapshot.l1_distance(earlier), snapshot.l2_distance(earlier)));
        log.insert(k, snapshot);
        let terminated = k < budget && deltas.is_some() && vet_check(&log, k, vet, budget)?;
        trace.push(TraceRecord {
            k,
            delta_l1: deltas.map(|d| d.0),
            delta_l2: deltas.map(|d| d.1),
            virtual_time_ns,
            terminated,
        });
        if terminated {
            let policy = log.get(k).cloned().expect("snapshot just inserted");
            return session.finish(policy, true, trace);
        }
    }
    let policy = visit_policy(session.tree())?;
    session.finish(policy, false, trace)
}

/// Spends the remaining `N - k` visits on the currently most-visited action.
pub fn greedy_expand(tree: &SearchTree, budget: u32) -> Result<Policy> {
    let visits = tree.root_visits();
    let done: u32 = visits.iter().sum();
    if done > budget {
        return Err(Error::BudgetExceeded { done, budget });
    }
    if visits.is_empty() {
        return Err(Error::NotExpanded(tree.root()));
    }
    let as_f64: Vec<f64> = visits.iter().map(|&v| v as f64).collect();
    let best = argmax_index(&as_f64);
    let mut counts = visits;
    counts[best] += budget - done;
    Policy::from_counts(tree.root_actions(), &counts, budget)
}

/// How a search forcibly stopped at `k_stop` fills in its policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Completion {
    /// `π_k`, the visit distribution so far.
    None,
    /// Remaining visits go to the current most-visited action.
    Greedy,
    /// Remaining visits are virtually expanded.
    Virtual,
}

/// Runs exactly `k_stop` real iterations and completes the policy as asked.
pub fn truncated_search<S: GameState, E: Evaluator<S> + ?Sized>(
    state: &S,
    evaluator: &E,
    cfg: &SearchConfig,
    k_stop: u32,
    completion: Completion,
) -> Result<SearchOutcome> {
    if k_stop == 0 || k_stop > cfg.budget {
        return Err(Error::Config(format!(
            "k_stop must lie in [1, {}], got {k_stop}",
            cfg.budget
        )));
    }
    let mut session = Session::start(state, evaluator, cfg)?;
    for _ in 0..k_stop {
        session.step()?;
    }
    let policy = match completion {
        Completion::None => visit_policy(session.tree())?,
        Completion::Greedy => greedy_expand(session.tree(), cfg.budget)?,
        Completion::Virtual => virtual_policy(
            &virtual_expand(session.tree(), cfg.budget, cfg)?,
            cfg.budget,
        )?,
    };
    session.finish(policy, false, Vec::new()).map(|(o, _)| o)
}

/// The vanilla-expansion ablation: stop at `k_stop` and return `π_k`.
pub fn truncated_vanilla<S: GameState, E: Evaluator<S> + ?Sized>(
    state: &S,
    evaluator: &E,
    cfg: &SearchConfig,
    k_stop: u32,
) -> Result<SearchOutcome> {
    truncated_search(state, evaluator, cfg, k_stop, Completion::None)
}

/// Runs real iterations on `tree` until the root holds `cfg.budget` visits.
pub fn continue_search<S: GameState, E: Evaluator<S> + ?Sized>(
    tree: SearchTree,
    state: &S,
    evaluator: &E,
    cfg: &SearchConfig,
    rng: SearchRng,
) -> Result<SearchTree> {
    let mut session = Session::resume(tree, state, evaluator, cfg, rng)?;
    let done = session.iterations();
    if done > cfg.budget {
        return Err(Error::BudgetExceeded {
            done,
            budget: cfg.budget,
        });
    }
    for _ in done..cfg.budget {
        session.step()?;
    }
    Ok(session.into_tree())
}

/// The full-budget policy `π_N` reachable from a partial tree; `tree` is untouched.
pub fn continue_to_oracle<S: GameState, E: Evaluator<S> + ?Sized>(
    tree: &SearchTree,
    state: &S,
    evaluator: &E,
    cfg: &SearchConfig,
    rng: SearchRng,
) -> Result<Policy> {
    let full = continue_search(tree.clone(), state, evaluator, cfg, rng)?;
    visit_policy(&full)
}

/// Time of `steps` virtual selections on top of the tree's real visits.
pub fn time_virtual_steps(tree: &SearchTree, steps: u32, cfg: &SearchConfig) -> Result<u64> {
    let done: u32 = tree.root_visits().iter().sum();
    let started = Instant::now();
    let counts = virtual_expand_steps(tree, done + steps, cfg, Some(steps))?;
    let ns = elapsed_ns(started);
    std::hint::black_box(counts);
    Ok(ns)
}

/// Which search an engine runs per move.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ExpansionMode {
    /// Full budget, no early stop.
    Vanilla,
    /// Virtual expansion with the VET rule.
    Vmcts(VetConfig),
    /// Forced stop at `k_stop`, returns `π_k`.
    Truncated { k_stop: u32 },
    /// Forced stop at `k_stop`, greedy completion.
    Greedy { k_stop: u32 },
    /// Forced stop at `k_stop`, virtual completion.
    Virtual { k_stop: u32 },
}

impl ExpansionMode {
    pub fn name(&self) -> &'static str {
        match self {
            ExpansionMode::Vanilla => "vanilla",
            ExpansionMode::Vmcts(_) => "vmcts",
            ExpansionMode::Truncated { .. } => "truncated",
            ExpansionMode::Greedy { .. } => "greedy",
            ExpansionMode::Virtual { .. } => "virtual",
        }
    }
}

pub fn run_search<S: GameState, E: Evaluator<S> + ?Sized>(
    state: &S,
    evaluator: &E,
    cfg: &SearchConfig,
    mode: &ExpansionMode,
) -> Result<SearchOutcome> {
    match *mode {
        ExpansionMode::Vanilla => search_vanilla(state, evaluator, cfg),
        ExpansionMode::Vmcts(vet) => search_vmcts(state, evaluator, cfg, &vet),
        ExpansionMode::Truncated { k_stop } => {
            truncated_search(state, evaluator, cfg, k_stop, Completion::None)
        }
        ExpansionMode::Greedy { k_stop } => {
            truncated_search(state, evaluator, cfg, k_stop, Completion::Greedy)
        }
        ExpansionMode::Virtual { k_stop } => {
            truncated_search(state, evaluator, cfg, k_stop, Completion::Virtual)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{BanditSpec, BanditState, MnkState, RewardLaw};
    use crate::eval::{BanditEvaluator, RolloutEvaluator};
    use crate::rng::rng_from_seed;
    use crate::tree::NodeStats;

    fn raw_cfg(budget: u32) -> SearchConfig {
        SearchConfig {
            budget,
            normalize_q: false,
            two_player: false,
            ..Default::default()
        }
    }

    fn edge(mean: f64, n: u32, prior: f64) -> NodeStats {
        NodeStats {
            visit_count: n,
            value_sum: mean * n as f64,
            prior,
            reward: 0.0,
            expanded: n > 0,
        }
    }

    /// Independent step-by-step reference for N̂: scores every action with
    /// the P-UCT formula written out in full and takes the first maximum.
    fn reference_counts(q: &[f64], p: &[f64], start: &[u32], budget: u32) -> Vec<u32> {
        let mut n = start.to_vec();
        while n.iter().sum::<u32>() < budget {
            let t = n.iter().sum::<u32>() as f64;
            let scores: Vec<f64> = (0..q.len())
                .map(|i| {
                    q[i] + p[i] * t.sqrt() / (1.0 + n[i] as f64)
                        * (1.25 + ((t + 19653.0) / 19652.0).ln())
                })
                .collect();
            let mut best = 0;
            for i in 1..q.len() {
                if scores[i] > scores[best] {
                    best = i;
                }
            }
            n[best] += 1;
        }
        n
    }

    #[test]
    fn full_budget_virtual_expansion_is_a_no_op() {
        let mut t = SearchTree::new();
        t.push_child(t.root(), 0, edge(0.4, 3, 0.5)).unwrap();
        t.push_child(t.root(), 1, edge(0.1, 1, 0.5)).unwrap();
        let v = virtual_expand(&t, 4, &raw_cfg(4)).unwrap();
        assert_eq!(v.counts, vec![3, 1]);
        assert_eq!(v.total, 4);
    }

    #[test]
    fn worked_two_action_expansion() {
        let mut t = SearchTree::new();
        t.push_child(t.root(), 0, edge(1.0, 1, 0.5)).unwrap();
        t.push_child(t.root(), 1, edge(0.0, 1, 0.5)).unwrap();
        let v = virtual_expand(&t, 4, &raw_cfg(4)).unwrap();
        assert_eq!(v.counts, vec![3, 1]);
        assert_eq!(
            v.counts,
            reference_counts(&[1.0, 0.0], &[0.5, 0.5], &[1, 1], 4)
        );
        assert_eq!(
            virtual_policy(&v, 4).unwrap().probabilities(),
            &[0.75, 0.25]
        );
    }

    #[test]
    fn symmetric_root_expands_round_robin() {
        for arms in 2..6u32 {
            let mut t = SearchTree::new();
            for a in 0..arms {
                t.push_child(t.root(), a as usize, edge(0.3, 2, 1.0 / arms as f64))
                    .unwrap();
            }
            let budget = 2 * arms + 3 * arms;
            let v = virtual_expand(&t, budget, &raw_cfg(budget)).unwrap();
            assert!(v.counts.iter().all(|&c| c == 5), "{:?}", v.counts);
        }
    }

    #[test]
    fn over_budget_tree_is_rejected() {
        let mut t = SearchTree::new();
        t.push_child(t.root(), 0, edge(0.5, 5, 1.0)).unwrap();
        assert_eq!(
            virtual_expand(&t, 4, &raw_cfg(4)),
            Err(Error::BudgetExceeded { done: 5, budget: 4 })
        );
        assert!(greedy_expand(&t, 4).is_err());
    }

    #[test]
    fn virtual_policy_divides_by_budget() {
        let c = VirtualRootCounts {
            actions: vec![0, 1],
            counts: vec![76, 74],
            total: 150,
        };
        let p = virtual_policy(&c, 150).unwrap();
        assert!((p.probabilities()[0] - 0.50667).abs() < 1e-5);
        assert!((p.probabilities()[0] - 76.0 / 150.0).abs() < 1e-12);
        assert!((p.probabilities()[1] - 74.0 / 150.0).abs() < 1e-12);
        let one_hot = VirtualRootCounts {
            actions: vec![3, 4],
            counts: vec![0, 9],
            total: 9,
        };
        assert_eq!(
            virtual_policy(&one_hot, 9).unwrap().probabilities(),
            &[0.0, 1.0]
        );
        assert_eq!(
            virtual_policy(&c, 151),
            Err(Error::CountMismatch {
                total: 150,
                budget: 151
            })
        );
    }

    fn log_with(k: u32, now: &[f64], half: &[f64]) -> PolicySnapshotLog {
        let mut log = PolicySnapshotLog::default();
        log.insert(k, Policy::new(vec![0, 1], now.to_vec()).unwrap());
        log.insert(k / 2, Policy::new(vec![0, 1], half.to_vec()).unwrap());
        log
    }

    #[test]
    fn vet_uses_strict_inequality() {
        let vet = VetConfig {
            min_ratio: 0.2,
            epsilon: 0.1,
            norm: Norm::L1,
            check_every: 1,
        };
        let log = log_with(40, &[0.75, 0.25], &[0.70, 0.30]);
        // The distance is 0.1 up to rounding; either way it is not < 0.1 - 1e-12.
        let d = log.get(40).unwrap().l1_distance(log.get(20).unwrap());
        assert!((d - 0.1).abs() < 1e-12);
        let strict = VetConfig { epsilon: d, ..vet };
        assert!(!vet_check(&log, 40, &strict, 150).unwrap());
    }

    #[test]
    fn vet_identical_snapshots_and_zero_epsilon() {
        let log = log_with(40, &[0.6, 0.4], &[0.6, 0.4]);
        let vet = VetConfig::default();
        assert!(vet_check(&log, 40, &vet, 150).unwrap());
        assert!(!vet_check(&log, 40, &vet.with_epsilon(0.0), 150).unwrap());
        // Below the floor ⌈0.2·150⌉ = 30 the rule never fires.
        let early = log_with(20, &[0.6, 0.4], &[0.6, 0.4]);
        assert!(!vet_check(&early, 20, &vet, 150).unwrap());
        assert_eq!(
            vet_check(&PolicySnapshotLog::default(), 40, &vet, 150),
            Err(Error::MissingSnapshot(40))
        );
    }

    #[test]
    fn min_iterations_rounds_up() {
        let vet = VetConfig::default();
        assert_eq!(vet.min_iterations(150), 30);
        assert_eq!(vet.min_iterations(151), 31);
        assert_eq!(
            VetConfig {
                min_ratio: 0.01,
                ..vet
            }
            .min_iterations(50),
            1
        );
        assert_eq!(PolicySnapshotLog::half_index(31, 1), 15);
        assert_eq!(PolicySnapshotLog::half_index(40, 3), 18);
    }

    #[test]
    fn greedy_completion_formula() {
        let mut t = SearchTree::new();
        t.push_child(t.root(), 0, edge(0.1, 2, 0.5)).unwrap();
        t.push_child(t.root(), 1, edge(0.9, 1, 0.5)).unwrap();
        assert_eq!(greedy_expand(&t, 5).unwrap().probabilities(), &[0.8, 0.2]);
        assert_eq!(greedy_expand(&t, 3).unwrap(), visit_policy(&t).unwrap());
        let mut u = SearchTree::new();
        for a in 0..3 {
            u.push_child(u.root(), a, edge(0.0, 1, 1.0 / 3.0)).unwrap();
        }
        let p = greedy_expand(&u, 6).unwrap();
        assert_eq!(p.probabilities(), &[4.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);
    }

    #[test]
    fn huge_epsilon_stops_at_the_floor() {
        let e = RolloutEvaluator::new(2);
        let cfg = SearchConfig {
            budget: 60,
            seed: 3,
            ..Default::default()
        };
        let vet = VetConfig::default().with_epsilon(2.5);
        let out = search_vmcts(&MnkState::gomoku(7), &e, &cfg, &vet).unwrap();
        assert!(out.terminated_early);
        assert_eq!(out.iterations_used, 12);
        assert_eq!(out.trace.last().unwrap().k, 12);
        assert!(out.trace.last().unwrap().terminated);
    }

    #[test]
    fn zero_epsilon_matches_vanilla() {
        let e = RolloutEvaluator::new(2);
        for seed in 0..5 {
            let cfg = SearchConfig {
                budget: 40,
                seed,
                ..Default::default()
            };
            let v = search_vanilla(&MnkState::tictactoe(), &e, &cfg).unwrap();
            let w = search_vmcts(
                &MnkState::tictactoe(),
                &e,
                &cfg,
                &VetConfig::default().with_epsilon(0.0),
            )
            .unwrap();
            assert!(v.same_decision(&w));
            assert_eq!(w.trace.len(), 40);
        }
    }

    #[test]
    fn thinned_checks_use_grid_snapshots() {
        let e = RolloutEvaluator::new(2);
        let cfg = SearchConfig {
            budget: 60,
            seed: 1,
            ..Default::default()
        };
        let vet = VetConfig {
            check_every: 4,
            epsilon: 5.0,
            ..Default::default()
        };
        let out = search_vmcts(&MnkState::gomoku(7), &e, &cfg, &vet).unwrap();
        assert!(out.trace.iter().all(|r| r.k % 4 == 0));
        // First grid point at or above ⌈0.2·60⌉ = 12 with a half snapshot: k = 12 (half 4).
        assert_eq!(out.iterations_used, 12);
    }

    #[test]
    fn oracle_continuation_leaves_tree_alone() {
        let spec = BanditSpec::uniform(vec![0.7, 0.6, 0.2], RewardLaw::Bernoulli).unwrap();
        let state = BanditState::new(spec);
        let cfg = SearchConfig::bandit(50).with_seed(9);
        let vet = VetConfig::default();
        let (out, tree) = search_vmcts_with_tree(&state, &BanditEvaluator, &cfg, &vet).unwrap();
        let before = tree.clone();
        let oracle =
            continue_to_oracle(&tree, &state, &BanditEvaluator, &cfg, rng_from_seed(1)).unwrap();
        assert_eq!(tree, before);
        assert_eq!(oracle.len(), out.policy.len());
        let full = continue_search(tree, &state, &BanditEvaluator, &cfg, rng_from_seed(1)).unwrap();
        assert_eq!(full.root_visits().iter().sum::<u32>(), 50);
        assert!(full.check_visit_conservation());
    }

    #[test]
    fn truncated_modes_stop_at_k() {
        let e = RolloutEvaluator::new(2);
        let cfg = SearchConfig {
            budget: 50,
            seed: 2,
            ..Default::default()
        };
        let s = MnkState::gomoku(7);
        let plain = truncated_vanilla(&s, &e, &cfg, 10).unwrap();
        assert_eq!(plain.iterations_used, 10);
        assert_eq!(plain.root_visits.iter().sum::<u32>(), 10);
        let greedy = truncated_search(&s, &e, &cfg, 10, Completion::Greedy).unwrap();
        let virt = truncated_search(&s, &e, &cfg, 10, Completion::Virtual).unwrap();
        // Same seed, same real iterations.
        assert_eq!(greedy.root_visits, plain.root_visits);
        assert_eq!(virt.root_visits, plain.root_visits);
        assert_eq!(greedy.chosen_action, plain.chosen_action);
        assert!(truncated_vanilla(&s, &e, &cfg, 0).is_err());
        assert!(truncated_vanilla(&s, &e, &cfg, 51).is_err());
    }
}
