//! Vanilla P-UCT Monte-Carlo tree search and the root mechanics shared with
//! the virtual-expansion driver: Dirichlet noise, temperature sampling and
//! resignation.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::envs::{Action, GameState, Player};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::rng::{rng_from_seed, SearchRng};
use crate::tree::{NodeId, SearchTree};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Full iteration budget `N`.
    pub budget: u32,
    pub c1: f64,
    pub c2: f64,
    pub discount: f64,
    pub two_player: bool,
    pub dirichlet_alpha: f64,
    /// Weight of the Dirichlet sample in the root priors.
    pub noise_fraction: f64,
    /// Whether root noise is applied at all (off in evaluation mode).
    pub root_noise: bool,
    /// Typical number of legal moves the noise `alpha` was tuned for; the
    /// effective alpha is scaled by `reference / current`. `None` disables scaling.
    pub reference_legal_moves: Option<usize>,
    /// Moves before this index sample from the policy; later moves take the argmax.
    pub temperature_moves: usize,
    /// Resign when every visited root edge has a raw mean below this value.
    pub resign_threshold: Option<f64>,
    pub seed: u64,
    /// Min-max normalize Q into `[0, 1]` inside the selection rule.
    pub normalize_q: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 150,
            c1: 1.25,
            c2: 19652.0,
            discount: 1.0,
            two_player: true,
            dirichlet_alpha: 0.3,
            noise_fraction: 0.25,
            root_noise: false,
            reference_legal_moves: None,
            temperature_moves: 0,
            resign_threshold: Some(-0.9),
            seed: 0,
            normalize_q: true,
        }
    }
}

impl SearchConfig {
    /// Evaluation-mode defaults for a single-agent bandit: values are already
    /// in `[0, 1]`, so no normalization and no resignation.
    pub fn bandit(budget: u32) -> Self {
        SearchConfig {
            budget,
            two_player: false,
            resign_threshold: None,
            normalize_q: false,
            ..Default::default()
        }
    }

    /// Self-play mode: root noise on and sampling for the first 16 moves.
    pub fn self_play(self) -> Self {
        SearchConfig {
            root_noise: true,
            temperature_moves: 16,
            ..self
        }
    }

    pub fn with_budget(self, budget: u32) -> Self {
        SearchConfig { budget, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SearchConfig { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.budget < 2 {
            return bad("budget must be at least 2");
        }
        if !(self.c1 > 0.0) || !(self.c2 > 0.0) {
            return bad("c1 and c2 must be positive");
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad("discount must lie in (0, 1]");
        }
        if !(self.dirichlet_alpha > 0.0) {
            return bad("dirichlet_alpha must be positive");
        }
        if !(0.0..=1.0).contains(&self.noise_fraction) {
            return bad("noise_fraction must lie in [0, 1]");
        }
        if let Some(t) = self.resign_threshold {
            if !(-1.0..0.0).contains(&t) {
                return bad("resign_threshold must lie in [-1, 0)");
            }
        }
        Ok(())
    }
}

/// A distribution over an ordered list of actions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Policy {
    actions: Vec<Action>,
    probabilities: Vec<f64>,
}

impl Policy {
    pub fn new(actions: Vec<Action>, probabilities: Vec<f64>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::EmptyPolicy);
        }
        if actions.len() != probabilities.len() {
            return Err(Error::Config(
                "policy support and probabilities differ in length".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "policy does not sum to one ({total})"
            )));
        }
        Ok(Policy {
            actions,
            probabilities,
        })
    }

    /// `counts[i] / denominator` for every action.
    pub fn from_counts(actions: Vec<Action>, counts: &[u32], denominator: u32) -> Result<Self> {
        let probabilities = counts
            .iter()
            .map(|&c| c as f64 / denominator as f64)
            .collect();
        Policy::new(actions, probabilities)
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn probability(&self, action: Action) -> f64 {
        self.actions
            .iter()
            .position(|&a| a == action)
            .map_or(0.0, |i| self.probabilities[i])
    }

    /// Most probable action; ties go to the earliest entry.
    pub fn argmax(&self) -> Action {
        self.actions[argmax_index(&self.probabilities)]
    }

    pub fn l1_distance(&self, other: &Policy) -> f64 {
        self.paired(other).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn l2_distance(&self, other: &Policy) -> f64 {
        self.paired(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn paired<'a>(&'a self, other: &'a Policy) -> impl Iterator<Item = (f64, f64)> + 'a {
        debug_assert_eq!(self.actions, other.actions);
        self.probabilities
            .iter()
            .copied()
            .zip(other.probabilities.iter().copied())
    }
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax_index(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// The P-UCT score of one edge.
#[inline]
pub fn puct_score(q: f64, prior: f64, visits: u32, parent_visits: u32, c1: f64, c2: f64) -> f64 {
    let total = parent_visits as f64;
    q + prior * total.sqrt() / (1.0 + visits as f64) * (c1 + ((total + c2 + 1.0) / c2).ln())
}

/// Frozen selection inputs of one node: `(Q̃, P)` per child, in child order.
///
/// `Q̃` is the child's mean, or the node's unvisited default when the child
/// has no visits, min-max normalized when the config asks for it.
pub(crate) fn selection_inputs(
    tree: &SearchTree,
    node: NodeId,
    cfg: &SearchConfig,
) -> Result<Vec<(f64, f64)>> {
    let stats = tree.stats(node)?;
    if !stats.expanded {
        return Err(Error::NotExpanded(node));
    }
    let children = tree.children(node)?;
    let mut default = None;
    let bounds = tree.bounds();
    children
        .iter()
        .map(|&c| {
            let s = tree.stats(c)?;
            let q = match s.mean() {
                Some(q) => q,
                None => match default {
                    Some(d) => d,
                    None => {
                        let d = tree.unvisited_q_default(node, cfg.two_player)?;
                        default = Some(d);
                        d
                    }
                },
            };
            let q = if cfg.normalize_q {
                bounds.normalize(q)
            } else {
                q
            };
            Ok((q, s.prior))
        })
        .collect()
}

/// Argmax of the P-UCT score over frozen inputs and the given counts.
pub(crate) fn argmax_puct(
    inputs: &[(f64, f64)],
    counts: &[u32],
    total: u32,
    cfg: &SearchConfig,
) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, (&(q, p), &n)) in inputs.iter().zip(counts).enumerate() {
        let score = puct_score(q, p, n, total, cfg.c1, cfg.c2);
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

/// Child index chosen by P-UCT at `node`.
///
/// With `counts_override` the visit counts `n` in the formula come from the
/// override (virtual root counts) while the Q-values stay those of the tree.
pub fn puct_select(
    tree: &SearchTree,
    node: NodeId,
    counts_override: Option<&crate::virtual_expansion::VirtualRootCounts>,
    cfg: &SearchConfig,
) -> Result<usize> {
    let inputs = selection_inputs(tree, node, cfg)?;
    if inputs.is_empty() {
        return Err(Error::NotExpanded(node));
    }
    let (counts, total) = match counts_override {
        Some(v) => {
            if v.counts.len() != inputs.len() {
                return Err(Error::Config(format!(
                    "{} override counts for {} children",
                    v.counts.len(),
                    inputs.len()
                )));
            }
            (v.counts.clone(), v.total)
        }
        None => {
            let counts: Vec<u32> = tree
                .children(node)?
                .iter()
                .map(|&c| tree.stats(c).map(|s| s.visit_count))
                .collect::<Result<_>>()?;
            let total = counts.iter().sum();
            (counts, total)
        }
    };
    Ok(argmax_puct(&inputs, &counts, total, cfg))
}

/// Evaluates and expands the root of a fresh tree.
pub fn expand_root<S: GameState, E: Evaluator<S> + ?Sized>(
    tree: &mut SearchTree,
    state: &S,
    evaluator: &E,
    rng: &mut SearchRng,
) -> Result<()> {
    if state.is_terminal() {
        return Err(Error::TerminalState);
    }
    let legal = state.legal_actions();
    let eval = evaluator.evaluate(state, rng)?;
    eval.validate(legal.len())?;
    tree.expand(tree.root(), &legal, &eval.priors)
}

/// What one iteration did at its leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafKind {
    Evaluated,
    Terminal,
}

/// One select / expand / evaluate / backpropagate pass from the root.
///
/// Descends by P-UCT until it crosses an edge with no visits (or reaches a
/// terminal node), evaluates that leaf exactly once, expands it and backs
/// the value up. Terminal leaves back up their true outcome instead.
pub fn run_iteration<S: GameState, E: Evaluator<S> + ?Sized>(
    tree: &mut SearchTree,
    root_state: &S,
    evaluator: &E,
    cfg: &SearchConfig,
    rng: &mut SearchRng,
) -> Result<LeafKind> {
    let mut node = tree.root();
    let mut state = root_state.clone();
    let mut path = vec![node];
    let mut mover;
    loop {
        let idx = puct_select(tree, node, None, cfg)?;
        let child = tree.children(node)?[idx];
        let action = tree.action(child)?.expect("child edge has an action");
        mover = state.player_to_move();
        state = state.apply(action)?;
        path.push(child);
        if tree.stats(child)?.visit_count == 0 || tree.is_terminal(child)? {
            node = child;
            break;
        }
        node = child;
    }
    // Convert a first-player value into the perspective of the player who
    // chose the edge into the leaf.
    let perspective = if cfg.two_player { mover.sign() } else { 1.0 };
    let (value, kind) = if state.is_terminal() {
        tree.mark_terminal(node)?;
        (state.terminal_value(), LeafKind::Terminal)
    } else {
        let legal = state.legal_actions();
        let eval = evaluator.evaluate(&state, rng)?;
        eval.validate(legal.len())?;
        tree.expand(node, &legal, &eval.priors)?;
        (eval.value, LeafKind::Evaluated)
    };
    tree.backpropagate(&path, perspective * value, cfg.two_player, cfg.discount)?;
    Ok(kind)
}

/// Mixes a Dirichlet sample into the root priors.
pub fn apply_root_noise(
    tree: &mut SearchTree,
    cfg: &SearchConfig,
    rng: &mut SearchRng,
) -> Result<()> {
    let root = tree.root();
    if !tree.stats(root)?.expanded {
        return Err(Error::NotExpanded(root));
    }
    let children = tree.children(root)?.to_vec();
    let count = children.len();
    if count == 0 || cfg.noise_fraction == 0.0 {
        return Ok(());
    }
    let alpha = match cfg.reference_legal_moves {
        Some(reference) => cfg.dirichlet_alpha * reference as f64 / count as f64,
        None => cfg.dirichlet_alpha,
    };
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::Config(e.to_string()))?;
    let draws: Vec<f64> = (0..count).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    let noise: Vec<f64> = if total > 0.0 {
        draws.iter().map(|d| d / total).collect()
    } else {
        vec![1.0 / count as f64; count]
    };
    let f = cfg.noise_fraction;
    let priors: Vec<f64> = children
        .iter()
        .zip(&noise)
        .map(|(c, d)| Ok((1.0 - f) * tree.stats(*c)?.prior + f * d))
        .collect::<Result<_>>()?;
    tree.set_child_priors(root, &priors)
}

/// Samples from `policy` before move `temperature_moves`, argmax afterwards.
pub fn sample_action(
    policy: &Policy,
    move_index: usize,
    temperature_moves: usize,
    rng: &mut SearchRng,
) -> Result<Action> {
    if policy.is_empty() {
        return Err(Error::EmptyPolicy);
    }
    if move_index >= temperature_moves {
        return Ok(policy.argmax());
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, p) in policy.actions.iter().zip(&policy.probabilities) {
        acc += p;
        if u < acc {
            return Ok(*a);
        }
    }
    // Rounding left `u` above the cumulative sum; take the last supported action.
    let last = policy
        .probabilities
        .iter()
        .rposition(|p| *p > 0.0)
        .unwrap_or(0);
    Ok(policy.actions[last])
}

/// True when every visited root edge has a raw mean below the threshold.
pub fn should_resign(tree: &SearchTree, threshold: Option<f64>) -> bool {
    let Some(threshold) = threshold else {
        return false;
    };
    let best = tree
        .root_means()
        .into_iter()
        .flatten()
        .fold(f64::NEG_INFINITY, f64::max);
    best.is_finite() && best < threshold
}

/// Visit distribution of the root, `N(root,a) / Σ_b N(root,b)`.
pub fn visit_policy(tree: &SearchTree) -> Result<Policy> {
    let visits = tree.root_visits();
    let total = visits.iter().sum();
    Policy::from_counts(tree.root_actions(), &visits, total)
}

/// Per-iteration diagnostics of a virtual-expansion search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: u32,
    pub delta_l1: Option<f64>,
    pub delta_l2: Option<f64>,
    pub virtual_time_ns: u64,
    pub terminated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub policy: Policy,
    pub chosen_action: Action,
    pub iterations_used: u32,
    pub terminated_early: bool,
    pub resigned: bool,
    /// Real root visit counts at the point the search stopped.
    pub root_visits: Vec<u32>,
    /// Leaf evaluations performed by the iterations (the root evaluation is not counted).
    pub evaluations: u32,
    pub trace: Vec<TraceRecord>,
}

impl SearchOutcome {
    /// Equality of everything except timing-dependent trace fields.
    pub fn same_decision(&self, other: &SearchOutcome) -> bool {
        self.policy == other.policy
            && self.chosen_action == other.chosen_action
            && self.iterations_used == other.iterations_used
            && self.terminated_early == other.terminated_early
            && self.resigned == other.resigned
            && self.root_visits == other.root_visits
            && self.evaluations == other.evaluations
    }
}

/// A search in progress: the tree, its random stream and the root state.
pub struct Session<'a, S: GameState, E: Evaluator<S> + ?Sized> {
    pub(crate) state: &'a S,
    pub(crate) evaluator: &'a E,
    pub(crate) cfg: &'a SearchConfig,
    pub(crate) tree: SearchTree,
    pub(crate) rng: SearchRng,
    pub(crate) evaluations: u32,
}

impl<'a, S: GameState, E: Evaluator<S> + ?Sized> Session<'a, S, E> {
    /// Validates inputs, expands the root and applies root noise if enabled.
    pub fn start(state: &'a S, evaluator: &'a E, cfg: &'a SearchConfig) -> Result<Self> {
        cfg.validate()?;
        if state.is_terminal() {
            return Err(Error::TerminalState);
        }
        if cfg.two_player && state.player_to_move() == Player::Single {
            return Err(Error::Config(
                "two_player is set for a single-agent environment".into(),
            ));
        }
        let mut rng = rng_from_seed(cfg.seed);
        let mut tree = SearchTree::new();
        expand_root(&mut tree, state, evaluator, &mut rng)?;
        if cfg.root_noise {
            apply_root_noise(&mut tree, cfg, &mut rng)?;
        }
        Ok(Session {
            state,
            evaluator,
            cfg,
            tree,
            rng,
            evaluations: 0,
        })
    }

    /// Continues from an existing tree with the given random stream.
    pub fn resume(
        tree: SearchTree,
        state: &'a S,
        evaluator: &'a E,
        cfg: &'a SearchConfig,
        rng: SearchRng,
    ) -> Result<Self> {
        cfg.validate()?;
        if !tree.stats(tree.root())?.expanded {
            return Err(Error::NotExpanded(tree.root()));
        }
        Ok(Session {
            state,
            evaluator,
            cfg,
            tree,
            rng,
            evaluations: 0,
        })
    }

    pub fn step(&mut self) -> Result<()> {
        let kind = run_iteration(
            &mut self.tree,
            self.state,
            self.evaluator,
            self.cfg,
            &mut self.rng,
        )?;
        if kind == LeafKind::Evaluated {
            self.evaluations += 1;
        }
        Ok(())
    }

    /// Completed iterations, `Σ_a N(root,a)`.
    pub fn iterations(&self) -> u32 {
        self.tree.root_visits().iter().sum()
    }

    pub fn tree(&self) -> &SearchTree {
        &self.tree
    }

    pub fn into_tree(self) -> SearchTree {
        self.tree
    }

    /// Picks the move from `policy` and packages the outcome.
    pub fn finish(
        mut self,
        policy: Policy,
        terminated_early: bool,
        trace: Vec<TraceRecord>,
    ) -> Result<(SearchOutcome, SearchTree)> {
        let chosen_action = sample_action(
            &policy,
            self.state.move_number(),
            self.cfg.temperature_moves,
            &mut self.rng,
        )?;
        let outcome = SearchOutcome {
            policy,
            chosen_action,
            iterations_used: self.iterations(),
            terminated_early,
            resigned: should_resign(&self.tree, self.cfg.resign_threshold),
            root_visits: self.tree.root_visits(),
            evaluations: self.evaluations,
            trace,
        };
        Ok((outcome, self.tree))
    }
}

/// Plain MCTS: exactly `N` iterations, returns the root visit distribution.
pub fn search_vanilla<S: GameState, E: Evaluator<S> + ?Sized>(
    state: &S,
    evaluator: &E,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    search_vanilla_with_tree(state, evaluator, cfg).map(|(o, _)| o)
}

pub fn search_vanilla_with_tree<S: GameState, E: Evaluator<S> + ?Sized>(
    state: &S,
    evaluator: &E,
    cfg: &SearchConfig,
) -> Result<(SearchOutcome, SearchTree)> {
    let mut session = Session::start(state, evaluator, cfg)?;
    for _ in 0..cfg.budget {
        session.step()?;
    }
    let policy = visit_policy(session.tree())?;
    session.finish(policy, false, Vec::new())
}

/// Wall-clock helper for trace records.
pub(crate) fn elapsed_ns(start: Instant) -> u64 {
    start.elapsed().as_nanos().min(u64::MAX as u128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{BanditSpec, BanditState, MnkState, RewardLaw};
    use crate::eval::{BanditEvaluator, Evaluation, MinimaxEvaluator, RolloutEvaluator};
    use crate::tree::NodeStats;
    use std::sync::atomic::{AtomicU32, Ordering};

    fn raw_cfg() -> SearchConfig {
        SearchConfig {
            normalize_q: false,
            ..Default::default()
        }
    }

    fn stats(mean: Option<f64>, n: u32, prior: f64) -> NodeStats {
        NodeStats {
            visit_count: n,
            value_sum: mean.unwrap_or(0.0) * n as f64,
            prior,
            reward: 0.0,
            expanded: n > 0,
        }
    }

    #[test]
    fn puct_prefers_visited_high_value() {
        // Reference scores: 1.3125254 vs 1.1250509.
        let mut t = SearchTree::new();
        t.push_child(t.root(), 0, stats(Some(1.0), 1, 0.5)).unwrap();
        t.push_child(t.root(), 1, stats(None, 0, 0.5)).unwrap();
        let cfg = SearchConfig {
            two_player: false,
            ..raw_cfg()
        };
        let inputs = selection_inputs(&t, t.root(), &cfg).unwrap();
        assert_eq!(inputs[1].0, 0.5);
        let s0 = puct_score(inputs[0].0, 0.5, 1, 1, 1.25, 19652.0);
        let s1 = puct_score(inputs[1].0, 0.5, 0, 1, 1.25, 19652.0);
        assert!((s0 - 1.3125254414084584).abs() < 1e-12);
        assert!((s1 - 1.1250508828169168).abs() < 1e-12);
        assert_eq!(puct_select(&t, t.root(), None, &cfg).unwrap(), 0);
    }

    #[test]
    fn puct_ties_break_to_lowest_index() {
        let mut t = SearchTree::new();
        for a in 0..4 {
            t.push_child(t.root(), a, stats(Some(0.3), 2, 0.25))
                .unwrap();
        }
        assert_eq!(puct_select(&t, t.root(), None, &raw_cfg()).unwrap(), 0);
    }

    #[test]
    fn zero_prior_has_no_exploration_bonus() {
        // a1: P=1, Q=0, n=1 → bonus 0.8839914; a2: P=0, Q=1 → 1.0.
        let mut t = SearchTree::new();
        t.push_child(t.root(), 0, stats(Some(0.0), 1, 1.0)).unwrap();
        t.push_child(t.root(), 1, stats(Some(1.0), 1, 0.0)).unwrap();
        assert!((puct_score(0.0, 1.0, 1, 2, 1.25, 19652.0) - 0.8839914124919197).abs() < 1e-12);
        assert_eq!(puct_select(&t, t.root(), None, &raw_cfg()).unwrap(), 1);
    }

    #[test]
    fn selecting_at_unexpanded_node_fails() {
        let t = SearchTree::new();
        assert_eq!(
            puct_select(&t, t.root(), None, &raw_cfg()),
            Err(Error::NotExpanded(t.root()))
        );
    }

    #[test]
    fn zero_noise_fraction_leaves_priors() {
        let mut t = SearchTree::new();
        t.expand(t.root(), &[0, 1, 2], &[0.2, 0.3, 0.5]).unwrap();
        let before = t.clone();
        let cfg = SearchConfig {
            noise_fraction: 0.0,
            ..Default::default()
        };
        apply_root_noise(&mut t, &cfg, &mut rng_from_seed(1)).unwrap();
        assert_eq!(t, before);
    }

    #[test]
    fn full_noise_replaces_priors_with_a_distribution() {
        let mut t = SearchTree::new();
        t.expand(t.root(), &[0, 1], &[0.9, 0.1]).unwrap();
        let cfg = SearchConfig {
            noise_fraction: 1.0,
            ..Default::default()
        };
        apply_root_noise(&mut t, &cfg, &mut rng_from_seed(2)).unwrap();
        let priors: Vec<f64> = t
            .children(t.root())
            .unwrap()
            .iter()
            .map(|c| t.stats(*c).unwrap().prior)
            .collect();
        assert!((priors.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_ne!(priors, vec![0.9, 0.1]);
    }

    #[test]
    fn concentrated_noise_keeps_uniform_priors() {
        // Dirichlet(1e6) over 4 entries has per-coordinate sd ≈ 4e-4.
        let mut t = SearchTree::new();
        t.expand(t.root(), &[0, 1, 2, 3], &[0.25; 4]).unwrap();
        let cfg = SearchConfig {
            noise_fraction: 0.25,
            dirichlet_alpha: 1e6,
            ..Default::default()
        };
        apply_root_noise(&mut t, &cfg, &mut rng_from_seed(3)).unwrap();
        for c in t.children(t.root()).unwrap() {
            assert!((t.stats(*c).unwrap().prior - 0.25).abs() < 1e-3);
        }
    }

    #[test]
    fn noise_alpha_scales_with_legal_move_count() {
        // With reference 1000 and 4 moves, alpha 0.003 becomes 0.75: the draw
        // should be far less spiky than with the unscaled 0.003.
        let spread = |reference: Option<usize>| {
            let mut worst: f64 = 0.0;
            for seed in 0..50 {
                let mut t = SearchTree::new();
                t.expand(t.root(), &[0, 1, 2, 3], &[0.25; 4]).unwrap();
                let cfg = SearchConfig {
                    noise_fraction: 1.0,
                    dirichlet_alpha: 0.003,
                    reference_legal_moves: reference,
                    ..Default::default()
                };
                apply_root_noise(&mut t, &cfg, &mut rng_from_seed(seed)).unwrap();
                let max = t
                    .children(t.root())
                    .unwrap()
                    .iter()
                    .map(|c| t.stats(*c).unwrap().prior)
                    .fold(0.0, f64::max);
                worst += max;
            }
            worst / 50.0
        };
        assert!(spread(Some(1000)) < spread(None));
    }

    #[test]
    fn argmax_after_temperature_threshold() {
        let p = Policy::new(vec![0, 1], vec![0.3, 0.7]).unwrap();
        let mut rng = rng_from_seed(0);
        for _ in 0..100 {
            assert_eq!(sample_action(&p, 0, 0, &mut rng).unwrap(), 1);
        }
        let degenerate = Policy::new(vec![0, 1], vec![1.0, 0.0]).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_action(&degenerate, 3, 16, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn sampling_frequency_matches_policy() {
        // Binomial sd at 1e4 draws is 0.0043; [0.72, 0.78] is a 7-sigma band.
        let p = Policy::new(vec![0, 1], vec![0.25, 0.75]).unwrap();
        let mut rng = rng_from_seed(10);
        let hits = (0..10_000)
            .filter(|_| sample_action(&p, 3, 16, &mut rng).unwrap() == 1)
            .count();
        let freq = hits as f64 / 1e4;
        assert!((0.72..=0.78).contains(&freq), "{freq}");
    }

    #[test]
    fn empty_policy_is_rejected() {
        assert_eq!(Policy::new(vec![], vec![]), Err(Error::EmptyPolicy));
    }

    #[test]
    fn resignation_rules() {
        let mut t = SearchTree::new();
        t.push_child(t.root(), 0, stats(Some(-0.95), 3, 0.5))
            .unwrap();
        t.push_child(t.root(), 1, stats(Some(-0.95), 2, 0.5))
            .unwrap();
        assert!(should_resign(&t, Some(-0.9)));
        assert!(!should_resign(&t, None));
        t.push_child(t.root(), 2, stats(Some(0.0), 1, 0.0)).unwrap();
        assert!(!should_resign(&t, Some(-0.9)));
    }

    #[test]
    fn terminal_root_is_rejected() {
        let mut s = MnkState::tictactoe();
        for a in [0, 3, 1, 4, 2] {
            s = s.apply(a).unwrap();
        }
        let e = RolloutEvaluator::new(1);
        assert_eq!(
            search_vanilla(&s, &e, &SearchConfig::default()).err(),
            Some(Error::TerminalState)
        );
    }

    struct Counting<E> {
        inner: E,
        calls: AtomicU32,
    }

    impl<S: GameState, E: Evaluator<S>> Evaluator<S> for Counting<E> {
        fn evaluate(&self, state: &S, rng: &mut SearchRng) -> Result<Evaluation> {
            self.calls.fetch_add(1, Ordering::Relaxed);
            self.inner.evaluate(state, rng)
        }
    }

    #[test]
    fn vanilla_search_accounting() {
        let e = Counting {
            inner: RolloutEvaluator::new(2),
            calls: AtomicU32::new(0),
        };
        let cfg = SearchConfig {
            budget: 200,
            ..Default::default()
        };
        let (out, tree) = search_vanilla_with_tree(&MnkState::tictactoe(), &e, &cfg).unwrap();
        assert_eq!(out.iterations_used, 200);
        assert!(!out.terminated_early);
        assert_eq!(out.root_visits.iter().sum::<u32>(), 200);
        for (p, n) in out.policy.probabilities().iter().zip(&out.root_visits) {
            assert_eq!(*p, *n as f64 / 200.0);
        }
        // Root evaluation plus one per non-terminal leaf.
        let calls = e.calls.load(Ordering::Relaxed);
        let terminal_hits = 200 - out.evaluations;
        assert_eq!(calls, out.evaluations + 1);
        assert_eq!(out.evaluations + terminal_hits, 200);
        assert!(tree.check_visit_conservation());
    }

    #[test]
    fn minimax_guided_search_finds_the_winning_move() {
        let m = MinimaxEvaluator::solve(&MnkState::tictactoe(), 10_000).unwrap();
        let s =
            <MnkState as crate::envs::TextBoard>::from_text("XX.\nOO.\n...\nto_move X\n").unwrap();
        let out = search_vanilla(
            &s,
            &m,
            &SearchConfig {
                budget: 50,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.chosen_action, 2);
    }

    #[test]
    fn seeded_searches_repeat_exactly() {
        let e = RolloutEvaluator::new(4);
        let cfg = SearchConfig {
            budget: 80,
            seed: 17,
            ..Default::default()
        }
        .self_play();
        let (a, ta) = search_vanilla_with_tree(&MnkState::gomoku(7), &e, &cfg).unwrap();
        let (b, tb) = search_vanilla_with_tree(&MnkState::gomoku(7), &e, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
    }

    #[test]
    fn bandit_root_means_are_empirical_means() {
        let spec = BanditSpec::uniform(vec![0.8, 0.5, 0.2], RewardLaw::Bernoulli).unwrap();
        let state = BanditState::new(spec);
        let cfg = SearchConfig::bandit(60).with_seed(4);
        let (out, tree) = search_vanilla_with_tree(&state, &BanditEvaluator, &cfg).unwrap();
        assert_eq!(out.root_visits.iter().sum::<u32>(), 60);
        assert!(tree.check_visit_conservation());
        for m in tree.root_means().into_iter().flatten() {
            assert!((0.0..=1.0).contains(&m));
        }
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig {
            budget: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SearchConfig {
            c1: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SearchConfig {
            discount: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SearchConfig {
            resign_threshold: Some(0.1),
            ..Default::default()
        }
        .validate()
        .is_err());
        let spec = BanditSpec::uniform(vec![0.8, 0.5], RewardLaw::Bernoulli).unwrap();
        let err = search_vanilla(
            &BanditState::new(spec),
            &BanditEvaluator,
            &SearchConfig::default(),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
