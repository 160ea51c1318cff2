use proptest::prelude::*;

use vmcts::envs::{BanditSpec, BanditState, GameState, MnkState, RewardLaw};
use vmcts::eval::{BanditEvaluator, RolloutEvaluator};
use vmcts::rng::rng_from_seed;
use vmcts::search::{search_vanilla, search_vanilla_with_tree, visit_policy, SearchConfig};
use vmcts::tree::{NodeStats, SearchTree};
use vmcts::virtual_expansion::{
    greedy_expand, search_vmcts, virtual_expand, virtual_policy, Norm, VetConfig,
};

/// A position reached by `plies` random moves from an empty board.
fn random_position(size: usize, plies: usize, seed: u64) -> MnkState {
    let mut rng = rng_from_seed(seed);
    let mut s = if size == 3 {
        MnkState::tictactoe()
    } else {
        MnkState::gomoku(size)
    };
    for _ in 0..plies {
        let legal = s.legal_actions();
        if legal.len() <= 1 {
            break;
        }
        let a = legal[rand::Rng::random_range(&mut rng, 0..legal.len())];
        let next = s.apply(a).unwrap();
        if next.is_terminal() {
            break;
        }
        s = next;
    }
    s
}

fn arbitrary_root() -> impl Strategy<Value = SearchTree> {
    prop::collection::vec((0u32..20, -1.0f64..1.0, 0.01f64..1.0), 2..12).prop_map(|edges| {
        let total: f64 = edges.iter().map(|e| e.2).sum();
        let mut t = SearchTree::new();
        for (a, (n, q, p)) in edges.into_iter().enumerate() {
            let stats = NodeStats {
                visit_count: n,
                value_sum: q * n as f64,
                prior: p / total,
                reward: 0.0,
                expanded: n > 0,
            };
            t.push_child(t.root(), a, stats).unwrap();
        }
        t
    })
}

fn raw(budget: u32, normalize_q: bool) -> SearchConfig {
    SearchConfig {
        budget,
        normalize_q,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn virtual_expansion_is_pure_and_conserves_counts(tree in arbitrary_root(), extra in 0u32..200, norm in any::<bool>()) {
        let done: u32 = tree.root_visits().iter().sum();
        let budget = done + extra;
        let before = serde_json::to_string(&tree).unwrap();
        let counts = virtual_expand(&tree, budget, &raw(budget, norm)).unwrap();
        prop_assert_eq!(serde_json::to_string(&tree).unwrap(), before);
        prop_assert_eq!(counts.total, budget);
        prop_assert_eq!(counts.counts.iter().sum::<u32>(), budget);
        for (v, n) in counts.counts.iter().zip(tree.root_visits()) {
            prop_assert!(*v >= n);
        }
    }

    #[test]
    fn full_budget_policies_coincide(tree in arbitrary_root()) {
        let done: u32 = tree.root_visits().iter().sum();
        prop_assume!(done > 0);
        let p = virtual_policy(&virtual_expand(&tree, done, &raw(done, true)).unwrap(), done).unwrap();
        prop_assert_eq!(&p, &visit_policy(&tree).unwrap());
        prop_assert_eq!(&greedy_expand(&tree, done).unwrap(), &visit_policy(&tree).unwrap());
    }

    #[test]
    fn searched_trees_stay_pure(plies in 0usize..12, seed in any::<u64>(), k in 2u32..60, extra in 0u32..100) {
        let state = random_position(7, plies, seed);
        let cfg = SearchConfig { budget: k, seed, ..Default::default() };
        let (_, tree) = search_vanilla_with_tree(&state, &RolloutEvaluator::new(1), &cfg).unwrap();
        prop_assert!(tree.check_visit_conservation());
        let before = tree.clone();
        let counts = virtual_expand(&tree, k + extra, &cfg).unwrap();
        prop_assert_eq!(&tree, &before);
        prop_assert_eq!(counts.counts.iter().sum::<u32>(), k + extra);
    }

    #[test]
    fn zero_epsilon_equals_vanilla(plies in 0usize..6, seed in any::<u64>(), budget in 2u32..50) {
        let state = random_position(3, plies, seed);
        let cfg = SearchConfig { budget, seed, ..Default::default() };
        let e = RolloutEvaluator::new(1);
        let v = search_vanilla(&state, &e, &cfg).unwrap();
        let w = search_vmcts(&state, &e, &cfg, &VetConfig::default().with_epsilon(0.0)).unwrap();
        prop_assert!(v.same_decision(&w));
        prop_assert!(!w.terminated_early);
    }

    #[test]
    fn termination_respects_the_floor(seed in any::<u64>(), eps in 0.0f64..2.5, r in 0.05f64..0.95, l2 in any::<bool>(), m in 1u32..5) {
        let spec = BanditSpec::uniform(vec![0.8, 0.6, 0.5, 0.3, 0.1], RewardLaw::Bernoulli).unwrap();
        let state = BanditState::new(spec);
        let cfg = SearchConfig::bandit(80).with_seed(seed);
        let vet = VetConfig { min_ratio: r, epsilon: eps, norm: if l2 { Norm::L2 } else { Norm::L1 }, check_every: m };
        let out = search_vmcts(&state, &BanditEvaluator, &cfg, &vet).unwrap();
        prop_assert!(out.iterations_used <= 80);
        if out.terminated_early {
            prop_assert!(out.iterations_used >= vet.min_iterations(80));
            prop_assert!(out.iterations_used < 80);
        } else {
            prop_assert_eq!(out.iterations_used, 80);
        }
        prop_assert_eq!(out.root_visits.iter().sum::<u32>(), out.iterations_used);
        prop_assert!((out.policy.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn budget_is_monotone_in_epsilon(plies in 0usize..10, seed in any::<u64>()) {
        let state = random_position(7, plies, seed);
        let cfg = SearchConfig { budget: 80, seed, ..Default::default() };
        let e = RolloutEvaluator::new(2);
        let mut last = u32::MAX;
        for eps in [0.0, 0.05, 0.1, 0.2, 0.5, 1.0] {
            let out = search_vmcts(&state, &e, &cfg, &VetConfig::default().with_epsilon(eps)).unwrap();
            prop_assert!(out.iterations_used <= last, "eps {} used {} after {}", eps, out.iterations_used, last);
            last = out.iterations_used;
        }
    }
}
