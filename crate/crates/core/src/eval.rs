//! Leaf evaluators: the `(prior, value)` oracle consulted once per search
//! iteration. Values of two-player games are from the first player's
//! perspective; priors are aligned with `legal_actions()`.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use crate::envs::{BanditState, GameState, GoState, Player};
use crate::error::{Error, Result};
use crate::rng::SearchRng;

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub priors: Vec<f64>,
    pub value: f64,
}

impl Evaluation {
    pub fn uniform(actions: usize, value: f64) -> Self {
        Evaluation {
            priors: vec![1.0 / actions.max(1) as f64; actions],
            value,
        }
    }

    /// Checks the output contract against the number of legal actions.
    pub fn validate(&self, legal: usize) -> Result<()> {
        if self.priors.len() != legal {
            return Err(Error::Evaluator(format!(
                "{} priors for {legal} legal actions",
                self.priors.len()
            )));
        }
        let total: f64 = self.priors.iter().sum();
        if self.priors.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-6 {
            return Err(Error::Evaluator(format!(
                "priors are not a distribution (sum {total})"
            )));
        }
        if !self.value.is_finite() {
            return Err(Error::Evaluator("non-finite value".into()));
        }
        Ok(())
    }
}

pub trait Evaluator<S: GameState>: Send + Sync {
    fn evaluate(&self, state: &S, rng: &mut SearchRng) -> Result<Evaluation>;
}

impl<S: GameState, E: Evaluator<S> + ?Sized> Evaluator<S> for &E {
    fn evaluate(&self, state: &S, rng: &mut SearchRng) -> Result<Evaluation> {
        (**self).evaluate(state, rng)
    }
}

impl<S: GameState, E: Evaluator<S> + ?Sized> Evaluator<S> for Box<E> {
    fn evaluate(&self, state: &S, rng: &mut SearchRng) -> Result<Evaluation> {
        (**self).evaluate(state, rng)
    }
}

impl<S: GameState, E: Evaluator<S> + ?Sized> Evaluator<S> for Arc<E> {
    fn evaluate(&self, state: &S, rng: &mut SearchRng) -> Result<Evaluation> {
        (**self).evaluate(state, rng)
    }
}

/// Mean outcome of uniformly random playouts, uniform priors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RolloutEvaluator {
    pub rollouts: usize,
}

impl RolloutEvaluator {
    pub fn new(rollouts: usize) -> Self {
        RolloutEvaluator { rollouts }
    }
}

impl<S: GameState> Evaluator<S> for RolloutEvaluator {
    fn evaluate(&self, state: &S, rng: &mut SearchRng) -> Result<Evaluation> {
        let legal = state.legal_actions().len();
        if self.rollouts == 0 {
            return Ok(Evaluation::uniform(legal, 0.0));
        }
        let total: f64 = (0..self.rollouts).map(|_| state.random_playout(rng)).sum();
        Ok(Evaluation::uniform(legal, total / self.rollouts as f64))
    }
}

/// Exact game-theoretic values for games small enough to solve outright.
///
/// Positions reachable from the constructor's root are solved up front;
/// anything else is solved on demand under the same position limit.
#[derive(Clone, Debug)]
pub struct MinimaxEvaluator<S: GameState + Eq + Hash> {
    table: HashMap<S, f64>,
    limit: usize,
}

impl<S: GameState + Eq + Hash> MinimaxEvaluator<S> {
    pub fn solve(root: &S, limit: usize) -> Result<Self> {
        let mut table = HashMap::new();
        solve_into(root, &HashMap::new(), &mut table, limit)?;
        Ok(MinimaxEvaluator { table, limit })
    }

    /// Number of solved positions.
    pub fn positions(&self) -> usize {
        self.table.len()
    }

    /// Exact value of `state`, first-player perspective.
    pub fn value(&self, state: &S) -> Result<f64> {
        if let Some(v) = self.table.get(state) {
            return Ok(*v);
        }
        let mut scratch = HashMap::new();
        solve_into(state, &self.table, &mut scratch, self.limit)
    }
}

fn solve_into<S: GameState + Eq + Hash>(
    state: &S,
    known: &HashMap<S, f64>,
    memo: &mut HashMap<S, f64>,
    limit: usize,
) -> Result<f64> {
    if let Some(v) = known.get(state).or_else(|| memo.get(state)) {
        return Ok(*v);
    }
    if memo.len() >= limit {
        return Err(Error::TooLarge { limit });
    }
    let value = if state.is_terminal() {
        state.terminal_value()
    } else {
        let maximize = state.player_to_move() != Player::Second;
        let mut best = if maximize {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        for a in state.legal_actions() {
            let v = solve_into(&state.apply(a)?, known, memo, limit)?;
            best = if maximize { best.max(v) } else { best.min(v) };
        }
        best
    };
    memo.insert(state.clone(), value);
    Ok(value)
}

impl<S: GameState + Eq + Hash> Evaluator<S> for MinimaxEvaluator<S> {
    fn evaluate(&self, state: &S, _rng: &mut SearchRng) -> Result<Evaluation> {
        let value = self.value(state)?;
        let legal = state.legal_actions();
        if legal.is_empty() {
            return Ok(Evaluation {
                priors: Vec::new(),
                value,
            });
        }
        let optimal: Vec<bool> = legal
            .iter()
            .map(|&a| Ok(self.value(&state.apply(a)?)? == value))
            .collect::<Result<_>>()?;
        let count = optimal.iter().filter(|o| **o).count() as f64;
        Ok(Evaluation {
            priors: optimal
                .iter()
                .map(|&o| if o { 1.0 / count } else { 0.0 })
                .collect(),
            value,
        })
    }
}

/// Squashed area score: `tanh(slope · (black − white − komi))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoHeuristicEvaluator {
    pub slope: f64,
}

impl Default for GoHeuristicEvaluator {
    fn default() -> Self {
        GoHeuristicEvaluator { slope: 0.25 }
    }
}

impl Evaluator<GoState> for GoHeuristicEvaluator {
    fn evaluate(&self, state: &GoState, _rng: &mut SearchRng) -> Result<Evaluation> {
        let legal = state.legal_actions().len();
        Ok(Evaluation::uniform(
            legal,
            (self.slope * state.score()).tanh(),
        ))
    }
}

/// Scores an arm state with one fresh pull; the root carries the arm priors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BanditEvaluator;

impl Evaluator<BanditState> for BanditEvaluator {
    fn evaluate(&self, state: &BanditState, rng: &mut SearchRng) -> Result<Evaluation> {
        Ok(match state.arm() {
            None => Evaluation {
                priors: state.spec().priors.clone(),
                value: 0.0,
            },
            Some(arm) => Evaluation {
                priors: vec![1.0],
                value: state.spec().pull(arm, rng),
            },
        })
    }
}
