//! Stochastic multi-armed bandits as a depth-one search problem.
//!
//! The root offers one action per arm. Choosing an arm leads to an arm
//! state whose only action is "pull again", so repeated selections of the
//! same arm grow a chain and every new leaf is scored by a fresh pull. The
//! mean value of a root edge is then exactly the empirical mean reward of
//! that arm.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::{Action, GameState, Player};
use crate::error::{Error, Result};
use crate::rng::SearchRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardLaw {
    Bernoulli,
    /// Uniform on `[q - w, q + w]` with `w = min(q, 1 - q)`.
    UniformBounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditSpec {
    /// Expected reward per arm, sorted in descending order.
    pub means: Vec<f64>,
    /// Prior score per arm; sums to one.
    pub priors: Vec<f64>,
    pub law: RewardLaw,
}

impl BanditSpec {
    pub fn new(means: Vec<f64>, priors: Vec<f64>, law: RewardLaw) -> Result<Self> {
        if means.len() < 2 || means.len() != priors.len() {
            return Err(Error::Config(
                "a bandit needs at least two arms and one prior per arm".into(),
            ));
        }
        if means.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::Config("arm means must lie in [0, 1]".into()));
        }
        if means.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Config("arm means must be sorted descending".into()));
        }
        let total: f64 = priors.iter().sum();
        if priors.iter().any(|p| *p < 0.0) || (total - 1.0).abs() > 1e-6 {
            return Err(Error::Config(
                "arm priors must be nonnegative and sum to 1".into(),
            ));
        }
        Ok(BanditSpec { means, priors, law })
    }

    /// Arms with the given means and uniform priors.
    pub fn uniform(means: Vec<f64>, law: RewardLaw) -> Result<Self> {
        let priors = vec![1.0 / means.len() as f64; means.len()];
        Self::new(means, priors, law)
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    /// One independent reward sample of `arm`, always in `[0, 1]`.
    pub fn pull(&self, arm: usize, rng: &mut SearchRng) -> f64 {
        let q = self.means[arm];
        match self.law {
            RewardLaw::Bernoulli => {
                if rng.random::<f64>() < q {
                    1.0
                } else {
                    0.0
                }
            }
            RewardLaw::UniformBounded => {
                let w = q.min(1.0 - q);
                q - w + 2.0 * w * rng.random::<f64>()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BanditState {
    spec: Arc<BanditSpec>,
    arm: Option<usize>,
    depth: usize,
}

impl BanditState {
    pub fn new(spec: BanditSpec) -> Self {
        BanditState {
            spec: Arc::new(spec),
            arm: None,
            depth: 0,
        }
    }

    pub fn spec(&self) -> &BanditSpec {
        &self.spec
    }

    /// The arm being pulled, `None` at the root.
    pub fn arm(&self) -> Option<usize> {
        self.arm
    }
}

impl GameState for BanditState {
    fn player_to_move(&self) -> Player {
        Player::Single
    }

    fn move_number(&self) -> usize {
        self.depth
    }

    fn legal_actions(&self) -> Vec<Action> {
        match self.arm {
            None => (0..self.spec.arms()).collect(),
            Some(_) => vec![0],
        }
    }

    fn apply(&self, action: Action) -> Result<Self> {
        let arm = match self.arm {
            None if action < self.spec.arms() => action,
            Some(arm) if action == 0 => arm,
            _ => {
                return Err(Error::IllegalAction {
                    action,
                    reason: "no such arm".into(),
                })
            }
        };
        Ok(BanditState {
            spec: Arc::clone(&self.spec),
            arm: Some(arm),
            depth: self.depth + 1,
        })
    }

    fn is_terminal(&self) -> bool {
        false
    }

    fn terminal_value(&self) -> f64 {
        0.0
    }

    fn action_space(&self) -> usize {
        self.spec.arms()
    }

    /// A random continuation is one pull of this arm (a random arm at the root).
    fn random_playout(&self, rng: &mut SearchRng) -> f64 {
        let arm = self
            .arm
            .unwrap_or_else(|| rng.random_range(0..self.spec.arms()));
        self.spec.pull(arm, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn certain_arm_always_pays() {
        let spec = BanditSpec::uniform(vec![1.0, 0.0], RewardLaw::Bernoulli).unwrap();
        let mut rng = rng_from_seed(0);
        assert!((0..1000).all(|_| spec.pull(0, &mut rng) == 1.0));
        assert!((0..1000).all(|_| spec.pull(1, &mut rng) == 0.0));
    }

    #[test]
    fn bernoulli_half_mean_within_binomial_interval() {
        // sd of the mean is 0.005 at 1e4 pulls; [0.48, 0.52] is a 4-sigma band.
        let spec = BanditSpec::uniform(vec![0.5, 0.5], RewardLaw::Bernoulli).unwrap();
        let mut rng = rng_from_seed(42);
        let mean = (0..10_000).map(|_| spec.pull(0, &mut rng)).sum::<f64>() / 1e4;
        assert!((0.48..=0.52).contains(&mean), "{mean}");
    }

    #[test]
    fn uniform_bounded_arm_support_and_mean() {
        // Uniform on [0, 0.6]: sd 0.173, sd of the mean 0.0017 at 1e4 samples.
        let spec = BanditSpec::uniform(vec![0.5, 0.3], RewardLaw::UniformBounded).unwrap();
        let mut rng = rng_from_seed(7);
        let draws: Vec<f64> = (0..10_000).map(|_| spec.pull(1, &mut rng)).collect();
        assert!(draws.iter().all(|r| (0.0..=0.6).contains(r)));
        let mean = draws.iter().sum::<f64>() / 1e4;
        assert!((mean - 0.3).abs() < 0.007, "{mean}");
    }

    #[test]
    fn chain_structure() {
        let s =
            BanditState::new(BanditSpec::uniform(vec![0.9, 0.1], RewardLaw::Bernoulli).unwrap());
        assert_eq!(s.legal_actions(), vec![0, 1]);
        let a = s.apply(1).unwrap();
        assert_eq!(a.arm(), Some(1));
        assert_eq!(a.legal_actions(), vec![0]);
        assert_eq!(a.apply(0).unwrap().arm(), Some(1));
        assert!(s.apply(2).is_err());
        assert!(a.apply(1).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(BanditSpec::uniform(vec![0.1, 0.9], RewardLaw::Bernoulli).is_err());
        assert!(BanditSpec::uniform(vec![0.5], RewardLaw::Bernoulli).is_err());
        assert!(BanditSpec::new(vec![0.5, 0.4], vec![0.7, 0.7], RewardLaw::Bernoulli).is_err());
    }
}
