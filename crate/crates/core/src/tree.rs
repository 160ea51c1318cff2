//! Arena-backed search tree with per-edge statistics.
//!
//! Each node stores the statistics of the edge that leads to it: `N(s,a)`,
//! the running value sum behind `Q(s,a)`, the prior `P(s,a)` and the
//! immediate reward `R(s,a)`. Values are stored from the perspective of the
//! player who chose that edge.

use serde::Serialize;

use crate::envs::Action;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeStats {
    pub visit_count: u32,
    pub value_sum: f64,
    pub prior: f64,
    pub reward: f64,
    pub expanded: bool,
}

impl NodeStats {
    fn fresh(prior: f64) -> Self {
        NodeStats {
            visit_count: 0,
            value_sum: 0.0,
            prior,
            reward: 0.0,
            expanded: false,
        }
    }

    /// Mean backed-up value, defined once the edge has been visited.
    pub fn mean(&self) -> Option<f64> {
        (self.visit_count > 0).then(|| self.value_sum / self.visit_count as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct Node {
    stats: NodeStats,
    parent: Option<NodeId>,
    action: Option<Action>,
    children: Vec<NodeId>,
    terminal: bool,
}

/// Running extremes of backed-up values, used to map Q into `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinMaxBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for MinMaxBounds {
    fn default() -> Self {
        MinMaxBounds {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl MinMaxBounds {
    pub fn update(&mut self, value: f64) {
        self.min = self.min.min(value);
        self.max = self.max.max(value);
    }

    /// Maps `value` into `[0, 1]`; identity until two distinct values were seen.
    pub fn normalize(&self, value: f64) -> f64 {
        if self.max > self.min {
            ((value - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        } else {
            value
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchTree {
    nodes: Vec<Node>,
    bounds: MinMaxBounds,
}

impl Default for SearchTree {
    fn default() -> Self {
        Self::new()
    }
}

impl SearchTree {
    /// A tree holding a single unexpanded root.
    pub fn new() -> Self {
        SearchTree {
            nodes: vec![Node {
                stats: NodeStats::fresh(1.0),
                parent: None,
                action: None,
                children: Vec::new(),
                terminal: false,
            }],
            bounds: MinMaxBounds::default(),
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn get(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id.index()).ok_or(Error::UnknownNode(id))
    }

    fn get_mut(&mut self, id: NodeId) -> Result<&mut Node> {
        self.nodes.get_mut(id.index()).ok_or(Error::UnknownNode(id))
    }

    pub fn stats(&self, id: NodeId) -> Result<&NodeStats> {
        Ok(&self.get(id)?.stats)
    }

    pub fn children(&self, id: NodeId) -> Result<&[NodeId]> {
        Ok(&self.get(id)?.children)
    }

    pub fn parent(&self, id: NodeId) -> Result<Option<NodeId>> {
        Ok(self.get(id)?.parent)
    }

    /// Action on the edge leading into `id`; `None` for the root.
    pub fn action(&self, id: NodeId) -> Result<Option<Action>> {
        Ok(self.get(id)?.action)
    }

    pub fn is_terminal(&self, id: NodeId) -> Result<bool> {
        Ok(self.get(id)?.terminal)
    }

    pub fn bounds(&self) -> MinMaxBounds {
        self.bounds
    }

    /// Creates one child per `(action, prior)` pair and marks `id` expanded.
    pub fn expand(&mut self, id: NodeId, actions: &[Action], priors: &[f64]) -> Result<()> {
        if actions.len() != priors.len() {
            return Err(Error::Evaluator(format!(
                "{} priors for {} actions",
                priors.len(),
                actions.len()
            )));
        }
        if self.get(id)?.stats.expanded {
            return Ok(());
        }
        let first = self.nodes.len() as u32;
        for (&action, &prior) in actions.iter().zip(priors) {
            self.nodes.push(Node {
                stats: NodeStats::fresh(prior),
                parent: Some(id),
                action: Some(action),
                children: Vec::new(),
                terminal: false,
            });
        }
        let node = self.get_mut(id)?;
        node.children = (first..first + actions.len() as u32).map(NodeId).collect();
        node.stats.expanded = true;
        Ok(())
    }

    pub fn mark_terminal(&mut self, id: NodeId) -> Result<()> {
        self.get_mut(id)?.terminal = true;
        Ok(())
    }

    pub fn set_reward(&mut self, id: NodeId, reward: f64) -> Result<()> {
        self.get_mut(id)?.stats.reward = reward;
        Ok(())
    }

    /// Overwrites the priors of `id`'s children, in child order.
    pub fn set_child_priors(&mut self, id: NodeId, priors: &[f64]) -> Result<()> {
        let children = self.get(id)?.children.clone();
        if children.len() != priors.len() {
            return Err(Error::Config(format!(
                "{} priors for {} children",
                priors.len(),
                children.len()
            )));
        }
        for (c, &p) in children.iter().zip(priors) {
            self.get_mut(*c)?.stats.prior = p;
        }
        Ok(())
    }

    /// Σ_b N(s,b) over the children of `id`.
    pub fn child_visits(&self, id: NodeId) -> Result<u32> {
        let node = self.get(id)?;
        Ok(node
            .children
            .iter()
            .map(|c| self.nodes[c.index()].stats.visit_count)
            .sum())
    }

    /// Default value for the unvisited children of `id`.
    ///
    /// Mixes the parent's default with the means of `id`'s visited children:
    /// `(base + Σ Q(s,b)) / (1 + #visited)`, where `base` is 0 at the root
    /// and the parent's default otherwise (negated in two-player mode, where
    /// the parent belongs to the opponent).
    pub fn unvisited_q_default(&self, id: NodeId, two_player: bool) -> Result<f64> {
        let mut chain = vec![id];
        let mut cur = id;
        while let Some(p) = self.get(cur)?.parent {
            chain.push(p);
            cur = p;
        }
        let mut base = 0.0;
        for &n in chain.iter().rev() {
            let (sum, count) = self.nodes[n.index()]
                .children
                .iter()
                .filter_map(|c| self.nodes[c.index()].stats.mean())
                .fold((0.0, 0u32), |(s, k), q| (s + q, k + 1));
            let inherited = if n == NodeId::ROOT {
                0.0
            } else if two_player {
                -base
            } else {
                base
            };
            base = (inherited + sum) / (1.0 + count as f64);
        }
        Ok(base)
    }

    /// Backs `leaf_value` up from the last node of `path` to the first.
    ///
    /// `leaf_value` is expressed from the perspective of the player who chose
    /// the edge into the leaf. Each node receives
    /// `G = reward + discount · G_child` (with `G_child` negated in
    /// two-player mode), and the leaf receives `reward + leaf_value`.
    pub fn backpropagate(
        &mut self,
        path: &[NodeId],
        leaf_value: f64,
        two_player: bool,
        discount: f64,
    ) -> Result<()> {
        let (&leaf, _) = path.split_last().ok_or(Error::EmptyPath)?;
        for id in path {
            self.get(*id)?;
        }
        let mut g = self.nodes[leaf.index()].stats.reward + leaf_value;
        for (i, id) in path.iter().enumerate().rev() {
            if i + 1 < path.len() {
                let child_g = if two_player { -g } else { g };
                g = self.nodes[id.index()].stats.reward + discount * child_g;
            }
            let stats = &mut self.nodes[id.index()].stats;
            stats.value_sum += g;
            stats.visit_count += 1;
            let mean = stats.value_sum / stats.visit_count as f64;
            if *id != NodeId::ROOT {
                self.bounds.update(mean);
            }
        }
        Ok(())
    }

    /// Test and tooling helper: attaches a child with preset statistics.
    pub fn push_child(
        &mut self,
        parent: NodeId,
        action: Action,
        stats: NodeStats,
    ) -> Result<NodeId> {
        self.get(parent)?;
        let id = NodeId(self.nodes.len() as u32);
        if let Some(mean) = stats.mean() {
            self.bounds.update(mean);
        }
        self.nodes.push(Node {
            stats,
            parent: Some(parent),
            action: Some(action),
            children: Vec::new(),
            terminal: false,
        });
        let p = self.get_mut(parent)?;
        p.children.push(id);
        p.stats.expanded = true;
        Ok(id)
    }

    /// Root edge visit counts, in child order.
    pub fn root_visits(&self) -> Vec<u32> {
        self.nodes[0]
            .children
            .iter()
            .map(|c| self.nodes[c.index()].stats.visit_count)
            .collect()
    }

    /// Root edge actions, in child order.
    pub fn root_actions(&self) -> Vec<Action> {
        self.nodes[0]
            .children
            .iter()
            .map(|c| self.nodes[c.index()].action.expect("child has an action"))
            .collect()
    }

    /// Raw mean value of each root edge, `None` where unvisited.
    pub fn root_means(&self) -> Vec<Option<f64>> {
        self.nodes[0]
            .children
            .iter()
            .map(|c| self.nodes[c.index()].stats.mean())
            .collect()
    }

    /// Checks the visit-count conservation invariant on every internal node.
    pub fn check_visit_conservation(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, n)| {
            if n.children.is_empty() {
                return true;
            }
            let sum: u32 = n
                .children
                .iter()
                .map(|c| self.nodes[c.index()].stats.visit_count)
                .sum();
            if i == 0 {
                sum == n.stats.visit_count
            } else {
                n.stats.visit_count == sum + 1
            }
        })
    }
}
