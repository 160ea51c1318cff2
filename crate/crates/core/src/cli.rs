//! Command line driver: configuration, matches, sweeps and the subcommands
//! `search | match | sweep | verify | play`.
//!
//! Configuration is a flat TOML file of `key = value` lines. Every key has a
//! flag of the same name (`board_size` is `--board-size`), flags win over
//! the file, and unknown keys are rejected.
//!
//! Per-game seeds are `derive_seed(seed, game_id)` and per-move seeds are
//! `derive_seed(game_seed, ply)`, so games can be sharded across workers in
//! any order and still replay identically.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envs::{
    Action, BanditSpec, BanditState, GameState, GoState, MnkState, Player, RewardLaw, TextBoard,
};
use crate::error::{Error, Result};
use crate::eval::{
    BanditEvaluator, Evaluator, GoHeuristicEvaluator, MinimaxEvaluator, RolloutEvaluator,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::search::{SearchConfig, SearchOutcome, TraceRecord};
use crate::theory::{verify_all, TheoryConfig, TheoryReport};
use crate::virtual_expansion::{
    continue_to_oracle, run_search, search_vmcts_with_tree, ExpansionMode, Norm, VetConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Tictactoe,
    Gomoku,
    Go,
    Bandit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionKind {
    Vmcts,
    Vanilla,
    Greedy,
    Truncated,
    Virtual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    Rollout,
    Heuristic,
    Minimax,
    Bandit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Epsilon,
    R,
    N,
    Norm,
    ExpansionMode,
}

/// Everything the subcommands need, loaded from a flat TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub env: EnvKind,
    pub board_size: Option<usize>,
    pub komi: f64,
    pub n: u32,
    pub r: f64,
    pub eps: f64,
    pub norm: Norm,
    pub check_every: u32,
    pub expansion: ExpansionKind,
    /// Forced stop for the truncated, greedy and virtual modes; `⌈rN⌉` when unset.
    pub k_stop: Option<u32>,
    pub opponent_expansion: ExpansionKind,
    pub opponent_n: Option<u32>,
    pub evaluator: EvaluatorKind,
    pub rollouts: usize,
    pub heuristic_slope: f64,
    pub minimax_limit: usize,
    pub c1: f64,
    pub c2: f64,
    pub dirichlet_alpha: Option<f64>,
    pub noise_fraction: f64,
    pub self_play: bool,
    pub resign: bool,
    pub resign_threshold: f64,
    pub games: u32,
    pub swap_colors: bool,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Record wall-clock columns; off keeps every output byte-identical per seed.
    pub timing: bool,
    pub state_file: Option<PathBuf>,
    pub moves: Option<String>,
    pub human_first: bool,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_grid: Vec<String>,
    pub trials: u32,
    pub delta: f64,
    pub bandit_means: Vec<f64>,
    pub bandit_law: RewardLaw,
}

impl Default for RunConfig {
    fn default() -> Self {
        let search = SearchConfig::default();
        RunConfig {
            env: EnvKind::Tictactoe,
            board_size: None,
            komi: crate::envs::DEFAULT_KOMI,
            n: search.budget,
            r: 0.2,
            eps: 0.1,
            norm: Norm::L1,
            check_every: 1,
            expansion: ExpansionKind::Vmcts,
            k_stop: None,
            opponent_expansion: ExpansionKind::Vanilla,
            opponent_n: None,
            evaluator: EvaluatorKind::Rollout,
            rollouts: 32,
            heuristic_slope: 0.25,
            minimax_limit: 1_000_000,
            c1: search.c1,
            c2: search.c2,
            dirichlet_alpha: None,
            noise_fraction: search.noise_fraction,
            self_play: false,
            resign: true,
            resign_threshold: -0.9,
            games: 2,
            swap_colors: true,
            seed: 0,
            workers: 1,
            out_dir: PathBuf::from("out"),
            timing: false,
            state_file: None,
            moves: None,
            human_first: true,
            sweep_axis: None,
            sweep_grid: Vec::new(),
            trials: 1000,
            delta: 0.1,
            bandit_means: crate::theory::default_instance().means,
            bandit_law: RewardLaw::UniformBounded,
        }
    }
}

fn byte_to_line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn toml_error(text: &str, err: &toml::de::Error) -> Error {
    let (line, column) = err
        .span()
        .map_or((0, 0), |s| byte_to_line_col(text, s.start));
    Error::Parse {
        line,
        column,
        message: err.message().to_string(),
    }
}

impl RunConfig {
    /// Parses a configuration document and checks every key's domain.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path` (or defaults) and applies the flag overrides on top.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let text = match path {
            Some(p) => {
                fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?
            }
            None => String::new(),
        };
        // Parse once on its own so file errors carry the file's locations.
        let _: RunConfig = toml::from_str(&text).map_err(|e| toml_error(&text, &e))?;
        let mut table: toml::Table = toml::from_str(&text).map_err(|e| toml_error(&text, &e))?;
        let extra = toml::Table::try_from(overrides).map_err(|e| Error::Config(e.to_string()))?;
        table.extend(extra);
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every key; all violations are reported together.
    pub fn validate(&self) -> Result<()> {
        let mut bad: Vec<String> = Vec::new();
        let mut check = |ok: bool, key: &str, msg: &str| {
            if !ok {
                bad.push(format!("{key}: {msg}"));
            }
        };
        match (self.env, self.board_size) {
            (EnvKind::Tictactoe, Some(s)) => check(s == 3, "board_size", "tictactoe is 3x3"),
            (EnvKind::Gomoku, Some(s)) => {
                check((5..=19).contains(&s), "board_size", "gomoku needs 5..=19")
            }
            (EnvKind::Go, Some(s)) => check((2..=19).contains(&s), "board_size", "go needs 2..=19"),
            (EnvKind::Bandit, Some(_)) => check(false, "board_size", "bandits have no board"),
            _ => {}
        }
        check(self.komi.is_finite(), "komi", "must be finite");
        check(self.n >= 2, "n", "must be at least 2");
        check(self.r > 0.0 && self.r < 1.0, "r", "must lie in (0, 1)");
        check(self.eps >= 0.0, "eps", "must be nonnegative");
        check(self.check_every >= 1, "check_every", "must be positive");
        if let Some(k) = self.k_stop {
            check(k >= 1 && k <= self.n, "k_stop", "must lie in [1, n]");
        }
        if let Some(n) = self.opponent_n {
            check(n >= 2, "opponent_n", "must be at least 2");
        }
        let evaluator_ok = matches!(
            (self.env, self.evaluator),
            (
                EnvKind::Tictactoe | EnvKind::Gomoku,
                EvaluatorKind::Rollout | EvaluatorKind::Minimax
            ) | (
                EnvKind::Go,
                EvaluatorKind::Rollout | EvaluatorKind::Heuristic
            ) | (
                EnvKind::Bandit,
                EvaluatorKind::Bandit | EvaluatorKind::Rollout
            )
        );
        check(evaluator_ok, "evaluator", "not available for this env");
        check(
            self.heuristic_slope > 0.0,
            "heuristic_slope",
            "must be positive",
        );
        check(self.minimax_limit >= 1, "minimax_limit", "must be positive");
        check(self.c1 > 0.0, "c1", "must be positive");
        check(self.c2 > 0.0, "c2", "must be positive");
        if let Some(a) = self.dirichlet_alpha {
            check(a > 0.0, "dirichlet_alpha", "must be positive");
        }
        check(
            (0.0..=1.0).contains(&self.noise_fraction),
            "noise_fraction",
            "must lie in [0, 1]",
        );
        check(
            (-1.0..0.0).contains(&self.resign_threshold),
            "resign_threshold",
            "must lie in [-1, 0)",
        );
        check(self.games >= 1, "games", "must be at least 1");
        if self.swap_colors {
            check(
                self.games.is_multiple_of(2),
                "games",
                "must be even when swap_colors is on",
            );
        }
        check(self.workers >= 1, "workers", "must be at least 1");
        check(self.trials >= 100, "trials", "must be at least 100");
        check(
            self.delta > 0.0 && self.delta < 1.0,
            "delta",
            "must lie in (0, 1)",
        );
        check(
            BanditSpec::uniform(self.bandit_means.clone(), self.bandit_law).is_ok(),
            "bandit_means",
            "need at least two means in [0, 1], sorted descending",
        );
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    pub fn default_board_size(&self) -> usize {
        self.board_size.unwrap_or(match self.env {
            EnvKind::Tictactoe => 3,
            EnvKind::Gomoku => 7,
            EnvKind::Go => 9,
            EnvKind::Bandit => self.bandit_means.len(),
        })
    }

    fn default_alpha(&self) -> f64 {
        match self.env {
            EnvKind::Tictactoe => 0.5,
            EnvKind::Gomoku | EnvKind::Bandit => 0.3,
            EnvKind::Go => 0.15,
        }
    }

    /// Search settings for one engine with budget `n`.
    pub fn search_config(&self, n: u32) -> SearchConfig {
        let base = if self.env == EnvKind::Bandit {
            SearchConfig::bandit(n)
        } else {
            SearchConfig {
                budget: n,
                resign_threshold: self.resign.then_some(self.resign_threshold),
                ..Default::default()
            }
        };
        let cfg = SearchConfig {
            c1: self.c1,
            c2: self.c2,
            dirichlet_alpha: self.dirichlet_alpha.unwrap_or_else(|| self.default_alpha()),
            noise_fraction: self.noise_fraction,
            seed: self.seed,
            ..base
        };
        if self.self_play {
            cfg.self_play()
        } else {
            cfg
        }
    }

    pub fn vet(&self) -> VetConfig {
        VetConfig {
            min_ratio: self.r,
            epsilon: self.eps,
            norm: self.norm,
            check_every: self.check_every,
        }
    }

    pub fn expansion_mode(&self, kind: ExpansionKind, n: u32) -> ExpansionMode {
        let k_stop = self
            .k_stop
            .unwrap_or_else(|| self.vet().min_iterations(n))
            .min(n);
        match kind {
            ExpansionKind::Vmcts => ExpansionMode::Vmcts(self.vet()),
            ExpansionKind::Vanilla => ExpansionMode::Vanilla,
            ExpansionKind::Greedy => ExpansionMode::Greedy { k_stop },
            ExpansionKind::Truncated => ExpansionMode::Truncated { k_stop },
            ExpansionKind::Virtual => ExpansionMode::Virtual { k_stop },
        }
    }

    pub fn engine_a(&self) -> EngineSpec {
        EngineSpec {
            search: self.search_config(self.n),
            mode: self.expansion_mode(self.expansion, self.n),
        }
    }

    pub fn engine_b(&self) -> EngineSpec {
        let n = self.opponent_n.unwrap_or(self.n);
        EngineSpec {
            search: self.search_config(n),
            mode: self.expansion_mode(self.opponent_expansion, n),
        }
    }

    pub fn match_spec(&self) -> MatchSpec {
        MatchSpec {
            env: self.env,
            board_size: self.default_board_size(),
            engine_a: self.engine_a(),
            engine_b: self.engine_b(),
            games: self.games,
            swap_colors: self.swap_colors,
            base_seed: self.seed,
            workers: self.workers,
            timing: self.timing,
        }
    }

    pub fn bandit_spec(&self) -> Result<BanditSpec> {
        BanditSpec::uniform(self.bandit_means.clone(), self.bandit_law)
    }

    pub fn theory_config(&self) -> Result<TheoryConfig> {
        Ok(TheoryConfig {
            spec: self.bandit_spec()?,
            budget: self.n,
            min_ratio: self.r,
            delta: self.delta,
            trials: self.trials,
            seed: self.seed,
            epsilon: self.eps,
            norm: self.norm,
        })
    }

    /// Sets one sweep axis from its text value.
    pub fn with_axis(&self, axis: SweepAxis, value: &str) -> Result<RunConfig> {
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("sweep value '{v}' is not a number")))
        };
        let mut cfg = self.clone();
        match axis {
            SweepAxis::Epsilon => cfg.eps = num(value)?,
            SweepAxis::R => cfg.r = num(value)?,
            SweepAxis::N => {
                cfg.n = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("sweep value '{value}' is not a budget")))?
            }
            SweepAxis::Norm => cfg.norm = value.parse()?,
            SweepAxis::ExpansionMode => {
                cfg.expansion = ExpansionKind::from_str(value.trim(), true)
                    .map_err(|_| Error::Config(format!("unknown expansion mode '{value}'")))?
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One flag per configuration key; unset flags leave the file value alone.
#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct Overrides {
    /// Flat TOML configuration file
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env: Option<EnvKind>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub board_size: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub komi: Option<f64>,
    /// Search budget N
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Minimum searched fraction before early termination
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Termination tolerance
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<Norm>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_every: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<ExpansionKind>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_stop: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opponent_expansion: Option<ExpansionKind>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opponent_n: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluator: Option<EvaluatorKind>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rollouts: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heuristic_slope: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimax_limit: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dirichlet_alpha: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_fraction: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_play: Option<bool>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resign: Option<bool>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resign_threshold: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub games: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_colors: Option<bool>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
    /// Text board to start from
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_file: Option<PathBuf>,
    /// Space-separated moves applied to the start position, e.g. "c3 b2"
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moves: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub human_first: Option<bool>,
    #[arg(long = "axis", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_axis: Option<SweepAxis>,
    /// Comma-separated sweep values
    #[arg(long = "grid", global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_grid: Option<Vec<String>>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandit_means: Option<Vec<f64>>,
    #[arg(long, global = true, value_parser = parse_law)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandit_law: Option<RewardLaw>,
}

fn parse_law(s: &str) -> std::result::Result<RewardLaw, String> {
    match s {
        "bernoulli" => Ok(RewardLaw::Bernoulli),
        "uniform-bounded" => Ok(RewardLaw::UniformBounded),
        _ => Err("expected bernoulli or uniform-bounded".into()),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "vmcts",
    version,
    about = "MCTS with virtual expansion and early termination"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Run one search and write its trace and policy heatmap
    Search,
    /// Play engine A against engine B
    Match,
    /// Run one match per grid value of an axis
    Sweep,
    /// Check the bandit sample-complexity bounds
    Verify,
    /// Play against the engine on the terminal
    Play,
}

// ---------------------------------------------------------------------------
// Environments

fn apply_moves<S: GameState + TextBoard>(mut state: S, moves: Option<&str>) -> Result<S> {
    for token in moves.unwrap_or("").split_whitespace() {
        let action = state.parse_action(token)?;
        state = state.apply(action)?;
    }
    Ok(state)
}

fn load_start<S: GameState + TextBoard>(cfg: &RunConfig, fresh: S) -> Result<S> {
    let start = match &cfg.state_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            S::from_text(&text)?
        }
        None => fresh,
    };
    apply_moves(start, cfg.moves.as_deref())
}

/// Work that runs on whichever board game the configuration selects.
pub trait BoardTask {
    type Output;
    fn run<S: GameState + TextBoard + 'static>(
        self,
        start: S,
        evaluator: Box<dyn Evaluator<S>>,
        cfg: &RunConfig,
    ) -> Result<Self::Output>;
}

pub fn with_board<T: BoardTask>(cfg: &RunConfig, task: T) -> Result<T::Output> {
    match cfg.env {
        EnvKind::Tictactoe | EnvKind::Gomoku => {
            let fresh = if cfg.env == EnvKind::Tictactoe {
                MnkState::tictactoe()
            } else {
                MnkState::gomoku(cfg.default_board_size())
            };
            let start = load_start(cfg, fresh)?;
            let evaluator: Box<dyn Evaluator<MnkState>> = match cfg.evaluator {
                EvaluatorKind::Minimax => {
                    Box::new(MinimaxEvaluator::solve(&start, cfg.minimax_limit)?)
                }
                _ => Box::new(RolloutEvaluator::new(cfg.rollouts)),
            };
            task.run(start, evaluator, cfg)
        }
        EnvKind::Go => {
            let start = load_start(cfg, GoState::with_komi(cfg.default_board_size(), cfg.komi))?;
            let evaluator: Box<dyn Evaluator<GoState>> = match cfg.evaluator {
                EvaluatorKind::Heuristic => Box::new(GoHeuristicEvaluator {
                    slope: cfg.heuristic_slope,
                }),
                _ => Box::new(RolloutEvaluator::new(cfg.rollouts)),
            };
            task.run(start, evaluator, cfg)
        }
        EnvKind::Bandit => Err(Error::Config("this command needs a board game env".into())),
    }
}

// ---------------------------------------------------------------------------
// search

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceDocument {
    pub env: EnvKind,
    pub budget: u32,
    pub r: f64,
    pub epsilon: f64,
    pub norm: Norm,
    pub seed: u64,
    pub iterations_used: u32,
    pub terminated_early: bool,
    pub records: Vec<TraceRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OffBoardEntry {
    pub action: Action,
    pub label: String,
    pub pi_hat_k: f64,
    pub pi_n: f64,
}

/// Row-major policies for side-by-side rendering.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatmapDocument {
    pub env: EnvKind,
    pub width: usize,
    pub height: usize,
    pub budget: u32,
    pub iterations_used: u32,
    pub terminated_early: bool,
    pub chosen_action: String,
    /// The returned policy: `π̂_k` when the search stopped early, else `π_N`.
    pub pi_hat_k: Vec<f64>,
    /// Full-budget policy continued from the same tree.
    pub pi_n: Vec<f64>,
    /// Actions without a board cell, such as a Go pass.
    pub off_board: Vec<OffBoardEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub outcome: SearchOutcome,
    pub trace: TraceDocument,
    pub heatmap: HeatmapDocument,
}

fn search_report<S: GameState, E: Evaluator<S> + ?Sized>(
    start: &S,
    evaluator: &E,
    cfg: &RunConfig,
    dims: (usize, usize),
    label: impl Fn(Action) -> String,
) -> Result<SearchReport> {
    let search = cfg.search_config(cfg.n);
    let vet = cfg.vet();
    let (mut outcome, tree) = search_vmcts_with_tree(start, evaluator, &search, &vet)?;
    if !cfg.timing {
        for rec in &mut outcome.trace {
            rec.virtual_time_ns = 0;
        }
    }
    let oracle = continue_to_oracle(
        &tree,
        start,
        evaluator,
        &search,
        rng_from_seed(derive_seed(cfg.seed, 1)),
    )?;
    let (width, height) = dims;
    let mut pi_hat_k = vec![0.0; width * height];
    let mut pi_n = vec![0.0; width * height];
    let mut off_board = Vec::new();
    for &a in outcome.policy.actions() {
        let (p, q) = (outcome.policy.probability(a), oracle.probability(a));
        if a < width * height {
            pi_hat_k[a] = p;
            pi_n[a] = q;
        } else {
            off_board.push(OffBoardEntry {
                action: a,
                label: label(a),
                pi_hat_k: p,
                pi_n: q,
            });
        }
    }
    let trace = TraceDocument {
        env: cfg.env,
        budget: cfg.n,
        r: cfg.r,
        epsilon: cfg.eps,
        norm: cfg.norm,
        seed: cfg.seed,
        iterations_used: outcome.iterations_used,
        terminated_early: outcome.terminated_early,
        records: outcome.trace.clone(),
    };
    let heatmap = HeatmapDocument {
        env: cfg.env,
        width,
        height,
        budget: cfg.n,
        iterations_used: outcome.iterations_used,
        terminated_early: outcome.terminated_early,
        chosen_action: label(outcome.chosen_action),
        pi_hat_k,
        pi_n,
        off_board,
    };
    Ok(SearchReport {
        outcome,
        trace,
        heatmap,
    })
}

struct SearchTask;

impl BoardTask for SearchTask {
    type Output = SearchReport;
    fn run<S: GameState + TextBoard + 'static>(
        self,
        start: S,
        evaluator: Box<dyn Evaluator<S>>,
        cfg: &RunConfig,
    ) -> Result<SearchReport> {
        search_report(&start, evaluator.as_ref(), cfg, start.board_dims(), |a| {
            start.format_action(a)
        })
    }
}

/// Runs one V-MCTS search without writing files.
pub fn search_only(cfg: &RunConfig) -> Result<SearchReport> {
    if cfg.env == EnvKind::Bandit {
        let state = BanditState::new(cfg.bandit_spec()?);
        let arms = cfg.bandit_means.len();
        return match cfg.evaluator {
            EvaluatorKind::Rollout => search_report(
                &state,
                &RolloutEvaluator::new(cfg.rollouts),
                cfg,
                (arms, 1),
                |a| format!("arm{a}"),
            ),
            _ => search_report(&state, &BanditEvaluator, cfg, (arms, 1), |a| {
                format!("arm{a}")
            }),
        };
    }
    with_board(cfg, SearchTask)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

/// Writes `trace.json` and `heatmap.json` into the output directory.
pub fn cmd_search(cfg: &RunConfig) -> Result<SearchReport> {
    let report = search_only(cfg)?;
    ensure_dir(&cfg.out_dir)?;
    write_json(&cfg.out_dir.join("trace.json"), &report.trace)?;
    write_json(&cfg.out_dir.join("heatmap.json"), &report.heatmap)?;
    log::info!(
        "search used {} of {} iterations, action {}",
        report.outcome.iterations_used,
        cfg.n,
        report.heatmap.chosen_action
    );
    Ok(report)
}

// ---------------------------------------------------------------------------
// match

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EngineSpec {
    pub search: SearchConfig,
    pub mode: ExpansionMode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchSpec {
    pub env: EnvKind,
    pub board_size: usize,
    pub engine_a: EngineSpec,
    pub engine_b: EngineSpec,
    pub games: u32,
    pub swap_colors: bool,
    pub base_seed: u64,
    pub workers: usize,
    pub timing: bool,
}

impl MatchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.games == 0 || (self.swap_colors && !self.games.is_multiple_of(2)) {
            return Err(Error::Config(
                "games must be positive, and even when colors swap".into(),
            ));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        self.engine_a.search.validate()?;
        self.engine_b.search.validate()
    }

    /// Whether engine A moves first in game `game_id`.
    pub fn a_first(&self, game_id: u32) -> bool {
        !self.swap_colors || game_id.is_multiple_of(2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    A,
    B,
    Draw,
    Fault,
}

impl Winner {
    fn as_str(self) -> &'static str {
        match self {
            Winner::A => "a",
            Winner::B => "b",
            Winner::Draw => "draw",
            Winner::Fault => "fault",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BudgetTally {
    pub moves: u32,
    pub total: u64,
    pub total_sq: u64,
}

impl BudgetTally {
    fn add(&mut self, k: u32) {
        self.moves += 1;
        self.total += k as u64;
        self.total_sq += (k as u64) * (k as u64);
    }

    pub fn mean(&self) -> f64 {
        if self.moves == 0 {
            0.0
        } else {
            self.total as f64 / self.moves as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameRow {
    pub game_id: u32,
    pub seed: u64,
    pub winner: Winner,
    pub a_first: bool,
    pub moves: u32,
    pub resigned: bool,
    pub budget_a: BudgetTally,
    pub budget_b: BudgetTally,
    pub wall_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchSummary {
    pub games: u32,
    pub faults: u32,
    pub a_wins: u32,
    pub b_wins: u32,
    pub draws: u32,
    pub a_first_games: u32,
    /// Engine A score rate, draws counting one half.
    pub win_rate: f64,
    pub win_rate_stderr: f64,
    pub budget_a_mean: f64,
    pub budget_a_sd: f64,
    pub budget_b_mean: f64,
    pub budget_b_sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchReport {
    pub spec: MatchSpec,
    pub rows: Vec<GameRow>,
    pub summary: MatchSummary,
}

pub const CSV_HEADER: &str = "game_id,seed,winner,moves,budget_a,budget_b,wall_ms";

impl MatchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.3},{:.3},{}",
                r.game_id,
                r.seed,
                r.winner.as_str(),
                r.moves,
                r.budget_a.mean(),
                r.budget_b.mean(),
                r.wall_ms
            );
        }
        out
    }
}

fn pooled(tallies: impl Iterator<Item = BudgetTally>) -> (f64, f64) {
    let mut all = BudgetTally::default();
    for t in tallies {
        all.moves += t.moves;
        all.total += t.total;
        all.total_sq += t.total_sq;
    }
    if all.moves == 0 {
        return (0.0, 0.0);
    }
    let n = all.moves as f64;
    let mean = all.total as f64 / n;
    let var = if all.moves > 1 {
        ((all.total_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn summarize(rows: &[GameRow]) -> MatchSummary {
    let count = |w: Winner| rows.iter().filter(|r| r.winner == w).count() as u32;
    let (a_wins, b_wins, draws, faults) = (
        count(Winner::A),
        count(Winner::B),
        count(Winner::Draw),
        count(Winner::Fault),
    );
    let played = a_wins + b_wins + draws;
    let (win_rate, win_rate_stderr) = if played == 0 {
        (0.0, 0.0)
    } else {
        let p = (a_wins as f64 + 0.5 * draws as f64) / played as f64;
        (p, (p * (1.0 - p) / played as f64).sqrt())
    };
    let (budget_a_mean, budget_a_sd) = pooled(rows.iter().map(|r| r.budget_a.clone()));
    let (budget_b_mean, budget_b_sd) = pooled(rows.iter().map(|r| r.budget_b.clone()));
    MatchSummary {
        games: rows.len() as u32,
        faults,
        a_wins,
        b_wins,
        draws,
        a_first_games: rows.iter().filter(|r| r.a_first).count() as u32,
        win_rate,
        win_rate_stderr,
        budget_a_mean,
        budget_a_sd,
        budget_b_mean,
        budget_b_sd,
    }
}

/// Plays one game; engine failures become a fault row.
pub fn play_game<S: GameState, E: Evaluator<S> + ?Sized>(
    start: &S,
    evaluator: &E,
    spec: &MatchSpec,
    game_id: u32,
) -> GameRow {
    let seed = derive_seed(spec.base_seed, game_id as u64);
    let a_first = spec.a_first(game_id);
    let started = Instant::now();
    let mut row = GameRow {
        game_id,
        seed,
        winner: Winner::Fault,
        a_first,
        moves: 0,
        resigned: false,
        budget_a: BudgetTally::default(),
        budget_b: BudgetTally::default(),
        wall_ms: 0,
        fault: None,
    };
    let mut state = start.clone();
    let result: Result<Winner> = loop {
        if state.is_terminal() {
            let v = state.terminal_value();
            break Ok(if v == 0.0 {
                Winner::Draw
            } else if (v > 0.0) == a_first {
                Winner::A
            } else {
                Winner::B
            });
        }
        let mover_is_a = (state.player_to_move() == Player::First) == a_first;
        let engine = if mover_is_a {
            &spec.engine_a
        } else {
            &spec.engine_b
        };
        let cfg = engine
            .search
            .clone()
            .with_seed(derive_seed(seed, row.moves as u64));
        let out = match run_search(&state, evaluator, &cfg, &engine.mode) {
            Ok(out) => out,
            Err(e) => break Err(e),
        };
        if mover_is_a {
            row.budget_a.add(out.iterations_used);
        } else {
            row.budget_b.add(out.iterations_used);
        }
        if out.resigned {
            row.resigned = true;
            break Ok(if mover_is_a { Winner::B } else { Winner::A });
        }
        row.moves += 1;
        match state.apply(out.chosen_action) {
            Ok(next) => state = next,
            Err(e) => break Err(e),
        }
    };
    match result {
        Ok(w) => row.winner = w,
        Err(e) => {
            log::warn!("game {game_id} aborted: {e}");
            row.fault = Some(e.to_string());
        }
    }
    if spec.timing {
        row.wall_ms = started.elapsed().as_millis() as u64;
    }
    row
}

/// Plays all games of a match; rows come back in game order.
pub fn play_match<S: GameState, E: Evaluator<S> + ?Sized>(
    start: &S,
    evaluator: &E,
    spec: &MatchSpec,
) -> Result<MatchReport> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let rows: Vec<GameRow> = pool.install(|| {
        (0..spec.games)
            .into_par_iter()
            .map(|g| play_game(start, evaluator, spec, g))
            .collect()
    });
    let summary = summarize(&rows);
    Ok(MatchReport {
        spec: spec.clone(),
        rows,
        summary,
    })
}

struct MatchTask;

impl BoardTask for MatchTask {
    type Output = MatchReport;
    fn run<S: GameState + TextBoard + 'static>(
        self,
        start: S,
        evaluator: Box<dyn Evaluator<S>>,
        cfg: &RunConfig,
    ) -> Result<MatchReport> {
        play_match(&start, evaluator.as_ref(), &cfg.match_spec())
    }
}

/// Runs a match without writing files.
pub fn match_only(cfg: &RunConfig) -> Result<MatchReport> {
    with_board(cfg, MatchTask)
}

fn write_match(dir: &Path, stem: &str, report: &MatchReport) -> Result<()> {
    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&csv, report.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", csv.display())))?;
    write_json(&dir.join(format!("{stem}.json")), report)
}

/// Writes `match.csv` and `match.json` into the output directory.
pub fn cmd_match(cfg: &RunConfig) -> Result<MatchReport> {
    let report = match_only(cfg)?;
    ensure_dir(&cfg.out_dir)?;
    write_match(&cfg.out_dir, "match", &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: String,
    pub report: MatchReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn summary_csv(&self) -> String {
        let mut out =
            String::from("axis,value,games,faults,win_rate,win_rate_stderr,budget_a_mean,budget_a_sd,budget_b_mean\n");
        let axis = serde_json::to_value(self.axis)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        for p in &self.points {
            let s = &p.report.summary;
            let _ = writeln!(
                out,
                "{axis},{},{},{},{:.4},{:.4},{:.3},{:.3},{:.3}",
                p.value,
                s.games,
                s.faults,
                s.win_rate,
                s.win_rate_stderr,
                s.budget_a_mean,
                s.budget_a_sd,
                s.budget_b_mean
            );
        }
        out
    }
}

/// One match per grid value; nothing is written.
pub fn sweep_only(cfg: &RunConfig) -> Result<SweepReport> {
    let axis = cfg
        .sweep_axis
        .ok_or_else(|| Error::Config("sweep needs an axis (--axis)".into()))?;
    if cfg.sweep_grid.is_empty() {
        return Err(Error::Config("sweep grid is empty (--grid)".into()));
    }
    // Validate every point before playing any game.
    let configs: Vec<RunConfig> = cfg
        .sweep_grid
        .iter()
        .map(|v| cfg.with_axis(axis, v))
        .collect::<Result<_>>()?;
    let points = cfg
        .sweep_grid
        .iter()
        .zip(&configs)
        .map(|(value, c)| {
            log::info!("sweep point {value}");
            Ok(SweepPoint {
                value: value.trim().to_string(),
                report: match_only(c)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepReport { axis, points })
}

/// Writes `point_<i>.csv/json`, `sweep_summary.csv` and `sweep.json`.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepReport> {
    let report = sweep_only(cfg)?;
    ensure_dir(&cfg.out_dir)?;
    for (i, p) in report.points.iter().enumerate() {
        write_match(&cfg.out_dir, &format!("point_{i}"), &p.report)?;
    }
    let summary = cfg.out_dir.join("sweep_summary.csv");
    fs::write(&summary, report.summary_csv())
        .map_err(|e| Error::Io(format!("{}: {e}", summary.display())))?;
    write_json(&cfg.out_dir.join("sweep.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// verify

/// Writes `theory_report.json`; the caller exits nonzero on `any_failure`.
pub fn cmd_verify(cfg: &RunConfig) -> Result<TheoryReport> {
    let report = verify_all(&cfg.theory_config()?)?;
    ensure_dir(&cfg.out_dir)?;
    write_json(&cfg.out_dir.join("theory_report.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// play

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaySummary {
    pub moves: u32,
    /// "human", "engine", "draw", or "unfinished".
    pub result: String,
}

struct PlayTask<'a, R, W> {
    input: &'a mut R,
    output: &'a mut W,
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

impl<R: BufRead, W: Write> BoardTask for PlayTask<'_, R, W> {
    type Output = PlaySummary;
    fn run<S: GameState + TextBoard + 'static>(
        self,
        start: S,
        evaluator: Box<dyn Evaluator<S>>,
        cfg: &RunConfig,
    ) -> Result<PlaySummary> {
        let PlayTask { input, output } = self;
        let human = if cfg.human_first {
            Player::First
        } else {
            Player::Second
        };
        let engine = cfg.engine_a();
        let mut state = start;
        let mut moves = 0u32;
        let mut line = String::new();
        loop {
            write!(output, "\n{}", state.to_text()).map_err(io_err)?;
            if state.is_terminal() {
                let v = state.terminal_value() * human.sign();
                let result = if v > 0.0 {
                    "human"
                } else if v < 0.0 {
                    "engine"
                } else {
                    "draw"
                };
                writeln!(output, "game over: {result}").map_err(io_err)?;
                return Ok(PlaySummary {
                    moves,
                    result: result.into(),
                });
            }
            if state.player_to_move() == human {
                write!(output, "your move> ").map_err(io_err)?;
                output.flush().map_err(io_err)?;
                line.clear();
                if input.read_line(&mut line).map_err(io_err)? == 0 || line.trim() == "quit" {
                    writeln!(output, "bye").map_err(io_err)?;
                    return Ok(PlaySummary {
                        moves,
                        result: "unfinished".into(),
                    });
                }
                let parsed = state.parse_action(line.trim()).and_then(|a| state.apply(a));
                match parsed {
                    Ok(next) => {
                        state = next;
                        moves += 1;
                    }
                    Err(e) => writeln!(output, "illegal move: {e}").map_err(io_err)?,
                }
                continue;
            }
            let cfg_move = engine
                .search
                .clone()
                .with_seed(derive_seed(cfg.seed, moves as u64));
            let out = run_search(&state, evaluator.as_ref(), &cfg_move, &engine.mode)?;
            let delta = out.trace.iter().rev().find_map(|r| match cfg.norm {
                Norm::L1 => r.delta_l1,
                Norm::L2 => r.delta_l2,
            });
            if out.resigned {
                writeln!(
                    output,
                    "engine resigns (k = {}/{})",
                    out.iterations_used, cfg.n
                )
                .map_err(io_err)?;
                return Ok(PlaySummary {
                    moves,
                    result: "human".into(),
                });
            }
            writeln!(
                output,
                "engine plays {} (k = {}/{}{})",
                state.format_action(out.chosen_action),
                out.iterations_used,
                cfg.n,
                delta
                    .map(|d| format!(", delta = {d:.4}"))
                    .unwrap_or_default()
            )
            .map_err(io_err)?;
            state = state.apply(out.chosen_action)?;
            moves += 1;
        }
    }
}

/// Alternates text moves read from `input` with engine moves.
pub fn cmd_play<R: BufRead, W: Write>(
    cfg: &RunConfig,
    input: &mut R,
    output: &mut W,
) -> Result<PlaySummary> {
    with_board(cfg, PlayTask { input, output })
}

// ---------------------------------------------------------------------------
// entry point

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = RunConfig::load(cli.overrides.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Search => {
            let r = cmd_search(&cfg)?;
            println!(
                "k = {}/{} terminated_early = {} action = {}",
                r.outcome.iterations_used,
                cfg.n,
                r.outcome.terminated_early,
                r.heatmap.chosen_action
            );
        }
        Command::Match => {
            let s = cmd_match(&cfg)?.summary;
            println!(
                "games {} faults {} win rate A {:.3} ± {:.3} budget A {:.1} ± {:.1} budget B {:.1} ± {:.1}",
                s.games, s.faults, s.win_rate, s.win_rate_stderr, s.budget_a_mean, s.budget_a_sd, s.budget_b_mean, s.budget_b_sd
            );
        }
        Command::Sweep => print!("{}", cmd_sweep(&cfg)?.summary_csv()),
        Command::Verify => {
            let report = cmd_verify(&cfg)?;
            for c in &report.claims {
                println!(
                    "{} {:?} frequency {:.5} bound {:.6}",
                    c.claim, c.status, c.empirical_frequency, c.theoretical_bound
                );
            }
            if let Some(a) = &report.adaptivity {
                println!(
                    "adaptivity easy {:.1} hard {:.1} p {:.3e}",
                    a.easy_mean_k, a.hard_mean_k, a.p_value
                );
            }
            if report.any_failure() {
                return Ok(1);
            }
        }
        Command::Play => {
            let stdin = std::io::stdin();
            let stdout = std::io::stdout();
            cmd_play(&cfg, &mut stdin.lock(), &mut stdout.lock())?;
        }
    }
    Ok(0)
}

/// Process entry: logging from `VMCTS_LOG`, argument parsing, exit code.
pub fn main() -> i32 {
    let _ =
        env_logger::Builder::from_env(env_logger::Env::default().filter_or("VMCTS_LOG", "warn"))
            .try_init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
