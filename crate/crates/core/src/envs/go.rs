//! Go under Tromp-Taylor area scoring with positional superko.
//!
//! Suicide is illegal. A game ends after two consecutive passes or once
//! `2·n² + 1` moves have been played; either way the position is area-scored.

use std::sync::OnceLock;

use crate::envs::text::{
    field_err, format_point, parse_board, parse_point, render_rows, TextBoard,
};
use crate::envs::{Action, GameState, Player};
use crate::error::{Error, Result};
use crate::rng::splitmix64;

pub const DEFAULT_KOMI: f64 = 6.5;
const MAX_POINTS: usize = 19 * 19;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Stone {
    Empty = 0,
    Black = 1,
    White = 2,
}

impl Stone {
    fn of(player: Player) -> Stone {
        match player {
            Player::First => Stone::Black,
            _ => Stone::White,
        }
    }

    fn other(self) -> Stone {
        match self {
            Stone::Black => Stone::White,
            Stone::White => Stone::Black,
            Stone::Empty => Stone::Empty,
        }
    }
}

fn zobrist() -> &'static [[u64; 2]] {
    static TABLE: OnceLock<Vec<[u64; 2]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..MAX_POINTS as u64)
            .map(|i| [splitmix64(2 * i + 1), splitmix64(2 * i + 2)])
            .collect()
    })
}

fn position_hash(board: &[Stone]) -> u64 {
    let keys = zobrist();
    board
        .iter()
        .enumerate()
        .filter(|(_, s)| **s != Stone::Empty)
        .fold(0, |h, (i, s)| h ^ keys[i][*s as usize - 1])
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoState {
    size: u8,
    board: Vec<Stone>,
    komi: f64,
    to_move: Player,
    passes: u8,
    move_number: usize,
    /// Hashes of every whole-board position seen so far, current one included.
    history: Vec<u64>,
}

impl GoState {
    pub fn new(size: usize) -> Self {
        Self::with_komi(size, DEFAULT_KOMI)
    }

    pub fn with_komi(size: usize, komi: f64) -> Self {
        assert!((2..=19).contains(&size), "board size {size} out of range");
        let board = vec![Stone::Empty; size * size];
        GoState {
            size: size as u8,
            history: vec![position_hash(&board)],
            board,
            komi,
            to_move: Player::First,
            passes: 0,
            move_number: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    pub fn komi(&self) -> f64 {
        self.komi
    }

    pub fn board(&self) -> &[Stone] {
        &self.board
    }

    pub fn pass_action(&self) -> Action {
        self.board.len()
    }

    pub fn max_moves(&self) -> usize {
        2 * self.board.len() + 1
    }

    fn neighbors(&self, p: usize) -> impl Iterator<Item = usize> {
        let n = self.size();
        let (x, y) = (p % n, p / n);
        let mut out = [usize::MAX; 4];
        if x > 0 {
            out[0] = p - 1;
        }
        if x + 1 < n {
            out[1] = p + 1;
        }
        if y > 0 {
            out[2] = p - n;
        }
        if y + 1 < n {
            out[3] = p + n;
        }
        out.into_iter().filter(|&q| q != usize::MAX)
    }

    /// Stones of the group at `p` and whether it has any liberty.
    fn group(&self, board: &[Stone], p: usize) -> (Vec<usize>, bool) {
        let color = board[p];
        let mut seen = vec![false; board.len()];
        let mut stack = vec![p];
        let mut stones = Vec::new();
        let mut has_liberty = false;
        seen[p] = true;
        while let Some(q) = stack.pop() {
            stones.push(q);
            for r in self.neighbors(q) {
                if board[r] == Stone::Empty {
                    has_liberty = true;
                } else if board[r] == color && !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        (stones, has_liberty)
    }

    /// Board after `player` plays at `p`, or `None` for suicide.
    fn place(&self, p: usize, player: Player) -> Option<Vec<Stone>> {
        let mine = Stone::of(player);
        let mut board = self.board.clone();
        board[p] = mine;
        for q in self.neighbors(p) {
            if board[q] == mine.other() {
                let (stones, alive) = self.group(&board, q);
                if !alive {
                    for s in stones {
                        board[s] = Stone::Empty;
                    }
                }
            }
        }
        let (_, alive) = self.group(&board, p);
        alive.then_some(board)
    }

    fn point_status(&self, p: usize) -> std::result::Result<Vec<Stone>, &'static str> {
        if self.board[p] != Stone::Empty {
            return Err("point is occupied");
        }
        let board = self.place(p, self.to_move).ok_or("suicide")?;
        if self.history.contains(&position_hash(&board)) {
            return Err("positional superko");
        }
        Ok(board)
    }

    /// Tromp-Taylor area counts `(black, white)`.
    pub fn area(&self) -> (usize, usize) {
        let mut black = 0;
        let mut white = 0;
        let mut seen = vec![false; self.board.len()];
        for p in 0..self.board.len() {
            match self.board[p] {
                Stone::Black => black += 1,
                Stone::White => white += 1,
                Stone::Empty if !seen[p] => {
                    let mut region = 0;
                    let (mut touches_black, mut touches_white) = (false, false);
                    let mut stack = vec![p];
                    seen[p] = true;
                    while let Some(q) = stack.pop() {
                        region += 1;
                        for r in self.neighbors(q) {
                            match self.board[r] {
                                Stone::Black => touches_black = true,
                                Stone::White => touches_white = true,
                                Stone::Empty if !seen[r] => {
                                    seen[r] = true;
                                    stack.push(r);
                                }
                                Stone::Empty => {}
                            }
                        }
                    }
                    match (touches_black, touches_white) {
                        (true, false) => black += region,
                        (false, true) => white += region,
                        _ => {}
                    }
                }
                Stone::Empty => {}
            }
        }
        (black, white)
    }

    /// Black's area minus White's area minus komi.
    pub fn score(&self) -> f64 {
        let (b, w) = self.area();
        b as f64 - w as f64 - self.komi
    }
}

impl GameState for GoState {
    fn player_to_move(&self) -> Player {
        self.to_move
    }

    fn move_number(&self) -> usize {
        self.move_number
    }

    fn legal_actions(&self) -> Vec<Action> {
        if self.is_terminal() {
            return Vec::new();
        }
        let mut legal: Vec<Action> = (0..self.board.len())
            .filter(|&p| self.point_status(p).is_ok())
            .collect();
        legal.push(self.pass_action());
        legal
    }

    fn apply(&self, action: Action) -> Result<Self> {
        if self.is_terminal() {
            return Err(Error::IllegalAction {
                action,
                reason: "game is over".into(),
            });
        }
        let mut next = self.clone();
        if action == self.pass_action() {
            next.passes += 1;
        } else if action < self.board.len() {
            next.board = self
                .point_status(action)
                .map_err(|reason| Error::IllegalAction {
                    action,
                    reason: reason.into(),
                })?;
            next.passes = 0;
            next.history.push(position_hash(&next.board));
        } else {
            return Err(Error::IllegalAction {
                action,
                reason: "off the board".into(),
            });
        }
        next.to_move = self.to_move.opponent();
        next.move_number += 1;
        Ok(next)
    }

    fn is_terminal(&self) -> bool {
        self.passes >= 2 || self.move_number >= self.max_moves()
    }

    fn terminal_value(&self) -> f64 {
        let s = self.score();
        if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    fn action_space(&self) -> usize {
        self.board.len() + 1
    }
}

impl TextBoard for GoState {
    fn to_text(&self) -> String {
        let mut out = render_rows(self.size(), self.board.iter().map(|s| *s as u8));
        let side = if self.to_move == Player::First {
            'X'
        } else {
            'O'
        };
        out.push_str(&format!(
            "to_move {side}\nkomi {}\npasses {}\nmove {}\n",
            self.komi, self.passes, self.move_number
        ));
        out
    }

    /// Parses a position. Superko history restarts from the parsed position.
    fn from_text(text: &str) -> Result<Self> {
        let parsed = parse_board(text)?;
        if parsed.width != parsed.height || !(2..=19).contains(&parsed.width) {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!(
                    "Go boards must be square, got {}x{}",
                    parsed.width, parsed.height
                ),
            });
        }
        let mut state = GoState::new(parsed.width);
        state.board = parsed
            .cells
            .iter()
            .map(|c| match c {
                1 => Stone::Black,
                2 => Stone::White,
                _ => Stone::Empty,
            })
            .collect();
        for (line, key, value) in &parsed.fields {
            let bad = |msg: &str| field_err(*line, key, msg.to_string());
            match key.as_str() {
                "to_move" => {
                    state.to_move = match value.as_str() {
                        "X" => Player::First,
                        "O" => Player::Second,
                        _ => return Err(bad("to_move must be X or O")),
                    }
                }
                "komi" => state.komi = value.parse().map_err(|_| bad("komi must be a number"))?,
                "passes" => {
                    state.passes = value
                        .parse()
                        .ok()
                        .filter(|p| *p <= 2)
                        .ok_or_else(|| bad("passes must be 0, 1 or 2"))?
                }
                "move" => {
                    state.move_number = value.parse().map_err(|_| bad("move must be an integer"))?
                }
                _ => return Err(bad(&format!("unknown field '{key}'"))),
            }
        }
        for p in 0..state.board.len() {
            if state.board[p] != Stone::Empty && !state.group(&state.board, p).1 {
                return Err(Error::Parse {
                    line: p / state.size() + 1,
                    column: p % state.size() + 1,
                    message: "group without liberties".into(),
                });
            }
        }
        state.history = vec![position_hash(&state.board)];
        Ok(state)
    }

    fn board_dims(&self) -> (usize, usize) {
        (self.size(), self.size())
    }

    fn format_action(&self, action: Action) -> String {
        if action == self.pass_action() {
            "pass".into()
        } else {
            format_point(self.size(), action)
        }
    }

    fn parse_action(&self, text: &str) -> Result<Action> {
        if text.trim().eq_ignore_ascii_case("pass") {
            Ok(self.pass_action())
        } else {
            parse_point(self.size(), self.size(), text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    /// Independent area counter: a point belongs to a colour if it holds that
    /// colour, or if every stone reachable through empty points has that colour.
    fn brute_force_area(size: usize, board: &[Stone]) -> (usize, usize) {
        let idx = |x: usize, y: usize| y * size + x;
        let mut black = 0;
        let mut white = 0;
        for y in 0..size {
            for x in 0..size {
                match board[idx(x, y)] {
                    Stone::Black => black += 1,
                    Stone::White => white += 1,
                    Stone::Empty => {
                        let mut reach = vec![vec![false; size]; size];
                        let mut frontier = vec![(x, y)];
                        let mut colors = [false; 3];
                        reach[y][x] = true;
                        while let Some((cx, cy)) = frontier.pop() {
                            let mut nbrs = Vec::new();
                            if cx > 0 {
                                nbrs.push((cx - 1, cy));
                            }
                            if cy > 0 {
                                nbrs.push((cx, cy - 1));
                            }
                            if cx + 1 < size {
                                nbrs.push((cx + 1, cy));
                            }
                            if cy + 1 < size {
                                nbrs.push((cx, cy + 1));
                            }
                            for (nx, ny) in nbrs {
                                let s = board[idx(nx, ny)];
                                colors[s as usize] = true;
                                if s == Stone::Empty && !reach[ny][nx] {
                                    reach[ny][nx] = true;
                                    frontier.push((nx, ny));
                                }
                            }
                        }
                        if colors[1] && !colors[2] {
                            black += 1;
                        } else if colors[2] && !colors[1] {
                            white += 1;
                        }
                    }
                }
            }
        }
        (black, white)
    }

    #[test]
    fn two_passes_on_empty_board_white_wins_by_komi() {
        let s = GoState::new(5);
        let s = s.apply(s.pass_action()).unwrap();
        assert!(!s.is_terminal());
        let s = s.apply(s.pass_action()).unwrap();
        assert!(s.is_terminal());
        assert_eq!(s.score(), -6.5);
        assert_eq!(s.terminal_value(), -1.0);
        assert!(s.legal_actions().is_empty());
    }

    #[test]
    fn filling_last_liberty_captures() {
        // White stone at b1 (index 1) with black on a1 and c1; black plays b2.
        let s = GoState::from_text("XOX..\n.....\n.....\n.....\n.....\nto_move X\n").unwrap();
        let next = s.apply(6).unwrap();
        assert_eq!(next.board()[1], Stone::Empty);
        assert_eq!(next.board()[6], Stone::Black);
    }

    #[test]
    fn suicide_is_illegal() {
        // Black to move into a1 surrounded by white at b1 and a2.
        let s = GoState::from_text(".O...\nO....\n.....\n.....\n.....\nto_move X\n").unwrap();
        assert!(!s.legal_actions().contains(&0));
        assert!(matches!(
            s.apply(0),
            Err(Error::IllegalAction { action: 0, .. })
        ));
    }

    #[test]
    fn ko_recapture_is_blocked_by_superko() {
        // Classic ko on the top edge.
        let s = GoState::from_text(".XO..\nXO.O.\n.XO..\n.....\n.....\nto_move X\n").unwrap();
        // Black captures at c2 (index 7).
        let after = s.apply(7).unwrap();
        assert_eq!(after.board()[6], Stone::Empty);
        // White may not immediately retake at b2 (index 6).
        assert!(!after.legal_actions().contains(&6));
        assert!(after.apply(6).is_err());
    }

    #[test]
    fn area_score_matches_worked_position() {
        // Black wall on column c, white wall on column d: 15 vs 10.
        let s = GoState::from_text("..XO.\n..XO.\n..XO.\n..XO.\n..XO.\n").unwrap();
        assert_eq!(s.area(), (15, 10));
        assert_eq!(s.score(), -1.5);
        assert_eq!(s.area(), brute_force_area(5, s.board()));
    }

    #[test]
    fn area_matches_brute_force_on_random_games() {
        let mut rng = rng_from_seed(11);
        for _ in 0..40 {
            let mut s = GoState::new(5);
            let len = rng.random_range(0..40);
            for _ in 0..len {
                if s.is_terminal() {
                    break;
                }
                let legal = s.legal_actions();
                s = s.apply(legal[rng.random_range(0..legal.len())]).unwrap();
                let stones = s.board().len();
                assert_eq!(stones, 25);
                for p in 0..stones {
                    if s.board()[p] != Stone::Empty {
                        assert!(s.group(s.board(), p).1, "dead group persisted");
                    }
                }
            }
            assert_eq!(s.area(), brute_force_area(5, s.board()));
        }
    }

    #[test]
    fn games_are_capped() {
        let mut rng = rng_from_seed(3);
        let s = GoState::new(5);
        let mut t = s.clone();
        while !t.is_terminal() {
            let legal: Vec<_> = t
                .legal_actions()
                .into_iter()
                .filter(|&a| a != t.pass_action())
                .collect();
            let a = if legal.is_empty() {
                t.pass_action()
            } else {
                legal[rng.random_range(0..legal.len())]
            };
            t = t.apply(a).unwrap();
        }
        assert!(t.move_number() <= s.max_moves());
    }

    #[test]
    fn text_round_trip() {
        let s = GoState::new(5).apply(12).unwrap().apply(7).unwrap();
        let text = s.to_text();
        let back = GoState::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.board(), s.board());
        assert_eq!(s.format_action(25), "pass");
        assert_eq!(s.parse_action("pass").unwrap(), 25);
        assert_eq!(s.parse_action("c3").unwrap(), 12);
    }
}
