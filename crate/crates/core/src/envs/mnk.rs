//! m,n,k-games: tic-tac-toe (3,3,3) and free-style Gomoku (n,n,5).

use rand::Rng;

use crate::envs::text::{
    field_err, format_point, parse_board, parse_point, render_rows, TextBoard,
};
use crate::envs::{Action, GameState, Player};
use crate::error::{Error, Result};
use crate::rng::SearchRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Cell {
    Empty = 0,
    First = 1,
    Second = 2,
}

impl Cell {
    fn of(player: Player) -> Cell {
        match player {
            Player::First => Cell::First,
            _ => Cell::Second,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MnkState {
    width: u8,
    height: u8,
    k: u8,
    cells: Vec<Cell>,
    to_move: Player,
    move_number: usize,
    winner: Option<Player>,
}

const DIRECTIONS: [(i32, i32); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

fn line_through(cells: &[Cell], width: usize, height: usize, k: usize, at: usize) -> bool {
    let who = cells[at];
    let (x0, y0) = ((at % width) as i32, (at / width) as i32);
    DIRECTIONS.iter().any(|&(dx, dy)| {
        let mut run = 1;
        for sign in [1, -1] {
            let (mut x, mut y) = (x0 + sign * dx, y0 + sign * dy);
            while x >= 0
                && y >= 0
                && (x as usize) < width
                && (y as usize) < height
                && cells[y as usize * width + x as usize] == who
            {
                run += 1;
                x += sign * dx;
                y += sign * dy;
            }
        }
        run >= k
    })
}

impl MnkState {
    pub fn new(width: usize, height: usize, k: usize) -> Self {
        assert!(width > 0 && height > 0 && width <= 26 && height <= 26);
        assert!(k >= 1 && k <= width.max(height));
        MnkState {
            width: width as u8,
            height: height as u8,
            k: k as u8,
            cells: vec![Cell::Empty; width * height],
            to_move: Player::First,
            move_number: 0,
            winner: None,
        }
    }

    pub fn tictactoe() -> Self {
        Self::new(3, 3, 3)
    }

    pub fn gomoku(size: usize) -> Self {
        Self::new(size, size, 5)
    }

    /// Builds an arbitrary position. Fails if both players already have a line.
    pub fn from_cells(
        width: usize,
        height: usize,
        k: usize,
        cells: Vec<Cell>,
        to_move: Player,
    ) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::Config(format!(
                "expected {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        if to_move == Player::Single {
            return Err(Error::Config("m,n,k games are two-player".into()));
        }
        let mut state = Self::new(width, height, k);
        state.move_number = cells.iter().filter(|c| **c != Cell::Empty).count();
        state.cells = cells;
        state.to_move = to_move;
        let mut winners = (0..width * height)
            .filter(|&i| {
                state.cells[i] != Cell::Empty && line_through(&state.cells, width, height, k, i)
            })
            .map(|i| state.cells[i]);
        if let Some(w) = winners.next() {
            if winners.any(|o| o != w) {
                return Err(Error::Config("both players have a completed line".into()));
            }
            state.winner = Some(if w == Cell::First {
                Player::First
            } else {
                Player::Second
            });
        }
        Ok(state)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn height(&self) -> usize {
        self.height as usize
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn winner(&self) -> Option<Player> {
        self.winner
    }

    /// Same position with the colours of every stone and the side to move exchanged.
    pub fn color_swapped(&self) -> Self {
        let cells = self
            .cells
            .iter()
            .map(|c| match c {
                Cell::First => Cell::Second,
                Cell::Second => Cell::First,
                Cell::Empty => Cell::Empty,
            })
            .collect();
        MnkState {
            cells,
            to_move: self.to_move.opponent(),
            winner: self.winner.map(Player::opponent),
            ..self.clone()
        }
    }

    fn is_full(&self) -> bool {
        self.cells.iter().all(|c| *c != Cell::Empty)
    }
}

impl GameState for MnkState {
    fn player_to_move(&self) -> Player {
        self.to_move
    }

    fn move_number(&self) -> usize {
        self.move_number
    }

    fn legal_actions(&self) -> Vec<Action> {
        if self.winner.is_some() {
            return Vec::new();
        }
        (0..self.cells.len())
            .filter(|&i| self.cells[i] == Cell::Empty)
            .collect()
    }

    fn apply(&self, action: Action) -> Result<Self> {
        if self.is_terminal() {
            return Err(Error::IllegalAction {
                action,
                reason: "game is over".into(),
            });
        }
        match self.cells.get(action) {
            None => Err(Error::IllegalAction {
                action,
                reason: "off the board".into(),
            }),
            Some(Cell::Empty) => {
                let mut next = self.clone();
                next.cells[action] = Cell::of(self.to_move);
                if line_through(&next.cells, self.width(), self.height(), self.k(), action) {
                    next.winner = Some(self.to_move);
                }
                next.to_move = self.to_move.opponent();
                next.move_number += 1;
                Ok(next)
            }
            Some(_) => Err(Error::IllegalAction {
                action,
                reason: "cell is occupied".into(),
            }),
        }
    }

    fn is_terminal(&self) -> bool {
        self.winner.is_some() || self.is_full()
    }

    fn terminal_value(&self) -> f64 {
        match self.winner {
            Some(Player::First) => 1.0,
            Some(_) => -1.0,
            None => 0.0,
        }
    }

    fn action_space(&self) -> usize {
        self.cells.len()
    }

    fn random_playout(&self, rng: &mut SearchRng) -> f64 {
        if self.is_terminal() {
            return self.terminal_value();
        }
        let (w, h, k) = (self.width(), self.height(), self.k());
        let mut cells = self.cells.clone();
        let mut empty: Vec<usize> = (0..cells.len())
            .filter(|&i| cells[i] == Cell::Empty)
            .collect();
        let mut player = self.to_move;
        while !empty.is_empty() {
            let at = empty.swap_remove(rng.random_range(0..empty.len()));
            cells[at] = Cell::of(player);
            if line_through(&cells, w, h, k, at) {
                return player.sign();
            }
            player = player.opponent();
        }
        0.0
    }
}

impl TextBoard for MnkState {
    fn to_text(&self) -> String {
        let mut out = render_rows(self.width(), self.cells.iter().map(|c| *c as u8));
        let side = if self.to_move == Player::First {
            'X'
        } else {
            'O'
        };
        out.push_str(&format!("to_move {side}\nk {}\n", self.k));
        out
    }

    fn from_text(text: &str) -> Result<Self> {
        let board = parse_board(text)?;
        let cells: Vec<Cell> = board
            .cells
            .iter()
            .map(|c| match c {
                1 => Cell::First,
                2 => Cell::Second,
                _ => Cell::Empty,
            })
            .collect();
        let xs = cells.iter().filter(|c| **c == Cell::First).count();
        let os = cells.iter().filter(|c| **c == Cell::Second).count();
        let mut to_move = if xs > os {
            Player::Second
        } else {
            Player::First
        };
        let mut k = if board.width.max(board.height) <= 4 {
            board.width.max(board.height)
        } else {
            5
        };
        for (line, key, value) in &board.fields {
            match key.as_str() {
                "to_move" => {
                    to_move = match value.as_str() {
                        "X" => Player::First,
                        "O" => Player::Second,
                        _ => return Err(field_err(*line, key, "to_move must be X or O")),
                    }
                }
                "k" => {
                    k = value
                        .parse()
                        .ok()
                        .filter(|&k: &usize| k >= 1 && k <= board.width.max(board.height))
                        .ok_or_else(|| {
                            field_err(
                                *line,
                                key,
                                "k must be a positive integer no larger than the board",
                            )
                        })?
                }
                _ => return Err(field_err(*line, key, format!("unknown field '{key}'"))),
            }
        }
        MnkState::from_cells(board.width, board.height, k, cells, to_move).map_err(|e| {
            Error::Parse {
                line: 1,
                column: 1,
                message: e.to_string(),
            }
        })
    }

    fn board_dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn format_action(&self, action: Action) -> String {
        format_point(self.width(), action)
    }

    fn parse_action(&self, text: &str) -> Result<Action> {
        parse_point(self.width(), self.height(), text)
    }
}
