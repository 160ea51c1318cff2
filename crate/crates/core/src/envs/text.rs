//! Plain-text board format shared by the grid games.
//!
//! A board is one row per line using `.` (empty), `X` (first player) and
//! `O` (second player), followed by optional `key value` lines. Actions are
//! written `<col><row>`: a column letter starting at `a` and a 1-based row
//! counted from the first printed line, or `pass`.

use crate::envs::Action;
use crate::error::{Error, Result};

pub trait TextBoard: Sized {
    fn to_text(&self) -> String;
    fn from_text(text: &str) -> Result<Self>;
    /// `(width, height)` of the printed grid.
    fn board_dims(&self) -> (usize, usize);
    fn format_action(&self, action: Action) -> String;
    fn parse_action(&self, text: &str) -> Result<Action>;
}

pub(crate) struct ParsedBoard {
    pub width: usize,
    pub height: usize,
    /// Row-major; 0 empty, 1 `X`, 2 `O`.
    pub cells: Vec<u8>,
    /// `(line number, key, value)`.
    pub fields: Vec<(usize, String, String)>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub(crate) fn parse_board(text: &str) -> Result<ParsedBoard> {
    let mut rows: Vec<Vec<u8>> = Vec::new();
    let mut fields = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let is_row = fields.is_empty() && line.chars().all(|c| matches!(c, '.' | 'X' | 'O'));
        if is_row {
            let row = line
                .bytes()
                .map(|b| match b {
                    b'X' => 1,
                    b'O' => 2,
                    _ => 0,
                })
                .collect::<Vec<u8>>();
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(parse_err(
                        line_no,
                        row.len().min(first.len()) + 1,
                        format!("row has {} cells, expected {}", row.len(), first.len()),
                    ));
                }
            }
            rows.push(row);
            continue;
        }
        if rows.is_empty() || (fields.is_empty() && !line.contains(char::is_whitespace)) {
            let col = line
                .chars()
                .position(|c| !matches!(c, '.' | 'X' | 'O'))
                .unwrap_or(0);
            return Err(parse_err(
                line_no,
                col + 1,
                "expected a board row of '.', 'X' or 'O'",
            ));
        }
        let mut parts = line.splitn(2, char::is_whitespace);
        let key = parts.next().unwrap_or_default();
        let value = parts.next().map(str::trim).unwrap_or_default();
        if value.is_empty() {
            return Err(parse_err(
                line_no,
                key.len() + 1,
                format!("missing value for '{key}'"),
            ));
        }
        fields.push((line_no, key.to_string(), value.to_string()));
    }
    if rows.is_empty() {
        return Err(parse_err(1, 1, "empty board"));
    }
    let width = rows[0].len();
    let height = rows.len();
    Ok(ParsedBoard {
        width,
        height,
        cells: rows.into_iter().flatten().collect(),
        fields,
    })
}

pub(crate) fn field_err(line: usize, key: &str, message: impl Into<String>) -> Error {
    parse_err(line, key.len() + 2, message)
}

pub(crate) fn render_rows(width: usize, cells: impl Iterator<Item = u8>) -> String {
    let mut out = String::new();
    for (i, c) in cells.enumerate() {
        out.push(match c {
            1 => 'X',
            2 => 'O',
            _ => '.',
        });
        if (i + 1) % width == 0 {
            out.push('\n');
        }
    }
    out
}

pub(crate) fn format_point(width: usize, action: Action) -> String {
    let col = (b'a' + (action % width) as u8) as char;
    format!("{col}{}", action / width + 1)
}

pub(crate) fn parse_point(width: usize, height: usize, text: &str) -> Result<Action> {
    let text = text.trim();
    let bad = || Error::IllegalAction {
        action: usize::MAX,
        reason: format!("cannot parse move '{text}'"),
    };
    let mut chars = text.chars();
    let col = chars.next().ok_or_else(bad)?.to_ascii_lowercase();
    if !col.is_ascii_lowercase() {
        return Err(bad());
    }
    let col = (col as u8 - b'a') as usize;
    let row: usize = chars.as_str().parse().map_err(|_| bad())?;
    if col >= width || row == 0 || row > height {
        return Err(Error::IllegalAction {
            action: usize::MAX,
            reason: format!("move '{text}' is off the board"),
        });
    }
    Ok((row - 1) * width + col)
}
