use std::fmt;

use super::{GameModel, Result, VgdlError};

/// A level layout. `cells[y][x]`: `x` is the column, `y` the row, origin top-left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Vec<char>>,
}

impl LevelGrid {
    pub fn new(cells: Vec<Vec<char>>) -> LevelGrid {
        let height = cells.len();
        let width = cells.first().map_or(0, Vec::len);
        LevelGrid {
            width,
            height,
            cells,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> char {
        self.cells[y][x]
    }

    /// Blank and `.` cells are empty unless the mapping claims the character.
    pub fn is_empty_char(model: &GameModel, c: char) -> bool {
        c == ' ' || (c == '.' && !model.level_mapping.contains_key(&'.'))
    }

    pub fn count(&self, c: char) -> usize {
        self.cells.iter().flatten().filter(|&&k| k == c).count()
    }
}

impl fmt::Display for LevelGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.cells {
            let line: String = row.iter().collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Parses a level against the game's level mapping.
pub fn parse_ldf(text: &str, model: &GameModel) -> Result<LevelGrid> {
    let mut rows: Vec<Vec<char>> = text
        .lines()
        .map(|l| l.trim_end_matches('\r').chars().collect())
        .collect();
    while rows.last().is_some_and(|r| r.is_empty()) {
        rows.pop();
    }
    let Some(first) = rows.first() else {
        return Err(VgdlError::RaggedGrid {
            row: 0,
            found: 0,
            expected: 1,
        });
    };
    let expected = first.len();
    if expected == 0 {
        return Err(VgdlError::RaggedGrid {
            row: 0,
            found: 0,
            expected: 1,
        });
    }
    for (y, row) in rows.iter().enumerate() {
        if row.len() != expected {
            return Err(VgdlError::RaggedGrid {
                row: y,
                found: row.len(),
                expected,
            });
        }
        for (x, &ch) in row.iter().enumerate() {
            if !LevelGrid::is_empty_char(model, ch) && !model.level_mapping.contains_key(&ch) {
                return Err(VgdlError::UnmappedCharacter { ch, x, y });
            }
        }
    }
    Ok(LevelGrid::new(rows))
}
