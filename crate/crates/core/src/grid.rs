//! Coordinates, directions and the newline-separated glyph format shared by
//! every grid-shaped input and output.
//!
//! Row 0 is the top line of the rendered text and `Up` decreases the row.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("grid text is empty")]
    Empty,
    #[error("ragged grid: line {line} has {found} cells, expected {expected}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("palette error: {0}")]
    Palette(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("unrecognised glyph `{glyph}` at ({row}, {col})")]
    UnknownGlyph {
        glyph: String,
        row: usize,
        col: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub const fn new(row: usize, col: usize) -> Self {
        Coord { row, col }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
    ];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Direction::Up | Direction::Down)
    }

    pub fn is_horizontal(self) -> bool {
        !self.is_vertical()
    }

    /// The two directions on the other axis, in a fixed order.
    pub fn perpendicular(self) -> [Direction; 2] {
        if self.is_vertical() {
            [Direction::Left, Direction::Right]
        } else {
            [Direction::Up, Direction::Down]
        }
    }

    /// `(d_row, d_col)` of a unit move.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::Up => (-1, 0),
            Direction::Down => (1, 0),
            Direction::Left => (0, -1),
            Direction::Right => (0, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "up" | "u" => Ok(Direction::Up),
            "down" | "d" => Ok(Direction::Down),
            "left" | "l" => Ok(Direction::Left),
            "right" | "r" => Ok(Direction::Right),
            other => Err(format!("not a direction: `{other}`")),
        }
    }
}

/// Adjacent coordinate in direction `d`, or `None` when it would leave the
/// nonnegative quadrant. Map bounds are the caller's business.
pub fn step(c: Coord, d: Direction) -> Option<Coord> {
    let (dr, dc) = d.delta();
    let row = c.row.checked_add_signed(dr as isize)?;
    let col = c.col.checked_add_signed(dc as isize)?;
    Some(Coord { row, col })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Start,
    Destination,
    Road,
    Obstacle,
}

impl CellKind {
    pub fn is_passable(self) -> bool {
        !matches!(self, CellKind::Obstacle)
    }
}

/// Glyph assignment for rendering maps and tiling rectangles as text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderPalette {
    pub id: String,
    pub start: String,
    pub dest: String,
    pub road: String,
    pub obstacle: String,
    /// Tiling piece glyphs, indexed by `PieceKind` order (I, T, L).
    pub pieces: Vec<String>,
    /// Masked / empty tiling cell.
    pub blank: String,
}

impl Default for RenderPalette {
    fn default() -> Self {
        RenderPalette::ascii()
    }
}

impl RenderPalette {
    pub fn ascii() -> Self {
        RenderPalette {
            id: "ascii".into(),
            start: "S".into(),
            dest: "D".into(),
            road: ".".into(),
            obstacle: "#".into(),
            pieces: vec!["I".into(), "T".into(), "L".into()],
            blank: "-".into(),
        }
    }

    pub fn emoji() -> Self {
        RenderPalette {
            id: "emoji".into(),
            start: "\u{1F3E0}".into(),    // house
            dest: "\u{1F3E2}".into(),     // office building
            road: "\u{2B1C}".into(),      // white large square
            obstacle: "\u{1F6A7}".into(), // construction sign
            pieces: vec![
                "\u{1F7E6}".into(), // blue square
                "\u{1F7E8}".into(), // yellow square
                "\u{1F7E5}".into(), // red square
            ],
            blank: "\u{2B1B}".into(), // black large square
        }
    }

    pub fn by_id(id: &str) -> Result<Self, GridError> {
        match id {
            "ascii" => Ok(Self::ascii()),
            "emoji" => Ok(Self::emoji()),
            other => Err(GridError::Palette(format!("unknown palette `{other}`"))),
        }
    }

    pub fn glyph(&self, kind: CellKind) -> &str {
        match kind {
            CellKind::Start => &self.start,
            CellKind::Destination => &self.dest,
            CellKind::Road => &self.road,
            CellKind::Obstacle => &self.obstacle,
        }
    }

    pub fn kind_of(&self, glyph: &str) -> Option<CellKind> {
        [
            CellKind::Start,
            CellKind::Destination,
            CellKind::Road,
            CellKind::Obstacle,
        ]
        .into_iter()
        .find(|k| self.glyph(*k) == glyph)
    }

    fn all_glyphs(&self) -> impl Iterator<Item = &str> {
        [
            &self.start,
            &self.dest,
            &self.road,
            &self.obstacle,
            &self.blank,
        ]
        .into_iter()
        .chain(self.pieces.iter())
        .map(String::as_str)
    }

    /// Every glyph non-empty, free of whitespace, and pairwise distinct.
    pub fn validate(&self) -> Result<(), GridError> {
        let mut seen = HashSet::new();
        for g in self.all_glyphs() {
            if g.is_empty() || g.chars().any(char::is_whitespace) {
                return Err(GridError::Palette(format!(
                    "palette `{}` has an empty or whitespace glyph",
                    self.id
                )));
            }
            if !seen.insert(g) {
                return Err(GridError::Palette(format!(
                    "palette `{}` reuses glyph `{g}`",
                    self.id
                )));
            }
        }
        Ok(())
    }

    /// Split a line into glyph tokens, preferring the longest palette glyph
    /// at each position. Whitespace separates tokens and is dropped, as are
    /// stray variation selectors.
    pub fn tokenize(&self, line: &str) -> Vec<String> {
        let mut known: Vec<&str> = self.all_glyphs().collect();
        known.sort_by_key(|g| std::cmp::Reverse(g.len()));
        tokenize_with(line, &known)
    }
}

pub(crate) fn tokenize_with(line: &str, known: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = line;
    while let Some(c) = rest.chars().next() {
        // a selector left over after a palette glyph carries no glyph of its own
        if c.is_whitespace() || matches!(c, '\u{FE0E}' | '\u{FE0F}') {
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if let Some(g) = known.iter().find(|g| rest.starts_with(**g)) {
            out.push((*g).to_string());
            rest = &rest[g.len()..];
            continue;
        }
        let len = cluster_len(rest);
        out.push(rest[..len].to_string());
        rest = &rest[len..];
    }
    out
}

/// Byte length of one user-perceived glyph: a scalar plus any variation
/// selectors, skin-tone modifiers, keycap marks and ZWJ continuations.
fn cluster_len(s: &str) -> usize {
    let mut chars = s.char_indices().peekable();
    let Some((_, first)) = chars.next() else {
        return 0;
    };
    let mut end = first.len_utf8();
    while let Some(&(i, c)) = chars.peek() {
        let joiner = c == '\u{200D}';
        let extends = matches!(
            c,
            '\u{FE0E}' | '\u{FE0F}' | '\u{20E3}' | '\u{1F3FB}'..='\u{1F3FF}'
        );
        if extends {
            end = i + c.len_utf8();
            chars.next();
        } else if joiner {
            chars.next();
            match chars.next() {
                Some((j, n)) => end = j + n.len_utf8(),
                None => end = i + c.len_utf8(),
            }
        } else {
            break;
        }
    }
    end
}

/// A rectangular navigation map whose passable cells form one simple path
/// from `start` to `dest`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<CellKind>,
    start: Coord,
    dest: Coord,
}

impl GridMap {
    /// Build from row-major cells; rejects maps that break the single-path
    /// invariant.
    pub fn new(width: usize, height: usize, cells: Vec<CellKind>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::InvalidMap("zero-sized map".into()));
        }
        if cells.len() != width * height {
            return Err(GridError::InvalidMap(format!(
                "{} cells for a {width}x{height} map",
                cells.len()
            )));
        }
        let find = |kind: CellKind| -> Result<Coord, GridError> {
            let hits: Vec<usize> = cells
                .iter()
                .enumerate()
                .filter(|(_, c)| **c == kind)
                .map(|(i, _)| i)
                .collect();
            match hits.as_slice() {
                [i] => Ok(Coord::new(i / width, i % width)),
                _ => Err(GridError::InvalidMap(format!(
                    "expected exactly one {kind:?} cell, found {}",
                    hits.len()
                ))),
            }
        };
        let start = find(CellKind::Start)?;
        let dest = find(CellKind::Destination)?;
        let map = GridMap {
            width,
            height,
            cells,
            start,
            dest,
        };
        if map.trace_path().is_none() {
            return Err(GridError::InvalidMap(
                "passable cells do not form a single simple path".into(),
            ));
        }
        Ok(map)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> Coord {
        self.start
    }

    pub fn dest(&self) -> Coord {
        self.dest
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.row < self.height && c.col < self.width
    }

    pub fn get(&self, c: Coord) -> Option<CellKind> {
        self.contains(c)
            .then(|| self.cells[c.row * self.width + c.col])
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| Coord::new(r, c)))
    }

    pub fn is_passable(&self, c: Coord) -> bool {
        self.get(c).is_some_and(CellKind::is_passable)
    }

    fn passable_neighbours(&self, c: Coord) -> impl Iterator<Item = Coord> + '_ {
        Direction::ALL
            .into_iter()
            .filter_map(move |d| step(c, d))
            .filter(|n| self.is_passable(*n))
    }

    /// The ordered start→dest path; always `Some` for a constructed map.
    pub fn path(&self) -> Vec<Coord> {
        self.trace_path()
            .expect("GridMap invariant: single simple path")
    }

    fn trace_path(&self) -> Option<Vec<Coord>> {
        let passable = self.cells.iter().filter(|c| c.is_passable()).count();
        let mut path = vec![self.start];
        let mut prev: Option<Coord> = None;
        let mut cur = self.start;
        while cur != self.dest {
            let next: Vec<Coord> = self
                .passable_neighbours(cur)
                .filter(|n| Some(*n) != prev)
                .collect();
            let [n] = next.as_slice() else {
                return None;
            };
            prev = Some(cur);
            cur = *n;
            if path.len() >= passable {
                return None;
            }
            path.push(cur);
        }
        // dest must be a dead end and no passable cell may be off the path
        let dest_degree = self.passable_neighbours(self.dest).count();
        (dest_degree == 1 && path.len() == passable).then_some(path)
    }
}

/// One cell of a parsed grid: a palette cell kind or a glyph the palette does
/// not know (a path marker, or noise).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedCell {
    Known(CellKind),
    Unknown(String),
}

/// Result of [`parse_grid`]. Keeps unknown glyphs instead of failing so model
/// drawings can be graded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<ParsedCell>,
}

impl ParsedGrid {
    pub fn get(&self, c: Coord) -> Option<&ParsedCell> {
        (c.row < self.height && c.col < self.width).then(|| &self.cells[c.row * self.width + c.col])
    }

    pub fn unknown_cells(&self) -> Vec<(Coord, &str)> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c {
                ParsedCell::Unknown(g) => {
                    Some((Coord::new(i / self.width, i % self.width), g.as_str()))
                }
                ParsedCell::Known(_) => None,
            })
            .collect()
    }

    pub fn into_map(self) -> Result<GridMap, GridError> {
        let mut cells = Vec::with_capacity(self.cells.len());
        for (i, c) in self.cells.into_iter().enumerate() {
            match c {
                ParsedCell::Known(k) => cells.push(k),
                ParsedCell::Unknown(glyph) => {
                    return Err(GridError::UnknownGlyph {
                        glyph,
                        row: i / self.width,
                        col: i % self.width,
                    })
                }
            }
        }
        GridMap::new(self.width, self.height, cells)
    }
}

/// Render one glyph per cell, one line per row, no trailing whitespace.
pub fn render_grid(m: &GridMap, p: &RenderPalette) -> Result<String, GridError> {
    p.validate()?;
    let rows: Vec<String> = (0..m.height)
        .map(|r| {
            (0..m.width)
                .map(|c| p.glyph(m.cells[r * m.width + c]))
                .collect::<String>()
        })
        .collect();
    Ok(rows.join("\n"))
}

/// Split grid text into rows of glyph tokens, checking the rectangle shape.
pub(crate) fn split_rows(
    text: &str,
    tokenize: impl Fn(&str) -> Vec<String>,
) -> Result<Vec<Vec<String>>, GridError> {
    let rows: Vec<Vec<String>> = text
        .trim_end_matches(['\n', '\r'])
        .split('\n')
        .map(|l| tokenize(l.trim_end_matches('\r')))
        .collect();
    if rows.iter().all(Vec::is_empty) {
        return Err(GridError::Empty);
    }
    let expected = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != expected {
            return Err(GridError::Ragged {
                line: i,
                expected,
                found: r.len(),
            });
        }
    }
    Ok(rows)
}

/// Inverse of [`render_grid`]; whitespace between glyphs is ignored.
pub fn parse_grid(text: &str, p: &RenderPalette) -> Result<ParsedGrid, GridError> {
    let rows = split_rows(text, |l| p.tokenize(l))?;
    let height = rows.len();
    let width = rows[0].len();
    let cells = rows
        .into_iter()
        .flatten()
        .map(|g| match p.kind_of(&g) {
            Some(k) => ParsedCell::Known(k),
            None => ParsedCell::Unknown(g),
        })
        .collect();
    Ok(ParsedGrid {
        width,
        height,
        cells,
    })
}
