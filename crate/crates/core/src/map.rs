//! Decaying priority grid: coverage and no-coverage zones, per-cell lifetime
//! and age, and the coverage bookkeeping that drives every cost in the planner.
//!
//! A coverage cell holds a lifetime `l` and an age `a`; its priority is
//! `p = l - a`. The whole map decays one priority unit per second; covering a
//! cell resets its age to zero. No-coverage cells never decay and carry no
//! priority. Priorities are integers and may go negative (overdue cells).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Grid coordinate. Row `i` indexes the y axis, column `j` the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub row: i32,
    pub col: i32,
}

impl CellIndex {
    pub fn new(row: i32, col: i32) -> Self {
        CellIndex { row, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    Coverage,
    NoCoverage,
}

/// Per-cell record. No-coverage cells keep `lifetime = age = 0` by convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellState {
    pub zone: Zone,
    pub lifetime: u32,
    pub age: u32,
}

impl CellState {
    pub fn coverage(lifetime: u32, age: u32) -> Self {
        CellState {
            zone: Zone::Coverage,
            lifetime,
            age,
        }
    }

    pub fn no_coverage() -> Self {
        CellState {
            zone: Zone::NoCoverage,
            lifetime: 0,
            age: 0,
        }
    }

    pub fn priority(&self) -> i64 {
        self.lifetime as i64 - self.age as i64
    }
}

/// The environment map: a grid of cells plus the map clock.
///
/// Planners treat a map as an immutable snapshot frozen at plan start;
/// `decay` and `mark_covered` are only called by the harness between plans.
#[derive(Debug, Clone)]
pub struct CoverageMap {
    width: usize,
    height: usize,
    cell_size: f64,
    clock: u64,
    cells: Vec<CellState>,
}

impl CoverageMap {
    pub fn new(width: usize, height: usize, cell_size: f64, fill: CellState) -> Self {
        assert!(width > 0 && height > 0, "degenerate map dimensions");
        assert!(cell_size > 0.0);
        CoverageMap {
            width,
            height,
            cell_size,
            clock: 0,
            cells: vec![fill; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Current map time in seconds. Trajectory timestamps share this timebase.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn set_clock(&mut self, clock: u64) {
        self.clock = clock;
    }

    pub fn in_bounds(&self, c: CellIndex) -> bool {
        c.row >= 0 && c.col >= 0 && (c.row as usize) < self.height && (c.col as usize) < self.width
    }

    fn idx(&self, c: CellIndex) -> Result<usize> {
        if !self.in_bounds(c) {
            return Err(Error::OutOfBounds {
                cell: c,
                width: self.width,
                height: self.height,
            });
        }
        Ok(c.row as usize * self.width + c.col as usize)
    }

    pub fn cell(&self, c: CellIndex) -> Result<&CellState> {
        let i = self.idx(c)?;
        Ok(&self.cells[i])
    }

    pub fn set_cell(&mut self, c: CellIndex, state: CellState) -> Result<()> {
        let i = self.idx(c)?;
        self.cells[i] = state;
        Ok(())
    }

    /// `p(i,j) = l(i,j) - a(i,j)`. Errors on no-coverage cells: callers must
    /// check the zone first.
    pub fn priority(&self, c: CellIndex) -> Result<i64> {
        let cell = self.cell(c)?;
        match cell.zone {
            Zone::Coverage => Ok(cell.priority()),
            Zone::NoCoverage => Err(Error::NoCoverageCell(c)),
        }
    }

    pub fn in_coverage_zone(&self, c: CellIndex) -> Result<bool> {
        Ok(self.cell(c)?.zone == Zone::Coverage)
    }

    /// Ages every coverage cell by `dt` seconds and advances the clock.
    /// No-coverage cells are untouched.
    pub fn decay(&mut self, dt: u32) {
        if dt == 0 {
            return;
        }
        for cell in &mut self.cells {
            if cell.zone == Zone::Coverage {
                cell.age = cell.age.saturating_add(dt);
            }
        }
        self.clock += dt as u64;
    }

    /// Resets the age of every coverage cell in `cells` to zero (fresh, so
    /// `p = l` again). No-coverage cells in the set are ignored.
    pub fn mark_covered(&mut self, cells: impl IntoIterator<Item = CellIndex>) {
        for c in cells {
            if let Ok(i) = self.idx(c) {
                if self.cells[i].zone == Zone::Coverage {
                    self.cells[i].age = 0;
                }
            }
        }
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (CellIndex, &CellState)> {
        self.cells.iter().enumerate().map(|(i, s)| {
            (
                CellIndex::new((i / self.width) as i32, (i % self.width) as i32),
                s,
            )
        })
    }

    pub fn coverage_cell_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.zone == Zone::Coverage)
            .count()
    }

    /// Minimum priority over coverage cells; 0 for a map without any.
    /// Used to shift search edge costs into non-negative territory.
    pub fn min_priority(&self) -> i64 {
        self.cells
            .iter()
            .filter(|c| c.zone == Zone::Coverage)
            .map(|c| c.priority())
            .min()
            .unwrap_or(0)
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= 0.0
            && y >= 0.0
            && x <= self.width as f64 * self.cell_size
            && y <= self.height as f64 * self.cell_size
    }

    /// Cell containing the point, clamping points on the far edges inward.
    pub fn cell_of_point(&self, x: f64, y: f64) -> Option<CellIndex> {
        if !self.contains_point(x, y) {
            return None;
        }
        let col = ((x / self.cell_size) as i32).min(self.width as i32 - 1);
        let row = ((y / self.cell_size) as i32).min(self.height as i32 - 1);
        Some(CellIndex::new(row, col))
    }

    pub fn cell_center(&self, c: CellIndex) -> (f64, f64) {
        (
            (c.col as f64 + 0.5) * self.cell_size,
            (c.row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn width_m(&self) -> f64 {
        self.width as f64 * self.cell_size
    }

    pub fn height_m(&self) -> f64 {
        self.height as f64 * self.cell_size
    }

    /// Serializes to the `ccmap v1` text format.
    pub fn to_v1_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "ccmap v1 {} {} {} {}",
            self.width, self.height, self.cell_size, self.clock
        );
        for row in 0..self.height {
            let mut line = String::new();
            for col in 0..self.width {
                if col > 0 {
                    line.push(' ');
                }
                let cell = &self.cells[row * self.width + col];
                match cell.zone {
                    Zone::NoCoverage => line.push_str("NC"),
                    Zone::Coverage => {
                        let _ = write!(line, "{}:{}", cell.lifetime, cell.age);
                    }
                }
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_v1_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses the `ccmap v1` format, rejecting malformed tokens with
    /// line/token diagnostics.
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(file, 1, 1, "empty file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 6 || h[0] != "ccmap" {
            return Err(Error::parse(
                file,
                1,
                1,
                "expected header `ccmap v1 <width> <height> <cell_size> <clock>`",
            ));
        }
        if h[1] != "v1" {
            return Err(Error::parse(file, 1, 2, format!("unknown version `{}`", h[1])));
        }
        let width: usize = h[2]
            .parse()
            .map_err(|_| Error::parse(file, 1, 3, "bad width"))?;
        let height: usize = h[3]
            .parse()
            .map_err(|_| Error::parse(file, 1, 4, "bad height"))?;
        let cell_size: f64 = h[4]
            .parse()
            .map_err(|_| Error::parse(file, 1, 5, "bad cell size"))?;
        let clock: u64 = h[5]
            .parse()
            .map_err(|_| Error::parse(file, 1, 6, "bad clock"))?;
        if width == 0 || height == 0 || cell_size <= 0.0 {
            return Err(Error::parse(file, 1, 3, "degenerate map dimensions"));
        }

        let mut cells = Vec::with_capacity(width * height);
        for row in 0..height {
            let (lineno, line) = lines.next().ok_or_else(|| {
                Error::parse(file, row + 2, 1, format!("missing row {row} of {height}"))
            })?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != width {
                return Err(Error::parse(
                    file,
                    lineno + 1,
                    tokens.len().max(1),
                    format!("expected {} cells, found {}", width, tokens.len()),
                ));
            }
            for (col, tok) in tokens.iter().enumerate() {
                let cell = if *tok == "NC" {
                    CellState::no_coverage()
                } else {
                    let (l, a) = tok.split_once(':').ok_or_else(|| {
                        Error::parse(
                            file,
                            lineno + 1,
                            col + 1,
                            format!("expected `<lifetime>:<age>` or `NC`, got `{tok}`"),
                        )
                    })?;
                    let lifetime: u32 = l.parse().map_err(|_| {
                        Error::parse(file, lineno + 1, col + 1, format!("bad lifetime `{l}`"))
                    })?;
                    let age: u32 = a.parse().map_err(|_| {
                        Error::parse(file, lineno + 1, col + 1, format!("bad age `{a}`"))
                    })?;
                    CellState::coverage(lifetime, age)
                };
                cells.push(cell);
            }
        }

        Ok(CoverageMap {
            width,
            height,
            cell_size,
            clock,
            cells,
        })
    }
}
