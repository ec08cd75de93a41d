//! Conway's Game of Life as three rewrite rules on a toroidal grid.
//!
//! Cells are vertices labelled `0` (dead) or `1` (alive); each pair of
//! neighbouring cells is joined by two opposite arrows.

use std::fmt;

use thiserror::Error;

use crate::graph::{Graph, Id};
use crate::rewrite::{full_step, Mode, RewriteError};
use crate::rules::{Rule, RuleSet};
use crate::symmetry::{step_modulo_aut_with, RuleAuts, SymmetryError};
use crate::terms::{Term, DEFAULT_SORT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LifeError {
    #[error("a torus needs at least 3×3 cells, got {width}×{height}")]
    TooSmall { width: usize, height: usize },
    #[error("cell ({row}, {col}) lies outside the {width}×{height} grid")]
    OutOfBounds {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },
    #[error("cell `{0}` is missing or does not carry exactly one state label")]
    BadCell(Id),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

pub fn dead() -> Term {
    Term::constant("0", DEFAULT_SORT)
}

pub fn alive() -> Term {
    Term::constant("1", DEFAULT_SORT)
}

fn state(live: bool) -> Term {
    if live {
        alive()
    } else {
        dead()
    }
}

/// A centre `x` whose state is dropped and flipped, surrounded by the given
/// neighbour states.
fn neighbourhood_rule(name: &str, centre_live: bool, live: usize, dead_count: usize) -> Rule {
    let mut lhs = Graph::new();
    let mut kept = Graph::new();
    lhs.add_vertex("x", [state(centre_live)]).expect("fresh id");
    kept.add_vertex("x", []).expect("fresh id");
    let neighbours = (1..=live)
        .map(|i| (format!("a{i}"), true))
        .chain((1..=dead_count).map(|i| (format!("d{i}"), false)));
    for (n, live) in neighbours {
        for g in [&mut lhs, &mut kept] {
            g.add_vertex(n.as_str(), [state(live)]).expect("fresh id");
            g.add_arrow(format!("x{n}"), "x", n.as_str(), [])
                .expect("fresh id");
            g.add_arrow(format!("{n}x"), n.as_str(), "x", [])
                .expect("fresh id");
        }
    }
    let mut rhs = Graph::new();
    rhs.add_vertex("x", [state(!centre_live)])
        .expect("fresh id");
    Rule::new(name, lhs, kept, rhs).expect("well-formed rule")
}

/// Death by overpopulation: a live cell with at least 4 live neighbours.
pub fn overpopulation_rule() -> Rule {
    neighbourhood_rule("overpopulation", true, 4, 0)
}

/// Birth: a dead cell with at least 3 live and at least 5 dead neighbours.
pub fn birth_rule() -> Rule {
    neighbourhood_rule("birth", false, 3, 5)
}

/// Death by isolation: a live cell with at least 7 dead neighbours.
pub fn isolation_rule() -> Rule {
    neighbourhood_rule("isolation", true, 0, 7)
}

pub fn life_rules() -> RuleSet {
    RuleSet::new([overpopulation_rule(), birth_rule(), isolation_rule()]).expect("distinct rules")
}

/// A rectangular grid of cells, row-major, `true` for alive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl Grid {
    pub fn dead(width: usize, height: usize) -> Self {
        Grid {
            width,
            height,
            cells: vec![false; width * height],
        }
    }

    pub fn from_cells(
        width: usize,
        height: usize,
        live: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, LifeError> {
        let mut grid = Self::dead(width, height);
        for (row, col) in live {
            if row >= height || col >= width {
                return Err(LifeError::OutOfBounds {
                    row,
                    col,
                    width,
                    height,
                });
            }
            grid.set(row, col, true);
        }
        Ok(grid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, live: bool) {
        self.cells[row * self.width + col] = live;
    }

    pub fn live_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height)
            .flat_map(move |r| (0..self.width).map(move |c| (r, c)))
            .filter(|&(r, c)| self.get(r, c))
    }

    pub fn population(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}

/// `#` for live cells, `.` for dead ones, one line per row.
impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.height {
            for c in 0..self.width {
                f.write_str(if self.get(r, c) { "#" } else { "." })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn render_ascii(grid: &Grid) -> String {
    grid.to_string()
}

pub fn cell_id(row: usize, col: usize) -> Id {
    Id::named(format!("c{row}_{col}"))
}

const DIRECTIONS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// The torus graph of `grid`: every cell has an arrow to each of its eight
/// neighbours, so neighbouring cells share an opposite pair.
pub fn build_torus(grid: &Grid) -> Result<Graph, LifeError> {
    let (w, h) = (grid.width, grid.height);
    if w < 3 || h < 3 {
        return Err(LifeError::TooSmall {
            width: w,
            height: h,
        });
    }
    let mut g = Graph::new();
    for r in 0..h {
        for c in 0..w {
            g.add_vertex(cell_id(r, c), [state(grid.get(r, c))])
                .expect("distinct cells");
        }
    }
    for r in 0..h {
        for c in 0..w {
            for (k, (dr, dc)) in DIRECTIONS.iter().enumerate() {
                let rr = (r as isize + dr).rem_euclid(h as isize) as usize;
                let cc = (c as isize + dc).rem_euclid(w as isize) as usize;
                g.add_arrow(format!("e{r}_{c}_{k}"), cell_id(r, c), cell_id(rr, cc), [])
                    .expect("distinct arrows");
            }
        }
    }
    Ok(g)
}

/// Reads cell states back from a torus graph.
pub fn read_state(g: &Graph, width: usize, height: usize) -> Result<Grid, LifeError> {
    let mut grid = Grid::dead(width, height);
    for r in 0..height {
        for c in 0..width {
            let id = cell_id(r, c);
            let live = match g.vertex_labels(&id).map(|ls| ls.iter().collect::<Vec<_>>()) {
                Some(ls) if ls.len() == 1 && *ls[0] == alive() => true,
                Some(ls) if ls.len() == 1 && *ls[0] == dead() => false,
                _ => return Err(LifeError::BadCell(id)),
            };
            grid.set(r, c, live);
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Blinker,
    Block,
    Glider,
}

impl Preset {
    /// Live cells, placed near the middle except for the glider.
    pub fn cells(self, width: usize, height: usize) -> Vec<(usize, usize)> {
        let (r, c) = (height / 2, width / 2);
        match self {
            Preset::Blinker => vec![(r - 1, c), (r, c), (r + 1, c)],
            Preset::Block => vec![(r - 1, c - 1), (r - 1, c), (r, c - 1), (r, c)],
            Preset::Glider => vec![(0, 1), (1, 2), (2, 0), (2, 1), (2, 2)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Preset(Preset),
    Cells(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LifeMode {
    #[default]
    Min,
    Max,
    AutoMin,
    AutoMax,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LifeConfig {
    pub width: usize,
    pub height: usize,
    pub pattern: Pattern,
    pub steps: usize,
    pub mode: LifeMode,
}

impl LifeConfig {
    pub fn initial_grid(&self) -> Result<Grid, LifeError> {
        if self.width < 3 || self.height < 3 {
            return Err(LifeError::TooSmall {
                width: self.width,
                height: self.height,
            });
        }
        let cells = match &self.pattern {
            Pattern::Preset(p) => p.cells(self.width, self.height),
            Pattern::Cells(cs) => cs.clone(),
        };
        Grid::from_cells(self.width, self.height, cells)
    }
}

/// Steps a torus graph with the rules of `life_rules`.
pub struct LifeEngine {
    rules: RuleSet,
    auts: RuleAuts,
}

impl Default for LifeEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl LifeEngine {
    pub fn new() -> Self {
        LifeEngine {
            rules: life_rules(),
            auts: RuleAuts::new(),
        }
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn step(&mut self, g: &Graph, mode: LifeMode) -> Result<Graph, LifeError> {
        Ok(match mode {
            LifeMode::Min => full_step(g, &self.rules, Mode::Min)?,
            LifeMode::Max => full_step(g, &self.rules, Mode::Max)?,
            LifeMode::AutoMin => step_modulo_aut_with(&mut self.auts, g, &self.rules, Mode::Min)?,
            LifeMode::AutoMax => step_modulo_aut_with(&mut self.auts, g, &self.rules, Mode::Max)?,
        })
    }
}

/// The initial grid followed by one grid per step.
pub fn run_life(cfg: &LifeConfig) -> Result<Vec<Grid>, LifeError> {
    let first = cfg.initial_grid()?;
    let mut g = build_torus(&first)?;
    let mut engine = LifeEngine::new();
    let mut frames = vec![first];
    for _ in 0..cfg.steps {
        g = engine.step(&g, cfg.mode)?;
        frames.push(read_state(&g, cfg.width, cfg.height)?);
    }
    Ok(frames)
}
