use std::fmt;
use std::path::Path;

use crate::envs::{Environment, StepResult};
use crate::error::{Result, RrpError};
use crate::rng::SeededRng;

/// Moves on the maze. Index order fixes the action numbering used by agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Right = 0,
    Down = 1,
    Left = 2,
    Up = 3,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [GridAction::Right, GridAction::Down, GridAction::Left, GridAction::Up];

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| RrpError::invalid(format!("grid action index {i} out of range")))
    }

    fn delta(self) -> (i64, i64) {
        match self {
            GridAction::Right => (0, 1),
            GridAction::Down => (1, 0),
            GridAction::Left => (0, -1),
            GridAction::Up => (-1, 0),
        }
    }
}

/// Sparse-reward maze: +1 on entering the goal cell, 0 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMaze {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    start: (usize, usize),
    goal: (usize, usize),
    max_steps: usize,
    agent: (usize, usize),
    steps: usize,
    done: bool,
}

impl GridMaze {
    pub fn new(
        width: usize,
        height: usize,
        walls: &[(usize, usize)],
        start: (usize, usize),
        goal: (usize, usize),
        max_steps: usize,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(RrpError::invalid("maze dimensions must be positive"));
        }
        if max_steps == 0 {
            return Err(RrpError::invalid("maze episode cap must be positive"));
        }
        let mut mask = vec![false; width * height];
        for &(r, c) in walls {
            if r >= height || c >= width {
                return Err(RrpError::invalid(format!("wall ({r},{c}) outside the maze")));
            }
            mask[r * width + c] = true;
        }
        for (name, (r, c)) in [("start", start), ("goal", goal)] {
            if r >= height || c >= width {
                return Err(RrpError::invalid(format!("{name} ({r},{c}) outside the maze")));
            }
            if mask[r * width + c] {
                return Err(RrpError::invalid(format!("{name} ({r},{c}) lies on a wall")));
            }
        }
        if start == goal {
            return Err(RrpError::invalid("start and goal must differ"));
        }
        Ok(Self {
            width,
            height,
            walls: mask,
            start,
            goal,
            max_steps,
            agent: start,
            steps: 0,
            done: false,
        })
    }

    /// Open `n × n` grid, start top-left, goal bottom-right.
    pub fn open(n: usize, max_steps: usize) -> Result<Self> {
        Self::new(n, n, &[], (0, 0), (n - 1, n - 1), max_steps)
    }

    /// Parses `#` wall, `.` free, `S` start, `G` goal; one row per line.
    pub fn parse(text: &str, max_steps: usize) -> Result<Self> {
        let rows: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
        if rows.is_empty() {
            return Err(RrpError::Parse("maze layout is empty".into()));
        }
        let width = rows[0].chars().count();
        let (mut walls, mut start, mut goal) = (Vec::new(), None, None);
        for (r, line) in rows.iter().enumerate() {
            if line.chars().count() != width {
                return Err(RrpError::Parse(format!(
                    "maze row {r} has {} cells, expected {width}",
                    line.chars().count()
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '#' => walls.push((r, c)),
                    '.' => {}
                    'S' if start.is_none() => start = Some((r, c)),
                    'G' if goal.is_none() => goal = Some((r, c)),
                    'S' | 'G' => return Err(RrpError::Parse(format!("duplicate '{ch}' at ({r},{c})"))),
                    other => return Err(RrpError::Parse(format!("unexpected maze cell '{other}' at ({r},{c})"))),
                }
            }
        }
        let start = start.ok_or_else(|| RrpError::Parse("maze has no start cell 'S'".into()))?;
        let goal = goal.ok_or_else(|| RrpError::Parse("maze has no goal cell 'G'".into()))?;
        Self::new(width, rows.len(), &walls, start, goal, max_steps)
    }

    pub fn load(path: &Path, max_steps: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RrpError::io(path, e))?;
        Self::parse(&text, max_steps)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn start(&self) -> (usize, usize) {
        self.start
    }

    pub fn goal(&self) -> (usize, usize) {
        self.goal
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn agent(&self) -> (usize, usize) {
        self.agent
    }

    pub fn is_wall(&self, cell: (usize, usize)) -> bool {
        self.walls[self.index(cell)]
    }

    pub fn index(&self, (r, c): (usize, usize)) -> usize {
        r * self.width + c
    }

    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index / self.width, index % self.width)
    }

    /// Indices of every non-wall cell.
    pub fn open_cells(&self) -> Vec<usize> {
        (0..self.num_cells()).filter(|&i| !self.walls[i]).collect()
    }

    /// Pure transition rule: the cell reached by moving from `cell`.
    pub fn next_cell(&self, (r, c): (usize, usize), action: GridAction) -> (usize, usize) {
        let (dr, dc) = action.delta();
        let (nr, nc) = (r as i64 + dr, c as i64 + dc);
        if nr < 0 || nc < 0 || nr >= self.height as i64 || nc >= self.width as i64 {
            return (r, c);
        }
        let next = (nr as usize, nc as usize);
        if self.is_wall(next) {
            (r, c)
        } else {
            next
        }
    }

    /// Breadth-first search distance from start to goal, if reachable.
    pub fn shortest_path_len(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.num_cells()];
        let mut queue = std::collections::VecDeque::new();
        dist[self.index(self.start)] = 0;
        queue.push_back(self.start);
        while let Some(cell) = queue.pop_front() {
            let d = dist[self.index(cell)];
            if cell == self.goal {
                return Some(d);
            }
            for a in GridAction::ALL {
                let n = self.next_cell(cell, a);
                if dist[self.index(n)] == usize::MAX {
                    dist[self.index(n)] = d + 1;
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

impl Environment for GridMaze {
    type State = (usize, usize);

    fn num_actions(&self) -> usize {
        4
    }

    fn feature_dim(&self) -> usize {
        self.num_cells()
    }

    fn reset(&mut self, _rng: &mut SeededRng) -> (usize, usize) {
        self.agent = self.start;
        self.steps = 0;
        self.done = false;
        self.agent
    }

    fn step(&mut self, action: usize) -> Result<StepResult<(usize, usize)>> {
        if self.done {
            return Err(RrpError::Protocol(
                "grid maze stepped after episode end; call reset".into(),
            ));
        }
        let action = GridAction::from_index(action)?;
        self.agent = self.next_cell(self.agent, action);
        self.steps += 1;
        let reached_goal = self.agent == self.goal;
        self.done = reached_goal || self.steps >= self.max_steps;
        Ok(StepResult {
            next_state: self.agent,
            reward: if reached_goal { 1.0 } else { 0.0 },
            done: self.done,
            reached_goal,
        })
    }

    /// One-hot over cells.
    fn features(&self, state: &(usize, usize)) -> Vec<f64> {
        let mut v = vec![0.0; self.num_cells()];
        v[self.index(*state)] = 1.0;
        v
    }

    fn embed(&self, &(r, c): &(usize, usize)) -> Vec<f64> {
        vec![r as f64, c as f64]
    }
}

impl fmt::Display for GridMaze {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.height {
            for c in 0..self.width {
                let ch = if (r, c) == self.start {
                    'S'
                } else if (r, c) == self.goal {
                    'G'
                } else if self.is_wall((r, c)) {
                    '#'
                } else {
                    '.'
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
