use serde::{Deserialize, Serialize};

use super::{nearest_obstacle_distance, Obstacle, WorldError};
use crate::geometry::{point_rect_distance, Point2};

/// Grid cell index; `i` runs along the route (+x), `j` to the left (+y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub i: i32,
    pub j: i32,
}

impl Cell {
    pub const fn new(i: i32, j: i32) -> Self {
        Self { i, j }
    }
}

/// Placement and resolution of the occupancy grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// World position of the lower-left corner of cell (0, 0).
    pub origin: Point2,
    pub cell_size: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            origin: Point2::default(),
            cell_size: 3.0,
            width: 1,
            height: 1,
        }
    }
}

/// Occupancy grid with the inflated obstacles it was rasterized from.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    spec: GridSpec,
    obstacles: Vec<Obstacle>,
    blocked: Vec<bool>,
    centerline: Vec<Point2>,
    pub start: Point2,
    pub goal: Point2,
}

impl GridMap {
    /// Builds the map; `obstacles` are expected to be inflated already.
    pub fn new(
        spec: GridSpec,
        obstacles: Vec<Obstacle>,
        centerline: Vec<Point2>,
        start: Point2,
        goal: Point2,
    ) -> Result<Self, WorldError> {
        if !(spec.cell_size > 0.0) {
            return Err(WorldError::BadCellSize(spec.cell_size));
        }
        if spec.width == 0 || spec.height == 0 {
            return Err(WorldError::EmptyGrid);
        }
        if centerline.len() < 2 {
            return Err(WorldError::ShortCenterline(centerline.len()));
        }
        let mut map = Self {
            spec,
            obstacles,
            blocked: Vec::new(),
            centerline,
            start,
            goal,
        };
        map.rasterize();
        Ok(map)
    }

    fn rasterize(&mut self) {
        let (w, h) = (self.spec.width as i32, self.spec.height as i32);
        let mut blocked = vec![false; (w * h) as usize];
        for j in 0..h {
            for i in 0..w {
                let (lo, hi) = self.cell_bounds(Cell::new(i, j));
                blocked[(j * w + i) as usize] = self
                    .obstacles
                    .iter()
                    .any(|o| point_rect_distance(o.center, lo, hi) < o.radius);
            }
        }
        self.blocked = blocked;
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn width(&self) -> u32 {
        self.spec.width
    }

    pub fn height(&self) -> u32 {
        self.spec.height
    }

    pub fn cell_size(&self) -> f64 {
        self.spec.cell_size
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    /// Start position in the world frame.
    pub fn start(&self) -> Point2 {
        self.start
    }

    pub fn goal(&self) -> Point2 {
        self.goal
    }

    pub fn centerline(&self) -> &[Point2] {
        &self.centerline
    }

    pub fn blocked_mask(&self) -> &[bool] {
        &self.blocked
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.i >= 0 && c.j >= 0 && c.i < self.spec.width as i32 && c.j < self.spec.height as i32
    }

    /// True for cells outside the grid as well as rasterized obstacle cells.
    pub fn is_blocked(&self, c: Cell) -> bool {
        !self.contains(c) || self.blocked[(c.j * self.spec.width as i32 + c.i) as usize]
    }

    pub fn cell_bounds(&self, c: Cell) -> (Point2, Point2) {
        let cs = self.spec.cell_size;
        let lo = Point2::new(
            self.spec.origin.x + c.i as f64 * cs,
            self.spec.origin.y + c.j as f64 * cs,
        );
        (lo, Point2::new(lo.x + cs, lo.y + cs))
    }

    pub fn cell_center(&self, c: Cell) -> Point2 {
        let cs = self.spec.cell_size;
        Point2::new(
            self.spec.origin.x + (c.i as f64 + 0.5) * cs,
            self.spec.origin.y + (c.j as f64 + 0.5) * cs,
        )
    }

    /// Cell containing `p`, which may lie outside the grid.
    pub fn cell_of(&self, p: Point2) -> Cell {
        let cs = self.spec.cell_size;
        Cell::new(
            ((p.x - self.spec.origin.x) / cs).floor() as i32,
            ((p.y - self.spec.origin.y) / cs).floor() as i32,
        )
    }

    /// Nearest unblocked cell to `p` by center distance; ties go to the cell furthest along `toward`.
    pub fn snap(&self, p: Point2, toward: Point2) -> Option<Cell> {
        let dir = toward - p;
        let mut best: Option<(f64, f64, Cell)> = None;
        for j in 0..self.spec.height as i32 {
            for i in 0..self.spec.width as i32 {
                let c = Cell::new(i, j);
                if self.is_blocked(c) {
                    continue;
                }
                let center = self.cell_center(c);
                let d = center.distance(p);
                let along = (center - p).dot(dir);
                let better = match best {
                    None => true,
                    Some((bd, ba, _)) => d < bd - 1e-9 || ((d - bd).abs() <= 1e-9 && along > ba),
                };
                if better {
                    best = Some((d, along, c));
                }
            }
        }
        best.map(|(_, _, c)| c)
    }

    pub fn start_cell(&self) -> Option<Cell> {
        self.snap(self.start, self.goal)
    }

    pub fn goal_cell(&self) -> Option<Cell> {
        self.snap(self.goal, self.goal + (self.goal - self.start))
    }

    /// Clearance from the cell center to the nearest inflated obstacle boundary.
    pub fn clearance(&self, c: Cell) -> f64 {
        nearest_obstacle_distance(self.cell_center(c), &self.obstacles)
    }
}

/// Translates the grid, start and goal by `(dx, dy)` while obstacles and centerline stay put.
pub fn shift_map(map: &GridMap, dx: f64, dy: f64) -> GridMap {
    let delta = Point2::new(dx, dy);
    let mut spec = map.spec;
    spec.origin = spec.origin + delta;
    let mut shifted = GridMap {
        spec,
        obstacles: map.obstacles.clone(),
        blocked: Vec::new(),
        centerline: map.centerline.clone(),
        start: map.start + delta,
        goal: map.goal + delta,
    };
    shifted.rasterize();
    shifted
}
