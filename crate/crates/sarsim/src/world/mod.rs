//! Trinary occupancy grid, grid traversal, raycasting, path search, and the
//! on-disk world format.

mod astar;
mod file;
mod flood;
mod raycast;

pub use astar::{astar_distance, astar_path, nav_goal};
pub use file::{Geofence, WorldFile};
pub use flood::unknown_fraction;
pub use raycast::{
    cast_ray, cast_rays, cast_scan, integrate_scan, raycast, scan_footprint, LaserModel, Ray,
    Scan, ScanRay,
};

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::{Error, Result};

/// Cell knowledge state. The ordering is meaningful: observations only move a
/// cell "up" (`Unknown < Free < Occupied`), so an occupied reading is sticky.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

/// Axis-aligned occupancy grid over a rectangle of the plane.
///
/// Cells are squares of side `resolution`; cell `(ix, iy)` covers the
/// half-open square `[origin + ix*res, origin + (ix+1)*res)` and its center is
/// at `origin + (ix+0.5, iy+0.5)*res`.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    pub origin: Vec2,
    cells: Vec<CellState>,
    /// Bumped on every cell mutation. Cheap staleness check for caches.
    pub revision: u64,
    /// Bumped only when a cell becomes (or stops being) `Occupied`.
    pub obstacle_revision: u64,
    free_count: usize,
    occupied_count: usize,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Vec2) -> OccupancyGrid {
        OccupancyGrid {
            resolution,
            width,
            height,
            origin,
            cells: vec![CellState::Unknown; width * height],
            revision: 0,
            obstacle_revision: 0,
            free_count: 0,
            occupied_count: 0,
        }
    }

    pub fn in_bounds(&self, ix: i64, iy: i64) -> bool {
        ix >= 0 && iy >= 0 && (ix as usize) < self.width && (iy as usize) < self.height
    }

    fn index(&self, ix: i64, iy: i64) -> usize {
        debug_assert!(self.in_bounds(ix, iy));
        iy as usize * self.width + ix as usize
    }

    pub fn get(&self, ix: i64, iy: i64) -> CellState {
        if self.in_bounds(ix, iy) {
            self.cells[self.index(ix, iy)]
        } else {
            CellState::Unknown
        }
    }

    /// Raw write, used when constructing ground-truth maps and when a loop
    /// closure invalidates previously rendered cells.
    pub fn set(&mut self, ix: i64, iy: i64, state: CellState) {
        if !self.in_bounds(ix, iy) {
            return;
        }
        let idx = self.index(ix, iy);
        let old = self.cells[idx];
        if old == state {
            return;
        }
        self.account(old, state);
        self.cells[idx] = state;
        self.revision += 1;
        if old == CellState::Occupied || state == CellState::Occupied {
            self.obstacle_revision += 1;
        }
    }

    /// Sensor-fusion write: state can only increase, so `Occupied` can never
    /// be downgraded by a later free-space reading.
    pub fn observe(&mut self, ix: i64, iy: i64, state: CellState) {
        if !self.in_bounds(ix, iy) {
            return;
        }
        let idx = self.index(ix, iy);
        let old = self.cells[idx];
        if state <= old {
            return;
        }
        self.account(old, state);
        self.cells[idx] = state;
        self.revision += 1;
        if state == CellState::Occupied {
            self.obstacle_revision += 1;
        }
    }

    /// Forget a cell entirely (used when re-rendering after a map repair).
    pub fn reset_unknown(&mut self, ix: i64, iy: i64) {
        self.set(ix, iy, CellState::Unknown);
    }

    fn account(&mut self, old: CellState, new: CellState) {
        match old {
            CellState::Free => self.free_count -= 1,
            CellState::Occupied => self.occupied_count -= 1,
            CellState::Unknown => {}
        }
        match new {
            CellState::Free => self.free_count += 1,
            CellState::Occupied => self.occupied_count += 1,
            CellState::Unknown => {}
        }
    }

    pub fn free_count(&self) -> usize {
        self.free_count
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied_count
    }

    /// Area (m^2) of all cells whose state is known, free or occupied.
    pub fn mapped_area(&self) -> f64 {
        (self.free_count + self.occupied_count) as f64 * self.resolution * self.resolution
    }

    pub fn total_area(&self) -> f64 {
        (self.width * self.height) as f64 * self.resolution * self.resolution
    }

    /// Cell containing a point (points exactly on a boundary belong to the
    /// cell on the +x/+y side, matching the half-open cell definition).
    pub fn cell_of(&self, p: Vec2) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.resolution).floor() as i64,
            ((p.y - self.origin.y) / self.resolution).floor() as i64,
        )
    }

    pub fn cell_center(&self, ix: i64, iy: i64) -> Vec2 {
        Vec2::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn state_at(&self, p: Vec2) -> CellState {
        let (ix, iy) = self.cell_of(p);
        self.get(ix, iy)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let (ix, iy) = self.cell_of(p);
        self.in_bounds(ix, iy)
    }

    pub fn require_free(&self, p: Vec2) -> Result<()> {
        if !self.contains(p) {
            return Err(Error::OutOfBounds { x: p.x, y: p.y });
        }
        if self.state_at(p) != CellState::Free {
            return Err(Error::NotFree { x: p.x, y: p.y });
        }
        Ok(())
    }

    pub fn extent(&self) -> Vec2 {
        Vec2::new(
            self.width as f64 * self.resolution,
            self.height as f64 * self.resolution,
        )
    }
}

/// What the visitor wants the grid march to do after a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Continue,
    Stop,
}

/// Walk every grid cell touched by the segment from `start` toward `dir`
/// (unit) out to `length` meters, front to back. Cell indices may fall
/// outside any particular grid; callers bound-check in the visitor.
///
/// The traversal is a standard incremental crossing walk with one extra rule:
/// when the ray passes exactly through a cell corner, both cells sharing that
/// corner edge-adjacent to the path are visited (x-step first), keeping the
/// set of visited cells symmetric in the direction of travel.
pub fn march<F: FnMut(i64, i64, f64) -> Step>(
    resolution: f64,
    origin: Vec2,
    start: Vec2,
    dir: Vec2,
    length: f64,
    mut visit: F,
) {
    let mut ix = ((start.x - origin.x) / resolution).floor() as i64;
    let mut iy = ((start.y - origin.y) / resolution).floor() as i64;

    if visit(ix, iy, 0.0) == Step::Stop || length <= 0.0 {
        return;
    }

    let step_x: i64 = if dir.x > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dir.y > 0.0 { 1 } else { -1 };

    // Distance along the ray to the next vertical / horizontal cell boundary.
    let next_boundary = |i: i64, s: i64, o: f64, p: f64, d: f64| -> f64 {
        if d == 0.0 {
            return f64::INFINITY;
        }
        let edge = o + (i + if s > 0 { 1 } else { 0 }) as f64 * resolution;
        (edge - p) / d
    };

    let mut t_max_x = next_boundary(ix, step_x, origin.x, start.x, dir.x);
    let mut t_max_y = next_boundary(iy, step_y, origin.y, start.y, dir.y);
    let t_delta_x = if dir.x != 0.0 { resolution / dir.x.abs() } else { f64::INFINITY };
    let t_delta_y = if dir.y != 0.0 { resolution / dir.y.abs() } else { f64::INFINITY };

    // A degenerate start exactly on a boundary can produce t_max <= 0; nudge
    // those forward so the walk still makes progress.
    if t_max_x <= 0.0 {
        t_max_x += t_delta_x;
        ix += step_x;
        if visit(ix, iy, 0.0) == Step::Stop {
            return;
        }
    }
    if t_max_y <= 0.0 {
        t_max_y += t_delta_y;
        iy += step_y;
        if visit(ix, iy, 0.0) == Step::Stop {
            return;
        }
    }

    let max_steps = 2 * (((length / resolution).ceil() as i64) + 4);
    for _ in 0..max_steps {
        if t_max_x.min(t_max_y) > length {
            return;
        }
        if t_max_x == t_max_y {
            // Exact corner crossing: visit both edge-adjacent cells, then the
            // diagonal one.
            let t = t_max_x;
            if visit(ix + step_x, iy, t) == Step::Stop {
                return;
            }
            if visit(ix, iy + step_y, t) == Step::Stop {
                return;
            }
            ix += step_x;
            iy += step_y;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
            if visit(ix, iy, t) == Step::Stop {
                return;
            }
        } else if t_max_x < t_max_y {
            let t = t_max_x;
            ix += step_x;
            t_max_x += t_delta_x;
            if visit(ix, iy, t) == Step::Stop {
                return;
            }
        } else {
            let t = t_max_y;
            iy += step_y;
            t_max_y += t_delta_y;
            if visit(ix, iy, t) == Step::Stop {
                return;
            }
        }
    }
}
