//! Line-of-sight queries and simulated range scans on occupancy grids.

use std::f64::consts::PI;

use crate::geom::{Pose2, Vec2};
use crate::world::{march, CellState, OccupancyGrid, Step};
use crate::{Error, Result};

/// True when the segment `a -> b` crosses no occupied cell. Unknown cells do
/// not block: the query answers "is there a known obstacle in the way".
pub fn raycast(grid: &OccupancyGrid, a: Vec2, b: Vec2) -> Result<bool> {
    if !grid.contains(a) {
        return Err(Error::OutOfBounds { x: a.x, y: a.y });
    }
    if !grid.contains(b) {
        return Err(Error::OutOfBounds { x: b.x, y: b.y });
    }
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return Ok(grid.state_at(a) != CellState::Occupied);
    }
    let dir = d * (1.0 / len);
    let mut clear = true;
    march(grid.resolution, grid.origin, a, dir, len, |ix, iy, _| {
        if grid.get(ix, iy) == CellState::Occupied {
            clear = false;
            Step::Stop
        } else {
            Step::Continue
        }
    });
    Ok(clear)
}

/// One cast range measurement.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec2,
    pub angle: f64,
    pub max_range: f64,
    /// Distance traveled: to the entry of the blocking cell when `hit`,
    /// otherwise to max range or the grid boundary.
    pub length: f64,
    pub hit: bool,
    /// Cells the ray merely grazed at the terminal distance (corner
    /// crossings) before the cell it stopped in. Needed to re-render the ray
    /// onto a grid without misplacing the endpoint by one cell.
    pub terminal_skip: u32,
}

impl Ray {
    pub fn endpoint(&self) -> Vec2 {
        let (s, c) = self.angle.sin_cos();
        Vec2::new(self.origin.x + c * self.length, self.origin.y + s * self.length)
    }
}

/// March a single ray until it enters an occupied cell, leaves the grid, or
/// reaches `max_range`. The cell containing the origin never blocks.
pub fn cast_ray(grid: &OccupancyGrid, origin: Vec2, angle: f64, max_range: f64) -> Ray {
    let (s, c) = angle.sin_cos();
    let dir = Vec2::new(c, s);
    let mut length = max_range;
    let mut hit = false;
    let mut first = true;
    // Entry distances of the most recent pass-through cells, so a stop can
    // tell how many of them sat at (numerically) the same distance.
    let mut recent = [f64::NEG_INFINITY; 4];
    let mut ridx = 0usize;
    let mut skip = 0u32;
    march(grid.resolution, grid.origin, origin, dir, max_range, |ix, iy, t| {
        if first {
            first = false;
            return Step::Continue;
        }
        let stop = !grid.in_bounds(ix, iy) || grid.get(ix, iy) == CellState::Occupied;
        if stop {
            length = t;
            hit = grid.in_bounds(ix, iy);
            let band = t * (1.0 - 1e-12);
            skip = recent.iter().filter(|&&rt| rt >= band).count() as u32;
            Step::Stop
        } else {
            recent[ridx % recent.len()] = t;
            ridx += 1;
            Step::Continue
        }
    });
    Ray { origin, angle, max_range, length, hit, terminal_skip: skip }
}

/// Cast `count` rays radially from `center` at angles `k * 2pi / count`.
/// The center must sit on a free cell.
pub fn cast_rays(grid: &OccupancyGrid, center: Vec2, range: f64, count: usize) -> Result<Vec<Ray>> {
    grid.require_free(center)?;
    let mut rays = Vec::with_capacity(count);
    for k in 0..count {
        let angle = k as f64 * 2.0 * PI / count as f64;
        rays.push(cast_ray(grid, center, angle, range));
    }
    Ok(rays)
}

/// Parameters of the simulated range scanner.
#[derive(Debug, Clone, Copy)]
pub struct LaserModel {
    pub max_range: f64,
    /// Field of view in radians, centered on the sensor heading.
    pub fov: f64,
    pub rays: usize,
}

impl Default for LaserModel {
    fn default() -> LaserModel {
        LaserModel { max_range: 4.0, fov: 145.0_f64.to_radians(), rays: 128 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanRay {
    /// Angle relative to the sensor heading.
    pub rel_angle: f64,
    pub range: f64,
    pub hit: bool,
    /// See [`Ray::terminal_skip`].
    pub terminal_skip: u32,
}

/// A full sweep of range readings taken at some pose. Rays store only
/// heading-relative angles so a scan can be re-rendered at a corrected pose.
#[derive(Debug, Clone)]
pub struct Scan {
    pub rays: Vec<ScanRay>,
}

/// Simulate a scan of `truth` taken from `pose`.
pub fn cast_scan(truth: &OccupancyGrid, pose: Pose2, model: &LaserModel) -> Scan {
    let spacing = if model.fov >= 2.0 * PI {
        // Full circle: exclusive spacing so the first and last ray don't
        // coincide.
        model.fov / model.rays as f64
    } else {
        model.fov / (model.rays - 1) as f64
    };
    let start = -model.fov / 2.0;
    let mut rays = Vec::with_capacity(model.rays);
    for k in 0..model.rays {
        let rel = start + k as f64 * spacing;
        let ray = cast_ray(truth, pose.position(), pose.theta + rel, model.max_range);
        rays.push(ScanRay {
            rel_angle: rel,
            range: ray.length,
            hit: ray.hit,
            terminal_skip: ray.terminal_skip,
        });
    }
    Scan { rays }
}

/// Walk every cell a scan covers when rendered from `pose`, reporting the
/// state the scan implies for it. Shared by integration and footprint
/// computation so both see the exact same cells.
fn render_scan_cells<F: FnMut(i64, i64, CellState)>(
    resolution: f64,
    grid_origin: Vec2,
    pose: Pose2,
    scan: &Scan,
    mut emit: F,
) {
    for ray in &scan.rays {
        let angle = pose.theta + ray.rel_angle;
        let (s, c) = angle.sin_cos();
        let dir = Vec2::new(c, s);
        // Cells entered strictly before the measured range are traversed free
        // space; the cell entered at the measured range is the obstacle when
        // the ray hit. Corner grazes recorded at cast time are replayed as
        // free cells so the obstacle lands in the cell that actually stopped
        // the ray rather than a cell merely touched at the same distance.
        let cutoff = ray.range * (1.0 - 1e-12);
        let walk_len = ray.range + 0.6 * resolution;
        let mut grazed = 0u32;
        march(resolution, grid_origin, pose.position(), dir, walk_len, |ix, iy, t| {
            if t < cutoff {
                emit(ix, iy, CellState::Free);
                Step::Continue
            } else if grazed < ray.terminal_skip {
                grazed += 1;
                emit(ix, iy, CellState::Free);
                Step::Continue
            } else {
                if ray.hit {
                    emit(ix, iy, CellState::Occupied);
                }
                Step::Stop
            }
        });
    }
}

/// Fuse a scan into the belief map, rendering it from `pose` (which may be a
/// drifted estimate of where the scan was actually taken).
pub fn integrate_scan(belief: &mut OccupancyGrid, pose: Pose2, scan: &Scan) {
    let res = belief.resolution;
    let origin = belief.origin;
    render_scan_cells(res, origin, pose, scan, |ix, iy, state| {
        belief.observe(ix, iy, state);
    });
}

/// The sorted, deduplicated set of cells a scan writes when rendered from
/// `pose`. Used to invalidate stale renders before re-integration.
pub fn scan_footprint(grid: &OccupancyGrid, pose: Pose2, scan: &Scan) -> Vec<(i64, i64)> {
    let mut cells = Vec::new();
    render_scan_cells(grid.resolution, grid.origin, pose, scan, |ix, iy, _| {
        if grid.in_bounds(ix, iy) {
            cells.push((ix, iy));
        }
    });
    cells.sort_unstable();
    cells.dedup();
    cells
}
