//! Local information-gain estimate: how much unexplored space surrounds a
//! point.

use std::collections::VecDeque;

use crate::geom::Vec2;
use crate::world::{CellState, OccupancyGrid};

/// Fraction of the disk of `radius` around `n` that is connected unknown
/// space.
///
/// The disk is the set of in-bounds cells whose centers lie within `radius`
/// of `n`. Unknown cells only count when they are 4-connected (through
/// unknown cells inside the disk) to an unknown cell adjacent to `n`, so a
/// pocket of unexplored space sealed off behind a mapped wall contributes
/// nothing.
pub fn unknown_fraction(grid: &OccupancyGrid, n: Vec2, radius: f64) -> f64 {
    let (cx, cy) = grid.cell_of(n);
    let r_cells = (radius / grid.resolution).ceil() as i64 + 1;
    let lo_x = (cx - r_cells).max(0);
    let lo_y = (cy - r_cells).max(0);
    let hi_x = (cx + r_cells).min(grid.width as i64 - 1);
    let hi_y = (cy + r_cells).min(grid.height as i64 - 1);
    if lo_x > hi_x || lo_y > hi_y {
        return 0.0;
    }
    let bw = (hi_x - lo_x + 1) as usize;
    let bh = (hi_y - lo_y + 1) as usize;
    let local = |ix: i64, iy: i64| ((iy - lo_y) as usize) * bw + (ix - lo_x) as usize;
    let r2 = radius * radius;
    let in_disk = |ix: i64, iy: i64| grid.cell_center(ix, iy).dist2(n) <= r2;

    let mut total = 0usize;
    for iy in lo_y..=hi_y {
        for ix in lo_x..=hi_x {
            if in_disk(ix, iy) {
                total += 1;
            }
        }
    }
    if total == 0 {
        return 0.0;
    }

    let mut visited = vec![false; bw * bh];
    let mut queue = VecDeque::new();
    for dy in -1..=1 {
        for dx in -1..=1 {
            let (ix, iy) = (cx + dx, cy + dy);
            if ix < lo_x || ix > hi_x || iy < lo_y || iy > hi_y {
                continue;
            }
            if in_disk(ix, iy) && grid.get(ix, iy) == CellState::Unknown && !visited[local(ix, iy)]
            {
                visited[local(ix, iy)] = true;
                queue.push_back((ix, iy));
            }
        }
    }

    let mut count = 0usize;
    while let Some((ix, iy)) = queue.pop_front() {
        count += 1;
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (ix + dx, iy + dy);
            if nx < lo_x || nx > hi_x || ny < lo_y || ny > hi_y {
                continue;
            }
            if !in_disk(nx, ny) || visited[local(nx, ny)] {
                continue;
            }
            if grid.get(nx, ny) == CellState::Unknown {
                visited[local(nx, ny)] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    count as f64 / total as f64
}
