//! Grid path search used for travel-distance estimates and waypoint routes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geom::Vec2;
use crate::world::{CellState, OccupancyGrid};
use crate::Result;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

const NEIGHBORS: [(i64, i64, f64); 8] = [
    (1, 0, 1.0),
    (-1, 0, 1.0),
    (0, 1, 1.0),
    (0, -1, 1.0),
    (1, 1, SQRT_2),
    (1, -1, SQRT_2),
    (-1, 1, SQRT_2),
    (-1, -1, SQRT_2),
];

struct HeapEntry {
    f: f64,
    seq: u64,
    cell: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.seq == other.seq
    }
}
impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so BinaryHeap pops the lowest f first; ties resolve to the
        // earliest-pushed entry for determinism.
        other
            .f
            .partial_cmp(&self.f)
            .unwrap()
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(a: (i64, i64), b: (i64, i64), res: f64) -> f64 {
    let dx = (a.0 - b.0).abs() as f64;
    let dy = (a.1 - b.1).abs() as f64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    res * (hi + (SQRT_2 - 1.0) * lo)
}

/// Shortest 8-connected path between the free cells containing `from` and
/// `to`. Diagonal moves cost `sqrt(2) * resolution` and are permitted between
/// diagonally adjacent free cells even when both shared orthogonal neighbors
/// are blocked; distances are between cell centers.
///
/// Returns `Ok(None)` when no path exists, and the distance plus the cell-
/// center waypoints (including the start cell's center) otherwise.
pub fn astar_path(
    grid: &OccupancyGrid,
    from: Vec2,
    to: Vec2,
) -> Result<Option<(f64, Vec<Vec2>)>> {
    grid.require_free(from)?;
    grid.require_free(to)?;
    let start = grid.cell_of(from);
    let goal = grid.cell_of(to);
    let w = grid.width as i64;
    let idx = |c: (i64, i64)| (c.1 * w + c.0) as usize;

    if start == goal {
        return Ok(Some((0.0, vec![grid.cell_center(start.0, start.1)])));
    }

    let n = grid.width * grid.height;
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;

    dist[idx(start)] = 0.0;
    heap.push(HeapEntry { f: octile(start, goal, grid.resolution), seq, cell: idx(start) });

    while let Some(HeapEntry { cell, .. }) = heap.pop() {
        if closed[cell] {
            continue;
        }
        closed[cell] = true;
        let c = (cell as i64 % w, cell as i64 / w);
        if c == goal {
            let mut cells = vec![cell];
            let mut cur = cell;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push(cur);
            }
            cells.reverse();
            let waypoints = cells
                .iter()
                .map(|&i| grid.cell_center(i as i64 % w, i as i64 / w))
                .collect();
            return Ok(Some((dist[cell], waypoints)));
        }
        for (dx, dy, step) in NEIGHBORS {
            let nb = (c.0 + dx, c.1 + dy);
            if !grid.in_bounds(nb.0, nb.1) || grid.get(nb.0, nb.1) != CellState::Free {
                continue;
            }
            let ni = idx(nb);
            if closed[ni] {
                continue;
            }
            let g = dist[cell] + step * grid.resolution;
            if g < dist[ni] {
                dist[ni] = g;
                parent[ni] = cell;
                seq += 1;
                heap.push(HeapEntry { f: g + octile(nb, goal, grid.resolution), seq, cell: ni });
            }
        }
    }
    Ok(None)
}

/// Travel distance only; see [`astar_path`].
pub fn astar_distance(grid: &OccupancyGrid, from: Vec2, to: Vec2) -> Result<Option<f64>> {
    Ok(astar_path(grid, from, to)?.map(|(d, _)| d))
}

/// Snap a target to navigable space: the point itself when it already sits on
/// a free cell, otherwise the center of the nearest free cell within 2 m.
pub fn nav_goal(grid: &OccupancyGrid, p: Vec2) -> Option<Vec2> {
    if grid.contains(p) && grid.state_at(p) == CellState::Free {
        return Some(p);
    }
    let (cx, cy) = grid.cell_of(p);
    let r_cells = (2.0 / grid.resolution).ceil() as i64 + 1;
    let mut best: Option<(f64, i64, i64)> = None;
    for iy in cy - r_cells..=cy + r_cells {
        for ix in cx - r_cells..=cx + r_cells {
            if grid.get(ix, iy) != CellState::Free {
                continue;
            }
            let d = grid.cell_center(ix, iy).dist(p);
            if d > 2.0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bd, by, bx)) => {
                    d < bd || (d == bd && (iy, ix) < (by, bx))
                }
            };
            if better {
                best = Some((d, iy, ix));
            }
        }
    }
    best.map(|(_, iy, ix)| grid.cell_center(ix, iy))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_grid() -> OccupancyGrid {
        let mut g = OccupancyGrid::new(50, 50, 0.1, Vec2::ZERO);
        for iy in 0..50 {
            for ix in 0..50 {
                g.set(ix, iy, CellState::Free);
            }
        }
        g
    }

    #[test]
    fn straight_and_diagonal_distances() {
        let g = open_grid();
        let d = astar_distance(&g, Vec2::new(0.55, 0.55), Vec2::new(1.55, 0.55))
            .unwrap()
            .unwrap();
        assert!((d - 1.0).abs() < 1e-9);
        let d = astar_distance(&g, Vec2::new(0.55, 0.55), Vec2::new(1.55, 1.55))
            .unwrap()
            .unwrap();
        assert!((d - SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn same_cell_is_zero() {
        let g = open_grid();
        let (d, path) = astar_path(&g, Vec2::new(0.51, 0.52), Vec2::new(0.58, 0.57))
            .unwrap()
            .unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(path.len(), 1);
    }

    #[test]
    fn routes_around_walls() {
        let mut g = open_grid();
        // Wall across x = [2.0, 2.1) with a gap at the top two rows.
        for iy in 0..48 {
            g.set(20, iy, CellState::Occupied);
        }
        let a = Vec2::new(1.05, 2.55);
        let b = Vec2::new(3.05, 2.55);
        let (d, path) = astar_path(&g, a, b).unwrap().unwrap();
        // Must detour up to the gap near y = 4.8 and back.
        assert!(d > 4.0, "distance {d}");
        assert_eq!(path.first().copied(), Some(g.cell_center(10, 25)));
        assert_eq!(path.last().copied(), Some(g.cell_center(30, 25)));
        for p in &path {
            assert_eq!(g.state_at(*p), CellState::Free);
        }
        // Consecutive waypoints stay 8-adjacent.
        for pair in path.windows(2) {
            let dx = ((pair[1].x - pair[0].x) / 0.1).round().abs();
            let dy = ((pair[1].y - pair[0].y) / 0.1).round().abs();
            assert!(dx <= 1.0 && dy <= 1.0 && dx + dy > 0.0);
        }
    }

    #[test]
    fn unreachable_returns_none() {
        let mut g = open_grid();
        for iy in 0..50 {
            g.set(20, iy, CellState::Occupied);
        }
        let d = astar_distance(&g, Vec2::new(1.05, 2.55), Vec2::new(3.05, 2.55)).unwrap();
        assert!(d.is_none());
    }

    #[test]
    fn unknown_is_not_traversable() {
        let mut g = OccupancyGrid::new(50, 50, 0.1, Vec2::ZERO);
        for ix in 0..50 {
            g.set(ix, 25, CellState::Free);
        }
        // Row 25 is a free corridor; everything else unknown.
        let d = astar_distance(&g, Vec2::new(0.55, 2.55), Vec2::new(4.55, 2.55))
            .unwrap()
            .unwrap();
        assert!((d - 4.0).abs() < 1e-9);
        assert!(astar_distance(&g, Vec2::new(0.55, 2.55), Vec2::new(0.55, 2.35)).is_err());
    }

    #[test]
    fn matches_dijkstra_on_random_maps() {
        // Independent check against a plain Dijkstra with the same move rule.
        let mut state: u64 = 7;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33
        };
        for case in 0..50 {
            let mut g = OccupancyGrid::new(30, 30, 0.1, Vec2::ZERO);
            for iy in 0..30 {
                for ix in 0..30 {
                    let s = if next() % 100 < 30 { CellState::Occupied } else { CellState::Free };
                    g.set(ix, iy, s);
                }
            }
            let pick_free = |next: &mut dyn FnMut() -> u64, g: &OccupancyGrid| loop {
                let ix = (next() % 30) as i64;
                let iy = (next() % 30) as i64;
                if g.get(ix, iy) == CellState::Free {
                    return g.cell_center(ix, iy);
                }
            };
            let a = pick_free(&mut next, &g);
            let b = pick_free(&mut next, &g);
            let got = astar_distance(&g, a, b).unwrap();
            let want = dijkstra(&g, a, b);
            match (got, want) {
                (None, None) => {}
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-9, "case {case}: {x} vs {y}"),
                other => panic!("case {case}: mismatch {other:?}"),
            }
        }
    }

    /// Textbook Dijkstra over the same 8-connected free-cell graph.
    fn dijkstra(g: &OccupancyGrid, from: Vec2, to: Vec2) -> Option<f64> {
        let start = g.cell_of(from);
        let goal = g.cell_of(to);
        let w = g.width as i64;
        let n = g.width * g.height;
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[(start.1 * w + start.0) as usize] = 0.0;
        loop {
            let mut cur = usize::MAX;
            let mut best = f64::INFINITY;
            for i in 0..n {
                if !done[i] && dist[i] < best {
                    best = dist[i];
                    cur = i;
                }
            }
            if cur == usize::MAX {
                return None;
            }
            done[cur] = true;
            let c = (cur as i64 % w, cur as i64 / w);
            if c == goal {
                return Some(dist[cur]);
            }
            for (dx, dy, step) in NEIGHBORS {
                let nb = (c.0 + dx, c.1 + dy);
                if !g.in_bounds(nb.0, nb.1) || g.get(nb.0, nb.1) != CellState::Free {
                    continue;
                }
                let ni = (nb.1 * w + nb.0) as usize;
                let cand = dist[cur] + step * g.resolution;
                if cand < dist[ni] {
                    dist[ni] = cand;
                }
            }
        }
    }

    #[test]
    fn nav_goal_snaps_to_free_space() {
        let mut g = OccupancyGrid::new(50, 50, 0.1, Vec2::ZERO);
        for iy in 0..50 {
            for ix in 0..50 {
                if ix < 25 {
                    g.set(ix, iy, CellState::Free);
                }
            }
        }
        let p = Vec2::new(1.05, 1.05);
        assert_eq!(nav_goal(&g, p), Some(p));
        // A point in unknown space snaps to the nearest free cell center.
        let q = nav_goal(&g, Vec2::new(2.75, 1.05)).unwrap();
        assert!((q.x - 2.45).abs() < 1e-9, "{q:?}");
        assert!((q.y - 1.05).abs() < 1e-9, "{q:?}");
        // Far outside everything: no goal.
        assert_eq!(nav_goal(&g, Vec2::new(4.9, -4.0)), None);
    }
}
