//! Turns raw tree nodes into a compact set of exploration targets.
//!
//! Every allocation round the planner hands over freshly grown nodes plus the
//! previous round's frontiers. Nodes with too little reachable unknown space
//! around them are dropped, the survivors are clustered with flat-kernel mean
//! shift, and each cluster is represented by its centroid — except members
//! that cannot see the representative past a wall, which stay as separate
//! targets so the far side of a corner is not forgotten.

use std::collections::HashSet;

use crate::geom::Vec2;
use crate::world::{raycast, unknown_fraction, OccupancyGrid};

/// An exploration target with its expected information gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierNode {
    pub pos: Vec2,
    /// Fraction of the surrounding sensor disk that is reachable unknown
    /// space, in [0, 1]. At least the admission threshold at creation.
    pub gain: f64,
}

/// Expected information gain of standing at `n`: the fraction of the laser
/// disk (radius `beta`) filled with unknown cells reachable from `n`.
pub fn information_gain_frontier(n: Vec2, grid: &OccupancyGrid, beta: f64) -> f64 {
    assert!(beta > 0.0, "sensor range must be positive");
    unknown_fraction(grid, n, beta)
}

/// Flat-kernel mean shift. Each point iterates to the mean of all points
/// within `bandwidth` until it moves less than 1e-4 m or 100 iterations pass;
/// converged modes closer than `bandwidth / 2` collapse into one centroid
/// (first-seen position wins). Returns the centroids and, for every input
/// point, the index of its nearest centroid (ties to the lowest index).
pub fn mean_shift(points: &[Vec2], bandwidth: f64) -> (Vec<Vec2>, Vec<usize>) {
    assert!(bandwidth > 0.0, "bandwidth must be positive");
    if points.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let eps2 = bandwidth * bandwidth;
    let mut modes: Vec<Vec2> = Vec::new();
    for &start in points {
        let mut x = start;
        for _ in 0..100 {
            let mut sum = Vec2::ZERO;
            let mut count = 0usize;
            for &p in points {
                if p.dist2(x) <= eps2 {
                    sum = sum + p;
                    count += 1;
                }
            }
            if count == 0 {
                break;
            }
            let next = sum * (1.0 / count as f64);
            let moved = next.dist(x);
            x = next;
            if moved < 1e-4 {
                break;
            }
        }
        if !modes.iter().any(|m| m.dist(x) <= bandwidth * 0.5) {
            modes.push(x);
        }
    }
    let assignment = points
        .iter()
        .map(|p| {
            let mut best = (f64::INFINITY, 0usize);
            for (i, m) in modes.iter().enumerate() {
                let d = m.dist2(*p);
                if d < best.0 {
                    best = (d, i);
                }
            }
            best.1
        })
        .collect();
    (modes, assignment)
}

/// Spatial deduplication for filter candidates: keep the first point seen in
/// each `bucket`-sized grid cell, preserving input order. Keeps the number of
/// clustering inputs proportional to explored area rather than node count.
pub fn thin(points: &[Vec2], bucket: f64) -> Vec<Vec2> {
    assert!(bucket > 0.0, "bucket size must be positive");
    let mut taken: HashSet<(i64, i64)> = HashSet::new();
    let mut out = Vec::new();
    for &p in points {
        let key = ((p.x / bucket).floor() as i64, (p.y / bucket).floor() as i64);
        if taken.insert(key) {
            out.push(p);
        }
    }
    out
}

/// One filtering round: union the new candidates with the previous frontier
/// set, drop everything whose information gain fell below `xi`, cluster the
/// rest, and emit one representative per cluster plus any member that has no
/// line of sight to that representative.
///
/// The representative is the cluster centroid. When the centroid itself sits
/// in well-mapped space (gain below `xi` — possible since it is a mean of
/// admitted points), the highest-gain member stands in, so every emitted
/// target genuinely borders unknown space.
pub fn filter_exploration_nodes(
    candidates: &[Vec2],
    previous: &[FrontierNode],
    grid: &OccupancyGrid,
    beta: f64,
    xi: f64,
    bandwidth: f64,
) -> Vec<FrontierNode> {
    // Exact-duplicate positions (a node re-submitted as both candidate and
    // frontier) would otherwise be emitted twice by the split-out rule.
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    let mut pool: Vec<Vec2> = Vec::new();
    for p in candidates.iter().chain(previous.iter().map(|f| &f.pos)) {
        if seen.insert((p.x.to_bits(), p.y.to_bits())) {
            pool.push(*p);
        }
    }

    let mut positions: Vec<Vec2> = Vec::new();
    let mut gains: Vec<f64> = Vec::new();
    for p in pool {
        let g = information_gain_frontier(p, grid, beta);
        if g >= xi {
            positions.push(p);
            gains.push(g);
        }
    }
    if positions.is_empty() {
        return Vec::new();
    }

    let (centroids, assignment) = mean_shift(&positions, bandwidth);
    let mut out: Vec<FrontierNode> = Vec::new();
    for (ci, &c) in centroids.iter().enumerate() {
        let members: Vec<usize> =
            (0..positions.len()).filter(|&i| assignment[i] == ci).collect();
        let centroid_gain = information_gain_frontier(c, grid, beta);
        let (rep, rep_gain) = if centroid_gain >= xi {
            (c, centroid_gain)
        } else {
            let Some(&best) = members.iter().max_by(|&&a, &&b| {
                gains[a].partial_cmp(&gains[b]).unwrap().then(b.cmp(&a))
            }) else {
                continue; // stale empty cluster
            };
            (positions[best], gains[best])
        };
        out.push(FrontierNode { pos: rep, gain: rep_gain });
        for &i in &members {
            let p = positions[i];
            if p.x.to_bits() == rep.x.to_bits() && p.y.to_bits() == rep.y.to_bits() {
                continue;
            }
            if !matches!(raycast(grid, p, rep), Ok(true)) {
                out.push(FrontierNode { pos: p, gain: gains[i] });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::CellState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = 1.5;
    const XI: f64 = 0.15;
    const BETA: f64 = 4.0;

    fn unknown_grid() -> OccupancyGrid {
        OccupancyGrid::new(100, 100, 0.1, Vec2::ZERO)
    }

    fn free_grid() -> OccupancyGrid {
        let mut g = unknown_grid();
        for iy in 0..100 {
            for ix in 0..100 {
                g.set(ix, iy, CellState::Free);
            }
        }
        g
    }

    #[test]
    fn gain_delegates_to_reachable_unknown_fraction() {
        let g = free_grid();
        assert_eq!(information_gain_frontier(Vec2::new(5.0, 5.0), &g, BETA), 0.0);
        let g = unknown_grid();
        assert_eq!(information_gain_frontier(Vec2::new(5.0, 5.0), &g, BETA), 1.0);
    }

    #[test]
    fn thinning_keeps_the_first_point_per_bucket() {
        let pts = vec![
            Vec2::new(0.10, 0.10),
            Vec2::new(0.35, 0.20), // same 0.5 m bucket as the first
            Vec2::new(0.60, 0.10), // next bucket over
            Vec2::new(0.10, 0.10), // exact duplicate
        ];
        let out = thin(&pts, 0.5);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0], Vec2::new(0.10, 0.10));
        assert_eq!(out[1], Vec2::new(0.60, 0.10));
    }

    #[test]
    fn thinning_handles_negative_coordinates_and_empty_input() {
        assert!(thin(&[], 0.5).is_empty());
        // Floor (not truncation) must separate the cells on either side of 0.
        let pts = vec![Vec2::new(-0.10, 0.0), Vec2::new(0.10, 0.0)];
        assert_eq!(thin(&pts, 0.5).len(), 2);
    }

    #[test]
    fn single_point_is_its_own_centroid() {
        let p = Vec2::new(3.123, 4.567);
        let (c, a) = mean_shift(&[p], EPS);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].x.to_bits(), p.x.to_bits());
        assert_eq!(c[0].y.to_bits(), p.y.to_bits());
        assert_eq!(a, vec![0]);
    }

    #[test]
    fn far_points_stay_separate() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(10.0 * EPS, 0.0);
        let (c, assign) = mean_shift(&[a, b], EPS);
        assert_eq!(c.len(), 2);
        assert!(c[0].dist(a) < 1e-9);
        assert!(c[1].dist(b) < 1e-9);
        assert_eq!(assign, vec![0, 1]);
    }

    #[test]
    fn coincident_cloud_collapses_to_one() {
        let pts: Vec<Vec2> = (0..6)
            .map(|i| Vec2::new(2.0 + 0.01 * i as f64, 3.0))
            .collect();
        let (c, assign) = mean_shift(&pts, EPS);
        assert_eq!(c.len(), 1);
        assert!(assign.iter().all(|&a| a == 0));
    }

    /// Independent oracle: iterate the flat-kernel update from every start
    /// with a much tighter tolerance and no mode merging, then group the
    /// converged positions by linkage. The production code must find the same
    /// cluster structure and nearby centroids.
    fn oracle_modes(points: &[Vec2], bw: f64) -> Vec<Vec2> {
        let mut converged: Vec<Vec2> = Vec::new();
        for &start in points {
            let mut x = start;
            for _ in 0..10_000 {
                let mut sum = Vec2::ZERO;
                let mut n = 0;
                for &p in points {
                    if p.dist(x) <= bw {
                        sum = sum + p;
                        n += 1;
                    }
                }
                let next = sum * (1.0 / n as f64);
                if next.dist(x) < 1e-9 {
                    x = next;
                    break;
                }
                x = next;
            }
            converged.push(x);
        }
        let mut groups: Vec<Vec2> = Vec::new();
        for x in converged {
            if !groups.iter().any(|g| g.dist(x) <= bw * 0.5) {
                groups.push(x);
            }
        }
        groups
    }

    #[test]
    fn two_blobs_match_the_iteration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let sigma = EPS / 4.0;
        let centers = [Vec2::new(2.0, 2.0), Vec2::new(2.0 + 5.0 * EPS, 2.0)];
        let mut pts = Vec::new();
        for c in centers {
            for _ in 0..20 {
                // Box-Muller-free: sum of uniforms is plenty Gaussian-ish
                // for a clustering smoke test.
                let dx: f64 = (0..12).map(|_| rng.gen_range(-0.5..0.5)).sum::<f64>() / 3.0;
                let dy: f64 = (0..12).map(|_| rng.gen_range(-0.5..0.5)).sum::<f64>() / 3.0;
                pts.push(Vec2::new(c.x + dx * sigma, c.y + dy * sigma));
            }
        }
        let (centroids, assign) = mean_shift(&pts, EPS);
        assert_eq!(centroids.len(), 2, "{centroids:?}");
        for (i, c) in centers.iter().enumerate() {
            let blob_mean = {
                let s = pts[20 * i..20 * (i + 1)]
                    .iter()
                    .fold(Vec2::ZERO, |a, b| a + *b);
                s * (1.0 / 20.0)
            };
            assert!(
                centroids.iter().any(|m| m.dist(blob_mean) <= EPS / 2.0),
                "no centroid near blob {i} at {c:?}"
            );
        }
        // Membership splits 20/20 between the two centroids.
        assert_eq!(assign[..20].iter().filter(|&&a| a == assign[0]).count(), 20);
        assert_eq!(assign[20..].iter().filter(|&&a| a == assign[20]).count(), 20);
        assert_ne!(assign[0], assign[20]);

        let oracle = oracle_modes(&pts, EPS);
        assert_eq!(oracle.len(), centroids.len());
        for m in &oracle {
            assert!(
                centroids.iter().any(|c| c.dist(*m) < 1e-3),
                "oracle mode {m:?} missing from {centroids:?}"
            );
        }
    }

    #[test]
    fn zero_gain_candidates_yield_nothing() {
        let g = free_grid();
        let cands = vec![Vec2::new(2.0, 2.0), Vec2::new(7.0, 7.0)];
        let out = filter_exploration_nodes(&cands, &[], &g, BETA, XI, EPS);
        assert!(out.is_empty());
    }

    #[test]
    fn tight_visible_cluster_becomes_one_frontier() {
        let g = unknown_grid();
        let cands: Vec<Vec2> = (0..5)
            .map(|i| Vec2::new(5.0 + 0.2 * i as f64, 5.0 + 0.1 * i as f64))
            .collect();
        let out = filter_exploration_nodes(&cands, &[], &g, BETA, XI, EPS);
        assert_eq!(out.len(), 1, "{out:?}");
        assert!(out[0].gain >= XI);
        // Representative sits among the candidates.
        assert!(out[0].pos.dist(Vec2::new(5.4, 5.2)) < 1.0);
    }

    #[test]
    fn member_behind_wall_corner_splits_out() {
        // Mostly unknown map with a short vertical wall between one member
        // and the cluster centroid.
        let mut g = unknown_grid();
        for iy in 40..60 {
            g.set(30, iy, CellState::Occupied);
        }
        let a = Vec2::new(2.05, 5.05);
        let b = Vec2::new(3.25, 5.05); // other side of the wall at x=3.0..3.1
        let out = filter_exploration_nodes(&[a, b], &[], &g, BETA, XI, EPS);
        assert_eq!(out.len(), 2, "{out:?}");
        // First the centroid (between the points, left of the wall is where
        // the mean lands), then the split-out member at b.
        assert!(out[0].pos.dist(Vec2::new(2.65, 5.05)) < 1e-6);
        assert!(out[1].pos.dist(b) < 1e-12);
    }

    #[test]
    fn stale_frontiers_in_mapped_space_disappear() {
        let mut g = unknown_grid();
        let prev = vec![
            FrontierNode { pos: Vec2::new(3.0, 3.0), gain: 1.0 },
            FrontierNode { pos: Vec2::new(7.0, 7.0), gain: 1.0 },
        ];
        // Map everything: both frontiers are now interior free space.
        for iy in 0..100 {
            for ix in 0..100 {
                g.set(ix, iy, CellState::Free);
            }
        }
        let out = filter_exploration_nodes(&[], &prev, &g, BETA, XI, EPS);
        assert!(out.is_empty(), "{out:?}");
    }

    #[test]
    fn interior_centroid_is_replaced_by_best_member() {
        // Two unknown pockets flanking a mapped free strip. Both pocket
        // points fall in one cluster whose centroid lies in the strip, where
        // the gain is zero — the higher-gain member must represent it.
        let mut g = unknown_grid();
        for iy in 0..100 {
            for ix in 24..32 {
                g.set(ix, iy, CellState::Free);
            }
        }
        let a = Vec2::new(2.05, 5.05); // unknown pocket, left
        let b = Vec2::new(3.55, 5.05); // unknown pocket, right (larger side)
        let beta = 1.0;
        let ga = information_gain_frontier(a, &g, beta);
        let gb = information_gain_frontier(b, &g, beta);
        assert!(ga >= XI && gb >= XI, "setup: {ga} {gb}");
        let mid = Vec2::new(2.8, 5.05);
        assert!(information_gain_frontier(mid, &g, beta) < XI, "setup: strip not interior");

        let out = filter_exploration_nodes(&[a, b], &[], &g, beta, XI, EPS);
        assert!(!out.is_empty());
        let rep = out[0];
        assert!(
            rep.pos.dist(a) < 1e-12 || rep.pos.dist(b) < 1e-12,
            "representative should be a member, got {rep:?}"
        );
        assert!(rep.gain >= XI);
        for f in &out {
            assert!(f.gain >= XI, "emitted below-threshold frontier {f:?}");
        }
    }

    #[test]
    fn rerunning_on_own_output_is_a_fixed_point() {
        // Three well-separated candidate blobs in unexplored space.
        let g = unknown_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let centers = [Vec2::new(2.0, 2.0), Vec2::new(7.0, 2.0), Vec2::new(2.0, 7.0)];
        let mut cands = Vec::new();
        for c in centers {
            for _ in 0..8 {
                cands.push(Vec2::new(
                    c.x + rng.gen_range(-0.3..0.3),
                    c.y + rng.gen_range(-0.3..0.3),
                ));
            }
        }
        let first = filter_exploration_nodes(&cands, &[], &g, BETA, XI, EPS);
        assert_eq!(first.len(), 3, "{first:?}");
        let second = filter_exploration_nodes(&[], &first, &g, BETA, XI, EPS);
        assert_eq!(second.len(), first.len());
        for (s, f) in second.iter().zip(&first) {
            assert_eq!(s.pos.x.to_bits(), f.pos.x.to_bits());
            assert_eq!(s.pos.y.to_bits(), f.pos.y.to_bits());
            assert_eq!(s.gain.to_bits(), f.gain.to_bits());
        }
    }

    #[test]
    fn duplicate_submissions_emit_once() {
        let g = unknown_grid();
        let p = Vec2::new(4.0, 4.0);
        let prev = vec![FrontierNode { pos: p, gain: 1.0 }];
        let out = filter_exploration_nodes(&[p], &prev, &g, BETA, XI, EPS);
        assert_eq!(out.len(), 1);
    }
}
