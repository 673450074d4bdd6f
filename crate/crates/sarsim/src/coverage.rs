//! Selects camera coverage viewpoints from the task trees.
//!
//! Each node's worth is the area of the largest obstacle-free disk around it
//! (clamped to sensor range), measured by casting a fan of rays. Selection
//! runs in two levels: per tree keep the few best nodes, then across trees
//! drop dominated nodes whose disk overlaps a stronger one's, and cap the
//! result at `k`.
//!
//! Scoring is cached per tree: a tree is re-evaluated from scratch only when
//! its revision changes (re-posed or pruned); otherwise only nodes added
//! since the last pass are scored. A node scored under an older map keeps its
//! value until the tree's revision bumps — an accepted staleness that growth
//! near freshly mapped space quickly papers over. The per-tree top-N cut is
//! applied at selection time, after the caller's retirement predicate, so a
//! tree whose best spots are retired falls back to its next-best ones.

use std::f64::consts::PI;

use crate::geom::Vec2;
use crate::pgart::TaskGraph;
use crate::world::{cast_rays, CellState, OccupancyGrid};
use crate::Result;

/// A candidate viewpoint: the node, its clearance radius and disk area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageNode {
    pub tree: usize,
    pub node: u32,
    pub pos: Vec2,
    /// Largest obstacle-free disk radius around the node, ≤ sensor range.
    pub r_c: f64,
    /// Disk area π·r_c².
    pub v_r: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CoverageParams {
    /// Camera range; clearance radii clamp to this.
    pub xi_range: f64,
    /// Candidates with a smaller visibility disk than this are discarded.
    pub v_r_min: f64,
    /// How many nodes each tree may put forward.
    pub per_tree: usize,
    /// Final cap on selected viewpoints.
    pub k: usize,
    /// Rays cast per clearance measurement.
    pub ray_count: usize,
}

impl Default for CoverageParams {
    fn default() -> CoverageParams {
        CoverageParams {
            xi_range: 1.5,
            v_r_min: PI * 0.25,
            per_tree: 3,
            k: 20,
            ray_count: 36,
        }
    }
}

/// Clearance of a viewpoint: cast `ray_count` evenly spaced rays out to
/// `xi_range`; the shortest measured length (walls and the map edge both
/// stop rays, unknown space does not) clamped to `xi_range` is the disk
/// radius r_c. Returns (V_r, r_c) with V_r = π·r_c². The point must sit on a
/// known-free cell.
pub fn visibility_radius(
    n: Vec2,
    grid: &OccupancyGrid,
    xi_range: f64,
    ray_count: usize,
) -> Result<(f64, f64)> {
    let rays = cast_rays(grid, n, xi_range, ray_count)?;
    let mut r_c = xi_range;
    for ray in &rays {
        r_c = r_c.min(ray.length);
    }
    Ok((PI * r_c * r_c, r_c))
}

struct TreeCache {
    revision: u64,
    /// First node id not yet scored.
    next_node: u32,
    /// Every scored free node of this tree, in node-id order.
    scored: Vec<CoverageNode>,
}

/// Two-level viewpoint selection with per-tree caching.
pub struct CoverageFilter {
    pub params: CoverageParams,
    cache: Vec<TreeCache>,
}

impl CoverageFilter {
    pub fn new(params: CoverageParams) -> CoverageFilter {
        CoverageFilter { params, cache: Vec::new() }
    }

    /// Score any new or invalidated nodes, then run the cross-tree dominance
    /// filter and return at most `k` viewpoints in descending disk area.
    pub fn select(&mut self, graph: &TaskGraph, grid: &OccupancyGrid) -> Vec<CoverageNode> {
        self.select_where(graph, grid, |_| true)
    }

    /// Like [`CoverageFilter::select`], but viewpoints failing `keep` are
    /// dropped before the per-tree cut and the dominance stage: a retired
    /// node neither occupies a tree's candidate slot nor suppresses weaker
    /// (still wanted) neighbors. Used to retire viewpoints whose ground the
    /// camera has already swept.
    pub fn select_where(
        &mut self,
        graph: &TaskGraph,
        grid: &OccupancyGrid,
        keep: impl Fn(&CoverageNode) -> bool,
    ) -> Vec<CoverageNode> {
        while self.cache.len() < graph.trees().len() {
            self.cache.push(TreeCache { revision: 0, next_node: 0, scored: Vec::new() });
        }
        let mut cands: Vec<CoverageNode> = Vec::new();
        for (ti, tree) in graph.trees().iter().enumerate() {
            let c = &mut self.cache[ti];
            if c.revision != tree.revision() {
                c.revision = tree.revision();
                c.next_node = 0;
                c.scored.clear();
            }
            let start = tree
                .nodes()
                .partition_point(|n| n.id < c.next_node);
            for n in &tree.nodes()[start..] {
                c.next_node = n.id + 1;
                if !grid.contains(n.world) || grid.state_at(n.world) != CellState::Free {
                    continue;
                }
                let (v_r, r_c) = visibility_radius(
                    n.world,
                    grid,
                    self.params.xi_range,
                    self.params.ray_count,
                )
                .expect("free cell was checked");
                c.scored.push(CoverageNode { tree: ti, node: n.id, pos: n.world, r_c, v_r });
            }
            let mut proposal: Vec<CoverageNode> =
                c.scored.iter().copied().filter(&keep).collect();
            proposal.sort_by(|a, b| {
                b.v_r.partial_cmp(&a.v_r).unwrap().then(a.node.cmp(&b.node))
            });
            proposal.truncate(self.params.per_tree);
            cands.extend(proposal);
        }

        cands.retain(|c| c.v_r >= self.params.v_r_min);
        cands.sort_by(|a, b| {
            b.v_r
                .partial_cmp(&a.v_r)
                .unwrap()
                .then(a.tree.cmp(&b.tree))
                .then(a.node.cmp(&b.node))
        });

        // Strongest first; a survivor suppresses every weaker candidate whose
        // center lies within its doubled radius (overlapping disks).
        let mut kept: Vec<CoverageNode> = Vec::new();
        for c in cands {
            if kept.len() == self.params.k {
                break;
            }
            if !kept.iter().any(|s| s.pos.dist(c.pos) <= 2.0 * s.r_c) {
                kept.push(c);
            }
        }
        kept
    }
}

/// One-shot selection without cache reuse.
pub fn sotfc(graph: &TaskGraph, grid: &OccupancyGrid, params: CoverageParams) -> Vec<CoverageNode> {
    CoverageFilter::new(params).select(graph, grid)
}
