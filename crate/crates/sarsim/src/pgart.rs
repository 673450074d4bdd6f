//! Planner that grows many small random trees, one rooted on each SLAM
//! pose-graph vertex.
//!
//! Trees store their nodes in the root vertex's local frame. When a loop
//! closure moves a vertex, the whole tree is rigidly re-posed by swapping the
//! root transform and recomputing world positions — no regrowth. Branches
//! that end up crossing newly mapped walls are pruned instead.
//!
//! A node's world position is *always* computed as `transform * local`, never
//! cached from the sampling step, so re-posing with an identity correction is
//! bit-exact and applying a correction then its inverse restores positions
//! exactly.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::geom::{Pose2, Vec2};
use crate::slam::PoseCorrection;
use crate::world::{raycast, CellState, Geofence, OccupancyGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Plain,
    /// Grew into a cell that was unknown at creation time.
    Frontier,
    /// Currently selected as a coverage viewpoint.
    Coverage,
}

impl NodeClass {
    pub fn label(self) -> &'static str {
        match self {
            NodeClass::Plain => "PLAIN",
            NodeClass::Frontier => "FRONTIER",
            NodeClass::Coverage => "COVERAGE",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreeNode {
    pub id: u32,
    /// Parent node id; `None` only for the root. Parents always have smaller
    /// ids than their children, which lets pruning run in one ascending pass.
    pub parent: Option<u32>,
    /// Position in the root vertex's local frame. Never changes.
    pub local: Vec2,
    /// Position in the world frame; equals `transform * local` at all times.
    pub world: Vec2,
    pub class: NodeClass,
}

/// One tree of the task graph, rooted on a pose-graph vertex.
pub struct TaskTree {
    pub root_vertex: usize,
    transform: Pose2,
    /// Nodes in ascending id order (ids are never reused after pruning).
    nodes: Vec<TreeNode>,
    next_id: u32,
    /// Bumped when the tree is re-posed or pruned; consumers cache per-tree
    /// results keyed on this.
    revision: u64,
}

impl TaskTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn transform(&self) -> Pose2 {
        self.transform
    }

    pub fn root_world(&self) -> Vec2 {
        self.nodes[0].world
    }

    pub fn node(&self, id: u32) -> Option<&TreeNode> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().map(|i| &self.nodes[i])
    }

    fn node_mut(&mut self, id: u32) -> Option<&mut TreeNode> {
        match self.nodes.binary_search_by_key(&id, |n| n.id) {
            Ok(i) => Some(&mut self.nodes[i]),
            Err(_) => None,
        }
    }
}

/// A node accepted by one expansion attempt.
#[derive(Debug, Clone, Copy)]
pub struct NewNode {
    pub tree: usize,
    pub node: u32,
    pub world: Vec2,
    pub class: NodeClass,
}

struct IndexEntry {
    tree: u32,
    node: u32,
    pos: Vec2,
}

/// Uniform hash grid over all node world positions, for nearest-node queries
/// across every tree. Rebuilt lazily after re-posing or pruning.
struct SpatialIndex {
    cell: f64,
    map: HashMap<(i64, i64), Vec<IndexEntry>>,
    count: usize,
    min_key: (i64, i64),
    max_key: (i64, i64),
    dirty: bool,
}

impl SpatialIndex {
    fn new(cell: f64) -> SpatialIndex {
        SpatialIndex {
            cell,
            map: HashMap::new(),
            count: 0,
            min_key: (0, 0),
            max_key: (0, 0),
            dirty: false,
        }
    }

    fn key(&self, p: Vec2) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    fn insert(&mut self, tree: u32, node: u32, pos: Vec2) {
        let k = self.key(pos);
        if self.count == 0 {
            self.min_key = k;
            self.max_key = k;
        } else {
            self.min_key = (self.min_key.0.min(k.0), self.min_key.1.min(k.1));
            self.max_key = (self.max_key.0.max(k.0), self.max_key.1.max(k.1));
        }
        self.count += 1;
        self.map.entry(k).or_default().push(IndexEntry { tree, node, pos });
    }

    fn rebuild(&mut self, trees: &[TaskTree]) {
        self.map.clear();
        self.count = 0;
        for (ti, tree) in trees.iter().enumerate() {
            for n in &tree.nodes {
                self.insert(ti as u32, n.id, n.world);
            }
        }
        self.dirty = false;
    }

    /// Nearest entry to `p`; ties resolve to the lowest (tree, node) pair so
    /// results do not depend on hash iteration or ring scan order.
    fn nearest(&self, p: Vec2) -> Option<(u32, u32, Vec2)> {
        if self.count == 0 {
            return None;
        }
        let (qx, qy) = self.key(p);
        let max_ring = (qx - self.min_key.0)
            .abs()
            .max((self.max_key.0 - qx).abs())
            .max((qy - self.min_key.1).abs())
            .max((self.max_key.1 - qy).abs())
            + 1;
        let mut best: Option<(f64, u32, u32, Vec2)> = None;
        for k in 0..=max_ring {
            if let Some((bd2, ..)) = best {
                // Entries in ring k sit strictly farther than (k-1) cells.
                if bd2.sqrt() <= (k - 1).max(0) as f64 * self.cell {
                    break;
                }
            }
            let consider = |cx: i64, cy: i64, best: &mut Option<(f64, u32, u32, Vec2)>| {
                if let Some(entries) = self.map.get(&(cx, cy)) {
                    for e in entries {
                        let cand = (e.pos.dist2(p), e.tree, e.node, e.pos);
                        let better = match best {
                            None => true,
                            Some((bd, bt, bn, _)) => {
                                (cand.0, cand.1, cand.2) < (*bd, *bt, *bn)
                            }
                        };
                        if better {
                            *best = Some(cand);
                        }
                    }
                }
            };
            if k == 0 {
                consider(qx, qy, &mut best);
            } else {
                for cx in qx - k..=qx + k {
                    consider(cx, qy - k, &mut best);
                    consider(cx, qy + k, &mut best);
                }
                for cy in qy - k + 1..=qy + k - 1 {
                    consider(qx - k, cy, &mut best);
                    consider(qx + k, cy, &mut best);
                }
            }
        }
        best.map(|(_, t, n, pos)| (t, n, pos))
    }
}

/// The full set of task trees plus the global node index.
pub struct TaskGraph {
    pub eta: f64,
    trees: Vec<TaskTree>,
    by_root: HashMap<usize, usize>,
    index: SpatialIndex,
    nodes_created: u64,
    nodes_pruned: u64,
}

impl TaskGraph {
    pub fn new(eta: f64) -> TaskGraph {
        TaskGraph {
            eta,
            trees: Vec::new(),
            by_root: HashMap::new(),
            index: SpatialIndex::new(eta),
            nodes_created: 0,
            nodes_pruned: 0,
        }
    }

    pub fn trees(&self) -> &[TaskTree] {
        &self.trees
    }

    pub fn tree(&self, idx: usize) -> Option<&TaskTree> {
        self.trees.get(idx)
    }

    pub fn node_count(&self) -> usize {
        self.trees.iter().map(|t| t.nodes.len()).sum()
    }

    /// Expansion-created nodes over the graph's lifetime (roots excluded).
    pub fn nodes_created(&self) -> u64 {
        self.nodes_created
    }

    pub fn nodes_pruned(&self) -> u64 {
        self.nodes_pruned
    }

    /// Root a new tree on a pose-graph vertex at its current estimated pose.
    pub fn add_task_vertex(&mut self, root_vertex: usize, pose: Pose2) -> Result<usize> {
        if self.by_root.contains_key(&root_vertex) {
            return Err(Error::DuplicateRoot(root_vertex));
        }
        if !pose.is_finite() {
            return Err(Error::NonFinitePose);
        }
        let idx = self.trees.len();
        let root = TreeNode {
            id: 0,
            parent: None,
            local: Vec2::ZERO,
            world: pose.transform(Vec2::ZERO),
            class: NodeClass::Plain,
        };
        let world = root.world;
        self.trees.push(TaskTree {
            root_vertex,
            transform: pose,
            nodes: vec![root],
            next_id: 1,
            revision: 0,
        });
        self.by_root.insert(root_vertex, idx);
        if !self.index.dirty {
            self.index.insert(idx as u32, 0, world);
        }
        Ok(idx)
    }

    /// One expansion attempt: draw up to 32 points uniformly inside the
    /// geofence, keep the first that lands on a known-free cell, and try to
    /// grow toward it. Returns the accepted node, if any.
    pub fn expand<R: Rng>(
        &mut self,
        grid: &OccupancyGrid,
        fence: &Geofence,
        rng: &mut R,
    ) -> Option<NewNode> {
        for _ in 0..32 {
            let p = Vec2::new(
                rng.gen_range(fence.min.x..fence.max.x),
                rng.gen_range(fence.min.y..fence.max.y),
            );
            if grid.contains(p) && grid.state_at(p) == CellState::Free {
                return self.expand_toward(grid, p);
            }
        }
        None
    }

    /// Grow toward a specific target: find the tree whose root is closest to
    /// the target, extend its nearest node by at most `eta`; if that edge is
    /// blocked, fall back to the globally nearest node across all trees and
    /// grow that node's own tree instead.
    pub fn expand_toward(&mut self, grid: &OccupancyGrid, n_rand: Vec2) -> Option<NewNode> {
        if self.trees.is_empty() {
            return None;
        }
        if self.index.dirty {
            self.index.rebuild(&self.trees);
        }

        let mut vi = 0usize;
        let mut best = f64::INFINITY;
        for (i, tree) in self.trees.iter().enumerate() {
            let d = tree.root_world().dist2(n_rand);
            if d < best {
                best = d;
                vi = i;
            }
        }
        let ni = if self.trees.len() == 1 {
            self.index.nearest(n_rand).map(|(_, n, _)| n)?
        } else {
            nearest_in_tree(&self.trees[vi], n_rand)
        };

        if let Some(nn) = self.try_extend(grid, vi, ni, n_rand) {
            return Some(nn);
        }
        let (tk, nk, _) = self.index.nearest(n_rand)?;
        if (tk as usize, nk) == (vi, ni) {
            return None;
        }
        self.try_extend(grid, tk as usize, nk, n_rand)
    }

    fn try_extend(
        &mut self,
        grid: &OccupancyGrid,
        tree_idx: usize,
        from_id: u32,
        target: Vec2,
    ) -> Option<NewNode> {
        let tree = &self.trees[tree_idx];
        let from = tree.node(from_id)?;
        let from_world = from.world;
        let d = from_world.dist(target);
        if d < 1e-9 {
            return None;
        }
        let reach = if d <= self.eta {
            target
        } else {
            from_world + (target - from_world) * (self.eta / d)
        };
        // Round-trip through the local frame so the stored world position is
        // exactly transform * local, like every other node.
        let local = tree.transform.inverse().transform(reach);
        let world = tree.transform.transform(local);
        if !grid.contains(world) {
            return None;
        }
        if !matches!(raycast(grid, from_world, world), Ok(true)) {
            return None;
        }
        let class = if grid.state_at(world) == CellState::Unknown {
            NodeClass::Frontier
        } else {
            NodeClass::Plain
        };
        let tree = &mut self.trees[tree_idx];
        let id = tree.next_id;
        tree.next_id += 1;
        tree.nodes.push(TreeNode { id, parent: Some(from_id), local, world, class });
        self.nodes_created += 1;
        if !self.index.dirty {
            self.index.insert(tree_idx as u32, id, world);
        }
        Some(NewNode { tree: tree_idx, node: id, world, class })
    }

    /// Re-pose the tree rooted on `root_vertex`: replace its transform and
    /// recompute every node's world position from its unchanged local
    /// coordinates.
    pub fn update_task_vertex(&mut self, root_vertex: usize, new_pose: Pose2) -> Result<()> {
        if !new_pose.is_finite() {
            return Err(Error::NonFinitePose);
        }
        let idx = *self.by_root.get(&root_vertex).ok_or(Error::UnknownVertex(root_vertex))?;
        let tree = &mut self.trees[idx];
        tree.transform = new_pose;
        for n in &mut tree.nodes {
            n.world = new_pose.transform(n.local);
        }
        tree.revision += 1;
        self.index.dirty = true;
        Ok(())
    }

    /// Apply a batch of pose-graph corrections; vertices without a rooted
    /// tree are ignored.
    pub fn apply_corrections(&mut self, corrections: &[PoseCorrection]) -> Result<()> {
        for c in corrections {
            if self.by_root.contains_key(&c.vertex) {
                self.update_task_vertex(c.vertex, c.new_pose)?;
            }
        }
        Ok(())
    }

    /// Remove every edge whose world-frame segment crosses an occupied cell,
    /// along with the entire subtree hanging off it. Returns how many nodes
    /// were removed. Edges leaving the grid count as blocked.
    pub fn prune(&mut self, grid: &OccupancyGrid) -> u64 {
        let mut total = 0u64;
        for tree in &mut self.trees {
            let mut removed: Vec<u32> = Vec::new();
            let nodes = std::mem::take(&mut tree.nodes);
            let mut kept = Vec::with_capacity(nodes.len());
            for n in &nodes {
                let dead = match n.parent {
                    None => false,
                    Some(p) => {
                        removed.binary_search(&p).is_ok() || {
                            // Parents precede children, so the original slice
                            // still holds the parent's data.
                            let pi = nodes.binary_search_by_key(&p, |x| x.id).unwrap();
                            !matches!(raycast(grid, nodes[pi].world, n.world), Ok(true))
                        }
                    }
                };
                if dead {
                    removed.push(n.id);
                } else {
                    kept.push(*n);
                }
            }
            if !removed.is_empty() {
                total += removed.len() as u64;
                tree.nodes = kept;
                tree.revision += 1;
            } else {
                tree.nodes = nodes;
            }
        }
        if total > 0 {
            self.nodes_pruned += total;
            self.index.dirty = true;
        }
        total
    }

    /// Flip coverage markings: clear all `Coverage` classes, then mark the
    /// given (tree, node) picks. Purely cosmetic for dumps and debugging;
    /// does not touch revisions.
    pub fn mark_coverage(&mut self, picks: &[(usize, u32)]) {
        for tree in &mut self.trees {
            for n in &mut tree.nodes {
                if n.class == NodeClass::Coverage {
                    n.class = NodeClass::Plain;
                }
            }
        }
        for &(ti, id) in picks {
            if let Some(tree) = self.trees.get_mut(ti) {
                if let Some(n) = tree.node_mut(id) {
                    n.class = NodeClass::Coverage;
                }
            }
        }
    }

    /// Globally nearest node to a point (ties: lowest tree, then node id).
    pub fn nearest_node(&mut self, p: Vec2) -> Option<(usize, u32, Vec2)> {
        if self.index.dirty {
            self.index.rebuild(&self.trees);
        }
        self.index.nearest(p).map(|(t, n, pos)| (t as usize, n, pos))
    }

    /// Line-delimited debug dump: `tree_id node_id x y parent_id class`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (ti, tree) in self.trees.iter().enumerate() {
            for n in &tree.nodes {
                let parent = n.parent.map(|p| p as i64).unwrap_or(-1);
                writeln!(
                    out,
                    "{ti} {} {:.6} {:.6} {parent} {}",
                    n.id,
                    n.world.x,
                    n.world.y,
                    n.class.label()
                )
                .unwrap();
            }
        }
        out
    }
}

fn nearest_in_tree(tree: &TaskTree, p: Vec2) -> u32 {
    let mut best = (f64::INFINITY, 0u32);
    for n in &tree.nodes {
        let d = n.world.dist2(p);
        if d < best.0 {
            best = (d, n.id);
        }
    }
    best.1
}
