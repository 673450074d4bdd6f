//! Competitor policies run against the hierarchical allocator in the
//! experiments: a greedy next-best-view allocator that treats every task with
//! equal priority, and a frontier-only planner that keeps one global tree
//! rooted at the mission origin instead of many pose-anchored ones.

use rand::Rng;

use crate::allocator::{travel_distance, Assignment, AssignmentRound, RewardBreakdown, Task};
use crate::frontier::{filter_exploration_nodes, thin, FrontierNode};
use crate::geom::{Pose2, Vec2};
use crate::pgart::TaskGraph;
use crate::world::{Geofence, OccupancyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    High,
    NbvpGreedy,
    RrtExploration,
}

impl serde::Serialize for PolicyKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl PolicyKind {
    pub fn parse(s: &str) -> Option<PolicyKind> {
        match s {
            "high" => Some(PolicyKind::High),
            "nbvp" => Some(PolicyKind::NbvpGreedy),
            "rrt" => Some(PolicyKind::RrtExploration),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::High => "high",
            PolicyKind::NbvpGreedy => "nbvp",
            PolicyKind::RrtExploration => "rrt",
        }
    }
}

/// Exponential travel discount per meter applied to task gain.
pub const NBVP_DISCOUNT: f64 = 0.5;

/// Greedy allocation by discounted gain: repeatedly hand the free robot/task
/// pair with the highest gain·exp(−0.5·D) its match — no task-kind weighting,
/// no crowding utility, no re-matching. Ties break to the lower task id, then
/// the lower robot id. Unreachable pairs are never formed.
pub fn nbvp_allocate(robots: &[Vec2], tasks: &[Task], grid: &OccupancyGrid) -> AssignmentRound {
    let dist: Vec<Vec<Option<f64>>> = robots
        .iter()
        .map(|&r| tasks.iter().map(|t| travel_distance(grid, r, t.pos)).collect())
        .collect();

    let mut robot_free = vec![true; robots.len()];
    let mut task_free = vec![true; tasks.len()];
    let mut assignments: Vec<Assignment> = Vec::new();
    loop {
        let mut best: Option<(f64, usize, usize, f64)> = None;
        for (ri, rf) in robot_free.iter().enumerate() {
            if !rf {
                continue;
            }
            for (ti, tf) in task_free.iter().enumerate() {
                if !tf {
                    continue;
                }
                let Some(d) = dist[ri][ti] else { continue };
                let score = tasks[ti].gain * (-NBVP_DISCOUNT * d).exp();
                let better = match best {
                    None => true,
                    Some((bs, bt, br, _)) => {
                        (score, std::cmp::Reverse(tasks[ti].id), std::cmp::Reverse(ri))
                            > (bs, std::cmp::Reverse(tasks[bt].id), std::cmp::Reverse(br))
                    }
                };
                if better {
                    best = Some((score, ti, ri, d));
                }
            }
        }
        let Some((score, ti, ri, d)) = best else { break };
        robot_free[ri] = false;
        task_free[ti] = false;
        assignments.push(Assignment {
            robot: ri,
            task: tasks[ti],
            breakdown: RewardBreakdown {
                info: tasks[ti].gain,
                weight: 1.0,
                utility: 1.0,
                distance: d,
                value: score,
            },
        });
    }
    assignments.sort_by_key(|a| a.robot);
    let idle = robot_free
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.then_some(i))
        .collect();
    AssignmentRound { tick: 0, assignments, idle }
}

/// Frontier-only exploration around a single tree that grows from the
/// mission origin and is never re-anchored, so every map correction erodes it
/// wholesale — the pruning counter quantifies that cost.
pub struct GlobalRrtPlanner {
    graph: TaskGraph,
    eta: f64,
    /// Node positions added since the last round, candidate frontiers.
    pending: Vec<Vec2>,
    frontiers: Vec<FrontierNode>,
}

impl GlobalRrtPlanner {
    pub fn new(origin: Pose2, eta: f64) -> GlobalRrtPlanner {
        let mut graph = TaskGraph::new(eta);
        graph
            .add_task_vertex(0, origin)
            .expect("mission origin must be a finite pose");
        GlobalRrtPlanner { graph, eta, pending: Vec::new(), frontiers: Vec::new() }
    }

    pub fn graph(&self) -> &TaskGraph {
        &self.graph
    }

    pub fn frontiers(&self) -> &[FrontierNode] {
        &self.frontiers
    }

    /// Run `budget` expansion attempts; every accepted node becomes a
    /// frontier candidate for the next round. Returns how many were added.
    pub fn expand<R: Rng>(
        &mut self,
        grid: &OccupancyGrid,
        fence: &Geofence,
        budget: usize,
        rng: &mut R,
    ) -> usize {
        let mut added = 0;
        for _ in 0..budget {
            if let Some(n) = self.graph.expand(grid, fence, rng) {
                self.pending.push(n.world);
                added += 1;
            }
        }
        added
    }

    /// Drop every edge the updated map no longer supports.
    pub fn prune(&mut self, grid: &OccupancyGrid) -> u64 {
        self.graph.prune(grid)
    }

    /// Lifetime fraction of grown nodes lost to pruning.
    pub fn pruned_fraction(&self) -> f64 {
        let created = self.graph.nodes_created();
        if created == 0 {
            0.0
        } else {
            self.graph.nodes_pruned() as f64 / created as f64
        }
    }

    /// One planning round: thin the accumulated candidates, run the shared
    /// frontier filter against the previous frontier set, and publish the
    /// survivors as exploration tasks (never coverage).
    pub fn round(&mut self, grid: &OccupancyGrid, beta: f64, xi: f64, bandwidth: f64) -> Vec<Task> {
        let candidates = thin(&self.pending, 0.5 * self.eta);
        self.pending.clear();
        self.frontiers = filter_exploration_nodes(&candidates, &self.frontiers, grid, beta, xi, bandwidth);
        self.frontiers
            .iter()
            .enumerate()
            .map(|(id, f)| Task {
                id,
                kind: crate::allocator::TaskKind::Exploration,
                pos: f.pos,
                gain: f.gain,
            })
            .collect()
    }
}
