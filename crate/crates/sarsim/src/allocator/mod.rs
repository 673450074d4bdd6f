//! Task scoring and robot assignment.
//!
//! Each allocation round scores candidate tasks with a hierarchical reward —
//! information gain times a mission-phase weight times (utility bonus minus
//! travel cost) — lets every robot claim its best sampled task round-robin,
//! then optimally re-matches the claimed set to the robots by A* distance so
//! no two robots cross paths for each other's picks.

pub mod jv;

use rand::Rng;

use crate::geom::Vec2;
use crate::slam::PoseGraph;
use crate::world::{astar_distance, nav_goal, raycast, OccupancyGrid};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Exploration,
    Coverage,
}

impl TaskKind {
    pub fn label(self) -> &'static str {
        match self {
            TaskKind::Exploration => "EXPLORATION",
            TaskKind::Coverage => "COVERAGE",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Task {
    pub id: usize,
    pub kind: TaskKind,
    pub pos: Vec2,
    /// Information gain in [0, 1]: reachable-unknown fraction for
    /// exploration tasks, pose-graph remoteness for coverage tasks.
    pub gain: f64,
}

/// The reward factors for one (robot, task) evaluation, kept for logging.
#[derive(Debug, Clone, Copy)]
pub struct RewardBreakdown {
    pub info: f64,
    pub weight: f64,
    pub utility: f64,
    /// A* travel distance in meters; infinite when unreachable.
    pub distance: f64,
    /// info · weight · (λ·utility − distance); exactly 0 when info is 0,
    /// −∞ when the task is unreachable.
    pub value: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Assignment {
    pub robot: usize,
    pub task: Task,
    pub breakdown: RewardBreakdown,
}

#[derive(Debug, Clone)]
pub struct AssignmentRound {
    pub tick: u64,
    pub assignments: Vec<Assignment>,
    pub idle: Vec<usize>,
}

/// Crowding penalty. A task keeps full utility 1 while no currently assigned
/// task has line of sight to it; otherwise utility drops to
/// min(1, distance to the nearest visible assigned task) / β.
pub fn utility(n: Vec2, assigned: &[Vec2], grid: &OccupancyGrid, beta: f64) -> f64 {
    assert!(beta > 0.0, "laser range must be positive");
    let mut nearest_visible: Option<f64> = None;
    for &a in assigned {
        if matches!(raycast(grid, n, a), Ok(true)) {
            let d = n.dist(a);
            nearest_visible = Some(nearest_visible.map_or(d, |b: f64| b.min(d)));
        }
    }
    match nearest_visible {
        None => 1.0,
        Some(d) => d.min(1.0) / beta,
    }
}

/// Coverage information gain: how far the task sits from the nearest pose
/// graph vertex, normalized by camera range and clamped to 1. Far from the
/// graph means likely not yet seen by any camera.
pub fn info_gain_coverage(n: Vec2, slam: &PoseGraph, gamma: f64) -> Result<f64> {
    assert!(gamma > 0.0, "camera range must be positive");
    let v = slam.nearest_vertex(n)?;
    Ok((n.dist(v.pose().position()) / gamma).min(1.0))
}

/// Mission-phase weights (exploration, coverage): coverage weight is the
/// mapped fraction of the geofence clamped to 1, exploration its complement.
pub fn kind_weights(mapped_area: f64, fence_area: f64) -> (f64, f64) {
    assert!(fence_area > 0.0, "geofence area must be positive");
    assert!(mapped_area >= 0.0);
    let w_c = (mapped_area / fence_area).min(1.0);
    (1.0 - w_c, w_c)
}

/// A* distance between the navigable points nearest `from` and `to`. Both
/// ends snap: tasks may sit on unknown cells right at the map edge, and a
/// robot may momentarily stand on a cell a map correction un-mapped. The snap
/// is shared by all tasks evaluated for one robot, so rankings are unaffected.
/// `None` when unreachable.
pub fn travel_distance(grid: &OccupancyGrid, from: Vec2, to: Vec2) -> Option<f64> {
    let start = nav_goal(grid, from)?;
    let goal = nav_goal(grid, to)?;
    astar_distance(grid, start, goal).ok().flatten()
}

pub struct RewardContext<'a> {
    pub grid: &'a OccupancyGrid,
    pub slam: &'a PoseGraph,
    /// (exploration weight, coverage weight) from `kind_weights`.
    pub weights: (f64, f64),
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Score one task for one robot. Unreachable tasks score −∞; zero-information
/// tasks score exactly 0 no matter their other factors.
pub fn reward(task: &Task, robot: Vec2, assigned: &[Vec2], ctx: &RewardContext) -> RewardBreakdown {
    let (w_f, w_c) = ctx.weights;
    let (info, weight) = match task.kind {
        TaskKind::Exploration => (task.gain, w_f),
        TaskKind::Coverage => {
            // An empty pose graph means nothing was covered yet.
            (info_gain_coverage(task.pos, ctx.slam, ctx.gamma).unwrap_or(1.0), w_c)
        }
    };
    let utility = self::utility(task.pos, assigned, ctx.grid, ctx.beta);
    match travel_distance(ctx.grid, robot, task.pos) {
        None => RewardBreakdown {
            info,
            weight,
            utility,
            distance: f64::INFINITY,
            value: f64::NEG_INFINITY,
        },
        Some(distance) => {
            let value =
                if info == 0.0 { 0.0 } else { info * weight * (ctx.lambda * utility - distance) };
            RewardBreakdown { info, weight, utility, distance, value }
        }
    }
}

/// Weighted sampling without replacement; weights are task gains with a tiny
/// floor so zero-gain tasks stay drawable. Returns everything when the pool
/// is no larger than the requested size.
pub fn sample_tasks<R: Rng>(tasks: &[Task], size: usize, rng: &mut R) -> Vec<Task> {
    assert!(size >= 1, "sample size must be at least 1");
    if tasks.len() <= size {
        return tasks.to_vec();
    }
    let mut pool = tasks.to_vec();
    let mut out = Vec::with_capacity(size);
    for _ in 0..size {
        let total: f64 = pool.iter().map(|t| t.gain + 1e-6).sum();
        let mut ticket = rng.gen_range(0.0..total);
        let mut idx = pool.len() - 1;
        for (i, t) in pool.iter().enumerate() {
            let w = t.gain + 1e-6;
            if ticket < w {
                idx = i;
                break;
            }
            ticket -= w;
        }
        out.push(pool.remove(idx));
    }
    out
}

/// Pick the best-scored candidate: any positive-information task beats every
/// zero-information one, then higher value, then lower task id. Candidates
/// scored −∞ (unreachable) are never picked.
fn best_proposal(scored: &[(Task, RewardBreakdown)]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (t, b)) in scored.iter().enumerate() {
        if b.value == f64::NEG_INFINITY {
            continue;
        }
        let better = match best {
            None => true,
            Some(j) => {
                let (tj, bj) = &scored[j];
                (b.info > 0.0, b.value, std::cmp::Reverse(t.id))
                    > (bj.info > 0.0, bj.value, std::cmp::Reverse(tj.id))
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
pub struct AllocParams {
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sample_size: usize,
    pub fence_area: f64,
}

/// One allocation round. Robots in id order each claim the best task from
/// their own weighted sample of the remaining pool (claimed task positions
/// feed the crowding penalty for later robots), then the claimed set is
/// re-matched to the robots by minimum total A* distance. Robots left over
/// are idle; every returned assignment is reachable.
pub fn allocate<R: Rng>(
    tick: u64,
    robots: &[Vec2],
    tasks: &[Task],
    active: &[Vec2],
    grid: &OccupancyGrid,
    slam: &PoseGraph,
    params: &AllocParams,
    rng: &mut R,
) -> AssignmentRound {
    assert!(!robots.is_empty(), "need at least one robot");
    let weights = kind_weights(grid.mapped_area(), params.fence_area);
    let ctx = RewardContext {
        grid,
        slam,
        weights,
        lambda: params.lambda,
        beta: params.beta,
        gamma: params.gamma,
    };

    let mut remaining: Vec<Task> = tasks.to_vec();
    let mut claimed: Vec<Vec2> = active.to_vec();
    let mut proposals: Vec<Task> = Vec::new();
    for &rp in robots {
        if remaining.is_empty() {
            break;
        }
        let sample = sample_tasks(&remaining, params.sample_size, rng);
        let scored: Vec<(Task, RewardBreakdown)> =
            sample.iter().map(|t| (*t, reward(t, rp, &claimed, &ctx))).collect();
        if let Some(bi) = best_proposal(&scored) {
            let (t, _) = scored[bi];
            claimed.push(t.pos);
            remaining.retain(|x| x.id != t.id);
            proposals.push(t);
        }
    }

    let cost: Vec<Vec<f64>> = robots
        .iter()
        .map(|&rp| {
            proposals
                .iter()
                .map(|t| travel_distance(grid, rp, t.pos).unwrap_or(f64::INFINITY))
                .collect()
        })
        .collect();
    let matching = jv::assign(&cost);

    let mut assignments = Vec::new();
    let mut idle = Vec::new();
    for (ri, m) in matching.iter().enumerate() {
        match m {
            Some(pi) => {
                let t = proposals[*pi];
                // Log the final pairing's factors; crowding is measured
                // against the other claimed tasks, not the task itself.
                let others: Vec<Vec2> = claimed
                    .iter()
                    .copied()
                    .filter(|p| p.x.to_bits() != t.pos.x.to_bits() || p.y.to_bits() != t.pos.y.to_bits())
                    .collect();
                let breakdown = reward(&t, robots[ri], &others, &ctx);
                assignments.push(Assignment { robot: ri, task: t, breakdown });
            }
            None => idle.push(ri),
        }
    }
    AssignmentRound { tick, assignments, idle }
}
