//! The mission engine: a deterministic discrete-time simulation of robots
//! mapping an unknown world with a laser, sweeping it with a short-range
//! camera, and reporting victims.
//!
//! Each tick, in fixed order: scripted loop closures fire and repair the map;
//! robots advance along their planned paths; odometry feeds the pose graph
//! and new vertices integrate fresh scans; cameras mark covered ground and
//! detect victims; the planner spends its expansion budget; and, when due, an
//! allocation round turns planner output into tasks and routes every robot.
//! A single seeded RNG stream drives everything, so a config and seed fix the
//! report byte for byte.

pub mod config;
pub mod report;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::allocator::{self, AllocParams, AssignmentRound, Task, TaskKind};
use crate::baselines::{nbvp_allocate, GlobalRrtPlanner, PolicyKind};
use crate::coverage::{CoverageFilter, CoverageParams};
use crate::frontier::{filter_exploration_nodes, information_gain_frontier, thin, FrontierNode};
use crate::geom::{normalize_angle, Pose2, Vec2};
use crate::pgart::TaskGraph;
use crate::slam::{Correction, LoopClosureEvent, PoseGraph};
use crate::world::{
    astar_path, cast_scan, integrate_scan, nav_goal, raycast, CellState, Geofence, LaserModel,
    OccupancyGrid, WorldFile,
};
use crate::{Error, Result};

pub use config::{LoopClosureSpec, MissionConfig};
pub use report::{MissionReport, SummaryRow};

/// Maximum robot speed (m/s).
pub const ROBOT_SPEED: f64 = 0.3;
/// Turn rate during the lookaround a robot performs on task arrival (rad/s).
pub const ROBOT_TURN_RATE: f64 = std::f64::consts::PI;
const LASER_FOV_DEG: f64 = 145.0;
const LASER_RAYS: usize = 128;
const COVERAGE_PER_TREE: usize = 3;
const COVERAGE_RAYS: usize = 36;

/// Advance up to `dist` meters along `path` starting at `pos` with the next
/// waypoint at `path[cursor]`. Returns the new position, the new cursor, and
/// whether the final waypoint was reached.
fn advance_along(path: &[Vec2], mut cursor: usize, mut pos: Vec2, mut dist: f64) -> (Vec2, usize, bool) {
    while cursor < path.len() && dist > 1e-12 {
        let wp = path[cursor];
        let d = pos.dist(wp);
        if d <= dist {
            pos = wp;
            cursor += 1;
            dist -= d;
        } else {
            pos = pos + (wp - pos) * (dist / d);
            dist = 0.0;
        }
    }
    (pos, cursor, cursor >= path.len())
}

/// A victim counts as seen when it is within camera range and the straight
/// line to it crosses no ground-truth obstacle.
fn victim_visible(truth: &OccupancyGrid, robot: Vec2, victim: Vec2, gamma: f64) -> bool {
    robot.dist(victim) <= gamma && matches!(raycast(truth, robot, victim), Ok(true))
}

/// Mark every cell the camera sees this tick: within `gamma` of the robot,
/// free in ground truth, already mapped free in the belief (so covered area
/// never outruns explored area), and in line of sight. Already-covered cells
/// are skipped before the raycast, which keeps settled regions cheap.
fn mark_camera_coverage(
    truth: &OccupancyGrid,
    belief: &OccupancyGrid,
    covered: &mut [bool],
    covered_cells: &mut usize,
    center: Vec2,
    gamma: f64,
) {
    let (cx, cy) = truth.cell_of(center);
    let reach = (gamma / truth.resolution).ceil() as i64;
    for iy in (cy - reach)..=(cy + reach) {
        for ix in (cx - reach)..=(cx + reach) {
            if !truth.in_bounds(ix, iy) {
                continue;
            }
            let idx = iy as usize * truth.width + ix as usize;
            if covered[idx]
                || truth.get(ix, iy) != CellState::Free
                || belief.get(ix, iy) != CellState::Free
            {
                continue;
            }
            let c = truth.cell_center(ix, iy);
            if c.dist(center) > gamma || !matches!(raycast(truth, center, c), Ok(true)) {
                continue;
            }
            covered[idx] = true;
            *covered_cells += 1;
        }
    }
}

/// Whether a camera at `center` would sweep at least one new cell: free in
/// the ground truth, already mapped in the belief, inside the camera disk
/// with line of sight, and not yet covered. This is the retirement test for
/// coverage viewpoints — a node keeps paying as long as any such cell exists,
/// even when its own cell was swept in passing.
fn covers_new_ground(
    truth: &OccupancyGrid,
    belief: &OccupancyGrid,
    covered: &[bool],
    center: Vec2,
    gamma: f64,
) -> bool {
    let (cx, cy) = truth.cell_of(center);
    let rad = (gamma / truth.resolution).ceil() as i64;
    for iy in (cy - rad).max(0)..=(cy + rad).min(truth.height as i64 - 1) {
        for ix in (cx - rad).max(0)..=(cx + rad).min(truth.width as i64 - 1) {
            let idx = iy as usize * truth.width + ix as usize;
            if covered[idx]
                || truth.get(ix, iy) != CellState::Free
                || belief.get(ix, iy) != CellState::Free
            {
                continue;
            }
            let c = truth.cell_center(ix, iy);
            if c.dist(center) <= gamma && matches!(raycast(truth, center, c), Ok(true)) {
                return true;
            }
        }
    }
    false
}

struct RobotState {
    pose: Pose2,
    path: Vec<Vec2>,
    cursor: usize,
    /// Remaining lookaround rotation (radians). A robot that reaches its task
    /// turns a full circle before moving again, so the laser sweeps every
    /// direction and the information that justified the task actually decays.
    spin: f64,
    /// The task this robot is committed to, if any. The hierarchical policy
    /// keeps a robot on its task until it arrives or the task stops paying;
    /// without that commitment every arrival-triggered round re-rolls the
    /// whole fleet, and a coverage target loses value as its robot closes in
    /// (the approach drops pose vertices next to it), so robots get diverted
    /// forever and the last viewpoints are never finished.
    target: Option<(TaskKind, Vec2)>,
    /// An exploration target this robot just reached. Once the lookaround
    /// finishes, the spot's information gain is measured one more time to
    /// catch frontiers that can never be resolved from their own position.
    check: Option<Vec2>,
}

enum Planner {
    /// Pose-anchored task trees plus the coverage viewpoint filter.
    PoseAnchored { graph: TaskGraph, coverage: CoverageFilter },
    /// Single origin-rooted tree, frontiers only.
    Global(GlobalRrtPlanner),
}

pub struct Mission {
    cfg: MissionConfig,
    truth: OccupancyGrid,
    belief: OccupancyGrid,
    fence: Geofence,
    laser: LaserModel,
    slam: PoseGraph,
    planner: Planner,
    robots: Vec<RobotState>,
    rng: ChaCha8Rng,
    victims: Vec<Vec2>,
    victim_time: Vec<Option<f64>>,
    /// Camera coverage in the ground-truth frame, one flag per cell.
    covered: Vec<bool>,
    covered_cells: usize,
    /// New tree nodes awaiting the next frontier-filter round.
    pending: Vec<Vec2>,
    frontiers: Vec<FrontierNode>,
    /// Spots where a robot finished a full lookaround yet the local map still
    /// reads as informative. The leftover unknown area there is out of the
    /// laser's reach (typically sealed inside a wall), and since the map only
    /// ever grows, returning can never help: candidates near these points are
    /// dropped so the fleet stops being lured back.
    dead_frontiers: Vec<Vec2>,
    next_round_tick: u64,
    round_due: bool,
    last_prune_rev: u64,
    ticks_run: u64,
    rounds: Vec<report::RoundLog>,
    lc_records: Vec<report::LoopClosureRecord>,
    explored_series: Vec<f64>,
    covered_series: Vec<f64>,
}

impl Mission {
    pub fn new(cfg: MissionConfig) -> Result<Mission> {
        cfg.validate()?;
        let world = WorldFile::load(&cfg.world_path)?;
        Mission::from_world(cfg, &world)
    }

    /// Build a mission from an already-parsed world (the config's world path
    /// is ignored). Robots are the first `cfg.robots` world entries.
    pub fn from_world(cfg: MissionConfig, world: &WorldFile) -> Result<Mission> {
        cfg.validate()?;
        if world.robots.len() < cfg.robots {
            return Err(Error::InvalidConfig(format!(
                "config asks for {} robots but the world provides {}",
                cfg.robots,
                world.robots.len()
            )));
        }
        let truth = world.grid.clone();
        let mut belief =
            OccupancyGrid::new(truth.width, truth.height, truth.resolution, truth.origin);
        let laser = LaserModel {
            max_range: cfg.beta,
            fov: LASER_FOV_DEG.to_radians(),
            rays: LASER_RAYS,
        };
        let mut slam = PoseGraph::new(cfg.spacing, cfg.drift, cfg.seed);
        let mut planner = match cfg.policy {
            PolicyKind::RrtExploration => {
                Planner::Global(GlobalRrtPlanner::new(world.robots[0], cfg.eta))
            }
            _ => Planner::PoseAnchored {
                graph: TaskGraph::new(cfg.eta),
                coverage: CoverageFilter::new(CoverageParams {
                    xi_range: cfg.gamma,
                    v_r_min: cfg.v_r_min,
                    per_tree: COVERAGE_PER_TREE,
                    k: cfg.k,
                    ray_count: COVERAGE_RAYS,
                }),
            },
        };

        let mut robots = Vec::with_capacity(cfg.robots);
        for i in 0..cfg.robots {
            let pose = world.robots[i];
            let (rid, vid) = slam.register_robot(pose, 0);
            debug_assert_eq!(rid, i);
            let v = *slam.get(vid)?;
            let scan = cast_scan(&truth, v.true_pose, &laser);
            integrate_scan(&mut belief, v.pose(), &scan);
            if let Planner::PoseAnchored { graph, .. } = &mut planner {
                graph.add_task_vertex(vid, v.pose())?;
            }
            robots.push(RobotState {
                pose,
                path: Vec::new(),
                cursor: 0,
                spin: 0.0,
                target: None,
                check: None,
            });
        }

        let cells = truth.width * truth.height;
        let last_prune_rev = belief.obstacle_revision;
        Ok(Mission {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            victims: world.victims.clone(),
            victim_time: vec![None; world.victims.len()],
            covered: vec![false; cells],
            covered_cells: 0,
            pending: Vec::new(),
            frontiers: Vec::new(),
            dead_frontiers: Vec::new(),
            next_round_tick: 0,
            round_due: false,
            last_prune_rev,
            ticks_run: 0,
            rounds: Vec::new(),
            lc_records: Vec::new(),
            explored_series: Vec::new(),
            covered_series: Vec::new(),
            fence: world.geofence,
            truth,
            belief,
            laser,
            slam,
            planner,
            robots,
            cfg,
        })
    }

    pub fn covered_area(&self) -> f64 {
        self.covered_cells as f64 * self.truth.resolution * self.truth.resolution
    }

    pub fn all_victims_found(&self) -> bool {
        !self.victims.is_empty() && self.victim_time.iter().all(Option::is_some)
    }

    fn prune_planner(&mut self) {
        match &mut self.planner {
            Planner::PoseAnchored { graph, .. } => {
                graph.prune(&self.belief);
            }
            Planner::Global(p) => {
                p.prune(&self.belief);
            }
        }
        self.last_prune_rev = self.belief.obstacle_revision;
    }

    pub fn step(&mut self, t: u64) -> Result<()> {
        // Scripted loop closures: correct the pose graph, re-anchor the task
        // trees, repair the belief map, then prune what no longer fits.
        let due: Vec<LoopClosureSpec> =
            self.cfg.loop_closures.iter().filter(|s| s.tick == t).copied().collect();
        for spec in due {
            if self.slam.is_empty() {
                continue;
            }
            let last = spec.last.min(self.slam.len() - 1);
            if spec.first > last {
                continue;
            }
            let correction = if spec.ramp {
                Correction::Ramp(spec.delta)
            } else {
                Correction::Uniform(spec.delta)
            };
            let ev = LoopClosureEvent { tick: t, first: spec.first, last, correction };
            let changes = self.slam.apply_loop_closure(&ev)?;
            if let Planner::PoseAnchored { graph, .. } = &mut self.planner {
                graph.apply_corrections(&changes)?;
            }
            self.slam.replay_map(&mut self.belief, &self.truth, &self.laser, &changes);
            self.prune_planner();
            self.lc_records.push(report::LoopClosureRecord {
                tick: t,
                first: ev.first,
                last: ev.last,
                vertices: changes.len(),
            });
            self.round_due = true;
        }

        // Motion. Displacement per tick is well under one cell, so checking
        // the endpoint suffices to keep robots out of ground-truth walls.
        let step_len = ROBOT_SPEED * self.cfg.dt;
        let turn_step = ROBOT_TURN_RATE * self.cfg.dt;
        let mut finished_looks: Vec<Vec2> = Vec::new();
        for r in &mut self.robots {
            if r.spin > 0.0 {
                // Lookaround first; any assigned path waits until it is done.
                r.pose =
                    Pose2::new(r.pose.x, r.pose.y, normalize_angle(r.pose.theta + turn_step));
                r.spin = (r.spin - turn_step).max(0.0);
                if r.spin == 0.0 {
                    if let Some(p) = r.check.take() {
                        finished_looks.push(p);
                    }
                }
                continue;
            }
            if r.path.is_empty() {
                continue;
            }
            let (new_pos, cursor, done) =
                advance_along(&r.path, r.cursor, r.pose.position(), step_len);
            if self.truth.state_at(new_pos) == CellState::Occupied || !self.truth.contains(new_pos)
            {
                // The belief path turned out to cross a real wall (possible
                // under odometry drift): stop and wait for a re-plan.
                r.path.clear();
                r.cursor = 0;
                r.target = None;
                self.round_due = true;
                continue;
            }
            let delta = new_pos - r.pose.position();
            let heading = if delta.norm() > 1e-9 { delta.angle() } else { r.pose.theta };
            r.pose = Pose2::new(new_pos.x, new_pos.y, heading);
            r.cursor = cursor;
            if done {
                // A reached frontier earns a full lookaround: the laser has a
                // limited field of view, and the point of standing here is to
                // resolve the unknown area in every direction. The camera is
                // an omnidirectional disk, so coverage stops need no turn.
                if let Some((TaskKind::Exploration, p)) = r.target {
                    r.check = Some(p);
                    r.spin = 2.0 * std::f64::consts::PI;
                }
                r.path.clear();
                r.cursor = 0;
                r.target = None;
                // Reaching a task re-opens the allocation question early.
                self.round_due = true;
            }
            debug_assert!(self.truth.state_at(r.pose.position()) == CellState::Free);
        }

        // Odometry and mapping: scans integrate at the estimated pose of each
        // new pose-graph vertex, which also roots a new task tree.
        for i in 0..self.robots.len() {
            let pose = self.robots[i].pose;
            if let Some(vid) = self.slam.add_pose(i, pose, t)? {
                let v = *self.slam.get(vid)?;
                let scan = cast_scan(&self.truth, v.true_pose, &self.laser);
                integrate_scan(&mut self.belief, v.pose(), &scan);
                if let Planner::PoseAnchored { graph, .. } = &mut self.planner {
                    graph.add_task_vertex(vid, v.pose())?;
                }
            }
        }

        // A completed lookaround sweeps the laser over every direction, so if
        // the spot still reads as informative afterwards, the unknown cells
        // feeding it are unreachable from here and always will be.
        for p in finished_looks {
            if information_gain_frontier(p, &self.belief, self.cfg.beta) >= self.cfg.xi
                && !self.near_dead_frontier(p)
            {
                self.dead_frontiers.push(p);
            }
        }

        // Camera sweep and victim detection, both in ground truth.
        let time_now = (t + 1) as f64 * self.cfg.dt;
        for i in 0..self.robots.len() {
            let pos = self.robots[i].pose.position();
            mark_camera_coverage(
                &self.truth,
                &self.belief,
                &mut self.covered,
                &mut self.covered_cells,
                pos,
                self.cfg.gamma,
            );
            for (vi, slot) in self.victim_time.iter_mut().enumerate() {
                if slot.is_none() && victim_visible(&self.truth, pos, self.victims[vi], self.cfg.gamma)
                {
                    *slot = Some(time_now);
                }
            }
        }

        // Tree growth; every accepted node is a future frontier candidate.
        match &mut self.planner {
            Planner::PoseAnchored { graph, .. } => {
                for _ in 0..self.cfg.budget {
                    if let Some(n) = graph.expand(&self.belief, &self.fence, &mut self.rng) {
                        self.pending.push(n.world);
                    }
                }
            }
            Planner::Global(p) => {
                p.expand(&self.belief, &self.fence, self.cfg.budget, &mut self.rng);
            }
        }

        if self.round_due || t >= self.next_round_tick {
            self.run_round(t)?;
            self.round_due = false;
            self.next_round_tick = t + self.cfg.period_ticks();
        }

        self.explored_series.push(self.belief.mapped_area());
        self.covered_series.push(self.covered_area());
        self.ticks_run = t + 1;
        Ok(())
    }

    /// Whether `p` shares a vantage pocket with a spot already written off:
    /// within the mode-merge distance of the frontier clustering and in line
    /// of sight of it. The sight check keeps a viewpoint on the far side of a
    /// thin wall alive — it may well see what the dead spot could not.
    fn near_dead_frontier(&self, p: Vec2) -> bool {
        let r = 0.5 * self.cfg.bandwidth;
        self.dead_frontiers
            .iter()
            .any(|d| d.dist(p) <= r && matches!(raycast(&self.belief, *d, p), Ok(true)))
    }

    /// One allocation round: refresh tasks from the planner, assign, and
    /// route every assigned robot along a belief-map path.
    fn run_round(&mut self, t: u64) -> Result<()> {
        // New obstacles since the last prune can invalidate tree edges.
        if self.belief.obstacle_revision != self.last_prune_rev {
            self.prune_planner();
        }

        let robot_pos: Vec<Vec2> = self.robots.iter().map(|r| r.pose.position()).collect();
        let (w_f, w_c) =
            allocator::kind_weights(self.belief.mapped_area(), self.fence.area());

        let truth = &self.truth;
        let covered = &self.covered;
        let tasks: Vec<Task> = match &mut self.planner {
            Planner::PoseAnchored { graph, coverage } => {
                let mut cands = thin(&self.pending, 0.5 * self.cfg.eta);
                self.pending.clear();
                if !self.dead_frontiers.is_empty() {
                    let dead = &self.dead_frontiers;
                    let belief = &self.belief;
                    let r = 0.5 * self.cfg.bandwidth;
                    let alive = |p: Vec2| {
                        !dead
                            .iter()
                            .any(|d| d.dist(p) <= r && matches!(raycast(belief, *d, p), Ok(true)))
                    };
                    cands.retain(|&p| alive(p));
                    self.frontiers.retain(|f| alive(f.pos));
                }
                self.frontiers = filter_exploration_nodes(
                    &cands,
                    &self.frontiers,
                    &self.belief,
                    self.cfg.beta,
                    self.cfg.xi,
                    self.cfg.bandwidth,
                );
                // Viewpoints with nothing new left in camera reach are done;
                // offering them again would let a robot camp on one forever.
                let belief = &self.belief;
                let picks = coverage.select_where(graph, belief, |c| {
                    covers_new_ground(truth, belief, covered, c.pos, self.cfg.gamma)
                });
                let marks: Vec<(usize, u32)> = picks.iter().map(|c| (c.tree, c.node)).collect();
                graph.mark_coverage(&marks);
                let mut tasks: Vec<Task> = self
                    .frontiers
                    .iter()
                    .enumerate()
                    .map(|(id, f)| Task {
                        id,
                        kind: TaskKind::Exploration,
                        pos: f.pos,
                        gain: f.gain,
                    })
                    .collect();
                for c in &picks {
                    let gain = allocator::info_gain_coverage(c.pos, &self.slam, self.cfg.gamma)
                        .unwrap_or(1.0);
                    tasks.push(Task {
                        id: tasks.len(),
                        kind: TaskKind::Coverage,
                        pos: c.pos,
                        gain,
                    });
                }
                tasks
            }
            Planner::Global(p) => {
                p.round(&self.belief, self.cfg.beta, self.cfg.xi, self.cfg.bandwidth)
            }
        };

        let round = match self.cfg.policy {
            PolicyKind::High => {
                // A robot stays committed to its task until it arrives or the
                // task stops paying: coverage targets retire once their ground
                // is swept, exploration targets once the map around them is
                // known. Only freed robots enter this round, while the kept
                // targets still crowd out proposals next to them. Without the
                // commitment, every arrival-triggered round re-rolls the whole
                // fleet — and a coverage target loses value as its robot
                // closes in (the approach drops pose vertices beside it), so
                // robots would be diverted forever.
                for r in &mut self.robots {
                    let keep = match r.target {
                        Some((kind, pos)) if !r.path.is_empty() => match kind {
                            TaskKind::Coverage => covers_new_ground(
                                truth,
                                &self.belief,
                                covered,
                                pos,
                                self.cfg.gamma,
                            ),
                            TaskKind::Exploration => {
                                information_gain_frontier(pos, &self.belief, self.cfg.beta)
                                    >= self.cfg.xi
                            }
                        },
                        _ => false,
                    };
                    if !keep {
                        r.target = None;
                    }
                }
                let mut freed: Vec<usize> = Vec::new();
                let mut active: Vec<Vec2> = Vec::new();
                for (i, r) in self.robots.iter().enumerate() {
                    match r.target {
                        Some((_, pos)) => active.push(pos),
                        None => freed.push(i),
                    }
                }
                let mut round = if freed.is_empty() {
                    AssignmentRound { tick: t, assignments: Vec::new(), idle: Vec::new() }
                } else {
                    let freed_pos: Vec<Vec2> = freed.iter().map(|&i| robot_pos[i]).collect();
                    let params = AllocParams {
                        lambda: self.cfg.lambda,
                        beta: self.cfg.beta,
                        gamma: self.cfg.gamma,
                        sample_size: self.cfg.sample_size,
                        fence_area: self.fence.area(),
                    };
                    allocator::allocate(
                        t,
                        &freed_pos,
                        &tasks,
                        &active,
                        &self.belief,
                        &self.slam,
                        &params,
                        &mut self.rng,
                    )
                };
                for a in &mut round.assignments {
                    a.robot = freed[a.robot];
                }
                for i in &mut round.idle {
                    *i = freed[*i];
                }
                round
            }
            PolicyKind::NbvpGreedy | PolicyKind::RrtExploration => {
                let mut r = nbvp_allocate(&robot_pos, &tasks, &self.belief);
                r.tick = t;
                r
            }
        };

        for a in &round.assignments {
            let start = nav_goal(&self.belief, robot_pos[a.robot]);
            let goal = nav_goal(&self.belief, a.task.pos);
            let r = &mut self.robots[a.robot];
            r.path.clear();
            r.cursor = 0;
            r.target = Some((a.task.kind, a.task.pos));
            if let (Some(s), Some(g)) = (start, goal) {
                if let Ok(Some((_, waypoints))) = astar_path(&self.belief, s, g) {
                    r.path = waypoints;
                }
            }
        }
        for &i in &round.idle {
            self.robots[i].path.clear();
            self.robots[i].cursor = 0;
            self.robots[i].target = None;
        }

        let entries: Vec<report::RoundEntry> = round
            .assignments
            .iter()
            .map(|a| report::RoundEntry {
                robot: a.robot,
                task: a.task.id,
                kind: a.task.kind.label().to_string(),
                x: a.task.pos.x,
                y: a.task.pos.y,
                info: a.breakdown.info,
                weight: a.breakdown.weight,
                utility: a.breakdown.utility,
                distance: a.breakdown.distance,
                reward: a.breakdown.value,
            })
            .collect();
        self.rounds.push(report::RoundLog {
            tick: t,
            time: t as f64 * self.cfg.dt,
            policy: self.cfg.policy.label().to_string(),
            mapped_fraction: self.belief.mapped_area() / self.fence.area(),
            w_f,
            w_c,
            tasks: tasks.len(),
            assignments: entries,
            idle: round.idle,
        });
        Ok(())
    }

    /// Run until every victim is found or the time limit lapses.
    pub fn run(&mut self) -> Result<()> {
        for t in 0..self.cfg.max_ticks().max(1) {
            self.step(t)?;
            if self.all_victims_found() {
                break;
            }
        }
        Ok(())
    }

    pub fn into_report(self) -> MissionReport {
        let duration = (self.ticks_run.max(1)) as f64 * self.cfg.dt;
        let mut events: Vec<report::VictimEvent> = self
            .victim_time
            .iter()
            .enumerate()
            .filter_map(|(i, t)| {
                t.map(|time| report::VictimEvent {
                    index: i,
                    x: self.victims[i].x,
                    y: self.victims[i].y,
                    time,
                })
            })
            .collect();
        events.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap().then(a.index.cmp(&b.index)));
        let times: Vec<f64> = events.iter().map(|e| e.time).collect();
        let (created, pruned) = match &self.planner {
            Planner::PoseAnchored { graph, .. } => (graph.nodes_created(), graph.nodes_pruned()),
            Planner::Global(p) => (p.graph().nodes_created(), p.graph().nodes_pruned()),
        };
        let pruned_fraction = if created == 0 { 0.0 } else { pruned as f64 / created as f64 };
        let covered_area = self.covered_cells as f64
            * self.truth.resolution
            * self.truth.resolution;
        let metrics = report::Metrics {
            sst: report::compute_sst(&times, self.victims.len(), self.cfg.p_max),
            epsilon: report::coverage_efficiency(covered_area, duration),
            pct_victims: report::pct_victims(times.len(), self.victims.len()),
            pruned_fraction,
            nodes_created: created,
            nodes_pruned: pruned,
            explored_area: self.belief.mapped_area(),
            covered_area,
            duration,
            victims_total: self.victims.len(),
            victims_found: times.len(),
        };
        MissionReport {
            format_version: report::FORMAT_VERSION,
            policy: self.cfg.policy.label().to_string(),
            seed: self.cfg.seed,
            world: self.cfg.world.clone(),
            robots: self.cfg.robots,
            metrics,
            victims: events,
            loop_closures: self.lc_records,
            rounds: self.rounds,
            series: report::Series {
                dt: self.cfg.dt,
                explored: self.explored_series,
                covered: self.covered_series,
            },
            config: self.cfg,
        }
    }
}

/// Load the world, simulate the whole mission, and report.
pub fn run_mission(cfg: &MissionConfig) -> Result<MissionReport> {
    let mut mission = Mission::new(cfg.clone())?;
    mission.run()?;
    Ok(mission.into_report())
}


#[cfg(test)]
mod probe {
    use super::*;

    #[test]
    #[ignore]
    fn se_pocket_probe() {
        let dir = env!("CARGO_MANIFEST_DIR");
        let mut cfg = MissionConfig::load(std::path::Path::new(&format!("{dir}/../../configs/maze.cfg"))).unwrap();
        cfg.world_path = format!("{dir}/../../worlds/maze12.world").into();
        cfg.seed = 4;
        cfg.policy = PolicyKind::High;
        let mut m = Mission::new(cfg).unwrap();
        m.run().unwrap();
        let rect = (10.6, 11.9, 2.4, 4.8);
        let truth = m.truth.clone();
        let covered = m.covered.clone();
        let belief = m.belief.clone();
        if let Planner::PoseAnchored { graph, coverage } = &mut m.planner {
            let mut hits = 0;
            for (ti, tree) in graph.trees().iter().enumerate() {
                for n in tree.nodes() {
                    let p = n.world;
                    if p.x >= rect.0 && p.x <= rect.1 && p.y >= rect.2 && p.y <= rect.3 {
                        hits += 1;
                        let (ix, iy) = truth.cell_of(p);
                        let cov = covered[iy as usize * truth.width + ix as usize];
                        if hits <= 40 {
                            println!(
                                "node t{ti} n{} at ({:.2},{:.2}) class={:?} covered={}",
                                n.id, p.x, p.y, n.class, cov
                            );
                        }
                    }
                }
            }
            println!("nodes in rect: {hits}");
            let picks = coverage.select_where(graph, &belief, |c| {
                let (ix, iy) = truth.cell_of(c.pos);
                !truth.in_bounds(ix, iy) || !covered[iy as usize * truth.width + ix as usize]
            });
            println!("endgame coverage picks: {}", picks.len());
            for c in &picks {
                println!("  pick ({:.2},{:.2}) v_r={:.2}", c.pos.x, c.pos.y, c.v_r);
            }
        }
        println!("dead frontiers: {:?}", m.dead_frontiers.len());
        for d in &m.dead_frontiers {
            println!("  dead ({:.2},{:.2})", d.x, d.y);
        }
        let mut uncov = 0;
        for iy in 0..m.truth.height as i64 {
            for ix in 0..m.truth.width as i64 {
                let c = m.truth.cell_center(ix, iy);
                if c.x >= rect.0 && c.x <= rect.1 && c.y >= rect.2 && c.y <= rect.3 {
                    if m.truth.get(ix, iy) == CellState::Free
                        && !m.covered[iy as usize * m.truth.width + ix as usize]
                    {
                        uncov += 1;
                    }
                }
            }
        }
        println!("uncovered free cells in rect: {uncov}");
    }
}
