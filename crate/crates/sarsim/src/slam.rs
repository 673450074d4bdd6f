//! Simulated pose-graph SLAM backend.
//!
//! Robots report odometry that drifts with distance traveled; a vertex is
//! dropped every `spacing` meters along the path. Scripted loop-closure
//! events rigidly correct ranges of vertices, after which the occupancy map
//! can be repaired by re-rendering every vertex's scan at its corrected pose.
//!
//! Each vertex keeps its original (drifted) odometric pose immutable and
//! accumulates corrections as a separate rigid transform. Applying a
//! correction and then its exact inverse therefore restores the estimated
//! pose bit for bit, which downstream consumers (task trees stored in
//! vertex-local frames) rely on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geom::{normalize_angle, Pose2, Vec2};
use crate::world::{cast_scan, integrate_scan, scan_footprint, LaserModel, OccupancyGrid};
use crate::{Error, Result};

/// Odometry error accumulated as a robot moves.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub enum DriftModel {
    /// Perfect odometry.
    None,
    /// Fixed error per meter traveled.
    Constant { dx: f64, dy: f64, dtheta: f64 },
    /// Zero-mean gaussian error with standard deviation `sigma * sqrt(m)`.
    RandomWalk { sigma_xy: f64, sigma_theta: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct PoseVertex {
    pub id: usize,
    pub robot: usize,
    pub tick: u64,
    /// Drifted odometric pose at creation time. Never mutated.
    odom: Pose2,
    /// Accumulated rigid correction from loop closures.
    correction: Pose2,
    /// Where the robot actually was (simulation ground truth).
    pub true_pose: Pose2,
}

impl PoseVertex {
    /// Current best estimate: the accumulated correction applied to the
    /// original odometric pose.
    pub fn pose(&self) -> Pose2 {
        self.correction.compose(self.odom)
    }

    pub fn odom(&self) -> Pose2 {
        self.odom
    }

    pub fn correction(&self) -> Pose2 {
        self.correction
    }
}

/// How a loop-closure event corrects the vertices in its range.
#[derive(Debug, Clone)]
pub enum Correction {
    /// Apply the same rigid transform to every vertex in the range.
    Uniform(Pose2),
    /// Scale the transform linearly from identity at the first vertex to the
    /// full value at the last, mimicking drift that grew along the chain.
    Ramp(Pose2),
    /// Explicit transform per vertex (length must match the range).
    PerVertex(Vec<Pose2>),
}

#[derive(Debug, Clone)]
pub struct LoopClosureEvent {
    pub tick: u64,
    /// Inclusive vertex id range the correction applies to.
    pub first: usize,
    pub last: usize,
    pub correction: Correction,
}

/// One vertex's pose change from a loop closure.
#[derive(Debug, Clone, Copy)]
pub struct PoseCorrection {
    pub vertex: usize,
    pub old_pose: Pose2,
    pub new_pose: Pose2,
}

/// Net heading change since the last vertex that forces a new vertex even
/// without translation. At 60° steps a 145° scan fan covers every direction
/// over one turn in place, so lookaround sweeps actually enter the map.
pub const ROTATION_VERTEX_ANGLE: f64 = std::f64::consts::FRAC_PI_3;

struct RobotTrack {
    last_seen: Pose2,
    dist_since_vertex: f64,
    /// Heading at the robot's newest vertex.
    theta_at_vertex: f64,
    err: Pose2,
    /// Frame the robot's running estimate lives in: the correction of its
    /// newest vertex. Loop closures move it so odometry continues from the
    /// corrected pose instead of jumping back to the uncorrected chain.
    frame: Pose2,
    rng: ChaCha8Rng,
}

pub struct PoseGraph {
    pub spacing: f64,
    drift: DriftModel,
    vertices: Vec<PoseVertex>,
    robots: Vec<RobotTrack>,
    /// Base seed for the per-robot drift noise streams.
    seed: u64,
}

impl PoseGraph {
    pub fn new(spacing: f64, drift: DriftModel, seed: u64) -> PoseGraph {
        PoseGraph { spacing, drift, vertices: Vec::new(), robots: Vec::new(), seed }
    }

    /// Add a robot at its starting pose, creating its first vertex. Returns
    /// `(robot index, vertex id)`.
    pub fn register_robot(&mut self, true_pose: Pose2, tick: u64) -> (usize, usize) {
        let robot = self.robots.len();
        let rng =
            ChaCha8Rng::seed_from_u64(self.seed ^ (robot as u64).wrapping_mul(0x9E3779B97F4A7C15));
        self.robots.push(RobotTrack {
            last_seen: true_pose,
            dist_since_vertex: 0.0,
            theta_at_vertex: true_pose.theta,
            err: Pose2::IDENTITY,
            frame: Pose2::IDENTITY,
            rng,
        });
        let id = self.push_vertex(robot, true_pose, true_pose, tick);
        (robot, id)
    }

    fn push_vertex(&mut self, robot: usize, odom: Pose2, true_pose: Pose2, tick: u64) -> usize {
        let id = self.vertices.len();
        self.vertices.push(PoseVertex {
            id,
            robot,
            tick,
            odom,
            correction: self.robots[robot].frame,
            true_pose,
        });
        id
    }

    /// Report the robot's current true pose. Odometry drift accrues with the
    /// distance moved since the last report; a new vertex is created once the
    /// robot has traveled `spacing` meters — or turned by
    /// [`ROTATION_VERTEX_ANGLE`] — since its previous vertex, in which case
    /// the vertex id is returned.
    pub fn add_pose(&mut self, robot: usize, true_pose: Pose2, tick: u64) -> Result<Option<usize>> {
        if !true_pose.is_finite() {
            return Err(Error::NonFinitePose);
        }
        let drift = self.drift;
        let track = self.robots.get_mut(robot).ok_or(Error::UnknownRobot(robot))?;
        let step = true_pose.position().dist(track.last_seen.position());
        if step > 0.0 {
            match drift {
                DriftModel::None => {}
                DriftModel::Constant { dx, dy, dtheta } => {
                    track.err.x += dx * step;
                    track.err.y += dy * step;
                    track.err.theta += dtheta * step;
                }
                DriftModel::RandomWalk { sigma_xy, sigma_theta } => {
                    let unit = Normal::new(0.0, 1.0).unwrap();
                    let scale = step.sqrt();
                    track.err.x += unit.sample(&mut track.rng) * sigma_xy * scale;
                    track.err.y += unit.sample(&mut track.rng) * sigma_xy * scale;
                    track.err.theta += unit.sample(&mut track.rng) * sigma_theta * scale;
                }
            }
            track.dist_since_vertex += step;
        }
        track.last_seen = true_pose;
        let turned = normalize_angle(true_pose.theta - track.theta_at_vertex).abs();
        if track.dist_since_vertex < self.spacing && turned < ROTATION_VERTEX_ANGLE {
            return Ok(None);
        }
        track.dist_since_vertex = 0.0;
        track.theta_at_vertex = true_pose.theta;
        let odom = Pose2::new(
            true_pose.x + track.err.x,
            true_pose.y + track.err.y,
            normalize_angle(true_pose.theta + track.err.theta),
        );
        Ok(Some(self.push_vertex(robot, odom, true_pose, tick)))
    }

    pub fn vertices(&self) -> &[PoseVertex] {
        &self.vertices
    }

    pub fn get(&self, id: usize) -> Result<&PoseVertex> {
        self.vertices.get(id).ok_or(Error::UnknownVertex(id))
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertex whose estimated position is closest to `p` (ties: lowest id).
    pub fn nearest_vertex(&self, p: Vec2) -> Result<&PoseVertex> {
        let mut best: Option<(f64, usize)> = None;
        for v in &self.vertices {
            let d = v.pose().position().dist2(p);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, v.id));
            }
        }
        match best {
            Some((_, id)) => Ok(&self.vertices[id]),
            None => Err(Error::EmptyPoseGraph),
        }
    }

    /// Apply a loop-closure event, composing each affected vertex's
    /// correction with the event's transform. Returns the per-vertex pose
    /// changes (old and new estimates) for downstream consumers.
    pub fn apply_loop_closure(&mut self, event: &LoopClosureEvent) -> Result<Vec<PoseCorrection>> {
        if event.first > event.last || event.last >= self.vertices.len() {
            return Err(Error::InvalidVertexRange { first: event.first, last: event.last });
        }
        if let Correction::PerVertex(list) = &event.correction {
            if list.len() != event.last - event.first + 1 {
                return Err(Error::InvalidVertexRange { first: event.first, last: event.last });
            }
        }
        let span = (event.last - event.first) as f64;
        let mut out = Vec::with_capacity(event.last - event.first + 1);
        for id in event.first..=event.last {
            let c = match &event.correction {
                Correction::Uniform(c) => *c,
                Correction::Ramp(c) => {
                    let alpha = if span == 0.0 { 1.0 } else { (id - event.first) as f64 / span };
                    Pose2::new(c.x * alpha, c.y * alpha, c.theta * alpha)
                }
                Correction::PerVertex(list) => list[id - event.first],
            };
            if !c.is_finite() {
                return Err(Error::NonFinitePose);
            }
            let v = &mut self.vertices[id];
            let old_pose = v.pose();
            v.correction = c.compose(v.correction);
            out.push(PoseCorrection { vertex: id, old_pose, new_pose: v.pose() });
        }
        // Future odometry extends each robot's newest vertex, so the running
        // frame adopts that vertex's (possibly just updated) correction.
        for robot in 0..self.robots.len() {
            if let Some(v) = self.vertices.iter().rev().find(|v| v.robot == robot) {
                self.robots[robot].frame = v.correction;
            }
        }
        Ok(out)
    }

    /// Repair the belief map after corrections: erase everything the moved
    /// vertices had previously rendered, then re-render every vertex's scan
    /// at its current estimated pose. Scans are regenerated from ground
    /// truth at the vertices' true poses, exactly as they were first taken.
    pub fn replay_map(
        &self,
        belief: &mut OccupancyGrid,
        truth: &OccupancyGrid,
        laser: &LaserModel,
        corrections: &[PoseCorrection],
    ) {
        for c in corrections {
            let v = &self.vertices[c.vertex];
            let scan = cast_scan(truth, v.true_pose, laser);
            for (ix, iy) in scan_footprint(belief, c.old_pose, &scan) {
                belief.reset_unknown(ix, iy);
            }
        }
        for v in &self.vertices {
            let scan = cast_scan(truth, v.true_pose, laser);
            integrate_scan(belief, v.pose(), &scan);
        }
    }
}
