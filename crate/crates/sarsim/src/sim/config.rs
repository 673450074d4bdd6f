//! Mission configuration: a plain `key value` text file.
//!
//! ```text
//! # search mission
//! world worlds/two_room_10.world
//! policy high
//! robots 3
//! seed 7
//! time_limit 240
//! drift constant 0 0.02 0
//! loopclosure tick=800 verts=0..40 dx=0 dy=-0.3 dtheta=0 mode=ramp
//! ```
//!
//! Unknown keys are rejected with their line number. The world path is
//! resolved relative to the config file's directory. Every numeric parameter
//! has a default, so a minimal config is just a `world` line.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::baselines::PolicyKind;
use crate::geom::Pose2;
use crate::slam::DriftModel;
use crate::{Error, Result};

/// A scripted map correction: at `tick`, rigidly adjust pose-graph vertices
/// `first..=last` (clamped to the vertices that exist) by `delta` — uniformly,
/// or ramped from identity at `first` to the full delta at `last`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LoopClosureSpec {
    pub tick: u64,
    pub first: usize,
    pub last: usize,
    pub delta: Pose2,
    pub ramp: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MissionConfig {
    /// World file as written in the config.
    pub world: String,
    #[serde(skip)]
    pub world_path: PathBuf,
    pub policy: PolicyKind,
    pub robots: usize,
    pub seed: u64,
    /// Mission cutoff in simulated seconds.
    pub time_limit: f64,
    /// Simulation step in seconds.
    pub dt: f64,
    /// Seconds between allocation rounds.
    pub period: f64,
    /// Tree expansion attempts per tick.
    pub budget: usize,
    /// Tasks each robot draws per round.
    pub sample_size: usize,
    /// Meters between pose-graph vertices.
    pub spacing: f64,
    /// Maximum tree edge length (m).
    pub eta: f64,
    /// Laser range (m).
    pub beta: f64,
    /// Camera range (m).
    pub gamma: f64,
    /// Utility multiplier in the reward.
    pub lambda: f64,
    /// Frontier admission threshold on information gain.
    pub xi: f64,
    /// Frontier clustering bandwidth (m).
    pub bandwidth: f64,
    /// Coverage viewpoints kept per round.
    pub k: usize,
    /// Minimum visible disk area (m^2) for a coverage viewpoint.
    pub v_r_min: f64,
    /// Penalty seconds per undiscovered victim.
    pub p_max: f64,
    pub drift: DriftModel,
    pub loop_closures: Vec<LoopClosureSpec>,
}

impl Default for MissionConfig {
    fn default() -> MissionConfig {
        MissionConfig {
            world: String::new(),
            world_path: PathBuf::new(),
            policy: PolicyKind::High,
            robots: 1,
            seed: 0,
            time_limit: 300.0,
            dt: 0.1,
            period: 5.0,
            budget: 50,
            sample_size: 15,
            spacing: 0.5,
            eta: 1.0,
            beta: 4.0,
            gamma: 1.5,
            lambda: 2.0,
            xi: 0.15,
            bandwidth: 1.5,
            k: 20,
            v_r_min: PI * 0.25,
            p_max: 1000.0,
            drift: DriftModel::None,
            loop_closures: Vec::new(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid value '{s}' for '{key}'")))
}

/// Parse `key=value` tokens for the loopclosure line.
fn kv_token(line: usize, token: &str) -> Result<(&str, &str)> {
    token
        .split_once('=')
        .ok_or_else(|| Error::parse(line, format!("expected key=value, got '{token}'")))
}

impl MissionConfig {
    pub fn load(path: &Path) -> Result<MissionConfig> {
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        MissionConfig::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<MissionConfig> {
        let mut cfg = MissionConfig::default();
        let mut have_world = false;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap();
            let args: Vec<&str> = parts.collect();
            let one = |args: &[&str]| -> Result<String> {
                if args.len() != 1 {
                    return Err(Error::parse(
                        line_no,
                        format!("'{key}' expects one value, got {}", args.len()),
                    ));
                }
                Ok(args[0].to_string())
            };
            match key {
                "world" => {
                    let w = one(&args)?;
                    cfg.world_path = base_dir.join(&w);
                    cfg.world = w;
                    have_world = true;
                }
                "policy" => {
                    let p = one(&args)?;
                    cfg.policy = PolicyKind::parse(&p).ok_or_else(|| {
                        Error::parse(line_no, format!("unknown policy '{p}' (high|nbvp|rrt)"))
                    })?;
                }
                "robots" => cfg.robots = parse_num(line_no, key, &one(&args)?)?,
                "seed" => cfg.seed = parse_num(line_no, key, &one(&args)?)?,
                "time_limit" => cfg.time_limit = parse_num(line_no, key, &one(&args)?)?,
                "dt" => cfg.dt = parse_num(line_no, key, &one(&args)?)?,
                "period" => cfg.period = parse_num(line_no, key, &one(&args)?)?,
                "budget" => cfg.budget = parse_num(line_no, key, &one(&args)?)?,
                "sample_size" => cfg.sample_size = parse_num(line_no, key, &one(&args)?)?,
                "spacing" => cfg.spacing = parse_num(line_no, key, &one(&args)?)?,
                "eta" => cfg.eta = parse_num(line_no, key, &one(&args)?)?,
                "beta" => cfg.beta = parse_num(line_no, key, &one(&args)?)?,
                "gamma" => cfg.gamma = parse_num(line_no, key, &one(&args)?)?,
                "lambda" => cfg.lambda = parse_num(line_no, key, &one(&args)?)?,
                "xi" => cfg.xi = parse_num(line_no, key, &one(&args)?)?,
                "bandwidth" => cfg.bandwidth = parse_num(line_no, key, &one(&args)?)?,
                "k" => cfg.k = parse_num(line_no, key, &one(&args)?)?,
                "v_r_min" => cfg.v_r_min = parse_num(line_no, key, &one(&args)?)?,
                "p_max" => cfg.p_max = parse_num(line_no, key, &one(&args)?)?,
                "drift" => {
                    cfg.drift = match args.first().copied() {
                        Some("none") if args.len() == 1 => DriftModel::None,
                        Some("constant") if args.len() == 4 => DriftModel::Constant {
                            dx: parse_num(line_no, key, args[1])?,
                            dy: parse_num(line_no, key, args[2])?,
                            dtheta: parse_num(line_no, key, args[3])?,
                        },
                        Some("walk") if args.len() == 3 => DriftModel::RandomWalk {
                            sigma_xy: parse_num(line_no, key, args[1])?,
                            sigma_theta: parse_num(line_no, key, args[2])?,
                        },
                        _ => {
                            return Err(Error::parse(
                                line_no,
                                "drift takes: none | constant dx dy dtheta | walk sigma_xy sigma_theta",
                            ));
                        }
                    };
                }
                "loopclosure" => {
                    let mut tick: Option<u64> = None;
                    let mut verts: Option<(usize, usize)> = None;
                    let (mut dx, mut dy, mut dtheta) = (0.0, 0.0, 0.0);
                    let mut ramp = false;
                    for token in &args {
                        let (k, v) = kv_token(line_no, token)?;
                        match k {
                            "tick" => tick = Some(parse_num(line_no, k, v)?),
                            "verts" => {
                                let (a, b) = v.split_once("..").ok_or_else(|| {
                                    Error::parse(line_no, "verts expects a..b (inclusive)")
                                })?;
                                let a: usize = parse_num(line_no, k, a)?;
                                let b: usize = parse_num(line_no, k, b)?;
                                if a > b {
                                    return Err(Error::parse(line_no, "verts range is reversed"));
                                }
                                verts = Some((a, b));
                            }
                            "dx" => dx = parse_num(line_no, k, v)?,
                            "dy" => dy = parse_num(line_no, k, v)?,
                            "dtheta" => dtheta = parse_num(line_no, k, v)?,
                            "mode" => match v {
                                "ramp" => ramp = true,
                                "uniform" => ramp = false,
                                other => {
                                    return Err(Error::parse(
                                        line_no,
                                        format!("unknown mode '{other}' (uniform|ramp)"),
                                    ));
                                }
                            },
                            other => {
                                return Err(Error::parse(
                                    line_no,
                                    format!("unknown loopclosure field '{other}'"),
                                ));
                            }
                        }
                    }
                    let tick = tick
                        .ok_or_else(|| Error::parse(line_no, "loopclosure needs tick=<n>"))?;
                    let (first, last) = verts
                        .ok_or_else(|| Error::parse(line_no, "loopclosure needs verts=a..b"))?;
                    cfg.loop_closures.push(LoopClosureSpec {
                        tick,
                        first,
                        last,
                        delta: Pose2::new(dx, dy, dtheta),
                        ramp,
                    });
                }
                other => {
                    return Err(Error::parse(line_no, format!("unknown key '{other}'")));
                }
            }
        }

        if !have_world {
            return Err(Error::InvalidConfig("missing 'world' line".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive: [(&str, f64); 11] = [
            ("time_limit", self.time_limit),
            ("dt", self.dt),
            ("period", self.period),
            ("spacing", self.spacing),
            ("eta", self.eta),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("xi", self.xi),
            ("bandwidth", self.bandwidth),
            ("v_r_min", self.v_r_min),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.p_max < 0.0 || !self.p_max.is_finite() {
            return Err(Error::InvalidConfig("p_max must be non-negative".into()));
        }
        if self.robots == 0 {
            return Err(Error::InvalidConfig("robots must be at least 1".into()));
        }
        if self.budget == 0 || self.sample_size == 0 || self.k == 0 {
            return Err(Error::InvalidConfig(
                "budget, sample_size and k must be at least 1".into(),
            ));
        }
        if self.period < self.dt {
            return Err(Error::InvalidConfig("period must be at least one tick (dt)".into()));
        }
        Ok(())
    }

    /// Allocation cadence in ticks (at least one).
    pub fn period_ticks(&self) -> u64 {
        ((self.period / self.dt).round() as u64).max(1)
    }

    /// Mission cutoff in ticks.
    pub fn max_ticks(&self) -> u64 {
        (self.time_limit / self.dt).ceil() as u64
    }
}
