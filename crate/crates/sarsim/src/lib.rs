//! Deterministic headless simulator and planning stack for multi-robot
//! search of unknown 2D environments.
//!
//! The crate couples a trinary occupancy-grid world model ([`world`]) with a
//! simulated pose-graph SLAM backend ([`slam`]), a planner that grows small
//! random trees rooted on pose-graph vertices ([`pgart`]), frontier and
//! coverage task filters ([`frontier`], [`coverage`]), and a hierarchical
//! information-gain task allocator ([`allocator`]). Two baseline policies
//! ([`baselines`]) and a mission engine ([`sim`]) sit on top so that search
//! policies can be compared on identical worlds and seeds.
//!
//! Everything is single-threaded and deterministic: the same world, config
//! and seed always produce byte-identical mission reports.

pub mod allocator;
pub mod baselines;
pub mod coverage;
pub mod error;
pub mod frontier;
pub mod geom;
pub mod pgart;
pub mod sim;
pub mod slam;
pub mod world;

pub use error::{Error, Result};
