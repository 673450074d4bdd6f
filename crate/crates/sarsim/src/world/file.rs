//! Plain-text world format: a header of `key value` lines followed by an
//! ASCII map.
//!
//! ```text
//! resolution 0.1
//! geofence 0 0 10 10
//! seed 7
//! robot 1.5 1.5 0
//! victim 4.5 4.5
//! map
//! ##########
//! #........#
//! ##########
//! ```
//!
//! Rows use `#` for walls and `.` for traversable space. The first row after
//! `map` is the TOP of the map (largest y); the map origin is (0, 0).

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::geom::{Pose2, Vec2};
use crate::world::{CellState, OccupancyGrid};
use crate::{Error, Result};

/// Rectangular mission boundary (the search area robots are responsible for).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Geofence {
    pub min: Vec2,
    pub max: Vec2,
}

impl Geofence {
    pub fn area(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// A parsed world: ground-truth map plus mission entities.
#[derive(Debug, Clone)]
pub struct WorldFile {
    pub resolution: f64,
    pub geofence: Geofence,
    pub seed: u64,
    pub victims: Vec<Vec2>,
    pub robots: Vec<Pose2>,
    /// Ground truth; every cell is `Free` or `Occupied`.
    pub grid: OccupancyGrid,
}

impl WorldFile {
    pub fn load(path: &Path) -> Result<WorldFile> {
        let text = fs::read_to_string(path)?;
        WorldFile::parse(&text)
    }

    pub fn parse(text: &str) -> Result<WorldFile> {
        let mut resolution: Option<f64> = None;
        let mut geofence: Option<Geofence> = None;
        let mut seed: u64 = 0;
        let mut victims = Vec::new();
        let mut robots = Vec::new();
        let mut rows: Vec<(usize, &str)> = Vec::new();
        let mut in_map = false;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            if in_map {
                if raw.trim().is_empty() {
                    continue;
                }
                rows.push((line_no, raw.trim_end()));
                continue;
            }
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap();
            let args: Vec<&str> = parts.collect();
            let floats = |n: usize| -> Result<Vec<f64>> {
                if args.len() != n {
                    return Err(Error::parse(
                        line_no,
                        format!("'{key}' expects {n} numeric arguments, got {}", args.len()),
                    ));
                }
                args.iter()
                    .map(|a| {
                        a.parse::<f64>().map_err(|_| {
                            Error::parse(line_no, format!("invalid number '{a}'"))
                        })
                    })
                    .collect()
            };
            match key {
                "resolution" => {
                    let v = floats(1)?[0];
                    if !(v > 0.0) {
                        return Err(Error::parse(line_no, "resolution must be positive"));
                    }
                    resolution = Some(v);
                }
                "geofence" => {
                    let v = floats(4)?;
                    geofence = Some(Geofence {
                        min: Vec2::new(v[0], v[1]),
                        max: Vec2::new(v[2], v[3]),
                    });
                }
                "seed" => {
                    if args.len() != 1 {
                        return Err(Error::parse(line_no, "'seed' expects one integer"));
                    }
                    seed = args[0]
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("invalid seed '{}'", args[0])))?;
                }
                "victim" => {
                    let v = floats(2)?;
                    victims.push(Vec2::new(v[0], v[1]));
                }
                "robot" => {
                    let v = floats(3)?;
                    robots.push(Pose2::new(v[0], v[1], v[2]));
                }
                "map" => {
                    if !args.is_empty() {
                        return Err(Error::parse(line_no, "'map' takes no arguments"));
                    }
                    in_map = true;
                }
                other => {
                    return Err(Error::parse(line_no, format!("unknown key '{other}'")));
                }
            }
        }

        let resolution = resolution
            .ok_or_else(|| Error::InvalidWorld("missing 'resolution' line".into()))?;
        if rows.is_empty() {
            return Err(Error::InvalidWorld("missing or empty map section".into()));
        }
        let width = rows[0].1.chars().count();
        let height = rows.len();
        if width == 0 {
            return Err(Error::parse(rows[0].0, "empty map row"));
        }

        let mut grid = OccupancyGrid::new(width, height, resolution, Vec2::ZERO);
        for (row_idx, (line_no, row)) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::parse(
                    *line_no,
                    format!("map row has {} cells, expected {width}", row.chars().count()),
                ));
            }
            // First row is the top of the map.
            let iy = (height - 1 - row_idx) as i64;
            for (col, ch) in row.chars().enumerate() {
                let state = match ch {
                    '#' => CellState::Occupied,
                    '.' => CellState::Free,
                    other => {
                        return Err(Error::parse(
                            *line_no,
                            format!("invalid map character '{other}'"),
                        ));
                    }
                };
                grid.set(col as i64, iy, state);
            }
        }

        let extent = grid.extent();
        let geofence = geofence.unwrap_or(Geofence { min: Vec2::ZERO, max: extent });
        if !(geofence.max.x > geofence.min.x && geofence.max.y > geofence.min.y) {
            return Err(Error::InvalidWorld("geofence must have positive area".into()));
        }
        if geofence.min.x < 0.0
            || geofence.min.y < 0.0
            || geofence.max.x > extent.x + 1e-9
            || geofence.max.y > extent.y + 1e-9
        {
            return Err(Error::InvalidWorld(format!(
                "geofence exceeds the {} x {} m map",
                extent.x, extent.y
            )));
        }
        for v in &victims {
            if !geofence.contains(*v) {
                return Err(Error::InvalidWorld(format!(
                    "victim at ({}, {}) lies outside the geofence",
                    v.x, v.y
                )));
            }
            if grid.state_at(*v) != CellState::Free {
                return Err(Error::InvalidWorld(format!(
                    "victim at ({}, {}) is not on free space",
                    v.x, v.y
                )));
            }
        }
        for r in &robots {
            let p = r.position();
            if !geofence.contains(p) {
                return Err(Error::InvalidWorld(format!(
                    "robot at ({}, {}) lies outside the geofence",
                    p.x, p.y
                )));
            }
            if grid.state_at(p) != CellState::Free {
                return Err(Error::InvalidWorld(format!(
                    "robot at ({}, {}) is not on free space",
                    p.x, p.y
                )));
            }
        }

        Ok(WorldFile { resolution, geofence, seed, victims, robots, grid })
    }

    /// Area of the mission boundary in m^2.
    pub fn fence_area(&self) -> f64 {
        self.geofence.area()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
resolution 0.5
geofence 0 0 3 2
robot 0.75 0.75 0
victim 2.25 0.75
map
#.####
#....#
#..#.#
######
";

    #[test]
    fn parses_and_orients_rows_top_down() {
        let w = WorldFile::parse(TINY).unwrap();
        assert_eq!(w.grid.width, 6);
        assert_eq!(w.grid.height, 4);
        // Top row of the text is the highest y row of the grid.
        assert_eq!(w.grid.get(1, 3), CellState::Free);
        assert_eq!(w.grid.get(0, 3), CellState::Occupied);
        // Bottom text row maps to iy = 0.
        assert_eq!(w.grid.get(1, 0), CellState::Occupied);
        // Third text row sits at iy = 1 and holds the entities.
        assert_eq!(w.grid.get(1, 1), CellState::Free);
        assert_eq!(w.grid.get(3, 1), CellState::Occupied);
        assert_eq!(w.grid.get(4, 1), CellState::Free);
        assert_eq!(w.robots.len(), 1);
        assert_eq!(w.victims.len(), 1);
        assert_eq!(w.seed, 0);
        assert!((w.fence_area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_keys_with_line_numbers() {
        let bad = "resolution 0.5\nrobots 1 1 0\nmap\n..\n..\n";
        match WorldFile::parse(bad) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("robots"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_ragged_and_invalid_rows() {
        let ragged = "resolution 0.5\nmap\n...\n..\n";
        assert!(matches!(WorldFile::parse(ragged), Err(Error::Parse { line: 4, .. })));
        let bad_char = "resolution 0.5\nmap\n..\n.x\n";
        assert!(matches!(WorldFile::parse(bad_char), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn rejects_entities_off_free_space() {
        let wall_victim = "resolution 0.5\nvictim 0.25 0.25\nmap\n..\n#.\n";
        assert!(matches!(WorldFile::parse(wall_victim), Err(Error::InvalidWorld(_))));
        let outside = "resolution 0.5\ngeofence 0 0 0.5 1\nrobot 0.75 0.25 0\nmap\n..\n..\n";
        assert!(matches!(WorldFile::parse(outside), Err(Error::InvalidWorld(_))));
    }

    #[test]
    fn rejects_bad_geofence() {
        let too_big = "resolution 0.5\ngeofence 0 0 5 5\nmap\n..\n..\n";
        assert!(matches!(WorldFile::parse(too_big), Err(Error::InvalidWorld(_))));
        let empty = "resolution 0.5\ngeofence 1 1 1 1\nmap\n..\n..\n";
        assert!(matches!(WorldFile::parse(empty), Err(Error::InvalidWorld(_))));
    }

    #[test]
    fn missing_resolution_is_an_error() {
        assert!(matches!(
            WorldFile::parse("map\n..\n..\n"),
            Err(Error::InvalidWorld(_))
        ));
    }
}
