//! Mission output: the JSON report document, the search-time metrics, and the
//! batch summary CSV.

use serde::{Deserialize, Serialize};

use crate::sim::config::MissionConfig;
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct VictimEvent {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    /// Mission time (s) of first detection.
    pub time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopClosureRecord {
    pub tick: u64,
    pub first: usize,
    pub last: usize,
    pub vertices: usize,
}

/// One assignment in a round, with every factor that produced its score.
#[derive(Debug, Clone, Serialize)]
pub struct RoundEntry {
    pub robot: usize,
    pub task: usize,
    pub kind: String,
    pub x: f64,
    pub y: f64,
    pub info: f64,
    pub weight: f64,
    pub utility: f64,
    pub distance: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundLog {
    pub tick: u64,
    pub time: f64,
    pub policy: String,
    /// Mapped area over geofence area — the weight schedule input.
    pub mapped_fraction: f64,
    pub w_f: f64,
    pub w_c: f64,
    /// Tasks offered to the allocator this round.
    pub tasks: usize,
    pub assignments: Vec<RoundEntry>,
    pub idle: Vec<usize>,
}

/// Per-tick area series; sample i describes the world after tick i, at
/// mission time (i + 1) · dt.
#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub dt: f64,
    pub explored: Vec<f64>,
    pub covered: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub sst: f64,
    /// Covered area per second over the whole mission (m²/s).
    pub epsilon: f64,
    pub pct_victims: f64,
    pub pruned_fraction: f64,
    pub nodes_created: u64,
    pub nodes_pruned: u64,
    pub explored_area: f64,
    pub covered_area: f64,
    /// Simulated seconds until the mission ended.
    pub duration: f64,
    pub victims_total: usize,
    pub victims_found: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MissionReport {
    pub format_version: u32,
    pub policy: String,
    pub seed: u64,
    pub world: String,
    pub robots: usize,
    pub metrics: Metrics,
    pub victims: Vec<VictimEvent>,
    pub loop_closures: Vec<LoopClosureRecord>,
    pub rounds: Vec<RoundLog>,
    pub series: Series,
    pub config: MissionConfig,
}

impl MissionReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization is total");
        s.push('\n');
        s
    }
}

/// Total search time: the detection times of found victims plus a fixed
/// penalty for each victim never found.
pub fn compute_sst(detection_times: &[f64], victims_total: usize, p_max: f64) -> f64 {
    assert!(p_max >= 0.0, "penalty must be non-negative");
    assert!(detection_times.len() <= victims_total, "more detections than victims");
    let found: f64 = detection_times.iter().sum();
    found + (victims_total - detection_times.len()) as f64 * p_max
}

/// Average area the camera swept per second of mission.
pub fn coverage_efficiency(covered_area: f64, duration: f64) -> f64 {
    assert!(duration > 0.0, "duration must be positive");
    covered_area / duration
}

pub fn pct_victims(found: usize, total: usize) -> f64 {
    if total == 0 {
        100.0
    } else {
        100.0 * found as f64 / total as f64
    }
}

/// One row of the batch summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: String,
    pub seed: u64,
    pub sst: f64,
    pub epsilon: f64,
    pub pct_victims: f64,
    pub pruned_fraction: f64,
}

/// Pull the summary fields back out of a serialized report.
pub fn summarize_report(json: &str) -> Result<SummaryRow> {
    #[derive(Deserialize)]
    struct Head {
        policy: String,
        seed: u64,
        metrics: MetricsHead,
    }
    #[derive(Deserialize)]
    struct MetricsHead {
        sst: f64,
        epsilon: f64,
        pct_victims: f64,
        pruned_fraction: f64,
    }
    let head: Head = serde_json::from_str(json)?;
    if head.policy.is_empty() {
        return Err(Error::InvalidConfig("report has an empty policy field".into()));
    }
    Ok(SummaryRow {
        policy: head.policy,
        seed: head.seed,
        sst: head.metrics.sst,
        epsilon: head.metrics.epsilon,
        pct_victims: head.metrics.pct_victims,
        pruned_fraction: head.metrics.pruned_fraction,
    })
}

/// Render the summary CSV, sorted by (policy, seed).
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut rows: Vec<&SummaryRow> = rows.iter().collect();
    rows.sort_by(|a, b| a.policy.cmp(&b.policy).then(a.seed.cmp(&b.seed)));
    let mut out = String::from("policy,seed,SST,epsilon,pct_victims,pruned_fraction\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.policy, r.seed, r.sst, r.epsilon, r.pct_victims, r.pruned_fraction
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn search_time_sums_detections_and_penalties() {
        // Every victim found: the penalty term vanishes.
        let times: Vec<f64> = vec![
            100.0, 150.0, 180.0, 200.0, 220.0, 250.0, 260.0, 280.0, 300.0, 230.0, 240.0, 227.0,
        ];
        assert_eq!(times.len(), 12);
        assert_eq!(compute_sst(&times, 12, 1000.0), 2637.0);
        // None found: pure penalty.
        assert_eq!(compute_sst(&[], 12, 1000.0), 12000.0);
        // One miss.
        let eleven: Vec<f64> = (0..11).map(|_| 2000.0 / 11.0).collect();
        assert!((compute_sst(&eleven, 12, 1000.0) - 3000.0).abs() < 1e-9);
        // No victims at all.
        assert_eq!(compute_sst(&[], 0, 1000.0), 0.0);
    }

    #[test]
    fn efficiency_is_area_over_duration() {
        assert_eq!(coverage_efficiency(90.0, 200.0), 0.45);
        assert_eq!(coverage_efficiency(0.0, 50.0), 0.0);
    }

    #[test]
    fn victim_percentage_handles_empty_missions() {
        assert_eq!(pct_victims(0, 0), 100.0);
        assert_eq!(pct_victims(0, 4), 0.0);
        assert_eq!(pct_victims(3, 4), 75.0);
        assert_eq!(pct_victims(4, 4), 100.0);
    }

    #[test]
    fn csv_is_sorted_by_policy_then_seed() {
        let rows = vec![
            SummaryRow {
                policy: "nbvp".into(),
                seed: 2,
                sst: 120.0,
                epsilon: 0.4,
                pct_victims: 100.0,
                pruned_fraction: 0.25,
            },
            SummaryRow {
                policy: "high".into(),
                seed: 7,
                sst: 90.5,
                epsilon: 0.45,
                pct_victims: 100.0,
                pruned_fraction: 0.05,
            },
            SummaryRow {
                policy: "high".into(),
                seed: 2,
                sst: 100.0,
                epsilon: 0.5,
                pct_victims: 50.0,
                pruned_fraction: 0.0,
            },
        ];
        let csv = summary_csv(&rows);
        let want = "policy,seed,SST,epsilon,pct_victims,pruned_fraction\n\
                    high,2,100,0.5,50,0\n\
                    high,7,90.5,0.45,100,0.05\n\
                    nbvp,2,120,0.4,100,0.25\n";
        assert_eq!(csv, want);
    }

    #[test]
    fn summary_survives_a_report_round_trip() {
        let json = r#"{
            "format_version": 1,
            "policy": "high",
            "seed": 9,
            "metrics": {
                "sst": 123.5,
                "epsilon": 0.31,
                "pct_victims": 83.33,
                "pruned_fraction": 0.041,
                "extra_future_field": true
            },
            "rounds": []
        }"#;
        let row = summarize_report(json).unwrap();
        assert_eq!(row.policy, "high");
        assert_eq!(row.seed, 9);
        assert_eq!(row.sst, 123.5);
        assert_eq!(row.epsilon, 0.31);
        assert_eq!(row.pct_victims, 83.33);
        assert_eq!(row.pruned_fraction, 0.041);
        assert!(summarize_report("{}").is_err());
    }
}
