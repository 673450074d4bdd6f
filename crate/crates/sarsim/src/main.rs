//! Command-line front end: run one mission, batch a seed range, or fold a
//! directory of reports into a comparison CSV.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sarsim::baselines::PolicyKind;
use sarsim::sim::report::{summarize_report, summary_csv, SummaryRow};
use sarsim::sim::{run_mission, MissionConfig};

#[derive(Parser)]
#[command(name = "sarsim", version, about = "Deterministic multi-robot search simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one mission and write its report.
    Run(RunArgs),
    /// Simulate a range of seeds and write one report per seed.
    Batch(BatchArgs),
    /// Summarize a directory of reports into a CSV.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Mission config file.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's policy.
    #[arg(long, value_parser = parse_policy)]
    policy: Option<PolicyKind>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    /// Mission config file.
    #[arg(long)]
    config: PathBuf,
    /// Seed range `a..b`, half-open: a, a+1, …, b−1.
    #[arg(long, value_parser = parse_seed_range)]
    seeds: (u64, u64),
    /// Directory for the per-seed reports (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Override the config's policy.
    #[arg(long, value_parser = parse_policy)]
    policy: Option<PolicyKind>,
}

#[derive(Args)]
struct CompareArgs {
    /// Directory of mission reports (every `*.json` file is read).
    #[arg(long)]
    dir: PathBuf,
    /// CSV destination.
    #[arg(long)]
    out: PathBuf,
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    PolicyKind::parse(s).ok_or_else(|| format!("unknown policy `{s}` (expected high|nbvp|rrt)"))
}

fn parse_seed_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected `a..b`, got `{s}`"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if a >= b {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Batch(args) => cmd_batch(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(
    path: &PathBuf,
    seed: Option<u64>,
    policy: Option<PolicyKind>,
) -> anyhow::Result<MissionConfig> {
    let mut cfg = MissionConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(policy) = policy {
        cfg.policy = policy;
    }
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.config, args.seed, args.policy)?;
    let report = run_mission(&cfg)?;
    let json = report.to_json();
    match args.out {
        Some(path) => fs::write(&path, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn cmd_batch(args: BatchArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.config, None, args.policy)?;
    fs::create_dir_all(&args.out)?;
    let mut rows = Vec::new();
    let (first, last) = args.seeds;
    for seed in first..last {
        let mut cfg = cfg.clone();
        cfg.seed = seed;
        let report = run_mission(&cfg)?;
        let json = report.to_json();
        let name = format!("report_{}_{}.json", cfg.policy.label().to_lowercase(), seed);
        fs::write(args.out.join(&name), &json)?;
        rows.push(summarize_report(&json)?);
    }
    print!("{}", aggregate(&rows));
    Ok(())
}

/// Mean and standard deviation (population) of each summary metric.
fn aggregate(rows: &[SummaryRow]) -> String {
    let n = rows.len() as f64;
    let mut out = format!("runs: {}\nmetric,mean,std\n", rows.len());
    let metrics: [(&str, fn(&SummaryRow) -> f64); 4] = [
        ("SST", |r| r.sst),
        ("epsilon", |r| r.epsilon),
        ("pct_victims", |r| r.pct_victims),
        ("pruned_fraction", |r| r.pruned_fraction),
    ];
    for (name, get) in metrics {
        let mean = rows.iter().map(|r| get(r)).sum::<f64>() / n;
        let var = rows.iter().map(|r| (get(r) - mean).powi(2)).sum::<f64>() / n;
        out.push_str(&format!("{name},{mean},{}\n", var.sqrt()));
    }
    out
}

fn cmd_compare(args: CompareArgs) -> anyhow::Result<()> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        anyhow::bail!("no .json reports in {}", args.dir.display());
    }
    let mut rows = Vec::new();
    for path in &paths {
        let json = fs::read_to_string(path)?;
        rows.push(summarize_report(&json)?);
    }
    fs::write(&args.out, summary_csv(&rows))?;
    Ok(())
}
