//! `discipline`: command-line front end for the plate-discipline pipeline.
//!
//! The subcommands cover the full flow: `ingest` raw pitch CSVs into a
//! ball dataset, `build-index` the per-category neighbor indexes, `score`
//! balls against them, `evaluate` probability quality over a k sweep, and
//! publish `leaderboard` and `join-stats` tables. `synth` generates a
//! dataset with known swing probabilities for testing and benchmarks.
//!
//! Every command is deterministic given its inputs, configuration, and
//! seed. Configuration comes from an optional TOML file; flags override
//! file values. Exit codes: 0 success, 1 usage or configuration error,
//! 2 data or schema error, 3 internal invariant violation.

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use discipline_core::aggregate::{
    self, Direction, Metric, QualifyRule, Role,
};
use discipline_core::config::ScalingMode;
use discipline_core::dataset;
use discipline_core::evaluation::{k_selection_study, write_calibration_csv};
use discipline_core::ingest::{build_ball_dataset, parse_statcast_csvs};
use discipline_core::knn::persist::{load_index_set, save_index_set};
use discipline_core::knn::{score_dataset, IndexSet, NeighborIndex};
use discipline_core::synth::{generate, SynthConfig};
use discipline_core::{Error, PipelineConfig, PitchCategory, Result};

#[derive(Parser)]
#[command(
    name = "discipline",
    version,
    about = "Plate-discipline scoring over pitch tracking data",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse raw pitch CSVs into a ball dataset
    Ingest(IngestArgs),
    /// Build per-category neighbor indexes from a ball dataset
    BuildIndex(BuildIndexArgs),
    /// Score a ball dataset against saved indexes
    Score(ScoreArgs),
    /// Brier score and calibration curve over a sweep of k values
    Evaluate(EvaluateArgs),
    /// Rank player seasons by a score metric
    Leaderboard(LeaderboardArgs),
    /// Join player summaries with an external season-stats file
    JoinStats(JoinStatsArgs),
    /// Generate a synthetic dataset with known swing probabilities
    Synth(SynthArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// Pipeline configuration file (TOML); flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<PipelineConfig> {
        match &self.config {
            Some(path) => PipelineConfig::load(path),
            None => Ok(PipelineConfig::default()),
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    /// Raw pitch CSV exports, read in order as one stream
    #[arg(required = true, value_name = "CSV")]
    inputs: Vec<PathBuf>,
    /// Season filter: a year (2024) or inclusive range (2021-2023)
    #[arg(long, value_parser = parse_seasons, value_name = "RANGE")]
    seasons: Option<RangeInclusive<i32>>,
    /// Output ball dataset path
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct BuildIndexArgs {
    /// Ball dataset to index (training balls)
    #[arg(value_name = "DATASET")]
    dataset: PathBuf,
    /// Directory for the index files, one per category
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Default neighborhood size stored in the index
    #[arg(long)]
    k: Option<usize>,
    /// Feature scaling: zscore or raw
    #[arg(long, value_parser = from_str_arg::<ScalingMode>)]
    scaling: Option<ScalingMode>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct ScoreArgs {
    /// Ball dataset to score
    #[arg(value_name = "DATASET")]
    dataset: PathBuf,
    /// Directory holding the index files
    #[arg(long, value_name = "DIR")]
    indexes: PathBuf,
    /// Neighborhood size, overriding each index's stored default
    #[arg(long)]
    k: Option<usize>,
    /// Output scored CSV path
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Ball dataset with observed outcomes to evaluate against
    #[arg(value_name = "DATASET")]
    dataset: PathBuf,
    /// Directory holding the index files
    #[arg(long, value_name = "DIR")]
    indexes: PathBuf,
    /// Comma-separated k values to sweep (default: the configured k)
    #[arg(long, value_delimiter = ',', value_name = "K,K,...")]
    k: Vec<usize>,
    /// Number of equal-width calibration bins
    #[arg(long)]
    bins: Option<usize>,
    /// Output calibration CSV path
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct LeaderboardArgs {
    /// Scored ball CSV
    #[arg(value_name = "SCORED")]
    scored: PathBuf,
    /// batter or pitcher
    #[arg(long, value_parser = from_str_arg::<Role>, default_value = "batter")]
    role: Role,
    /// Ranking metric: ds, ads, or ps
    #[arg(long, value_parser = from_str_arg::<Metric>, default_value = "ds")]
    metric: Metric,
    /// Restrict to one pitch category: fastball, breaking_ball, offspeed
    #[arg(long, value_parser = from_str_arg::<PitchCategory>)]
    category: Option<PitchCategory>,
    /// Keep one season only
    #[arg(long)]
    season: Option<i32>,
    /// Batter qualification: minimum plate appearances
    #[arg(long)]
    min_pa: Option<u64>,
    /// Pitcher qualification: minimum balls thrown in scope
    #[arg(long)]
    min_balls: Option<u64>,
    /// Number of rows to keep
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// desc (best first) or asc
    #[arg(long, value_parser = from_str_arg::<Direction>, default_value = "desc")]
    direction: Direction,
    /// Also write the leaderboard as CSV
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct JoinStatsArgs {
    /// Scored ball CSV
    #[arg(value_name = "SCORED")]
    scored: PathBuf,
    /// External season-stats CSV (walk, strikeout, chase rates)
    #[arg(long, value_name = "FILE")]
    stats: PathBuf,
    /// batter or pitcher
    #[arg(long, value_parser = from_str_arg::<Role>, default_value = "batter")]
    role: Role,
    /// Keep one season only (required when the scored file spans several)
    #[arg(long)]
    season: Option<i32>,
    /// Batter qualification: minimum plate appearances
    #[arg(long)]
    min_pa: Option<u64>,
    /// Pitcher qualification: minimum balls thrown
    #[arg(long)]
    min_balls: Option<u64>,
    /// Output directory for joined.csv and correlations.csv
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct SynthArgs {
    /// Training balls to generate
    #[arg(long, default_value_t = 200_000)]
    train: usize,
    /// Query balls to generate
    #[arg(long, default_value_t = 10_000)]
    queries: usize,
    /// Generator seed (default: the configured seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for train.csv and queries.csv
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

/// clap value parser backed by the type's `FromStr`.
fn from_str_arg<T>(s: &str) -> std::result::Result<T, String>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    T::from_str(s).map_err(|e| e.to_string())
}

/// `2024` or `2021-2023`, inclusive on both ends.
fn parse_seasons(s: &str) -> std::result::Result<RangeInclusive<i32>, String> {
    let year = |t: &str| {
        t.trim()
            .parse::<i32>()
            .map_err(|_| format!("{t:?} is not a year"))
    };
    match s.split_once('-') {
        None => {
            let y = year(s)?;
            Ok(y..=y)
        }
        Some((a, b)) => {
            let lo = year(a)?;
            let hi = year(b)?;
            if lo > hi {
                return Err(format!("season range {lo}-{hi} is reversed"));
            }
            Ok(lo..=hi)
        }
    }
}

/// Rounds for display, ties away from zero; files keep full precision.
fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::BuildIndex(args) => cmd_build_index(args),
        Command::Score(args) => cmd_score(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Leaderboard(args) => cmd_leaderboard(args),
        Command::JoinStats(args) => cmd_join_stats(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let cfg = args.config.load()?;
    cfg.validate()?;
    let (pitches, parse) = parse_statcast_csvs(&args.inputs, args.seasons.as_ref())?;
    let (balls, report) = build_ball_dataset(&pitches, &cfg.zone, &cfg.categories, parse)?;
    dataset::write_ball_dataset(&args.out, &balls)?;
    println!("{report}");
    println!("dataset: {}", args.out.display());
    Ok(())
}

fn cmd_build_index(args: BuildIndexArgs) -> Result<()> {
    let mut cfg = args.config.load()?;
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(scaling) = args.scaling {
        cfg.scaling = scaling;
    }
    cfg.validate()?;

    let balls = dataset::read_ball_dataset(&args.dataset)?;
    let mut set = IndexSet::new();
    for category in PitchCategory::ALL {
        let members: Vec<_> = balls
            .iter()
            .filter(|b| b.category == category)
            .cloned()
            .collect();
        let index = NeighborIndex::build(&members, category, cfg.scaling, cfg.k)?;
        println!("{category}: {} balls indexed", index.len());
        set.insert(index);
    }
    save_index_set(&set, &args.out)?;
    println!("indexes: {} (k = {})", args.out.display(), cfg.k);
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let cfg = args.config.load()?;
    cfg.validate()?;
    let set = load_index_set(&args.indexes)?;
    let balls = dataset::read_ball_dataset(&args.dataset)?;
    let scored = score_dataset(&set, &balls, args.k)?;
    dataset::write_scored_dataset(&args.out, &scored)?;
    match args.k {
        Some(k) => println!("scored {} balls at k = {k}", scored.len()),
        None => println!("scored {} balls at each index's default k", scored.len()),
    }
    println!("scores: {}", args.out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let mut cfg = args.config.load()?;
    if let Some(bins) = args.bins {
        cfg.calibration_bins = bins;
    }
    cfg.validate()?;
    let ks = if args.k.is_empty() {
        vec![cfg.k]
    } else {
        args.k.clone()
    };
    let set = load_index_set(&args.indexes)?;
    let balls = dataset::read_ball_dataset(&args.dataset)?;
    let reports = k_selection_study(&set, &balls, &ks, cfg.calibration_bins)?;
    write_calibration_csv(&args.out, &reports)?;
    for report in &reports {
        println!(
            "k = {:>4}   brier = {:.4}   n = {}",
            report.k, report.brier, report.n
        );
    }
    println!("calibration: {}", args.out.display());
    Ok(())
}

/// Qualification rule for one role. Each role has its own threshold flag;
/// the other role's flag is rejected rather than silently ignored.
fn qualification_rule(
    role: Role,
    min_pa: Option<u64>,
    min_balls: Option<u64>,
    category: Option<PitchCategory>,
    cfg: &PipelineConfig,
) -> Result<QualifyRule> {
    match role {
        Role::Batter => {
            if min_balls.is_some() {
                return Err(Error::Parameter(
                    "--min-balls qualifies pitchers; use --min-pa for batters".into(),
                ));
            }
            Ok(QualifyRule::MinPlateAppearances(
                min_pa.unwrap_or(cfg.qualify.min_pa),
            ))
        }
        Role::Pitcher => {
            if min_pa.is_some() {
                return Err(Error::Parameter(
                    "--min-pa qualifies batters; use --min-balls for pitchers".into(),
                ));
            }
            Ok(QualifyRule::MinBalls {
                min: min_balls.unwrap_or(cfg.qualify.min_pitcher_balls),
                category,
            })
        }
    }
}

fn cmd_leaderboard(args: LeaderboardArgs) -> Result<()> {
    let cfg = args.config.load()?;
    cfg.validate()?;
    let rule = qualification_rule(args.role, args.min_pa, args.min_balls, args.category, &cfg)?;
    let scored = dataset::read_scored_dataset(&args.scored)?;
    let mut summaries = aggregate::summarize(&scored, args.role);
    if let Some(season) = args.season {
        summaries.retain(|s| s.season == season);
    }
    let qualified = aggregate::qualify(&summaries, &rule);
    let rows = aggregate::leaderboard(
        &qualified,
        args.metric,
        args.category,
        args.direction,
        args.top,
    );

    if rows.is_empty() {
        println!("no qualified player seasons");
    } else {
        println!(
            "{:>4}  {:>9}  {:>6}  {:>5}  {:>6}  {:>9}",
            "rank",
            "player",
            "season",
            "pa",
            "balls",
            args.metric.as_str()
        );
        for row in &rows {
            println!(
                "{:>4}  {:>9}  {:>6}  {:>5}  {:>6}  {:>9.3}",
                row.rank,
                row.player,
                row.season,
                row.plate_appearances,
                row.balls,
                round3(row.value)
            );
        }
    }
    if let Some(out) = &args.out {
        aggregate::write_leaderboard_csv(out, &rows)?;
        println!("leaderboard: {}", out.display());
    }
    Ok(())
}

fn cmd_join_stats(args: JoinStatsArgs) -> Result<()> {
    let cfg = args.config.load()?;
    cfg.validate()?;
    let rule = qualification_rule(args.role, args.min_pa, args.min_balls, None, &cfg)?;
    let scored = dataset::read_scored_dataset(&args.scored)?;
    let mut summaries = aggregate::summarize(&scored, args.role);
    if let Some(season) = args.season {
        summaries.retain(|s| s.season == season);
    }
    let qualified = aggregate::qualify(&summaries, &rule);
    let stats = aggregate::read_external_stats(&args.stats)?;
    let outcome = aggregate::metric_join(&qualified, &stats)?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let joined_path = args.out.join("joined.csv");
    let corr_path = args.out.join("correlations.csv");
    aggregate::write_joined_csv(&joined_path, &outcome.rows)?;
    aggregate::write_correlations_csv(&corr_path, &outcome.correlations)?;

    println!(
        "joined {} player seasons ({} summaries unmatched, {} stat rows unmatched)",
        outcome.rows.len(),
        outcome.unmatched_summaries.len(),
        outcome.unmatched_stats.len()
    );
    for corr in &outcome.correlations {
        match corr.r {
            Some(r) => println!("{} vs {}: r = {:+.3} (n = {})", corr.metric, corr.stat, r, corr.n),
            None => println!("{} vs {}: r undefined (n = {})", corr.metric, corr.stat, corr.n),
        }
    }
    println!("join: {} and {}", joined_path.display(), corr_path.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = args.config.load()?;
    cfg.validate()?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let data = generate(&SynthConfig::new(args.train, args.queries, seed));

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let train_path = args.out.join("train.csv");
    let query_path = args.out.join("queries.csv");
    dataset::write_ball_dataset_with_truth(&train_path, &data.train, &data.train_truth)?;
    dataset::write_ball_dataset_with_truth(&query_path, &data.queries, &data.query_truth)?;
    println!(
        "synthetic data (seed {seed}): {} training balls, {} queries",
        data.train.len(),
        data.queries.len()
    );
    println!("datasets: {} and {}", train_path.display(), query_path.display());
    Ok(())
}
