//! Season aggregation: per-player summaries, qualification, leaderboards,
//! and joins against external plate-discipline statistics.
//!
//! Summaries are computed per (player, season) with a category breakdown.
//! All means are over the player's scored balls, accumulated in stable_id
//! order with compensated sums, so aggregation is invariant to the order
//! the scored file arrived in and the overall mean recombines exactly from
//! the category means.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::kahan_sum;
use crate::types::{PitchCategory, ScoredBall};

/// Which participant a summary describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Batter,
    Pitcher,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Batter => "batter",
            Role::Pitcher => "pitcher",
        }
    }

    fn player_of(self, ball: &ScoredBall) -> i64 {
        match self {
            Role::Batter => ball.ball.batter,
            Role::Pitcher => ball.ball.pitcher,
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "batter" => Ok(Role::Batter),
            "pitcher" => Ok(Role::Pitcher),
            other => Err(Error::Parameter(format!(
                "unknown role `{other}` (expected batter or pitcher)"
            ))),
        }
    }
}

/// Mean scores over one group of balls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats {
    pub balls: u64,
    pub mean_p_s: f64,
    pub mean_ds: f64,
    pub mean_cq: f64,
    pub mean_ads: f64,
}

impl GroupStats {
    /// Means over balls taken in the order given. Callers pass stable_id
    /// order for reproducibility.
    fn compute(balls: &[&ScoredBall]) -> GroupStats {
        let n = balls.len() as f64;
        GroupStats {
            balls: balls.len() as u64,
            mean_p_s: kahan_sum(balls.iter().map(|b| b.p_s)) / n,
            mean_ds: kahan_sum(balls.iter().map(|b| b.ds)) / n,
            mean_cq: kahan_sum(balls.iter().map(|b| b.cq)) / n,
            mean_ads: kahan_sum(balls.iter().map(|b| b.ads)) / n,
        }
    }
}

/// One player's season line: plate appearances, overall means, and a
/// per-category breakdown (None where the player saw no such balls).
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerSeasonSummary {
    pub player: i64,
    pub role: Role,
    pub season: i32,
    /// Distinct plate appearances among this player's balls: for batters,
    /// PAs in which they were thrown a ball; for pitchers, PAs in which
    /// they threw one.
    pub plate_appearances: u64,
    pub overall: GroupStats,
    pub per_category: [Option<GroupStats>; 3],
}

impl PlayerSeasonSummary {
    /// Stats for a leaderboard scope: a category's breakdown, or overall.
    pub fn scope(&self, category: Option<PitchCategory>) -> Option<&GroupStats> {
        match category {
            None => Some(&self.overall),
            Some(c) => self.per_category[c.index()].as_ref(),
        }
    }
}

/// Groups scored balls into (player, season) summaries for one role.
/// Output is ordered by (season, player); input order does not matter.
pub fn summarize(scored: &[ScoredBall], role: Role) -> Vec<PlayerSeasonSummary> {
    let mut groups: BTreeMap<(i32, i64), Vec<&ScoredBall>> = BTreeMap::new();
    for ball in scored {
        groups
            .entry((ball.ball.season, role.player_of(ball)))
            .or_default()
            .push(ball);
    }

    groups
        .into_iter()
        .map(|((season, player), mut members)| {
            members.sort_by_key(|b| b.ball.stable_id);
            let pa: BTreeSet<(i64, i32)> = members
                .iter()
                .map(|b| (b.ball.game_pk, b.ball.at_bat_number))
                .collect();
            let mut per_category = [None, None, None];
            for category in PitchCategory::ALL {
                let subset: Vec<&ScoredBall> = members
                    .iter()
                    .copied()
                    .filter(|b| b.ball.category == category)
                    .collect();
                if !subset.is_empty() {
                    per_category[category.index()] = Some(GroupStats::compute(&subset));
                }
            }
            PlayerSeasonSummary {
                player,
                role,
                season,
                plate_appearances: pa.len() as u64,
                overall: GroupStats::compute(&members),
                per_category,
            }
        })
        .collect()
}

/// Inclusive qualification thresholds for leaderboards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualifyRule {
    /// Keep player-seasons with at least this many plate appearances.
    MinPlateAppearances(u64),
    /// Keep player-seasons with at least this many balls, overall or
    /// within one category.
    MinBalls {
        min: u64,
        category: Option<PitchCategory>,
    },
}

pub fn qualify(
    summaries: &[PlayerSeasonSummary],
    rule: &QualifyRule,
) -> Vec<PlayerSeasonSummary> {
    summaries
        .iter()
        .filter(|s| match rule {
            QualifyRule::MinPlateAppearances(min) => s.plate_appearances >= *min,
            QualifyRule::MinBalls { min, category } => s
                .scope(*category)
                .map(|g| g.balls >= *min)
                .unwrap_or(false),
        })
        .cloned()
        .collect()
}

/// Ranking metric for leaderboards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    MeanDs,
    MeanAds,
    MeanPs,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::MeanDs => "mean_ds",
            Metric::MeanAds => "mean_ads",
            Metric::MeanPs => "mean_p_s",
        }
    }

    fn of(self, stats: &GroupStats) -> f64 {
        match self {
            Metric::MeanDs => stats.mean_ds,
            Metric::MeanAds => stats.mean_ads,
            Metric::MeanPs => stats.mean_p_s,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ds" | "mean_ds" => Ok(Metric::MeanDs),
            "ads" | "mean_ads" => Ok(Metric::MeanAds),
            "ps" | "p_s" | "mean_p_s" => Ok(Metric::MeanPs),
            other => Err(Error::Parameter(format!(
                "unknown metric `{other}` (expected ds, ads, or p_s)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Desc,
    Asc,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desc" => Ok(Direction::Desc),
            "asc" => Ok(Direction::Asc),
            other => Err(Error::Parameter(format!(
                "unknown direction `{other}` (expected desc or asc)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderboardRow {
    pub rank: u32,
    pub player: i64,
    pub season: i32,
    pub plate_appearances: u64,
    pub balls: u64,
    pub value: f64,
}

/// Ranks summaries by a metric within a scope. Player-seasons with no
/// balls in the scope are skipped. Equal values order by ascending player
/// id, then season, so rankings are reproducible.
pub fn leaderboard(
    summaries: &[PlayerSeasonSummary],
    metric: Metric,
    category: Option<PitchCategory>,
    direction: Direction,
    top: usize,
) -> Vec<LeaderboardRow> {
    let mut entries: Vec<(&PlayerSeasonSummary, f64, u64)> = summaries
        .iter()
        .filter_map(|s| {
            s.scope(category)
                .map(|g| (s, metric.of(g), g.balls))
        })
        .collect();
    entries.sort_by(|a, b| {
        let value = match direction {
            Direction::Desc => b.1.total_cmp(&a.1),
            Direction::Asc => a.1.total_cmp(&b.1),
        };
        value
            .then(a.0.player.cmp(&b.0.player))
            .then(a.0.season.cmp(&b.0.season))
    });
    entries.truncate(top);
    entries
        .into_iter()
        .enumerate()
        .map(|(i, (s, value, balls))| LeaderboardRow {
            rank: (i + 1) as u32,
            player: s.player,
            season: s.season,
            plate_appearances: s.plate_appearances,
            balls,
            value,
        })
        .collect()
}

/// One row of an external season-stats file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalStats {
    pub player_id: Option<i64>,
    pub name: String,
    pub bb_pct: f64,
    pub k_pct: f64,
    pub o_swing_pct: f64,
    pub bb_per_k: f64,
}

/// Reads a season-stats CSV. Column headers are matched case-insensitively
/// with common aliases, so both raw exports ("Name", "BB%", "O-Swing%",
/// "BB/K", "PlayerId") and snake_case files work. The id column may be
/// empty on any row; the name column may not.
pub fn read_external_stats(path: &Path) -> Result<Vec<ExternalStats>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();

    let find = |aliases: &[&str]| -> Option<usize> {
        headers.iter().position(|h| {
            let h = h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase();
            aliases.contains(&h.as_str())
        })
    };
    let required = |aliases: &[&str], canonical: &str| -> Result<usize> {
        find(aliases).ok_or_else(|| Error::MissingColumn(canonical.to_string()))
    };

    let id_col = find(&["player_id", "playerid", "mlbamid", "mlbam_id", "xmlbamid"]);
    let name_col = required(&["name", "player_name"], "name")?;
    let bb_col = required(&["bb%", "bb_pct"], "bb_pct")?;
    let k_col = required(&["k%", "k_pct"], "k_pct")?;
    let oswing_col = required(&["o-swing%", "o_swing_pct", "oswing%"], "o_swing_pct")?;
    let bbk_col = required(&["bb/k", "bb_per_k"], "bb_per_k")?;

    let parse_stat = |record: &csv::StringRecord, col: usize, row: u64, field: &'static str| {
        let raw = record.get(col).unwrap_or("").trim();
        let raw = raw.strip_suffix('%').map(str::trim).unwrap_or(raw);
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Malformed {
                row,
                field,
                value: raw.to_string(),
            })
    };

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let row = i as u64 + 1;
        let name = record.get(name_col).unwrap_or("").trim().to_string();
        if name.is_empty() {
            return Err(Error::Malformed {
                row,
                field: "name",
                value: String::new(),
            });
        }
        let player_id = match id_col {
            Some(col) => {
                let raw = record.get(col).unwrap_or("").trim();
                if raw.is_empty() {
                    None
                } else {
                    Some(raw.parse::<i64>().map_err(|_| Error::Malformed {
                        row,
                        field: "player_id",
                        value: raw.to_string(),
                    })?)
                }
            }
            None => None,
        };
        rows.push(ExternalStats {
            player_id,
            name,
            bb_pct: parse_stat(&record, bb_col, row, "bb_pct")?,
            k_pct: parse_stat(&record, k_col, row, "k_pct")?,
            o_swing_pct: parse_stat(&record, oswing_col, row, "o_swing_pct")?,
            bb_per_k: parse_stat(&record, bbk_col, row, "bb_per_k")?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinedRow {
    pub player: i64,
    pub name: String,
    pub season: i32,
    pub plate_appearances: u64,
    pub balls: u64,
    pub mean_ds: f64,
    pub mean_ads: f64,
    pub mean_p_s: f64,
    pub bb_pct: f64,
    pub k_pct: f64,
    pub o_swing_pct: f64,
    pub bb_per_k: f64,
}

/// Pearson correlation between a pipeline metric and an external stat.
/// `r` is `None` when fewer than two rows joined or either side is
/// constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub metric: &'static str,
    pub stat: &'static str,
    pub n: usize,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinOutcome {
    pub rows: Vec<JoinedRow>,
    /// Players with summaries but no external stats row.
    pub unmatched_summaries: Vec<i64>,
    /// External rows that joined nothing, by name.
    pub unmatched_stats: Vec<String>,
    pub correlations: Vec<CorrelationRow>,
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = kahan_sum(xs.iter().copied()) / nf;
    let my = kahan_sum(ys.iter().copied()) / nf;
    let cov = kahan_sum(xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)));
    let vx = kahan_sum(xs.iter().map(|&x| (x - mx) * (x - mx)));
    let vy = kahan_sum(ys.iter().map(|&y| (y - my) * (y - my)));
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Joins one season's summaries against external stats on player id.
///
/// Stats rows without an id fall back to name resolution: if exactly one
/// id-bearing stats row shares the name, that id is used; several distinct
/// candidate ids is an error; none leaves the row unmatched. All summaries
/// must be from a single season, since external stat files are seasonal.
pub fn metric_join(
    summaries: &[PlayerSeasonSummary],
    stats: &[ExternalStats],
) -> Result<JoinOutcome> {
    let seasons: BTreeSet<i32> = summaries.iter().map(|s| s.season).collect();
    if seasons.len() > 1 {
        return Err(Error::Parameter(format!(
            "summaries span seasons {seasons:?}; join one season at a time"
        )));
    }
    let mut by_player: BTreeMap<i64, &PlayerSeasonSummary> = BTreeMap::new();
    for s in summaries {
        if by_player.insert(s.player, s).is_some() {
            return Err(Error::Parameter(format!(
                "player {} appears twice in the summaries",
                s.player
            )));
        }
    }

    // Name -> candidate ids, built from the id-bearing stats rows.
    let mut ids_by_name: BTreeMap<&str, BTreeSet<i64>> = BTreeMap::new();
    for stat in stats {
        if let Some(id) = stat.player_id {
            ids_by_name.entry(stat.name.as_str()).or_default().insert(id);
        }
    }

    let mut resolved: BTreeMap<i64, &ExternalStats> = BTreeMap::new();
    let mut unmatched_stats = Vec::new();
    for stat in stats {
        let id = match stat.player_id {
            Some(id) => id,
            None => match ids_by_name.get(stat.name.as_str()) {
                Some(ids) if ids.len() == 1 => *ids.iter().next().expect("len checked"),
                Some(ids) => {
                    return Err(Error::AmbiguousName {
                        name: stat.name.clone(),
                        ids: ids.iter().copied().collect(),
                    })
                }
                None => {
                    unmatched_stats.push(stat.name.clone());
                    continue;
                }
            },
        };
        if resolved.insert(id, stat).is_some() {
            return Err(Error::Parameter(format!(
                "player id {id} appears twice in the external stats"
            )));
        }
    }

    let mut rows = Vec::new();
    let mut unmatched_summaries = Vec::new();
    for (&player, summary) in &by_player {
        match resolved.get(&player) {
            Some(stat) => rows.push(JoinedRow {
                player,
                name: stat.name.clone(),
                season: summary.season,
                plate_appearances: summary.plate_appearances,
                balls: summary.overall.balls,
                mean_ds: summary.overall.mean_ds,
                mean_ads: summary.overall.mean_ads,
                mean_p_s: summary.overall.mean_p_s,
                bb_pct: stat.bb_pct,
                k_pct: stat.k_pct,
                o_swing_pct: stat.o_swing_pct,
                bb_per_k: stat.bb_per_k,
            }),
            None => unmatched_summaries.push(player),
        }
    }
    for (&id, stat) in &resolved {
        if !by_player.contains_key(&id) {
            unmatched_stats.push(stat.name.clone());
        }
    }

    let ds: Vec<f64> = rows.iter().map(|r| r.mean_ds).collect();
    let correlations = [
        ("bb_pct", rows.iter().map(|r| r.bb_pct).collect::<Vec<_>>()),
        ("k_pct", rows.iter().map(|r| r.k_pct).collect()),
        ("o_swing_pct", rows.iter().map(|r| r.o_swing_pct).collect()),
        ("bb_per_k", rows.iter().map(|r| r.bb_per_k).collect()),
    ]
    .into_iter()
    .map(|(stat, values)| CorrelationRow {
        metric: "mean_ds",
        stat,
        n: rows.len(),
        r: pearson(&ds, &values),
    })
    .collect();

    Ok(JoinOutcome {
        rows,
        unmatched_summaries,
        unmatched_stats,
        correlations,
    })
}

/// Writes summaries in long format: one row per (player, scope), scopes
/// being `overall` plus each category the player saw.
pub fn write_summaries_csv(path: &Path, summaries: &[PlayerSeasonSummary]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    writer
        .write_record([
            "player",
            "role",
            "season",
            "plate_appearances",
            "scope",
            "balls",
            "mean_p_s",
            "mean_ds",
            "mean_cq",
            "mean_ads",
        ])
        .map_err(|e| Error::csv(path, e))?;
    let mut write_scope = |s: &PlayerSeasonSummary, scope: &str, g: &GroupStats| {
        writer
            .write_record([
                s.player.to_string(),
                s.role.to_string(),
                s.season.to_string(),
                s.plate_appearances.to_string(),
                scope.to_string(),
                g.balls.to_string(),
                g.mean_p_s.to_string(),
                g.mean_ds.to_string(),
                g.mean_cq.to_string(),
                g.mean_ads.to_string(),
            ])
            .map_err(|e| Error::csv(path, e))
    };
    for s in summaries {
        write_scope(s, "overall", &s.overall)?;
        for category in PitchCategory::ALL {
            if let Some(g) = &s.per_category[category.index()] {
                write_scope(s, category.as_str(), g)?;
            }
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_leaderboard_csv(path: &Path, rows: &[LeaderboardRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    writer
        .write_record(["rank", "player", "season", "plate_appearances", "balls", "value"])
        .map_err(|e| Error::csv(path, e))?;
    for r in rows {
        writer
            .write_record([
                r.rank.to_string(),
                r.player.to_string(),
                r.season.to_string(),
                r.plate_appearances.to_string(),
                r.balls.to_string(),
                r.value.to_string(),
            ])
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_joined_csv(path: &Path, rows: &[JoinedRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    writer
        .write_record([
            "player",
            "name",
            "season",
            "plate_appearances",
            "balls",
            "mean_ds",
            "mean_ads",
            "mean_p_s",
            "bb_pct",
            "k_pct",
            "o_swing_pct",
            "bb_per_k",
        ])
        .map_err(|e| Error::csv(path, e))?;
    for r in rows {
        writer
            .write_record([
                r.player.to_string(),
                r.name.clone(),
                r.season.to_string(),
                r.plate_appearances.to_string(),
                r.balls.to_string(),
                r.mean_ds.to_string(),
                r.mean_ads.to_string(),
                r.mean_p_s.to_string(),
                r.bb_pct.to_string(),
                r.k_pct.to_string(),
                r.o_swing_pct.to_string(),
                r.bb_per_k.to_string(),
            ])
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_correlations_csv(path: &Path, correlations: &[CorrelationRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    writer
        .write_record(["metric", "stat", "n", "r"])
        .map_err(|e| Error::csv(path, e))?;
    for c in correlations {
        writer
            .write_record([
                c.metric.to_string(),
                c.stat.to_string(),
                c.n.to_string(),
                c.r.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
