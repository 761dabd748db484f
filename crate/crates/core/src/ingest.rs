//! Statcast CSV ingestion: parsing, swing labeling, geometric ball
//! classification, and construction of the per-ball dataset.
//!
//! # Column contract
//!
//! A Statcast export may carry any number of columns; extras are ignored.
//! These must be present (a missing column is a fatal schema error):
//!
//! | column             | use                                      |
//! |--------------------|------------------------------------------|
//! | plate_x            | horizontal location at the plate, ft     |
//! | plate_z            | vertical location at the plate, ft       |
//! | sz_top, sz_bot     | batter's zone bounds, ft                 |
//! | release_speed      | mph                                      |
//! | release_spin_rate  | rpm                                      |
//! | pfx_x, pfx_z       | movement, ft                             |
//! | pitch_type         | two-letter code, may be empty            |
//! | description        | pitch outcome, drives the swing label    |
//! | launch_speed       | exit velocity, empty unless tracked      |
//! | launch_angle       | degrees, empty unless tracked            |
//! | batter, pitcher    | MLBAM ids                                |
//! | game_pk            | game id                                  |
//! | at_bat_number      | plate-appearance ordinal within the game |
//! | game_date          | YYYY-MM-DD                               |
//!
//! # Row rejection
//!
//! Rows are dropped individually, never fatally, and counted by reason:
//!
//! * `untracked`: any of the eight tracking fields is empty. Matches the
//!   small fraction of pitches the tracking system misses.
//! * `malformed`: a value that exists but does not parse (bad number, bad
//!   date, empty description).
//! * `invalid`: parses but violates a physical invariant (zone top not
//!   above bottom, nonpositive speed, negative spin).
//!
//! An unknown pitch description is a fatal error, not a reject: it means
//! the label table is out of date, and silently guessing would corrupt
//! every downstream probability.

use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::path::Path;

use chrono::{Datelike, NaiveDate};

use crate::config::{CategoryMap, ZoneGeometry};
use crate::error::{Error, Result};
use crate::types::{BallRecord, PitchCategory, SwingLabel};

/// Columns that must exist in every input file, in reporting order.
pub const REQUIRED_COLUMNS: [&str; 17] = [
    "plate_x",
    "plate_z",
    "sz_top",
    "sz_bot",
    "release_speed",
    "release_spin_rate",
    "pfx_x",
    "pfx_z",
    "pitch_type",
    "description",
    "launch_speed",
    "launch_angle",
    "batter",
    "pitcher",
    "game_pk",
    "at_bat_number",
    "game_date",
];

/// One fully tracked pitch. Construction through [`parse_statcast_csv`]
/// guarantees every tracking field is present and finite, `sz_top > sz_bot`,
/// and `release_speed > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPitch {
    /// Ordinal of the source row within the input stream, counting every
    /// data row (rejected ones included) so ids survive filter changes.
    pub row_ordinal: u64,
    pub season: i32,
    pub game_date: NaiveDate,
    pub plate_x: f64,
    pub plate_z: f64,
    pub sz_top: f64,
    pub sz_bot: f64,
    pub release_speed: f64,
    pub release_spin_rate: f64,
    pub pfx_x: f64,
    pub pfx_z: f64,
    pub pitch_type: String,
    pub description: String,
    pub launch_speed: Option<f64>,
    pub launch_angle: Option<f64>,
    pub batter: i64,
    pub pitcher: i64,
    pub game_pk: i64,
    pub at_bat_number: i32,
}

/// Row-level accounting for one parse pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub total_rows: u64,
    pub parsed: u64,
    pub untracked: u64,
    pub malformed: u64,
    pub invalid: u64,
    pub season_filtered: u64,
}

impl ParseReport {
    /// Report for pitches that never went through CSV parsing, e.g.
    /// synthetic data built in memory.
    pub fn synthetic(n: u64) -> Self {
        ParseReport {
            total_rows: n,
            parsed: n,
            ..Default::default()
        }
    }

    /// Every row is accounted for exactly once.
    pub fn balanced(&self) -> bool {
        self.total_rows
            == self.parsed + self.untracked + self.malformed + self.invalid + self.season_filtered
    }

    pub fn merge(&mut self, other: &ParseReport) {
        self.total_rows += other.total_rows;
        self.parsed += other.parsed;
        self.untracked += other.untracked;
        self.malformed += other.malformed;
        self.invalid += other.invalid;
        self.season_filtered += other.season_filtered;
    }
}

/// Funnel accounting for a full ingest: parse rejects, then what became of
/// every tracked pitch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub total_rows: u64,
    pub season_filtered: u64,
    pub untracked: u64,
    pub malformed: u64,
    pub invalid: u64,
    /// Pitches with complete tracking data, in scope.
    pub tracked: u64,
    /// Tracked pitches that intersect the zone cross-section.
    pub non_balls: u64,
    /// Balls whose pitch_type code is absent from the category table.
    pub uncategorizable: u64,
    /// Balls kept, indexed by [`PitchCategory::index`].
    pub balls_by_category: [u64; 3],
    /// Balls described as in play but missing exit velocity or launch
    /// angle; kept, with contact quality forced to 0.
    pub untracked_contact: u64,
}

impl IngestReport {
    pub fn balls_total(&self) -> u64 {
        self.balls_by_category.iter().sum()
    }

    /// Tracked share of in-scope rows.
    pub fn tracked_fraction(&self) -> f64 {
        let in_scope = self.total_rows - self.season_filtered;
        if in_scope == 0 {
            return 0.0;
        }
        self.tracked as f64 / in_scope as f64
    }
}

impl std::fmt::Display for IngestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "rows read:        {:>12}", self.total_rows)?;
        writeln!(f, "  out of season:  {:>12}", self.season_filtered)?;
        writeln!(f, "  untracked:      {:>12}", self.untracked)?;
        writeln!(f, "  malformed:      {:>12}", self.malformed)?;
        writeln!(f, "  invalid:        {:>12}", self.invalid)?;
        writeln!(
            f,
            "tracked:          {:>12}   ({:.2}% of in-scope rows)",
            self.tracked,
            100.0 * self.tracked_fraction()
        )?;
        writeln!(f, "  not balls:      {:>12}", self.non_balls)?;
        writeln!(f, "  uncategorized:  {:>12}", self.uncategorizable)?;
        writeln!(f, "balls kept:       {:>12}", self.balls_total())?;
        for cat in PitchCategory::ALL {
            writeln!(
                f,
                "  {:<14}  {:>12}",
                format!("{cat}:"),
                self.balls_by_category[cat.index()]
            )?;
        }
        write!(
            f,
            "in play, contact untracked: {}",
            self.untracked_contact
        )
    }
}

/// Swing label for a pitch description. The table is exhaustive over the
/// descriptions this pipeline accepts; anything else is an error.
pub fn derive_swing_label(description: &str) -> Result<SwingLabel> {
    match description {
        "swinging_strike"
        | "swinging_strike_blocked"
        | "foul"
        | "foul_tip"
        | "hit_into_play"
        | "missed_bunt"
        | "foul_bunt"
        | "bunt_foul_tip" => Ok(SwingLabel::Swing),
        "ball" | "called_strike" | "blocked_ball" | "pitchout" | "hit_by_pitch" => {
            Ok(SwingLabel::Take)
        }
        other => Err(Error::UnknownDescription(other.to_string())),
    }
}

/// Description value that marks a ball put in play.
pub const IN_PLAY_DESCRIPTION: &str = "hit_into_play";

/// True when the ball's circular cross-section misses the zone rectangle
/// entirely: the center is more than `half_width + radius` off the plate's
/// midline, or more than `radius` above the zone top or below the bottom.
/// Grazing contact (exact tangency) counts as intersecting, so it is not
/// a ball.
pub fn classify_ball(
    plate_x: f64,
    plate_z: f64,
    sz_top: f64,
    sz_bot: f64,
    zone: &ZoneGeometry,
) -> bool {
    let r = zone.ball_radius_ft;
    plate_x.abs() > zone.half_width_ft + r || plate_z > sz_top + r || plate_z < sz_bot - r
}

/// Vertical location rescaled to the batter's zone: 0 at the bottom edge,
/// 1 at the top. Values outside [0, 1] are meaningful (above/below zone).
pub fn normalize_vertical(plate_z: f64, sz_bot: f64, sz_top: f64) -> Result<f64> {
    let span = sz_top - sz_bot;
    if !(span > 0.0) {
        return Err(Error::DegenerateZone {
            top: sz_top,
            bot: sz_bot,
        });
    }
    Ok((plate_z - sz_bot) / span)
}

/// Missing-value convention for Statcast exports: empty cells, plus the
/// spellings pandas and R writers use for nulls.
fn is_missing(s: &str) -> bool {
    let t = s.trim();
    t.is_empty()
        || t.eq_ignore_ascii_case("na")
        || t.eq_ignore_ascii_case("nan")
        || t.eq_ignore_ascii_case("null")
        || t.eq_ignore_ascii_case("none")
}

fn parse_finite(s: &str) -> Option<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        _ => None,
    }
}

/// Integer parse tolerant of float-formatted ids ("665742.0"), which pandas
/// produces whenever an id column ever held a null.
fn parse_int(s: &str) -> Option<i64> {
    let t = s.trim();
    if let Ok(v) = t.parse::<i64>() {
        return Some(v);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 => Some(v as i64),
        _ => None,
    }
}

struct ColumnIndex {
    idx: [usize; REQUIRED_COLUMNS.len()],
}

impl ColumnIndex {
    fn from_headers(headers: &csv::StringRecord) -> Result<Self> {
        let mut by_name: HashMap<&str, usize> = HashMap::new();
        for (i, name) in headers.iter().enumerate() {
            let name = name.trim().trim_start_matches('\u{feff}');
            by_name.entry(name).or_insert(i);
        }
        let mut idx = [0usize; REQUIRED_COLUMNS.len()];
        for (slot, name) in REQUIRED_COLUMNS.iter().enumerate() {
            match by_name.get(name) {
                Some(&i) => idx[slot] = i,
                None => return Err(Error::MissingColumn((*name).to_string())),
            }
        }
        Ok(ColumnIndex { idx })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, column: &str) -> &'r str {
        let slot = REQUIRED_COLUMNS
            .iter()
            .position(|c| *c == column)
            .expect("column is in REQUIRED_COLUMNS");
        record.get(self.idx[slot]).unwrap_or("")
    }
}

/// Outcome of parsing one data row.
enum RowOutcome {
    Pitch(Box<RawPitch>),
    Untracked,
    Malformed,
    Invalid,
    OutOfSeason,
}

fn parse_row(
    cols: &ColumnIndex,
    record: &csv::StringRecord,
    ordinal: u64,
    seasons: Option<&RangeInclusive<i32>>,
) -> RowOutcome {
    let date_text = cols.get(record, "game_date");
    if is_missing(date_text) {
        return RowOutcome::Malformed;
    }
    let date_text = date_text.trim();
    let date_part = if date_text.len() > 10 {
        &date_text[..10]
    } else {
        date_text
    };
    let game_date = match NaiveDate::parse_from_str(date_part, "%Y-%m-%d") {
        Ok(d) => d,
        Err(_) => return RowOutcome::Malformed,
    };
    let season = game_date.year();
    if let Some(range) = seasons {
        if !range.contains(&season) {
            return RowOutcome::OutOfSeason;
        }
    }

    const TRACKING: [&str; 8] = [
        "plate_x",
        "plate_z",
        "sz_top",
        "sz_bot",
        "release_speed",
        "release_spin_rate",
        "pfx_x",
        "pfx_z",
    ];
    if TRACKING.iter().any(|c| is_missing(cols.get(record, c))) {
        return RowOutcome::Untracked;
    }
    let mut tracking = [0.0f64; 8];
    for (slot, c) in TRACKING.iter().enumerate() {
        match parse_finite(cols.get(record, c)) {
            Some(v) => tracking[slot] = v,
            None => return RowOutcome::Malformed,
        }
    }
    let [plate_x, plate_z, sz_top, sz_bot, release_speed, release_spin_rate, pfx_x, pfx_z] =
        tracking;
    if sz_top <= sz_bot || release_speed <= 0.0 || release_spin_rate < 0.0 {
        return RowOutcome::Invalid;
    }

    let description = cols.get(record, "description").trim().to_string();
    if description.is_empty() {
        return RowOutcome::Malformed;
    }
    let pitch_type = cols.get(record, "pitch_type").trim().to_string();

    let mut optional = [None::<f64>; 2];
    for (slot, c) in ["launch_speed", "launch_angle"].iter().enumerate() {
        let text = cols.get(record, c);
        if is_missing(text) {
            continue;
        }
        match parse_finite(text) {
            Some(v) => optional[slot] = Some(v),
            None => return RowOutcome::Malformed,
        }
    }
    let [launch_speed, launch_angle] = optional;

    let mut ints = [0i64; 3];
    for (slot, c) in ["batter", "pitcher", "game_pk"].iter().enumerate() {
        let text = cols.get(record, c);
        if is_missing(text) {
            return RowOutcome::Malformed;
        }
        match parse_int(text) {
            Some(v) => ints[slot] = v,
            None => return RowOutcome::Malformed,
        }
    }
    let [batter, pitcher, game_pk] = ints;
    let at_bat_number = {
        let text = cols.get(record, "at_bat_number");
        if is_missing(text) {
            return RowOutcome::Malformed;
        }
        match parse_int(text) {
            Some(v) if i32::try_from(v).is_ok() => v as i32,
            _ => return RowOutcome::Malformed,
        }
    };

    RowOutcome::Pitch(Box::new(RawPitch {
        row_ordinal: ordinal,
        season,
        game_date,
        plate_x,
        plate_z,
        sz_top,
        sz_bot,
        release_speed,
        release_spin_rate,
        pfx_x,
        pfx_z,
        pitch_type,
        description,
        launch_speed,
        launch_angle,
        batter,
        pitcher,
        game_pk,
        at_bat_number,
    }))
}

/// Parses one Statcast export. Row ordinals start at `ordinal_base` and
/// advance for every data row, so ids stay stable across reruns regardless
/// of how many rows get rejected.
pub fn parse_statcast_csv_from(
    path: &Path,
    seasons: Option<&RangeInclusive<i32>>,
    ordinal_base: u64,
) -> Result<(Vec<RawPitch>, ParseReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let cols = ColumnIndex::from_headers(&headers)?;

    let mut pitches = Vec::new();
    let mut report = ParseReport::default();
    let mut ordinal = ordinal_base;
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        report.total_rows += 1;
        match parse_row(&cols, &record, ordinal, seasons) {
            RowOutcome::Pitch(p) => {
                report.parsed += 1;
                pitches.push(*p);
            }
            RowOutcome::Untracked => report.untracked += 1,
            RowOutcome::Malformed => report.malformed += 1,
            RowOutcome::Invalid => report.invalid += 1,
            RowOutcome::OutOfSeason => report.season_filtered += 1,
        }
        ordinal += 1;
    }
    debug_assert!(report.balanced());
    Ok((pitches, report))
}

/// Parses one export with ordinals starting at 0.
pub fn parse_statcast_csv(
    path: &Path,
    seasons: Option<&RangeInclusive<i32>>,
) -> Result<(Vec<RawPitch>, ParseReport)> {
    parse_statcast_csv_from(path, seasons, 0)
}

/// Parses several exports as one stream: ordinals continue across files in
/// the order given, reports sum.
pub fn parse_statcast_csvs(
    paths: &[impl AsRef<Path>],
    seasons: Option<&RangeInclusive<i32>>,
) -> Result<(Vec<RawPitch>, ParseReport)> {
    let mut pitches = Vec::new();
    let mut report = ParseReport::default();
    let mut base = 0u64;
    for path in paths {
        let (mut part, part_report) =
            parse_statcast_csv_from(path.as_ref(), seasons, base)?;
        base += part_report.total_rows;
        report.merge(&part_report);
        pitches.append(&mut part);
    }
    Ok((pitches, report))
}

/// Labels, classifies, and normalizes tracked pitches into the ball
/// dataset. Output order follows input order; `stable_id` is the source
/// row ordinal.
///
/// The parse report from the upstream pass folds into the returned
/// [`IngestReport`] so the funnel accounts for every row. For in-memory
/// pitch sets, pass [`ParseReport::synthetic`].
pub fn build_ball_dataset(
    pitches: &[RawPitch],
    zone: &ZoneGeometry,
    categories: &CategoryMap,
    parse: ParseReport,
) -> Result<(Vec<BallRecord>, IngestReport)> {
    let mut report = IngestReport {
        total_rows: parse.total_rows,
        season_filtered: parse.season_filtered,
        untracked: parse.untracked,
        malformed: parse.malformed,
        invalid: parse.invalid,
        tracked: parse.parsed,
        ..Default::default()
    };
    if parse.parsed as usize != pitches.len() {
        return Err(Error::Internal(format!(
            "parse report says {} pitches but {} were supplied",
            parse.parsed,
            pitches.len()
        )));
    }

    let mut balls = Vec::new();
    for pitch in pitches {
        let label = derive_swing_label(&pitch.description)?;
        if !classify_ball(pitch.plate_x, pitch.plate_z, pitch.sz_top, pitch.sz_bot, zone) {
            report.non_balls += 1;
            continue;
        }
        let category = match categories.get(&pitch.pitch_type) {
            Some(c) => c,
            None => {
                report.uncategorizable += 1;
                continue;
            }
        };
        let norm_plate_z = normalize_vertical(pitch.plate_z, pitch.sz_bot, pitch.sz_top)?;
        let contact_in_play = pitch.description == IN_PLAY_DESCRIPTION;
        if contact_in_play && (pitch.launch_speed.is_none() || pitch.launch_angle.is_none()) {
            report.untracked_contact += 1;
        }
        report.balls_by_category[category.index()] += 1;
        balls.push(BallRecord {
            stable_id: pitch.row_ordinal,
            season: pitch.season,
            category,
            features: [
                pitch.plate_x,
                norm_plate_z,
                pitch.release_speed,
                pitch.release_spin_rate,
                pitch.pfx_x,
                pitch.pfx_z,
            ],
            label,
            ev: pitch.launch_speed,
            la: pitch.launch_angle,
            contact_in_play,
            batter: pitch.batter,
            pitcher: pitch.pitcher,
            game_pk: pitch.game_pk,
            at_bat_number: pitch.at_bat_number,
        });
    }
    Ok((balls, report))
}
