//! CSV persistence for ball datasets and scored datasets.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every value bit for bit. Readers ignore
//! columns they don't know (synthetic files carry an extra `p_true`, and
//! users may add their own annotations); missing required columns and
//! malformed values are errors, never guesses.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{BallRecord, PitchCategory, ScoredBall, SwingLabel};

const BALL_COLUMNS: [&str; 17] = [
    "stable_id",
    "season",
    "category",
    "plate_x",
    "norm_plate_z",
    "release_speed",
    "release_spin_rate",
    "pfx_x",
    "pfx_z",
    "swing",
    "ev",
    "la",
    "contact_in_play",
    "batter",
    "pitcher",
    "game_pk",
    "at_bat_number",
];

const SCORE_COLUMNS: [&str; 7] = ["p_s", "ds", "ev_score", "la_score", "cq", "ads", "cq_anomaly"];

/// Name of the true-probability column in synthetic datasets.
pub const TRUTH_COLUMN: &str = "p_true";

fn ball_fields(ball: &BallRecord) -> Vec<String> {
    vec![
        ball.stable_id.to_string(),
        ball.season.to_string(),
        ball.category.to_string(),
        ball.features[0].to_string(),
        ball.features[1].to_string(),
        ball.features[2].to_string(),
        ball.features[3].to_string(),
        ball.features[4].to_string(),
        ball.features[5].to_string(),
        (ball.label.indicator() as u8).to_string(),
        ball.ev.map(|v| v.to_string()).unwrap_or_default(),
        ball.la.map(|v| v.to_string()).unwrap_or_default(),
        u8::from(ball.contact_in_play).to_string(),
        ball.batter.to_string(),
        ball.pitcher.to_string(),
        ball.game_pk.to_string(),
        ball.at_bat_number.to_string(),
    ]
}

pub fn write_ball_dataset(path: &Path, balls: &[BallRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    writer
        .write_record(BALL_COLUMNS)
        .map_err(|e| Error::csv(path, e))?;
    for ball in balls {
        writer
            .write_record(ball_fields(ball))
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Ball dataset plus a parallel column of true swing probabilities, for
/// synthetic data where the generating surface is known.
pub fn write_ball_dataset_with_truth(
    path: &Path,
    balls: &[BallRecord],
    truth: &[f64],
) -> Result<()> {
    if balls.len() != truth.len() {
        return Err(Error::Internal(format!(
            "{} balls but {} truth values",
            balls.len(),
            truth.len()
        )));
    }
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header: Vec<&str> = BALL_COLUMNS.to_vec();
    header.push(TRUTH_COLUMN);
    writer
        .write_record(header)
        .map_err(|e| Error::csv(path, e))?;
    for (ball, p) in balls.iter().zip(truth) {
        let mut fields = ball_fields(ball);
        fields.push(p.to_string());
        writer
            .write_record(fields)
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_scored_dataset(path: &Path, scored: &[ScoredBall]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header: Vec<&str> = BALL_COLUMNS.to_vec();
    header.extend(SCORE_COLUMNS);
    writer
        .write_record(header)
        .map_err(|e| Error::csv(path, e))?;
    for s in scored {
        let mut fields = ball_fields(&s.ball);
        fields.push(s.p_s.to_string());
        fields.push(s.ds.to_string());
        fields.push(s.ev_score.to_string());
        fields.push(s.la_score.to_string());
        fields.push(s.cq.to_string());
        fields.push(s.ads.to_string());
        fields.push(u8::from(s.cq_anomaly).to_string());
        writer
            .write_record(fields)
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

struct Columns {
    by_name: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord, required: &[&str]) -> Result<Self> {
        let mut by_name = HashMap::new();
        for (i, name) in headers.iter().enumerate() {
            let name = name.trim().trim_start_matches('\u{feff}').to_string();
            by_name.entry(name).or_insert(i);
        }
        for name in required {
            if !by_name.contains_key(*name) {
                return Err(Error::MissingColumn((*name).to_string()));
            }
        }
        Ok(Columns { by_name })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, name: &str) -> &'r str {
        record.get(self.by_name[name]).unwrap_or("")
    }
}

fn field_err(row: u64, field: &'static str, value: &str) -> Error {
    Error::Malformed {
        row,
        field,
        value: value.to_string(),
    }
}

fn parse_ball(cols: &Columns, record: &csv::StringRecord, row: u64) -> Result<BallRecord> {
    let f64_field = |field: &'static str| -> Result<f64> {
        let raw = cols.get(record, field);
        raw.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| field_err(row, field, raw))
    };
    let i64_field = |field: &'static str| -> Result<i64> {
        let raw = cols.get(record, field);
        raw.trim().parse::<i64>().map_err(|_| field_err(row, field, raw))
    };
    let flag_field = |field: &'static str| -> Result<bool> {
        let raw = cols.get(record, field);
        match raw.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(field_err(row, field, raw)),
        }
    };
    let optional_f64 = |field: &'static str| -> Result<Option<f64>> {
        let raw = cols.get(record, field);
        if raw.trim().is_empty() {
            return Ok(None);
        }
        raw.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Some)
            .ok_or_else(|| field_err(row, field, raw))
    };

    let category_raw = cols.get(record, "category");
    let category: PitchCategory = category_raw
        .trim()
        .parse()
        .map_err(|_| field_err(row, "category", category_raw))?;
    let stable_id = {
        let raw = cols.get(record, "stable_id");
        raw.trim()
            .parse::<u64>()
            .map_err(|_| field_err(row, "stable_id", raw))?
    };
    let season = {
        let raw = cols.get(record, "season");
        raw.trim()
            .parse::<i32>()
            .map_err(|_| field_err(row, "season", raw))?
    };
    let label = if flag_field("swing")? {
        SwingLabel::Swing
    } else {
        SwingLabel::Take
    };
    let at_bat_number = {
        let raw = cols.get(record, "at_bat_number");
        raw.trim()
            .parse::<i32>()
            .map_err(|_| field_err(row, "at_bat_number", raw))?
    };

    Ok(BallRecord {
        stable_id,
        season,
        category,
        features: [
            f64_field("plate_x")?,
            f64_field("norm_plate_z")?,
            f64_field("release_speed")?,
            f64_field("release_spin_rate")?,
            f64_field("pfx_x")?,
            f64_field("pfx_z")?,
        ],
        label,
        ev: optional_f64("ev")?,
        la: optional_f64("la")?,
        contact_in_play: flag_field("contact_in_play")?,
        batter: i64_field("batter")?,
        pitcher: i64_field("pitcher")?,
        game_pk: i64_field("game_pk")?,
        at_bat_number,
    })
}

pub fn read_ball_dataset(path: &Path) -> Result<Vec<BallRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let cols = Columns::new(&headers, &BALL_COLUMNS)?;
    let mut balls = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        balls.push(parse_ball(&cols, &record, i as u64 + 1)?);
    }
    Ok(balls)
}

pub fn read_scored_dataset(path: &Path) -> Result<Vec<ScoredBall>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let mut required: Vec<&str> = BALL_COLUMNS.to_vec();
    required.extend(SCORE_COLUMNS);
    let cols = Columns::new(&headers, &required)?;
    let mut scored = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let row = i as u64 + 1;
        let ball = parse_ball(&cols, &record, row)?;
        let f64_field = |field: &'static str| -> Result<f64> {
            let raw = cols.get(&record, field);
            raw.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| field_err(row, field, raw))
        };
        let cq_anomaly = match cols.get(&record, "cq_anomaly").trim() {
            "0" => false,
            "1" => true,
            other => return Err(field_err(row, "cq_anomaly", other)),
        };
        scored.push(ScoredBall {
            ball,
            p_s: f64_field("p_s")?,
            ds: f64_field("ds")?,
            ev_score: f64_field("ev_score")?,
            la_score: f64_field("la_score")?,
            cq: f64_field("cq")?,
            ads: f64_field("ads")?,
            cq_anomaly,
        });
    }
    Ok(scored)
}

/// Reads the `p_true` column of a synthetic dataset, in row order.
pub fn read_truth_column(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let cols = Columns::new(&headers, &[TRUTH_COLUMN])?;
    let mut truth = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let raw = cols.get(&record, TRUTH_COLUMN);
        let v = raw
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| (0.0..=1.0).contains(v))
            .ok_or_else(|| field_err(i as u64 + 1, "p_true", raw))?;
        truth.push(v);
    }
    Ok(truth)
}
