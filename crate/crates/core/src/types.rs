//! Core domain vocabulary: pitch categories, swing labels, the per-ball
//! record that flows through the pipeline, and the feature-vector layout
//! used by the nearest-neighbor estimator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of features in the similarity space.
pub const FEATURE_DIM: usize = 6;

/// Feature order inside [`BallRecord::features`]. The vertical location is
/// zone-normalized, not raw `plate_z`.
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "plate_x",
    "norm_plate_z",
    "release_speed",
    "release_spin_rate",
    "pfx_x",
    "pfx_z",
];

/// Broad pitch family, mapped from Statcast `pitch_type` codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PitchCategory {
    Fastball,
    BreakingBall,
    Offspeed,
}

impl PitchCategory {
    pub const ALL: [PitchCategory; 3] = [
        PitchCategory::Fastball,
        PitchCategory::BreakingBall,
        PitchCategory::Offspeed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PitchCategory::Fastball => "fastball",
            PitchCategory::BreakingBall => "breaking_ball",
            PitchCategory::Offspeed => "offspeed",
        }
    }

    /// Index into per-category arrays; follows the order of [`Self::ALL`].
    pub fn index(self) -> usize {
        match self {
            PitchCategory::Fastball => 0,
            PitchCategory::BreakingBall => 1,
            PitchCategory::Offspeed => 2,
        }
    }
}

impl fmt::Display for PitchCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PitchCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fastball" => Ok(PitchCategory::Fastball),
            "breaking_ball" => Ok(PitchCategory::BreakingBall),
            "offspeed" => Ok(PitchCategory::Offspeed),
            other => Err(Error::Parameter(format!(
                "unknown pitch category `{other}` (expected fastball, breaking_ball, or offspeed)"
            ))),
        }
    }
}

/// Batter response to a pitch. `Swing` covers any offer at the ball,
/// including fouls and balls put in play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwingLabel {
    Take,
    Swing,
}

impl SwingLabel {
    pub fn is_swing(self) -> bool {
        matches!(self, SwingLabel::Swing)
    }

    /// Indicator value: 1.0 for a swing, 0.0 for a take.
    pub fn indicator(self) -> f64 {
        match self {
            SwingLabel::Take => 0.0,
            SwingLabel::Swing => 1.0,
        }
    }

    pub fn from_indicator(v: u8) -> Result<Self> {
        match v {
            0 => Ok(SwingLabel::Take),
            1 => Ok(SwingLabel::Swing),
            other => Err(Error::Parameter(format!(
                "swing indicator must be 0 or 1, got {other}"
            ))),
        }
    }
}

/// Probability that the league average batter swings, as estimated from
/// neighbor frequencies. Always within [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingProbability(f64);

impl SwingProbability {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(SwingProbability(p))
        } else {
            Err(Error::Internal(format!(
                "swing probability {p} outside [0, 1]"
            )))
        }
    }

    /// Empirical frequency `swings / k`.
    pub fn from_counts(swings: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if swings > k {
            return Err(Error::Internal(format!(
                "swing count {swings} exceeds neighborhood size {k}"
            )));
        }
        Ok(SwingProbability(swings as f64 / k as f64))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// One pitch that was classified as a ball, carrying everything the
/// estimator, scorer, and aggregator need downstream.
///
/// `stable_id` is the pitch's ordinal position in the original input stream.
/// It never changes once assigned, which makes neighbor tie-breaking and
/// file round-trips reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct BallRecord {
    pub stable_id: u64,
    pub season: i32,
    pub category: PitchCategory,
    /// Feature vector in [`FEATURE_NAMES`] order, unscaled.
    pub features: [f64; FEATURE_DIM],
    pub label: SwingLabel,
    /// Exit velocity (mph) when the ball was put in play and tracked.
    pub ev: Option<f64>,
    /// Launch angle (degrees) when the ball was put in play and tracked.
    pub la: Option<f64>,
    /// True when the pitch description says the ball was put in play.
    pub contact_in_play: bool,
    pub batter: i64,
    pub pitcher: i64,
    pub game_pk: i64,
    pub at_bat_number: i32,
}

/// A ball with its estimated swing probability and all derived scores.
/// Produced by batch scoring; the per-pitch unit of aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredBall {
    pub ball: BallRecord,
    /// Estimated league swing probability for this pitch.
    pub p_s: f64,
    /// Discipline score: positive for a take, negative for a swing, with
    /// magnitude equal to the estimated probability of the opposite choice.
    pub ds: f64,
    pub ev_score: f64,
    pub la_score: f64,
    /// Contact quality: `ev_score * la_score` when the ball was put in play,
    /// else 0.
    pub cq: f64,
    /// Adjusted discipline score: `ds + cq`.
    pub ads: f64,
    /// Set when the description says in-play but exit velocity or launch
    /// angle was not tracked; `cq` is 0 for such pitches.
    pub cq_anomaly: bool,
}
