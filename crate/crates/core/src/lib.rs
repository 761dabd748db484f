//! Plate-discipline analytics for Statcast pitch data.
//!
//! The pipeline ingests raw pitch exports, keeps the pitches whose flight
//! misses the strike zone entirely (balls), and asks of each one: how
//! often does the league swing at a pitch like this? That league swing
//! probability comes from an exact nearest-neighbor search over location,
//! velocity, spin, and movement. A batter's response is then scored
//! against it: laying off a tempting ball earns credit, chasing an
//! obvious one costs, and productive contact on a chased ball earns some
//! back. Season aggregates of these scores separate hitters who control
//! the zone from hitters who merely avoid strikeouts.
//!
//! Modules follow the pipeline stages:
//!
//! * [`ingest`]: CSV parsing, swing labels, ball classification
//! * [`knn`]: feature scaling, neighbor search, swing-probability
//!   estimation, index persistence
//! * [`scoring`]: per-pitch discipline and contact-quality scores
//! * [`evaluation`]: Brier score, calibration, neighborhood-size study
//! * [`aggregate`]: player-season summaries, leaderboards, external joins
//! * [`dataset`] / [`synth`]: dataset files and synthetic ground truth
//!
//! Everything is deterministic by construction: estimates do not depend
//! on training order or thread count, ties resolve by stable pitch ids,
//! and rebuilding an index from the same data reproduces the same bytes.

pub mod aggregate;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod knn;
pub mod scoring;
pub mod synth;
pub mod types;

pub use config::{PipelineConfig, ScalingMode, ZoneGeometry};
pub use error::{Error, Result};
pub use types::{BallRecord, PitchCategory, ScoredBall, SwingLabel, SwingProbability};
