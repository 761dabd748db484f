//! Synthetic ball datasets with a known swing-probability surface.
//!
//! Each category draws features from its own distributions and computes a
//! true swing probability from a smooth logistic surface over location,
//! velocity, and vertical movement; the swing label is a Bernoulli draw at
//! that probability. Because the surface is known, estimator output can be
//! compared against ground truth, and the irreducible part of any score
//! (the Bernoulli noise) can be separated from estimation error.
//!
//! Generation is sequential from a single seeded stream: the same config
//! always produces byte-identical datasets.

use std::ops::RangeInclusive;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::types::{BallRecord, PitchCategory, SwingLabel};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub train: usize,
    pub queries: usize,
    pub seed: u64,
    /// Seasons cycled across training records.
    pub train_seasons: RangeInclusive<i32>,
    /// Season stamped on every query record.
    pub query_season: i32,
}

impl SynthConfig {
    pub fn new(train: usize, queries: usize, seed: u64) -> Self {
        SynthConfig {
            train,
            queries,
            seed,
            train_seasons: 2021..=2023,
            query_season: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub train: Vec<BallRecord>,
    pub train_truth: Vec<f64>,
    pub queries: Vec<BallRecord>,
    pub query_truth: Vec<f64>,
}

/// Per-category feature distributions and surface coefficients.
struct CategoryModel {
    category: PitchCategory,
    /// Sampling weight; weights sum to 1 across models.
    weight: f64,
    speed: (f64, f64),
    spin: (f64, f64),
    pfx_x: (f64, f64),
    pfx_z: (f64, f64),
    /// Attraction center of the swing surface in (plate_x, norm_plate_z).
    center: (f64, f64),
    /// Location scales: how fast swing odds fall off the center.
    scale: (f64, f64),
    /// Logistic intercept at the center.
    b0: f64,
    /// Falloff per unit squared scaled distance.
    b1: f64,
    /// Velocity term: log-odds per 5 mph above the category's mean speed.
    bv: f64,
    /// Vertical-movement term: log-odds per foot above the category mean.
    bz: f64,
}

const MODELS: [CategoryModel; 3] = [
    CategoryModel {
        category: PitchCategory::Fastball,
        weight: 0.45,
        speed: (94.5, 2.2),
        spin: (2280.0, 160.0),
        pfx_x: (-0.3, 0.5),
        pfx_z: (1.25, 0.35),
        center: (0.0, 0.55),
        scale: (1.0, 0.9),
        b0: 0.75,
        b1: 0.55,
        bv: 0.4,
        bz: 0.4,
    },
    CategoryModel {
        category: PitchCategory::BreakingBall,
        weight: 0.35,
        speed: (84.5, 3.0),
        spin: (2520.0, 180.0),
        pfx_x: (0.3, 0.5),
        pfx_z: (0.05, 0.45),
        center: (0.1, 0.2),
        scale: (1.1, 1.0),
        b0: 0.55,
        b1: 0.45,
        bv: 0.3,
        bz: -0.45,
    },
    CategoryModel {
        category: PitchCategory::Offspeed,
        weight: 0.2,
        speed: (86.5, 2.6),
        spin: (1750.0, 170.0),
        pfx_x: (-0.5, 0.4),
        pfx_z: (0.55, 0.35),
        center: (-0.1, 0.3),
        scale: (1.0, 0.95),
        b0: 0.65,
        b1: 0.5,
        bv: 0.35,
        bz: 0.3,
    },
];

/// True swing probability for a feature vector under a category's surface.
fn surface(model: &CategoryModel, features: &[f64; 6]) -> f64 {
    let [x, z, speed, _spin, _pfx_x, pfx_z] = *features;
    let dx = (x - model.center.0) / model.scale.0;
    let dz = (z - model.center.1) / model.scale.1;
    let d2 = dx * dx + dz * dz;
    let eta = model.b0 - model.b1 * d2
        + model.bv * (speed - model.speed.0) / 5.0
        + model.bz * (pfx_z - model.pfx_z.0);
    1.0 / (1.0 + (-eta).exp())
}

fn sample_record(
    rng: &mut ChaCha8Rng,
    stable_id: u64,
    season: i32,
    serial: usize,
) -> (BallRecord, f64) {
    let pick: f64 = rng.random_range(0.0..1.0);
    let mut acc = 0.0;
    let mut model = &MODELS[0];
    for m in &MODELS {
        acc += m.weight;
        if pick < acc {
            model = m;
            break;
        }
    }

    let normal = |rng: &mut ChaCha8Rng, (mean, sd): (f64, f64)| -> f64 {
        Normal::new(mean, sd).expect("sd is positive").sample(rng)
    };
    let features = [
        normal(rng, (0.0, 0.8)),
        normal(rng, (0.45, 0.75)),
        normal(rng, model.speed).max(40.0),
        normal(rng, model.spin).max(0.0),
        normal(rng, model.pfx_x),
        normal(rng, model.pfx_z),
    ];
    let p_true = surface(model, &features);
    let swing = rng.random_bool(p_true);
    let contact = swing && rng.random_bool(0.35);
    let (ev, la) = if contact {
        (
            Some(normal(rng, (88.0, 7.0)).clamp(40.0, 120.0)),
            Some(normal(rng, (14.0, 16.0)).clamp(-80.0, 80.0)),
        )
    } else {
        (None, None)
    };

    let record = BallRecord {
        stable_id,
        season,
        category: model.category,
        features,
        label: if swing {
            SwingLabel::Swing
        } else {
            SwingLabel::Take
        },
        ev,
        la,
        contact_in_play: contact,
        batter: 100_000 + (serial % 300) as i64,
        pitcher: 200_000 + (serial % 180) as i64,
        game_pk: 1_000_000 + (serial / 290) as i64,
        at_bat_number: ((serial / 4) % 70) as i32 + 1,
    };
    (record, p_true)
}

/// Generates training and query sets from one seeded stream.
pub fn generate(config: &SynthConfig) -> SynthData {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let seasons: Vec<i32> = config.train_seasons.clone().collect();
    assert!(!seasons.is_empty(), "train season range is empty");

    let mut train = Vec::with_capacity(config.train);
    let mut train_truth = Vec::with_capacity(config.train);
    for i in 0..config.train {
        let season = seasons[i % seasons.len()];
        let (record, p) = sample_record(&mut rng, i as u64, season, i);
        train.push(record);
        train_truth.push(p);
    }

    let mut queries = Vec::with_capacity(config.queries);
    let mut query_truth = Vec::with_capacity(config.queries);
    for i in 0..config.queries {
        let (record, p) = sample_record(&mut rng, i as u64, config.query_season, i);
        queries.push(record);
        query_truth.push(p);
    }

    SynthData {
        train,
        train_truth,
        queries,
        query_truth,
    }
}
