//! Swing-probability estimation by exact nearest-neighbor frequency.
//!
//! A [`NeighborIndex`] holds one pitch category's training balls: a feature
//! scaler fitted on them plus a kd-tree over the scaled vectors. The
//! estimate for a query pitch is the fraction of its k nearest training
//! pitches that drew a swing, so every probability is a multiple of 1/k.
//!
//! Determinism contract: training order does not matter (records are
//! arranged by `stable_id` before fitting and building), distance ties
//! resolve by ascending `stable_id`, and scoring a batch yields bitwise
//! identical output regardless of thread count.

mod kdtree;
pub mod persist;

pub use kdtree::{KdTree, TreeNeighbor};

use rayon::prelude::*;

use crate::config::ScalingMode;
use crate::error::{Error, Result};
use crate::scoring::score_ball;
use crate::types::{
    BallRecord, PitchCategory, ScoredBall, SwingProbability, FEATURE_DIM, FEATURE_NAMES,
};

/// Per-feature affine transform applied before distance computation.
/// In `Raw` mode the transform is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    pub mode: ScalingMode,
    pub mean: [f64; FEATURE_DIM],
    pub std: [f64; FEATURE_DIM],
}

impl FeatureScaler {
    /// Fits on training vectors. Z-score mode uses the sample standard
    /// deviation (n - 1) and refuses constant features, since a zero
    /// divisor would poison every distance.
    pub fn fit<'a, I>(vectors: I, mode: ScalingMode) -> Result<FeatureScaler>
    where
        I: IntoIterator<Item = &'a [f64; FEATURE_DIM]>,
    {
        let mut n = 0usize;
        let mut mean = [0.0f64; FEATURE_DIM];
        let mut m2 = [0.0f64; FEATURE_DIM];
        for v in vectors {
            n += 1;
            for d in 0..FEATURE_DIM {
                let delta = v[d] - mean[d];
                mean[d] += delta / n as f64;
                m2[d] += delta * (v[d] - mean[d]);
            }
        }
        if n < 2 {
            return Err(Error::TooFewRecords(n));
        }
        match mode {
            ScalingMode::Raw => Ok(FeatureScaler::identity()),
            ScalingMode::Zscore => {
                let mut std = [0.0f64; FEATURE_DIM];
                for d in 0..FEATURE_DIM {
                    if m2[d] == 0.0 {
                        return Err(Error::ConstantFeature(FEATURE_NAMES[d]));
                    }
                    std[d] = (m2[d] / (n - 1) as f64).sqrt();
                }
                Ok(FeatureScaler {
                    mode: ScalingMode::Zscore,
                    mean,
                    std,
                })
            }
        }
    }

    pub fn identity() -> FeatureScaler {
        FeatureScaler {
            mode: ScalingMode::Raw,
            mean: [0.0; FEATURE_DIM],
            std: [1.0; FEATURE_DIM],
        }
    }

    pub fn transform(&self, v: &[f64; FEATURE_DIM]) -> [f64; FEATURE_DIM] {
        let mut out = [0.0; FEATURE_DIM];
        for d in 0..FEATURE_DIM {
            out[d] = (v[d] - self.mean[d]) / self.std[d];
        }
        out
    }
}

/// One neighbor of a query pitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub stable_id: u64,
    pub swing: bool,
    pub dist2: f64,
}

/// Searchable training index for one pitch category.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborIndex {
    category: PitchCategory,
    k_default: usize,
    scaler: FeatureScaler,
    /// Ascending; the tie-breaking order for equidistant neighbors.
    ids: Vec<u64>,
    /// Swing indicators parallel to `ids`.
    swings: Vec<u8>,
    tree: KdTree,
}

impl NeighborIndex {
    /// Builds from training balls, which may arrive in any order and must
    /// all belong to `category`. Requires at least `k_default` records so
    /// the default neighborhood is always satisfiable.
    pub fn build(
        records: &[BallRecord],
        category: PitchCategory,
        scaling: ScalingMode,
        k_default: usize,
    ) -> Result<NeighborIndex> {
        if k_default == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if records.len() < k_default {
            return Err(Error::InsufficientNeighbors {
                category,
                available: records.len(),
                k: k_default,
            });
        }
        if let Some(bad) = records.iter().find(|r| r.category != category) {
            return Err(Error::Internal(format!(
                "record {} has category {} in a {} index",
                bad.stable_id, bad.category, category
            )));
        }

        let mut ordered: Vec<&BallRecord> = records.iter().collect();
        ordered.sort_by_key(|r| r.stable_id);
        for pair in ordered.windows(2) {
            if pair[0].stable_id == pair[1].stable_id {
                return Err(Error::Internal(format!(
                    "duplicate stable_id {} in training set",
                    pair[0].stable_id
                )));
            }
        }

        let scaler = FeatureScaler::fit(ordered.iter().map(|r| &r.features), scaling)?;
        let scaled: Vec<[f64; FEATURE_DIM]> =
            ordered.iter().map(|r| scaler.transform(&r.features)).collect();
        let ids: Vec<u64> = ordered.iter().map(|r| r.stable_id).collect();
        let swings: Vec<u8> = ordered
            .iter()
            .map(|r| r.label.indicator() as u8)
            .collect();
        Ok(NeighborIndex {
            category,
            k_default,
            scaler,
            ids,
            swings,
            tree: KdTree::build(scaled),
        })
    }

    pub fn category(&self) -> PitchCategory {
        self.category
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn k_default(&self) -> usize {
        self.k_default
    }

    pub fn scaler(&self) -> &FeatureScaler {
        &self.scaler
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if k > self.ids.len() {
            return Err(Error::InsufficientNeighbors {
                category: self.category,
                available: self.ids.len(),
                k,
            });
        }
        Ok(())
    }

    /// The k nearest training balls to a raw (unscaled) feature vector,
    /// ascending by (distance, stable_id).
    pub fn neighbors(&self, features: &[f64; FEATURE_DIM], k: usize) -> Result<Vec<Neighbor>> {
        self.check_k(k)?;
        let scaled = self.scaler.transform(features);
        let found = self.tree.nearest(&scaled, k);
        Ok(found
            .into_iter()
            .map(|n| Neighbor {
                stable_id: self.ids[n.position as usize],
                swing: self.swings[n.position as usize] == 1,
                dist2: n.dist2,
            })
            .collect())
    }

    /// Swing frequency among the k nearest training balls.
    pub fn estimate(&self, features: &[f64; FEATURE_DIM], k: usize) -> Result<SwingProbability> {
        self.check_k(k)?;
        let scaled = self.scaler.transform(features);
        let found = self.tree.nearest(&scaled, k);
        let swings = found
            .iter()
            .filter(|n| self.swings[n.position as usize] == 1)
            .count();
        SwingProbability::from_counts(swings, k)
    }

    pub(crate) fn from_parts(
        category: PitchCategory,
        k_default: usize,
        scaler: FeatureScaler,
        ids: Vec<u64>,
        swings: Vec<u8>,
        tree: KdTree,
    ) -> NeighborIndex {
        NeighborIndex {
            category,
            k_default,
            scaler,
            ids,
            swings,
            tree,
        }
    }

    pub(crate) fn parts(&self) -> (&FeatureScaler, &[u64], &[u8], &KdTree) {
        (&self.scaler, &self.ids, &self.swings, &self.tree)
    }
}

/// Estimated swing probability for one ball against the index of its own
/// category.
pub fn estimate_swing_probability(
    index: &NeighborIndex,
    ball: &BallRecord,
    k: usize,
) -> Result<SwingProbability> {
    if ball.category != index.category {
        return Err(Error::Parameter(format!(
            "ball {} is {} but the index holds {}",
            ball.stable_id, ball.category, index.category
        )));
    }
    index.estimate(&ball.features, k)
}

/// The per-category indexes a scoring run works against.
#[derive(Debug, Default)]
pub struct IndexSet {
    slots: [Option<NeighborIndex>; 3],
}

impl IndexSet {
    pub fn new() -> IndexSet {
        IndexSet::default()
    }

    pub fn insert(&mut self, index: NeighborIndex) {
        let slot = index.category.index();
        self.slots[slot] = Some(index);
    }

    pub fn get(&self, category: PitchCategory) -> Option<&NeighborIndex> {
        self.slots[category.index()].as_ref()
    }

    pub fn require(&self, category: PitchCategory) -> Result<&NeighborIndex> {
        self.get(category).ok_or(Error::MissingIndex(category))
    }

    pub fn iter(&self) -> impl Iterator<Item = &NeighborIndex> {
        self.slots.iter().filter_map(|s| s.as_ref())
    }
}

/// Scores a batch of balls: estimates each ball's swing probability
/// against its category's index, then derives ds, cq, and ads.
///
/// `k` overrides every index's default when given. Output order equals
/// input order, and the result is bitwise identical for any thread count.
pub fn score_dataset(
    indexes: &IndexSet,
    balls: &[BallRecord],
    k: Option<usize>,
) -> Result<Vec<ScoredBall>> {
    // Surface capacity problems before burning time on the batch.
    for category in PitchCategory::ALL {
        if balls.iter().any(|b| b.category == category) {
            let index = indexes.require(category)?;
            index.check_k(k.unwrap_or(index.k_default))?;
        }
    }
    balls
        .par_iter()
        .map(|ball| {
            let index = indexes
                .get(ball.category)
                .expect("presence checked above");
            let p_s = index.estimate(&ball.features, k.unwrap_or(index.k_default))?;
            Ok(score_ball(ball, p_s))
        })
        .collect()
}
