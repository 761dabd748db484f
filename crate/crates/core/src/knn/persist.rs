//! On-disk format for neighbor indexes.
//!
//! Little-endian throughout, versioned by a magic header so stale or
//! foreign files fail loudly instead of misbehaving. Serialization is a
//! pure function of the built index, and builds are a pure function of the
//! training set, so rebuilding from the same data reproduces the file byte
//! for byte.
//!
//! Layout:
//!
//! ```text
//! magic        8  b"BALLIDX\0"
//! version      1  format version, currently 1
//! category     1  pitch category index
//! scaling      1  0 = zscore, 1 = raw
//! k_default    4  u32
//! count        8  u64, number of training balls
//! mean        48  6 x f64, scaler means
//! std         48  6 x f64, scaler standard deviations
//! node_count   8  u64
//! nodes        -  split: tag 0, dim u8, right u32, value f64
//!                 leaf:  tag 1, start u32, len u32
//! points       -  count x 6 x f64, tree order
//! positions    -  count x u32, tree order -> id slot
//! ids          -  count x u64, ascending stable ids
//! swings       -  count x u8, 0 or 1, parallel to ids
//! ```

use std::path::{Path, PathBuf};

use crate::config::ScalingMode;
use crate::error::{Error, Result};
use crate::knn::kdtree::Node;
use crate::knn::{FeatureScaler, IndexSet, KdTree, NeighborIndex};
use crate::types::{PitchCategory, FEATURE_DIM};

const MAGIC: [u8; 8] = *b"BALLIDX\0";
const VERSION: u8 = 1;
const TAG_SPLIT: u8 = 0;
const TAG_LEAF: u8 = 1;

fn scaling_byte(mode: ScalingMode) -> u8 {
    match mode {
        ScalingMode::Zscore => 0,
        ScalingMode::Raw => 1,
    }
}

fn scaling_from_byte(b: u8) -> Option<ScalingMode> {
    match b {
        0 => Some(ScalingMode::Zscore),
        1 => Some(ScalingMode::Raw),
        _ => None,
    }
}

fn category_from_byte(b: u8) -> Option<PitchCategory> {
    PitchCategory::ALL.get(b as usize).copied()
}

struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    fn new() -> Self {
        ByteWriter { buf: Vec::new() }
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
}

struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        ByteReader { buf, pos: 0 }
    }
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        if self.pos + n > self.buf.len() {
            return Err(format!(
                "unexpected end of file at offset {} (wanted {n} more bytes)",
                self.pos
            ));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }
    fn u8(&mut self) -> std::result::Result<u8, String> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn exhausted(&self) -> bool {
        self.pos == self.buf.len()
    }
}

/// Serializes an index to its canonical byte representation.
pub fn index_to_bytes(index: &NeighborIndex) -> Vec<u8> {
    let (scaler, ids, swings, tree) = index.parts();
    let (nodes, points, positions) = tree.parts();
    let mut w = ByteWriter::new();
    w.buf.extend_from_slice(&MAGIC);
    w.u8(VERSION);
    w.u8(index.category().index() as u8);
    w.u8(scaling_byte(scaler.mode));
    w.u32(index.k_default() as u32);
    w.u64(ids.len() as u64);
    for d in 0..FEATURE_DIM {
        w.f64(scaler.mean[d]);
    }
    for d in 0..FEATURE_DIM {
        w.f64(scaler.std[d]);
    }
    w.u64(nodes.len() as u64);
    for node in nodes {
        match *node {
            Node::Split { dim, value, right } => {
                w.u8(TAG_SPLIT);
                w.u8(dim);
                w.u32(right);
                w.f64(value);
            }
            Node::Leaf { start, len } => {
                w.u8(TAG_LEAF);
                w.u32(start);
                w.u32(len);
            }
        }
    }
    for p in points {
        for d in 0..FEATURE_DIM {
            w.f64(p[d]);
        }
    }
    for &pos in positions {
        w.u32(pos);
    }
    for &id in ids {
        w.u64(id);
    }
    w.buf.extend_from_slice(swings);
    w.buf
}

fn parse_index(bytes: &[u8]) -> std::result::Result<NeighborIndex, String> {
    let mut r = ByteReader::new(bytes);
    if r.take(8)? != MAGIC {
        return Err("not a neighbor index file (bad magic)".to_string());
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(format!(
            "unsupported format version {version} (this build reads {VERSION})"
        ));
    }
    let category = category_from_byte(r.u8()?).ok_or("invalid category byte")?;
    let scaling = scaling_from_byte(r.u8()?).ok_or("invalid scaling byte")?;
    let k_default = r.u32()? as usize;
    let count = r.u64()?;
    if count > u32::MAX as u64 {
        return Err(format!("{count} points exceeds the format limit"));
    }
    let count = count as usize;
    if k_default == 0 || k_default > count {
        return Err(format!("k_default {k_default} invalid for {count} points"));
    }

    let mut mean = [0.0f64; FEATURE_DIM];
    let mut std = [1.0f64; FEATURE_DIM];
    for slot in mean.iter_mut() {
        *slot = r.f64()?;
        if !slot.is_finite() {
            return Err("non-finite scaler mean".to_string());
        }
    }
    for slot in std.iter_mut() {
        *slot = r.f64()?;
        if !(slot.is_finite() && *slot > 0.0) {
            return Err("scaler standard deviation must be positive and finite".to_string());
        }
    }

    let node_count = r.u64()? as usize;
    let mut nodes = Vec::with_capacity(node_count);
    for i in 0..node_count {
        match r.u8()? {
            TAG_SPLIT => {
                let dim = r.u8()?;
                let right = r.u32()?;
                let value = r.f64()?;
                nodes.push(Node::Split { dim, value, right });
            }
            TAG_LEAF => {
                let start = r.u32()?;
                let len = r.u32()?;
                nodes.push(Node::Leaf { start, len });
            }
            tag => return Err(format!("node {i}: unknown tag {tag}")),
        }
    }

    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let mut p = [0.0f64; FEATURE_DIM];
        for slot in p.iter_mut() {
            *slot = r.f64()?;
        }
        points.push(p);
    }
    let mut positions = Vec::with_capacity(count);
    for _ in 0..count {
        positions.push(r.u32()?);
    }
    let mut ids = Vec::with_capacity(count);
    for _ in 0..count {
        ids.push(r.u64()?);
    }
    for pair in ids.windows(2) {
        if pair[0] >= pair[1] {
            return Err("stable ids are not strictly ascending".to_string());
        }
    }
    let swings = r.take(count)?.to_vec();
    if let Some(bad) = swings.iter().find(|&&s| s > 1) {
        return Err(format!("swing indicator {bad} is not 0 or 1"));
    }
    if !r.exhausted() {
        return Err(format!(
            "{} trailing bytes after the index payload",
            bytes.len() - r.pos
        ));
    }

    let tree = KdTree::from_parts(nodes, points, positions)?;
    let scaler = FeatureScaler {
        mode: scaling,
        mean,
        std,
    };
    Ok(NeighborIndex::from_parts(
        category, k_default, scaler, ids, swings, tree,
    ))
}

pub fn index_from_bytes(bytes: &[u8], origin: &Path) -> Result<NeighborIndex> {
    parse_index(bytes).map_err(|reason| Error::IndexFormat {
        path: origin.to_path_buf(),
        reason,
    })
}

pub fn save_index(index: &NeighborIndex, path: &Path) -> Result<()> {
    std::fs::write(path, index_to_bytes(index)).map_err(|e| Error::io(path, e))
}

pub fn load_index(path: &Path) -> Result<NeighborIndex> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    index_from_bytes(&bytes, path)
}

/// Standard file name for a category's index within an index directory.
pub fn index_file_name(category: PitchCategory) -> String {
    format!("{category}.idx")
}

pub fn index_path(dir: &Path, category: PitchCategory) -> PathBuf {
    dir.join(index_file_name(category))
}

/// Writes every index in the set into `dir` under the standard names.
pub fn save_index_set(set: &IndexSet, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for index in set.iter() {
        save_index(index, &index_path(dir, index.category()))?;
    }
    Ok(())
}

/// Loads whichever standard index files exist in `dir`. At least one must.
/// A file whose embedded category disagrees with its name is rejected.
pub fn load_index_set(dir: &Path) -> Result<IndexSet> {
    let mut set = IndexSet::new();
    let mut found = 0;
    for category in PitchCategory::ALL {
        let path = index_path(dir, category);
        if !path.exists() {
            continue;
        }
        let index = load_index(&path)?;
        if index.category() != category {
            return Err(Error::IndexFormat {
                path,
                reason: format!(
                    "file is named for {category} but holds a {} index",
                    index.category()
                ),
            });
        }
        set.insert(index);
        found += 1;
    }
    if found == 0 {
        return Err(Error::Parameter(format!(
            "no index files found in {} (expected {})",
            dir.display(),
            PitchCategory::ALL.map(index_file_name).join(", ")
        )));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{BallRecord, SwingLabel};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_balls(seed: u64, n: usize, category: PitchCategory) -> Vec<BallRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let mut features = [0.0; FEATURE_DIM];
                for v in &mut features {
                    *v = rng.random_range(-2.0..2.0);
                }
                BallRecord {
                    stable_id: i as u64 * 3 + 7,
                    season: 2022,
                    category,
                    features,
                    label: if rng.random_bool(0.45) {
                        SwingLabel::Swing
                    } else {
                        SwingLabel::Take
                    },
                    ev: None,
                    la: None,
                    contact_in_play: false,
                    batter: 10,
                    pitcher: 20,
                    game_pk: 30,
                    at_bat_number: 1,
                }
            })
            .collect()
    }

    #[test]
    fn round_trip_preserves_the_index_exactly() {
        let balls = random_balls(1, 400, PitchCategory::BreakingBall);
        let index = NeighborIndex::build(
            &balls,
            PitchCategory::BreakingBall,
            ScalingMode::Zscore,
            25,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("breaking_ball.idx");
        save_index(&index, &path).unwrap();
        let loaded = load_index(&path).unwrap();
        assert_eq!(loaded, index);

        // Bit-exact estimates after the round trip.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let mut q = [0.0; FEATURE_DIM];
            for v in &mut q {
                *v = rng.random_range(-2.5..2.5);
            }
            assert_eq!(
                index.estimate(&q, 25).unwrap().value(),
                loaded.estimate(&q, 25).unwrap().value()
            );
        }
    }

    #[test]
    fn serialization_is_independent_of_training_order() {
        let mut balls = random_balls(3, 500, PitchCategory::Fastball);
        let a = NeighborIndex::build(&balls, PitchCategory::Fastball, ScalingMode::Zscore, 10)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        balls.shuffle(&mut rng);
        let b = NeighborIndex::build(&balls, PitchCategory::Fastball, ScalingMode::Zscore, 10)
            .unwrap();
        assert_eq!(index_to_bytes(&a), index_to_bytes(&b));
    }

    #[test]
    fn corrupted_files_are_rejected_with_reasons() {
        let balls = random_balls(5, 100, PitchCategory::Offspeed);
        let index =
            NeighborIndex::build(&balls, PitchCategory::Offspeed, ScalingMode::Zscore, 5).unwrap();
        let good = index_to_bytes(&index);
        let origin = Path::new("test.idx");

        assert!(index_from_bytes(&good, origin).is_ok());

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            index_from_bytes(&bad_magic, origin),
            Err(Error::IndexFormat { .. })
        ));

        let mut bad_version = good.clone();
        bad_version[8] = 99;
        let err = index_from_bytes(&bad_version, origin).unwrap_err();
        assert!(err.to_string().contains("version 99"), "{err}");

        let truncated = &good[..good.len() - 10];
        assert!(index_from_bytes(truncated, origin).is_err());

        let mut trailing = good.clone();
        trailing.push(0);
        assert!(index_from_bytes(&trailing, origin).is_err());

        let mut bad_swing = good.clone();
        let last = bad_swing.len() - 1;
        bad_swing[last] = 7;
        assert!(index_from_bytes(&bad_swing, origin).is_err());
    }

    #[test]
    fn index_set_round_trips_through_a_directory() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = IndexSet::new();
        for (seed, category) in [
            (10, PitchCategory::Fastball),
            (11, PitchCategory::BreakingBall),
        ] {
            let balls = random_balls(seed, 120, category);
            set.insert(
                NeighborIndex::build(&balls, category, ScalingMode::Zscore, 8).unwrap(),
            );
        }
        save_index_set(&set, dir.path()).unwrap();
        let loaded = load_index_set(dir.path()).unwrap();
        assert!(loaded.get(PitchCategory::Fastball).is_some());
        assert!(loaded.get(PitchCategory::BreakingBall).is_some());
        assert!(loaded.get(PitchCategory::Offspeed).is_none());
        assert_eq!(
            loaded.get(PitchCategory::Fastball).unwrap(),
            set.get(PitchCategory::Fastball).unwrap()
        );
    }

    #[test]
    fn empty_index_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_index_set(dir.path()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn misnamed_index_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let balls = random_balls(20, 60, PitchCategory::Fastball);
        let index =
            NeighborIndex::build(&balls, PitchCategory::Fastball, ScalingMode::Zscore, 5).unwrap();
        save_index(&index, &index_path(dir.path(), PitchCategory::Offspeed)).unwrap();
        assert!(matches!(
            load_index_set(dir.path()),
            Err(Error::IndexFormat { .. })
        ));
    }
}
