//! Pipeline configuration: zone geometry, the pitch-type category table,
//! feature scaling mode, estimator and evaluation parameters, and season
//! qualification thresholds.
//!
//! Configuration loads from TOML. Any field left out of the file keeps its
//! default, so a config file only needs to name what it overrides.
//! Validation collects every failure rather than stopping at the first.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::PitchCategory;

/// Strike-zone cross-section constants, in feet.
///
/// The plate spans 17 inches, so the default half width is 17/24 ft. The
/// ball's radius defaults to 1.45 inches (2.9-inch diameter), 2.9/24 ft.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZoneGeometry {
    pub half_width_ft: f64,
    pub ball_radius_ft: f64,
}

impl Default for ZoneGeometry {
    fn default() -> Self {
        ZoneGeometry {
            half_width_ft: 17.0 / 24.0,
            ball_radius_ft: 2.9 / 24.0,
        }
    }
}

/// How raw feature vectors are transformed before distance computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    /// Standardize each feature to zero mean and unit sample variance,
    /// with statistics fitted on the training set. The default: the raw
    /// features mix feet, mph, rpm, and unitless quantities, so unscaled
    /// Euclidean distance would be dominated by spin rate.
    Zscore,
    /// Use raw feature values as-is.
    Raw,
}

impl ScalingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalingMode::Zscore => "zscore",
            ScalingMode::Raw => "raw",
        }
    }
}

impl FromStr for ScalingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zscore" => Ok(ScalingMode::Zscore),
            "raw" => Ok(ScalingMode::Raw),
            other => Err(Error::Parameter(format!(
                "unknown scaling mode `{other}` (expected zscore or raw)"
            ))),
        }
    }
}

/// Mapping from Statcast `pitch_type` codes to categories. Codes absent
/// from the table make a pitch uncategorizable; it is counted and excluded
/// rather than guessed at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryMap(pub BTreeMap<String, PitchCategory>);

impl Default for CategoryMap {
    fn default() -> Self {
        let mut m = BTreeMap::new();
        for code in ["FF", "SI", "FC", "FA"] {
            m.insert(code.to_string(), PitchCategory::Fastball);
        }
        for code in ["SL", "CU", "KC", "SV", "ST", "SC", "CS"] {
            m.insert(code.to_string(), PitchCategory::BreakingBall);
        }
        for code in ["CH", "FS", "FO", "KN", "EP"] {
            m.insert(code.to_string(), PitchCategory::Offspeed);
        }
        CategoryMap(m)
    }
}

impl CategoryMap {
    pub fn get(&self, code: &str) -> Option<PitchCategory> {
        self.0.get(code).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Minimum sample sizes for a player-season to appear in leaderboards.
/// Both thresholds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QualifyConfig {
    /// Batters: minimum plate appearances in the season.
    pub min_pa: u64,
    /// Pitchers: minimum tracked balls thrown in the category under study.
    pub min_pitcher_balls: u64,
}

impl Default for QualifyConfig {
    fn default() -> Self {
        QualifyConfig {
            min_pa: 150,
            min_pitcher_balls: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Config schema version; bumped on incompatible changes.
    pub version: u32,
    pub zone: ZoneGeometry,
    pub categories: CategoryMap,
    pub scaling: ScalingMode,
    /// Neighborhood size for swing-probability estimation.
    pub k: usize,
    /// Number of equal-width bins in calibration curves.
    pub calibration_bins: usize,
    pub qualify: QualifyConfig,
    /// Seed for the synthetic-data generator.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            version: 1,
            zone: ZoneGeometry::default(),
            categories: CategoryMap::default(),
            scaling: ScalingMode::Zscore,
            k: 200,
            calibration_bins: 10,
            qualify: QualifyConfig::default(),
            seed: 0xB45EBA11,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Internal(format!("config serialize: {e}")))
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.version != 1 {
            problems.push(format!("version: unsupported value {}", self.version));
        }
        if !(self.zone.half_width_ft > 0.0 && self.zone.half_width_ft.is_finite()) {
            problems.push(format!(
                "zone.half_width_ft: must be positive and finite, got {}",
                self.zone.half_width_ft
            ));
        }
        if !(self.zone.ball_radius_ft > 0.0 && self.zone.ball_radius_ft.is_finite()) {
            problems.push(format!(
                "zone.ball_radius_ft: must be positive and finite, got {}",
                self.zone.ball_radius_ft
            ));
        }
        if self.categories.is_empty() {
            problems.push("categories: table is empty".to_string());
        }
        if self.k == 0 {
            problems.push("k: must be at least 1".to_string());
        }
        if self.calibration_bins < 2 {
            problems.push(format!(
                "calibration_bins: must be at least 2, got {}",
                self.calibration_bins
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn default_zone_constants() {
        let z = ZoneGeometry::default();
        assert!((z.half_width_ft - 0.708333333333).abs() < 1e-9);
        assert!((z.ball_radius_ft - 0.120833333333).abs() < 1e-9);
    }

    #[test]
    fn default_category_table() {
        let m = CategoryMap::default();
        assert_eq!(m.get("FF"), Some(PitchCategory::Fastball));
        assert_eq!(m.get("SI"), Some(PitchCategory::Fastball));
        assert_eq!(m.get("FC"), Some(PitchCategory::Fastball));
        assert_eq!(m.get("FA"), Some(PitchCategory::Fastball));
        assert_eq!(m.get("SL"), Some(PitchCategory::BreakingBall));
        assert_eq!(m.get("ST"), Some(PitchCategory::BreakingBall));
        assert_eq!(m.get("CS"), Some(PitchCategory::BreakingBall));
        assert_eq!(m.get("CH"), Some(PitchCategory::Offspeed));
        assert_eq!(m.get("EP"), Some(PitchCategory::Offspeed));
        assert_eq!(m.get("PO"), None);
        assert_eq!(m.0.len(), 16);
    }

    #[test]
    fn toml_round_trip_is_lossless() {
        let config = PipelineConfig::default();
        let text = config.to_toml().unwrap();
        let back: PipelineConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let config: PipelineConfig = toml::from_str("k = 100\nscaling = \"raw\"\n").unwrap();
        assert_eq!(config.k, 100);
        assert_eq!(config.scaling, ScalingMode::Raw);
        assert_eq!(config.calibration_bins, 10);
        assert_eq!(config.qualify.min_pa, 150);
        assert_eq!(config.zone, ZoneGeometry::default());
    }

    #[test]
    fn custom_category_table_round_trips() {
        let text = "[categories]\nFF = \"fastball\"\nXX = \"offspeed\"\n";
        let config: PipelineConfig = toml::from_str(text).unwrap();
        assert_eq!(config.categories.get("XX"), Some(PitchCategory::Offspeed));
        assert_eq!(config.categories.get("SL"), None);
        let back: PipelineConfig = toml::from_str(&config.to_toml().unwrap()).unwrap();
        assert_eq!(back.categories, config.categories);
    }

    #[test]
    fn validate_collects_every_failure() {
        let mut config = PipelineConfig::default();
        config.version = 9;
        config.k = 0;
        config.calibration_bins = 1;
        config.zone.half_width_ft = -1.0;
        let err = config.validate().unwrap_err();
        match err {
            Error::Config(problems) => {
                assert_eq!(problems.len(), 4);
                assert!(problems.iter().any(|p| p.starts_with("version")));
                assert!(problems.iter().any(|p| p.starts_with("k:")));
                assert!(problems.iter().any(|p| p.starts_with("calibration_bins")));
                assert!(problems.iter().any(|p| p.starts_with("zone.half_width_ft")));
            }
            other => panic!("expected Config error, got {other:?}"),
        }
    }

    #[test]
    fn scaling_mode_parses() {
        assert_eq!("zscore".parse::<ScalingMode>().unwrap(), ScalingMode::Zscore);
        assert_eq!("raw".parse::<ScalingMode>().unwrap(), ScalingMode::Raw);
        assert!("minmax".parse::<ScalingMode>().is_err());
    }
}
