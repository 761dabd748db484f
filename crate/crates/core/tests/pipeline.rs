//! End-to-end pipeline exercise on synthetic data: generate, index, score,
//! evaluate, persist, aggregate. Checks the seams between modules rather
//! than any single algorithm.

use discipline_core::evaluation::{brier_score, evaluate_predictions, kahan_sum, bin_index};
use discipline_core::knn::persist::{load_index_set, save_index_set};
use discipline_core::knn::{score_dataset, IndexSet, NeighborIndex};
use discipline_core::aggregate::{self, Direction, Metric, QualifyRule, Role};
use discipline_core::dataset;
use discipline_core::synth::{generate, SynthConfig};
use discipline_core::{BallRecord, PitchCategory, ScalingMode};

const K: usize = 100;

fn build_indexes(train: &[BallRecord]) -> IndexSet {
    let mut set = IndexSet::new();
    for category in PitchCategory::ALL {
        let members: Vec<BallRecord> = train
            .iter()
            .filter(|b| b.category == category)
            .cloned()
            .collect();
        set.insert(NeighborIndex::build(&members, category, ScalingMode::Zscore, K).unwrap());
    }
    set
}

#[test]
fn synthetic_pipeline_round_trip() {
    let data = generate(&SynthConfig::new(50_000, 2_000, 0x5EED01));
    let indexes = build_indexes(&data.train);
    let scored = score_dataset(&indexes, &data.queries, None).unwrap();
    assert_eq!(scored.len(), data.queries.len());

    // Per-ball score algebra holds on every output.
    for s in &scored {
        let r = s.ball.label.indicator();
        assert_eq!(s.ds, s.p_s - r, "ds must equal p_s - r");
        assert_eq!(s.ads, s.ds + s.cq);
        assert!((0.0..=1.0).contains(&s.cq));
        // p_s sits on the k-grid.
        let grid = s.p_s * K as f64;
        assert!((grid - grid.round()).abs() < 1e-9, "p_s {} off grid", s.p_s);
        assert!(!s.cq_anomaly, "generator always tracks contact");
    }

    // The estimator beats the climatological constant predictor.
    let outcomes: Vec<bool> = data.queries.iter().map(|b| b.label.is_swing()).collect();
    let predictions: Vec<f64> = scored.iter().map(|s| s.p_s).collect();
    let brier = brier_score(&predictions, &outcomes).unwrap();
    let base_rate =
        outcomes.iter().filter(|&&y| y).count() as f64 / outcomes.len() as f64;
    let constant = vec![base_rate; outcomes.len()];
    let brier_constant = brier_score(&constant, &outcomes).unwrap();
    assert!(
        brier < brier_constant - 0.005,
        "knn {brier} should beat constant {brier_constant}"
    );

    // And tracks the generator's true surface reasonably well at this size.
    let mae = kahan_sum(
        predictions
            .iter()
            .zip(&data.query_truth)
            .map(|(p, t)| (p - t).abs()),
    ) / predictions.len() as f64;
    assert!(mae < 0.1, "mae {mae}");

    // Calibration report is internally consistent: bin counts partition the
    // sample and the count-weighted per-bin Brier recombines exactly.
    let report = evaluate_predictions(K, &predictions, &outcomes, 10).unwrap();
    assert_eq!(report.n, predictions.len());
    let total: u64 = report.bins.iter().map(|b| b.count).sum();
    assert_eq!(total, report.n as u64);
    let mut per_bin = vec![Vec::new(); 10];
    for (p, y) in predictions.iter().zip(&outcomes) {
        per_bin[bin_index(*p, 10)].push((*p, *y));
    }
    let recombined = kahan_sum(per_bin.iter().filter(|m| !m.is_empty()).map(|members| {
        let (ps, ys): (Vec<f64>, Vec<bool>) = members.iter().cloned().unzip();
        brier_score(&ps, &ys).unwrap() * members.len() as f64
    })) / report.n as f64;
    assert!((recombined - report.brier).abs() < 1e-12);
}

#[test]
fn persisted_indexes_reproduce_scores_exactly() {
    let data = generate(&SynthConfig::new(12_000, 800, 0xD15C));
    let indexes = build_indexes(&data.train);
    let dir = tempfile::tempdir().unwrap();
    let index_dir = dir.path().join("indexes");
    save_index_set(&indexes, &index_dir).unwrap();
    let reloaded = load_index_set(&index_dir).unwrap();

    let first = score_dataset(&indexes, &data.queries, None).unwrap();
    let second = score_dataset(&reloaded, &data.queries, None).unwrap();

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    dataset::write_scored_dataset(&a, &first).unwrap();
    dataset::write_scored_dataset(&b, &second).unwrap();
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "rescoring through a persisted index must be byte-identical"
    );
}

#[test]
fn dataset_files_round_trip_exactly() {
    let data = generate(&SynthConfig::new(2_000, 300, 0xF00D));
    let dir = tempfile::tempdir().unwrap();

    let train_path = dir.path().join("train.csv");
    dataset::write_ball_dataset_with_truth(&train_path, &data.train, &data.train_truth).unwrap();
    let back = dataset::read_ball_dataset(&train_path).unwrap();
    assert_eq!(back, data.train);
    let truth = dataset::read_truth_column(&train_path).unwrap();
    assert_eq!(truth, data.train_truth);

    let indexes = build_indexes(&data.train);
    let scored = score_dataset(&indexes, &data.queries, Some(50)).unwrap();
    let scored_path = dir.path().join("scored.csv");
    dataset::write_scored_dataset(&scored_path, &scored).unwrap();
    let scored_back = dataset::read_scored_dataset(&scored_path).unwrap();
    assert_eq!(scored_back, scored);
}

#[test]
fn aggregation_accounts_for_every_scored_ball() {
    let data = generate(&SynthConfig::new(9_000, 1_500, 0xA66));
    let indexes = build_indexes(&data.train);
    let scored = score_dataset(&indexes, &data.queries, Some(64)).unwrap();

    for role in [Role::Batter, Role::Pitcher] {
        let summaries = aggregate::summarize(&scored, role);
        let total: u64 = summaries.iter().map(|s| s.overall.balls).sum();
        assert_eq!(total as usize, scored.len());
        for s in &summaries {
            let per_cat: u64 = s
                .per_category
                .iter()
                .flatten()
                .map(|g| g.balls)
                .sum();
            assert_eq!(per_cat, s.overall.balls);
            assert!(s.overall.mean_ds.abs() <= 1.0 + 1e-12);
            assert!(s.plate_appearances >= 1);
        }
        // Stricter qualification keeps a subset.
        let loose = aggregate::qualify(&summaries, &QualifyRule::MinBalls { min: 2, category: None });
        let tight = aggregate::qualify(&summaries, &QualifyRule::MinBalls { min: 6, category: None });
        assert!(tight.len() <= loose.len());

        let rows = aggregate::leaderboard(
            &loose,
            Metric::MeanDs,
            None,
            Direction::Desc,
            10,
        );
        assert!(rows.windows(2).all(|w| w[0].value >= w[1].value));
        assert!(rows.iter().enumerate().all(|(i, r)| r.rank as usize == i + 1));
    }
}
