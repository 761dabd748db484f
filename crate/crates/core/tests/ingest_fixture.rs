//! Ingest contract pinned against a checked-in 100-row Statcast-style
//! export. Expected counts were tallied by hand from the fixture rows, so
//! any drift in rejection order, classification, or labeling shows up here.

use std::io::Write;
use std::path::PathBuf;

use discipline_core::config::CategoryMap;
use discipline_core::ingest::{
    build_ball_dataset, parse_statcast_csv, parse_statcast_csvs, IngestReport, ParseReport,
};
use discipline_core::{Error, PitchCategory, SwingLabel, ZoneGeometry};

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/statcast_sample.csv")
}

#[test]
fn parse_counts_without_season_filter() {
    let (pitches, report) = parse_statcast_csv(&fixture_path(), None).unwrap();
    assert_eq!(
        report,
        ParseReport {
            total_rows: 100,
            parsed: 83,
            untracked: 7,
            malformed: 7,
            invalid: 3,
            season_filtered: 0,
        }
    );
    assert!(report.balanced());
    assert_eq!(pitches.len(), 83);
    assert_eq!(pitches.last().unwrap().row_ordinal, 99);
}

#[test]
fn parse_counts_with_season_window() {
    let (pitches, report) = parse_statcast_csv(&fixture_path(), Some(&(2021..=2023))).unwrap();
    assert_eq!(
        report,
        ParseReport {
            total_rows: 100,
            parsed: 75,
            untracked: 6,
            malformed: 7,
            invalid: 3,
            season_filtered: 9,
        }
    );
    // One 2020 row has a missing tracking field; the season filter claims
    // it first, which is why untracked drops from 7 to 6.
    assert!(pitches.iter().all(|p| (2021..=2023).contains(&p.season)));
}

#[test]
fn ball_dataset_funnel_with_season_window() {
    let (pitches, parse) = parse_statcast_csv(&fixture_path(), Some(&(2021..=2023))).unwrap();
    let (balls, report) = build_ball_dataset(
        &pitches,
        &ZoneGeometry::default(),
        &CategoryMap::default(),
        parse,
    )
    .unwrap();

    assert_eq!(
        report,
        IngestReport {
            total_rows: 100,
            season_filtered: 9,
            untracked: 6,
            malformed: 7,
            invalid: 3,
            tracked: 75,
            non_balls: 8,
            uncategorizable: 2,
            balls_by_category: [23, 25, 17],
            untracked_contact: 2,
        }
    );
    assert_eq!(report.balls_total(), 65);
    assert_eq!(balls.len(), 65);
    assert_eq!(report.tracked_fraction(), 75.0 / 91.0);

    // Every tracked pitch lands in exactly one bucket.
    assert_eq!(
        report.tracked,
        report.non_balls + report.uncategorizable + report.balls_total()
    );

    assert_eq!(balls.iter().filter(|b| b.label == SwingLabel::Swing).count(), 28);
    assert_eq!(balls.iter().filter(|b| b.contact_in_play).count(), 11);

    let head: Vec<u64> = balls.iter().take(6).map(|b| b.stable_id).collect();
    assert_eq!(head, [1, 2, 3, 4, 5, 7]);
    assert!(balls.windows(2).all(|w| w[0].stable_id < w[1].stable_id));
}

#[test]
fn ball_dataset_counts_without_filter() {
    let (pitches, parse) = parse_statcast_csv(&fixture_path(), None).unwrap();
    let (balls, report) = build_ball_dataset(
        &pitches,
        &ZoneGeometry::default(),
        &CategoryMap::default(),
        parse,
    )
    .unwrap();
    assert_eq!(report.non_balls, 10);
    assert_eq!(report.uncategorizable, 2);
    assert_eq!(report.balls_by_category, [25, 29, 17]);
    assert_eq!(balls.len(), 71);
}

/// Row 2 of the fixture: a clear ball (plate_x 1.90) hit into play with the
/// exit velocity cell empty, so it carries the contact anomaly.
#[test]
fn first_ball_fields_survive_ingest() {
    let (pitches, parse) = parse_statcast_csv(&fixture_path(), Some(&(2021..=2023))).unwrap();
    let (balls, _) = build_ball_dataset(
        &pitches,
        &ZoneGeometry::default(),
        &CategoryMap::default(),
        parse,
    )
    .unwrap();

    let b = &balls[0];
    assert_eq!(b.stable_id, 1);
    assert_eq!(b.season, 2022);
    assert_eq!(b.category, PitchCategory::Fastball);
    assert_eq!(b.label, SwingLabel::Swing);
    assert_eq!(b.features[0], 1.90);
    assert_eq!(b.features[1], -0.015924506045414278); // (1.56 - 1.587) / (3.2825 - 1.587)
    assert_eq!(b.features[2], 76.7);
    assert_eq!(b.features[3], 1892.0);
    assert_eq!(b.features[4], -1.34);
    assert_eq!(b.features[5], 0.62);
    assert_eq!(b.ev, None);
    assert_eq!(b.la, Some(12.0));
    assert!(b.contact_in_play);
    assert_eq!(b.batter, 605141);
    assert_eq!(b.pitcher, 605483);
    assert_eq!(b.game_pk, 716354);
    assert_eq!(b.at_bat_number, 18);
}

#[test]
fn ordinals_continue_across_files() {
    let path = fixture_path();
    let (pitches, report) = parse_statcast_csvs(&[&path, &path], None).unwrap();
    assert_eq!(report.total_rows, 200);
    assert_eq!(report.parsed, 166);
    assert_eq!(pitches.len(), 166);
    // The second copy's ordinals start where the first file ended.
    assert_eq!(pitches[83].row_ordinal, pitches[0].row_ordinal + 100);
    assert_eq!(pitches.last().unwrap().row_ordinal, 199);
}

#[test]
fn missing_required_column_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "plate_x,plate_z,sz_top,sz_bot").unwrap();
    writeln!(f, "0.1,2.0,3.5,1.5").unwrap();
    drop(f);
    match parse_statcast_csv(&path, None) {
        Err(Error::MissingColumn(c)) => assert_eq!(c, "release_speed"),
        other => panic!("expected MissingColumn, got {other:?}"),
    }
}

#[test]
fn unknown_description_fails_the_build() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unknown.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(
        f,
        "plate_x,plate_z,sz_top,sz_bot,release_speed,release_spin_rate,pfx_x,pfx_z,\
         pitch_type,description,launch_speed,launch_angle,batter,pitcher,game_pk,\
         at_bat_number,game_date"
    )
    .unwrap();
    writeln!(
        f,
        "1.2,2.0,3.5,1.5,95.0,2200,0.5,1.2,FF,automatic_ball,,,1,2,3,4,2022-05-01"
    )
    .unwrap();
    drop(f);
    let (pitches, parse) = parse_statcast_csv(&path, None).unwrap();
    assert_eq!(parse.parsed, 1);
    let err = build_ball_dataset(
        &pitches,
        &ZoneGeometry::default(),
        &CategoryMap::default(),
        parse,
    )
    .unwrap_err();
    match err {
        Error::UnknownDescription(d) => assert_eq!(d, "automatic_ball"),
        other => panic!("expected UnknownDescription, got {other:?}"),
    }
}
