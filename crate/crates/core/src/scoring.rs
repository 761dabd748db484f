//! Per-pitch scoring: discipline score, contact quality, and the adjusted
//! discipline score that credits productive swings at balls.
//!
//! All scores derive from the estimated league swing probability `p_s` and
//! the batter's observed response:
//!
//! * take:  `ds = p_s` (credit for laying off a pitch others chase)
//! * swing: `ds = -(1 - p_s)` (penalty scaled by how unusual the chase was)
//!
//! Contact quality rewards swings that produce hard contact at a useful
//! launch angle. It is zero unless the ball was put in play.

use crate::types::{BallRecord, ScoredBall, SwingLabel, SwingProbability};

/// Exit velocity below which contact earns no credit, in mph.
const EV_FLOOR: f64 = 70.0;
/// Exit velocity span over which credit ramps from 0 to 1.
const EV_SPAN: f64 = 28.0;
/// Launch angle of maximum credit, in degrees.
const LA_CENTER: f64 = 20.0;
/// Angular distance at which launch-angle credit reaches 0.
const LA_SPAN: f64 = 20.0;

/// Discipline score for one pitch. Equals `p_s - r` where `r` is the swing
/// indicator; always within [-1, 1], and nonnegative exactly for takes.
pub fn discipline_score(p_s: SwingProbability, label: SwingLabel) -> f64 {
    match label {
        SwingLabel::Take => p_s.value(),
        SwingLabel::Swing => -(1.0 - p_s.value()),
    }
}

/// Exit-velocity component of contact quality: 0 at or below 70 mph,
/// rising linearly to 1 at 98 mph and clamped there.
pub fn ev_score(ev: f64) -> f64 {
    ((ev - EV_FLOOR) / EV_SPAN).clamp(0.0, 1.0)
}

/// Launch-angle component of contact quality: 1 at 20 degrees, falling
/// linearly to 0 at 0 and 40 degrees, 0 beyond.
pub fn la_score(la: f64) -> f64 {
    (1.0 - (la - LA_CENTER).abs() / LA_SPAN).max(0.0)
}

/// Contact-quality assessment for one pitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactQuality {
    pub ev_score: f64,
    pub la_score: f64,
    pub cq: f64,
    /// In play per the description, but exit velocity or launch angle was
    /// not tracked. Such contact earns 0 rather than a guess.
    pub anomaly: bool,
}

/// Contact quality: `ev_score * la_score` when the ball was put in play and
/// both measurements exist, otherwise 0.
pub fn contact_quality(ev: Option<f64>, la: Option<f64>, contact_in_play: bool) -> ContactQuality {
    if !contact_in_play {
        return ContactQuality {
            ev_score: 0.0,
            la_score: 0.0,
            cq: 0.0,
            anomaly: false,
        };
    }
    match (ev, la) {
        (Some(ev), Some(la)) => {
            let evs = ev_score(ev);
            let las = la_score(la);
            ContactQuality {
                ev_score: evs,
                la_score: las,
                cq: evs * las,
                anomaly: false,
            }
        }
        _ => ContactQuality {
            ev_score: 0.0,
            la_score: 0.0,
            cq: 0.0,
            anomaly: true,
        },
    }
}

/// Adjusted discipline score: discipline plus contact quality.
pub fn adjusted_discipline_score(ds: f64, cq: f64) -> f64 {
    ds + cq
}

/// Attaches the full score set to a ball given its estimated swing
/// probability.
pub fn score_ball(ball: &BallRecord, p_s: SwingProbability) -> ScoredBall {
    let ds = discipline_score(p_s, ball.label);
    // Contact requires a swing; on a take the in-play flag is vacuous.
    let in_play = ball.contact_in_play && ball.label.is_swing();
    let contact = contact_quality(ball.ev, ball.la, in_play);
    ScoredBall {
        p_s: p_s.value(),
        ds,
        ev_score: contact.ev_score,
        la_score: contact.la_score,
        cq: contact.cq,
        ads: adjusted_discipline_score(ds, contact.cq),
        cq_anomaly: contact.anomaly,
        ball: ball.clone(),
    }
}
