use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{UserId, Visit};

/// Maximum spread of arrivals inside one session.
pub const SESSION_WINDOW_SECS: i64 = 8 * 3600;

/// A run of one user's visits whose arrivals span at most the session window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub user: UserId,
    pub start: i64,
    pub end: i64,
    pub visits: Vec<Visit>,
}

impl Session {
    pub fn new(user: UserId, visits: Vec<Visit>) -> Self {
        let start = visits.first().map_or(0, |v| v.arrival);
        let end = visits.last().map_or(0, |v| v.arrival);
        Session { user, start, end, visits }
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    /// Singletons are kept for statistics but never trained or evaluated on.
    pub fn is_trainable(&self) -> bool {
        self.visits.len() >= 2
    }

    pub fn pois(&self) -> impl Iterator<Item = super::PoiId> + '_ {
        self.visits.iter().map(|v| v.poi)
    }
}

/// Greedy split: a session opens at its first visit and closes before the
/// first arrival later than `start + window`.
pub fn sessionize(user: UserId, visits: &[Visit], window_secs: i64) -> Vec<Session> {
    let mut out = Vec::new();
    let mut current: Vec<Visit> = Vec::new();
    for v in visits {
        if let Some(first) = current.first() {
            if v.arrival > first.arrival + window_secs {
                out.push(Session::new(user, std::mem::take(&mut current)));
            }
        }
        current.push(*v);
    }
    if !current.is_empty() {
        out.push(Session::new(user, current));
    }
    out
}

/// Drop every user whose total visit count is below `min_checkins`.
pub fn filter_users(sessions: Vec<Session>, min_checkins: usize) -> Vec<Session> {
    let mut counts: BTreeMap<UserId, usize> = BTreeMap::new();
    for s in &sessions {
        *counts.entry(s.user).or_default() += s.len();
    }
    sessions
        .into_iter()
        .filter(|s| counts[&s.user] >= min_checkins)
        .collect()
}
