use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    derive_visits, filter_users, sessionize, CheckinRecord, Encodings, PoiId, PoiInfo, Session, SocialGraph, TravelTime,
    UserId, Visit, SESSION_WINDOW_SECS,
};
use crate::error::{Error, Result};
use crate::geo::haversine_km;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    /// Users with fewer visits are removed entirely.
    pub min_checkins: usize,
    /// Fit a log-normal speed model instead of the 5 km/h walking default.
    pub lognormal_travel: bool,
    pub window_secs: i64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            min_checkins: 25,
            lognormal_travel: false,
            window_secs: SESSION_WINDOW_SECS,
        }
    }
}

/// Encoded, sessionized check-in data.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub encodings: Encodings,
    pub pois: Vec<PoiInfo>,
    pub sessions: Vec<Session>,
    pub social: SocialGraph,
    pub travel: TravelTime,
}

impl Dataset {
    pub fn from_records(records: &[CheckinRecord], friendships: &[(String, String)], cfg: &IngestConfig) -> Dataset {
        let (enc, catalog) = Encodings::build(records);
        let mut per_user: Vec<Vec<(PoiId, i64)>> = vec![Vec::new(); enc.num_users()];
        for r in records {
            let u = enc.user(&r.user_id).expect("encoded");
            per_user[u.index()].push((enc.poi(&r.poi_id).expect("encoded"), r.timestamp));
        }
        for list in per_user.iter_mut() {
            list.sort_by_key(|&(_, t)| t);
        }
        let travel = if cfg.lognormal_travel {
            let pairs: Vec<(f64, i64)> = per_user
                .iter()
                .flat_map(|list| {
                    list.windows(2).map(|w| {
                        let (a, b) = (&catalog[w[0].0.index()], &catalog[w[1].0.index()]);
                        (haversine_km(a.lat, a.lon, b.lat, b.lon), w[1].1 - w[0].1)
                    })
                })
                .collect();
            TravelTime::fit_lognormal(&pairs).unwrap_or_else(|| {
                log::warn!("too few consecutive pairs to fit log-normal travel time; walking model used");
                TravelTime::default()
            })
        } else {
            TravelTime::default()
        };
        let sessions: Vec<Session> = per_user
            .iter()
            .enumerate()
            .flat_map(|(u, list)| {
                let visits = derive_visits(list, &catalog, &travel);
                sessionize(UserId::from(u), &visits, cfg.window_secs)
            })
            .collect();
        let sessions = filter_users(sessions, cfg.min_checkins);
        let social = SocialGraph::from_named_edges(&enc, friendships);
        Dataset {
            encodings: enc,
            pois: catalog,
            sessions,
            social,
            travel,
        }
        .compact()
    }

    /// Re-encode so only users and POIs that appear in sessions keep codes.
    fn compact(self) -> Dataset {
        let users: BTreeSet<UserId> = self.sessions.iter().map(|s| s.user).collect();
        let pois: BTreeSet<PoiId> = self.sessions.iter().flat_map(|s| s.pois()).collect();
        let cats: BTreeSet<_> = pois.iter().map(|p| self.pois[p.index()].category).collect();
        let users: Vec<UserId> = users.into_iter().collect();
        let pois: Vec<PoiId> = pois.into_iter().collect();
        let cats: Vec<_> = cats.into_iter().collect();
        let mut user_map = vec![None; self.encodings.num_users()];
        users.iter().enumerate().for_each(|(i, u)| user_map[u.index()] = Some(UserId::from(i)));
        let mut poi_map = vec![None; self.encodings.num_pois()];
        pois.iter().enumerate().for_each(|(i, p)| poi_map[p.index()] = Some(PoiId::from(i)));
        let mut cat_map = vec![None; self.encodings.num_categories()];
        cats.iter().enumerate().for_each(|(i, c)| cat_map[c.index()] = Some(super::CategoryId::from(i)));

        let enc = Encodings::from_lists(
            users.iter().map(|&u| self.encodings.user_name(u).to_string()).collect(),
            pois.iter().map(|&p| self.encodings.poi_name(p).to_string()).collect(),
            cats.iter().map(|&c| self.encodings.category_name(c).to_string()).collect(),
        );
        let catalog = pois
            .iter()
            .map(|p| {
                let info = &self.pois[p.index()];
                PoiInfo {
                    lat: info.lat,
                    lon: info.lon,
                    category: cat_map[info.category.index()].expect("kept category"),
                }
            })
            .collect();
        let sessions = self
            .sessions
            .iter()
            .map(|s| Session {
                user: user_map[s.user.index()].expect("kept user"),
                start: s.start,
                end: s.end,
                visits: s
                    .visits
                    .iter()
                    .map(|v| Visit {
                        poi: poi_map[v.poi.index()].expect("kept poi"),
                        ..*v
                    })
                    .collect(),
            })
            .collect();
        Dataset {
            encodings: enc,
            pois: catalog,
            sessions,
            social: self.social.remap(&users),
            travel: self.travel,
        }
    }

    pub fn num_pois(&self) -> usize {
        self.pois.len()
    }

    pub fn num_users(&self) -> usize {
        self.encodings.num_users()
    }

    pub fn num_categories(&self) -> usize {
        self.encodings.num_categories()
    }

    pub fn poi(&self, p: PoiId) -> &PoiInfo {
        &self.pois[p.index()]
    }

    pub fn distance_km(&self, a: PoiId, b: PoiId) -> f64 {
        let (a, b) = (self.poi(a), self.poi(b));
        haversine_km(a.lat, a.lon, b.lat, b.lon)
    }

    pub fn travel_secs(&self, a: PoiId, b: PoiId) -> f64 {
        self.travel.seconds(self.poi(a), self.poi(b))
    }

    /// Same catalog and encodings, different sessions.
    pub fn with_sessions(&self, sessions: Vec<Session>) -> Dataset {
        Dataset {
            encodings: self.encodings.clone(),
            pois: self.pois.clone(),
            sessions,
            social: self.social.clone(),
            travel: self.travel,
        }
    }

    pub fn total_visits(&self) -> usize {
        self.sessions.iter().map(Session::len).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct Catalog {
    travel_time: TravelTime,
    pois: Vec<PoiInfo>,
    social: SocialGraph,
}

#[derive(Serialize, Deserialize)]
struct SessionsHeader {
    format: String,
    version: u32,
    seed: Option<u64>,
    sessions: usize,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: SessionsHeader,
}

pub const SESSIONS_FILE: &str = "sessions.jsonl";
pub const ENCODINGS_FILE: &str = "encodings.json";
pub const CATALOG_FILE: &str = "catalog.json";

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Write `sessions.jsonl` (header line, then one session per line),
/// `encodings.json` and `catalog.json` into `dir`.
pub fn write_canonical(dir: &Path, data: &Dataset, seed: Option<u64>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(SESSIONS_FILE);
    let mut w = create(&path)?;
    let header = HeaderLine {
        header: SessionsHeader {
            format: "caps-sessions".into(),
            version: 1,
            seed,
            sessions: data.sessions.len(),
        },
    };
    serde_json::to_writer(&mut w, &header)?;
    writeln!(w).map_err(|e| Error::io(&path, e))?;
    for s in &data.sessions {
        serde_json::to_writer(&mut w, s)?;
        writeln!(w).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(ENCODINGS_FILE);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &data.encodings)?;
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(CATALOG_FILE);
    let mut w = create(&path)?;
    let catalog = Catalog {
        travel_time: data.travel,
        pois: data.pois.clone(),
        social: data.social.clone(),
    };
    serde_json::to_writer(&mut w, &catalog)?;
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn read_canonical(dir: &Path) -> Result<Dataset> {
    let open = |name: &str| {
        let p = dir.join(name);
        File::open(&p).map(BufReader::new).map_err(|e| Error::io(p, e))
    };
    let encodings: Encodings = serde_json::from_reader(open(ENCODINGS_FILE)?)?;
    let catalog: Catalog = serde_json::from_reader(open(CATALOG_FILE)?)?;
    let mut sessions = Vec::new();
    for line in open(SESSIONS_FILE)?.lines() {
        let line = line.map_err(|e| Error::io(dir.join(SESSIONS_FILE), e))?;
        if line.trim().is_empty() || line.starts_with("{\"header\"") {
            continue;
        }
        sessions.push(serde_json::from_str::<Session>(&line)?);
    }
    if catalog.pois.len() != encodings.num_pois() {
        return Err(Error::Invalid("catalog and encodings disagree on poi count".into()));
    }
    for s in &sessions {
        if s.user.index() >= encodings.num_users() || s.pois().any(|p| p.index() >= encodings.num_pois()) {
            return Err(Error::Invalid("session refers to an unknown code".into()));
        }
    }
    Ok(Dataset {
        encodings,
        pois: catalog.pois,
        sessions,
        social: catalog.social,
        travel: catalog.travel_time,
    })
}
