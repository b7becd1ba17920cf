use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One raw check-in row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckinRecord {
    pub user_id: String,
    pub poi_id: String,
    /// UTC seconds.
    pub timestamp: i64,
    pub lat: f64,
    pub lon: f64,
    /// Hierarchical, `:`-separated.
    pub category: String,
    pub city: Option<String>,
}

impl CheckinRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.user_id.is_empty() {
            return Err("empty user id".into());
        }
        if self.poi_id.is_empty() {
            return Err("empty place id".into());
        }
        if self.category.is_empty() {
            return Err("empty category".into());
        }
        if !(self.lat.is_finite() && (-90.0..=90.0).contains(&self.lat)) {
            return Err(format!("latitude {} out of range", self.lat));
        }
        if !(self.lon.is_finite() && (-180.0..=180.0).contains(&self.lon)) {
            return Err(format!("longitude {} out of range", self.lon));
        }
        if self.timestamp <= 0 {
            return Err(format!("non-positive timestamp {}", self.timestamp));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Weeplaces,
    Gowalla,
}

impl FromStr for InputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "weeplaces" => Ok(InputFormat::Weeplaces),
            "gowalla" => Ok(InputFormat::Gowalla),
            other => Err(Error::Config(format!("unknown input format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ParsedCheckins {
    pub records: Vec<CheckinRecord>,
    pub dropped: usize,
    pub total: usize,
}

struct Columns {
    user: usize,
    poi: usize,
    time: usize,
    lat: usize,
    lon: usize,
    category: usize,
    city: Option<usize>,
}

fn find(header: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    header
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

impl Columns {
    fn resolve(header: &csv::StringRecord, format: InputFormat) -> Result<Columns> {
        let req = |names: &[&str]| find(header, names).ok_or_else(|| Error::MissingColumn(names[0].to_string()));
        let (user, poi, time, lat, lon, category): (&[&str], &[&str], &[&str], &[&str], &[&str], &[&str]) = match format {
            InputFormat::Weeplaces => (
                &["userid"],
                &["placeid"],
                &["datetime"],
                &["lat"],
                &["lon"],
                &["category"],
            ),
            InputFormat::Gowalla => (
                &["userid", "user_id", "user"],
                &["placeid", "place_id", "spot_id", "location_id", "locationid"],
                &["datetime", "checkin_time", "created_at", "time"],
                &["lat", "latitude"],
                &["lng", "lon", "longitude"],
                &["category", "spot_categories", "categories"],
            ),
        };
        Ok(Columns {
            user: req(user)?,
            poi: req(poi)?,
            time: req(time)?,
            lat: req(lat)?,
            lon: req(lon)?,
            category: req(category)?,
            city: find(header, &["city"]),
        })
    }
}

/// Parse an ISO-8601 timestamp; naive values are taken as UTC.
pub(crate) fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    None
}

/// Gowalla dumps store categories as `[{'url': ..., 'name': 'Coffee Shop'}]`.
fn gowalla_category(raw: &str) -> String {
    if let Some(start) = raw.find("'name':") {
        let rest = raw[start + 7..].trim_start();
        let rest = rest.trim_start_matches(['\'', '"']);
        if let Some(end) = rest.find(['\'', '"']) {
            return rest[..end].trim().to_string();
        }
    }
    raw.trim().to_string()
}

fn parse_row(row: &csv::StringRecord, cols: &Columns, format: InputFormat) -> std::result::Result<CheckinRecord, String> {
    let field = |i: usize| row.get(i).map(str::trim).ok_or_else(|| format!("missing field {i}"));
    let timestamp = parse_timestamp(field(cols.time)?).ok_or("unparseable datetime")?;
    let lat: f64 = field(cols.lat)?.parse().map_err(|_| "bad latitude".to_string())?;
    let lon: f64 = field(cols.lon)?.parse().map_err(|_| "bad longitude".to_string())?;
    let raw_cat = field(cols.category)?;
    let category = match format {
        InputFormat::Weeplaces => raw_cat.to_string(),
        InputFormat::Gowalla => gowalla_category(raw_cat),
    };
    let city = cols
        .city
        .and_then(|i| row.get(i))
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(str::to_string);
    let rec = CheckinRecord {
        user_id: field(cols.user)?.to_string(),
        poi_id: field(cols.poi)?.to_string(),
        timestamp,
        lat,
        lon,
        category,
        city,
    };
    rec.validate()?;
    Ok(rec)
}

/// Parse check-ins from any reader. Malformed rows are dropped and counted;
/// more than half dropped is fatal. Output is sorted by `(user, timestamp)`.
pub fn parse_checkins_from_reader<R: Read>(reader: R, format: InputFormat) -> Result<ParsedCheckins> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let cols = Columns::resolve(&header, format)?;
    let mut out = ParsedCheckins::default();
    let mut first_problem = None;
    for row in rdr.records() {
        out.total += 1;
        let parsed = row.map_err(|e| e.to_string()).and_then(|r| parse_row(&r, &cols, format));
        match parsed {
            Ok(rec) => out.records.push(rec),
            Err(why) => {
                out.dropped += 1;
                if first_problem.is_none() {
                    first_problem = Some(format!("row {}: {why}", out.total));
                }
            }
        }
    }
    if out.total > 0 && out.dropped * 2 > out.total {
        return Err(Error::TooManyDropped {
            dropped: out.dropped,
            total: out.total,
            first: first_problem.unwrap_or_default(),
        });
    }
    if out.dropped > 0 {
        log::warn!(
            "dropped {} of {} malformed rows ({})",
            out.dropped,
            out.total,
            first_problem.unwrap_or_default()
        );
    }
    out.records
        .sort_by(|a, b| a.user_id.cmp(&b.user_id).then(a.timestamp.cmp(&b.timestamp)));
    Ok(out)
}

pub fn parse_checkins(path: &Path, format: InputFormat) -> Result<ParsedCheckins> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_checkins_from_reader(std::io::BufReader::new(file), format)
}

/// Friendship edge list with a header row; the first two columns are user ids.
pub fn parse_friendships(path: &Path) -> Result<Vec<(String, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let mut edges = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if let (Some(a), Some(b)) = (row.get(0), row.get(1)) {
            let (a, b) = (a.trim(), b.trim());
            if !a.is_empty() && !b.is_empty() {
                edges.push((a.to_string(), b.to_string()));
            }
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_row_converts() {
        let csv = "userid,placeid,datetime,lat,lon,category\nu1,p1,2010-05-01T09:00:00Z,40.0,-74.0,Food:Coffee Shop\n";
        let parsed = parse_checkins_from_reader(csv.as_bytes(), InputFormat::Weeplaces).unwrap();
        assert_eq!(parsed.records.len(), 1);
        let r = &parsed.records[0];
        assert_eq!(r.timestamp, 1272704400);
        assert_eq!(r.category, "Food:Coffee Shop");
        assert_eq!(r.city, None);
    }

    #[test]
    fn empty_poi_is_dropped() {
        let csv = "userid,placeid,datetime,lat,lon,city,category\n\
                   u1,,2010-05-01T09:00:00Z,40.0,-74.0,NYC,Food\n\
                   u1,p1,2010-05-01T10:00:00Z,40.0,-74.0,NYC,Food\n\
                   u1,p2,2010-05-01T11:00:00Z,40.0,-74.0,NYC,Food\n";
        let parsed = parse_checkins_from_reader(csv.as_bytes(), InputFormat::Weeplaces).unwrap();
        assert_eq!(parsed.dropped, 1);
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.records[0].city.as_deref(), Some("NYC"));
    }

    #[test]
    fn majority_garbage_is_fatal() {
        let csv = "userid,placeid,datetime,lat,lon,category\nu1,p1,nope,1,1,A\nu1,p1,never,1,1,A\nu1,p1,2010-05-01 09:00:00,1,1,A\n";
        match parse_checkins_from_reader(csv.as_bytes(), InputFormat::Weeplaces) {
            Err(Error::TooManyDropped { dropped, total, .. }) => assert_eq!((dropped, total), (2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_column_is_reported() {
        let csv = "userid,placeid,lat,lon,category\n";
        assert!(matches!(
            parse_checkins_from_reader(csv.as_bytes(), InputFormat::Weeplaces),
            Err(Error::MissingColumn(c)) if c == "datetime"
        ));
    }

    #[test]
    fn gowalla_aliases_and_category_lists() {
        let csv = "user,spot_id,created_at,lng,lat,spot_categories\n\
                   7,s1,2010-10-19T23:55:27Z,-97.75,30.26,\"[{'url': '/categories/34', 'name': 'Coffee Shop'}]\"\n";
        let parsed = parse_checkins_from_reader(csv.as_bytes(), InputFormat::Gowalla).unwrap();
        let r = &parsed.records[0];
        assert_eq!(r.category, "Coffee Shop");
        assert_eq!(r.lat, 30.26);
        assert_eq!(r.lon, -97.75);
    }

    #[test]
    fn output_sorted_by_user_then_time() {
        let csv = "userid,placeid,datetime,lat,lon,category\n\
                   b,p1,2010-05-01T09:00:00Z,1,1,A\n\
                   a,p1,2010-05-01T10:00:00Z,1,1,A\n\
                   a,p2,2010-05-01T08:00:00Z,1,1,A\n";
        let parsed = parse_checkins_from_reader(csv.as_bytes(), InputFormat::Weeplaces).unwrap();
        let keys: Vec<_> = parsed.records.iter().map(|r| (r.user_id.as_str(), r.poi_id.as_str())).collect();
        assert_eq!(keys, vec![("a", "p2"), ("a", "p1"), ("b", "p1")]);
    }
}
