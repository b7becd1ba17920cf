//! Check-in ingestion: parsing, visit derivation, sessionization, label
//! encoding and the synthetic generator used for desk-scale experiments.

mod dataset;
mod encoding;
mod record;
mod session;
mod social;
mod synth;
mod visit;

pub use dataset::{read_canonical, write_canonical, Dataset, IngestConfig};
pub use encoding::{CategoryId, Encodings, PoiId, PoiInfo, UserId};
pub(crate) use record::parse_timestamp;
pub use record::{parse_checkins, parse_checkins_from_reader, parse_friendships, CheckinRecord, InputFormat, ParsedCheckins};
pub use session::{filter_users, sessionize, Session, SESSION_WINDOW_SECS};
pub use social::SocialGraph;
pub use synth::{synth_dataset, SynthConfig, SynthData};
pub use visit::{derive_visits, hour_of_day, TravelTime, Visit, FALLBACK_STAY_SECS};
