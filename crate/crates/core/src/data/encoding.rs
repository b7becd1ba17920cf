use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::CheckinRecord;
use crate::error::{Error, Result};

macro_rules! dense_id {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            fn from(i: usize) -> Self {
                $name(i as u32)
            }
        }
    };
}

dense_id!(
    /// Dense POI code in `0..|L|`.
    PoiId
);
dense_id!(
    /// Dense user code.
    UserId
);
dense_id!(
    /// Dense category code.
    CategoryId
);

/// Static description of a POI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoiInfo {
    pub lat: f64,
    pub lon: f64,
    pub category: CategoryId,
}

/// Bijective label encodings for users, POIs and categories.
///
/// Codes are assigned in lexicographic order of the raw ids, so identical
/// inputs always produce identical encodings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EncodingMaps", into = "EncodingMaps")]
pub struct Encodings {
    users: Vec<String>,
    pois: Vec<String>,
    categories: Vec<String>,
    user_index: HashMap<String, UserId>,
    poi_index: HashMap<String, PoiId>,
    category_index: HashMap<String, CategoryId>,
}

#[derive(Serialize, Deserialize)]
struct EncodingMaps {
    users: BTreeMap<String, u32>,
    pois: BTreeMap<String, u32>,
    categories: BTreeMap<String, u32>,
}

fn invert(map: &BTreeMap<String, u32>, what: &str) -> Result<Vec<String>> {
    let mut out = vec![None; map.len()];
    for (k, &v) in map {
        let slot = out
            .get_mut(v as usize)
            .ok_or_else(|| Error::Invalid(format!("{what} code {v} out of range")))?;
        if slot.is_some() {
            return Err(Error::Invalid(format!("{what} code {v} assigned twice")));
        }
        *slot = Some(k.clone());
    }
    Ok(out.into_iter().map(|s| s.expect("dense codes")).collect())
}

impl TryFrom<EncodingMaps> for Encodings {
    type Error = Error;
    fn try_from(m: EncodingMaps) -> Result<Self> {
        Ok(Encodings::from_lists(
            invert(&m.users, "user")?,
            invert(&m.pois, "poi")?,
            invert(&m.categories, "category")?,
        ))
    }
}

impl From<Encodings> for EncodingMaps {
    fn from(e: Encodings) -> Self {
        let enumerate = |v: &[String]| v.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        EncodingMaps {
            users: enumerate(&e.users),
            pois: enumerate(&e.pois),
            categories: enumerate(&e.categories),
        }
    }
}

impl Encodings {
    /// Build from explicit code-ordered lists (`list[i]` gets code `i`).
    pub fn from_lists(users: Vec<String>, pois: Vec<String>, categories: Vec<String>) -> Self {
        let index = |v: &[String]| v.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect::<HashMap<_, _>>();
        Encodings {
            user_index: index(&users).into_iter().map(|(k, i)| (k, UserId::from(i))).collect(),
            poi_index: index(&pois).into_iter().map(|(k, i)| (k, PoiId::from(i))).collect(),
            category_index: index(&categories).into_iter().map(|(k, i)| (k, CategoryId::from(i))).collect(),
            users,
            pois,
            categories,
        }
    }

    /// Encode every id seen in `records`, plus the POI catalog (first
    /// occurrence of each POI defines its coordinates and category).
    pub fn build(records: &[CheckinRecord]) -> (Encodings, Vec<PoiInfo>) {
        let users: BTreeSet<&str> = records.iter().map(|r| r.user_id.as_str()).collect();
        let pois: BTreeSet<&str> = records.iter().map(|r| r.poi_id.as_str()).collect();
        let cats: BTreeSet<&str> = records.iter().map(|r| r.category.as_str()).collect();
        let owned = |s: BTreeSet<&str>| s.into_iter().map(str::to_string).collect::<Vec<_>>();
        let enc = Encodings::from_lists(owned(users), owned(pois), owned(cats));
        let mut catalog: Vec<Option<PoiInfo>> = vec![None; enc.num_pois()];
        for r in records {
            let p = enc.poi_index[&r.poi_id].index();
            if catalog[p].is_none() {
                catalog[p] = Some(PoiInfo {
                    lat: r.lat,
                    lon: r.lon,
                    category: enc.category_index[&r.category],
                });
            }
        }
        (enc, catalog.into_iter().map(|p| p.expect("every poi seen")).collect())
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_pois(&self) -> usize {
        self.pois.len()
    }

    pub fn num_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn user(&self, id: &str) -> Option<UserId> {
        self.user_index.get(id).copied()
    }

    pub fn poi(&self, id: &str) -> Option<PoiId> {
        self.poi_index.get(id).copied()
    }

    pub fn category(&self, id: &str) -> Option<CategoryId> {
        self.category_index.get(id).copied()
    }

    pub fn user_name(&self, u: UserId) -> &str {
        &self.users[u.index()]
    }

    pub fn poi_name(&self, p: PoiId) -> &str {
        &self.pois[p.index()]
    }

    pub fn category_name(&self, c: CategoryId) -> &str {
        &self.categories[c.index()]
    }

    pub fn user_names(&self) -> &[String] {
        &self.users
    }

    pub fn poi_names(&self) -> &[String] {
        &self.pois
    }

    pub fn category_names(&self) -> &[String] {
        &self.categories
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(u: &str, p: &str, c: &str) -> CheckinRecord {
        CheckinRecord {
            user_id: u.into(),
            poi_id: p.into(),
            timestamp: 1,
            lat: 1.0,
            lon: 2.0,
            category: c.into(),
            city: None,
        }
    }

    #[test]
    fn codes_follow_lexicographic_order() {
        let (enc, pois) = Encodings::build(&[rec("b", "y", "B"), rec("a", "x", "A"), rec("a", "y", "B")]);
        assert_eq!(enc.user("a"), Some(UserId(0)));
        assert_eq!(enc.poi("y"), Some(PoiId(1)));
        assert_eq!(pois[1].category, CategoryId(1));
        assert_eq!(enc.poi("zzz"), None);
    }

    proptest! {
        #[test]
        fn roundtrip(ids in prop::collection::btree_set("[a-z0-9]{1,6}", 1..30)) {
            let records: Vec<_> = ids.iter().map(|s| rec(s, &format!("p{s}"), &format!("c{}", s.len()))).collect();
            let (enc, _) = Encodings::build(&records);
            for s in &ids {
                let u = enc.user(s).unwrap();
                prop_assert_eq!(enc.user_name(u), s.as_str());
                let p = enc.poi(&format!("p{s}")).unwrap();
                prop_assert_eq!(enc.poi_name(p), format!("p{s}"));
            }
            let json = serde_json::to_string(&enc).unwrap();
            let back: Encodings = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, enc);
        }
    }

    #[test]
    fn rejects_non_bijective_maps() {
        let json = r#"{"users":{"a":0,"b":0},"pois":{},"categories":{}}"#;
        assert!(serde_json::from_str::<Encodings>(json).is_err());
    }
}
