//! Per-step attribute vectors and per-sequence feature vectors.

use serde::{Deserialize, Serialize};

use crate::data::{CategoryId, PoiId};

/// Context of one sequence element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeVector {
    /// Normalised average stay time of the location.
    pub stay: f64,
    /// Stay preference for the location averaged over users.
    pub ast: f64,
    /// Category stay preference at the arrival hour.
    pub ast_category_hour: f64,
    /// Population preference score for the location at the arrival hour.
    pub preference: f64,
    pub category: CategoryId,
    /// Popularity of the location in each hour of the day.
    pub hourly_popularity: [f64; 24],
    /// Distance from the previous element, km.
    pub distance_km: f64,
}

impl AttributeVector {
    pub const LEN: usize = 30;

    /// Raw values with the category as its label code.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::LEN);
        v.extend([self.stay, self.ast, self.ast_category_hour, self.preference, self.category.0 as f64]);
        v.extend(self.hourly_popularity);
        v.push(self.distance_km);
        v
    }
}

/// Summary of a whole sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub start_category: CategoryId,
    pub end_category: CategoryId,
    pub start: PoiId,
    pub end: PoiId,
    /// Mean distance between consecutive elements, km.
    pub mean_distance_km: f64,
    pub start_hour: usize,
    pub end_hour: usize,
}

impl FeatureVector {
    pub const LEN: usize = 7;

    /// Raw values with categories and locations as label codes.
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.start_category.0 as f64,
            self.end_category.0 as f64,
            self.start.0 as f64,
            self.end.0 as f64,
            self.mean_distance_km,
            self.start_hour as f64,
            self.end_hour as f64,
        ]
    }
}

/// Label code scaled to [0, 1].
pub(crate) fn code_unit(code: u32, count: usize) -> f64 {
    if count > 1 {
        code as f64 / (count - 1) as f64
    } else {
        0.0
    }
}

pub(crate) fn ratio(value: f64, max: f64) -> f64 {
    if max > 0.0 {
        value / max
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths() {
        let a = AttributeVector {
            stay: 0.1,
            ast: 0.2,
            ast_category_hour: 0.3,
            preference: 0.4,
            category: CategoryId(2),
            hourly_popularity: [0.5; 24],
            distance_km: 1.5,
        };
        let v = a.to_vec();
        assert_eq!(v.len(), AttributeVector::LEN);
        assert_eq!(v[4], 2.0);
        assert_eq!(v[29], 1.5);
        let f = FeatureVector {
            start_category: CategoryId(0),
            end_category: CategoryId(1),
            start: PoiId(3),
            end: PoiId(4),
            mean_distance_km: 1.0,
            start_hour: 9,
            end_hour: 10,
        };
        assert_eq!(f.to_vec(), vec![0.0, 1.0, 3.0, 4.0, 1.0, 9.0, 10.0]);
    }
}
