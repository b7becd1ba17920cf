//! Great-circle helpers on a spherical earth.

/// Mean earth radius used for every distance in the crate.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Haversine distance between two `(lat, lon)` points given in degrees.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// Offset a point by `north_km` / `east_km` using a local flat approximation.
pub fn offset_km(lat: f64, lon: f64, north_km: f64, east_km: f64) -> (f64, f64) {
    let dlat = (north_km / EARTH_RADIUS_KM).to_degrees();
    let dlon = (east_km / (EARTH_RADIUS_KM * lat.to_radians().cos())).to_degrees();
    (lat + dlat, lon + dlon)
}
