//! Deterministic synthetic check-ins on a small city grid.
//!
//! Every user gets a home, an office and a handful of favourite places near
//! them. Weekdays follow a commute routine (home, coffee, office, lunch,
//! office) with an evening outing; weekends start later with a park or coffee
//! and end with errands. Small random detours keep the data from being fully
//! deterministic. POI ids are assigned west to east so their label codes carry
//! coarse location.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::CheckinRecord;
use crate::geo::offset_km;
use crate::numerics::seeded;

/// 2010-05-03T00:00:00Z, a Monday.
const EPOCH: i64 = 1_272_844_800;
const CENTER: (f64, f64) = (40.0, -74.0);
const MIN: i64 = 60;
const HOUR: i64 = 3600;

const CATEGORIES: [(&str, f64); 8] = [
    ("Home:Residence", 0.22),
    ("Work:Office", 0.10),
    ("Food:Coffee Shop", 0.12),
    ("Food:Restaurant", 0.18),
    ("Nightlife:Bar", 0.10),
    ("Outdoors:Park", 0.08),
    ("Shop:Grocery", 0.10),
    ("Fitness:Gym", 0.10),
];
const HOME: usize = 0;
const OFFICE: usize = 1;
const COFFEE: usize = 2;
const RESTAURANT: usize = 3;
const BAR: usize = 4;
const PARK: usize = 5;
const GROCERY: usize = 6;
const GYM: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_users: usize,
    pub n_pois: usize,
    pub days: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            n_users: 60,
            n_pois: 200,
            days: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthData {
    pub records: Vec<CheckinRecord>,
    pub friendships: Vec<(String, String)>,
}

#[derive(Clone, Copy, Debug)]
struct Place {
    x: f64,
    y: f64,
    cat: usize,
}

struct City {
    places: Vec<Place>,
}

impl City {
    fn build(n: usize, rng: &mut ChaCha8Rng) -> City {
        let cats = allocate(n);
        let hoods = (n / 25).max(1);
        let side = 3.0 * (hoods as f64).sqrt();
        let centers: Vec<(f64, f64)> = (0..hoods)
            .map(|_| (rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
            .collect();
        let mut places: Vec<Place> = cats
            .into_iter()
            .map(|cat| {
                let (cx, cy) = if cat == OFFICE { centers[0] } else { *centers.choose(rng).expect("hoods") };
                let r = if cat == OFFICE { 0.8 } else { 1.2 };
                Place {
                    x: cx + rng.gen_range(-r..r),
                    y: cy + rng.gen_range(-r..r),
                    cat,
                }
            })
            .collect();
        places.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        City { places }
    }

    /// Indices of places of `cat` ordered by distance from `from`; falls back
    /// to every place when the category is absent.
    fn nearest(&self, cat: usize, from: Place, count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.places.len()).filter(|&i| self.places[i].cat == cat).collect();
        if idx.is_empty() {
            idx = (0..self.places.len()).collect();
        }
        let d = |i: usize| {
            let p = self.places[i];
            (p.x - from.x).hypot(p.y - from.y)
        };
        idx.sort_by(|&a, &b| d(a).total_cmp(&d(b)).then(a.cmp(&b)));
        idx.truncate(count.max(1));
        idx
    }

    fn random_of(&self, cat: usize, rng: &mut ChaCha8Rng) -> usize {
        let idx: Vec<usize> = (0..self.places.len()).filter(|&i| self.places[i].cat == cat).collect();
        if idx.is_empty() {
            rng.gen_range(0..self.places.len())
        } else {
            *idx.choose(rng).expect("non-empty")
        }
    }
}

/// Category per POI, proportional to the shares (every category at least once
/// when `n` allows it).
fn allocate(n: usize) -> Vec<usize> {
    if n < CATEGORIES.len() {
        return (0..n).collect();
    }
    let mut counts: Vec<usize> = CATEGORIES.iter().map(|(_, s)| ((s * n as f64) as usize).max(1)).collect();
    while counts.iter().sum::<usize>() < n {
        let c = counts.iter().sum::<usize>() % CATEGORIES.len();
        counts[c] += 1;
    }
    while counts.iter().sum::<usize>() > n {
        let c = (0..counts.len()).max_by_key(|&c| counts[c]).expect("categories");
        counts[c] -= 1;
    }
    counts.iter().enumerate().flat_map(|(c, &k)| std::iter::repeat(c).take(k)).collect()
}

struct Persona {
    home: usize,
    work: usize,
    coffee: usize,
    weekend_coffee: usize,
    lunch: [usize; 2],
    dinner: usize,
    park: usize,
    grocery: usize,
    bar: usize,
    gym: usize,
    /// Evening habit weights over gym, bar and grocery.
    evening: [f64; 3],
}

impl Persona {
    fn sample(city: &City, rng: &mut ChaCha8Rng) -> Persona {
        let home = city.random_of(HOME, rng);
        let work = city.random_of(OFFICE, rng);
        let hp = city.places[home];
        let wp = city.places[work];
        let pick = |cat: usize, from: Place, k: usize, rng: &mut ChaCha8Rng| *city.nearest(cat, from, k).choose(rng).expect("non-empty");
        let mut lunch = city.nearest(RESTAURANT, wp, 3);
        lunch.shuffle(rng);
        let lunch = [lunch[0], *lunch.get(1).unwrap_or(&lunch[0])];
        let favourite = rng.gen_range(0..3);
        let mut evening = [0.2; 3];
        evening[favourite] = 0.6;
        Persona {
            home,
            work,
            coffee: pick(COFFEE, hp, 2, rng),
            weekend_coffee: pick(COFFEE, hp, 3, rng),
            lunch,
            dinner: pick(RESTAURANT, hp, 3, rng),
            park: pick(PARK, hp, 2, rng),
            grocery: pick(GROCERY, hp, 2, rng),
            bar: pick(BAR, hp, 3, rng),
            gym: pick(GYM, hp, 2, rng),
            evening,
        }
    }
}

fn jitter(rng: &mut ChaCha8Rng, minutes: i64) -> i64 {
    rng.gen_range(-minutes..=minutes) * MIN
}

fn choose_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn day_plan(p: &Persona, weekday: bool, rng: &mut ChaCha8Rng) -> Vec<(usize, i64)> {
    let mut plan = Vec::new();
    if weekday {
        let t0 = 7 * HOUR + rng.gen_range(0..60) * MIN;
        plan.push((p.home, t0));
        if rng.gen_bool(0.75) {
            plan.push((p.coffee, t0 + 35 * MIN + jitter(rng, 10)));
        }
        plan.push((p.work, 8 * HOUR + 45 * MIN + jitter(rng, 10)));
        let lunch_at = 12 * HOUR + rng.gen_range(0..30) * MIN;
        let lunch = if rng.gen_bool(0.7) { p.lunch[0] } else { p.lunch[1] };
        plan.push((lunch, lunch_at));
        plan.push((p.work, lunch_at + 55 * MIN + jitter(rng, 10)));
        if rng.gen_bool(0.85) {
            let a = 18 * HOUR + rng.gen_range(0..60) * MIN;
            let activity = [p.gym, p.bar, p.grocery][choose_weighted(rng, &p.evening)];
            plan.push((activity, a));
            let mut t = a + 75 * MIN + jitter(rng, 15);
            if rng.gen_bool(0.6) {
                plan.push((p.dinner, t));
                t += 80 * MIN + jitter(rng, 15);
            }
            plan.push((p.home, t));
        }
    } else {
        let t0 = 9 * HOUR + 30 * MIN + rng.gen_range(0..60) * MIN;
        plan.push((p.home, t0));
        let first = if rng.gen_bool(0.7) { p.park } else { p.weekend_coffee };
        plan.push((first, t0 + 40 * MIN + jitter(rng, 10)));
        if first == p.park {
            plan.push((p.weekend_coffee, t0 + 130 * MIN + jitter(rng, 15)));
        }
        plan.push((p.dinner, 13 * HOUR + jitter(rng, 20)));
        if rng.gen_bool(0.6) {
            plan.push((p.grocery, 15 * HOUR + jitter(rng, 20)));
        }
        plan.push((p.home, 16 * HOUR + 15 * MIN + jitter(rng, 20)));
        if rng.gen_bool(0.5) {
            plan.push((p.bar, 20 * HOUR + 30 * MIN + jitter(rng, 20)));
            plan.push((p.home, 23 * HOUR + jitter(rng, 20)));
        }
    }
    plan
}

/// Generate `days` of check-ins for `n_users` users over `n_pois` places.
pub fn synth_dataset(cfg: &SynthConfig) -> SynthData {
    let mut rng = seeded(cfg.seed);
    let n_pois = cfg.n_pois.max(1);
    let city = City::build(n_pois, &mut rng);
    let width_p = n_pois.to_string().len().max(3);
    let width_u = cfg.n_users.max(1).to_string().len().max(3);
    let poi_name = |i: usize| format!("p{i:0width_p$}");
    let user_name = |i: usize| format!("u{i:0width_u$}");
    let coords: Vec<(f64, f64)> = city
        .places
        .iter()
        .map(|p| {
            let (lat, lon) = offset_km(CENTER.0, CENTER.1, p.y, p.x);
            ((lat * 1e6).round() / 1e6, (lon * 1e6).round() / 1e6)
        })
        .collect();

    let personas: Vec<Persona> = (0..cfg.n_users).map(|_| Persona::sample(&city, &mut rng)).collect();
    let mut records = Vec::new();
    for (u, persona) in personas.iter().enumerate() {
        for day in 0..cfg.days {
            let weekday = day % 7 < 5;
            let mut plan = day_plan(persona, weekday, &mut rng);
            for (poi, _) in plan.iter_mut() {
                if rng.gen_bool(0.08) {
                    let here = city.places[*poi];
                    *poi = *city.nearest(here.cat, here, 4).choose(&mut rng).expect("non-empty");
                }
            }
            let mut last = i64::MIN;
            for (poi, offset) in plan {
                let ts = (EPOCH + day as i64 * 24 * HOUR + offset).max(last + MIN);
                last = ts;
                let (lat, lon) = coords[poi];
                records.push(CheckinRecord {
                    user_id: user_name(u),
                    poi_id: poi_name(poi),
                    timestamp: ts,
                    lat,
                    lon,
                    category: CATEGORIES[city.places[poi].cat.min(CATEGORIES.len() - 1)].0.to_string(),
                    city: Some("Synthville".into()),
                });
            }
        }
    }

    let mut friendships = Vec::new();
    for a in 0..cfg.n_users {
        for b in a + 1..cfg.n_users {
            let same_office = personas[a].work == personas[b].work;
            let p = if same_office { 0.5 } else { 0.02 };
            if rng.gen_bool(p) {
                friendships.push((user_name(a), user_name(b)));
            }
        }
    }
    SynthData { records, friendships }
}
