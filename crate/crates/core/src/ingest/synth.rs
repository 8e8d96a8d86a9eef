//! Seeded synthetic datasets with ground-truth blob labels.
//!
//! A spec is a TOML document:
//!
//! ```toml
//! noise_fraction = 0.1          # share of all records drawn uniformly in bbox
//! min_separation_sigma = 10.0   # optional sibling-center spacing check
//! time_start = "2010-01-01T00:00:00Z"
//! time_end = "2016-12-31T23:59:59Z"
//! users = 200
//! tags_per_photo = [1, 4]       # inclusive range
//! noise_tags = { milano = 1.0 }
//! noise_categories = { Food = 1.0 }
//!
//! [bbox]
//! min_lat = 45.3
//! max_lat = 45.6
//! min_lon = 9.0
//! max_lon = 9.4
//!
//! [[blob]]
//! center = [45.4642, 9.1900]    # or offset_m = [east, north] with `parent`
//! sigma_m = 40.0
//! photos = 300
//! pois = 20
//! parent = 3                    # optional: nested inside blob 3
//! tags = { duomo = 3.0, milano = 1.0 }
//! categories = { "Arts & Entertainment" = 2.0, Food = 1.0 }
//! ```
//!
//! Blob `i` labels its records `i`; a nested child is labelled with its own
//! index, never its parent's.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{csv_io::parse_timestamp, Dataset, GroundTruth, PhotoRecord, PoiCategory, PoiRecord};
use crate::geo::{bbox_contains, haversine_distance, unproject, BoundingBox, GeoPoint, PlanarPoint};

const MAX_PLACEMENT_TRIES: usize = 10_000;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("could not parse synthetic spec: {0}")]
    Parse(#[from] toml::de::Error),
}

fn invalid(msg: impl Into<String>) -> SynthError {
    SynthError::InvalidSpec(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    #[serde(default)]
    pub center: Option<[f64; 2]>,
    #[serde(default)]
    pub offset_m: Option<[f64; 2]>,
    #[serde(default)]
    pub parent: Option<usize>,
    pub sigma_m: f64,
    pub photos: usize,
    #[serde(default)]
    pub pois: usize,
    #[serde(default)]
    pub tags: BTreeMap<String, f64>,
    #[serde(default)]
    pub categories: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub bbox: BoundingBox,
    #[serde(default)]
    pub noise_fraction: f64,
    #[serde(default)]
    pub min_separation_sigma: Option<f64>,
    #[serde(default = "default_time_start")]
    pub time_start: String,
    #[serde(default = "default_time_end")]
    pub time_end: String,
    #[serde(default = "default_users")]
    pub users: usize,
    #[serde(default = "default_tags_per_photo")]
    pub tags_per_photo: [usize; 2],
    #[serde(default)]
    pub noise_tags: BTreeMap<String, f64>,
    #[serde(default)]
    pub noise_categories: BTreeMap<String, f64>,
    #[serde(rename = "blob")]
    pub blobs: Vec<BlobSpec>,
}

fn default_time_start() -> String {
    "2010-01-01T00:00:00Z".into()
}
fn default_time_end() -> String {
    "2016-12-31T23:59:59Z".into()
}
fn default_users() -> usize {
    100
}
fn default_tags_per_photo() -> [usize; 2] {
    [1, 3]
}

impl SyntheticSpec {
    pub fn from_toml_str(s: &str) -> Result<Self, SynthError> {
        Ok(toml::from_str(s)?)
    }

    /// Absolute blob centers, resolving `offset_m` against parents.
    pub fn centers(&self) -> Result<Vec<GeoPoint>, SynthError> {
        let mut out = Vec::with_capacity(self.blobs.len());
        for (i, b) in self.blobs.iter().enumerate() {
            let c = match (b.center, b.offset_m, b.parent) {
                (Some([lat, lon]), None, _) => GeoPoint::new(lat, lon)
                    .map_err(|e| invalid(format!("blob {i}: {e}")))?,
                (None, Some([east, north]), Some(parent)) => {
                    let pc = self.blobs.get(parent).and_then(|p| p.center).ok_or_else(|| {
                        invalid(format!("blob {i}: parent {parent} must exist and have an absolute center"))
                    })?;
                    let origin = GeoPoint { lat: pc[0], lon: pc[1] };
                    unproject(PlanarPoint::new(east, north), origin)
                }
                _ => {
                    return Err(invalid(format!(
                        "blob {i}: give either `center`, or `offset_m` together with `parent`"
                    )))
                }
            };
            out.push(c);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<Vec<GeoPoint>, SynthError> {
        if self.blobs.is_empty() {
            return Err(invalid("at least one blob is required"));
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return Err(invalid("noise_fraction must be in [0, 1)"));
        }
        if self.users == 0 {
            return Err(invalid("users must be positive"));
        }
        if self.tags_per_photo[0] > self.tags_per_photo[1] {
            return Err(invalid("tags_per_photo must be [min, max] with min <= max"));
        }
        let start = parse_timestamp(&self.time_start).ok_or_else(|| invalid("bad time_start"))?;
        let end = parse_timestamp(&self.time_end).ok_or_else(|| invalid("bad time_end"))?;
        if start > end {
            return Err(invalid("time_start after time_end"));
        }
        for (i, b) in self.blobs.iter().enumerate() {
            if !(b.sigma_m > 0.0) || !b.sigma_m.is_finite() {
                return Err(invalid(format!("blob {i}: sigma_m must be positive")));
            }
            if b.photos == 0 {
                return Err(invalid(format!("blob {i}: photos must be positive")));
            }
            if let Some(p) = b.parent {
                if p == i || p >= self.blobs.len() || self.blobs[p].parent.is_some() {
                    return Err(invalid(format!("blob {i}: parent must be another top-level blob")));
                }
            }
            check_weights(&b.tags, &format!("blob {i} tags"))?;
            check_weights(&b.categories, &format!("blob {i} categories"))?;
            category_table(&b.categories)?;
        }
        check_weights(&self.noise_tags, "noise_tags")?;
        check_weights(&self.noise_categories, "noise_categories")?;
        category_table(&self.noise_categories)?;

        let centers = self.centers()?;
        for (i, c) in centers.iter().enumerate() {
            if !bbox_contains(&self.bbox, *c) {
                return Err(invalid(format!("blob {i}: center outside bbox")));
            }
        }
        if let Some(k) = self.min_separation_sigma {
            for i in 0..self.blobs.len() {
                for j in i + 1..self.blobs.len() {
                    if self.blobs[i].parent != self.blobs[j].parent {
                        continue;
                    }
                    let need = k * self.blobs[i].sigma_m.max(self.blobs[j].sigma_m);
                    let d = haversine_distance(centers[i], centers[j]);
                    if d < need {
                        return Err(invalid(format!(
                            "blobs {i} and {j} are {d:.1} m apart; need at least {need:.1} m"
                        )));
                    }
                }
            }
        }
        Ok(centers)
    }
}

fn check_weights(w: &BTreeMap<String, f64>, what: &str) -> Result<(), SynthError> {
    if w.values().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(invalid(format!("{what}: weights must be positive")));
    }
    Ok(())
}

fn category_table(w: &BTreeMap<String, f64>) -> Result<Vec<(PoiCategory, f64)>, SynthError> {
    w.iter()
        .map(|(label, &weight)| {
            PoiCategory::from_label(label)
                .map(|c| (c, weight))
                .ok_or_else(|| invalid(format!("unknown POI category {label:?}")))
        })
        .collect()
}

struct Weighted<T> {
    items: Vec<T>,
    index: Option<WeightedIndex<f64>>,
}

impl<T: Clone> Weighted<T> {
    fn new(pairs: Vec<(T, f64)>) -> Self {
        let index = (!pairs.is_empty())
            .then(|| WeightedIndex::new(pairs.iter().map(|p| p.1)).expect("validated weights"));
        Self {
            items: pairs.into_iter().map(|p| p.0).collect(),
            index,
        }
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> Option<T> {
        self.index.as_ref().map(|d| self.items[d.sample(rng)].clone())
    }
}

struct Draws<'a> {
    rng: ChaCha8Rng,
    spec: &'a SyntheticSpec,
    start: i64,
    end: i64,
    photos: Vec<PhotoRecord>,
    pois: Vec<PoiRecord>,
    truth: BTreeMap<String, GroundTruth>,
}

impl Draws<'_> {
    fn photo(&mut self, point: GeoPoint, tags: &Weighted<String>, label: GroundTruth) {
        let id = format!("p{:07}", self.photos.len());
        let taken_at = self.rng.random_range(self.start..=self.end);
        let user = self.rng.random_range(0..self.spec.users);
        let [lo, hi] = self.spec.tags_per_photo;
        let n_tags = self.rng.random_range(lo..=hi);
        let tags = (0..n_tags).filter_map(|_| tags.pick(&mut self.rng)).collect();
        self.truth.insert(id.clone(), label);
        self.photos.push(PhotoRecord {
            id,
            point,
            taken_at,
            tags,
            user_id: format!("u{user:05}"),
        });
    }

    fn poi(&mut self, point: GeoPoint, cats: &Weighted<PoiCategory>, label: GroundTruth) {
        let id = format!("v{:07}", self.pois.len());
        let category = cats.pick(&mut self.rng).unwrap_or(PoiCategory::Other);
        self.truth.insert(id.clone(), label);
        self.pois.push(PoiRecord { id, point, category });
    }

    fn gaussian_point(&mut self, center: GeoPoint, sigma: f64, blob: usize) -> Result<GeoPoint, SynthError> {
        let normal = Normal::new(0.0, sigma).expect("validated sigma");
        for _ in 0..MAX_PLACEMENT_TRIES {
            let east = normal.sample(&mut self.rng);
            let north = normal.sample(&mut self.rng);
            let p = unproject(PlanarPoint::new(east, north), center);
            if bbox_contains(&self.spec.bbox, p) {
                return Ok(p);
            }
        }
        Err(invalid(format!("blob {blob}: cannot place points inside bbox")))
    }

    fn uniform_point(&mut self) -> GeoPoint {
        let b = self.spec.bbox;
        GeoPoint {
            lat: self.rng.random_range(b.min_lat..=b.max_lat),
            lon: self.rng.random_range(b.min_lon..=b.max_lon),
        }
    }
}

fn noise_count(clustered: usize, fraction: f64) -> usize {
    (clustered as f64 * fraction / (1.0 - fraction)).round() as usize
}

/// Deterministic for a fixed `(spec, seed)`.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Dataset, SynthError> {
    let centers = spec.validate()?;
    let mut d = Draws {
        rng: ChaCha8Rng::seed_from_u64(seed),
        spec,
        start: parse_timestamp(&spec.time_start).expect("validated"),
        end: parse_timestamp(&spec.time_end).expect("validated"),
        photos: Vec::new(),
        pois: Vec::new(),
        truth: BTreeMap::new(),
    };

    for (i, (blob, &center)) in spec.blobs.iter().zip(&centers).enumerate() {
        let tags = Weighted::new(blob.tags.iter().map(|(t, &w)| (t.clone(), w)).collect());
        let cats = Weighted::new(category_table(&blob.categories)?);
        for _ in 0..blob.photos {
            let p = d.gaussian_point(center, blob.sigma_m, i)?;
            d.photo(p, &tags, GroundTruth::Blob(i));
        }
        for _ in 0..blob.pois {
            let p = d.gaussian_point(center, blob.sigma_m, i)?;
            d.poi(p, &cats, GroundTruth::Blob(i));
        }
    }

    let tags = Weighted::new(spec.noise_tags.iter().map(|(t, &w)| (t.clone(), w)).collect());
    let cats = Weighted::new(category_table(&spec.noise_categories)?);
    let clustered_photos = d.photos.len();
    let clustered_pois = d.pois.len();
    for _ in 0..noise_count(clustered_photos, spec.noise_fraction) {
        let p = d.uniform_point();
        d.photo(p, &tags, GroundTruth::Noise);
    }
    for _ in 0..noise_count(clustered_pois, spec.noise_fraction) {
        let p = d.uniform_point();
        d.poi(p, &cats, GroundTruth::Noise);
    }

    Dataset::new(d.photos, d.pois, spec.bbox, Some(d.truth))
        .map_err(|e| invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::project;

    fn one_blob(photos: usize, noise: f64) -> SyntheticSpec {
        SyntheticSpec::from_toml_str(&format!(
            r#"
            noise_fraction = {noise}
            [bbox]
            min_lat = 45.3
            max_lat = 45.6
            min_lon = 9.0
            max_lon = 9.4
            [[blob]]
            center = [45.4642, 9.19]
            sigma_m = 50.0
            photos = {photos}
            pois = 10
            tags = {{ duomo = 2.0, milano = 1.0 }}
            categories = {{ Food = 1.0, "Arts & Entertainment" = 1.0 }}
            "#
        ))
        .unwrap()
    }

    #[test]
    fn single_blob_deterministic() {
        let spec = one_blob(100, 0.0);
        let a = generate_synthetic(&spec, 7).unwrap();
        let b = generate_synthetic(&spec, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.photos.len(), 100);
        let truth = a.ground_truth.as_ref().unwrap();
        assert!(a.photos.iter().all(|p| truth[&p.id] == GroundTruth::Blob(0)));
        let c = generate_synthetic(&spec, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_fraction_respected() {
        let d = generate_synthetic(&one_blob(900, 0.1), 1).unwrap();
        assert_eq!(d.photos.len(), 1000);
        let truth = d.ground_truth.unwrap();
        let noise = d.photos.iter().filter(|p| truth[&p.id] == GroundTruth::Noise).count();
        assert_eq!(noise, 100);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = one_blob(10, 0.0);
        s.blobs[0].photos = 0;
        assert!(generate_synthetic(&s, 0).is_err());
        let mut s = one_blob(10, 0.0);
        s.blobs[0].sigma_m = 0.0;
        assert!(generate_synthetic(&s, 0).is_err());
        let mut s = one_blob(10, 0.0);
        s.blobs[0].sigma_m = -3.0;
        assert!(generate_synthetic(&s, 0).is_err());
        let mut s = one_blob(10, 0.0);
        s.blobs[0].categories.insert("Zoo".into(), 1.0);
        assert!(generate_synthetic(&s, 0).is_err());
        assert!(SyntheticSpec::from_toml_str("nonsense = ").is_err());
    }

    #[test]
    fn separation_enforced() {
        let mut s = one_blob(10, 0.0);
        s.min_separation_sigma = Some(10.0);
        let mut b = s.blobs[0].clone();
        b.center = Some([45.4642 + 0.004, 9.19]); // ~445 m north, below 500 m
        s.blobs.push(b);
        assert!(matches!(generate_synthetic(&s, 0), Err(SynthError::InvalidSpec(_))));
        s.blobs[1].center = Some([45.4642 + 0.005, 9.19]); // ~556 m
        assert!(generate_synthetic(&s, 0).is_ok());
    }

    #[test]
    fn nested_children_labelled_separately() {
        let spec = SyntheticSpec::from_toml_str(
            r#"
            [bbox]
            min_lat = 45.3
            max_lat = 45.6
            min_lon = 9.0
            max_lon = 9.4
            [[blob]]
            parent = 3
            offset_m = [500.0, 0.0]
            sigma_m = 40.0
            photos = 200
            [[blob]]
            parent = 3
            offset_m = [-250.0, 433.0]
            sigma_m = 40.0
            photos = 200
            [[blob]]
            parent = 3
            offset_m = [-250.0, -433.0]
            sigma_m = 40.0
            photos = 200
            [[blob]]
            center = [45.4642, 9.19]
            sigma_m = 800.0
            photos = 1000
            "#,
        )
        .unwrap();
        let d = generate_synthetic(&spec, 3).unwrap();
        let truth = d.ground_truth.as_ref().unwrap();
        let centers = spec.centers().unwrap();
        let mut counts = [0usize; 4];
        for p in &d.photos {
            let GroundTruth::Blob(b) = truth[&p.id] else { panic!() };
            counts[b] += 1;
            if b < 3 {
                let q = project::<f64>(p.point, centers[b]).unwrap();
                // 6 sigma: essentially impossible for a Gaussian draw
                assert!(q.distance(PlanarPoint::new(0.0, 0.0)) < 240.0);
            }
        }
        assert_eq!(counts, [200, 200, 200, 1000]);
    }
}
