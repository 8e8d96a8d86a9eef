//! Synthetic scenarios shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use urbent_core::geo::{unproject, BoundingBox, GeoPoint, PlanarPoint};
use urbent_core::ingest::{BlobSpec, SyntheticSpec};

pub const MILANO: GeoPoint = GeoPoint {
    lat: 45.4642,
    lon: 9.19,
};

pub fn milano_bbox() -> BoundingBox {
    BoundingBox::new(45.40, 45.53, 9.10, 9.28).unwrap()
}

fn weights(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_owned(), v)).collect()
}

fn base(bbox: BoundingBox, noise_fraction: f64, blobs: Vec<BlobSpec>) -> SyntheticSpec {
    SyntheticSpec {
        bbox,
        noise_fraction,
        min_separation_sigma: None,
        time_start: "2010-01-01T00:00:00Z".into(),
        time_end: "2016-12-31T23:59:59Z".into(),
        users: 200,
        tags_per_photo: [1, 4],
        noise_tags: weights(&[("milano", 3.0), ("italy", 1.0), ("street", 1.0)]),
        noise_categories: weights(&[("Food", 2.0), ("Shop & Service", 1.0)]),
        blobs,
    }
}

fn blob(center: GeoPoint, sigma: f64, photos: usize, pois: usize, i: usize) -> BlobSpec {
    BlobSpec {
        center: Some([center.lat, center.lon]),
        offset_m: None,
        parent: None,
        sigma_m: sigma,
        photos,
        pois,
        tags: weights(&[
            (&format!("place{i}"), 4.0),
            (&format!("event{i}"), 1.0),
            ("milano", 2.0),
            ("geotagged", 1.0),
        ]),
        categories: weights(&[
            ("Arts & Entertainment", 1.0 + i as f64),
            ("Food", 2.0),
            ("Travel & Transport", 1.0),
        ]),
    }
}

/// `k` equal Gaussian blobs on a ring whose neighbouring centers are
/// `separation_sigma * sigma` apart; the generator enforces that spacing.
pub fn ring_of_blobs(k: usize, sigma: f64, photos: usize, pois: usize, noise: f64, separation_sigma: f64) -> SyntheticSpec {
    let chord = separation_sigma * sigma;
    let radius = if k == 1 {
        0.0
    } else {
        // small margin so float rounding never trips the check
        chord / (2.0 * (std::f64::consts::PI / k as f64).sin()) * 1.001
    };
    let blobs = (0..k)
        .map(|i| {
            let a = i as f64 / k as f64 * std::f64::consts::TAU;
            let c = unproject(PlanarPoint::new(radius * a.cos(), radius * a.sin()), MILANO);
            blob(c, sigma, photos, pois, i)
        })
        .collect();
    let mut spec = base(milano_bbox(), noise, blobs);
    spec.min_separation_sigma = Some(separation_sigma);
    spec
}

/// A sparse wide "city center" blob (index 3) holding three dense
/// landmarks (indices 0..2) 500 m from its center.
pub fn nested_center(parent_photos: usize, child_photos: usize) -> SyntheticSpec {
    let mut blobs = Vec::new();
    for i in 0..3 {
        let a = i as f64 / 3.0 * std::f64::consts::TAU;
        let mut b = blob(MILANO, 40.0, child_photos, child_photos / 10, i);
        b.center = None;
        b.offset_m = Some([500.0 * a.cos(), 500.0 * a.sin()]);
        b.parent = Some(3);
        blobs.push(b);
    }
    blobs.push(blob(MILANO, 800.0, parent_photos, parent_photos / 10, 3));
    base(milano_bbox(), 0.0, blobs)
}

/// Parameters under which the nested scenario is exercised: depth 0 is
/// coarse enough to merge the whole center, one shrink step lands near the
/// landmark scale.
pub fn nested_run() -> (urbent_core::Params64, urbent_core::refine::RefinePolicy) {
    (
        urbent_core::Params64::new(200.0, 25).unwrap(),
        urbent_core::refine::RefinePolicy {
            eps_shrink: 0.25,
            max_fraction: 0.5,
            ..Default::default()
        },
    )
}

/// `(ground truth blob, predicted entity or None)` for every record the
/// generator placed in a blob.
pub fn truth_vs_prediction(
    dataset: &urbent_core::ingest::Dataset,
    entities: &[&urbent_core::refine::Entity],
) -> (Vec<usize>, Vec<Option<String>>) {
    use urbent_core::ingest::GroundTruth;
    let mut predicted = std::collections::HashMap::new();
    for e in entities {
        for id in e.member_photo_ids(dataset).chain(e.member_poi_ids(dataset)) {
            predicted.insert(id, e.id.clone());
        }
    }
    let truth = dataset.ground_truth.as_ref().expect("synthetic dataset");
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (id, g) in truth {
        if let GroundTruth::Blob(k) = g {
            a.push(*k);
            b.push(predicted.get(id.as_str()).cloned());
        }
    }
    (a, b)
}

/// Four Gaussian blobs over a uniform background in a 1 km square; every
/// tenth point snapped to a 5 m lattice so exact-eps distances occur.
pub fn planar_scene(seed: u64, n: usize) -> Vec<urbent_core::PlanarPoint64> {
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<(f64, f64)> = (0..4)
        .map(|_| (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)))
        .collect();
    let spread = Normal::new(0.0, 40.0).unwrap();
    (0..n)
        .map(|i| {
            let (x, y) = if i % 3 == 0 {
                (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0))
            } else {
                let c = centers[rng.random_range(0..centers.len())];
                (c.0 + spread.sample(&mut rng), c.1 + spread.sample(&mut rng))
            };
            if i % 10 == 0 {
                urbent_core::PlanarPoint64::new((x / 5.0).round() * 5.0, (y / 5.0).round() * 5.0)
            } else {
                urbent_core::PlanarPoint64::new(x, y)
            }
        })
        .collect()
}

/// Uniform points in a 500 m square with 2..5 arbitrary cluster labels
/// and every eleventh point noise.
pub fn labeled_scene(seed: u64, n: usize) -> (Vec<urbent_core::PlanarPoint64>, urbent_core::Labeling64) {
    use rand::{Rng, SeedableRng};
    use urbent_core::dbscan::ClusterLabel;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(2..6);
    let points = (0..n)
        .map(|_| urbent_core::PlanarPoint64::new(rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)))
        .collect();
    let labels = (0..n)
        .map(|i| if i % 11 == 0 { ClusterLabel::Noise } else { ClusterLabel::Cluster(i % k) })
        .collect();
    let labeling =
        urbent_core::Labeling64::from_parts(labels, vec![true; n], urbent_core::Params64::new(1.0, 1).unwrap());
    (points, labeling)
}

/// A city-sized dataset: 40 blobs on a jittered grid, 10% uniform noise,
/// exactly 450,000 photos and 50,000 POIs.
pub fn city_scale(seed: u64) -> SyntheticSpec {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut blobs = Vec::new();
    for i in 0..6 {
        for j in 0..7 {
            if blobs.len() == 40 {
                break;
            }
            let c = GeoPoint {
                lat: 45.415 + i as f64 * 0.02 + rng.random_range(-0.003..0.003),
                lon: 9.115 + j as f64 * 0.024 + rng.random_range(-0.003..0.003),
            };
            let sigma = [100.0, 150.0, 200.0, 250.0, 300.0][rng.random_range(0..5)];
            blobs.push(blob(c, sigma, 10_125, 1_125, blobs.len()));
        }
    }
    let mut spec = base(milano_bbox(), 0.1, blobs);
    spec.users = 5_000;
    spec
}
