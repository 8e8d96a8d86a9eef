//! Silhouette coefficient of a DBSCAN labeling.
//!
//! Noise is excluded entirely. Members of singleton clusters score 0. Above
//! `sample_cap` evaluated points, a seeded uniform sample is scored, but each
//! sampled point is still compared against full cluster memberships.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dbscan::Labeling;
use crate::geo::PlanarPoint;
use crate::scalar::Scalar;

/// Default number of points scored before switching to sampling.
pub const DEFAULT_SAMPLE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SilhouetteError {
    #[error("silhouette is undefined for {clusters} cluster(s); need at least 2")]
    Undefined { clusters: usize },
    #[error("labeling covers {labels} points but {points} were given")]
    LengthMismatch { labels: usize, points: usize },
    #[error("sample cap must be at least 1")]
    ZeroSampleCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteResult {
    pub overall: f64,
    pub per_cluster: BTreeMap<usize, f64>,
    pub sampled: bool,
    pub sample_size: usize,
    /// `(point id, s(i))` for every evaluated point, ascending id.
    #[serde(skip)]
    pub per_point: Vec<(usize, f64)>,
}

struct ClusterCoords<T> {
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Scalar> ClusterCoords<T> {
    fn len(&self) -> usize {
        self.xs.len()
    }

    /// Sum of distances from `p` to every member. Four independent
    /// accumulators let the loop vectorise; the order is fixed.
    #[inline]
    fn distance_sum(&self, p: PlanarPoint<T>) -> T {
        let mut acc = [T::zero(); 4];
        let xs = self.xs.chunks_exact(4);
        let ys = self.ys.chunks_exact(4);
        let (xr, yr) = (xs.remainder(), ys.remainder());
        for (cx, cy) in xs.zip(ys) {
            for k in 0..4 {
                let dx = cx[k] - p.x;
                let dy = cy[k] - p.y;
                acc[k] += (dx * dx + dy * dy).sqrt();
            }
        }
        let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
        for (&x, &y) in xr.iter().zip(yr) {
            let dx = x - p.x;
            let dy = y - p.y;
            sum += (dx * dx + dy * dy).sqrt();
        }
        sum
    }
}

pub fn silhouette<T: Scalar>(
    points: &[PlanarPoint<T>],
    labeling: &Labeling<T>,
    sample_cap: usize,
    seed: u64,
) -> Result<SilhouetteResult, SilhouetteError> {
    if labeling.len() != points.len() {
        return Err(SilhouetteError::LengthMismatch {
            labels: labeling.len(),
            points: points.len(),
        });
    }
    if sample_cap == 0 {
        return Err(SilhouetteError::ZeroSampleCap);
    }
    let k = labeling.cluster_count();
    if k < 2 {
        return Err(SilhouetteError::Undefined { clusters: k });
    }

    let mut clusters: Vec<ClusterCoords<T>> = (0..k)
        .map(|_| ClusterCoords {
            xs: Vec::new(),
            ys: Vec::new(),
        })
        .collect();
    let mut clustered: Vec<(usize, usize)> = Vec::new();
    for (id, label) in labeling.labels.iter().enumerate() {
        if let Some(c) = label.cluster() {
            clusters[c].xs.push(points[id].x);
            clusters[c].ys.push(points[id].y);
            clustered.push((id, c));
        }
    }

    let sampled = clustered.len() > sample_cap;
    let evaluated: Vec<(usize, usize)> = if sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picks = rand::seq::index::sample(&mut rng, clustered.len(), sample_cap).into_vec();
        picks.sort_unstable();
        picks.into_iter().map(|i| clustered[i]).collect()
    } else {
        clustered
    };

    let scores: Vec<f64> = evaluated
        .par_iter()
        .map(|&(id, own)| point_score(points[id], own, &clusters).as_f64())
        .collect();

    let mut per_cluster_sum: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    let mut total = 0.0;
    for (&(_, c), &s) in evaluated.iter().zip(&scores) {
        total += s;
        let e = per_cluster_sum.entry(c).or_insert((0.0, 0));
        e.0 += s;
        e.1 += 1;
    }
    let sample_size = evaluated.len();
    Ok(SilhouetteResult {
        overall: if sample_size == 0 { 0.0 } else { total / sample_size as f64 },
        per_cluster: per_cluster_sum
            .into_iter()
            .map(|(c, (s, n))| (c, s / n as f64))
            .collect(),
        sampled,
        sample_size,
        per_point: evaluated.iter().map(|&(id, _)| id).zip(scores).collect(),
    })
}

fn point_score<T: Scalar>(p: PlanarPoint<T>, own: usize, clusters: &[ClusterCoords<T>]) -> T {
    let own_len = clusters[own].len();
    if own_len <= 1 {
        return T::zero();
    }
    // self-distance is zero, so the raw sum over the cluster is the sum over others
    let a = clusters[own].distance_sum(p) / T::of((own_len - 1) as f64);
    let b = clusters
        .iter()
        .enumerate()
        .filter(|&(c, cc)| c != own && cc.len() > 0)
        .map(|(_, cc)| cc.distance_sum(p) / T::of(cc.len() as f64))
        .fold(T::infinity(), T::min);
    let denom = a.max(b);
    if denom > T::zero() && denom.is_finite() {
        ((b - a) / denom).max(-T::one()).min(T::one())
    } else {
        T::zero()
    }
}
