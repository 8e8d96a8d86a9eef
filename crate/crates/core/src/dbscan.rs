//! DBSCAN over projected points.
//!
//! Conventions:
//! - `min_pts` counts the point itself.
//! - Neighbourhoods are boundary inclusive (`d <= eps`).
//! - Clusters are numbered in order of discovery, scanning seeds by ascending
//!   point id, so cluster `k` is the component whose smallest core id is the
//!   `k`-th smallest. A border point reachable from several clusters goes to
//!   the first one discovered.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::PlanarPoint;
use crate::scalar::Scalar;
use crate::spatial::{GridIndex, SpatialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DbscanError {
    #[error("eps must be positive and finite, got {0}")]
    InvalidEps(f64),
    #[error("min_pts must be at least 1")]
    InvalidMinPts,
    #[error("index holds {index} points but {points} were given")]
    IndexMismatch { index: usize, points: usize },
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

/// DBSCAN sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    pub eps: T,
    pub min_pts: usize,
}

impl<T: Scalar> Params<T> {
    pub fn new(eps: T, min_pts: usize) -> Result<Self, DbscanError> {
        let p = Self { eps, min_pts };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DbscanError> {
        if !(self.eps > T::zero()) || !self.eps.is_finite() {
            return Err(DbscanError::InvalidEps(self.eps.as_f64()));
        }
        if self.min_pts < 1 {
            return Err(DbscanError::InvalidMinPts);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClusterLabel {
    Noise,
    Cluster(usize),
}

impl ClusterLabel {
    pub fn cluster(self) -> Option<usize> {
        match self {
            ClusterLabel::Noise => None,
            ClusterLabel::Cluster(c) => Some(c),
        }
    }

    pub fn is_noise(self) -> bool {
        matches!(self, ClusterLabel::Noise)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labeling<T> {
    pub labels: Vec<ClusterLabel>,
    pub core_flags: Vec<bool>,
    pub params: Params<T>,
    cluster_count: usize,
}

impl<T: Scalar> Labeling<T> {
    /// Wraps externally produced labels. Cluster ids must be contiguous.
    pub fn from_parts(labels: Vec<ClusterLabel>, core_flags: Vec<bool>, params: Params<T>) -> Self {
        let cluster_count = labels
            .iter()
            .filter_map(|l| l.cluster())
            .max()
            .map_or(0, |m| m + 1);
        Self {
            labels,
            core_flags,
            params,
            cluster_count,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_noise()).count()
    }

    /// Member ids per cluster, each ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count];
        for (id, label) in self.labels.iter().enumerate() {
            if let ClusterLabel::Cluster(c) = label {
                out[*c].push(id);
            }
        }
        out
    }
}

/// Runs DBSCAN using a prebuilt index over the same points.
///
/// The index is normally built with `cell_size = eps`; other cell sizes give
/// the same answer, just slower.
pub fn dbscan<T: Scalar>(
    points: &[PlanarPoint<T>],
    params: Params<T>,
    index: &GridIndex<T>,
) -> Result<Labeling<T>, DbscanError> {
    params.validate()?;
    if index.len() != points.len() {
        return Err(DbscanError::IndexMismatch {
            index: index.len(),
            points: points.len(),
        });
    }
    let eps = params.eps;
    let min_pts = params.min_pts;

    // Core predicate is order free; evaluate it up front.
    let core_flags: Vec<bool> = points
        .par_iter()
        .map(|&p| index.count_within(p, eps, min_pts) >= min_pts)
        .collect();

    let mut labels: Vec<Option<usize>> = vec![None; points.len()];
    let mut next_cluster = 0;
    let mut stack = Vec::new();
    for seed in 0..points.len() {
        if labels[seed].is_some() || !core_flags[seed] {
            continue;
        }
        let cid = next_cluster;
        next_cluster += 1;
        labels[seed] = Some(cid);
        stack.push(seed);
        while let Some(q) = stack.pop() {
            index.for_each_within(points[q], eps, |nb| {
                if labels[nb].is_none() {
                    labels[nb] = Some(cid);
                    if core_flags[nb] {
                        stack.push(nb);
                    }
                }
            });
        }
    }

    Ok(Labeling {
        labels: labels
            .into_iter()
            .map(|l| l.map_or(ClusterLabel::Noise, ClusterLabel::Cluster))
            .collect(),
        core_flags,
        params,
        cluster_count: next_cluster,
    })
}

/// Builds a grid with `cell_size = eps` and runs [`dbscan`].
pub fn dbscan_points<T: Scalar>(
    points: &[PlanarPoint<T>],
    params: Params<T>,
) -> Result<Labeling<T>, DbscanError> {
    params.validate()?;
    let index = GridIndex::build(points, params.eps)?;
    dbscan(points, params, &index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> PlanarPoint<f64> {
        PlanarPoint::new(x, y)
    }

    #[test]
    fn empty_input() {
        let l = dbscan_points::<f64>(&[], Params::new(1.0, 3).unwrap()).unwrap();
        assert!(l.is_empty());
        assert_eq!(l.cluster_count(), 0);
    }

    #[test]
    fn coincident_points_form_one_cluster() {
        let pts = vec![p(5.0, 5.0); 5];
        for eps in [0.001, 1.0, 1000.0] {
            let l = dbscan_points(&pts, Params::new(eps, 5).unwrap()).unwrap();
            assert_eq!(l.cluster_count(), 1);
            assert!(l.labels.iter().all(|&x| x == ClusterLabel::Cluster(0)));
        }
    }

    #[test]
    fn min_pts_counts_self() {
        let pts = [p(0.0, 0.0), p(1.0, 0.0)];
        let l = dbscan_points(&pts, Params::new(1.0, 2).unwrap()).unwrap();
        assert_eq!(l.core_flags, vec![true, true]);
        let l = dbscan_points(&pts, Params::new(1.0, 3).unwrap()).unwrap();
        assert_eq!(l.noise_count(), 2);
    }

    #[test]
    fn border_tie_break_ascending_ids() {
        // id 6 is a border point equidistant from two clusters
        let pts = [
            p(-4.0, 0.0),
            p(-4.0, 0.5),
            p(-4.0, -0.5),
            p(4.0, 0.0),
            p(4.0, 0.5),
            p(4.0, -0.5),
            p(0.0, 0.0),
        ];
        let l = dbscan_points(&pts, Params::new(4.0, 4).unwrap()).unwrap();
        assert_eq!(l.cluster_count(), 2);
        assert!(!l.core_flags[6]);
        assert_eq!(l.labels[6], ClusterLabel::Cluster(0));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Params::new(0.0, 3).is_err());
        assert!(Params::new(f64::INFINITY, 3).is_err());
        assert!(Params::new(1.0, 0).is_err());
    }

    #[test]
    fn rejects_mismatched_index() {
        let g = GridIndex::build(&[p(0.0, 0.0)], 1.0).unwrap();
        let err = dbscan(&[p(0.0, 0.0), p(1.0, 1.0)], Params::new(1.0, 1).unwrap(), &g).unwrap_err();
        assert!(matches!(err, DbscanError::IndexMismatch { .. }));
    }

    #[test]
    fn members_are_grouped() {
        let pts = [p(0.0, 0.0), p(100.0, 0.0), p(0.5, 0.0), p(100.5, 0.0)];
        let l = dbscan_points(&pts, Params::new(1.0, 2).unwrap()).unwrap();
        assert_eq!(l.members(), vec![vec![0, 2], vec![1, 3]]);
    }
}
