//! Iterative DBSCAN refinement.
//!
//! A depth-0 run clusters every photo and POI together. Each resulting
//! cluster that is too large (share of root non-noise points) or too wide
//! (max distance from its centroid) is re-clustered on its own members with
//! a smaller eps, depth first, until every leaf passes or `max_depth` is hit.

mod hull;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hull::{convex_hull, convex_hull_indices, HullError};

use crate::dbscan::{dbscan_points, DbscanError, Params};
use crate::geo::{centroid, project, unproject, GeoError, GeoPoint, PlanarPoint};
use crate::ingest::Dataset;
use crate::quality::{silhouette, SilhouetteError, DEFAULT_SAMPLE_CAP};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("dataset has no records")]
    EmptyDataset,
    #[error("invalid refine policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Dbscan(#[from] DbscanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum MinPtsPolicy {
    Keep,
    /// `min_pts' = max(floor, round(min_pts * eps_shrink))`
    Scale { floor: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinePolicy {
    pub max_fraction: f64,
    pub max_radius: f64,
    pub eps_shrink: f64,
    pub min_pts_policy: MinPtsPolicy,
    pub max_depth: usize,
    pub min_cluster_size: usize,
}

impl Default for RefinePolicy {
    fn default() -> Self {
        Self {
            max_fraction: 0.25,
            max_radius: 1_000.0,
            eps_shrink: 0.5,
            min_pts_policy: MinPtsPolicy::Keep,
            max_depth: 4,
            min_cluster_size: 30,
        }
    }
}

/// Default depth-0 sensitivity: 150 m, 25 points.
pub const DEFAULT_PARAMS: Params<f64> = Params {
    eps: 150.0,
    min_pts: 25,
};

impl RefinePolicy {
    pub fn validate(&self, initial: &Params<f64>) -> Result<(), RefineError> {
        let bad = |m: &str| Err(RefineError::InvalidPolicy(m.to_owned()));
        if !(self.max_fraction > 0.0 && self.max_fraction <= 1.0) {
            return bad("max_fraction must be in (0, 1]");
        }
        if !(self.max_radius > 0.0) || !self.max_radius.is_finite() {
            return bad("max_radius must be positive");
        }
        if !(self.eps_shrink > 0.0 && self.eps_shrink < 1.0) {
            return bad("eps_shrink must be in (0, 1)");
        }
        if self.min_cluster_size < initial.min_pts {
            return bad("min_cluster_size must be at least min_pts");
        }
        if let MinPtsPolicy::Scale { floor: 0 } = self.min_pts_policy {
            return bad("min_pts floor must be at least 1");
        }
        Ok(())
    }

    /// Parameters for re-clustering a child of a run that used `params`.
    pub fn shrink(&self, params: Params<f64>) -> Params<f64> {
        let min_pts = match self.min_pts_policy {
            MinPtsPolicy::Keep => params.min_pts,
            MinPtsPolicy::Scale { floor } => {
                floor.max((params.min_pts as f64 * self.eps_shrink).round() as usize)
            }
        };
        Params {
            eps: params.eps * self.eps_shrink,
            min_pts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteConfig {
    pub sample_cap: usize,
    pub seed: u64,
}

impl Default for SilhouetteConfig {
    fn default() -> Self {
        Self {
            sample_cap: DEFAULT_SAMPLE_CAP,
            seed: 0,
        }
    }
}

/// Mean position and the largest member distance from it.
pub fn cluster_extent<T: Scalar>(members: &[PlanarPoint<T>]) -> (PlanarPoint<T>, T) {
    if members.is_empty() {
        return (PlanarPoint::default(), T::zero());
    }
    let n = T::of(members.len() as f64);
    let c = PlanarPoint::new(
        members.iter().map(|p| p.x).sum::<T>() / n,
        members.iter().map(|p| p.y).sum::<T>() / n,
    );
    let r = members
        .iter()
        .map(|p| p.distance(c))
        .fold(T::zero(), T::max);
    (c, r)
}

/// `false` iff the cluster holds more than `max_fraction` of the root's
/// non-noise points, or reaches further than `max_radius` from its centroid.
pub fn is_satisfactory<T: Scalar>(
    members: &[PlanarPoint<T>],
    root_non_noise: usize,
    policy: &RefinePolicy,
) -> bool {
    let (_, radius) = cluster_extent(members);
    members.len() as f64 <= policy.max_fraction * root_non_noise as f64
        && radius.as_f64() <= policy.max_radius
}

/// Which record a pooled point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointSource {
    Photo(usize),
    Poi(usize),
}

/// A leaf of the refinement: one discovered city entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    /// Refinement path, e.g. `"0.2.1"`.
    pub id: String,
    pub depth: usize,
    /// Indices into `Dataset::photos`, ascending.
    pub member_photos: Vec<usize>,
    /// Indices into `Dataset::pois`, ascending.
    pub member_pois: Vec<usize>,
    /// Closed counter-clockwise ring of member coordinates.
    pub hull: Vec<GeoPoint>,
    pub centroid: GeoPoint,
    pub radius_m: f64,
    pub params_used: Params<f64>,
    pub silhouette_context: Option<f64>,
    /// Set when a sub-run found no clusters and this cluster was kept whole.
    pub fallback: bool,
}

impl Entity {
    pub fn member_count(&self) -> usize {
        self.member_photos.len() + self.member_pois.len()
    }

    pub fn member_photo_ids<'a>(&'a self, dataset: &'a Dataset) -> impl Iterator<Item = &'a str> + 'a {
        self.member_photos.iter().map(|&i| dataset.photos[i].id.as_str())
    }

    pub fn member_poi_ids<'a>(&'a self, dataset: &'a Dataset) -> impl Iterator<Item = &'a str> + 'a {
        self.member_pois.iter().map(|&i| dataset.pois[i].id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Leaf { entity: String },
    /// Below `min_cluster_size`; members returned to noise.
    Discarded,
    Refined { iteration: Box<Iteration> },
    /// Sub-run found no clusters; the cluster became a leaf as is (or was
    /// discarded when `entity` is `None` for being too small).
    Fallback {
        entity: Option<String>,
        iteration: Box<Iteration>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterNode {
    pub id: String,
    pub size: usize,
    pub radius_m: f64,
    pub satisfactory: bool,
    pub outcome: Outcome,
}

/// One DBSCAN run over a point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    /// Id of the cluster this run refines; empty for the root.
    pub parent: String,
    pub depth: usize,
    pub params: Params<f64>,
    pub point_count: usize,
    pub noise_count: usize,
    pub cluster_count: usize,
    pub silhouette: Option<f64>,
    pub silhouette_sampled: bool,
    pub silhouette_sample_size: usize,
    pub clusters: Vec<ClusterNode>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FateCounts {
    pub root_non_noise: usize,
    pub in_leaves: usize,
    pub discarded_small: usize,
    pub noise_in_subruns: usize,
}

impl FateCounts {
    pub fn balanced(&self) -> bool {
        self.root_non_noise == self.in_leaves + self.discarded_small + self.noise_in_subruns
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityTree {
    pub projection_origin: GeoPoint,
    pub policy: RefinePolicy,
    pub root: Iteration,
}

impl EntityTree {
    /// Where every root non-noise point ended up.
    pub fn fates(&self) -> FateCounts {
        fn walk(it: &Iteration, f: &mut FateCounts) {
            for node in &it.clusters {
                match &node.outcome {
                    Outcome::Leaf { .. } | Outcome::Fallback { entity: Some(_), .. } => {
                        f.in_leaves += node.size
                    }
                    Outcome::Discarded | Outcome::Fallback { entity: None, .. } => {
                        f.discarded_small += node.size
                    }
                    Outcome::Refined { iteration } => {
                        f.noise_in_subruns += iteration.noise_count;
                        walk(iteration, f);
                    }
                }
            }
        }
        let mut f = FateCounts {
            root_non_noise: self.root.point_count - self.root.noise_count,
            ..Default::default()
        };
        walk(&self.root, &mut f);
        f
    }

    /// Every iteration, depth first.
    pub fn iterations(&self) -> Vec<&Iteration> {
        fn walk<'a>(it: &'a Iteration, out: &mut Vec<&'a Iteration>) {
            out.push(it);
            for node in &it.clusters {
                match &node.outcome {
                    Outcome::Refined { iteration } | Outcome::Fallback { iteration, .. } => {
                        walk(iteration, out)
                    }
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    pub fn max_depth(&self) -> usize {
        self.iterations().iter().map(|it| it.depth).max().unwrap_or(0)
    }
}

/// Photos then POIs as one point set, projected around the dataset centroid.
pub struct PooledPoints {
    pub origin: GeoPoint,
    pub sources: Vec<PointSource>,
    pub geo: Vec<GeoPoint>,
    pub planar: Vec<PlanarPoint<f64>>,
}

impl PooledPoints {
    pub fn from_dataset(dataset: &Dataset) -> Result<Self, RefineError> {
        let sources: Vec<PointSource> = (0..dataset.photos.len())
            .map(PointSource::Photo)
            .chain((0..dataset.pois.len()).map(PointSource::Poi))
            .collect();
        let geo: Vec<GeoPoint> = sources
            .iter()
            .map(|s| match *s {
                PointSource::Photo(i) => dataset.photos[i].point,
                PointSource::Poi(i) => dataset.pois[i].point,
            })
            .collect();
        let origin = centroid(&geo).ok_or(RefineError::EmptyDataset)?;
        let planar = geo
            .iter()
            .map(|&g| project(g, origin))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            origin,
            sources,
            geo,
            planar,
        })
    }
}

pub struct RefineOutput {
    pub tree: EntityTree,
    pub entities: Vec<Entity>,
}

struct Refiner<'a> {
    pooled: &'a PooledPoints,
    policy: RefinePolicy,
    silhouette: SilhouetteConfig,
    root_non_noise: usize,
    iteration_ordinal: u64,
    entities: Vec<Entity>,
}

impl Refiner<'_> {
    fn run(&mut self, members: &[usize], params: Params<f64>, depth: usize, parent: &str) -> Result<Iteration, RefineError> {
        let points: Vec<PlanarPoint<f64>> = members.iter().map(|&i| self.pooled.planar[i]).collect();
        let labeling = dbscan_points(&points, params)?;

        let seed = self.silhouette.seed.wrapping_add(self.iteration_ordinal);
        self.iteration_ordinal += 1;
        let sil = match silhouette(&points, &labeling, self.silhouette.sample_cap, seed) {
            Ok(r) => Some(r),
            Err(SilhouetteError::Undefined { .. }) => None,
            Err(e) => unreachable!("silhouette inputs are consistent: {e}"),
        };
        if depth == 0 {
            self.root_non_noise = points.len() - labeling.noise_count();
        }

        let mut iteration = Iteration {
            parent: parent.to_owned(),
            depth,
            params,
            point_count: points.len(),
            noise_count: labeling.noise_count(),
            cluster_count: labeling.cluster_count(),
            silhouette: sil.as_ref().map(|s| s.overall),
            silhouette_sampled: sil.as_ref().is_some_and(|s| s.sampled),
            silhouette_sample_size: sil.as_ref().map_or(0, |s| s.sample_size),
            clusters: Vec::new(),
        };

        for (c, local) in labeling.members().into_iter().enumerate() {
            let id = if parent.is_empty() {
                c.to_string()
            } else {
                format!("{parent}.{c}")
            };
            let cluster_points: Vec<PlanarPoint<f64>> = local.iter().map(|&i| points[i]).collect();
            let cluster_members: Vec<usize> = local.iter().map(|&i| members[i]).collect();
            let (_, radius) = cluster_extent(&cluster_points);
            let satisfactory = is_satisfactory(&cluster_points, self.root_non_noise, &self.policy);
            let keep = cluster_members.len() >= self.policy.min_cluster_size;

            let outcome = if satisfactory || depth >= self.policy.max_depth {
                if keep {
                    self.push_entity(&id, depth, &cluster_members, params, iteration.silhouette, false);
                    Outcome::Leaf { entity: id.clone() }
                } else {
                    Outcome::Discarded
                }
            } else {
                let child = self.run(&cluster_members, self.policy.shrink(params), depth + 1, &id)?;
                if child.cluster_count == 0 {
                    let entity = keep.then(|| {
                        self.push_entity(&id, depth, &cluster_members, params, iteration.silhouette, true);
                        id.clone()
                    });
                    Outcome::Fallback {
                        entity,
                        iteration: Box::new(child),
                    }
                } else {
                    Outcome::Refined {
                        iteration: Box::new(child),
                    }
                }
            };
            iteration.clusters.push(ClusterNode {
                id,
                size: cluster_members.len(),
                radius_m: radius,
                satisfactory,
                outcome,
            });
        }
        Ok(iteration)
    }

    fn push_entity(
        &mut self,
        id: &str,
        depth: usize,
        members: &[usize],
        params: Params<f64>,
        silhouette_context: Option<f64>,
        fallback: bool,
    ) {
        let pooled = self.pooled;
        let planar: Vec<PlanarPoint<f64>> = members.iter().map(|&i| pooled.planar[i]).collect();
        let (center, radius) = cluster_extent(&planar);
        let mut hull: Vec<GeoPoint> = convex_hull_indices(&planar)
            .expect("clusters are non-empty")
            .into_iter()
            .map(|k| pooled.geo[members[k]])
            .collect();
        hull.push(hull[0]);

        let mut member_photos = Vec::new();
        let mut member_pois = Vec::new();
        for &m in members {
            match pooled.sources[m] {
                PointSource::Photo(i) => member_photos.push(i),
                PointSource::Poi(i) => member_pois.push(i),
            }
        }
        member_photos.sort_unstable();
        member_pois.sort_unstable();
        self.entities.push(Entity {
            id: id.to_owned(),
            depth,
            member_photos,
            member_pois,
            hull,
            centroid: unproject(center, pooled.origin),
            radius_m: radius,
            params_used: params,
            silhouette_context,
            fallback,
        });
    }
}

/// Runs the full refinement. Entities come back in depth-first order, which
/// is also ascending refinement-path order.
pub fn iterative_cluster(
    dataset: &Dataset,
    initial: Params<f64>,
    policy: RefinePolicy,
    silhouette: SilhouetteConfig,
) -> Result<RefineOutput, RefineError> {
    initial.validate()?;
    policy.validate(&initial)?;
    if dataset.is_empty() {
        return Err(RefineError::EmptyDataset);
    }
    let pooled = PooledPoints::from_dataset(dataset)?;
    iterative_cluster_pooled(&pooled, initial, policy, silhouette)
}

/// As [`iterative_cluster`], over already pooled and projected points.
pub fn iterative_cluster_pooled(
    pooled: &PooledPoints,
    initial: Params<f64>,
    policy: RefinePolicy,
    silhouette: SilhouetteConfig,
) -> Result<RefineOutput, RefineError> {
    initial.validate()?;
    policy.validate(&initial)?;
    if pooled.planar.is_empty() {
        return Err(RefineError::EmptyDataset);
    }
    let mut refiner = Refiner {
        pooled,
        policy,
        silhouette,
        root_non_noise: 0,
        iteration_ordinal: 0,
        entities: Vec::new(),
    };
    let all: Vec<usize> = (0..pooled.planar.len()).collect();
    let root = refiner.run(&all, initial, 0, "")?;
    Ok(RefineOutput {
        tree: EntityTree {
            projection_origin: pooled.origin,
            policy,
            root,
        },
        entities: refiner.entities,
    })
}
