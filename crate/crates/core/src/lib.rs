//! Discovery and profiling of city entities from geo-tagged photo and POI
//! records.
//!
//! Pipeline: [`ingest`] → projection ([`geo`]) → iterative DBSCAN
//! ([`spatial`], [`dbscan`], [`refine`]) with silhouette reporting
//! ([`quality`]) → per-entity profiles ([`characterize`]).
//!
//! Planar geometry is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the pipeline uses.

pub mod characterize;
pub mod dbscan;
pub mod geo;
pub mod ingest;
pub mod quality;
pub mod refine;
pub mod scalar;
pub mod spatial;

pub use scalar::Scalar;

pub type PlanarPoint64 = geo::PlanarPoint<f64>;
pub type PlanarPoint32 = geo::PlanarPoint<f32>;
pub type GridIndex64 = spatial::GridIndex<f64>;
pub type GridIndex32 = spatial::GridIndex<f32>;
pub type Params64 = dbscan::Params<f64>;
pub type Labeling64 = dbscan::Labeling<f64>;
