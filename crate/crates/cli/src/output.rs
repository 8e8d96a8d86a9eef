//! Report documents and all-or-nothing writes into the output directory.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;
use urbent_core::characterize::EntityProfile;
use urbent_core::dbscan::Params;
use urbent_core::geo::GeoPoint;
use urbent_core::ingest::IngestReport;
use urbent_core::refine::{EntityTree, Entity, FateCounts};

use crate::config::RunConfig;
use crate::CliError;

/// Files are written to temporaries inside the target directory and renamed
/// into place only once every one of them was written.
pub struct Staging {
    dir: PathBuf,
    files: Vec<(NamedTempFile, &'static str)>,
}

impl Staging {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_owned(),
            files: Vec::new(),
        })
    }

    pub fn stage(
        &mut self,
        name: &'static str,
        fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let target = self.dir.join(name);
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(|e| CliError::io(&target, e))?;
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&target, e))?;
        drop(w);
        tmp.as_file().sync_all().map_err(|e| CliError::io(&target, e))?;
        self.files.push((tmp, name));
        Ok(())
    }

    pub fn stage_json(&mut self, name: &'static str, value: &impl Serialize) -> Result<(), CliError> {
        self.stage(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")
        })
    }

    pub fn commit(self) -> Result<(), CliError> {
        for (tmp, name) in self.files {
            let target = self.dir.join(name);
            tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "type", content = "coordinates")]
pub enum Geometry {
    Point([f64; 2]),
    LineString(Vec<[f64; 2]>),
    Polygon(Vec<Vec<[f64; 2]>>),
}

impl Geometry {
    /// A closed hull ring as GeoJSON, `[lon, lat]`. One- and two-vertex
    /// hulls cannot form a valid polygon and become a point or a segment.
    pub fn from_hull(hull: &[GeoPoint]) -> Self {
        let ring: Vec<[f64; 2]> = hull.iter().map(|g| [g.lon, g.lat]).collect();
        match ring.len() {
            0 | 1 | 2 => Geometry::Point(ring[0]),
            3 => Geometry::LineString(ring[..2].to_vec()),
            _ => Geometry::Polygon(vec![ring]),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FeatureProperties {
    pub id: String,
    pub depth: usize,
    pub photo_count: usize,
    pub poi_count: usize,
    pub params_used: Params<f64>,
    pub top_tags: Vec<String>,
    pub radius_m: f64,
    pub centroid: [f64; 2],
    pub silhouette_context: Option<f64>,
    pub fallback: bool,
}

#[derive(Debug, Serialize)]
pub struct Feature {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub id: String,
    pub geometry: Geometry,
    pub properties: FeatureProperties,
}

#[derive(Debug, Serialize)]
pub struct FeatureCollection {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub features: Vec<Feature>,
}

pub fn feature_collection(entities: &[&Entity], profiles: &[EntityProfile]) -> FeatureCollection {
    let features = entities
        .iter()
        .zip(profiles)
        .map(|(e, p)| Feature {
            kind: "Feature",
            id: e.id.clone(),
            geometry: Geometry::from_hull(&e.hull),
            properties: FeatureProperties {
                id: e.id.clone(),
                depth: e.depth,
                photo_count: e.member_photos.len(),
                poi_count: e.member_pois.len(),
                params_used: e.params_used,
                top_tags: p.top_tags.iter().take(3).map(|r| r.tag.clone()).collect(),
                radius_m: e.radius_m,
                centroid: [e.centroid.lon, e.centroid.lat],
                silhouette_context: e.silhouette_context,
                fallback: e.fallback,
            },
        })
        .collect();
    FeatureCollection {
        kind: "FeatureCollection",
        features,
    }
}

#[derive(Debug, Serialize)]
pub struct IterationSummary {
    pub parent: String,
    pub depth: usize,
    pub eps: f64,
    pub min_pts: usize,
    pub points: usize,
    pub clusters: usize,
    pub noise: usize,
    pub silhouette: Option<f64>,
    pub silhouette_sampled: bool,
    pub silhouette_sample_size: usize,
}

#[derive(Debug, Serialize)]
pub struct Counts {
    pub records_in: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub photos: IngestReport,
    pub pois: Option<IngestReport>,
    pub entities: usize,
    pub fates: FateCounts,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub tool: &'static str,
    pub version: &'static str,
    pub counts: Counts,
    pub iterations: Vec<IterationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<&'static str, f64>>,
    pub config: RunConfig,
}

pub fn iteration_summaries(tree: &EntityTree) -> Vec<IterationSummary> {
    tree.iterations()
        .into_iter()
        .map(|it| IterationSummary {
            parent: it.parent.clone(),
            depth: it.depth,
            eps: it.params.eps,
            min_pts: it.params.min_pts,
            points: it.point_count,
            clusters: it.cluster_count,
            noise: it.noise_count,
            silhouette: it.silhouette,
            silhouette_sampled: it.silhouette_sampled,
            silhouette_sample_size: it.silhouette_sample_size,
        })
        .collect()
}
