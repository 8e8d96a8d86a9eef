//! Photo and POI records: parsing, validation, tag normalization and the
//! seeded synthetic generator.

mod csv_io;
mod synth;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::geo::{bbox_contains, BoundingBox, GeoPoint};

pub use csv_io::{
    format_timestamp, parse_photos, parse_pois, parse_timestamp, write_ground_truth, write_photos,
    write_pois, PHOTO_HEADER, POI_HEADER,
};
pub use synth::{generate_synthetic, BlobSpec, SynthError, SyntheticSpec};

/// Longest accepted tag, in characters.
pub const MAX_TAG_CHARS: usize = 128;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing or malformed header: expected `{expected}`, found `{found}`")]
    MissingHeader { expected: String, found: String },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotoRecord {
    pub id: String,
    pub point: GeoPoint,
    /// UTC seconds since the epoch.
    pub taken_at: i64,
    pub tags: Vec<String>,
    pub user_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord {
    pub id: String,
    pub point: GeoPoint,
    pub category: PoiCategory,
}

/// The ten top-level POI categories plus a catch-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PoiCategory {
    #[serde(rename = "Arts & Entertainment")]
    ArtsEntertainment,
    #[serde(rename = "College & University")]
    CollegeUniversity,
    #[serde(rename = "Event")]
    Event,
    #[serde(rename = "Food")]
    Food,
    #[serde(rename = "Nightlife Spot")]
    NightlifeSpot,
    #[serde(rename = "Outdoors & Recreation")]
    OutdoorsRecreation,
    #[serde(rename = "Professional & Other Places")]
    ProfessionalOther,
    #[serde(rename = "Residence")]
    Residence,
    #[serde(rename = "Shop & Service")]
    ShopService,
    #[serde(rename = "Travel & Transport")]
    TravelTransport,
    #[serde(rename = "Other")]
    Other,
}

impl PoiCategory {
    pub const ALL: [PoiCategory; 11] = [
        PoiCategory::ArtsEntertainment,
        PoiCategory::CollegeUniversity,
        PoiCategory::Event,
        PoiCategory::Food,
        PoiCategory::NightlifeSpot,
        PoiCategory::OutdoorsRecreation,
        PoiCategory::ProfessionalOther,
        PoiCategory::Residence,
        PoiCategory::ShopService,
        PoiCategory::TravelTransport,
        PoiCategory::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PoiCategory::ArtsEntertainment => "Arts & Entertainment",
            PoiCategory::CollegeUniversity => "College & University",
            PoiCategory::Event => "Event",
            PoiCategory::Food => "Food",
            PoiCategory::NightlifeSpot => "Nightlife Spot",
            PoiCategory::OutdoorsRecreation => "Outdoors & Recreation",
            PoiCategory::ProfessionalOther => "Professional & Other Places",
            PoiCategory::Residence => "Residence",
            PoiCategory::ShopService => "Shop & Service",
            PoiCategory::TravelTransport => "Travel & Transport",
            PoiCategory::Other => "Other",
        }
    }

    /// Case-insensitive match on the canonical label; `Night-life Spot` is
    /// accepted as an alias. Unrecognized labels return `None`.
    pub fn from_label(raw: &str) -> Option<Self> {
        let wanted = raw.trim().to_lowercase();
        if wanted == "night-life spot" {
            return Some(PoiCategory::NightlifeSpot);
        }
        Self::ALL
            .into_iter()
            .find(|c| c.label().to_lowercase() == wanted)
    }
}

impl fmt::Display for PoiCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Synthetic ground truth for one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroundTruth {
    Blob(usize),
    Noise,
}

impl fmt::Display for GroundTruth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundTruth::Blob(b) => write!(f, "{b}"),
            GroundTruth::Noise => f.write_str("noise"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub photos: Vec<PhotoRecord>,
    pub pois: Vec<PoiRecord>,
    pub bbox: BoundingBox,
    pub ground_truth: Option<BTreeMap<String, GroundTruth>>,
}

impl Dataset {
    /// Checks that every record lies in `bbox` and ids are unique per kind.
    pub fn new(
        photos: Vec<PhotoRecord>,
        pois: Vec<PoiRecord>,
        bbox: BoundingBox,
        ground_truth: Option<BTreeMap<String, GroundTruth>>,
    ) -> Result<Self, IngestError> {
        let mut seen = HashSet::new();
        for p in &photos {
            if !bbox_contains(&bbox, p.point) {
                return Err(IngestError::InvalidDataset(format!("photo {} outside bbox", p.id)));
            }
            if !seen.insert(p.id.as_str()) {
                return Err(IngestError::InvalidDataset(format!("duplicate photo id {}", p.id)));
            }
        }
        seen.clear();
        for p in &pois {
            if !bbox_contains(&bbox, p.point) {
                return Err(IngestError::InvalidDataset(format!("poi {} outside bbox", p.id)));
            }
            if !seen.insert(p.id.as_str()) {
                return Err(IngestError::InvalidDataset(format!("duplicate poi id {}", p.id)));
            }
        }
        Ok(Self {
            photos,
            pois,
            bbox,
            ground_truth,
        })
    }

    pub fn len(&self) -> usize {
        self.photos.len() + self.pois.len()
    }

    pub fn is_empty(&self) -> bool {
        self.photos.is_empty() && self.pois.is_empty()
    }
}

/// Per-file accounting of accepted and rejected data lines.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: usize,
    pub reasons: BTreeMap<String, usize>,
    /// POIs whose category label was not recognized and became `Other`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub unknown_category: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl IngestReport {
    pub(crate) fn reject(&mut self, reason: &str) {
        self.rejected += 1;
        *self.reasons.entry(reason.to_owned()).or_default() += 1;
    }

    pub fn merge(&mut self, other: &IngestReport) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.unknown_category += other.unknown_category;
        for (k, v) in &other.reasons {
            *self.reasons.entry(k.clone()).or_default() += v;
        }
    }
}

/// NFC, lowercase, trim. Empty or over-long results are dropped.
pub fn normalize_tag(raw: &str) -> Option<String> {
    let tag: String = raw.nfc().collect::<String>().to_lowercase();
    let tag = tag.trim();
    if tag.is_empty() || tag.chars().count() > MAX_TAG_CHARS {
        return None;
    }
    Some(tag.to_owned())
}
