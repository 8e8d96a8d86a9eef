//! Per-entity profiles: when photos were taken, which tags set the entity
//! apart, what kinds of POIs it holds, and how its top tags evolve by year.

mod stoplist;
mod tfidf;

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, FixedOffset, Timelike};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use stoplist::{filter_stopwords, DomainPattern, StopLists};
pub use tfidf::{tag_counts, tfidf_rank, RankedTag, TagCounts, TfIdfCorpus};

use crate::ingest::{Dataset, PhotoRecord, PoiCategory, PoiRecord};
use crate::refine::Entity;

/// Europe/Rome standard time, no DST.
pub const DEFAULT_TZ_OFFSET_MINUTES: i32 = 60;
pub const DEFAULT_TOP_K: usize = 10;

pub type CategoryCounts = BTreeMap<PoiCategory, usize>;
pub type TagTimeseries = BTreeMap<String, BTreeMap<i32, usize>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub top_k: usize,
    pub tz_offset_minutes: i32,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            top_k: DEFAULT_TOP_K,
            tz_offset_minutes: DEFAULT_TZ_OFFSET_MINUTES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityProfile {
    pub entity_id: String,
    pub photo_count: usize,
    pub poi_count: usize,
    pub tz_offset_minutes: i32,
    /// Monday..Sunday.
    pub dow_hist: [usize; 7],
    /// Hour 0..23.
    pub hod_hist: [usize; 24],
    pub top_tags: Vec<RankedTag>,
    pub category_counts: CategoryCounts,
    pub tag_timeseries: TagTimeseries,
}

fn local_time(secs: i64, tz_offset_minutes: i32) -> DateTime<FixedOffset> {
    let tz = FixedOffset::east_opt(tz_offset_minutes * 60).expect("offset within +-24h");
    DateTime::from_timestamp(secs, 0)
        .expect("timestamp in chrono range")
        .with_timezone(&tz)
}

/// Day-of-week (Monday first) and hour-of-day counts in the given offset.
pub fn temporal_histograms<'a>(
    photos: impl IntoIterator<Item = &'a PhotoRecord>,
    tz_offset_minutes: i32,
) -> ([usize; 7], [usize; 24]) {
    let mut dow = [0; 7];
    let mut hod = [0; 24];
    for p in photos {
        let t = local_time(p.taken_at, tz_offset_minutes);
        dow[t.weekday().num_days_from_monday() as usize] += 1;
        hod[t.hour() as usize] += 1;
    }
    (dow, hod)
}

/// Counts per category; all eleven keys are always present.
pub fn category_counts<'a>(pois: impl IntoIterator<Item = &'a PoiRecord>) -> CategoryCounts {
    let mut out: CategoryCounts = PoiCategory::ALL.iter().map(|&c| (c, 0)).collect();
    for p in pois {
        *out.entry(p.category).or_default() += 1;
    }
    out
}

/// Photos per calendar year for each listed tag. A photo that repeats a tag
/// still counts once.
pub fn tag_timeseries<'a>(
    photos: impl IntoIterator<Item = &'a PhotoRecord>,
    tags: &[String],
    tz_offset_minutes: i32,
) -> TagTimeseries {
    let mut out: TagTimeseries = tags.iter().map(|t| (t.clone(), BTreeMap::new())).collect();
    for p in photos {
        let year = local_time(p.taken_at, tz_offset_minutes).year();
        for (tag, years) in out.iter_mut() {
            if p.tags.iter().any(|t| t == tag) {
                *years.entry(year).or_default() += 1;
            }
        }
    }
    out
}

/// Stop-word-filtered tag multiset of an entity's photos.
pub fn entity_tag_counts(entity: &Entity, dataset: &Dataset, lists: &StopLists) -> TagCounts {
    tag_counts(
        entity
            .member_photos
            .iter()
            .flat_map(|&i| dataset.photos[i].tags.iter())
            .map(String::as_str)
            .filter(|t| !lists.is_stopword(t)),
    )
}

/// Assembles one profile. `tags` is the entity's filtered multiset and
/// `corpus` the document frequencies over all entities.
pub fn profile_entity(
    entity: &Entity,
    dataset: &Dataset,
    tags: &TagCounts,
    corpus: &TfIdfCorpus,
    config: &ProfileConfig,
) -> EntityProfile {
    let photos: Vec<&PhotoRecord> = entity.member_photos.iter().map(|&i| &dataset.photos[i]).collect();
    let (dow_hist, hod_hist) = temporal_histograms(photos.iter().copied(), config.tz_offset_minutes);
    let top_tags = corpus.rank(tags, config.top_k);
    let top: Vec<String> = top_tags.iter().map(|r| r.tag.clone()).collect();
    EntityProfile {
        entity_id: entity.id.clone(),
        photo_count: photos.len(),
        poi_count: entity.member_pois.len(),
        tz_offset_minutes: config.tz_offset_minutes,
        dow_hist,
        hod_hist,
        top_tags,
        category_counts: category_counts(entity.member_pois.iter().map(|&i| &dataset.pois[i])),
        tag_timeseries: tag_timeseries(photos.iter().copied(), &top, config.tz_offset_minutes),
    }
}

/// Profiles every entity: one corpus-wide document-frequency pass, then
/// independent per-entity work. Output order follows `entities`.
pub fn profile_entities(
    entities: &[Entity],
    dataset: &Dataset,
    lists: &StopLists,
    config: &ProfileConfig,
) -> Vec<EntityProfile> {
    let docs: Vec<TagCounts> = entities
        .par_iter()
        .map(|e| entity_tag_counts(e, dataset, lists))
        .collect();
    let corpus = TfIdfCorpus::new(&docs);
    entities
        .par_iter()
        .zip(&docs)
        .map(|(e, doc)| profile_entity(e, dataset, doc, &corpus, config))
        .collect()
}
