//! Tag weighting with the entity as the document unit.
//!
//! `tf(t, e) = count(t, e) / |e|`, `idf(t) = ln(N / df(t))`. A tag present in
//! every entity scores zero and is never reported.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

/// Tag multiset: tag -> occurrences.
pub type TagCounts = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTag {
    pub tag: String,
    pub score: f64,
}

/// Document frequencies over all entities.
#[derive(Debug, Clone, Default)]
pub struct TfIdfCorpus {
    documents: usize,
    df: HashMap<String, usize>,
}

impl TfIdfCorpus {
    pub fn new<'a>(docs: impl IntoIterator<Item = &'a TagCounts>) -> Self {
        let mut corpus = Self::default();
        for doc in docs {
            corpus.documents += 1;
            for (tag, &n) in doc {
                if n > 0 {
                    *corpus.df.entry(tag.clone()).or_default() += 1;
                }
            }
        }
        corpus
    }

    pub fn documents(&self) -> usize {
        self.documents
    }

    pub fn df(&self, tag: &str) -> usize {
        self.df.get(tag).copied().unwrap_or(0)
    }

    pub fn idf(&self, tag: &str) -> f64 {
        match self.df(tag) {
            0 => 0.0,
            df => (self.documents as f64 / df as f64).ln(),
        }
    }

    /// Top `k` positive scores, descending, equal scores by tag ascending.
    pub fn rank(&self, doc: &TagCounts, k: usize) -> Vec<RankedTag> {
        let total: usize = doc.values().sum();
        if total == 0 {
            return Vec::new();
        }
        let mut scored: Vec<RankedTag> = doc
            .iter()
            .filter(|(_, &n)| n > 0)
            .map(|(tag, &n)| RankedTag {
                tag: tag.clone(),
                score: n as f64 / total as f64 * self.idf(tag),
            })
            .filter(|r| r.score > 0.0)
            .collect();
        scored.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.tag.cmp(&b.tag))
        });
        scored.truncate(k);
        scored
    }
}

/// Ranks every entity's tags against the corpus they form together.
pub fn tfidf_rank(docs: &BTreeMap<String, TagCounts>, k: usize) -> BTreeMap<String, Vec<RankedTag>> {
    let corpus = TfIdfCorpus::new(docs.values());
    docs.iter()
        .map(|(id, doc)| (id.clone(), corpus.rank(doc, k)))
        .collect()
}

/// Builds a multiset from a tag stream.
pub fn tag_counts<'a>(tags: impl IntoIterator<Item = &'a str>) -> TagCounts {
    let mut out = TagCounts::new();
    for t in tags {
        *out.entry(t.to_owned()).or_default() += 1;
    }
    out
}
