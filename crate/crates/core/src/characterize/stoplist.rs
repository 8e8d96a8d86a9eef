use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::ingest::normalize_tag;

const ENGLISH: &str = include_str!("../../data/stopwords_en.txt");
const ITALIAN: &str = include_str!("../../data/stopwords_it.txt");
const DOMAIN: &str = include_str!("../../data/domain_stopwords.txt");

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainPattern {
    Exact(String),
    /// Matches any tag starting with this text, which ends in `=`.
    Prefix(String),
}

impl DomainPattern {
    pub fn matches(&self, tag: &str) -> bool {
        match self {
            DomainPattern::Exact(s) => tag == s,
            DomainPattern::Prefix(p) => tag.starts_with(p.as_str()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StopLists {
    pub language_stopwords: HashSet<String>,
    pub domain_stop_patterns: Vec<DomainPattern>,
}

/// Entries of a stop-list file: one per line, `#` starts a comment, blank
/// lines ignored. Entries are normalized like tags.
fn entries(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .filter_map(normalize_tag)
}

impl StopLists {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Bundled English and Italian function words plus platform tags.
    pub fn builtin() -> Self {
        let mut s = Self::empty();
        s.add_language_list(ENGLISH);
        s.add_language_list(ITALIAN);
        s.add_domain_list(DOMAIN);
        s
    }

    pub fn add_language_list(&mut self, text: &str) {
        self.language_stopwords.extend(entries(text));
    }

    /// Entries ending in `=` become prefix patterns, others exact literals.
    pub fn add_domain_list(&mut self, text: &str) {
        for e in entries(text) {
            let pattern = if e.ends_with('=') {
                DomainPattern::Prefix(e)
            } else {
                DomainPattern::Exact(e)
            };
            if !self.domain_stop_patterns.contains(&pattern) {
                self.domain_stop_patterns.push(pattern);
            }
        }
    }

    /// A user-supplied list: prefixes go to the domain patterns, plain
    /// terms are exact matches either way.
    pub fn add_user_list(&mut self, text: &str) {
        for e in entries(text) {
            if e.ends_with('=') {
                let p = DomainPattern::Prefix(e);
                if !self.domain_stop_patterns.contains(&p) {
                    self.domain_stop_patterns.push(p);
                }
            } else {
                self.language_stopwords.insert(e);
            }
        }
    }

    pub fn is_stopword(&self, tag: &str) -> bool {
        self.language_stopwords.contains(tag)
            || self.domain_stop_patterns.iter().any(|p| p.matches(tag))
    }
}

/// Removes stop words, keeping order and multiplicity of the rest.
pub fn filter_stopwords<S: AsRef<str>>(tags: &[S], lists: &StopLists) -> Vec<String> {
    tags.iter()
        .map(AsRef::as_ref)
        .filter(|t| !lists.is_stopword(t))
        .map(str::to_owned)
        .collect()
}
