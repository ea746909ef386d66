//! Tokenization, weighted inverted index and ranked keyword search over
//! advertisement text.
//!
//! A document's weight for a token is the field-weighted count of the token
//! in its name, description and WSDL identifier text. A query matches any
//! document sharing at least one token with it; matches are scored
//! `sum(weighted_tf * ln(1 + N / (1 + df)))` over the distinct query tokens
//! and returned best-first, ties broken by ascending MSID.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::adverts::{ModuleSpecAdvertisement, ModuleSpecId};

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("document {0} is already indexed")]
    DuplicateDocument(ModuleSpecId),
    #[error("query has no searchable tokens")]
    EmptyQuery,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("field weights must be positive and finite")]
    InvalidWeights,
}

/// Lowercase `[a-z0-9]+` term produced by [`tokenize`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Splits on non-alphanumerics and lower-to-upper camel-case boundaries,
/// lowercases, and drops single-character tokens that are not digits.
pub fn tokenize(text: &str) -> Vec<Token> {
    fn flush(buf: &mut String, out: &mut Vec<Token>) {
        if buf.len() >= 2 || buf.bytes().all(|b| b.is_ascii_digit()) && !buf.is_empty() {
            out.push(Token(std::mem::take(buf)));
        } else {
            buf.clear();
        }
    }

    let mut out = Vec::new();
    let mut buf = String::new();
    let mut prev_lower = false;
    for c in text.chars() {
        if c.is_ascii_alphanumeric() {
            if c.is_ascii_uppercase() && prev_lower {
                flush(&mut buf, &mut out);
            }
            buf.push(c.to_ascii_lowercase());
            prev_lower = c.is_ascii_lowercase();
        } else {
            flush(&mut buf, &mut out);
            prev_lower = false;
        }
    }
    flush(&mut buf, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldWeights {
    pub name: f64,
    pub description: f64,
    pub wsdl: f64,
}

impl Default for FieldWeights {
    fn default() -> Self {
        Self { name: 3.0, description: 2.0, wsdl: 1.0 }
    }
}

impl FieldWeights {
    pub fn new(name: f64, description: f64, wsdl: f64) -> Result<Self, IndexError> {
        let weights = Self { name, description, wsdl };
        weights.validate()?;
        Ok(weights)
    }

    pub fn validate(&self) -> Result<(), IndexError> {
        let ok = |w: f64| w.is_finite() && w > 0.0;
        if ok(self.name) && ok(self.description) && ok(self.wsdl) {
            Ok(())
        } else {
            Err(IndexError::InvalidWeights)
        }
    }
}

/// Field-weighted term frequencies of one advertisement.
pub fn weighted_terms(advert: &ModuleSpecAdvertisement, weights: &FieldWeights) -> BTreeMap<Token, f64> {
    let mut terms = BTreeMap::new();
    let fields = [
        (advert.name.as_str(), weights.name),
        (advert.description.as_str(), weights.description),
        (&advert.wsdl.search_text(), weights.wsdl),
    ];
    for (text, weight) in fields {
        for token in tokenize(text) {
            *terms.entry(token).or_insert(0.0) += weight;
        }
    }
    terms
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredHit {
    pub msid: ModuleSpecId,
    pub score: f64,
    pub matched_terms: BTreeSet<Token>,
}

/// Orders hits best-first: descending score, then ascending MSID.
pub fn rank_order(a: &ScoredHit, b: &ScoredHit) -> std::cmp::Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.msid.cmp(&b.msid))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub hits: Vec<ScoredHit>,
    /// Matching documents before the top-k cut.
    pub total_matched: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvertedIndex {
    postings: BTreeMap<Token, BTreeMap<ModuleSpecId, f64>>,
    docs: BTreeMap<ModuleSpecId, Vec<Token>>,
}

impl InvertedIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn doc_freq(&self, token: &Token) -> usize {
        self.postings.get(token).map_or(0, BTreeMap::len)
    }

    pub fn weighted_tf(&self, token: &Token, msid: &ModuleSpecId) -> f64 {
        self.postings.get(token).and_then(|p| p.get(msid)).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, msid: &ModuleSpecId) -> bool {
        self.docs.contains_key(msid)
    }

    pub fn idf(&self, token: &Token) -> f64 {
        let n = self.docs.len() as f64;
        (1.0 + n / (1.0 + self.doc_freq(token) as f64)).ln()
    }

    pub fn index_advert(&mut self, advert: &ModuleSpecAdvertisement, weights: &FieldWeights) -> Result<(), IndexError> {
        if self.docs.contains_key(&advert.msid) {
            return Err(IndexError::DuplicateDocument(advert.msid.clone()));
        }
        let terms = weighted_terms(advert, weights);
        let tokens = terms.keys().cloned().collect();
        for (token, weight) in terms {
            self.postings.entry(token).or_default().insert(advert.msid.clone(), weight);
        }
        self.docs.insert(advert.msid.clone(), tokens);
        Ok(())
    }

    /// Drops every posting of `msid`. Returns whether it was indexed.
    pub fn remove_advert(&mut self, msid: &ModuleSpecId) -> bool {
        let Some(tokens) = self.docs.remove(msid) else {
            return false;
        };
        for token in tokens {
            if let Some(list) = self.postings.get_mut(&token) {
                list.remove(msid);
                if list.is_empty() {
                    self.postings.remove(&token);
                }
            }
        }
        true
    }

    pub fn search(&self, query: &str, k: usize) -> Result<SearchResult, IndexError> {
        self.search_filtered(query, k, |_| true)
    }

    /// Like [`search`](Self::search) but only documents accepted by `filter`
    /// can match; `total_matched` counts accepted matches only.
    pub fn search_filtered(
        &self,
        query: &str,
        k: usize,
        filter: impl Fn(&ModuleSpecId) -> bool,
    ) -> Result<SearchResult, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        let terms: BTreeSet<Token> = tokenize(query).into_iter().collect();
        if terms.is_empty() {
            return Err(IndexError::EmptyQuery);
        }
        let mut scores: BTreeMap<&ModuleSpecId, (f64, BTreeSet<Token>)> = BTreeMap::new();
        for token in &terms {
            let Some(list) = self.postings.get(token) else { continue };
            let idf = self.idf(token);
            for (msid, tf) in list {
                if !filter(msid) {
                    continue;
                }
                let slot = scores.entry(msid).or_default();
                slot.0 += tf * idf;
                slot.1.insert(token.clone());
            }
        }
        let total_matched = scores.len();
        let mut hits: Vec<ScoredHit> = scores
            .into_iter()
            .map(|(msid, (score, matched_terms))| ScoredHit { msid: msid.clone(), score, matched_terms })
            .collect();
        hits.sort_by(rank_order);
        hits.truncate(k);
        Ok(SearchResult { hits, total_matched })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adverts::{ModuleClassId, PeerId, ServiceSketch};

    fn toks(s: &str) -> Vec<String> {
        tokenize(s).into_iter().map(|t| t.0).collect()
    }

    fn advert(name: &str, description: &str, ops: &[&str]) -> ModuleSpecAdvertisement {
        let class = ModuleClassId::derive("c");
        let host = PeerId::derive("h");
        let ops: Vec<String> = ops.iter().map(|s| s.to_string()).collect();
        ServiceSketch { class_id: &class, host: &host, name, description, operations: &ops }.build().unwrap()
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(toks("WeatherService"), ["weather", "service"]);
        assert!(toks("").is_empty());
        assert_eq!(toks("get-Forecast_v2 a"), ["get", "forecast", "v2"]);
        assert_eq!(toks("7 x 42 HTTPServer"), ["7", "42", "httpserver"]);
        assert_eq!(toks("weather weather"), ["weather", "weather"]);
        assert_eq!(toks("café"), ["caf"]);
    }

    #[test]
    fn weighted_tf_formula() {
        let weights = FieldWeights::new(3.0, 2.0, 1.0).unwrap();
        let mut index = InvertedIndex::new();
        let mut a = advert("WeatherService", "", &[]);
        a.wsdl.service_name = "Svc".into();
        a.wsdl.target_namespace = "urn:x".into();
        index.index_advert(&a, &weights).unwrap();
        assert_eq!(index.weighted_tf(&Token("weather".into()), &a.msid), 3.0);

        let mut b = advert("Weather", "", &[]);
        b.msid = advert("other", "", &[]).msid;
        b.wsdl.service_name = "weather".into();
        b.wsdl.target_namespace = "urn:weather".into();
        let mut index = InvertedIndex::new();
        index.index_advert(&b, &weights).unwrap();
        assert_eq!(index.weighted_tf(&Token("weather".into()), &b.msid), 5.0);
    }

    #[test]
    fn duplicate_rejected_and_remove_restores() {
        let weights = FieldWeights::default();
        let a = advert("WeatherService", "forecast", &["getForecast"]);
        let b = advert("PictureService", "photos", &["getPicture"]);
        let mut index = InvertedIndex::new();
        index.index_advert(&a, &weights).unwrap();
        assert_eq!(index.index_advert(&a, &weights), Err(IndexError::DuplicateDocument(a.msid.clone())));
        let single = index.clone();
        index.index_advert(&b, &weights).unwrap();
        assert!(index.remove_advert(&b.msid));
        assert_eq!(index, single);
        assert!(index.remove_advert(&a.msid));
        assert_eq!(index, InvertedIndex::new());
        assert!(!index.remove_advert(&a.msid));
    }

    #[test]
    fn remove_updates_doc_freq() {
        let weights = FieldWeights::default();
        let a = advert("WeatherService", "", &[]);
        let b = advert("PictureService", "", &[]);
        let mut index = InvertedIndex::new();
        index.index_advert(&a, &weights).unwrap();
        index.index_advert(&b, &weights).unwrap();
        let service = Token("service".into());
        assert_eq!(index.doc_freq(&service), 2);
        index.remove_advert(&a.msid);
        assert_eq!(index.doc_freq(&service), 1);
        assert_eq!(index.doc_count(), 1);
    }

    #[test]
    fn query_errors() {
        let index = InvertedIndex::new();
        assert_eq!(index.search("a - !", 3), Err(IndexError::EmptyQuery));
        assert_eq!(index.search("weather", 0), Err(IndexError::InvalidK));
        assert_eq!(index.search("weather", 3).unwrap().total_matched, 0);
        assert!(FieldWeights::new(0.0, 1.0, 1.0).is_err());
        assert!(FieldWeights::new(1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn frequency_raises_score() {
        let weights = FieldWeights::default();
        let mut index = InvertedIndex::new();
        let once = advert("alpha", "weather", &[]);
        let mut twice = advert("beta", "weather weather", &[]);
        twice.name = "alpha".into();
        twice.wsdl = once.wsdl.clone();
        index.index_advert(&once, &weights).unwrap();
        index.index_advert(&twice, &weights).unwrap();
        let result = index.search("weather", 10).unwrap();
        assert_eq!(result.hits[0].msid, twice.msid);
        assert!(result.hits[0].score > result.hits[1].score);
    }
}
