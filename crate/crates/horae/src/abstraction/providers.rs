//! Similarity providers: the lexical baseline, an explicit pair table, and a
//! client for an external embedding service.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{BasicEvent, EventId};

/// Semantic correlation between two events: equal, negated, or neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityRelation {
    Equivalent,
    Negation,
    Unrelated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityJudgment {
    pub relation: SimilarityRelation,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("embedding request failed: {0}")]
    Http(String),
    #[error("embedding response malformed: {0}")]
    BadResponse(String),
}

/// Pairwise event judge. Implementations must be deterministic for fixed
/// inputs, symmetric in the relation, and safe to call from multiple threads.
pub trait SimilarityProvider: Send + Sync {
    fn judge(&self, a: &BasicEvent, b: &BasicEvent) -> Result<SimilarityJudgment, ProviderError>;
}

static STOPWORDS: LazyLock<BTreeSet<&'static str>> = LazyLock::new(|| {
    [
        "the", "a", "an", "is", "are", "be", "been", "being", "of", "to", "for", "in", "on",
        "at", "it", "this", "that", "these", "those", "with", "by", "from", "as",
    ]
    .into_iter()
    .collect()
});

/// Pure negation markers: stripped from the token set, flipping parity.
const NEGATION_MARKERS: &[&str] = &["no", "not", "never", "without"];

/// Antonym markers folded to their positive form, flipping parity.
static ANTONYMS: LazyLock<BTreeMap<&'static str, &'static str>> = LazyLock::new(|| {
    [
        ("denies", "approves"),
        ("deny", "approve"),
        ("denied", "approved"),
        ("declined", "approved"),
        ("declines", "approves"),
        ("depleted", "remains"),
        ("prohibited", "allowed"),
        ("forbidden", "allowed"),
    ]
    .into_iter()
    .collect()
});

fn is_cjk(c: char) -> bool {
    matches!(c,
        '\u{4E00}'..='\u{9FFF}'
        | '\u{3400}'..='\u{4DBF}'
        | '\u{3040}'..='\u{30FF}'
        | '\u{AC00}'..='\u{D7AF}')
}

/// Lowercased word tokens; CJK runs are emitted as character bigrams since
/// whitespace tokenization does not apply to them (scored but weak).
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let mut cjk_run: Vec<char> = Vec::new();
    let flush_word = |word: &mut String, tokens: &mut Vec<String>| {
        if !word.is_empty() {
            tokens.push(std::mem::take(word));
        }
    };
    let flush_cjk = |run: &mut Vec<char>, tokens: &mut Vec<String>| {
        match run.len() {
            0 => {}
            1 => tokens.push(run[0].to_string()),
            _ => {
                for pair in run.windows(2) {
                    tokens.push(pair.iter().collect());
                }
            }
        }
        run.clear();
    };
    for c in text.chars() {
        if is_cjk(c) {
            flush_word(&mut word, &mut tokens);
            cjk_run.push(c);
        } else if c.is_alphanumeric() {
            flush_cjk(&mut cjk_run, &mut tokens);
            word.extend(c.to_lowercase());
        } else {
            flush_word(&mut word, &mut tokens);
            flush_cjk(&mut cjk_run, &mut tokens);
        }
    }
    flush_word(&mut word, &mut tokens);
    flush_cjk(&mut cjk_run, &mut tokens);
    tokens
}

fn content_tokens(text: &str) -> BTreeSet<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !STOPWORDS.contains(t.as_str()))
        .collect()
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    if union == 0 {
        0.0
    } else {
        intersection as f64 / union as f64
    }
}

/// Plain lexical similarity: Jaccard overlap of lowercased,
/// stopword-stripped tokens. The in-repo default for metric scoring.
pub fn lexical_similarity(a: &str, b: &str) -> f64 {
    jaccard(&content_tokens(a), &content_tokens(b))
}

/// Strips negation markers and folds antonyms to their positive form,
/// returning the normalized token set and the negation parity (0/1).
fn negation_normalize(tokens: BTreeSet<String>) -> (BTreeSet<String>, u8) {
    let mut parity = 0u8;
    let mut out = BTreeSet::new();
    for t in tokens {
        if NEGATION_MARKERS.contains(&t.as_str()) {
            parity ^= 1;
        } else if let Some(positive) = ANTONYMS.get(t.as_str()) {
            parity ^= 1;
            out.insert((*positive).to_owned());
        } else {
            out.insert(t);
        }
    }
    (out, parity)
}

/// Baseline judge: Jaccard overlap of negation-normalized content tokens.
/// Matching token sets are `Equivalent` when both sides carry the same
/// negation parity and `Negation` otherwise; anything below the match bar is
/// `Unrelated`. The score is the normalized overlap so negation judgments
/// clear the same acceptance threshold as equality judgments.
pub fn lexical_judge(a: &BasicEvent, b: &BasicEvent) -> SimilarityJudgment {
    const MATCH_BAR: f64 = 0.999;
    let (set_a, parity_a) = negation_normalize(content_tokens(&a.joined_text()));
    let (set_b, parity_b) = negation_normalize(content_tokens(&b.joined_text()));
    let score = jaccard(&set_a, &set_b);
    let relation = if score >= MATCH_BAR {
        if parity_a == parity_b {
            SimilarityRelation::Equivalent
        } else {
            SimilarityRelation::Negation
        }
    } else {
        SimilarityRelation::Unrelated
    };
    SimilarityJudgment { relation, score }
}

/// Token-overlap judge with a negation-marker heuristic.
#[derive(Debug, Default, Clone, Copy)]
pub struct LexicalProvider;

impl SimilarityProvider for LexicalProvider {
    fn judge(&self, a: &BasicEvent, b: &BasicEvent) -> Result<SimilarityJudgment, ProviderError> {
        Ok(lexical_judge(a, b))
    }
}

/// One entry of a table-driven judgment file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TablePair {
    pub a: String,
    pub b: String,
    pub relation: SimilarityRelation,
    pub score: f64,
}

/// Judge backed by an explicit pair list; unlisted pairs are `Unrelated`.
#[derive(Debug, Default, Clone)]
pub struct TableDrivenProvider {
    pairs: BTreeMap<(EventId, EventId), (SimilarityRelation, f64)>,
}

impl TableDrivenProvider {
    pub fn from_pairs(pairs: impl IntoIterator<Item = TablePair>) -> Self {
        let mut map = BTreeMap::new();
        for p in pairs {
            let key = ordered(EventId(p.a), EventId(p.b));
            map.insert(key, (p.relation, p.score));
        }
        TableDrivenProvider { pairs: map }
    }

    /// Loads a JSON array of `{"a", "b", "relation", "score"}` objects.
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        let pairs: Vec<TablePair> = serde_json::from_str(json)?;
        Ok(Self::from_pairs(pairs))
    }
}

fn ordered(a: EventId, b: EventId) -> (EventId, EventId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SimilarityProvider for TableDrivenProvider {
    fn judge(&self, a: &BasicEvent, b: &BasicEvent) -> Result<SimilarityJudgment, ProviderError> {
        let key = ordered(a.id.clone(), b.id.clone());
        let (relation, score) = self
            .pairs
            .get(&key)
            .copied()
            .unwrap_or((SimilarityRelation::Unrelated, 0.0));
        Ok(SimilarityJudgment { relation, score })
    }
}

/// Client for an external embedding service: cosine similarity of the two
/// event texts, with negation detected by the lexical parity heuristic.
///
/// Protocol: `POST {base}/embed` with `{"texts": [...]}` returning
/// `{"vectors": [[...], ...]}`.
pub struct EmbeddingClientProvider {
    base_url: String,
    relation_threshold: f64,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingClientProvider {
    /// `relation_threshold` is the cosine score at which the client reports a
    /// correlation instead of `Unrelated`.
    pub fn new(base_url: impl Into<String>, relation_threshold: f64) -> Self {
        EmbeddingClientProvider {
            base_url: base_url.into().trim_end_matches('/').to_owned(),
            relation_threshold,
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .expect("reqwest client"),
        }
    }

    fn embed(&self, texts: Vec<&str>) -> Result<Vec<Vec<f64>>, ProviderError> {
        let url = format!("{}/embed", self.base_url);
        let resp = self
            .client
            .post(&url)
            .json(&EmbedRequest { texts })
            .send()
            .map_err(|e| ProviderError::Http(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(ProviderError::Http(format!("status {}", resp.status())));
        }
        let body: EmbedResponse = resp
            .json()
            .map_err(|e| ProviderError::BadResponse(e.to_string()))?;
        Ok(body.vectors)
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

impl SimilarityProvider for EmbeddingClientProvider {
    fn judge(&self, a: &BasicEvent, b: &BasicEvent) -> Result<SimilarityJudgment, ProviderError> {
        let text_a = a.joined_text();
        let text_b = b.joined_text();
        let vectors = self.embed(vec![&text_a, &text_b])?;
        if vectors.len() != 2 || vectors[0].len() != vectors[1].len() || vectors[0].is_empty() {
            return Err(ProviderError::BadResponse(
                "expected two vectors of equal nonzero length".to_owned(),
            ));
        }
        let score = cosine(&vectors[0], &vectors[1]).max(0.0);
        let relation = if score >= self.relation_threshold {
            let (_, parity_a) = negation_normalize(content_tokens(&text_a));
            let (_, parity_b) = negation_normalize(content_tokens(&text_b));
            if parity_a == parity_b {
                SimilarityRelation::Equivalent
            } else {
                SimilarityRelation::Negation
            }
        } else {
            SimilarityRelation::Unrelated
        };
        Ok(SimilarityJudgment { relation, score })
    }
}
