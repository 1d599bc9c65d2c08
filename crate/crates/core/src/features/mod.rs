//! Text features: tokenization, n-gram vocabularies, sparse vectors, and
//! Naive-Bayes log-count ratios.

mod lexicon;

pub use lexicon::{lexicon_scores, EmotionLexicon, Polarity, SentimentLexicon, SentimentProvider};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default vocabulary cap, sized for desk-scale corpora.
pub const DEFAULT_VOCAB_MAX_SIZE: usize = 20_000;
/// Default minimum corpus frequency for a vocabulary entry.
pub const DEFAULT_VOCAB_MIN_COUNT: usize = 2;
/// Default additive smoothing for the log-count ratios.
pub const DEFAULT_NB_ALPHA: f64 = 1.0;

/// Lowercases, splits on whitespace, and strips leading/trailing punctuation.
/// `@` and `#` survive as token prefixes, `_` counts as a word character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .filter_map(clean_token)
        .collect()
}

fn clean_token(raw: &str) -> Option<String> {
    let mut s = raw;
    while let Some(c) = s.chars().next() {
        if c.is_alphanumeric() || c == '_' || c == '@' || c == '#' {
            break;
        }
        s = &s[c.len_utf8()..];
    }
    while let Some(c) = s.chars().last() {
        if c.is_alphanumeric() || c == '_' {
            break;
        }
        s = &s[..s.len() - c.len_utf8()];
    }
    if s.is_empty() {
        None
    } else {
        Some(s.to_string())
    }
}

/// Unigram + adjacent-bigram vocabulary with dense indices. Entries are
/// ranked by corpus frequency, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocab {
    entries: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    pub max_size: usize,
    pub min_count: usize,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, ngram: &str) -> Option<usize> {
        self.index.get(ngram).copied()
    }

    pub fn ngram(&self, index: usize) -> Option<&str> {
        self.entries.get(index).map(String::as_str)
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    /// Rebuilds the lookup index after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
    }

    /// Stable FNV-1a hash of the entry list, used to pin models to the
    /// vocabulary they were trained with.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for entry in &self.entries {
            for b in entry.as_bytes() {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x100000001b3);
            }
            h ^= 0x1f; // entry separator
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

/// Builds a vocabulary over unigrams and adjacent bigrams of the tokenized
/// corpus, keeping entries seen at least `min_count` times and truncating to
/// the `max_size` most frequent.
pub fn build_vocab<'a, I>(docs: I, max_size: usize, min_count: usize) -> Vocab
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut counts: HashMap<String, usize> = HashMap::new();
    for tokens in docs {
        for t in tokens {
            *counts.entry(t.clone()).or_default() += 1;
        }
        for pair in tokens.windows(2) {
            *counts
                .entry(format!("{} {}", pair[0], pair[1]))
                .or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count)
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_size);
    let mut vocab = Vocab {
        entries: ranked.into_iter().map(|(g, _)| g).collect(),
        index: HashMap::new(),
        max_size,
        min_count,
    };
    vocab.reindex();
    vocab
}

/// Sorted sparse feature vector. Indices strictly increase and zero values
/// are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector<F> {
    pairs: Vec<(usize, F)>,
}

impl<F: Scalar> SparseVector<F> {
    pub fn empty() -> Self {
        SparseVector { pairs: Vec::new() }
    }

    /// Validates ordering and non-zero values.
    pub fn from_pairs(pairs: Vec<(usize, F)>) -> Result<Self> {
        for w in pairs.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::Validation(
                    "sparse indices must strictly increase".into(),
                ));
            }
        }
        if pairs.iter().any(|(_, v)| *v == F::zero()) {
            return Err(Error::Validation(
                "sparse vectors must not store zeros".into(),
            ));
        }
        Ok(SparseVector { pairs })
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, F)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Maps every stored value to 1.
    pub fn binarized(&self) -> SparseVector<F> {
        SparseVector {
            pairs: self.pairs.iter().map(|&(i, _)| (i, F::one())).collect(),
        }
    }

    /// Dot product against a dense weight vector.
    pub fn dot(&self, dense: &[F]) -> F {
        self.pairs
            .iter()
            .fold(F::zero(), |acc, &(i, v)| acc + v * dense[i])
    }
}

/// Counts vocabulary n-grams in a token sequence. With `binarize`, non-zero
/// counts map to 1.
pub fn vectorize<F: Scalar>(tokens: &[String], vocab: &Vocab, binarize: bool) -> SparseVector<F> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for t in tokens {
        if let Some(i) = vocab.index_of(t) {
            *counts.entry(i).or_default() += 1;
        }
    }
    for pair in tokens.windows(2) {
        if let Some(i) = vocab.index_of(&format!("{} {}", pair[0], pair[1])) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let mut pairs: Vec<(usize, F)> = counts
        .into_iter()
        .map(|(i, c)| {
            (
                i,
                if binarize {
                    F::one()
                } else {
                    F::from_usize_lossy(c)
                },
            )
        })
        .collect();
    pairs.sort_by_key(|&(i, _)| i);
    SparseVector { pairs }
}

/// Per-feature log ratio of smoothed class-conditional counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbRatios<F> {
    pub r: Vec<F>,
    pub alpha: F,
}

impl<F: Scalar> NbRatios<F> {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `r o binarize(x)`: the NB-SVM feature transform.
    pub fn transform(&self, x: &SparseVector<F>) -> SparseVector<F> {
        let pairs = x
            .iter()
            .map(|(i, _)| (i, self.r[i]))
            .filter(|(_, v)| *v != F::zero())
            .collect();
        SparseVector { pairs }
    }
}

/// Computes `r_i = log((p_i/|p|_1) / (q_i/|q|_1))` where `p`/`q` are the
/// alpha-smoothed feature sums of the positive/negative class. Exact
/// elementwise antisymmetry under label swap follows from computing the two
/// log terms separately.
pub fn nb_log_count_ratios<F: Scalar>(
    vectors: &[SparseVector<F>],
    positive: &[bool],
    alpha: F,
    vocab_size: usize,
) -> Result<NbRatios<F>> {
    if vectors.len() != positive.len() {
        return Err(Error::Validation(format!(
            "{} vectors but {} labels",
            vectors.len(),
            positive.len()
        )));
    }
    if alpha <= F::zero() {
        return Err(Error::Config(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    if n_pos == 0 || n_pos == positive.len() {
        return Err(Error::Validation(
            "log-count ratios need both classes present".into(),
        ));
    }
    let mut p = vec![alpha; vocab_size];
    let mut q = vec![alpha; vocab_size];
    for (vec, &is_pos) in vectors.iter().zip(positive) {
        let side = if is_pos { &mut p } else { &mut q };
        for (i, v) in vec.iter() {
            side[i] = side[i] + v;
        }
    }
    let p_norm = p.iter().fold(F::zero(), |a, &b| a + b.abs()).ln();
    let q_norm = q.iter().fold(F::zero(), |a, &b| a + b.abs()).ln();
    let r = p
        .iter()
        .zip(&q)
        .map(|(&pi, &qi)| (pi.ln() - p_norm) - (qi.ln() - q_norm))
        .collect();
    Ok(NbRatios { r, alpha })
}
