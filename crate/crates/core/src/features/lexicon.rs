//! Word-to-emotion and word-to-polarity lexicons.

use std::collections::BTreeMap;
use std::path::Path;

use crate::annotation::{Emotion, EmotionSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const BUNDLED_EMOTION_LEXICON: &str = include_str!("../data/emotion_lexicon.tsv");
const BUNDLED_SENTIMENT_LEXICON: &str = include_str!("../data/sentiment_lexicon.tsv");

/// Word -> emotion associations, EmoLex-compatible layout:
/// `word<TAB>emotion<TAB>flag(0|1)`. Words with no flagged emotion are
/// dropped on load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmotionLexicon {
    entries: BTreeMap<String, EmotionSet>,
}

impl EmotionLexicon {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, EmotionSet)>) -> Self {
        let entries = entries
            .into_iter()
            .filter(|(_, set)| !set.is_empty())
            .map(|(w, set)| (w.to_lowercase(), set))
            .collect();
        EmotionLexicon { entries }
    }

    pub fn bundled() -> Self {
        Self::parse(
            BUNDLED_EMOTION_LEXICON,
            Path::new("<bundled emotion lexicon>"),
        )
        .expect("bundled lexicon parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content, path)
    }

    fn parse(content: &str, path: &Path) -> Result<Self> {
        let mut entries: BTreeMap<String, EmotionSet> = BTreeMap::new();
        for (idx, line) in content.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("expected 3 tab-separated columns, found {}", cols.len()),
                ));
            }
            let flag = match cols[2].trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(path, idx + 1, format!("bad flag {other:?}"))),
            };
            if !flag {
                continue;
            }
            let emotion =
                Emotion::parse(cols[1]).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
            entries
                .entry(cols[0].trim().to_lowercase())
                .or_insert(EmotionSet::EMPTY)
                .insert(emotion);
        }
        Ok(EmotionLexicon { entries })
    }

    pub fn lookup(&self, word: &str) -> Option<EmotionSet> {
        self.entries.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Words associated with one emotion, in lexicographic order.
    pub fn words_for(&self, emotion: Emotion) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, set)| set.contains(emotion))
            .map(|(w, _)| w.as_str())
            .collect()
    }

    /// Entries in lexicographic order.
    pub fn entries_vec(&self) -> Vec<(String, EmotionSet)> {
        self.entries.iter().map(|(w, s)| (w.clone(), *s)).collect()
    }
}

/// `score(e) = |tokens whose entry contains e| / max(1, |tokens|)`.
pub fn lexicon_scores<F: Scalar>(tokens: &[String], lexicon: &EmotionLexicon) -> [F; 8] {
    let mut hits = [0usize; 8];
    for t in tokens {
        if let Some(set) = lexicon.lookup(t) {
            for e in set.iter() {
                hits[e.wheel_position() as usize] += 1;
            }
        }
    }
    let denom = F::from_usize_lossy(tokens.len().max(1));
    let mut scores = [F::zero(); 8];
    for (slot, &h) in scores.iter_mut().zip(&hits) {
        *slot = F::from_usize_lossy(h) / denom;
    }
    scores
}

/// Coarse sentiment of a token sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
}

/// Anything that can assign a coarse sentiment to a token sequence.
pub trait SentimentProvider {
    fn polarity(&self, tokens: &[String]) -> Polarity;
}

/// Signed word list: `word<TAB>polarity(+1|-1)`. Sentiment is the sign of the
/// summed polarity of matched tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentimentLexicon {
    entries: BTreeMap<String, i8>,
}

impl SentimentLexicon {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, i8)>) -> Self {
        SentimentLexicon {
            entries: entries
                .into_iter()
                .map(|(w, p)| (w.to_lowercase(), p.signum()))
                .collect(),
        }
    }

    /// Entries in lexicographic order.
    pub fn entries_vec(&self) -> Vec<(String, i8)> {
        self.entries.iter().map(|(w, p)| (w.clone(), *p)).collect()
    }

    pub fn bundled() -> Self {
        Self::parse(
            BUNDLED_SENTIMENT_LEXICON,
            Path::new("<bundled sentiment lexicon>"),
        )
        .expect("bundled lexicon parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content, path)
    }

    fn parse(content: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, line) in content.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("expected 2 tab-separated columns, found {}", cols.len()),
                ));
            }
            let polarity: i8 = match cols[1].trim() {
                "+1" | "1" => 1,
                "-1" => -1,
                other => {
                    return Err(Error::parse(
                        path,
                        idx + 1,
                        format!("bad polarity {other:?}"),
                    ))
                }
            };
            entries.insert(cols[0].trim().to_lowercase(), polarity);
        }
        Ok(SentimentLexicon { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl SentimentProvider for SentimentLexicon {
    fn polarity(&self, tokens: &[String]) -> Polarity {
        let score: i32 = tokens
            .iter()
            .filter_map(|t| self.entries.get(t))
            .map(|&p| i32::from(p))
            .sum();
        match score.cmp(&0) {
            std::cmp::Ordering::Less => Polarity::Negative,
            std::cmp::Ordering::Equal => Polarity::Neutral,
            std::cmp::Ordering::Greater => Polarity::Positive,
        }
    }
}
